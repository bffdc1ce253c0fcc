import { ApiClient } from "./api.js";
import { DashboardView } from "./dashboard.js";
import { StudentView } from "./student.js";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node;
}

async function main(): Promise<void> {
  const api = new ApiClient("");
  const studentRoot = byId("student-view");
  const lecturerRoot = byId("lecturer-view");
  const tabStudent = byId("tab-student");
  const tabLecturer = byId("tab-lecturer");
  const tokenInput = byId("lecturer-token") as HTMLInputElement;
  const taskInput = byId("lecturer-task") as HTMLInputElement;

  const student = new StudentView(api, studentRoot, document);
  await student.mount();

  tabStudent.addEventListener("click", () => {
    studentRoot.style.display = "";
    lecturerRoot.style.display = "none";
  });
  tabLecturer.addEventListener("click", () => {
    studentRoot.style.display = "none";
    lecturerRoot.style.display = "";
  });

  byId("lecturer-load").addEventListener("click", () => {
    api.setToken(tokenInput.value);
    const dashboard = new DashboardView(
      api, byId("dashboard-root"), document, taskInput.value);
    void dashboard.mount();
  });
}

void main();
