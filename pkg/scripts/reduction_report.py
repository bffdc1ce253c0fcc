#!/usr/bin/env python3
"""Compare plain edit-distance dedup against rule-based harmonization.

Builds a synthetic corpus of correct submissions (phrasing variants of one
task's solution), then prints how many survive Levenshtein dedup at rising
thresholds versus how many canonical forms remain after harmonization.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sqltutor.analytics import harmonization_reduction, reduction_curve
from sqltutor.config import Task

SCHEMA = """
CREATE TABLE user (id INTEGER PRIMARY KEY, name TEXT, age INTEGER);
CREATE TABLE admin (uid INTEGER REFERENCES user(id), level INTEGER);
"""
SEED = """
INSERT INTO user VALUES (1, 'nora', 18), (2, 'omar', 40), (3, 'pia', 66);
INSERT INTO admin VALUES (1, 5), (3, 1);
"""

TASK = Task(id="ages", description="names of users aged 18 to 65",
            schema_sql=SCHEMA, seed_sql=SEED, hidden_sql="",
            reference_sql="SELECT name FROM user WHERE age BETWEEN 18 AND 65")

# phrasing variants students actually produce: three genuine approaches
# spread over many surface spellings
CORPUS = [
    "SELECT name FROM user WHERE age BETWEEN 18 AND 65",
    "select name from user where age between 18 and 65;",
    "SELECT name FROM user WHERE 18 <= age AND age <= 65",
    "SELECT name FROM user WHERE age >= 18 AND age <= 65",
    "SELECT name FROM user WHERE age >= 18 AND 65 >= age",
    "SELECT u.name FROM user u WHERE u.age BETWEEN 18 AND 65",
    "SELECT user.name FROM user WHERE age BETWEEN 18 AND 65",
    "SELECT name FROM user WHERE id IN "
    "(SELECT id FROM user WHERE age BETWEEN 18 AND 65)",
    "SELECT name FROM user WHERE id IN "
    "(SELECT id FROM user WHERE 18 <= age AND age <= 65)",
    "SELECT name FROM user WHERE NOT (age < 18 OR age > 65)",
]

THRESHOLDS = [0, 5, 10, 15, 20, 25, 30, 35, 40]


def main():
    curve = reduction_curve(CORPUS, THRESHOLDS)
    print(f"corpus: {len(CORPUS)} correct submissions, 3 genuine approaches\n")
    print("surviving solutions by Levenshtein threshold:")
    print("threshold  surviving")
    for t in THRESHOLDS:
        bar = "#" * curve[t]
        print(f"{t:>9}  {curve[t]:>9}  {bar}")
    harmonized = harmonization_reduction(TASK, CORPUS)
    print(f"\ndistinct canonical forms after harmonization: {harmonized}")
    print("(edit distance needs a large threshold to merge spelling variants,"
          " and by then it has merged distinct approaches too;"
          " harmonization separates exactly the genuine approaches)")


if __name__ == "__main__":
    main()
