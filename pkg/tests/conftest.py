import pytest

from golden_pairs import DATA_SQL, SCHEMA_SQL, TABLE3_PAIR
from sqltutor.config import Task
from sqltutor.parser import parse_schema


@pytest.fixture(scope="session")
def schema():
    return parse_schema(SCHEMA_SQL)


@pytest.fixture()
def golden_task():
    return Task(
        id="golden",
        description="seeded example database",
        schema_sql=SCHEMA_SQL,
        seed_sql=DATA_SQL,
        hidden_sql="",
        reference_sql="SELECT name FROM user WHERE age BETWEEN 18 AND 65",
    )


@pytest.fixture()
def york_task():
    return Task(
        id="york",
        description="Names of all hotels in the city of York",
        schema_sql="CREATE TABLE hotels (hotel_id INTEGER PRIMARY KEY, "
                   "name TEXT, location TEXT);",
        seed_sql="INSERT INTO hotels VALUES (1, 'Minster View', 'York'), "
                 "(2, 'Royal Garden', 'London'), (3, 'Ouse Bank', 'York');",
        hidden_sql="",
        reference_sql=TABLE3_PAIR[0].rstrip(";\n"),
    )
