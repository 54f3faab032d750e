from pathlib import Path

import pytest

from pathforge import load_db, load_schema

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def yago_schema():
    return load_schema(DATA / "yago_schema.json")


@pytest.fixture(scope="session")
def fig2_db():
    return load_db(DATA / "yago_nodes.csv", DATA / "yago_edges.csv")


@pytest.fixture(scope="session")
def ldbc_schema():
    return load_schema(DATA / "ldbc_schema.json")


@pytest.fixture(scope="session")
def data_dir():
    return DATA
