import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixtures
from sqlgrow.harness import open_readonly
from sqlgrow.schema import load_schema


@pytest.fixture(scope="session")
def db_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("dbs")
    fixtures.build_all(root)
    return root


@pytest.fixture(scope="session")
def mini_olympics_db(tmp_path_factory):
    root = tmp_path_factory.mktemp("mini")
    return fixtures.build_database(root / "mini_olympics.db",
                                   fixtures.MINI_OLYMPICS_DDL)


@pytest.fixture(scope="session")
def olympics_schema(db_dir):
    return load_schema(db_dir / "olympics.db")


@pytest.fixture(scope="session")
def library_schema(db_dir):
    return load_schema(db_dir / "library.db")


@pytest.fixture(scope="session")
def shop_schema(db_dir):
    return load_schema(db_dir / "shop.db")


@pytest.fixture(scope="session")
def schemas(olympics_schema, library_schema, shop_schema):
    return {
        "olympics": olympics_schema,
        "library": library_schema,
        "shop": shop_schema,
    }


@pytest.fixture(scope="session")
def connections(db_dir):
    conns = {
        name: open_readonly(db_dir / f"{name}.db")
        for name in ("olympics", "library", "shop")
    }
    yield conns
    for conn in conns.values():
        conn.close()


@pytest.fixture(scope="session")
def seed_file(tmp_path_factory):
    root = tmp_path_factory.mktemp("seeds")
    return fixtures.write_seed_file(root / "seeds.json")
