import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def oracle_dir():
    return pathlib.Path(os.environ.get("SPURIOUS_ORACLE_DIR", ROOT / "tests" / "oracles"))


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("SPURIOUS_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("SPURIOUS_CLI does not point at the built command-line tool")
    return path


@pytest.fixture(scope="session")
def small_bundle(tmp_path_factory):
    import spurious

    d = tmp_path_factory.mktemp("bundle")
    conf = spurious.write_synthetic_bundle(str(d), domain="p", sentences=400, spurious=8, seed=2)
    return pathlib.Path(conf)
