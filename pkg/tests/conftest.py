from pathlib import Path

import pytest

from cubesurf.cells import read_complex

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def cube3():
    return read_complex(DATA / "cube3.txt")


@pytest.fixture(scope="session")
def torus():
    return read_complex(DATA / "torus_q4.txt")


@pytest.fixture(scope="session")
def rp2():
    return read_complex(DATA / "rp2_q5.txt")
