import pytest

from gridspectra.data import load_machine, load_tileset


@pytest.fixture(scope="session")
def jr11():
    return load_tileset("jr11")


@pytest.fixture(scope="session")
def machines():
    return {
        name: load_machine(name)
        for name in ("acceptall", "identity", "rule110", "parity", "branch")
    }
