import pytest

from maassqe.hejhal import solve_spectrum


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: solves many forms or runs the full trace formula check")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def odd_cache():
    return solve_spectrum((9.3, 9.8), "odd", 40, 1e-8)


@pytest.fixture(scope="session")
def even_cache():
    return solve_spectrum((13.5, 14.0), "even", 40, 1e-8)


@pytest.fixture(scope="session")
def odd_form(odd_cache):
    return odd_cache.forms()[0]


@pytest.fixture(scope="session")
def even_form(even_cache):
    return even_cache.forms()[0]


@pytest.fixture(scope="session")
def wide_cache():
    return solve_spectrum((3.5, 40.0), "both", 80, 1e-8)
