import pytest


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="also run the minutes-scale fib 38..42 checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "extended: minutes-scale runs, enabled by --extended")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="needs --extended")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)
