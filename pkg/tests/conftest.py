import os
import time

import pytest

import acceptance_log

from heavytail_ld.config import parse_config
from heavytail_ld.experiment import run_experiment

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def _grid(name, tmp_path_factory):
    with open(os.path.join(ROOT, "configs", name), encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    out = tmp_path_factory.mktemp(name.split(".")[0])
    start = time.perf_counter()
    report = run_experiment(cfg, out_dir=str(out), timestamp=False)
    return report, str(out), time.perf_counter() - start


@pytest.fixture(scope="session")
def default_grid(tmp_path_factory):
    """(Report, output dir, seconds) for configs/default.ini, computed once per session."""
    return _grid("default.ini", tmp_path_factory)


@pytest.fixture(scope="session")
def symmetric_grid(tmp_path_factory):
    return _grid("symmetric.ini", tmp_path_factory)


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
