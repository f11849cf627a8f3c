import os
from collections import defaultdict

import numpy as np
import pytest

from pooledscale import iris_path
from pooledscale.io import read_dataset

_ACCEPTANCE = defaultdict(list)
_TITLES = {}


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    # keep gap references out of the user's cache directory
    path = tmp_path_factory.mktemp("gapref-cache")
    old = os.environ.get("POOLEDSCALE_CACHE_DIR")
    os.environ["POOLEDSCALE_CACHE_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("POOLEDSCALE_CACHE_DIR", None)
    else:
        os.environ["POOLEDSCALE_CACHE_DIR"] = old


@pytest.fixture(scope="session")
def iris():
    return read_dataset(iris_path(), label="species")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number = mark.args[0]
    _TITLES[number] = mark.args[1] if len(mark.args) > 1 else ""
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "xfail" if hasattr(report, "wasxfail") else report.outcome
        _ACCEPTANCE[number].append((item.name, outcome, report.user_properties))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[number]
        failed = [f"{name} [{outcome}]" for name, outcome, _ in parts if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        detail = "" if not failed else "  failing: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {number} ({_TITLES[number]}): {status}"
                                    f"  [{len(parts)} check(s)]{detail}")
        for _, _, props in parts:
            for key, value in props:
                terminalreporter.write_line(f"    {key}: {value}")
