from __future__ import annotations

from pathlib import Path

import pytest

from helpers import ACCEPTANCE_RESULTS, DATA, load_bindings, load_series


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def basic_weights():
    return load_series("basic_sets_4w.txt")


@pytest.fixture(scope="session")
def star_reference():
    return load_series("star_product_4w.txt")


@pytest.fixture(scope="session")
def associator_reference():
    return load_series("associator_4w.txt")


@pytest.fixture(scope="session")
def weights_via_masters():
    return load_bindings("weights4_via10.txt")


@pytest.fixture(scope="session")
def master_weights():
    return load_bindings("master_weights4.txt")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        status, title = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{status} criterion {n}: {title}")
