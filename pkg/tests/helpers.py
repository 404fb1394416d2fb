from __future__ import annotations

from pathlib import Path

from kontsevich.coeffs import read_substitutions
from kontsevich.graphseries import read_series

DATA = Path(__file__).parent / "data"


def load_series(name: str):
    return read_series((DATA / name).read_text())


def load_bindings(name: str):
    return read_substitutions((DATA / name).read_text())


# criterion number -> (PASS or FAIL, title); filled by test_acceptance, printed at session end
ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}
