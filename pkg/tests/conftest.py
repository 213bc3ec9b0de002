"""Put tools/ on the import path and provide shared table sources."""

import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tools"))

import pytest  # noqa: E402

from tfim import DEFAULT_CONFIG, CorrelatorTable, correlator_table  # noqa: E402


class MemoSource:
    """correlator_table with a per-session memo; serves prefixes like the store."""

    def __init__(self):
        self.tables = {}

    def __call__(self, g, n_max, cfg=DEFAULT_CONFIG):
        key = (float(g), cfg)
        held = self.tables.get(key)
        if held is None or held.n_max < n_max:
            held = correlator_table(g, n_max, cfg)
            self.tables[key] = held
        return held.prefix(n_max)


def decaying_table(g, n_max, cfg=DEFAULT_CONFIG, length=5.0):
    """Cheap stand-in table: C(n) = exp(-n / length) at any g."""
    values = tuple(math.exp(-n / length) for n in range(1, n_max + 1))
    return CorrelatorTable(g=g, n_max=n_max, values=values, tol=cfg.target_abs_tol)


@pytest.fixture
def cfg():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def memo_source():
    return MemoSource()
