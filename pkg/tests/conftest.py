"""Shared fixtures: the frozen synthetic desk dataset and catalogs mined from it.

The desk fixture is expensive enough (20 households x 65 days) that building
it once per session matters; everything downstream treats it as read-only.
"""

import numpy as np
import pytest

from metermotifs import mine, params, synth


@pytest.fixture(scope="session")
def desk():
    """Full frozen desk fixture: (Dataset, truth log)."""
    return synth.generate_desk_fixture()


@pytest.fixture(scope="session")
def desk_data(desk):
    return desk[0]


@pytest.fixture(scope="session")
def desk_truth(desk):
    return desk[1]


@pytest.fixture(scope="session")
def default_params():
    return params.ParameterSet()


@pytest.fixture(scope="session")
def desk_catalog(desk_data, default_params):
    """Catalog mined with the default settings (a5/l6/diff/win/comp/appliance)."""
    return mine.mine_dataset(desk_data, default_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20110103)


def make_day(household_id, date, values):
    """Build a DaySeries from a shorter-than-day array by padding with base load."""
    from metermotifs import ingest

    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (params.SLOTS_PER_DAY,):
        full = np.full(params.SLOTS_PER_DAY, 200.0)
        full[: arr.size] = arr
        arr = full
    return ingest.DaySeries(household_id, date, arr)
