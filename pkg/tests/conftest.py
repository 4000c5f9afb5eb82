import numpy as np
import pytest

from censorbias import SurvivalDataset
from censorbias.experiment import preset_experiment, run_experiment


def make_dataset(times, statuses, group="g", name="test"):
    times = np.asarray(times, dtype=float)
    statuses = np.asarray(statuses)
    return SurvivalDataset(times, statuses, np.full(times.size, group),
                           name=name)


@pytest.fixture(scope="session")
def small_table():
    """Shared 25-trial preset-1 table for plot and CLI structure tests."""
    return run_experiment(preset_experiment(1, n_trials=25, master_seed=11))
