import numpy as np
import pytest


@pytest.fixture(scope="session")
def torus_report():
    """One shared full-precision pipeline run for all torus assertions."""
    from novtorsion.torus import run_example

    return run_example()


@pytest.fixture(autouse=True)
def _seed_numpy():
    np.random.seed(0)
