from __future__ import annotations

import pytest

from qetu_hubbard.hubbard import ModelParams
from qetu_hubbard.qetu import prepare_ground_state, setup_problem


@pytest.fixture(scope="session")
def problem():
    return setup_problem(ModelParams(1.0, 1.0), 0.1)


@pytest.fixture(scope="session")
def prepared(problem):
    """Filtered states at the two reference degrees (one Trotter step)."""
    return {d: prepare_ground_state(d=d, problem=problem) for d in (30, 50)}
