import pytest

from core_model import PotentialParams
from symmetric_limit import solve_symmetric
from two_cut_solver import solve_endpoints


@pytest.fixture(scope="session")
def merging_solution():
    """a < 2: o polo abre um buraco no semicírculo."""
    return solve_endpoints(PotentialParams(a=1.5, A=0.1, m=2))


@pytest.fixture(scope="session")
def evaporating_solution():
    """a > 2: corte direito separado, à direita do polo."""
    return solve_endpoints(PotentialParams(a=2.5, A=0.1, m=2))


@pytest.fixture(scope="session")
def symmetric_oracle():
    return solve_symmetric(0.1)
