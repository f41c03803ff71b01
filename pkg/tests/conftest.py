import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from staticmd import PhysicalConstants, solve_spherical  # noqa: E402


@pytest.fixture(scope="session")
def unit_solution():
    return solve_spherical(PhysicalConstants(1.0, 1.0))
