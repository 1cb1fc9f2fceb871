"""
Shared fixtures for the szegolab test-suite
"""

import numpy as np
import pytest

from szegolab.domains import Cube, Disk
from szegolab.ensembles import instance_rng, uniform_spectrum
from szegolab.models import GridConfig
from szegolab.wiener_hopf import WHModel


@pytest.fixture
def rng():
    return instance_rng(1234, 0)


@pytest.fixture
def unit_disk():
    return Disk(dimension=2, radius=1.0)


@pytest.fixture
def small_grid():
    """Coarse grid rule for quick Wiener-Hopf checks (N <= 16, at most 256 points)"""
    return GridConfig(n_base=12, alpha_ref=2.0, n_cap=16)


@pytest.fixture
def small_model(unit_disk):
    """Unit disks, alpha = 2, 12 x 12 periodic grid"""
    return WHModel(lambda_domain=unit_disk, omega_domain=unit_disk, alpha=2.0, n_points=12)


@pytest.fixture
def commensurate_model(unit_disk):
    """
    Omega a square whose edges fall between frequency cells: with L = 4 and
    alpha = pi / 2 the cells have unit width, so the cell-averaged
    multiplier of Omega is exactly 0 or 1.
    """
    omega = Cube(dimension=2, half_width=1.5)
    return WHModel(lambda_domain=unit_disk, omega_domain=omega, alpha=np.pi / 2.0, n_points=12)


@pytest.fixture
def hermitian_matrix(rng):
    return uniform_spectrum(12, -0.75, 0.75, rng)
