import numpy as np
import pytest

from pairtunnel import (ComplexField2D, ErfStructure, ErfWellSpec, InteractionSpec,
                        PhysicsConstants, make_grid)


@pytest.fixture(scope="session")
def constants():
    return PhysicsConstants()  # lambda = 633 nm, n_s = 1.45


@pytest.fixture(scope="session")
def fig1_well():
    return ErfWellSpec(delta_n1=0.003, a=4.5, w=3.0, d_x=1.0)


def make_fig1_structure(dn2: float) -> ErfStructure:
    return ErfStructure(well=ErfWellSpec(delta_n1=0.003, a=4.5, w=3.0, d_x=1.0),
                        interaction=InteractionSpec(delta_n2=dn2, w_i=0.5, d_xi=0.2))


@pytest.fixture(scope="session")
def fig1_structure():
    return make_fig1_structure(0.002)


@pytest.fixture(scope="session")
def fig1_noninteracting():
    return make_fig1_structure(0.0)


@pytest.fixture
def small_grid():
    return make_grid(64, 8.0)


def random_field(grid, seed=0) -> ComplexField2D:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    return ComplexField2D(grid, v)
