"""Optical potentials V(x1, x2) = n_s - n(x1, x2) for the simulated structures.

Two families are supported:

* an erf-profile double well per coordinate plus a short-range erf
  interaction ridge along x1 = x2, which together carve four guiding
  regions in the (x1, x2) plane, and
* a four-core step-index fiber whose diagonal cores carry a straight cut
  of width w_c that mimics the boson repulsion.

Guides are labelled I-IV with centers (a, a), (-a, a), (-a, -a), (a, -a);
I and III sit on the diagonal x1 = x2.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import erf

from .grid import Grid2D, ScalarField2D

__all__ = [
    "ErfWellSpec",
    "InteractionSpec",
    "ErfStructure",
    "FourCoreFiberSpec",
    "Structure",
    "GuideId",
    "double_well_1d",
    "interaction_1d",
    "build_two_boson_potential",
    "build_four_core_potential",
    "build_isolated_guide_potential",
    "build_potential",
]


@dataclass(frozen=True)
class ErfWellSpec:
    """1D double well -dn1*[g(x-a) + g(x+a)] with erf-smoothed edges.

    g(x) = [erf((x+w)/d_x) - erf((x-w)/d_x)] / [2 erf(w/d_x)], so g(0) = 1
    and the well depth is exactly dn1 at each center.
    """

    delta_n1: float  # peak index depth
    a: float         # half separation of the wells, um
    w: float         # half width of each well, um
    d_x: float       # edge smoothness, um

    def __post_init__(self):
        for name in ("delta_n1", "a", "w", "d_x"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.w <= self.d_x:
            warnings.warn("well half-width w <= edge smoothness d_x; profile is barely a well")


@dataclass(frozen=True)
class InteractionSpec:
    """Short-range repulsive ridge dn2 * g(x1 - x2) with erf edges."""

    delta_n2: float  # interaction strength; 0 means non-interacting
    w_i: float       # half width, um
    d_xi: float      # edge smoothness, um

    def __post_init__(self):
        if self.delta_n2 < 0:
            raise ValueError("delta_n2 must be >= 0")
        if not (self.w_i > 0 and self.d_xi > 0):
            raise ValueError("w_i and d_xi must be positive")


@dataclass(frozen=True)
class ErfStructure:
    """Erf double well plus interaction ridge (the Fig.-1-style structure)."""

    well: ErfWellSpec
    interaction: InteractionSpec


@dataclass(frozen=True)
class FourCoreFiberSpec:
    """Four circular step-index cores at (+-a, +-a), radius w, depth delta_n.

    A straight cut of full width w_c about the diagonal x1 = x2 (i.e. the
    strip |x1 - x2| < w_c / sqrt(2)) is removed from the two diagonal cores
    I and III only.
    """

    delta_n: float
    a: float    # half core spacing, um
    w: float    # core radius, um
    w_c: float  # cut width, um

    def __post_init__(self):
        for name in ("delta_n", "a", "w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.w_c < 0:
            raise ValueError("w_c must be >= 0")
        if self.w_c >= 2 * self.w:
            raise ValueError("cut width w_c must be smaller than the core diameter")


Structure = Union[ErfStructure, FourCoreFiberSpec]


class GuideId(enum.Enum):
    """The four guiding regions; value is (sign of x1 center, sign of x2 center)."""

    I = (1, 1)
    II = (-1, 1)
    III = (-1, -1)
    IV = (1, -1)

    def center(self, a: float) -> tuple[float, float]:
        s1, s2 = self.value
        return (s1 * a, s2 * a)

    @property
    def on_diagonal(self) -> bool:
        s1, s2 = self.value
        return s1 == s2


def _erf_bump(x: np.ndarray | float, w: float, d: float) -> np.ndarray | float:
    """g(x) = [erf((x+w)/d) - erf((x-w)/d)] / [2 erf(w/d)]; g(0) = 1 exactly."""
    return (erf((x + w) / d) - erf((x - w) / d)) / (2.0 * erf(w / d))


def double_well_1d(x, spec: ErfWellSpec):
    """Sampled 1D double-well profile V_w(x) <= 0 (even in x)."""
    g = _erf_bump
    return -spec.delta_n1 * (g(x - spec.a, spec.w, spec.d_x) + g(x + spec.a, spec.w, spec.d_x))


def interaction_1d(s, spec: InteractionSpec):
    """Repulsive ridge profile V_int(s) evaluated at s = x1 - x2 (even in s)."""
    return spec.delta_n2 * _erf_bump(s, spec.w_i, spec.d_xi)


def _single_well_1d(x, spec: ErfWellSpec, sign: int):
    """One well of the pair, centered at sign*a."""
    return -spec.delta_n1 * _erf_bump(x - sign * spec.a, spec.w, spec.d_x)


def build_two_boson_potential(grid: Grid2D, well: ErfWellSpec, inter: InteractionSpec) -> ScalarField2D:
    """V(x1,x2) = V_w(x1) + V_w(x2) + V_int(|x1-x2|), exactly swap-symmetric."""
    x = grid.axis()
    vw = double_well_1d(x, well)
    # |x1 - x2| keeps the sampled ridge bit-exactly symmetric under swap
    sep = np.abs(x[:, None] - x[None, :])
    v = vw[:, None] + vw[None, :] + interaction_1d(sep, inter)
    return ScalarField2D(grid, v)


def build_four_core_potential(grid: Grid2D, spec: FourCoreFiberSpec) -> ScalarField2D:
    """Four disks of depth -delta_n; diagonal cores lose the cut strip."""
    x1, x2 = grid.mesh()
    v = np.zeros((grid.n, grid.n))
    cut = np.abs(x1 - x2) < spec.w_c / np.sqrt(2.0)
    for guide in GuideId:
        c1, c2 = guide.center(spec.a)
        disk = (x1 - c1) ** 2 + (x2 - c2) ** 2 < spec.w ** 2
        if guide.on_diagonal and spec.w_c > 0:
            disk = disk & ~cut
        v[disk] = -spec.delta_n
    return ScalarField2D(grid, v)


def build_isolated_guide_potential(grid: Grid2D, structure: Structure, guide: GuideId) -> ScalarField2D:
    """Potential of a single guide, used for launch fields and mode coupling.

    For the erf structure only the two well factors belonging to the guide
    are kept; the interaction ridge is retained for every guide (it is
    negligible away from the diagonal but physically present inside the
    diagonal guides).  For the fiber, only that core's disk is kept, with
    its cut if the guide is diagonal.
    """
    if not isinstance(guide, GuideId):
        raise ValueError(f"invalid guide id: {guide!r}")
    if isinstance(structure, ErfStructure):
        x = grid.axis()
        s1, s2 = guide.value
        v1 = _single_well_1d(x, structure.well, s1)
        v2 = _single_well_1d(x, structure.well, s2)
        sep = np.abs(x[:, None] - x[None, :])
        v = v1[:, None] + v2[None, :] + interaction_1d(sep, structure.interaction)
        return ScalarField2D(grid, v)
    if isinstance(structure, FourCoreFiberSpec):
        x1, x2 = grid.mesh()
        c1, c2 = guide.center(structure.a)
        disk = (x1 - c1) ** 2 + (x2 - c2) ** 2 < structure.w ** 2
        if guide.on_diagonal and structure.w_c > 0:
            disk = disk & ~(np.abs(x1 - x2) < structure.w_c / np.sqrt(2.0))
        v = np.where(disk, -structure.delta_n, 0.0)
        return ScalarField2D(grid, v)
    raise TypeError(f"unknown structure type: {type(structure).__name__}")


def build_potential(grid: Grid2D, structure: Structure) -> ScalarField2D:
    """Full composite potential for either structure family."""
    if isinstance(structure, ErfStructure):
        return build_two_boson_potential(grid, structure.well, structure.interaction)
    if isinstance(structure, FourCoreFiberSpec):
        return build_four_core_potential(grid, structure)
    raise TypeError(f"unknown structure type: {type(structure).__name__}")
