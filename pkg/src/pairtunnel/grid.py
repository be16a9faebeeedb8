"""Square transverse grids, sampled fields and the quadrature they share.

Everything downstream (potentials, mode solving, propagation, observables)
works on the same uniform, periodic (x1, x2) grid.  The grid is square and
symmetric by construction so that swapping the two coordinates is an exact
array transpose, and x = 0 falls exactly on a sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid2D",
    "ComplexField2D",
    "ScalarField2D",
    "QuadrantPowers",
    "make_grid",
    "integrate",
    "overlap",
    "normalize",
    "quadrant_powers",
    "symmetry_deviation",
    "swap_transpose",
    "anti_transpose",
]


@dataclass(frozen=True)
class Grid2D:
    """Uniform n x n sampling of [-L, L)^2 with x_j = -L + j*dx, dx = 2L/n.

    n must be even so that x = 0 is exactly the sample j = n/2.  Both axes
    share the same coordinate vector; non-square grids are rejected by
    construction.
    """

    n: int
    half_width: float  # L, um

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 8:
            raise ValueError(f"grid size must be even and >= 8, got n={self.n}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    def axis(self) -> np.ndarray:
        """Shared 1D coordinate vector (um); axis()[n//2] == 0 exactly."""
        return (np.arange(self.n) - self.n // 2) * self.dx

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X1, X2) coordinate arrays; row index is x1, column index is x2."""
        x = self.axis()
        return x[:, None], x[None, :]

    def wavenumbers(self) -> np.ndarray:
        """Periodic FFT wavenumbers k_m = 2*pi*m/(2L) for one axis (um^-1)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


def make_grid(n: int, half_width: float) -> Grid2D:
    """Build a validated square grid (n even >= 8, half_width > 0)."""
    return Grid2D(n=n, half_width=half_width)


@dataclass
class ComplexField2D:
    """Complex envelope sampled on a Grid2D; values[i, j] = psi(x1_i, x2_j)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"field shape {v.shape} does not match grid n={self.grid.n}")
        self.values = v

    def copy(self) -> "ComplexField2D":
        return ComplexField2D(self.grid, self.values.copy())


@dataclass
class ScalarField2D:
    """Real field on a Grid2D (refractive-index difference units)."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"field shape {v.shape} does not match grid n={self.grid.n}")
        self.values = v


@dataclass(frozen=True)
class QuadrantPowers:
    """Raw power integrals over the four quadrants of the (x1, x2) plane.

    Samples with a coordinate exactly 0 contribute half to each adjacent
    half-plane (a quarter to each quadrant at the origin), so the four
    entries sum to the total integral exactly.
    """

    q_pp: float  # x1 > 0, x2 > 0
    q_pm: float  # x1 > 0, x2 < 0
    q_mp: float  # x1 < 0, x2 > 0
    q_mm: float  # x1 < 0, x2 < 0

    @property
    def p_right(self) -> float:
        """Power with x1 > 0 (guides I and IV)."""
        return self.q_pp + self.q_pm

    @property
    def p_pair(self) -> float:
        """Power with sgn(x1) == sgn(x2) (guides I and III)."""
        return self.q_pp + self.q_mm


def _check_same_grid(f: ComplexField2D, g: ComplexField2D) -> None:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")


def integrate(f: ComplexField2D) -> float:
    """Rectangle-rule approximation of the total power integral |psi|^2."""
    return float(np.vdot(f.values, f.values).real) * f.grid.dx ** 2


def overlap(f: ComplexField2D, g: ComplexField2D) -> complex:
    """Inner product sum(conj(f) * g) * dx^2; antilinear in the first slot."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values)) * f.grid.dx ** 2


def normalize(f: ComplexField2D) -> ComplexField2D:
    """Scale so that integrate(result) == 1; rejects the zero field."""
    power = integrate(f)
    if power <= 0.0:
        raise ValueError("cannot normalize a zero field")
    return ComplexField2D(f.grid, f.values / np.sqrt(power))


def _halfplane_weights(x: np.ndarray) -> np.ndarray:
    # weight 1 strictly right of the barrier, 1/2 exactly on it
    w = (x > 0).astype(np.float64)
    w[x == 0] = 0.5
    return w


def quadrant_powers(f: ComplexField2D) -> QuadrantPowers:
    """Raw quadrant power integrals of |psi|^2 (see QuadrantPowers)."""
    x = f.grid.axis()
    wp = _halfplane_weights(x)
    wm = 1.0 - wp
    density = (f.values.real ** 2 + f.values.imag ** 2) * f.grid.dx ** 2
    row_p = wp @ density  # sum over x1 with right-half weights -> vector over x2
    row_m = wm @ density
    return QuadrantPowers(
        q_pp=float(row_p @ wp),
        q_pm=float(row_p @ wm),
        q_mp=float(row_m @ wp),
        q_mm=float(row_m @ wm),
    )


def symmetry_deviation(f: ComplexField2D) -> float:
    """max |psi(x1,x2) - psi(x2,x1)| / max |psi|; 0 for the zero field."""
    peak = float(np.max(np.abs(f.values)))
    if peak == 0.0:
        return 0.0
    return float(np.max(np.abs(f.values - f.values.T))) / peak


def swap_transpose(values: np.ndarray) -> np.ndarray:
    """Exact grid reflection about the diagonal x1 = x2 (array transpose)."""
    return values.T.copy()


def anti_transpose(values: np.ndarray) -> np.ndarray:
    """Exact grid reflection about the anti-diagonal x2 = -x1.

    Maps psi(x1, x2) -> psi(-x2, -x1).  Coordinate negation uses the
    periodic wrap j -> (n - j) mod n, so the operation is an involution on
    the sampled field.
    """
    neg = np.roll(values[::-1, ::-1], shift=(1, 1), axis=(0, 1))
    return neg.T.copy()
