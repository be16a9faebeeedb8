"""Guided transverse modes via imaginary-time split-step with deflation.

The transverse Hamiltonian H = -(lb^2 / 2 n_s) * lap + V is evolved in
imaginary time tau with the same Strang splitting as the real propagator
(z -> -i tau); repeated application of exp(-dtau H / lb) followed by
renormalization contracts any seed onto the lowest mode, and Gram-Schmidt
deflation against already-converged modes extracts the excited ones.  The
eigenvalue estimate is read off the per-step norm decay,

    mu_k = -(lb / dtau) * ln(|T psi| / |psi|),

and the iteration stops once mu is stationary to a relative tolerance over
100 consecutive steps.

The split-step fixed point differs from the discrete eigenvector of H by
O(dtau^2), which is far above the residual the rest of the pipeline wants,
so converged modes are polished with a preconditioned LOBPCG pass driven by
the exact spectral H (the imaginary-time result is the seed; the polish
only sharpens it).  Eigenvalues are reported as Rayleigh quotients of the
final fields.

Degenerate pairs are rotated to definite parity under the exact grid
reflection that preserves the potential (the diagonal swap for guides on
x1 = x2, the anti-diagonal swap for the off-diagonal guides) so that
downstream overlap integrals are reproducible.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator, lobpcg

from .bpm import PhysicsConstants
from .errors import NotGuidedError, NumericalError
from .grid import (ComplexField2D, Grid2D, ScalarField2D, anti_transpose, integrate,
                   normalize, overlap, swap_transpose)
from .potentials import ErfStructure, FourCoreFiberSpec, GuideId, Structure, build_isolated_guide_potential

__all__ = [
    "SolverConfig",
    "GuidedMode",
    "ModeSet",
    "apply_hamiltonian",
    "solve_modes",
    "launch_field",
    "mode_parity",
]

log = logging.getLogger(__name__)

_STATIONARY_STEPS = 100  # consecutive quiet steps that declare mu converged


@dataclass(frozen=True)
class SolverConfig:
    """Imaginary-time solver knobs; defaults suit the um-scale guides here."""

    dtau_um: float = 2.0
    tol: float = 1e-9
    max_iters: int = 200_000
    seed_center: tuple[float, float] | None = None  # default: argmin of V
    seed_width_um: float | None = None              # default: half_width / 6
    polish: bool = True
    require_bound: bool = True  # reject modes whose mu reaches the boundary level


@dataclass
class GuidedMode:
    """Normalized eigenfield with its eigenvalue (index units)."""

    field: ComplexField2D
    mu: float
    beta_offset_um: float      # -mu / lb, um^-1
    residual: float            # |H phi - mu phi| / |phi|
    iterations: int
    mu_history: np.ndarray     # main-phase eigenvalue estimates

    @property
    def beta_offset_mm(self) -> float:
        return self.beta_offset_um * 1e3


@dataclass
class ModeSet:
    """Modes of one potential, ascending in mu (most bound first)."""

    modes: list[GuidedMode]
    potential: ScalarField2D
    constants: PhysicsConstants

    def __len__(self) -> int:
        return len(self.modes)

    def __getitem__(self, i: int) -> GuidedMode:
        return self.modes[i]

    def gram(self) -> np.ndarray:
        k = len(self.modes)
        g = np.empty((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                g[i, j] = overlap(self.modes[i].field, self.modes[j].field)
        return g


def apply_hamiltonian(f: ComplexField2D, potential: ScalarField2D,
                      constants: PhysicsConstants) -> ComplexField2D:
    """H f with the Laplacian evaluated spectrally on the periodic grid."""
    if f.grid != potential.grid:
        raise ValueError("field and potential grids differ")
    k = f.grid.wavenumbers()
    t = constants.lambda_bar ** 2 / (2.0 * constants.n_s) * (k[:, None] ** 2 + k[None, :] ** 2)
    kin = sfft.ifft2(sfft.fft2(f.values) * t)
    return ComplexField2D(f.grid, kin + potential.values * f.values)


def _seed_exponents(count: int):
    """(p, q) monomial factors for the seed fields, degree by degree."""
    out = []
    degree = 0
    while len(out) < count:
        out.extend((degree - q, q) for q in range(degree + 1))
        degree += 1
    return out[:count]


def _make_seed(grid: Grid2D, center: tuple[float, float], width: float, pq: tuple[int, int]) -> np.ndarray:
    x1, x2 = grid.mesh()
    u1, u2 = x1 - center[0], x2 - center[1]
    v = np.exp(-(u1 ** 2 + u2 ** 2) / (2.0 * width ** 2))
    if pq[0]:
        v = v * u1 ** pq[0]
    if pq[1]:
        v = v * u2 ** pq[1]
    return v.astype(np.float64)


def _boundary_ring_average(v: np.ndarray) -> float:
    return float(np.mean(np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])))


def _rayleigh_and_residual(values: np.ndarray, potential: ScalarField2D,
                           constants: PhysicsConstants, grid: Grid2D) -> tuple[float, float]:
    f = ComplexField2D(grid, values.astype(np.complex128))
    hf = apply_hamiltonian(f, potential, constants)
    nrm2 = float(np.vdot(f.values, f.values).real)
    mu = float(np.vdot(f.values, hf.values).real) / nrm2
    res = float(np.linalg.norm(hf.values - mu * f.values)) / np.sqrt(nrm2)
    return mu, res


def _imaginary_time(v: np.ndarray, kin_half: np.ndarray, pot_step: np.ndarray,
                    lower: list[np.ndarray], dtau: float, lb: float, dx: float,
                    tol: float, max_iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Relax one seed to the lowest mode orthogonal to `lower`."""
    v = v / np.linalg.norm(v)
    mu_hist = []
    quiet = 0
    mu_prev = np.inf
    for it in range(max_iters):
        v = sfft.irfft2(sfft.rfft2(v) * kin_half, s=v.shape)
        v *= pot_step
        v = sfft.irfft2(sfft.rfft2(v) * kin_half, s=v.shape)
        decay = np.linalg.norm(v)  # pre-normalization norm; dx^2 cancels in the ratio
        mu = -(lb / dtau) * np.log(decay)
        mu_hist.append(mu)
        for phi in lower:
            v -= np.dot(phi.ravel(), v.ravel()) * phi
        v /= np.linalg.norm(v)
        if abs(mu - mu_prev) < tol * max(abs(mu), 1e-15):
            quiet += 1
            if quiet >= _STATIONARY_STEPS:
                return v, np.array(mu_hist)
        else:
            quiet = 0
        mu_prev = mu
    raise NumericalError(f"imaginary-time iteration did not converge in {max_iters} steps")


def _polish_block(block: np.ndarray, potential: ScalarField2D, constants: PhysicsConstants,
                  grid: Grid2D, tol: float) -> np.ndarray:
    """LOBPCG refinement of the converged block toward the discrete eigenbasis."""
    n2 = grid.n * grid.n
    k = grid.wavenumbers()
    t = (constants.lambda_bar ** 2 / (2.0 * constants.n_s)
         * (k[:, None] ** 2 + k[None, : grid.n // 2 + 1] ** 2))  # rfft2 layout
    vp = potential.values

    def matvec(x):
        f = x.reshape(grid.n, grid.n)
        return (sfft.irfft2(sfft.rfft2(f) * t, s=f.shape) + vp * f).ravel()

    shift = 1e-3 + max(0.0, -float(vp.min()))

    def precond(x):
        f = x.reshape(grid.n, grid.n)
        return sfft.irfft2(sfft.rfft2(f) / (t + shift), s=f.shape).ravel()

    op = LinearOperator((n2, n2), matvec=matvec, dtype=np.float64)
    pre = LinearOperator((n2, n2), matvec=precond, dtype=np.float64)
    try:
        vals, vecs = lobpcg(op, block.reshape(-1, n2).T.copy(), M=pre,
                            largest=False, tol=tol, maxiter=200)
    except Exception as exc:  # pragma: no cover - scipy internals
        log.warning("mode polish failed (%s); keeping imaginary-time result", exc)
        return block
    if not np.all(np.isfinite(vecs)):
        log.warning("mode polish produced non-finite vectors; keeping imaginary-time result")
        return block
    order = np.argsort(vals)
    return vecs[:, order].T.reshape(block.shape)


def _symmetry_op(potential: ScalarField2D):
    """The exact grid reflection preserving V, if any."""
    v = potential.values
    if np.array_equal(v, v.T):
        return swap_transpose
    if np.array_equal(v, anti_transpose(v)):
        return anti_transpose
    return None


def _rotate_degenerate_pairs(block: np.ndarray, mus: np.ndarray, potential: ScalarField2D,
                             degeneracy_tol: float) -> np.ndarray:
    sym = _symmetry_op(potential)
    if sym is None:
        return block
    k = block.shape[0]
    i = 0
    while i < k - 1:
        if abs(mus[i + 1] - mus[i]) < degeneracy_tol:
            u, v = block[i], block[i + 1]
            su, sv = sym(u), sym(v)
            g = np.array([[np.vdot(u, su).real, np.vdot(u, sv).real],
                          [np.vdot(v, su).real, np.vdot(v, sv).real]])
            w, r = np.linalg.eigh(0.5 * (g + g.T))
            # +1 parity first for a fixed, reproducible ordering
            order = np.argsort(-w)
            pair = r[:, order].T @ np.stack([u.ravel(), v.ravel()])
            block[i] = (pair[0] / np.linalg.norm(pair[0])).reshape(u.shape)
            block[i + 1] = (pair[1] / np.linalg.norm(pair[1])).reshape(u.shape)
            i += 2
        else:
            i += 1
    return block


def _fix_phase(values: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(values))
    peak = values.ravel()[idx]
    if peak == 0:
        return values
    return values * (abs(peak) / peak)


def solve_modes(potential: ScalarField2D, count: int, constants: PhysicsConstants,
                cfg: SolverConfig | None = None) -> ModeSet:
    """Lowest `count` guided modes of the potential, ascending in mu.

    Raises NotGuidedError if a requested mode is not bound (its eigenvalue
    reaches the boundary-ring average of V) and NumericalError if the
    iteration fails to settle within max_iters.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    cfg = cfg or SolverConfig()
    grid = potential.grid
    lb = constants.lambda_bar

    if cfg.seed_center is None:
        imin = np.unravel_index(np.argmin(potential.values), potential.values.shape)
        x = grid.axis()
        center = (float(x[imin[0]]), float(x[imin[1]]))
    else:
        center = cfg.seed_center
    width = cfg.seed_width_um if cfg.seed_width_um is not None else grid.half_width / 6.0

    k = grid.wavenumbers()
    k2 = k[:, None] ** 2 + k[None, : grid.n // 2 + 1] ** 2  # rfft2 layout
    kin_half = np.exp(-(cfg.dtau_um / 2.0) * lb * k2 / (2.0 * constants.n_s))
    pot_step = np.exp(-cfg.dtau_um * potential.values / lb)

    raw = []
    histories = []
    iters = []
    for pq in _seed_exponents(count):
        seed = _make_seed(grid, center, width, pq)
        v, hist = _imaginary_time(seed, kin_half, pot_step, raw, cfg.dtau_um, lb,
                                  grid.dx, cfg.tol, cfg.max_iters)
        raw.append(v)
        histories.append(hist)
        iters.append(len(hist))

    block = np.stack(raw)
    if cfg.polish:
        block = _polish_block(block, potential, constants, grid, tol=max(cfg.tol, 1e-10))

    mus = np.array([_rayleigh_and_residual(b, potential, constants, grid)[0] for b in block])
    order = np.argsort(mus)
    block, mus = block[order], mus[order]
    histories = [histories[j] for j in order]
    iters = [iters[j] for j in order]
    block = _rotate_degenerate_pairs(block, mus, potential, degeneracy_tol=10.0 * cfg.tol)

    ring = _boundary_ring_average(potential.values)
    modes = []
    for i in range(count):
        values = _fix_phase(block[i])
        mu, res = _rayleigh_and_residual(values, potential, constants, grid)
        if cfg.require_bound and mu >= ring - 1e-6:
            raise NotGuidedError(
                f"mode {i} is not guided: mu = {mu:.3e} reaches the boundary level {ring:.3e}")
        f = normalize(ComplexField2D(grid, values.astype(np.complex128)))
        modes.append(GuidedMode(field=f, mu=mu, beta_offset_um=-mu / lb, residual=res,
                                iterations=iters[i] if i < len(iters) else 0,
                                mu_history=histories[i] if i < len(histories) else np.array([])))
    return ModeSet(modes=modes, potential=potential, constants=constants)


def _structure_seed(structure: Structure, guide: GuideId) -> tuple[tuple[float, float], float]:
    if isinstance(structure, ErfStructure):
        return guide.center(structure.well.a), structure.well.w / np.sqrt(2.0)
    if isinstance(structure, FourCoreFiberSpec):
        return guide.center(structure.a), structure.w / np.sqrt(2.0)
    raise TypeError(f"unknown structure type: {type(structure).__name__}")


def solve_guide_modes(structure: Structure, guide: GuideId, grid: Grid2D,
                      constants: PhysicsConstants, count: int,
                      cfg: SolverConfig | None = None) -> ModeSet:
    """Modes of one isolated guide, seeded at that guide's center."""
    base = cfg or SolverConfig()
    center, width = _structure_seed(structure, guide)
    cfg = dataclasses.replace(base, seed_center=center, seed_width_um=width)
    potential = build_isolated_guide_potential(grid, structure, guide)
    return solve_modes(potential, count, constants, cfg)


def launch_field(structure: Structure, grid: Grid2D, constants: PhysicsConstants,
                 cfg: SolverConfig | None = None) -> ComplexField2D:
    """Fundamental mode of isolated guide I: the z = 0 excitation."""
    return solve_guide_modes(structure, GuideId.I, grid, constants, count=1, cfg=cfg)[0].field


def mode_parity(mode: GuidedMode) -> dict[str, float]:
    """Overlaps of the mode with its diagonal / anti-diagonal reflections."""
    v = mode.field.values
    nrm = float(np.vdot(v, v).real)
    return {
        "swap": float(np.vdot(v, swap_transpose(v)).real) / nrm,
        "antiswap": float(np.vdot(v, anti_transpose(v)).real) / nrm,
    }
