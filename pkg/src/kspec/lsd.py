"""Limiting spectral distribution under a general population spectral
measure: the fixed-point equation

    m(z) = int dH(tau) / (tau (1 - y - y z m(z)) - z)

solved by damped Picard iteration, plus density recovery by Stieltjes
inversion with continuation in Im z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    EmptyGridError,
    LeftUniquenessSetError,
    NoConvergenceError,
    NotPSDError,
    NotSymmetricError,
    NotUpperHalfPlaneError,
)
from .spectra import SmoothedDensity, eigenvalues_symmetric

__all__ = [
    "SpectralMeasure",
    "SolverConfig",
    "SolverResult",
    "measure_from_sigma",
    "solve_stieltjes",
    "density_from_stieltjes",
]

ATOM_MERGE_TOL = 1e-12
WEIGHT_SUM_ATOL = 1e-12


class SpectralMeasure:
    """Discrete probability measure: atoms (tau >= 0) with positive weights.

    Atoms closer than 1e-12 are merged with summed weights; weights must
    total 1 within 1e-12.
    """

    def __init__(self, atoms):
        pairs = [(float(t), float(w)) for t, w in atoms]
        if not pairs:
            raise ValueError("measure needs at least one atom")
        pairs.sort()
        merged: list[list[float]] = []
        for t, w in pairs:
            if not math.isfinite(t) or t < 0.0:
                raise ValueError(f"atom location {t!r} must be finite and >= 0")
            if not w > 0.0:
                raise ValueError(f"atom weight {w!r} must be positive")
            if merged and t - merged[-1][0] <= ATOM_MERGE_TOL:
                merged[-1][1] += w
            else:
                merged.append([t, w])
        total = sum(w for _, w in merged)
        if abs(total - 1.0) > WEIGHT_SUM_ATOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        self.atoms = [(t, w) for t, w in merged]
        self.taus = np.array([t for t, _ in merged])
        self.weights = np.array([w for _, w in merged])

    @classmethod
    def point_mass(cls, tau: float) -> "SpectralMeasure":
        return cls([(tau, 1.0)])

    def __repr__(self):
        return f"SpectralMeasure({self.atoms!r})"

    def __eq__(self, other):
        return isinstance(other, SpectralMeasure) and self.atoms == other.atoms


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 10_000
    damping: float = 0.5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class SolverResult:
    """Converged transform value with iteration diagnostics.

    `companion` is the transform of the dual (sample-side) spectrum,
    -(1-y)/z + y*m.
    """

    m: complex
    iterations: int
    residual: float
    companion: complex


def measure_from_sigma(Sigma) -> SpectralMeasure:
    """Spectral measure of Sigma/2: atoms at half the eigenvalues of a
    symmetric PSD matrix, uniform weights, equal atoms merged."""
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if Sigma.shape[0] != Sigma.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {Sigma.shape}")
    scale = max(np.abs(Sigma).max(), 1e-300)
    if np.abs(Sigma - Sigma.T).max() > 1e-8 * scale:
        raise NotSymmetricError("population matrix is not symmetric")
    eigs = eigenvalues_symmetric(0.5 * (Sigma + Sigma.T)).eigenvalues
    bound = max(np.abs(eigs).max(), 1e-300)
    if eigs[0] < -1e-10 * bound:
        raise NotPSDError(f"population matrix has eigenvalue {eigs[0]:.3e} < 0")
    taus = np.clip(eigs, 0.0, None) / 2.0
    p = taus.size
    return SpectralMeasure([(t, 1.0 / p) for t in taus])


def _phi(H: SpectralMeasure, y: float, z: complex, m: complex) -> complex:
    return complex(np.sum(H.weights / (H.taus * (1.0 - y - y * z * m) - z)))


def _iterate(
    H: SpectralMeasure, y: float, z: complex, cfg: SolverConfig, m0: complex
) -> tuple[complex, int, float]:
    d = cfg.damping
    m = m0
    for it in range(1, cfg.max_iter + 1):
        m_next = (1.0 - d) * m + d * _phi(H, y, z, m)
        step = abs(m_next - m)
        m = m_next
        if step <= cfg.tol:
            residual = abs(m - _phi(H, y, z, m))
            if residual <= 10.0 * cfg.tol:
                return m, it, residual
    raise NoConvergenceError(
        f"no convergence in {cfg.max_iter} iterations at z = {z}"
    )


def solve_stieltjes(
    H: SpectralMeasure,
    y: float,
    z: complex,
    cfg: SolverConfig | None = None,
    _m0: complex | None = None,
) -> SolverResult:
    """Solve the fixed-point equation for the limiting Stieltjes transform.

    Damped Picard iteration m <- (1-d) m + d Phi(m) from m0 = -1/z.  The
    returned m must satisfy the residual bound |m - Phi(m)| <= 10 tol and
    lie in the uniqueness region Im(-(1-y)/z + y m) > 0.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not 0.0 < y < 1.0:
        raise ValueError(f"aspect ratio y must lie in (0,1), got {y!r}")
    z = complex(z)
    if not z.imag > 0:
        raise NotUpperHalfPlaneError(f"z = {z} is not in the upper half-plane")
    m0 = -1.0 / z if _m0 is None else _m0
    m, iterations, residual = _iterate(H, y, z, cfg, m0)
    companion = -(1.0 - y) / z + y * m
    if not companion.imag > 0:
        raise LeftUniquenessSetError(
            f"solution at z = {z} left the uniqueness set: companion = {companion}"
        )
    return SolverResult(m=m, iterations=iterations, residual=residual, companion=companion)


def _eta_ladder(eps: float) -> np.ndarray:
    # geometric continuation from Im z = 0.1 down to eps, decade steps
    if eps >= 0.1:
        return np.array([eps])
    steps = max(1, math.ceil(math.log10(0.1 / eps)))
    return np.geomspace(0.1, eps, steps + 1)


def density_from_stieltjes(
    H: SpectralMeasure,
    y: float,
    x_grid,
    eps: float = 1e-5,
    cfg: SolverConfig | None = None,
    richardson: bool = False,
) -> SmoothedDensity:
    """Limiting spectral density by Stieltjes inversion.

    For each grid point x the transform is solved along a geometric ladder
    of imaginary parts from 0.1 down to eps, each solve warm-started from
    the previous level; the density is (1/pi) Im m(x + i eps).  With
    `richardson`, a second pass at eps/2 extrapolates the O(eps) smoothing
    bias away (values clamped at 0).

    Near a support edge the contraction rate decays like 1 - O(sqrt(Im z)),
    so the ladder solves run with an enlarged iteration budget; the default
    budget in SolverConfig is sized for isolated calls at moderate Im z.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not eps > 0:
        raise ValueError("eps must be positive")
    cfg = SolverConfig(
        tol=cfg.tol, max_iter=max(cfg.max_iter, 200_000), damping=cfg.damping
    )
    x_grid = np.asarray(x_grid, dtype=float).ravel()
    if x_grid.size == 0:
        raise EmptyGridError("inversion grid is empty")

    ladder = _eta_ladder(eps)
    values = np.empty_like(x_grid)
    half = np.empty_like(x_grid) if richardson else None
    for i, x in enumerate(x_grid):
        m = None
        try:
            for eta in ladder:
                m = solve_stieltjes(H, y, complex(x, eta), cfg, _m0=m).m
            values[i] = m.imag / math.pi
            if richardson:
                m_half = solve_stieltjes(H, y, complex(x, eps / 2.0), cfg, _m0=m).m
                half[i] = m_half.imag / math.pi
        except NoConvergenceError as e:
            raise NoConvergenceError(f"inversion failed at x = {x}: {e}") from e
    if richardson:
        values = np.maximum(2.0 * half - values, 0.0)
    return SmoothedDensity(grid=x_grid, values=values, bandwidth=eps)
