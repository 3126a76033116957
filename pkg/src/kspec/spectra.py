"""Eigendecomposition, empirical spectral distributions, Stieltjes transforms
of finite matrices, distribution distances, kernel smoothing, and runtime
oracles for the matrix-perturbation inequalities used in the theory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ConvergenceFailureError,
    EmptyGridError,
    NotSymmetricError,
    NotUpperHalfPlaneError,
    ShapeMismatchError,
)

__all__ = [
    "SpectralDistribution",
    "SmoothedDensity",
    "BoundCheck",
    "eigenvalues_symmetric",
    "esd_eval",
    "stieltjes_empirical",
    "levy_distance",
    "kolmogorov_distance",
    "check_levy4_bound",
    "check_levy_norm_bound",
    "check_rank_bound",
    "kernel_smooth",
]

EIG_SYMMETRY_RTOL = 1e-8
LEVY_TOL = 1e-13


@dataclass(frozen=True)
class SpectralDistribution:
    """Sorted eigenvalue list with its empirical step CDF."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        eigs = np.sort(np.asarray(self.eigenvalues, dtype=float).ravel())
        if eigs.size == 0:
            raise ValueError("need at least one eigenvalue")
        if not np.isfinite(eigs).all():
            raise ValueError("eigenvalues contain non-finite entries")
        object.__setattr__(self, "eigenvalues", eigs)

    @property
    def p(self) -> int:
        return self.eigenvalues.size

    def cdf(self, x) -> np.ndarray:
        """Right-continuous step CDF, vectorized over x."""
        return np.searchsorted(self.eigenvalues, x, side="right") / self.p


@dataclass(frozen=True)
class SmoothedDensity:
    """Density curve sampled on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if grid.size == 0:
            raise EmptyGridError("density grid is empty")
        if grid.size != values.size:
            raise ValueError("grid and values differ in length")
        if grid.size > 1 and not (np.diff(grid) > 0).all():
            raise ValueError("grid must be strictly increasing")
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("density values must be finite and nonnegative")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of a single inequality-oracle evaluation."""

    lhs: float
    rhs: float
    holds: bool


def eigenvalues_symmetric(M) -> SpectralDistribution:
    """All eigenvalues of a real symmetric matrix, ascending.

    Symmetry is required within 1e-8 relative tolerance; the decomposition
    is validated through the reconstruction residual ||MV - V diag(lam)||.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(), 1e-300)
    skew = np.abs(M - M.T).max()
    if skew > EIG_SYMMETRY_RTOL * scale:
        raise NotSymmetricError(
            f"asymmetry {skew:.3e} exceeds {EIG_SYMMETRY_RTOL:.0e} relative tolerance"
        )
    sym = 0.5 * (M + M.T)
    try:
        lam, V = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailureError(f"symmetric eigensolver failed: {e}") from e
    p = M.shape[0]
    residual = np.abs(sym @ V - V * lam).max()
    norm = max(np.abs(lam).max(), 1e-300)
    if residual > 1e-8 * p * norm:
        raise ConvergenceFailureError(
            f"eigenpair residual {residual:.3e} exceeds 1e-8 * p * ||M||"
        )
    return SpectralDistribution(lam)


def esd_eval(F: SpectralDistribution, x: float) -> float:
    """Empirical spectral distribution function at x."""
    return float(F.cdf(x))


def stieltjes_empirical(F: SpectralDistribution, z: complex) -> complex:
    """Stieltjes transform (1/p) sum 1/(lam_i - z) for Im z > 0."""
    z = complex(z)
    if not z.imag > 0:
        raise NotUpperHalfPlaneError(f"z = {z} is not in the upper half-plane")
    return complex(np.mean(1.0 / (F.eigenvalues - z)))


def _levy_feasible(F: SpectralDistribution, G: SpectralDistribution, eps: float) -> bool:
    # For right-continuous step CDFs, F(x-eps)-eps <= G(x) for all x reduces to
    # G(t+eps) >= F(t)-eps at every jump t of F (and symmetrically); checking
    # the merged jump set covers both directions.
    t = np.concatenate((F.eigenvalues, G.eigenvalues))
    return bool(
        (G.cdf(t + eps) >= F.cdf(t) - eps).all()
        and (F.cdf(t + eps) >= G.cdf(t) - eps).all()
    )


def levy_distance(F: SpectralDistribution, G: SpectralDistribution) -> float:
    """Levy distance between two empirical spectral distributions.

    Bisection on the parallelogram condition, checked at the merged jump
    set; exact for step CDFs up to the bisection tolerance.
    """
    if np.array_equal(F.eigenvalues, G.eigenvalues):
        return 0.0
    lo, hi = 0.0, 1.0  # Levy distance between distribution functions is <= 1
    while hi - lo > LEVY_TOL:
        mid = 0.5 * (lo + hi)
        if _levy_feasible(F, G, mid):
            hi = mid
        else:
            lo = mid
    return hi


def kolmogorov_distance(F: SpectralDistribution, G: SpectralDistribution) -> float:
    """Sup-norm distance between two step CDFs (evaluated at merged jumps)."""
    t = np.concatenate((F.eigenvalues, G.eigenvalues))
    return float(np.abs(F.cdf(t) - G.cdf(t)).max())


def kolmogorov_to_cdf(F: SpectralDistribution, cdf_values) -> float:
    """One-sample sup distance between an ESD and a continuous CDF.

    `cdf_values` are the target CDF evaluated at F.eigenvalues (ascending);
    both sides of each jump are compared.
    """
    C = np.asarray(cdf_values, dtype=float)
    if C.shape != F.eigenvalues.shape:
        raise ShapeMismatchError("need one CDF value per eigenvalue")
    steps = np.arange(1, F.p + 1) / F.p
    return float(max((steps - C).max(), (C - steps + 1.0 / F.p).max(), 0.0))


def _check_same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise ShapeMismatchError(f"shapes {A.shape} and {B.shape} differ")


def check_levy4_bound(A, B) -> BoundCheck:
    """Oracle for L^4(F^{AA'}, F^{BB'}) <= (2/p^2) tr((A-B)(A-B)') tr(AA'+BB')."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _check_same_shape(A, B)
    p = A.shape[0]
    FA = eigenvalues_symmetric(A @ A.T)
    FB = eigenvalues_symmetric(B @ B.T)
    lhs = levy_distance(FA, FB) ** 4
    rhs = 2.0 / p**2 * float(((A - B) ** 2).sum()) * float((A**2).sum() + (B**2).sum())
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1 + 1e-9))


def check_levy_norm_bound(A, B) -> BoundCheck:
    """Oracle for L(F^A, F^B) <= ||A - B|| (spectral norm), A, B symmetric."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _check_same_shape(A, B)
    FA = eigenvalues_symmetric(A)
    FB = eigenvalues_symmetric(B)
    lhs = levy_distance(FA, FB)
    rhs = float(np.linalg.norm(A - B, 2))
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1 + 1e-9))


def check_rank_bound(A, B) -> BoundCheck:
    """Oracle for ||F^{AA'} - F^{BB'}||_inf <= rank(A - B)/p.

    Gram matrices with p > n carry p - n exact zero eigenvalues that the
    eigensolver scatters at the 1e-15 noise scale; unlike the Levy checks,
    the sup norm has no horizontal slack to absorb that, so near-zero
    eigenvalues are snapped to 0 before the CDFs are compared.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _check_same_shape(A, B)
    p = A.shape[0]
    ea = eigenvalues_symmetric(A @ A.T).eigenvalues
    eb = eigenvalues_symmetric(B @ B.T).eigenvalues
    floor = 1e-12 * max(ea.max(initial=0.0), eb.max(initial=0.0), 1e-300)
    lhs = kolmogorov_distance(
        SpectralDistribution(np.where(np.abs(ea) <= floor, 0.0, ea)),
        SpectralDistribution(np.where(np.abs(eb) <= floor, 0.0, eb)),
    )
    sv = np.linalg.svd(A - B, compute_uv=False)
    rank = 0 if sv.size == 0 else int((sv > 1e-10 * sv[0]).sum())
    rhs = rank / p
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1 + 1e-9))


def kernel_smooth(F: SpectralDistribution, h: float, grid) -> SmoothedDensity:
    """Gaussian kernel density estimate of the ESD on the given grid."""
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise EmptyGridError("smoothing grid is empty")
    u = (grid[:, None] - F.eigenvalues[None, :]) / h
    values = np.exp(-0.5 * u**2).sum(axis=1) / (F.p * h * math.sqrt(2.0 * math.pi))
    return SmoothedDensity(grid=grid, values=values, bandwidth=h)
