"""Multivariate Kendall tau matrix, sample covariance, and the pairwise
proximity diagnostic that controls how close the Kendall spectrum is to the
covariance spectrum.

Data convention throughout: a sample block is a p x n array whose columns are
the n observations in R^p.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .exceptions import (
    AllPairsDegenerateError,
    DegeneratePairError,
    InsufficientSamplesError,
    NotPSDError,
    NotSymmetricError,
)

__all__ = [
    "SampleMatrix",
    "KendallTauMatrix",
    "CovarianceMatrix",
    "DegeneratePolicy",
    "CovarianceForm",
    "kendall_tau",
    "sample_covariance",
    "delta_n",
]

# Relative tolerances shared by the validated matrix types.
SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10
TRACE_ATOL = 1e-12


class DegeneratePolicy(enum.Enum):
    """What to do when a pair of sample columns coincides exactly."""

    ERROR = "error"
    SKIP_PAIR = "skip-pair"


class CovarianceForm(enum.Enum):
    CENTERED = "centered"
    UNCENTERED = "uncentered"


def _as_data(X) -> np.ndarray:
    if isinstance(X, SampleMatrix):
        return X.data
    return SampleMatrix(np.asarray(X, dtype=float)).data


@dataclass(frozen=True)
class SampleMatrix:
    """p x n data block, columns are samples.

    Entries must be finite and there must be at least two samples; the
    aspect ratio y = p/n is exposed as a property.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.ndim != 2:
            raise ValueError(f"sample matrix must be 2-d, got shape {data.shape}")
        if data.shape[1] < 2:
            raise InsufficientSamplesError(
                f"need at least 2 sample columns, got {data.shape[1]}"
            )
        if not np.isfinite(data).all():
            raise ValueError("sample matrix contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def y(self) -> float:
        """Aspect ratio p/n."""
        return self.p / self.n


def _check_symmetric(M: np.ndarray, rtol: float, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetricError(f"{what} must be square, got shape {M.shape}")
    scale = max(np.abs(M).max(), 1e-300)
    skew = np.abs(M - M.T).max()
    if skew > rtol * scale:
        raise NotSymmetricError(
            f"{what} asymmetry {skew:.3e} exceeds {rtol:.1e} * {scale:.3e}"
        )
    return M


def _check_psd(M: np.ndarray, what: str) -> None:
    # min eigenvalue >= -1e-10 * ||M||; eigvalsh is cheap at the sizes used here
    eigs = np.linalg.eigvalsh(M)
    scale = max(np.abs(eigs).max(), 1e-300)
    if eigs[0] < -PSD_RTOL * scale:
        raise NotPSDError(
            f"{what} has eigenvalue {eigs[0]:.3e} below -{PSD_RTOL:.0e} * {scale:.3e}"
        )


@dataclass(frozen=True)
class KendallTauMatrix:
    """Validated K_n: symmetric, positive semidefinite, unit trace."""

    matrix: np.ndarray
    n_samples: int

    def __post_init__(self):
        M = _check_symmetric(self.matrix, SYMMETRY_RTOL, "Kendall tau matrix")
        _check_psd(M, "Kendall tau matrix")
        tr = float(np.trace(M))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"Kendall tau matrix trace {tr!r} differs from 1")
        object.__setattr__(self, "matrix", M)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CovarianceMatrix:
    """Validated sample covariance, with a flag recording the centering form."""

    matrix: np.ndarray
    centered: bool

    def __post_init__(self):
        M = _check_symmetric(self.matrix, SYMMETRY_RTOL, "covariance matrix")
        _check_psd(M, "covariance matrix")
        object.__setattr__(self, "matrix", M)


def _condensed_to_pair(k: int, n: int) -> tuple[int, int]:
    """Map a condensed pdist index back to the (i, j) column pair, i < j."""
    offsets = np.concatenate(([0], np.cumsum(np.arange(n - 1, 0, -1))))
    i = int(np.searchsorted(offsets, k, side="right") - 1)
    j = int(k - offsets[i] + i + 1)
    return i, j


def kendall_tau(
    X, degenerate_policy: DegeneratePolicy = DegeneratePolicy.ERROR
) -> KendallTauMatrix:
    """Multivariate Kendall tau matrix of a p x n sample block.

    Averages the rank-one projections (X_i - X_j)(X_i - X_j)^T / ||X_i - X_j||^2
    over all C(n,2) column pairs.  The pair sum is evaluated through the
    weighted graph-Laplacian identity

        sum_{i<j} w_ij (X_i - X_j)(X_i - X_j)^T = X (diag(W 1) - W) X^T

    with w_ij = 1/||X_i - X_j||^2 taken from exact pairwise squared
    distances, which keeps memory at O(n^2 + p^2) and runs at BLAS speed.
    The result is symmetrized as (M + M^T)/2 before validation.

    Parameters
    ----------
    X : SampleMatrix or array_like
        p x n data block, columns are samples, n >= 2.
    degenerate_policy : DegeneratePolicy
        ERROR raises on the first coincident column pair; SKIP_PAIR drops
        such pairs and renormalizes by the number retained.

    Returns
    -------
    KendallTauMatrix
        Symmetric PSD matrix with unit trace (over retained pairs).
    """
    data = _as_data(X)
    n = data.shape[1]

    d2 = pdist(data.T, "sqeuclidean")
    degenerate = d2 == 0.0
    if degenerate.any():
        if degenerate_policy is DegeneratePolicy.ERROR:
            i, j = _condensed_to_pair(int(np.flatnonzero(degenerate)[0]), n)
            raise DegeneratePairError(f"sample columns {i} and {j} coincide")
        if degenerate.all():
            raise AllPairsDegenerateError("every sample pair is degenerate")

    retained = int((~degenerate).sum())
    w = np.zeros_like(d2)
    np.divide(1.0, d2, out=w, where=~degenerate)

    W = squareform(w)
    L = np.diag(W.sum(axis=1)) - W
    K = data @ L @ data.T / retained
    K = 0.5 * (K + K.T)
    return KendallTauMatrix(K, n_samples=n)


def sample_covariance(
    X, form: CovarianceForm = CovarianceForm.CENTERED
) -> CovarianceMatrix:
    """Sample covariance S_n (centered, 1/(n-1) normalization) or the
    uncentered second-moment matrix (1/n) X X^T."""
    data = _as_data(X)
    n = data.shape[1]
    if form is CovarianceForm.CENTERED:
        if n < 2:
            raise InsufficientSamplesError("centered covariance needs n >= 2")
        dev = data - data.mean(axis=1, keepdims=True)
        S = dev @ dev.T / (n - 1)
    else:
        S = data @ data.T / n
    S = 0.5 * (S + S.T)
    return CovarianceMatrix(S, centered=form is CovarianceForm.CENTERED)


def delta_n(X) -> float:
    """Proximity diagnostic between the raw and normalized pairwise
    difference matrices.

    Evaluates the expanded four-term form

        1/2 [ 2/(np) sum_ik X_ki^2
              - 2/(p C(n,2)) sum_{i<j} sum_k X_ki X_kj
              - 2/(C(n,2) sqrt(p)) sum_{i<j} ||X_i - X_j||
              + 1 ]

    which equals a scaled squared Frobenius distance and is therefore
    nonnegative; tiny negative rounding residue is clamped to 0.
    """
    data = _as_data(X)
    p, n = data.shape

    dist = pdist(data.T)
    if (dist == 0.0).any():
        i, j = _condensed_to_pair(int(np.flatnonzero(dist == 0.0)[0]), n)
        raise DegeneratePairError(f"sample columns {i} and {j} coincide")

    pairs = n * (n - 1) / 2.0
    sumsq = float((data**2).sum())
    rowsums = data.sum(axis=1)
    # sum_{i<j} sum_k X_ki X_kj = (||rowsums||^2 - sum X^2) / 2
    cross = 0.5 * (float((rowsums**2).sum()) - sumsq)

    term_sq = 2.0 / (n * p) * sumsq
    term_cross = 2.0 / (p * pairs) * cross
    term_dist = 2.0 / (pairs * math.sqrt(p)) * float(dist.sum())
    return max(0.0, 0.5 * (term_sq - term_cross - term_dist + 1.0))
