"""Closed-form Marchenko-Pastur limit law MP(y, sigma^2) on 0 < y < 1:
support endpoints, density, CDF, Stieltjes transform with Herglotz branch
selection, and the integrated squared error metric against smoothed
empirical densities.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exceptions import GridDoesNotCoverSupportError, NotUpperHalfPlaneError
from .spectra import SmoothedDensity

__all__ = [
    "MPParams",
    "mp_support",
    "mp_density",
    "mp_cdf",
    "mp_stieltjes",
    "ise",
    "default_z_grid",
]


@dataclass(frozen=True)
class MPParams:
    """Aspect ratio y in (0,1) and variance parameter sigma2 > 0."""

    y: float
    sigma2: float

    def __post_init__(self):
        if not 0.0 < self.y < 1.0:
            raise ValueError(f"aspect ratio y must lie in (0,1), got {self.y!r}")
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")

    @property
    def support(self) -> tuple[float, float]:
        return mp_support(self)


def mp_support(params: MPParams) -> tuple[float, float]:
    """Support endpoints a = sigma^2 (1 - sqrt(y))^2, b = sigma^2 (1 + sqrt(y))^2."""
    sy = math.sqrt(params.y)
    return params.sigma2 * (1.0 - sy) ** 2, params.sigma2 * (1.0 + sy) ** 2


def mp_density(params: MPParams, x):
    """MP density sqrt((b-x)(x-a)) / (2 pi x y sigma^2) on [a,b], 0 outside.

    Accepts a scalar or an array of abscissae.
    """
    a, b = mp_support(params)
    x_arr = np.asarray(x, dtype=float)
    inside = (x_arr >= a) & (x_arr <= b)
    out = np.zeros_like(x_arr)
    xi = x_arr[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (
        2.0 * math.pi * xi * params.y * params.sigma2
    )
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def _cdf_integrand(params: MPParams):
    # Substituting x = sigma^2 (1 + y + 2 sqrt(y) cos w) turns the density
    # integral into int_0^pi 2 sin^2 w / (pi (1 + y + 2 sqrt(y) cos w)) dw,
    # smooth in w: the inverse-square-root edges vanish exactly.
    y = params.y
    sy = math.sqrt(y)

    def g(w: float) -> float:
        return 2.0 * math.sin(w) ** 2 / (math.pi * (1.0 + y + 2.0 * sy * math.cos(w)))

    return g


def _w_of_x(params: MPParams, x: float) -> float:
    c = (x / params.sigma2 - 1.0 - params.y) / (2.0 * math.sqrt(params.y))
    return math.acos(min(1.0, max(-1.0, c)))


def mp_cdf(params: MPParams, x) -> float:
    """MP distribution function by adaptive quadrature (abs tol 1e-10)."""
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim > 0:
        return np.array([mp_cdf(params, xi) for xi in x_arr])
    xf = float(x_arr)
    a, b = mp_support(params)
    if xf <= a:
        return 0.0
    if xf >= b:
        return 1.0
    g = _cdf_integrand(params)
    # w runs from pi (at a) down to 0 (at b); mass below x is the w-tail
    val, _ = quad(g, _w_of_x(params, xf), math.pi, epsabs=1e-12, epsrel=1e-12, limit=200)
    return min(1.0, max(0.0, val))


def mp_stieltjes(params: MPParams, z: complex) -> complex:
    """Closed-form Stieltjes transform of MP(y, sigma^2) for Im z > 0.

    The square-root branch is fixed by testing both candidates and keeping
    the one mapping to the upper half-plane (Herglotz), which is unique.
    """
    z = complex(z)
    if not z.imag > 0:
        raise NotUpperHalfPlaneError(f"z = {z} is not in the upper half-plane")
    y, s2 = params.y, params.sigma2
    a, b = mp_support(params)
    # discriminant z^2 + s^4 + y^2 s^4 - 2zs^2 - 2yzs^2 - 2ys^4 = (z-a)(z-b)
    root = cmath.sqrt((z - a) * (z - b))
    denom = 2.0 * y * z * s2
    m_plus = (s2 * (1.0 - y) - z + root) / denom
    m_minus = (s2 * (1.0 - y) - z - root) / denom
    m = m_plus if m_plus.imag > m_minus.imag else m_minus
    if not m.imag > 0:
        raise NotUpperHalfPlaneError(
            f"no Herglotz branch at z = {z}; candidates {m_plus}, {m_minus}"
        )
    return m


def ise(fhat: SmoothedDensity, params: MPParams) -> float:
    """Integrated squared error of a density curve against the MP density.

    Trapezoid rule over [a, b] on the curve's own grid points (plus the
    endpoints), with the curve interpolated linearly.
    """
    a, b = mp_support(params)
    grid, values = fhat.grid, fhat.values
    if grid[0] > a + 1e-12 or grid[-1] < b - 1e-12:
        raise GridDoesNotCoverSupportError(
            f"grid [{grid[0]!r}, {grid[-1]!r}] does not cover the support [{a!r}, {b!r}]"
        )
    inner = grid[(grid > a) & (grid < b)]
    mesh = np.concatenate(([a], inner, [b]))
    diff = np.interp(mesh, grid, values) - mp_density(params, mesh)
    return float(np.trapezoid(diff**2, mesh))


def default_z_grid() -> np.ndarray:
    """Fixed 200-point evaluation grid in the upper half-plane.

    20 real parts uniform on [-2, 3] crossed with 10 imaginary parts
    geometric on [1e-2, 10]; the flattened order is part of the contract
    (CSV outputs of different subcommands must align row by row).
    """
    re = np.linspace(-2.0, 3.0, 20)
    im = np.geomspace(1e-2, 10.0, 10)
    return (re[:, None] + 1j * im[None, :]).ravel()


def mp_quantiles(params: MPParams, k: int) -> np.ndarray:
    """k equal-mass quantile atoms of MP(y, sigma^2), for step-CDF proxies.

    Builds the CDF on a dense grid in the substitution variable (smooth
    integrand, cumulative trapezoid) and inverts by interpolation.
    """
    if k < 1:
        raise ValueError("need at least one quantile")
    y, s2 = params.y, params.sigma2
    sy = math.sqrt(y)
    w = np.linspace(0.0, math.pi, 20001)
    g = 2.0 * np.sin(w) ** 2 / (math.pi * (1.0 + y + 2.0 * sy * np.cos(w)))
    # integrate from pi (support left edge) toward 0 (right edge)
    dw = w[1] - w[0]
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (g[:-1] + g[1:]) * dw)))
    cdf = cum[-1] - cum  # CDF at x(w), decreasing in w
    x = s2 * (1.0 + y + 2.0 * sy * np.cos(w))
    q = (np.arange(k) + 0.5) / k
    return np.interp(q, cdf[::-1], x[::-1])
