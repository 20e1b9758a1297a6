"""Warp functions: the radial profile defining a warped product metric.

A warp function carries its own first and second derivatives because the
identities this package verifies (space-form relations, soliton
conditions) consume exact derivative values, not differentiated
interpolants.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import DomainError
from .expr import parse_expression

_HORIZON_OFFSET = 1e-8


@dataclass(frozen=True)
class WarpFunction:
    """Scalar profile on a closed interval with exact derivatives.

    ``eval``/``deriv1``/``deriv2`` accept scalars or numpy arrays.  The
    profile must be positive on the interior of ``domain``.
    """

    eval: Callable
    deriv1: Callable
    deriv2: Callable
    domain: tuple
    name: str = "warp"
    kernel_code: int = -1                    # see kernels.common
    kernel_data: Optional[dict] = field(default=None, repr=False)

    def __call__(self, rho):
        return self.eval(rho)

    def check_domain(self, rho, strict=False):
        lo, hi = self.domain
        rho = np.asarray(rho, dtype=float)
        bad = (rho < lo) | (rho > hi)
        if strict:
            bad |= (rho == lo) | (rho == hi)
        if np.any(bad):
            value = float(np.atleast_1d(rho)[np.argmax(np.atleast_1d(bad))])
            raise DomainError(
                f"rho={value} outside {self.name} domain [{lo}, {hi}]"
            )

    def clip_margin(self, rel=1e-9):
        """Interior sub-interval used when evaluating near the ends."""
        lo, hi = self.domain
        pad = rel * max(1.0, abs(lo), abs(hi))
        return lo + pad, hi - pad


def euclidean_warp(rho_max=50.0):
    return WarpFunction(
        eval=lambda r: np.asarray(r, dtype=float) + 0.0,
        deriv1=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        deriv2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        domain=(0.0, rho_max),
        name="euclidean",
        kernel_code=0,
    )


def hyperbolic_warp(rho_max=50.0):
    return WarpFunction(
        eval=np.sinh, deriv1=np.cosh, deriv2=np.sinh,
        domain=(0.0, rho_max), name="hyperbolic", kernel_code=1,
    )


def spherical_warp():
    return WarpFunction(
        eval=np.sin, deriv1=np.cos, deriv2=lambda r: -np.sin(r),
        domain=(0.0, np.pi), name="spherical", kernel_code=2,
    )


def expression_warp(text, domain, name=None):
    """Warp from the small expression grammar; derivatives are symbolic."""
    f, d1, d2 = parse_expression(text)
    return WarpFunction(
        eval=f, deriv1=d1, deriv2=d2, domain=tuple(float(x) for x in domain),
        name=name or f"expr[{text}]", kernel_code=4,
    )


def table_warp(rho, phi, dphi=None, d2phi=None, name="table"):
    """Warp from tabulated values.

    When derivative columns are missing they come from a monotone PCHIP
    fit of the values; exact identities should then only be trusted to
    the fit's accuracy.
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if rho.ndim != 1 or rho.shape != phi.shape or rho.size < 4:
        raise ValueError("table warp needs matching 1-d arrays of length >= 4")
    if np.any(np.diff(rho) <= 0):
        raise ValueError("table rho values must be strictly increasing")
    if dphi is not None:
        spline = CubicHermiteSpline(rho, phi, np.asarray(dphi, dtype=float))
    else:
        spline = PchipInterpolator(rho, phi)
    d1 = spline.derivative()
    if d2phi is not None:
        d2tab = np.asarray(d2phi, dtype=float)
        d2 = PchipInterpolator(rho, d2tab)
    else:
        d2 = spline.derivative(2)
    return WarpFunction(
        eval=spline, deriv1=d1, deriv2=d2,
        domain=(float(rho[0]), float(rho[-1])), name=name, kernel_code=4,
    )


def ads_horizon(m, n):
    """Largest root of omega(s) = 1 - m s^(1-n) + s^2 (zero when m = 0)."""
    if m < 0:
        raise ValueError("anti-deSitter-Schwarzschild mass must be >= 0")
    if m == 0:
        return 0.0
    # omega -> -inf as s -> 0+ and is eventually increasing; bisect on
    # s^(n-1) * omega(s), a polynomial with the same positive roots.
    def g(s):
        return s ** (n - 1) - m + s ** (n + 1)

    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    lo = hi / 2.0 if g(hi / 2.0) < 0 else 0.0
    from scipy.optimize import brentq
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16))


def ads_omega(s, m, n):
    s = np.asarray(s, dtype=float)
    if m == 0:
        return 1.0 + s * s          # avoids 0 * s^(1-n) at the origin
    return 1.0 - m * s ** (1 - n) + s * s


def ads_omega_prime(s, m, n):
    s = np.asarray(s, dtype=float)
    if m == 0:
        return 2.0 * s
    return (n - 1) * m * s ** (-n) + 2.0 * s


def ads_warp(m, n, rho_max=12.0, grid_points=10_000):
    """Anti-deSitter-Schwarzschild warp via the s <-> rho change of variables.

    Integrates ds/drho = sqrt(omega(s)) from the horizon and caches s(rho)
    on a dense grid.  The interpolant is a cubic Hermite fit with the
    analytically known slopes sqrt(omega(s)); phi' and phi'' always come
    from omega, never from differentiating the interpolant.  Monotonicity
    of the cached profile is asserted at build time.
    """
    if m < 0:
        raise ValueError("anti-deSitter-Schwarzschild mass must be >= 0")
    if n < 2:
        raise ValueError("fiber dimension must be >= 2")
    s0 = ads_horizon(m, n)
    s_start = s0 + (_HORIZON_OFFSET if m > 0 else 0.0)

    def rhs(_rho, s):
        return np.sqrt(np.maximum(ads_omega(s, m, n), 0.0))

    grid = np.linspace(0.0, rho_max, grid_points)
    sol = solve_ivp(rhs, (0.0, rho_max), [s_start], t_eval=grid,
                    rtol=1e-12, atol=1e-14, method="DOP853")
    if not sol.success:
        raise RuntimeError(f"AdS-Schwarzschild tabulation failed: {sol.message}")
    s_grid = sol.y[0]
    slopes = np.sqrt(np.maximum(ads_omega(s_grid, m, n), 0.0))
    if m == 0:
        # Exact start at s=0 keeps the m=0 profile on sinh(rho).
        s_grid[0] = 0.0
        slopes[0] = 1.0
    spline = CubicHermiteSpline(grid, s_grid, slopes)
    if np.any(np.diff(s_grid) <= 0):
        raise RuntimeError("cached AdS profile is not strictly increasing")

    lo_eval = 0.0

    def phi(rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < lo_eval - 1e-14) or np.any(rho > rho_max + 1e-14):
            raise DomainError(
                f"rho outside tabulated AdS-Schwarzschild range [0, {rho_max}]"
            )
        return spline(np.clip(rho, lo_eval, rho_max))

    def dphi(rho):
        return np.sqrt(np.maximum(ads_omega(phi(rho), m, n), 0.0))

    def d2phi(rho):
        return 0.5 * ads_omega_prime(phi(rho), m, n)

    return WarpFunction(
        eval=phi, deriv1=dphi, deriv2=d2phi, domain=(0.0, rho_max),
        name=f"ads_schwarzschild(m={m}, n={n})", kernel_code=3,
        kernel_data={
            "m": float(m), "n": int(n), "s0": s0,
            "grid_rho": grid, "grid_s": s_grid, "grid_slope": slopes,
        },
    )


SPACE_FORM_WARPS = {
    0: euclidean_warp,
    -1: hyperbolic_warp,
    1: spherical_warp,
}
