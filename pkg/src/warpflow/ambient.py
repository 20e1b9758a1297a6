"""Warped and doubly-warped ambient spaces.

The metric is  g = d(rho)^2 + phi(rho)^2 g_M  where the fiber M is either
a round sphere S^n or a warped product J x_r S^(n-1).  Both cases share
one chart (rho, theta, z): for round fibers the polar decomposition
g_M = d(theta)^2 + sin(theta)^2 g_core applies with r = sin.  Construction
tabulates nothing except the anti-deSitter-Schwarzschild profile; objects
are immutable after construction and safe to share between threads.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import charts
from .errors import DegeneracyError, DomainError, DomainEscapeError
from .warp import (WarpFunction, ads_warp, euclidean_warp, expression_warp,
                   hyperbolic_warp, spherical_warp, table_warp)


@dataclass(frozen=True)
class FiberSpec:
    """Fiber manifold: round S^n or a doubly-warped J x_r S^(n-1)."""

    kind: str                  # "round_sphere" | "doubly_warped"
    dim: int                   # n = hypersurface dimension
    rwarp: WarpFunction        # profile r(theta); sin(theta) for round fibers

    @property
    def core_dim(self):
        return self.dim - 1

    @property
    def polar_closed(self):
        """True when the (theta, z) rep closes smoothly at theta in {0, pi}."""
        return self.rwarp.name == "spherical"


@dataclass(frozen=True)
class AmbientPoint:
    """Chart coordinates (rho, theta, z) with the core chart index."""

    rho: float
    theta: float
    z: np.ndarray
    chart: int = 0

    def coords(self):
        return np.concatenate([[self.rho, self.theta], np.atleast_1d(self.z)])


def point(rho, theta, z=None, chart=0, core_dim=1):
    z = np.zeros(core_dim) if z is None else np.atleast_1d(np.asarray(z, float))
    return AmbientPoint(float(rho), float(theta), z, chart)


@dataclass(frozen=True)
class WarpedAmbient:
    """Ambient space I x_phi M with cached structural data."""

    warp: WarpFunction
    fiber: FiberSpec
    space_form_curvature: Optional[int] = None
    name: str = "ambient"
    ads_params: Optional[dict] = field(default=None, repr=False)

    @property
    def n(self):
        return self.fiber.dim

    @property
    def dim(self):
        return self.fiber.dim + 1

    @property
    def rho_domain(self):
        return self.warp.domain

    def phi(self, rho):
        return self.warp.eval(rho)

    def dphi(self, rho):
        return self.warp.deriv1(rho)

    def d2phi(self, rho):
        return self.warp.deriv2(rho)

    def conformal_killing(self):
        return ConformalKilling(self)

    def interior_point(self, rho, theta=None, z=None, chart=0):
        theta = 0.5 * np.pi if theta is None else theta
        return point(rho, theta, z, chart, core_dim=self.fiber.core_dim)


# ---------------------------------------------------------------------------
# constructors

def _make_fiber(n, doubly_warped, rwarp=None):
    if rwarp is None:
        rwarp = spherical_warp()
    kind = "doubly_warped" if doubly_warped else "round_sphere"
    return FiberSpec(kind=kind, dim=n, rwarp=rwarp)


def make_space_form(k, n=2, doubly_warped=False, rho_max=50.0):
    """Space-form preset: k = 0 Euclidean, -1 hyperbolic, +1 sphere."""
    if k not in (-1, 0, 1):
        raise ValueError("space form curvature must be -1, 0 or +1")
    if k == 0:
        warp = euclidean_warp(rho_max)
        name = "euclidean"
    elif k == -1:
        warp = hyperbolic_warp(rho_max)
        name = "hyperbolic"
    else:
        warp = spherical_warp()
        name = "sphere"
    return WarpedAmbient(warp=warp, fiber=_make_fiber(n, doubly_warped),
                         space_form_curvature=k, name=name)


def make_ads_schwarzschild(m, n=2, doubly_warped=False, rho_max=12.0,
                           grid_points=10_000):
    """Anti-deSitter-Schwarzschild space of mass m >= 0."""
    warp = ads_warp(m, n, rho_max=rho_max, grid_points=grid_points)
    return WarpedAmbient(
        warp=warp, fiber=_make_fiber(n, doubly_warped),
        space_form_curvature=None,
        name=f"ads_schwarzschild(m={m})",
        ads_params={"m": float(m), "n": int(n)},
    )


def make_custom(expr=None, domain=None, warp=None, n=2, doubly_warped=False,
                name=None):
    """Custom ambient from a warp expression or a prebuilt WarpFunction."""
    if warp is None:
        if expr is None or domain is None:
            raise ValueError("custom ambient needs expr+domain or a warp")
        warp = expression_warp(expr, domain, name=name)
    return WarpedAmbient(warp=warp, fiber=_make_fiber(n, doubly_warped),
                         space_form_curvature=None,
                         name=name or f"custom[{warp.name}]")


def ambient_from_config(cfg):
    """Build an ambient from the scenario-file dictionary."""
    preset = cfg["preset"]
    n = int(cfg.get("n", 2))
    doubly = bool(cfg.get("doubly_warped", False))
    if preset == "euclidean":
        return make_space_form(0, n, doubly)
    if preset == "hyperbolic":
        return make_space_form(-1, n, doubly)
    if preset == "sphere":
        return make_space_form(1, n, doubly)
    if preset == "ads_schwarzschild":
        return make_ads_schwarzschild(float(cfg.get("m", 1.0)), n, doubly,
                                      rho_max=float(cfg.get("rho_max", 12.0)))
    if preset == "custom":
        if "table" in cfg:
            tab = np.asarray(cfg["table"], dtype=float)
            warp = table_warp(tab[:, 0], tab[:, 1],
                              dphi=tab[:, 2] if tab.shape[1] > 2 else None,
                              d2phi=tab[:, 3] if tab.shape[1] > 3 else None)
            return make_custom(warp=warp, n=n, doubly_warped=doubly)
        return make_custom(expr=cfg["expr"], domain=cfg["domain"], n=n,
                           doubly_warped=doubly)
    raise ValueError(f"unknown ambient preset {preset!r}")


# ---------------------------------------------------------------------------
# pointwise tensors

def _warp_values(ambient, p, strict=True):
    ambient.warp.check_domain(p.rho)
    phi = float(ambient.phi(p.rho))
    r = float(ambient.fiber.rwarp.eval(p.theta))
    if strict and (phi <= 0.0 or r <= 0.0):
        raise DegeneracyError(
            f"degenerate metric at rho={p.rho}, theta={p.theta}: "
            f"phi={phi}, r={r}"
        )
    return phi, r


def metric_at(ambient, p):
    """Metric components in the (rho, theta, z) chart: block diagonal."""
    phi, r = _warp_values(ambient, p)
    d = ambient.dim
    g = np.zeros((d, d))
    g[0, 0] = 1.0
    g[1, 1] = phi * phi
    g[2:, 2:] = (phi * r) ** 2 * charts.stereo_metric(p.z)
    return g


def fiber_metric_at(ambient, p):
    """Metric g_M of the fiber in the (theta, z) chart."""
    r = float(ambient.fiber.rwarp.eval(p.theta))
    n = ambient.n
    gm = np.zeros((n, n))
    gm[0, 0] = 1.0
    gm[1:, 1:] = r * r * charts.stereo_metric(p.z)
    return gm


def christoffel_at(ambient, p):
    """Christoffel symbols Gamma[a, b, c] = Gamma^a_{bc}, analytic."""
    phi, r = _warp_values(ambient, p)
    dphi = float(ambient.dphi(p.rho))
    dr = float(ambient.fiber.rwarp.deriv1(p.theta))
    d = ambient.dim
    ghat = charts.stereo_metric(p.z)
    gamma = np.zeros((d, d, d))
    gamma[0, 1, 1] = -phi * dphi
    gamma[0, 2:, 2:] = -phi * dphi * r * r * ghat
    gamma[1, 0, 1] = gamma[1, 1, 0] = dphi / phi
    gamma[1, 2:, 2:] = -r * dr * ghat
    for a in range(2, d):
        gamma[a, 0, a] = gamma[a, a, 0] = dphi / phi
        gamma[a, 1, a] = gamma[a, a, 1] = dr / r
    gamma[2:, 2:, 2:] = charts.stereo_christoffel(p.z)
    return gamma


def _warped_block_riemann(phi, dphi, d2phi, g_fib, rm_fib):
    """Curvature of dt^2 + phi^2 g_fib from the fiber data.

    Convention: Rm(X,Y,Z,W) = g(R(X,Y)Z, W) with
    R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; a space form of curvature k
    then satisfies Rm(X,Y,Z,W) = k (g(Y,Z) g(X,W) - g(X,Z) g(Y,W)).
    """
    m = g_fib.shape[0]
    d = m + 1
    rm = np.zeros((d, d, d, d))
    radial = phi * d2phi * g_fib                     # phi * phi'' * g_M
    rm[1:, 0, 0, 1:] = -radial
    rm[0, 1:, 1:, 0] = -radial
    rm[1:, 0, 1:, 0] = radial
    rm[0, 1:, 0, 1:] = radial
    outer = np.einsum("il,jk->ijkl", g_fib, g_fib) - \
        np.einsum("ik,jl->ijkl", g_fib, g_fib)
    rm[1:, 1:, 1:, 1:] = phi ** 2 * rm_fib - (dphi * phi) ** 2 * outer
    return rm


def riemann_at(ambient, p):
    """Riemann tensor at p as a Riemann object (full coordinate array)."""
    phi, r = _warp_values(ambient, p)
    dphi = float(ambient.dphi(p.rho))
    d2phi = float(ambient.d2phi(p.rho))
    dr = float(ambient.fiber.rwarp.deriv1(p.theta))
    d2r = float(ambient.fiber.rwarp.deriv2(p.theta))
    ghat = charts.stereo_metric(p.z)
    core = ghat.shape[0]
    # round unit core sphere: curvature +1
    rm_core = np.einsum("il,jk->ijkl", ghat, ghat) - \
        np.einsum("ik,jl->ijkl", ghat, ghat)
    rm_fiber = _warped_block_riemann(r, dr, d2r, ghat, rm_core)
    g_fiber = np.zeros((core + 1, core + 1))
    g_fiber[0, 0] = 1.0
    g_fiber[1:, 1:] = r * r * ghat
    rm = _warped_block_riemann(phi, dphi, d2phi, g_fiber, rm_fiber)
    return Riemann(rm)


class Riemann:
    """Coordinate components of Rm with a multilinear evaluator."""

    def __init__(self, components):
        self.components = components

    def __call__(self, u, v, w, x):
        return float(np.einsum("ijkl,i,j,k,l->", self.components,
                               u, v, w, x))

    def sectional(self, g, u, v):
        """Sectional curvature of span(u, v) with metric components g."""
        gu, gv = g @ u, g @ v
        area2 = (u @ gu) * (v @ gv) - (u @ gv) ** 2
        return self(u, v, v, u) / area2


# ---------------------------------------------------------------------------
# conformal Killing field and its flow

class ConformalKilling:
    """X = phi(rho) d/d(rho) with conformal factor kappa = phi'(rho)."""

    def __init__(self, ambient):
        self.ambient = ambient

    def field(self, p):
        vec = np.zeros(self.ambient.dim)
        vec[0] = float(self.ambient.phi(p.rho))
        return vec

    def kappa(self, p):
        return float(self.ambient.dphi(p.rho))


def _flow_closed_form(k, rho, t):
    rho = np.asarray(rho, dtype=float)
    if k == 0:
        return rho * np.exp(t)
    if k == -1:
        arg = np.exp(t) * np.tanh(0.5 * rho)
        if np.any(arg >= 1.0):
            worst = float(np.max(np.tanh(0.5 * rho)))
            raise DomainEscapeError(
                "hyperbolic flow reaches infinity in finite time",
                escape_time=-np.log(worst),
            )
        return 2.0 * np.arctanh(arg)
    if k == 1:
        return 2.0 * np.arctan(np.exp(t) * np.tan(0.5 * rho))
    raise ValueError("not a space form")


def flow_map_rho(ambient, rho, t, force_numeric=False):
    """Solve dr/dt = phi(r), r(0) = rho; accepts scalar or array rho.

    Uses the closed forms for space-form presets and an adaptive
    integrator otherwise.  Raises DomainEscapeError (with the escape
    time) if any trajectory leaves the rho-interval.
    """
    k = ambient.space_form_curvature
    scalar = np.ndim(rho) == 0
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    ambient.warp.check_domain(rho_arr)
    if t == 0.0:
        out = rho_arr.copy()
        return float(out[0]) if scalar else out
    if k is not None and not force_numeric:
        out = _flow_closed_form(k, rho_arr, t)
        ambient.warp.check_domain(out)
        return float(out[0]) if scalar else out

    lo, hi = ambient.warp.clip_margin()

    def rhs(_s, r):
        return ambient.phi(np.clip(r, lo, hi))

    def hit_hi(_s, r):
        return np.max(r) - hi
    hit_hi.terminal = True

    def hit_lo(_s, r):
        return np.min(r) - lo
    hit_lo.terminal = True

    sol = solve_ivp(rhs, (0.0, t), rho_arr, events=[hit_hi, hit_lo],
                    rtol=1e-11, atol=1e-13, method="DOP853")
    if sol.status == 1:
        times = [ev[0] for ev in sol.t_events if ev.size]
        raise DomainEscapeError("flow trajectory left the ambient interval",
                                escape_time=float(min(times)))
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    out = sol.y[:, -1]
    return float(out[0]) if scalar else out


def flow_map(ambient, p, t, force_numeric=False):
    """Flow map of X applied to an ambient point; fiber coords unchanged."""
    new_rho = flow_map_rho(ambient, p.rho, t, force_numeric=force_numeric)
    return AmbientPoint(float(new_rho), p.theta, p.z, p.chart)


def conformal_log_factor(ambient, rho, t):
    """integral_0^t phi'(r(s)) ds computed alongside the flow ODE."""
    ambient.warp.check_domain(rho)
    lo, hi = ambient.warp.clip_margin()

    def rhs(_s, y):
        r = np.clip(y[0], lo, hi)
        return [float(ambient.phi(r)), float(ambient.dphi(r))]

    def hit_hi(_s, y):
        return y[0] - hi
    hit_hi.terminal = True

    def hit_lo(_s, y):
        return y[0] - lo
    hit_lo.terminal = True

    sol = solve_ivp(rhs, (0.0, t), [float(rho), 0.0], events=[hit_hi, hit_lo],
                    rtol=1e-11, atol=1e-13, method="DOP853")
    if sol.status == 1:
        times = [ev[0] for ev in sol.t_events if ev.size]
        raise DomainEscapeError("flow trajectory left the ambient interval",
                                escape_time=float(min(times)))
    return float(sol.y[1, -1])


# ---------------------------------------------------------------------------
# lifted Killing fields

class KillingLift:
    """Rotation Killing field of the fiber lifted to the ambient space.

    kind "fiber": generator acts on the embedded S^n (round fibers only);
    kind "core": generator acts on the core S^(n-1), so the lift has zero
    rho- and theta-components in either fiber kind.
    """

    def __init__(self, ambient, generator, kind):
        self.ambient = ambient
        self.generator = np.asarray(generator, dtype=float)
        self.kind = kind

    def field(self, p):
        vec = np.zeros(self.ambient.dim)
        if self.kind == "fiber":
            k_theta, k_z = charts.fiber_killing_components(
                self.generator, p.theta, p.z, p.chart)
            vec[1] = k_theta
            vec[2:] = k_z
        else:
            vec[2:] = charts.core_killing_components(self.generator, p.z,
                                                     p.chart)
        return vec

    def theta_component(self, z, chart=0):
        """k^theta, constant in theta; zero for core rotations."""
        if self.kind == "core":
            return 0.0
        return charts.killing_theta_component(self.generator, z, chart)


def lift_killing(ambient, generator, kind="fiber"):
    """Lift a rotation generator of the fiber (or its core) to the ambient."""
    gen = np.asarray(generator, dtype=float)
    if not np.allclose(gen, -gen.T, atol=1e-13):
        raise ValueError("rotation generator must be antisymmetric")
    if kind == "fiber":
        if ambient.fiber.kind != "round_sphere":
            raise ValueError("full-fiber rotations require a round sphere "
                             "fiber; use kind='core'")
        expect = ambient.n + 1
    elif kind == "core":
        expect = ambient.n
    else:
        raise ValueError("kind must be 'fiber' or 'core'")
    if gen.shape != (expect, expect):
        raise ValueError(f"generator must be {expect}x{expect} for this kind")
    return KillingLift(ambient, gen, kind)


def equatorial_rotation(ambient, axis=None):
    """Fiber rotation pairing a core axis with the polar axis of S^n.

    This is the standard nontrivial Killing field for support-function
    tests: its support on a rotationally symmetric surface separates as
    q(theta) * (first harmonic on the core sphere).
    """
    n = ambient.n
    axis = n - 1 if axis is None else axis
    gen = charts.rotation_generator(n + 1, axis, n)
    return lift_killing(ambient, gen, kind="fiber")


def core_rotation(ambient, i=0, j=None):
    n = ambient.n
    j = n - 1 if j is None else j
    gen = charts.rotation_generator(n, i, j)
    return lift_killing(ambient, gen, kind="core")
