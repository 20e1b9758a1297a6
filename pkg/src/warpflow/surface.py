"""Hypersurface representations and their extrinsic geometry.

Orientation convention: the unit normal satisfies g(nu, d/d(rho)) < 0
whenever that pairing is nonzero (slices get nu = -d/d(rho)), otherwise
g(nu, d/d(theta)) < 0 (cones).  With h_ij = -g(nabla_i nu, e_j) a slice
then has principal curvatures +phi'/phi, so every sign below matches the
printed slice/cone tables.

Rotationally symmetric graphs rho = u(theta) over the fiber sphere use a
uniform theta grid on [0, pi] including both poles; derivatives are
4th-order central differences with even/odd ghost reflection, and the
cot(theta) terms are evaluated through ratios that stay finite at the
poles (the exact pole value is the relevant second derivative).
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh

from . import charts
from .ambient import (AmbientPoint, christoffel_at, metric_at)
from .errors import DegeneracyError, DomainError, WarpflowError


# ---------------------------------------------------------------------------
# representations

@dataclass(frozen=True)
class Slice:
    rho0: float


@dataclass(frozen=True)
class Cone:
    theta0: float


@dataclass(frozen=True)
class RadialGraph:
    """Rotationally symmetric graph rho = u(theta), theta uniform on [0, pi]."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size < 9:
            raise ValueError("radial graph needs a 1-d array of >= 9 nodes")
        object.__setattr__(self, "u", u)

    @property
    def n_nodes(self):
        return self.u.size

    @property
    def theta(self):
        return np.linspace(0.0, np.pi, self.u.size)

    @property
    def h(self):
        return np.pi / (self.u.size - 1)

    def to_csv(self, path):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["theta", "u"])
            for th, val in zip(self.theta, self.u):
                writer.writerow([repr(th), repr(val)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        theta = data[:, 0]
        expect = np.linspace(0.0, np.pi, theta.size)
        if np.max(np.abs(theta - expect)) > 1e-9:
            raise ValueError("graph CSV must sample theta uniformly on [0, pi]")
        return cls(u=data[:, 1])

    @classmethod
    def constant(cls, rho0, n_nodes=257):
        return cls(u=np.full(n_nodes, float(rho0)))

    @classmethod
    def perturbed(cls, rho0, amplitude, n_nodes=257, mode=1):
        th = np.linspace(0.0, np.pi, n_nodes)
        return cls(u=rho0 + amplitude * np.cos(mode * th))


@dataclass(frozen=True)
class Immersion:
    """Parametrized immersion chart -> (rho, theta, z...) coordinates.

    ``fn`` maps a chart point (array of length dim) to ambient
    coordinates, ``jac`` gives its derivative as a (dim+1+...) x dim
    matrix; ``d2`` is optional and only used by the Gauss-formula route.
    """

    fn: Callable
    jac: Callable
    dim: int
    d2: Optional[Callable] = None
    name: str = "immersion"


# ---------------------------------------------------------------------------
# geometry container

@dataclass
class ExtrinsicGeometry:
    """Per-sample extrinsic data; arrays share the leading sample axis.

    ``g`` and ``h`` are expressed in an orthogonal adapted frame
    (meridian direction, then core-sphere directions), so g is diagonal
    and the shape operator is diag(lam)."""

    n: int
    lam: np.ndarray                 # (m, n), sorted ascending
    nu: np.ndarray                  # (m, dim) chart components of the normal
    support_x: np.ndarray           # (m,)
    d_rho_nu: np.ndarray            # (m,)
    g: np.ndarray                   # (m, n, n)
    h: np.ndarray                   # (m, n, n)
    theta: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None
    lam_m: Optional[np.ndarray] = None
    lam_s: Optional[np.ndarray] = None
    support_k: dict = field(default_factory=dict)

    @property
    def mean_curvature(self):
        return np.sum(self.lam, axis=-1)

    @property
    def norm_A_squared(self):
        return np.sum(self.lam * self.lam, axis=-1)

    @property
    def star_shaped(self):
        return bool(np.all(np.abs(self.support_x) > 0.0))

    def shape_operator_eigenvalues(self):
        """Eigenvalues of g^{-1} h per sample, for consistency checks."""
        out = np.empty_like(self.lam)
        for i in range(self.lam.shape[0]):
            out[i] = np.sort(eigh(self.h[i], self.g[i], eigvals_only=True))
        return out

    def to_csv(self, path):
        m, n = self.lam.shape
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            head = ["theta"] + [f"lambda_{i + 1}" for i in range(n)]
            head += ["H", "support_x"]
            names = sorted(self.support_k)
            head += [f"support_{k}" for k in names]
            writer.writerow(head)
            theta = self.theta if self.theta is not None else np.full(m, np.nan)
            for i in range(m):
                row = [repr(float(theta[i]))]
                row += [repr(float(x)) for x in self.lam[i]]
                row += [repr(float(self.mean_curvature[i])),
                        repr(float(self.support_x[i]))]
                row += [repr(float(self.support_k[k][i])) for k in names]
                writer.writerow(row)


def _sorted_lam(lam_m, lam_s, n):
    cols = [np.asarray(lam_m, dtype=float)] + \
        [np.asarray(lam_s, dtype=float)] * (n - 1)
    return np.sort(np.stack(cols, axis=-1), axis=-1)


def _adapted_frames(n, g_m, g_s, lam_m, lam_s):
    m = g_m.size
    g = np.zeros((m, n, n))
    h = np.zeros((m, n, n))
    g[:, 0, 0] = g_m
    h[:, 0, 0] = lam_m * g_m
    for i in range(1, n):
        g[:, i, i] = g_s
        h[:, i, i] = lam_s * g_s
    return g, h


# ---------------------------------------------------------------------------
# finite differences on the polar grid

def fd1(values, h, parity):
    """4th-order first derivative with even/odd ghost reflection at poles."""
    ext = np.pad(values, 2, mode="reflect",
                 reflect_type="even" if parity == "even" else "odd")
    return (-ext[4:] + 8.0 * ext[3:-1] - 8.0 * ext[1:-3] + ext[:-4]) / (12.0 * h)


def fd2(values, h, parity):
    ext = np.pad(values, 2, mode="reflect",
                 reflect_type="even" if parity == "even" else "odd")
    return (-ext[4:] + 16.0 * ext[3:-1] - 30.0 * ext[2:-2] +
            16.0 * ext[1:-3] - ext[:-4]) / (12.0 * h * h)


def sin_ratio(values, theta, h, parity="odd"):
    """values/sin(theta) with the pole limit substituted at the end nodes.

    For an odd array the limit at theta=0 is values'(0) and at theta=pi
    it is -values'(pi); interior nodes are evaluated directly (sin is
    bounded away from zero there)."""
    out = np.empty_like(values)
    out[1:-1] = values[1:-1] / np.sin(theta[1:-1])
    deriv = fd1(values, h, parity)
    out[0] = deriv[0]
    out[-1] = -deriv[-1]
    return out


# ---------------------------------------------------------------------------
# slice and cone geometry

def slice_geometry(ambient, rho0, killing=None):
    """Umbilic slice: all principal curvatures phi'/phi, nu = -d/d(rho)."""
    lo, hi = ambient.rho_domain
    if not (lo < rho0 < hi):
        raise DomainError(f"slice radius {rho0} not interior to [{lo}, {hi}]")
    phi = float(ambient.phi(rho0))
    if phi <= 0:
        raise DegeneracyError(f"slice at rho={rho0} has phi={phi}")
    dphi = float(ambient.dphi(rho0))
    n = ambient.n
    lam = np.full((1, n), dphi / phi)
    nu = np.zeros((1, ambient.dim))
    nu[0, 0] = -1.0
    g, h = _adapted_frames(n, np.array([phi * phi]),
                           np.array([phi * phi]),
                           np.array([dphi / phi]), np.array([dphi / phi]))
    geom = ExtrinsicGeometry(
        n=n, lam=lam, nu=nu,
        support_x=np.array([-phi]),
        d_rho_nu=np.array([-1.0]),
        g=g, h=h,
        theta=np.array([0.5 * np.pi]),
        u=np.array([rho0]),
        lam_m=np.array([dphi / phi]), lam_s=np.array([dphi / phi]),
    )
    if killing:
        for name, lift in killing.items():
            # nu has no fiber component on a slice
            geom.support_k[name] = np.zeros(1)
    return geom


def cone_geometry(ambient, theta0, rho, killing=None, z_ref=None):
    """Cone {theta = theta0}: curvatures {0, (r'/r)/phi x (n-1)}.

    The normal is oriented toward decreasing theta, which makes the
    repeated curvature +cot(theta0)/phi for the spherical family below
    the equator."""
    if ambient.fiber.kind != "doubly_warped":
        raise WarpflowError("cones require a doubly-warped ambient")
    rw = ambient.fiber.rwarp
    lo, hi = rw.domain
    if not (lo < theta0 < hi):
        raise DomainError(f"cone angle {theta0} not interior to [{lo}, {hi}]")
    r = float(rw.eval(theta0))
    if r <= 0:
        raise DegeneracyError(f"cone at theta={theta0} has r={r}")
    dr = float(rw.deriv1(theta0))
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    ambient.warp.check_domain(rho)
    phi = np.asarray(ambient.phi(rho), dtype=float)
    n = ambient.n
    m = rho.size
    lam_s = (dr / r) / phi
    lam_m = np.zeros(m)
    nu = np.zeros((m, ambient.dim))
    nu[:, 1] = -1.0 / phi
    g, h = _adapted_frames(n, np.ones(m), (phi * r) ** 2, lam_m, lam_s)
    geom = ExtrinsicGeometry(
        n=n, lam=_sorted_lam(lam_m, lam_s, n), nu=nu,
        support_x=np.zeros(m), d_rho_nu=np.zeros(m),
        g=g, h=h, theta=np.full(m, theta0), u=rho,
        lam_m=lam_m, lam_s=np.full(m, lam_s) if np.ndim(lam_s) == 0 else lam_s,
    )
    if killing:
        z_ref = np.zeros(ambient.fiber.core_dim) if z_ref is None else z_ref
        for name, lift in killing.items():
            k_theta = lift.theta_component(z_ref)
            geom.support_k[name] = (phi * phi) * k_theta * nu[:, 1]
    return geom


# ---------------------------------------------------------------------------
# rotationally symmetric graphs

def graph_quantities(ambient, u, require_interior=True):
    """Raw per-node quantities of a radial graph (no speed function).

    Returns a dict of arrays: theta, u, u1, u2, phi, dphi, d2phi, W,
    lam_m, lam_s, support_x, nu_rho, nu_theta, sin ratio of u1.
    """
    if not ambient.fiber.polar_closed:
        raise WarpflowError("radial graphs need the spherical fiber family")
    u = np.asarray(u, dtype=float)
    theta = np.linspace(0.0, np.pi, u.size)
    h = np.pi / (u.size - 1)
    lo, hi = ambient.rho_domain
    if require_interior and (np.min(u) <= lo or np.max(u) >= hi):
        raise DomainError("graph values must be interior to the rho-domain")
    phi = np.asarray(ambient.phi(u), dtype=float)
    if np.any(phi <= 0):
        raise DegeneracyError("graph touches the degenerate locus phi = 0")
    dphi = np.asarray(ambient.dphi(u), dtype=float)
    d2phi = np.asarray(ambient.d2phi(u), dtype=float)
    u1 = fd1(u, h, "even")
    u2 = fd2(u, h, "even")
    w = np.sqrt(u1 * u1 + phi * phi)
    ratio = sin_ratio(u1, theta, h)           # u'/sin(theta)
    cot_term = ratio * np.cos(theta)          # cot(theta) u', finite at poles
    lam_m = (-phi * u2 + phi * phi * dphi + 2.0 * u1 * u1 * dphi) / w ** 3
    lam_s = (phi * dphi - cot_term) / (phi * w)
    return {
        "theta": theta, "h": h, "u": u, "u1": u1, "u2": u2,
        "phi": phi, "dphi": dphi, "d2phi": d2phi, "w": w,
        "ratio": ratio, "lam_m": lam_m, "lam_s": lam_s,
        "support_x": -phi * phi / w,
        "nu_rho": -phi / w, "nu_theta": u1 / (phi * w),
    }


def graph_geometry(ambient, graph, killing=None, z_ref=None):
    """Extrinsic geometry of a RadialGraph at every grid node."""
    q = graph_quantities(ambient, graph.u)
    n = ambient.n
    g, h = _adapted_frames(n, q["w"] ** 2,
                           (q["phi"] * np.sin(q["theta"])) ** 2,
                           q["lam_m"], q["lam_s"])
    # the core-sphere frame degenerates at the poles; patch g there with
    # the umbilic limit so the stored matrices stay positive definite
    for pole in (0, -1):
        g[pole, 1:, 1:] = np.eye(n - 1) * q["w"][pole] ** 2
        h[pole, 1:, 1:] = np.eye(n - 1) * q["lam_s"][pole] * q["w"][pole] ** 2
    nu = np.zeros((q["u"].size, ambient.dim))
    nu[:, 0] = q["nu_rho"]
    nu[:, 1] = q["nu_theta"]
    geom = ExtrinsicGeometry(
        n=n, lam=_sorted_lam(q["lam_m"], q["lam_s"], n), nu=nu,
        support_x=q["support_x"], d_rho_nu=q["nu_rho"], g=g, h=h,
        theta=q["theta"], u=q["u"], lam_m=q["lam_m"], lam_s=q["lam_s"],
    )
    if killing:
        z_ref = np.zeros(ambient.fiber.core_dim) if z_ref is None else z_ref
        for name, lift in killing.items():
            k_theta = lift.theta_component(z_ref)
            geom.support_k[name] = (q["phi"] ** 2) * k_theta * nu[:, 1]
    return geom


# ---------------------------------------------------------------------------
# generic immersions: the representation-independent oracle

def _unit_normal(gbar, jac, base=None):
    """Unit normal from orthogonality: the 1-d kernel of J^T gbar."""
    a = jac.T @ gbar
    _, _, vt = np.linalg.svd(a)
    nu = vt[-1]
    nu = nu / np.sqrt(nu @ gbar @ nu)
    if base is not None:
        if nu @ gbar @ base < 0:
            nu = -nu
        return nu
    if abs(nu[0]) > 1e-9:
        return -nu if nu[0] > 0 else nu
    return -nu if nu[1] > 0 else nu


def _coords_to_point(coords, chart):
    return AmbientPoint(float(coords[0]), float(coords[1]),
                        np.asarray(coords[2:], dtype=float), chart)


def immersion_geometry(ambient, imm, chart_point, killing=None, chart=0,
                       step=1e-5, method="fd"):
    """Brute-force geometry of a generic immersion at one chart point.

    Solves for the unit normal from orthogonality and builds
    h_ij = -g(nabla_i nu, e_j) with ambient Christoffels; the derivative
    of nu is taken by central differences over the chart (method "fd",
    the default and the oracle used for validation) or from the Gauss
    formula when second-derivative callbacks exist (method "gauss")."""
    x0 = np.asarray(chart_point, dtype=float)
    if x0.size != imm.dim:
        raise ValueError("chart point has wrong dimension")

    def normal_at(x, base=None):
        coords = np.asarray(imm.fn(x), dtype=float)
        p = _coords_to_point(coords, chart)
        gbar = metric_at(ambient, p)
        jac = np.asarray(imm.jac(x), dtype=float)
        return p, gbar, jac, _unit_normal(gbar, jac, base)

    p0, gbar0, jac0, nu0 = normal_at(x0)
    g_ind = jac0.T @ gbar0 @ jac0
    eig = np.linalg.eigvalsh(g_ind)
    if eig[0] <= 1e-12 * max(1.0, eig[-1]):
        raise DegeneracyError("rank-deficient tangent map")

    gamma = christoffel_at(ambient, p0)
    n = imm.dim
    if method == "gauss":
        if imm.d2 is None:
            raise ValueError("gauss method needs second-derivative callbacks")
        d2 = np.asarray(imm.d2(x0), dtype=float)
        sec = d2 + np.einsum("abc,bi,cj->aij", gamma, jac0, jac0)
        h_ind = np.einsum("aij,ab,b->ij", sec, gbar0, nu0)
    else:
        dnu = np.zeros((n, nu0.size))
        for i in range(n):
            xp, xm = x0.copy(), x0.copy()
            xp[i] += step
            xm[i] -= step
            _, _, _, nup = normal_at(xp, base=nu0)
            _, _, _, num = normal_at(xm, base=nu0)
            dnu[i] = (nup - num) / (2.0 * step)
        h_ind = np.zeros((n, n))
        for i in range(n):
            cov = dnu[i] + np.einsum("abc,b,c->a", gamma, jac0[:, i], nu0)
            h_ind[i] = -(cov @ gbar0 @ jac0)
        h_ind = 0.5 * (h_ind + h_ind.T)

    lam = np.sort(eigh(h_ind, g_ind, eigvals_only=True))
    phi = float(ambient.phi(p0.rho))
    support_x = phi * float((gbar0 @ nu0)[0])
    geom = ExtrinsicGeometry(
        n=n, lam=lam[None, :], nu=nu0[None, :],
        support_x=np.array([support_x]),
        d_rho_nu=np.array([nu0[0]]),
        g=g_ind[None, :, :], h=h_ind[None, :, :],
        theta=np.array([p0.theta]), u=np.array([p0.rho]),
    )
    if killing:
        for name, lift in killing.items():
            kvec = lift.field(p0)
            geom.support_k[name] = np.array([float(kvec @ gbar0 @ nu0)])
    return geom


# immersion builders ---------------------------------------------------------

def slice_immersion(ambient, rho0):
    dim = ambient.n

    def fn(x):
        return np.concatenate([[rho0], x])

    def jac(x):
        out = np.zeros((dim + 1, dim))
        out[1:, :] = np.eye(dim)
        return out

    def d2(x):
        return np.zeros((dim + 1, dim, dim))
    return Immersion(fn=fn, jac=jac, dim=dim, d2=d2, name=f"slice({rho0})")


def cone_immersion(ambient, theta0):
    dim = ambient.n

    def fn(x):
        return np.concatenate([[x[0], theta0], x[1:]])

    def jac(x):
        out = np.zeros((dim + 1, dim))
        out[0, 0] = 1.0
        out[2:, 1:] = np.eye(dim - 1)
        return out

    def d2(x):
        return np.zeros((dim + 1, dim, dim))
    return Immersion(fn=fn, jac=jac, dim=dim, d2=d2, name=f"cone({theta0})")


def graph_immersion(ambient, u_fn, du_fn, d2u_fn=None):
    """Immersion (theta, z) -> (u(theta), theta, z) from profile callbacks."""
    dim = ambient.n

    def fn(x):
        return np.concatenate([[u_fn(x[0]), x[0]], x[1:]])

    def jac(x):
        out = np.zeros((dim + 1, dim))
        out[0, 0] = du_fn(x[0])
        out[1, 0] = 1.0
        out[2:, 1:] = np.eye(dim - 1)
        return out

    d2 = None
    if d2u_fn is not None:
        def d2(x):
            out = np.zeros((dim + 1, dim, dim))
            out[0, 0, 0] = d2u_fn(x[0])
            return out
    return Immersion(fn=fn, jac=jac, dim=dim, d2=d2, name="graph")


def profile_immersion(ambient, theta_fn, dtheta_fn, d2theta_fn=None,
                      z_profile=None):
    """Cone-like end (sigma, z) -> (sigma, Theta(sigma, z...), z).

    ``theta_fn`` may break the core symmetry through ``z_profile``: the
    angle is Theta(sigma) + z_profile(sigma) * first-harmonic(z), which is
    how decay tests build ends that a core rotation can detect."""
    dim = ambient.n
    core = dim - 1

    def harmonic(z):
        yhat = charts.stereo_embed(z)
        return yhat[core - 1] if core >= 1 else 0.0

    def fn(x):
        sigma, z = x[0], x[1:]
        ang = theta_fn(sigma)
        if z_profile is not None:
            ang = ang + z_profile(sigma) * harmonic(z)
        return np.concatenate([[sigma, ang], z])

    def jac(x):
        sigma, z = x[0], x[1:]
        out = np.zeros((dim + 1, dim))
        out[0, 0] = 1.0
        out[1, 0] = dtheta_fn(sigma)
        if z_profile is not None:
            out[1, 0] += _fd_scalar(z_profile, sigma) * harmonic(z)
            for b in range(core):
                out[1, 1 + b] = z_profile(sigma) * _fd_scalar(
                    lambda zz, b=b: harmonic(_subst(z, b, zz)), z[b])
        out[2:, 1:] = np.eye(core)
        return out
    return Immersion(fn=fn, jac=jac, dim=dim, name="profile")


def _subst(z, idx, val):
    out = np.array(z, dtype=float)
    out[idx] = val
    return out


def _fd_scalar(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)
