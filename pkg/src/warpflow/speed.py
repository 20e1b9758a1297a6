"""Homogeneous symmetric speed functions of principal curvatures.

All evaluation routines accept stacked inputs: ``lam`` may be shape (n,)
or (..., n) and results broadcast over the leading axes, which is what
the vectorized flow and shooting paths rely on.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional

import numpy as np

from .errors import AdmissibilityError

_EPS = 1e-300


def _as_batch(lam):
    lam = np.asarray(lam, dtype=float)
    squeeze = lam.ndim == 1
    return (lam[None, :] if squeeze else lam), squeeze


def _sigma(lam, k):
    """Elementary symmetric polynomial sigma_k along the last axis."""
    lam, squeeze = _as_batch(lam)
    n = lam.shape[-1]
    # e-polynomial recurrence; n is small so this is cheap and exact
    e = np.zeros(lam.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        for j in range(min(i + 1, k), 0, -1):
            e[..., j] = e[..., j] + lam[..., i] * e[..., j - 1]
    out = e[..., k]
    return out[0] if squeeze else out


def _sigma_gradient(lam, k):
    """d sigma_k / d lam_i = sigma_{k-1} of the remaining entries."""
    lam, squeeze = _as_batch(lam)
    n = lam.shape[-1]
    grad = np.empty_like(lam)
    idx = np.arange(n)
    for i in range(n):
        rest = lam[..., idx != i]
        grad[..., i] = _sigma(rest, k - 1) if k >= 1 else 0.0
    return grad[0] if squeeze else grad


@dataclass(frozen=True)
class SpeedFunction:
    """Symmetric homogeneous curvature function with its gradient and cone."""

    name: str
    degree: float
    evaluate: Callable
    gradient: Callable
    admissible: Callable
    cone: str = "mean"                       # "mean": {H>0}; "positive": all lam_i>0
    kernel_code: int = -1
    kernel_params: tuple = (0, 0, 1.0)       # (k, j, alpha)

    def __call__(self, lam):
        return self.evaluate(lam)

    def require_admissible(self, lam):
        ok = self.admissible(lam)
        if not np.all(ok):
            lam = np.asarray(lam, dtype=float)
            bad = np.atleast_1d(~np.atleast_1d(ok))
            where = int(np.argmax(bad))
            raise AdmissibilityError(
                f"curvatures outside the admissible cone of {self.name} "
                f"(first offending sample index {where})"
            )


@dataclass(frozen=True)
class FDotTensor:
    """Traces of df/dh in the principal frame."""

    fdot: np.ndarray         # diagonal entries df/dlam_i
    trace_g: np.ndarray      # fdot^{ij} g_ij    = sum_i df/dlam_i
    trace_h: np.ndarray      # fdot^{ij} h_ij    = sum_i (df/dlam_i) lam_i
    trace_h2: np.ndarray     # fdot^{ij} (h^2)_ij = sum_i (df/dlam_i) lam_i^2


def fdot_traces(f: SpeedFunction, lam) -> FDotTensor:
    """Assemble the fdot tensor traces at admissible curvature vectors."""
    f.require_admissible(lam)
    lam = np.asarray(lam, dtype=float)
    grad = f.gradient(lam)
    return FDotTensor(
        fdot=grad,
        trace_g=np.sum(grad, axis=-1),
        trace_h=np.sum(grad * lam, axis=-1),
        trace_h2=np.sum(grad * lam * lam, axis=-1),
    )


def _mean_curvature_cone(lam):
    return np.sum(np.asarray(lam, dtype=float), axis=-1) > 0.0


def _positive_cone(lam):
    return np.min(np.asarray(lam, dtype=float), axis=-1) > 0.0


def make_speed(name, k=None, j=None, alpha=None, n=None) -> SpeedFunction:
    """Named speed functions.

    H (degree 1), inverseH = -1/H (degree -1), gauss = product (degree n),
    sigma_k (degree k), sigma_ratio = (sigma_k/sigma_j)^(1/(k-j)) (degree 1)
    and power = H^alpha (degree alpha).  H-based speeds use the cone
    {H > 0}; product/sigma speeds use the positive cone.
    """
    if name == "H":
        return SpeedFunction(
            name="H", degree=1.0,
            evaluate=lambda lam: np.sum(np.asarray(lam, float), axis=-1),
            gradient=lambda lam: np.ones_like(np.asarray(lam, float)),
            admissible=_mean_curvature_cone, kernel_code=0,
        )
    if name == "inverseH":
        def ev(lam):
            return -1.0 / np.sum(np.asarray(lam, float), axis=-1)

        def gr(lam):
            lam = np.asarray(lam, float)
            h = np.sum(lam, axis=-1)
            return np.broadcast_to((1.0 / (h * h))[..., None],
                                   lam.shape).copy()
        return SpeedFunction(name="inverseH", degree=-1.0, evaluate=ev,
                             gradient=gr, admissible=_mean_curvature_cone,
                             kernel_code=1)
    if name == "gauss":
        def ev(lam):
            return np.prod(np.asarray(lam, float), axis=-1)

        def gr(lam):
            lam = np.asarray(lam, float)
            prod = np.prod(lam, axis=-1)
            return prod[..., None] / lam
        if n is None:
            raise ValueError("gauss speed needs the surface dimension n")
        return SpeedFunction(name="gauss", degree=float(n), evaluate=ev,
                             gradient=gr, admissible=_positive_cone,
                             cone="positive", kernel_code=3)
    if name == "sigma":
        if k is None:
            raise ValueError("sigma speed needs k")
        if n is not None and k > n:
            raise ValueError("sigma_k needs k <= n")
        kk = int(k)
        return SpeedFunction(
            name=f"sigma_{kk}", degree=float(kk),
            evaluate=lambda lam: _sigma(lam, kk),
            gradient=lambda lam: _sigma_gradient(lam, kk),
            admissible=_positive_cone, cone="positive", kernel_code=4,
            kernel_params=(kk, 0, 1.0),
        )
    if name == "ratio":
        if k is None or j is None or not j < k:
            raise ValueError("ratio speed needs j < k")
        kk, jj = int(k), int(j)
        p = 1.0 / (kk - jj)

        def ev(lam):
            return (_sigma(lam, kk) / _sigma(lam, jj)) ** p

        def gr(lam):
            num = _sigma(lam, kk)
            den = _sigma(lam, jj)
            base = (num / den) ** p
            dnum = _sigma_gradient(lam, kk)
            dden = _sigma_gradient(lam, jj)
            return (p * base)[..., None] * (
                dnum / num[..., None] - dden / den[..., None])

        def adm(lam):
            return _positive_cone(lam) & (_sigma(lam, jj) > 0)
        return SpeedFunction(name=f"sigma_{kk}/sigma_{jj}^(1/{kk - jj})",
                             degree=1.0, evaluate=ev, gradient=gr,
                             admissible=adm, cone="positive", kernel_code=5,
                             kernel_params=(kk, jj, 1.0))
    if name == "power":
        if alpha is None or alpha <= 0:
            raise ValueError("power speed needs alpha > 0")
        a = float(alpha)

        def ev(lam):
            return np.sum(np.asarray(lam, float), axis=-1) ** a

        def gr(lam):
            lam = np.asarray(lam, float)
            h = np.sum(lam, axis=-1)
            return np.broadcast_to((a * h ** (a - 1.0))[..., None],
                                   lam.shape).copy()
        return SpeedFunction(name=f"H^{a}", degree=a, evaluate=ev,
                             gradient=gr, admissible=_mean_curvature_cone,
                             kernel_code=2, kernel_params=(0, 0, a))
    raise ValueError(f"unknown speed function {name!r}")


def parse_speed(text, n=None) -> SpeedFunction:
    """Config grammar: H | -1/H | K | sigma:k | ratio:k:j | H^alpha:a."""
    text = text.strip()
    if text == "H":
        return make_speed("H")
    if text == "-1/H":
        return make_speed("inverseH")
    if text == "K":
        if n is None:
            raise ValueError("K speed needs the surface dimension n")
        return make_speed("gauss", n=n)
    if text.startswith("sigma:"):
        return make_speed("sigma", k=int(text.split(":")[1]), n=n)
    if text.startswith("ratio:"):
        _, k, j = text.split(":")
        return make_speed("ratio", k=int(k), j=int(j))
    if text.startswith("H^alpha:"):
        return make_speed("power", alpha=float(text.split(":")[1]))
    raise ValueError(f"cannot parse speed spec {text!r}")


def isotropic_value(f: SpeedFunction, s, n):
    """f at the isotropic vector (s, ..., s) of length n."""
    return f.evaluate(np.full(n, float(s)))


def solve_isotropic(f: SpeedFunction, target, n, bracket=(1e-12, 1e6)):
    """Solve f(s * ones) = target for s inside the admissible cone.

    Returns None when no admissible solution exists (this is how a
    shooting sweep discovers that a speed/tau' combination admits no
    profile at all).
    """
    from scipy.optimize import brentq

    lo, hi = bracket
    # admissible isotropic directions: positive s for the positive cone,
    # positive H means positive s for H-based cones as well.
    def g(s):
        return isotropic_value(f, s, n) - target

    try:
        glo, ghi = g(lo), g(hi)
    except FloatingPointError:
        return None
    if not np.isfinite(glo) or not np.isfinite(ghi) or glo * ghi > 0:
        return None
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16))
