"""Hot kernels with twin implementations.

``shooting_sweep`` and ``advance_graph`` run on the numba backend when
the environment variable WARPFLOW_BACKEND allows it (values: auto,
numba, numpy; default auto) and the warp/speed pair can be lowered to
plain arrays; otherwise the vectorized numpy fallback runs.  Results
carry the backend that actually executed so manifests can record it.
"""

import numpy as np

from ..speed import solve_isotropic
from . import common
from . import np_backend

__all__ = ["shooting_sweep", "advance_graph", "shot_pole_data", "common"]


def _isotropic_closed_form(speed, target, n):
    """Closed-form admissible solution of f(s * ones) = target, or None."""
    code = speed.kernel_code
    k, j, alpha = speed.kernel_params
    if code == common.SPEED_H:
        s = target / n
    elif code == common.SPEED_INV_H:
        if target >= 0:
            return None
        s = -1.0 / (n * target)
    elif code == common.SPEED_POW_H:
        if target <= 0:
            return None
        s = target ** (1.0 / alpha) / n
    elif code == common.SPEED_GAUSS:
        if target <= 0:
            return None
        s = target ** (1.0 / n)
    elif code == common.SPEED_SIGMA:
        if target <= 0:
            return None
        from math import comb
        s = (target / comb(n, k)) ** (1.0 / k)
    elif code == common.SPEED_RATIO:
        from math import comb
        scale = (comb(n, k) / comb(n, j)) ** (1.0 / (k - j))
        s = target / scale
    else:
        return None
    return float(s) if s > 0 else None


def shot_pole_data(ambient, speed, tau_prime, a_values):
    """Per-shot pole curvature: solve the isotropic soliton relation.

    At the pole the profile is umbilic with every curvature equal to
    lam_pole solving f(lam_pole, ..., lam_pole) = -tau' phi(a); the
    series start uses u''(0) = b = phi phi' - lam_pole phi^2.  Shots with
    no admissible lam_pole are marked dead before integration.
    """
    n = ambient.n
    a = np.asarray(a_values, dtype=float)
    lo, hi = ambient.warp.clip_margin(1e-7)
    b = np.zeros_like(a)
    alive = (a > lo) & (a < hi)
    closed = speed.kernel_code >= 0
    for i, ai in enumerate(a):
        if not alive[i]:
            continue
        phi = float(ambient.phi(ai))
        dphi = float(ambient.dphi(ai))
        target = -tau_prime * phi
        if closed:
            lam_pole = _isotropic_closed_form(speed, target, n)
        else:
            lam_pole = solve_isotropic(speed, target, n)
        if lam_pole is None:
            alive[i] = False
            continue
        b[i] = phi * dphi - lam_pole * phi * phi
    return b, alive


def shooting_sweep(ambient, speed, tau_prime, a_values, n_steps=2048,
                   p_blowup=1e6):
    """Integrate the soliton profile ODE for every initial value.

    Returns a dict with the theta grid, per-shot profiles, end slope
    u'(pi - h), status codes (kernels.common.STATUS_NAMES) and the
    backend that ran.
    """
    if not ambient.fiber.polar_closed:
        raise ValueError("shooting needs the spherical fiber family")
    n = ambient.n
    a = np.asarray(a_values, dtype=float)
    b, alive = shot_pole_data(ambient, speed, tau_prime, a)
    backend = common.select_backend(ambient, speed)
    if backend == "numba":
        from . import nb_backend
        wcode, wm, wn, g_rho, g_s, g_d = common.pack_warp(ambient.warp)
        scode, sk, sj, salpha = common.pack_speed(speed)
        lo, hi = ambient.warp.clip_margin(1e-7)
        profiles, p_end, status, theta_death = nb_backend.sweep_kernel(
            scode, sk, sj, salpha, speed.cone == "positive", n,
            float(tau_prime), a, b, alive, int(n_steps),
            wcode, float(wm), float(wn), g_rho, g_s, g_d,
            float(lo), float(hi), float(p_blowup))
        return {
            "theta": np.linspace(0.0, np.pi, n_steps + 1),
            "profiles": profiles, "p_end": p_end, "status": status,
            "theta_death": theta_death, "backend": "numba",
        }
    return np_backend.shooting_sweep(ambient, speed, n, tau_prime, a, b,
                                     alive, int(n_steps), p_blowup)


def advance_graph(ambient, speed, u, t_now, t_target, cfl=0.2,
                  max_steps=2_000_000):
    """Advance a radial graph under (dF/dt)^perp = f nu to t_target.

    Returns (u, t_reached, status, stats); stats records the step count,
    smallest dt and the backend."""
    n = ambient.n
    backend = common.select_backend(ambient, speed)
    if backend == "numba":
        from . import nb_backend
        wcode, wm, wn, g_rho, g_s, g_d = common.pack_warp(ambient.warp)
        scode, sk, sj, salpha = common.pack_speed(speed)
        lo, hi = ambient.warp.clip_margin(1e-7)
        u_out, t, status, steps, dt_min = nb_backend.advance_kernel(
            scode, sk, sj, salpha, speed.cone == "positive", n,
            np.asarray(u, dtype=float).copy(), float(t_now),
            float(t_target), float(cfl), int(max_steps),
            wcode, float(wm), float(wn), g_rho, g_s, g_d,
            float(lo), float(hi))
        return u_out, t, status, {"steps": steps, "dt_min": dt_min,
                                  "backend": "numba"}
    u_out, t, status, stats = np_backend.advance_graph(
        ambient, speed, n, u, t_now, t_target, cfl, max_steps)
    stats["backend"] = "numpy"
    return u_out, t, status, stats
