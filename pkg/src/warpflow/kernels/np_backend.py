"""Pure-numpy kernels: the always-available fallback backend.

The shooting sweep integrates all shots in lockstep, vectorized across
initial values, with the implicitly defined u'' recovered by a masked
vector bisection.  Works with arbitrary WarpFunction/SpeedFunction
objects, which is why custom warp expressions always land here.
"""

import numpy as np

from ..surface import fd1, fd2, sin_ratio
from . import common as C


def _stack_lam(lam_m, lam_s, n):
    return np.stack([lam_m] + [lam_s] * (n - 1), axis=-1)


class _ShotRHS:
    """Evaluates u'' from the soliton relation by vector bisection."""

    def __init__(self, ambient, speed, n, tau_prime, p_blowup):
        self.ambient = ambient
        self.speed = speed
        self.n = n
        self.tau_prime = tau_prime
        self.p_blowup = p_blowup
        self.positive = speed.cone == "positive"
        self.edge = 1e-9

    def _residual(self, q, phi, dphi, p, w, lam_s, target):
        lam_m = (-phi * q + phi * phi * dphi + 2.0 * p * p * dphi) / w ** 3
        f_val = self.speed.evaluate(_stack_lam(lam_m, lam_s, self.n))
        return f_val - target

    def __call__(self, theta, u, p, active):
        """Returns (q, ok) arrays; ok=False marks shots dying here."""
        amb, n = self.ambient, self.n
        ok = active.copy()
        lo, hi = amb.warp.clip_margin(1e-7)
        ok &= (u > lo) & (u < hi) & (np.abs(p) < self.p_blowup)
        q = np.zeros_like(u)
        code = np.where(ok, C.OK, C.DOMAIN_EXIT)
        code[active & (np.abs(p) >= self.p_blowup)] = C.BLOWUP
        if not np.any(ok):
            return q, ok, code
        u_safe = np.clip(u, lo, hi)
        phi = np.asarray(amb.phi(u_safe), dtype=float)
        dphi = np.asarray(amb.dphi(u_safe), dtype=float)
        w = np.sqrt(p * p + phi * phi)
        cot = np.cos(theta) / np.sin(theta)
        lam_s = (phi * dphi - cot * p) / (phi * w)
        if self.positive:
            bad = ok & (lam_s <= self.edge)
            code[bad] = C.INADMISSIBLE
            ok &= ~bad
        target = self.tau_prime * (-(phi * phi) / w)
        lam_edge = (self.edge - (0.0 if self.positive else (n - 1) * lam_s))
        q_hi = (phi * phi * dphi + 2.0 * p * p * dphi -
                lam_edge * w ** 3) / phi
        r_hi = self._residual(q_hi, phi, dphi, p, w, lam_s, target)
        no_root = ok & ~(r_hi < 0.0)
        code[no_root] = C.NO_ROOT
        ok &= ~no_root
        # expand a lower bracket endpoint until the residual is positive
        delta = np.maximum(1.0, np.abs(q_hi))
        q_lo = q_hi - delta
        for _ in range(70):
            r_lo = self._residual(q_lo, phi, dphi, p, w, lam_s, target)
            need = ok & ~(r_lo > 0.0)
            if not np.any(need):
                break
            delta = np.where(need, 2.0 * delta, delta)
            q_lo = np.where(need, q_lo - delta, q_lo)
        else:
            code[need] = C.NO_ROOT
            ok &= ~need
        lo_b, hi_b = q_lo.copy(), q_hi.copy()
        for _ in range(200):
            width = hi_b - lo_b
            tol = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo_b),
                                                     np.abs(hi_b)))
            run = ok & (width > tol)
            if not np.any(run):
                break
            mid = 0.5 * (lo_b + hi_b)
            r_mid = self._residual(mid, phi, dphi, p, w, lam_s, target)
            take_lo = run & (r_mid > 0.0)
            lo_b = np.where(take_lo, mid, lo_b)
            hi_b = np.where(run & ~take_lo, mid, hi_b)
        q = np.where(ok, 0.5 * (lo_b + hi_b), 0.0)
        return q, ok, code


def shooting_sweep(ambient, speed, n, tau_prime, a_values, b_values, alive0,
                   n_steps, p_blowup):
    """Integrate all shots over theta in [h, pi-h] with classical RK4."""
    a = np.asarray(a_values, dtype=float)
    b = np.asarray(b_values, dtype=float)
    s = a.size
    h = np.pi / n_steps
    theta = np.linspace(0.0, np.pi, n_steps + 1)
    rhs = _ShotRHS(ambient, speed, n, tau_prime, p_blowup)

    profiles = np.full((s, n_steps + 1), np.nan)
    status = np.full(s, C.OK, dtype=np.int64)
    status[~alive0] = C.INADMISSIBLE_POLE
    theta_death = np.full(s, np.nan)
    theta_death[~alive0] = 0.0

    active = alive0.copy()
    u = a + 0.5 * b * h * h
    p = b * h
    profiles[:, 0] = a
    profiles[active, 1] = u[active]

    def stage(th, uu, pp, act):
        q, ok, code = rhs(th, uu, pp, act)
        return pp, q, ok, code

    for k in range(1, n_steps):
        th = theta[k]
        if not np.any(active):
            break
        du1, dp1, ok1, c1 = stage(th, u, p, active)
        du2, dp2, ok2, c2 = stage(th + 0.5 * h, u + 0.5 * h * du1,
                                  p + 0.5 * h * dp1, ok1)
        du3, dp3, ok3, c3 = stage(th + 0.5 * h, u + 0.5 * h * du2,
                                  p + 0.5 * h * dp2, ok2)
        du4, dp4, ok4, c4 = stage(th + h, u + h * du3, p + h * dp3, ok3)
        ok = ok4
        died = active & ~ok
        if np.any(died):
            # first failing stage supplies the reason
            reason = np.where(~ok1, c1, np.where(~ok2, c2,
                              np.where(~ok3, c3, c4)))
            status[died] = reason[died]
            theta_death[died] = th
            active &= ok
        u = np.where(active, u + (h / 6.0) * (du1 + 2 * du2 + 2 * du3 + du4),
                     u)
        p = np.where(active, p + (h / 6.0) * (dp1 + 2 * dp2 + 2 * dp3 + dp4),
                     p)
        profiles[active, k + 1] = u[active]

    # last-node extrapolation by the even-symmetry Taylor step
    q_end, ok_end, _ = rhs(np.pi - h, u, p, active)
    u_end = u + p * h + 0.5 * q_end * h * h
    profiles[active & ok_end, n_steps] = u_end[active & ok_end]
    theta_death[active] = np.pi - h
    p_end = np.where(active, p, np.nan)
    return {
        "theta": theta, "profiles": profiles, "p_end": p_end,
        "status": status, "theta_death": theta_death, "backend": "numpy",
    }


def _graph_rhs(ambient, speed, n, u, theta, h, lo, hi):
    """Method-of-lines right-hand side u_t = -f W / phi on the polar grid."""
    if np.min(u) <= lo or np.max(u) >= hi:
        return None, None, C.DOMAIN_EXIT
    phi = np.asarray(ambient.phi(u), dtype=float)
    dphi = np.asarray(ambient.dphi(u), dtype=float)
    u1 = fd1(u, h, "even")
    u2 = fd2(u, h, "even")
    w = np.sqrt(u1 * u1 + phi * phi)
    ratio = sin_ratio(u1, theta, h)
    lam_m = (-phi * u2 + phi * phi * dphi + 2.0 * u1 * u1 * dphi) / w ** 3
    lam_s = (phi * dphi - ratio * np.cos(theta)) / (phi * w)
    lam = _stack_lam(lam_m, lam_s, n)
    if not np.all(speed.admissible(lam)):
        return None, None, C.INADMISSIBLE
    f_val = speed.evaluate(lam)
    grad = speed.gradient(lam)
    udot = -f_val * w / phi
    diff = np.max(grad[..., 0] / (w * w))
    return udot, diff, C.OK


def advance_graph(ambient, speed, n, u, t_now, t_target, cfl, max_steps):
    """Explicit Heun stepping with the parabolic CFL bound."""
    u = np.asarray(u, dtype=float).copy()
    theta = np.linspace(0.0, np.pi, u.size)
    h = np.pi / (u.size - 1)
    lo, hi = ambient.warp.clip_margin(1e-7)
    t = float(t_now)
    steps = 0
    dt_min = np.inf
    while t < t_target - 1e-15:
        udot, diff, code = _graph_rhs(ambient, speed, n, u, theta, h, lo, hi)
        if code != C.OK:
            return u, t, code, {"steps": steps, "dt_min": dt_min}
        dt = cfl * h * h / max(diff, 1e-30)
        dt = min(dt, t_target - t)
        for _ in range(40):
            mid = u + dt * udot
            udot2, _, code2 = _graph_rhs(ambient, speed, n, mid, theta, h,
                                         lo, hi)
            if code2 == C.OK:
                break
            dt *= 0.5
        else:
            return u, t, C.STEP_UNDERFLOW, {"steps": steps, "dt_min": dt_min}
        u = u + 0.5 * dt * (udot + udot2)
        t += dt
        dt_min = min(dt_min, dt)
        steps += 1
        if steps >= max_steps:
            return u, t, C.STEP_UNDERFLOW, {"steps": steps, "dt_min": dt_min}
    return u, t, C.OK, {"steps": steps, "dt_min": dt_min}
