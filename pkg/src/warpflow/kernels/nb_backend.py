"""Numba-jitted kernels for the preset warp/speed combinations.

Per-shot scalar loops: each shot integrates independently and exits
early on blow-up, which is where the jitted path wins over the lockstep
numpy fallback.  Kernels are cached on disk after the first compile.
"""

import numpy as np
from numba import njit

from . import common as C

_F8 = np.float64


# -- warp evaluation ---------------------------------------------------------

@njit(cache=True)
def _hermite(grid_x, grid_y, grid_d, x):
    hg = grid_x[1] - grid_x[0]
    i = int(x / hg)
    if i < 0:
        i = 0
    if i > grid_x.size - 2:
        i = grid_x.size - 2
    t = (x - grid_x[i]) / hg
    t2 = t * t
    t3 = t2 * t
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * grid_y[i]
            + (t3 - 2.0 * t2 + t) * hg * grid_d[i]
            + (-2.0 * t3 + 3.0 * t2) * grid_y[i + 1]
            + (t3 - t2) * hg * grid_d[i + 1])


@njit(cache=True)
def _phi_pair(code, wm, wn, grid_rho, grid_s, grid_d, r):
    """(phi, phi') for the preset warp codes."""
    if code == 0:
        return r, 1.0
    if code == 1:
        return np.sinh(r), np.cosh(r)
    if code == 2:
        return np.sin(r), np.cos(r)
    s = _hermite(grid_rho, grid_s, grid_d, r)
    if wm == 0.0:
        om = 1.0 + s * s
    else:
        om = 1.0 - wm * s ** (1.0 - wn) + s * s
    if om < 0.0:
        om = 0.0
    return s, np.sqrt(om)


# -- speed evaluation in the (lam_m, lam_s x (n-1)) frame --------------------

@njit(cache=True)
def _binom(n, k):
    if k < 0 or k > n:
        return 0.0
    out = 1.0
    for i in range(k):
        out = out * (n - i) / (i + 1)
    return out


@njit(cache=True)
def _sigma_iso(lam_m, lam_s, n, k):
    """sigma_k at (lam_m, lam_s, ..., lam_s)."""
    if k == 0:
        return 1.0
    return (_binom(n - 1, k) * lam_s ** k
            + lam_m * _binom(n - 1, k - 1) * lam_s ** (k - 1))


@njit(cache=True)
def _f_eval(code, k, j, alpha, lam_m, lam_s, n):
    if code == 0:
        return lam_m + (n - 1) * lam_s
    if code == 1:
        return -1.0 / (lam_m + (n - 1) * lam_s)
    if code == 2:
        return (lam_m + (n - 1) * lam_s) ** alpha
    if code == 3:
        return lam_m * lam_s ** (n - 1)
    if code == 4:
        return _sigma_iso(lam_m, lam_s, n, k)
    num = _sigma_iso(lam_m, lam_s, n, k)
    den = _sigma_iso(lam_m, lam_s, n, j)
    return (num / den) ** (1.0 / (k - j))


@njit(cache=True)
def _f_dlam_m(code, k, j, alpha, lam_m, lam_s, n):
    if code == 0:
        return 1.0
    if code == 1:
        h = lam_m + (n - 1) * lam_s
        return 1.0 / (h * h)
    if code == 2:
        h = lam_m + (n - 1) * lam_s
        return alpha * h ** (alpha - 1.0)
    if code == 3:
        return lam_s ** (n - 1)
    if code == 4:
        return _binom(n - 1, k - 1) * lam_s ** (k - 1)
    num = _sigma_iso(lam_m, lam_s, n, k)
    den = _sigma_iso(lam_m, lam_s, n, j)
    p = 1.0 / (k - j)
    base = (num / den) ** p
    dnum = _binom(n - 1, k - 1) * lam_s ** (k - 1)
    dden = _binom(n - 1, j - 1) * lam_s ** (j - 1) if j >= 1 else 0.0
    return p * base * (dnum / num - dden / den)


# -- shooting ----------------------------------------------------------------

@njit(cache=True)
def _solve_q(code, k, j, alpha, positive, n, tau_prime, theta, u, p,
             wcode, wm, wn, g_rho, g_s, g_d, rho_lo, rho_hi, p_blowup):
    """u'' from the soliton relation by bisection; returns (q, status)."""
    if u <= rho_lo or u >= rho_hi:
        return 0.0, C.DOMAIN_EXIT
    if abs(p) >= p_blowup:
        return 0.0, C.BLOWUP
    phi, dphi = _phi_pair(wcode, wm, wn, g_rho, g_s, g_d, u)
    w = np.sqrt(p * p + phi * phi)
    cot = np.cos(theta) / np.sin(theta)
    lam_s = (phi * dphi - cot * p) / (phi * w)
    edge = 1e-9
    if positive and lam_s <= edge:
        return 0.0, C.INADMISSIBLE
    target = tau_prime * (-(phi * phi) / w)
    if positive:
        lam_edge = edge
    else:
        lam_edge = edge - (n - 1) * lam_s
    w3 = w ** 3
    base = phi * phi * dphi + 2.0 * p * p * dphi
    q_hi = (base - lam_edge * w3) / phi

    lam_m = (-phi * q_hi + base) / w3
    r_hi = _f_eval(code, k, j, alpha, lam_m, lam_s, n) - target
    if not (r_hi < 0.0):
        return 0.0, C.NO_ROOT
    delta = abs(q_hi)
    if delta < 1.0:
        delta = 1.0
    q_lo = q_hi - delta
    found = False
    for _ in range(70):
        lam_m = (-phi * q_lo + base) / w3
        r_lo = _f_eval(code, k, j, alpha, lam_m, lam_s, n) - target
        if r_lo > 0.0:
            found = True
            break
        delta *= 2.0
        q_lo -= delta
    if not found:
        return 0.0, C.NO_ROOT
    lo_b, hi_b = q_lo, q_hi
    for _ in range(200):
        width = hi_b - lo_b
        tol = abs(lo_b)
        if abs(hi_b) > tol:
            tol = abs(hi_b)
        if tol < 1.0:
            tol = 1.0
        if width <= 1e-12 * tol:
            break
        mid = 0.5 * (lo_b + hi_b)
        lam_m = (-phi * mid + base) / w3
        r_mid = _f_eval(code, k, j, alpha, lam_m, lam_s, n) - target
        if r_mid > 0.0:
            lo_b = mid
        else:
            hi_b = mid
    return 0.5 * (lo_b + hi_b), C.OK


@njit(cache=True)
def sweep_kernel(code, k, j, alpha, positive, n, tau_prime,
                 a_values, b_values, alive0, n_steps,
                 wcode, wm, wn, g_rho, g_s, g_d, rho_lo, rho_hi, p_blowup):
    s = a_values.size
    h = np.pi / n_steps
    profiles = np.full((s, n_steps + 1), np.nan)
    status = np.zeros(s, dtype=np.int64)
    theta_death = np.full(s, np.nan)
    p_end = np.full(s, np.nan)
    for m in range(s):
        a = a_values[m]
        profiles[m, 0] = a
        if not alive0[m]:
            status[m] = C.INADMISSIBLE_POLE
            theta_death[m] = 0.0
            continue
        u = a + 0.5 * b_values[m] * h * h
        p = b_values[m] * h
        profiles[m, 1] = u
        dead = False
        for step in range(1, n_steps):
            th = step * h
            q1, st = _solve_q(code, k, j, alpha, positive, n, tau_prime,
                              th, u, p, wcode, wm, wn, g_rho, g_s, g_d,
                              rho_lo, rho_hi, p_blowup)
            if st != C.OK:
                status[m] = st
                theta_death[m] = th
                dead = True
                break
            q2, st = _solve_q(code, k, j, alpha, positive, n, tau_prime,
                              th + 0.5 * h, u + 0.5 * h * p,
                              p + 0.5 * h * q1, wcode, wm, wn, g_rho, g_s,
                              g_d, rho_lo, rho_hi, p_blowup)
            if st != C.OK:
                status[m] = st
                theta_death[m] = th
                dead = True
                break
            q3, st = _solve_q(code, k, j, alpha, positive, n, tau_prime,
                              th + 0.5 * h, u + 0.5 * h * (p + 0.5 * h * q1),
                              p + 0.5 * h * q2, wcode, wm, wn, g_rho, g_s,
                              g_d, rho_lo, rho_hi, p_blowup)
            if st != C.OK:
                status[m] = st
                theta_death[m] = th
                dead = True
                break
            q4, st = _solve_q(code, k, j, alpha, positive, n, tau_prime,
                              th + h, u + h * (p + 0.5 * h * q2),
                              p + h * q3, wcode, wm, wn, g_rho, g_s, g_d,
                              rho_lo, rho_hi, p_blowup)
            if st != C.OK:
                status[m] = st
                theta_death[m] = th
                dead = True
                break
            du1 = p
            du2 = p + 0.5 * h * q1
            du3 = p + 0.5 * h * q2
            du4 = p + h * q3
            u = u + (h / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4)
            p = p + (h / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
            profiles[m, step + 1] = u
        if not dead:
            q_end, st = _solve_q(code, k, j, alpha, positive, n, tau_prime,
                                 np.pi - h, u, p, wcode, wm, wn, g_rho, g_s,
                                 g_d, rho_lo, rho_hi, p_blowup)
            if st == C.OK:
                profiles[m, n_steps] = u + p * h + 0.5 * q_end * h * h
            theta_death[m] = np.pi - h
            p_end[m] = p
    return profiles, p_end, status, theta_death


# -- graph advance -----------------------------------------------------------

@njit(cache=True)
def _pad_even(u):
    n = u.size
    ext = np.empty(n + 4)
    ext[2:n + 2] = u
    ext[1] = u[1]
    ext[0] = u[2]
    ext[n + 2] = u[n - 2]
    ext[n + 3] = u[n - 3]
    return ext


@njit(cache=True)
def _pad_odd(u):
    n = u.size
    ext = np.empty(n + 4)
    ext[2:n + 2] = u
    ext[1] = 2.0 * u[0] - u[1]
    ext[0] = 2.0 * u[0] - u[2]
    ext[n + 2] = 2.0 * u[n - 1] - u[n - 2]
    ext[n + 3] = 2.0 * u[n - 1] - u[n - 3]
    return ext


@njit(cache=True)
def _fd1(ext, h, out):
    n = out.size
    for i in range(n):
        out[i] = (-ext[i + 4] + 8.0 * ext[i + 3] - 8.0 * ext[i + 1] +
                  ext[i]) / (12.0 * h)


@njit(cache=True)
def _fd2(ext, h, out):
    n = out.size
    for i in range(n):
        out[i] = (-ext[i + 4] + 16.0 * ext[i + 3] - 30.0 * ext[i + 2] +
                  16.0 * ext[i + 1] - ext[i]) / (12.0 * h * h)


@njit(cache=True)
def _graph_rhs(code, k, j, alpha, positive, n, u, theta, h,
               wcode, wm, wn, g_rho, g_s, g_d, rho_lo, rho_hi,
               udot, scratch):
    nn = u.size
    for i in range(nn):
        if u[i] <= rho_lo or u[i] >= rho_hi:
            return -1.0, C.DOMAIN_EXIT
    ext = _pad_even(u)
    u1 = scratch[0]
    u2 = scratch[1]
    _fd1(ext, h, u1)
    _fd2(ext, h, u2)
    ext1 = _pad_odd(u1)
    du1 = scratch[2]
    _fd1(ext1, h, du1)
    diff_max = 0.0
    for i in range(nn):
        phi, dphi = _phi_pair(wcode, wm, wn, g_rho, g_s, g_d, u[i])
        w = np.sqrt(u1[i] * u1[i] + phi * phi)
        if i == 0:
            ratio = du1[0]
        elif i == nn - 1:
            ratio = -du1[nn - 1]
        else:
            ratio = u1[i] / np.sin(theta[i])
        lam_m = (-phi * u2[i] + phi * phi * dphi +
                 2.0 * u1[i] * u1[i] * dphi) / w ** 3
        lam_s = (phi * dphi - ratio * np.cos(theta[i])) / (phi * w)
        if positive:
            if lam_m <= 0.0 or lam_s <= 0.0:
                return -1.0, C.INADMISSIBLE
        else:
            if lam_m + (n - 1) * lam_s <= 0.0:
                return -1.0, C.INADMISSIBLE
        f_val = _f_eval(code, k, j, alpha, lam_m, lam_s, n)
        udot[i] = -f_val * w / phi
        d = _f_dlam_m(code, k, j, alpha, lam_m, lam_s, n) / (w * w)
        if d > diff_max:
            diff_max = d
    return diff_max, C.OK


@njit(cache=True)
def advance_kernel(code, k, j, alpha, positive, n, u, t_now, t_target, cfl,
                   max_steps, wcode, wm, wn, g_rho, g_s, g_d,
                   rho_lo, rho_hi):
    nn = u.size
    theta = np.linspace(0.0, np.pi, nn)
    h = np.pi / (nn - 1)
    t = t_now
    steps = 0
    dt_min = 1e300
    udot = np.empty(nn)
    udot2 = np.empty(nn)
    mid = np.empty(nn)
    scratch = np.empty((3, nn))
    while t < t_target - 1e-15:
        diff, st = _graph_rhs(code, k, j, alpha, positive, n, u, theta, h,
                              wcode, wm, wn, g_rho, g_s, g_d, rho_lo,
                              rho_hi, udot, scratch)
        if st != C.OK:
            return u, t, st, steps, dt_min
        dt = cfl * h * h / max(diff, 1e-30)
        if dt > t_target - t:
            dt = t_target - t
        ok = False
        for _ in range(40):
            for i in range(nn):
                mid[i] = u[i] + dt * udot[i]
            _, st2 = _graph_rhs(code, k, j, alpha, positive, n, mid, theta,
                                h, wcode, wm, wn, g_rho, g_s, g_d, rho_lo,
                                rho_hi, udot2, scratch)
            if st2 == C.OK:
                ok = True
                break
            dt *= 0.5
        if not ok:
            return u, t, C.STEP_UNDERFLOW, steps, dt_min
        for i in range(nn):
            u[i] = u[i] + 0.5 * dt * (udot[i] + udot2[i])
        t += dt
        if dt < dt_min:
            dt_min = dt
        steps += 1
        if steps >= max_steps:
            return u, t, C.STEP_UNDERFLOW, steps, dt_min
    return u, t, C.OK, steps, dt_min
