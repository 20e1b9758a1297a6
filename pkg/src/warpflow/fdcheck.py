"""Finite-difference oracles for the analytic tensors.

These never feed production code paths; they exist so the analytic
Christoffel/Riemann formulas, Lie derivatives and divergences can be
validated against nothing but metric samples.  Stencils are 4th order.
"""

import numpy as np

from .ambient import AmbientPoint, christoffel_at, metric_at


def _shift(p, idx, delta):
    coords = p.coords()
    coords = coords.copy()
    coords[idx] += delta
    return AmbientPoint(coords[0], coords[1], coords[2:], p.chart)


def fd_partial(fn, p, idx, h):
    """4th-order central derivative of a tensor-valued point function."""
    f1 = fn(_shift(p, idx, h))
    f_1 = fn(_shift(p, idx, -h))
    f2 = fn(_shift(p, idx, 2 * h))
    f_2 = fn(_shift(p, idx, -2 * h))
    return (-f2 + 8.0 * f1 - 8.0 * f_1 + f_2) / (12.0 * h)


def christoffel_fd(ambient, p, h=1e-4):
    """Christoffels from finite differences of the metric only."""
    d = ambient.dim
    g = metric_at(ambient, p)
    g_inv = np.linalg.inv(g)
    dg = np.stack([fd_partial(lambda q: metric_at(ambient, q), p, c, h)
                   for c in range(d)])
    gamma = np.zeros((d, d, d))
    for a in range(d):
        for b in range(d):
            for c in range(d):
                s = 0.0
                for e in range(d):
                    s += g_inv[a, e] * (dg[b, e, c] + dg[c, e, b] -
                                        dg[e, b, c])
                gamma[a, b, c] = 0.5 * s
    return gamma


def riemann_fd(ambient, p, h=1e-4):
    """Riemann components from finite differences of analytic Christoffels.

    Rm[a,b,c,d] = g(R(e_a, e_b) e_c, e_d) with
    R^e_{abc} = d_a Gamma^e_{bc} - d_b Gamma^e_{ac} + Gamma-squares.
    """
    d = ambient.dim
    g = metric_at(ambient, p)
    gamma = christoffel_at(ambient, p)
    dgamma = np.stack([fd_partial(lambda q: christoffel_at(ambient, q), p, c, h)
                       for c in range(d)])
    r_up = np.zeros((d, d, d, d))     # R^e_{abc}
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    val = dgamma[a, e, b, c] - dgamma[b, e, a, c]
                    for f in range(d):
                        val += gamma[e, a, f] * gamma[f, b, c]
                        val -= gamma[e, b, f] * gamma[f, a, c]
                    r_up[e, a, b, c] = val
    return np.einsum("eabc,de->abcd", r_up, g)


def lie_derivative_fd(ambient, field_fn, p, h=1e-4):
    """(L_K g)_{ab} = K^c d_c g_ab + g_cb d_a K^c + g_ac d_b K^c."""
    d = ambient.dim
    g = metric_at(ambient, p)
    k = field_fn(p)
    dg = np.stack([fd_partial(lambda q: metric_at(ambient, q), p, c, h)
                   for c in range(d)])
    dk = np.stack([fd_partial(field_fn, p, c, h) for c in range(d)])
    lie = np.einsum("c,cab->ab", k, dg)
    lie += np.einsum("cb,ac->ab", g, dk)
    lie += np.einsum("ac,bc->ab", g, dk)
    return lie


def divergence_fd(ambient, field_fn, p, h=1e-4):
    """div K = (1/sqrt(det g)) d_a (sqrt(det g) K^a)."""
    def weighted(q):
        return np.sqrt(np.linalg.det(metric_at(ambient, q))) * field_fn(q)

    d = ambient.dim
    total = 0.0
    for a in range(d):
        total += fd_partial(weighted, p, a, h)[a]
    return total / np.sqrt(np.linalg.det(metric_at(ambient, p)))


def commutator_fd(ambient, field_a, field_b, p, h=1e-4):
    """[A, B]^c = A^a d_a B^c - B^a d_a A^c by finite differences."""
    a_val = field_a(p)
    b_val = field_b(p)
    da = np.stack([fd_partial(field_a, p, c, h) for c in range(ambient.dim)])
    db = np.stack([fd_partial(field_b, p, c, h) for c in range(ambient.dim)])
    return np.einsum("a,ac->c", a_val, db) - np.einsum("a,ac->c", b_val, da)
