"""Sphere charts and rotation Killing fields.

Every ambient space here is handled in a polar-style chart
(rho, theta, z) where theta is the polar angle on the fiber sphere and z
are stereographic coordinates on the core sphere S^(d).  The atlas on the
core consists of the two standard stereographic charts; sampled
computations stay away from chart boundaries and from the polar angles
theta in {0, pi}.
"""

import numpy as np


def stereo_embed(z, chart=0):
    """Chart point z in R^d -> unit vector in R^(d+1)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    s2 = np.dot(z, z)
    head = 2.0 * z / (1.0 + s2)
    last = (s2 - 1.0) / (1.0 + s2)
    if chart == 1:
        last = -last
    return np.concatenate([head, [last]])


def stereo_jacobian(z, chart=0):
    """Derivative of stereo_embed: (d+1) x d matrix."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = z.size
    s2 = np.dot(z, z)
    den = 1.0 + s2
    jac = np.zeros((d + 1, d))
    for b in range(d):
        jac[:d, b] = -4.0 * z * z[b] / den ** 2
        jac[b, b] += 2.0 / den
        jac[d, b] = 4.0 * z[b] / den ** 2
    if chart == 1:
        jac[d, :] = -jac[d, :]
    return jac


def stereo_metric(z):
    """Round metric of the unit sphere in stereographic coordinates."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    factor = (2.0 / (1.0 + np.dot(z, z))) ** 2
    return factor * np.eye(z.size)


def stereo_christoffel(z):
    """Christoffels of the conformal metric (2/(1+|z|^2))^2 * delta."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = z.size
    sig = -2.0 * z / (1.0 + np.dot(z, z))     # gradient of log conformal factor
    gamma = np.zeros((d, d, d))
    for a in range(d):
        for b in range(d):
            gamma[a, a, b] += sig[b]
            gamma[a, b, a] += sig[b]
            gamma[a, b, b] -= sig[a]
    return gamma


def rotation_generator(dim, i, j):
    """Antisymmetric matrix A with K(x) = A x rotating axis i toward j."""
    if i == j:
        raise ValueError("rotation axes must differ")
    gen = np.zeros((dim, dim))
    gen[i, j] = 1.0
    gen[j, i] = -1.0
    return gen


def fiber_embed(theta, z, chart=0):
    """Point of S^n in polar form: x = (sin(theta) yhat(z), cos(theta))."""
    yhat = stereo_embed(z, chart)
    return np.concatenate([np.sin(theta) * yhat, [np.cos(theta)]])


def killing_theta_component(gen, z, chart=0):
    """theta-component of the lift of the S^n rotation generated by ``gen``.

    For x = (sin(theta) yhat, cos(theta)) one has
    dtheta(A x) = -(A x)_last / sin(theta) = sum_j A[j, last] yhat_j,
    which is independent of theta: the restriction of a first spherical
    harmonic to the core sphere.
    """
    n = gen.shape[0] - 1
    yhat = stereo_embed(z, chart)
    return float(np.dot(gen[:n, n], yhat))


def fiber_killing_components(gen, theta, z, chart=0):
    """Chart components (k_theta, k_z) of the rotation field A x on S^n."""
    n = gen.shape[0] - 1
    yhat = stereo_embed(z, chart)
    x = fiber_embed(theta, z, chart)
    k = gen @ x
    sin_t = np.sin(theta)
    if abs(sin_t) < 1e-12:
        raise ValueError("polar chart is singular at theta in {0, pi}")
    k_theta = -k[n] / sin_t
    k_core = k[:n] / sin_t - yhat * (np.cos(theta) / sin_t) * k_theta
    jac = stereo_jacobian(z, chart)
    k_z, *_ = np.linalg.lstsq(jac, k_core, rcond=None)
    return k_theta, k_z


def core_killing_components(gen, z, chart=0):
    """Chart components of a rotation field B yhat on the core sphere."""
    yhat = stereo_embed(z, chart)
    jac = stereo_jacobian(z, chart)
    k_z, *_ = np.linalg.lstsq(jac, gen @ yhat, rcond=None)
    return k_z
