"""Shared plumbing for the twin kernel backends.

The numba backend only understands preset warps (polynomial rho, sinh,
sin, the tabulated AdS profile) and the named speed functions; custom
expressions always run on the numpy path.  Packing returns None when a
spec cannot be lowered to plain arrays.
"""

import os

import numpy as np

# warp codes
WARP_RHO, WARP_SINH, WARP_SIN, WARP_ADS = 0, 1, 2, 3

# speed codes
SPEED_H, SPEED_INV_H, SPEED_POW_H = 0, 1, 2
SPEED_GAUSS, SPEED_SIGMA, SPEED_RATIO = 3, 4, 5

# shot / advance status codes
OK = 0
INADMISSIBLE_POLE = 1
INADMISSIBLE = 2
NO_ROOT = 3
BLOWUP = 4
DOMAIN_EXIT = 5
STEP_UNDERFLOW = 6

STATUS_NAMES = {
    OK: "completed",
    INADMISSIBLE_POLE: "inadmissible_at_pole",
    INADMISSIBLE: "inadmissible",
    NO_ROOT: "no_root",
    BLOWUP: "blowup",
    DOMAIN_EXIT: "domain_exit",
    STEP_UNDERFLOW: "step_underflow",
}

_EMPTY = np.empty(0)


def pack_warp(warp):
    """Lower a WarpFunction to (code, m, nfib, grids) or None."""
    code = warp.kernel_code
    if code in (WARP_RHO, WARP_SINH, WARP_SIN):
        return (code, 0.0, 0, _EMPTY, _EMPTY, _EMPTY)
    if code == WARP_ADS:
        data = warp.kernel_data
        return (code, data["m"], data["n"], data["grid_rho"],
                data["grid_s"], data["grid_slope"])
    return None


def pack_speed(speed):
    """Lower a SpeedFunction to (code, k, j, alpha) or None."""
    if speed.kernel_code < 0:
        return None
    k, j, alpha = speed.kernel_params
    return (speed.kernel_code, int(k), int(j), float(alpha))


def positive_cone_speed(code):
    return code in (SPEED_GAUSS, SPEED_SIGMA, SPEED_RATIO)


def requested_backend():
    return os.environ.get("WARPFLOW_BACKEND", "auto").strip().lower()


def select_backend(ambient, speed):
    """Resolve the backend for a given ambient/speed combination."""
    choice = requested_backend()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"WARPFLOW_BACKEND must be auto|numba|numpy, "
                         f"got {choice!r}")
    if choice == "numpy":
        return "numpy"
    packable = (pack_warp(ambient.warp) is not None and
                pack_speed(speed) is not None)
    if not packable:
        if choice == "numba":
            return "numpy"          # silent fallback; recorded by callers
        return "numpy"
    try:
        from . import nb_backend  # noqa: F401  (deferred jit import)
    except Exception:
        return "numpy"
    return "numba"
