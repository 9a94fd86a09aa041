"""Pure numpy scalar-curvature kernels (fallback for the compiled core).

All kernels take equally shaped float arrays of jet values and return the
pointwise scalar curvature.  No validation happens here; callers check
positivity of the warps before dispatching.
"""

import numpy as np


def single_warped(f, f1, f2, n):
    """``dt^2 + f^2 ds_{n-1}^2``."""
    f = np.asarray(f, dtype=float)
    return (n - 1) * ((n - 2) * (1.0 - f1 * f1) / (f * f) - 2.0 * f2 / f)


def doubly_warped(u, u1, u2, v, v1, v2, p, q):
    """``dt^2 + u^2 ds_p^2 + v^2 ds_q^2``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = -2.0 * p * u2 / u - 2.0 * q * v2 / v - 2.0 * p * q * u1 * v1 / (u * v)
    if p > 1:
        out = out + p * (p - 1) * (1.0 - u1 * u1) / (u * u)
    if q > 1:
        out = out + q * (q - 1) * (1.0 - v1 * v1) / (v * v)
    return out


def eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, n):
    """``dr^2 + a^2 dt^2 + F^2 ds_n^2`` with ``F = F(r, t)``."""
    a = np.asarray(a, dtype=float)
    F = np.asarray(F, dtype=float)
    a2 = a * a
    t1 = n * (n - 1) / (F * F) * (1.0 - Fr * Fr - Ft * Ft / a2)
    t2 = -2.0 * n / F * (Frr + Fr * ar / a)
    t3 = 2.0 * n / (a2 * F) * (-Ftt + Ft * at / a)
    return t1 + t2 + t3 - 2.0 * arr / a


def eq22(a, ar, arr, f, fr, frr, n):
    """``dr^2 + a^2 dt^2 + f(r)^2 ds_n^2``."""
    a = np.asarray(a, dtype=float)
    f = np.asarray(f, dtype=float)
    return (n * (n - 1) / (f * f) * (1.0 - fr * fr)
            - 2.0 * n / f * (frr + fr * ar / a) - 2.0 * arr / a)
