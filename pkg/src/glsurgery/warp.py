"""Warping, cutoff and blend functions with exact two-jet access.

Every metric in the toolkit is assembled from one-variable functions
``f`` for which the value and the first two derivatives are available in
closed form (or, for the concave bridges, by high-order quadrature of a
closed-form second derivative).  A :class:`WarpFn` bundles that jet with
its domain and a kind tag.

The torpedo function, the blend ``h`` (identity near 0, sine beyond) and the cosine cap are all
built from the same device, :class:`ConcaveBridge`: between two analytic
pieces the second derivative is prescribed as a smooth, nonnegative blend of
the two neighbouring curvatures plus nonnegative smooth bumps, with two
linear constraints fixing the value and slope at the right end.  The result
is C-infinity across both junctions and concave wherever the pieces are.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError, ParameterError

__all__ = [
    "WarpFn",
    "TorpedoParams",
    "JetReport",
    "ConcaveBridge",
    "smoothstep",
    "sine_fn",
    "cosine_fn",
    "constant_fn",
    "torpedo_fn",
    "double_torpedo_fn",
    "cutoff_fn",
    "bump_fn",
    "h_blend_fn",
    "cap_fn",
    "reflect",
    "lerp",
    "from_callable",
    "jet_check",
    "fd_derivatives",
    "junction_mismatch",
]

GUARD = 1e-6
RADIUS_KINDS = frozenset({"sine", "torpedo", "double-torpedo", "cosine-cap"})

Jet = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class WarpFn:
    """Smooth scalar function on an interval with value/first/second derivative.

    Parameters
    ----------
    jet : callable
        ``t -> (f, f', f'')``, vectorised over numpy arrays.
    domain : (float, float)
        Closed interval ``[a, b]`` on which the function is meaningful.
    kind : str
        Construction tag (``sine``, ``torpedo``, ``cutoff``, ...).
    params : dict
        Construction parameters, kept for reports and path comparisons.
    junctions : tuple
        ``(t_j, left_jet, right_jet)`` triples for piecewise definitions.
    """

    jet_fn: Callable[[np.ndarray], Jet] = field(repr=False)
    domain: tuple[float, float]
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    junctions: tuple = field(default=(), repr=False)

    def jet(self, t) -> Jet:
        t = np.asarray(t, dtype=float)
        f, d1, d2 = self.jet_fn(t)
        return (np.broadcast_to(f, t.shape).astype(float),
                np.broadcast_to(d1, t.shape).astype(float),
                np.broadcast_to(d2, t.shape).astype(float))

    def __call__(self, t):
        return self.jet(t)[0]

    def d1(self, t):
        return self.jet(t)[1]

    def d2(self, t):
        return self.jet(t)[2]

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def interior(self, n: int, margin: float = GUARD) -> np.ndarray:
        a, b = self.domain
        return np.linspace(a + margin, b - margin, n)

    def sample(self, n: int = 200, margin: float = GUARD) -> np.ndarray:
        """Return an ``(n, 4)`` array of ``t, f, f', f''`` rows."""
        t = self.interior(n, margin)
        return np.column_stack((t, *self.jet(t)))

    def restrict(self, a: float, b: float) -> "WarpFn":
        lo, hi = self.domain
        if a < lo - 1e-12 or b > hi + 1e-12 or a >= b:
            raise DomainError(f"[{a}, {b}] is not a subinterval of {self.domain}")
        return WarpFn(self.jet_fn, (a, b), self.kind, dict(self.params), self.junctions)


@dataclass(frozen=True)
class TorpedoParams:
    """Torpedo tip radius ``delta``, domain length ``b`` and blend width ``w``.

    ``w`` is measured in units of ``delta``: the function equals
    ``delta*sin(t/delta)`` on ``(0, delta*(pi/2 - w)]``.
    """

    delta: float
    b: float
    w: float = 0.7

    def validate(self, double: bool = False) -> None:
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if not (0.0 < self.w < math.pi / 4):
            raise ParameterError(f"transition width w={self.w} outside (0, pi/4)")
        cap = self.delta * math.pi / 2
        if double:
            if not cap < self.b / 2:
                raise ParameterError(
                    f"double torpedo needs delta*pi/2 < b/2 (got {cap:.6g} >= {self.b / 2:.6g})")
        elif not self.b > cap:
            raise ParameterError(f"torpedo needs b > delta*pi/2 (got b={self.b}, delta*pi/2={cap:.6g})")


# ---------------------------------------------------------------------------
# smooth step and bump families


def _psi_jet(x):
    """exp(-1/x) for x > 0 (zero otherwise) with two derivatives."""
    x = np.asarray(x, dtype=float)
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    p = np.where(pos, np.exp(-1.0 / xs), 0.0)
    d1 = p / xs**2
    d2 = p * (1.0 - 2.0 * xs) / xs**4
    return p, np.where(pos, d1, 0.0), np.where(pos, d2, 0.0)


def smoothstep(u) -> Jet:
    """C-infinity step from 0 (u <= 0) to 1 (u >= 1), symmetric about 1/2.

    ``s(u) = psi(u) / (psi(u) + psi(1 - u))`` with ``psi(x) = exp(-1/x)``.
    """
    u = np.asarray(u, dtype=float)
    p, p1, p2 = _psi_jet(u)
    q, q1, q2 = _psi_jet(1.0 - u)
    q1 = -q1
    d = p + q
    d1 = p1 + q1
    d2 = p2 + q2
    s = p / d
    s1 = (p1 * d - p * d1) / d**2
    s2 = (p2 * d - p * d2) / d**2 - 2.0 * d1 * (p1 * d - p * d1) / d**3
    return s, s1, s2


def _step_value(u):
    u = np.asarray(u, dtype=float)
    p = _psi_jet(u)[0]
    q = _psi_jet(1.0 - u)[0]
    return p / (p + q)


# ---------------------------------------------------------------------------
# concave bridge


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_PANELS = 48
_SUB_WINDOWS = ((0.0, 0.5), (0.0, 0.3), (0.5, 1.0), (0.7, 1.0))


class ConcaveBridge:
    """C-infinity interpolant between two analytic pieces on ``[a, e]``.

    The second derivative is ``-k`` with

        k = (1 - s) k_left + s k_right + sum_j c_j B_j,   c_j >= 0,

    where ``s`` is a smooth step over a right- or left-justified fraction of
    the window and ``B_j`` are Bernstein polynomials damped by ``4 s (1 - s)``, together
    with a few flat-ended bumps on sub-windows.  The
    coefficients are the nonnegative solution of the two linear conditions
    that reproduce the right piece's value and slope at ``e``.  Among the
    feasible (degree, frac) candidates the smoothest one is kept.
    """

    def __init__(self, a, e, left: Callable, right: Callable, k_left: Callable, k_right: Callable):
        self.a, self.e = float(a), float(e)
        self.L = self.e - self.a
        fl, dl, _ = left(np.array([self.a]))
        fr, dr, _ = right(np.array([self.e]))
        self.lval, self.lder = float(fl[0]), float(dl[0])
        self.rval, self.rder = float(fr[0]), float(dr[0])
        self.k_left, self.k_right = k_left, k_right
        self._edges = np.linspace(self.a, self.e, _PANELS + 1)

        best = None
        for frac in (1.0, 0.7, 0.5, 0.3, -0.7, -0.5, -0.3):
            for degree in (3, 4, 5, 6, 8):
                cand = self._solve(frac, degree)
                if cand is None:
                    continue
                if best is None or cand[0] < best[0]:
                    best = cand
        if best is None:
            raise ParameterError(
                f"no nonnegative concave bridge on [{self.a:.6g}, {self.e:.6g}]")
        _, self.frac, self.degree, self.coef = best
        self._cum0, self._cum1 = self._cumulative(self.k)

    # k and its building blocks -------------------------------------------------
    def _base(self, tau, frac):
        # frac > 0: step over the right-hand part of the window, frac < 0: the left-hand part
        width = abs(frac) * self.L
        start = self.e - width if frac > 0 else self.a
        s = _step_value((tau - start) / width)
        return (1.0 - s) * self.k_left(tau) + s * self.k_right(tau)

    def _basis(self, tau, degree):
        u = np.clip((tau - self.a) / self.L, 0.0, 1.0)
        s = _step_value(u)
        damp = 4.0 * s * (1.0 - s)
        out = [damp * math.comb(degree, j) * u**j * (1.0 - u) ** (degree - j)
               for j in range(degree + 1)]
        # narrower bumps let the added curvature sit close to either end
        for lo, hi in _SUB_WINDOWS:
            v = np.clip((u - lo) / (hi - lo), 0.0, 1.0)
            sv = _step_value(v)
            out.append(4.0 * sv * (1.0 - sv))
        return out

    def k(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = self._base(tau, self.frac)
        for c, b in zip(self.coef, self._basis(tau, self.degree)):
            if c:
                out = out + c * b
        return out

    # quadrature ---------------------------------------------------------------
    def _panel_integrals(self, fn):
        lo, hi = self._edges[:-1], self._edges[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = fn(nodes)
        return (half[:, None] * vals * _GL_WEIGHTS).sum(axis=1), (
            half[:, None] * vals * nodes * _GL_WEIGHTS).sum(axis=1)

    def _cumulative(self, fn):
        i0, i1 = self._panel_integrals(fn)
        return np.concatenate(([0.0], np.cumsum(i0))), np.concatenate(([0.0], np.cumsum(i1)))

    def _solve(self, frac, degree):
        mass = self.lder - self.rder
        moment = self.lval + self.L * self.lder - self.rval
        e = self.e

        def cols(fn):
            i0, i1 = self._panel_integrals(fn)
            m0 = i0.sum()
            return np.array([m0, e * m0 - i1.sum()])

        base = cols(lambda x: self._base(x, frac))
        nb = degree + 1 + len(_SUB_WINDOWS)
        mat = np.column_stack([cols(lambda x, j=j: self._basis(x, degree)[j])
                               for j in range(nb)])
        rhs = np.array([mass, moment]) - base
        scale = max(np.abs(rhs).max(), 1e-300)
        coef, _ = nnls(mat / scale, rhs / scale)
        if np.abs(mat @ coef - rhs).max() > 1e-13 * max(1.0, abs(mass), abs(moment)):
            return None
        tau = np.linspace(self.a, self.e, 1201)
        kk = self._base(tau, frac) + sum(c * b for c, b in zip(coef, self._basis(tau, degree)))
        h = tau[1] - tau[0]
        rough = np.abs(np.diff(kk, 2)).max() / h**2
        return rough, frac, degree, coef

    def jet(self, t) -> Jet:
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.a, self.e)
        width = self.L / _PANELS
        idx = np.clip(((tc - self.a) // width).astype(int), 0, _PANELS - 1)
        lo = self._edges[idx]
        mid, half = 0.5 * (lo + tc), 0.5 * (tc - lo)
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        kv = self.k(nodes)
        i0 = self._cum0[idx] + half * (kv * _GL_WEIGHTS).sum(axis=-1)
        i1 = self._cum1[idx] + half * (kv * nodes * _GL_WEIGHTS).sum(axis=-1)
        d1 = self.lder - i0
        f = self.lval + (tc - self.a) * self.lder - (tc * i0 - i1)
        return f, d1, -self.k(tc)


def _piecewise(t, pieces, breaks) -> Jet:
    """Evaluate jets piece by piece; ``pieces[i]`` covers ``[breaks[i-1], breaks[i])``."""
    t = np.asarray(t, dtype=float)
    f = np.empty(t.shape)
    d1 = np.empty(t.shape)
    d2 = np.empty(t.shape)
    edges = [-np.inf, *breaks, np.inf]
    for i, piece in enumerate(pieces):
        mask = (t >= edges[i]) & (t < edges[i + 1]) if i < len(pieces) - 1 else (t >= edges[i])
        if np.any(mask):
            a, b, c = piece(t[mask])
            f[mask], d1[mask], d2[mask] = a, b, c
    return f, d1, d2


def _sin_jet(t):
    return np.sin(t), np.cos(t), -np.sin(t)


def _cos_jet(t):
    return np.cos(t), -np.sin(t), -np.cos(t)


def _one_jet(t):
    return np.ones_like(t), np.zeros_like(t), np.zeros_like(t)


def _identity_jet(t):
    return t.copy(), np.ones_like(t), np.zeros_like(t)


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@functools.lru_cache(maxsize=64)
def _unit_torpedo(w: float):
    a = math.pi / 2 - w
    bridge = ConcaveBridge(a, math.pi / 2, _sin_jet, _one_jet, np.sin, _zero)
    breaks = (a, math.pi / 2)
    pieces = (_sin_jet, bridge.jet, _one_jet)
    return bridge, breaks, pieces


@functools.lru_cache(maxsize=64)
def _unit_h_blend(w: float):
    bridge = ConcaveBridge(w / 2, 2 * w, _identity_jet, _sin_jet, _zero, np.sin)
    return bridge, (w / 2, 2 * w), (_identity_jet, bridge.jet, _sin_jet)


@functools.lru_cache(maxsize=64)
def _unit_cap(w: float):
    bridge = ConcaveBridge(w / 2, 2 * w, _one_jet, _cos_jet, _zero, np.cos)
    return bridge, (w / 2, 2 * w), (_one_jet, bridge.jet, _cos_jet)


def _junctions(breaks, pieces, scale=1.0, shift=0.0, sign=1.0):
    out = []
    for i, tb in enumerate(breaks):
        out.append((shift + sign * tb * scale, pieces[i], pieces[i + 1]))
    return tuple(out)


# ---------------------------------------------------------------------------
# library constructors


def sine_fn(domain=(0.0, math.pi), radius: float = 1.0) -> WarpFn:
    """``radius * sin(t / radius)``."""
    r = float(radius)

    def jet(t):
        x = t / r
        return r * np.sin(x), np.cos(x), -np.sin(x) / r

    return WarpFn(jet, tuple(domain), "sine", {"radius": r})


def cosine_fn(domain=(0.0, math.pi / 2)) -> WarpFn:
    return WarpFn(_cos_jet, tuple(domain), "cosine", {})


def constant_fn(value: float, domain=(0.0, 1.0)) -> WarpFn:
    c = float(value)

    def jet(t):
        return np.full(t.shape, c), np.zeros(t.shape), np.zeros(t.shape)

    return WarpFn(jet, tuple(domain), "constant", {"value": c})


def torpedo_fn(p: TorpedoParams) -> WarpFn:
    """Torpedo function ``f_delta(t) = delta * f_1(t / delta)`` on ``(0, b)``.

    ``f_1`` is ``sin`` on ``(0, pi/2 - w]``, a concave bridge on
    ``[pi/2 - w, pi/2]`` and identically one from ``pi/2`` on.
    """
    p.validate()
    _, breaks, pieces = _unit_torpedo(float(p.w))
    d = float(p.delta)

    def jet(t):
        f, d1, d2 = _piecewise(t / d, pieces, breaks)
        return d * f, d1, d2 / d

    def scaled(piece):
        def inner(t):
            f, d1, d2 = piece(np.asarray(t, dtype=float) / d)
            return d * f, d1, d2 / d
        return inner

    juncs = tuple((tb * d, scaled(pieces[i]), scaled(pieces[i + 1])) for i, tb in enumerate(breaks))
    return WarpFn(jet, (0.0, float(p.b)), "torpedo",
                  {"delta": d, "b": float(p.b), "w": float(p.w)}, juncs)


def double_torpedo_fn(p: TorpedoParams) -> WarpFn:
    """Torpedo reflected about ``b/2``: ``f(t)`` on ``(0, b/2]``, ``f(b - t)`` after."""
    p.validate(double=True)
    half = torpedo_fn(p)
    b = float(p.b)

    def jet(t):
        t = np.asarray(t, dtype=float)
        left = t <= b / 2
        tt = np.where(left, t, b - t)
        f, d1, d2 = half.jet(tt)
        return f, np.where(left, d1, -d1), d2

    juncs = []
    for tj, lj, rj in half.junctions:
        juncs.append((tj, lj, rj))

        def mirror(piece):
            def inner(t):
                f, d1, d2 = piece(b - np.asarray(t, dtype=float))
                return f, -d1, d2
            return inner

        juncs.append((b - tj, mirror(rj), mirror(lj)))
    return WarpFn(jet, (0.0, b), "double-torpedo",
                  {"delta": p.delta, "b": b, "w": p.w}, tuple(juncs))


def cutoff_fn(t0: float, t1: float) -> WarpFn:
    """Smooth monotone cutoff: 0 for ``t <= t0``, 1 for ``t >= t1``."""
    if not t0 < t1:
        raise DomainError(f"cutoff needs t0 < t1, got {t0}, {t1}")
    width = float(t1 - t0)

    def jet(t):
        s, s1, s2 = smoothstep((t - t0) / width)
        return s, s1 / width, s2 / width**2

    return WarpFn(jet, (float(t0) - width, float(t1) + width), "cutoff",
                  {"t0": float(t0), "t1": float(t1)})


def bump_fn(t0: float, t1: float, t2: float, t3: float) -> WarpFn:
    """Plateau function: rises on ``[t0, t1]``, equals 1 on ``[t1, t2]``, falls on ``[t2, t3]``."""
    if not (t0 < t1 <= t2 < t3):
        raise DomainError(f"bump needs t0 < t1 <= t2 < t3, got {(t0, t1, t2, t3)}")
    up = cutoff_fn(t0, t1)
    down = cutoff_fn(t2, t3)

    def jet(t):
        a, a1, a2 = up.jet_fn(t)
        b, b1, b2 = down.jet_fn(t)
        c, c1, c2 = 1.0 - b, -b1, -b2
        return a * c, a1 * c + a * c1, a2 * c + 2 * a1 * c1 + a * c2

    return WarpFn(jet, (t0 - (t1 - t0), t3 + (t3 - t2)), "cutoff",
                  {"t0": t0, "t1": t1, "t2": t2, "t3": t3})


def h_blend_fn(w: float) -> WarpFn:
    """Concave ``h`` with ``h(r) = r`` on ``[0, w/2]`` and ``h(r) = sin r`` on ``[2w, pi/2]``."""
    if not (0.0 < w < math.pi / 4):
        raise DomainError(f"h-blend width w={w} outside (0, pi/4)")
    _, breaks, pieces = _unit_h_blend(float(w))

    def jet(t):
        return _piecewise(t, pieces, breaks)

    return WarpFn(jet, (0.0, math.pi / 2), "h-blend", {"w": float(w)}, _junctions(breaks, pieces))


def cap_fn(w: float) -> WarpFn:
    """Concave cap: 1 on ``[0, w/2]``, ``cos r`` on ``[2w, pi/2]``, slope in ``[-1, 0]``."""
    if not (0.0 < w < math.pi / 4):
        raise DomainError(f"cap width w={w} outside (0, pi/4)")
    _, breaks, pieces = _unit_cap(float(w))

    def jet(t):
        return _piecewise(t, pieces, breaks)

    return WarpFn(jet, (0.0, math.pi / 2), "cosine-cap", {"w": float(w)}, _junctions(breaks, pieces))


def reflect(f: WarpFn, b: float) -> WarpFn:
    """``t -> f(b - t)`` on the mirrored domain."""
    b = float(b)

    def jet(t):
        v, d1, d2 = f.jet(b - np.asarray(t, dtype=float))
        return v, -d1, d2

    lo, hi = f.domain
    return WarpFn(jet, (b - hi, b - lo), f.kind, {**f.params, "reflected_at": b})


def lerp(f: WarpFn, g: WarpFn, s: float) -> WarpFn:
    """Straight-line homotopy ``(1 - s) f + s g`` of the jets."""
    s = float(s)
    if s == 0.0:
        return f
    if s == 1.0:
        return g
    lo = max(f.domain[0], g.domain[0])
    hi = min(f.domain[1], g.domain[1])

    def jet(t):
        a = f.jet(t)
        b = g.jet(t)
        return tuple((1 - s) * x + s * y for x, y in zip(a, b))

    return WarpFn(jet, (lo, hi), "interpolated", {"s": s, "from": f.kind, "to": g.kind})


def from_callable(func: Callable, domain, h: float = 1e-4) -> WarpFn:
    """Wrap a user function; derivatives come from central differences."""

    def jet(t):
        f0 = func(t)
        fp, fm = func(t + h), func(t - h)
        return f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2

    return WarpFn(jet, tuple(domain), "custom", {"fd_step": h})


# ---------------------------------------------------------------------------
# checks


@dataclass
class JetReport:
    max_err_d1: float
    max_err_d2: float
    worst_t_d1: float
    worst_t_d2: float
    h: float
    tol: float
    passed: bool


def fd_derivatives(fn: Callable, t: np.ndarray, h: float, order: int = 4):
    """Central-difference first and second derivatives of ``fn`` at ``t``.

    ``order=2`` is the three-point stencil, ``order=4`` the five-point one.
    """
    if order == 2:
        fp, f0, fm = fn(t + h), fn(t), fn(t - h)
        return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2
    if order == 4:
        f2p, fp, f0, fm, f2m = (fn(t + j * h) for j in (2, 1, 0, -1, -2))
        d1 = (-f2p + 8 * fp - 8 * fm + f2m) / (12 * h)
        d2 = (-f2p + 16 * fp - 30 * f0 + 16 * fm - f2m) / (12 * h**2)
        return d1, d2
    raise ValueError(f"unsupported stencil order {order}")


def jet_check(f: WarpFn, n_samples: int = 400, h: float = 1e-3, tol: float = 1e-5,
              margin: float = GUARD, order: int = 4) -> JetReport:
    """Compare the closed-form jets against central differences of ``f``.

    The default five-point stencil keeps truncation error far below
    ``tol`` for the unit-width cutoffs, whose fourth derivatives reach ~2e3.
    """
    if not h < f.length / 10:
        raise DomainError(f"step h={h} too large for domain of length {f.length}")
    t = f.interior(n_samples, margin + order // 2 * h)
    _, d1, d2 = f.jet(t)
    fd1, fd2 = fd_derivatives(f, t, h, order)
    e1 = np.abs(fd1 - d1)
    e2 = np.abs(fd2 - d2)
    i1, i2 = int(np.argmax(e1)), int(np.argmax(e2))
    ok = bool(e1[i1] <= tol and e2[i2] <= tol)
    return JetReport(float(e1[i1]), float(e2[i2]), float(t[i1]), float(t[i2]), h, tol, ok)


def junction_mismatch(f: WarpFn) -> float:
    """Largest disagreement between one-sided jets at the declared junctions."""
    worst = 0.0
    for tj, left, right in f.junctions:
        x = np.array([tj])
        a = left(x)
        b = right(x)
        worst = max(worst, *(float(abs(p[0] - q[0])) for p, q in zip(a, b)))
    return worst


def check_radius_positive(f: WarpFn, n: int = 2000) -> bool:
    return bool(np.all(f(f.interior(n)) > 0))


def interior_grid(domains: Sequence[tuple[float, float]], n: int, margin: float = GUARD):
    return [np.linspace(a + margin, b - margin, n) for a, b in domains]
