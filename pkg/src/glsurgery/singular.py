"""Critical points of functions and one-parameter families.

Classification follows the local normal forms

* Morse:        ``-x_1^2 - ... - x_l^2 + x_{l+1}^2 + ...``          index ``l``
* birth-death:  ``z^3 - x_1^2 - ... - x_s^2 + ...``                 index ``s + 1/2``
* fold:         a parameter family whose fibre Hessian is nondegenerate
* cusp:         ``z^3 + 3 y z - ... `` with transverse unfolding

using the fibre Hessian spectrum, the cubic coefficient along a
one-dimensional kernel and, for families, the parameter derivative of the
fibre gradient along that kernel.  Also provided: the standard unfolding
``q_y``, Newton-based critical point search, pseudo-arclength tracing of the
singular set, the compatibility and gradient-like conditions for Morse
triples, and trajectory integration.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (ClassificationError, DomainError, FlowError, NonTransverseError,
                     NotCriticalError, ParameterError, UnclassifiableError)

__all__ = [
    "GermFamily",
    "PolynomialFamily",
    "CallableFamily",
    "SingularPoint",
    "MorseTripleModel",
    "TracedCurve",
    "Trajectory",
    "TOL_ND",
    "TOL_GRAD",
    "classify_critical",
    "classify_family_point",
    "find_critical_points",
    "singular_set_trace",
    "unfolding_family",
    "admissible_check",
    "compatible_metric_check",
    "gradient_like_check",
    "trajectory_flow",
]

TOL_ND = 1e-7
TOL_GRAD = 1e-9
CRIT_RADIUS = 1e-2


# ---------------------------------------------------------------------------
# function families


class GermFamily:
    """``F(y; x)`` with ``k`` parameters ``y`` and fibre coordinates ``x`` in R^m."""

    k: int = 0
    m: int = 1
    provenance: str = "user"

    def value(self, y, x) -> float:
        raise NotImplementedError

    def grad_x(self, y, x) -> np.ndarray:
        raise NotImplementedError

    def hess_x(self, y, x) -> np.ndarray:
        raise NotImplementedError

    def third_x(self, y, x) -> np.ndarray:
        raise NotImplementedError

    def mixed_yx(self, y, x) -> np.ndarray:
        """``d_{y_a} d_{x_i} F`` as a ``(k, m)`` array."""
        raise NotImplementedError

    def fiber(self, y) -> "GermFamily":
        """Freeze the parameters at ``y``."""
        return _Frozen(self, np.asarray(y, dtype=float))

    def rotated(self, Q: np.ndarray) -> "GermFamily":
        """``(y, x) -> F(y, Q x)`` with derivatives transformed exactly."""
        return _Rotated(self, np.asarray(Q, dtype=float))

    # convenience for k = 0 functions
    def __call__(self, x):
        return self.value(np.zeros(self.k), x)


class PolynomialFamily(GermFamily):
    """Sum of monomials ``c * prod(y^a) * prod(x^b)`` with exact partials.

    Parameters
    ----------
    terms : sequence of (coeff, exponents)
        ``exponents`` has length ``k + m``: parameter powers then fibre powers.
    """

    def __init__(self, terms, k: int, m: int, provenance: str = "user"):
        self.k, self.m, self.provenance = int(k), int(m), provenance
        coeffs, exps = [], []
        for c, e in terms:
            e = tuple(int(v) for v in e)
            if len(e) != self.k + self.m or min(e, default=0) < 0:
                raise ParameterError(f"monomial exponents {e} do not match k={k}, m={m}")
            coeffs.append(float(c))
            exps.append(e)
        self.coeffs = np.array(coeffs, dtype=float)
        self.exps = np.array(exps, dtype=int).reshape(len(coeffs), self.k + self.m)

    @classmethod
    def from_json(cls, obj) -> "PolynomialFamily":
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = [(t["coeff"], t["exponents"]) for t in obj["terms"]]
        return cls(terms, obj.get("k", 0), obj["m"], obj.get("provenance", "user"))

    def to_json(self) -> dict:
        return {"k": self.k, "m": self.m, "provenance": self.provenance,
                "terms": [{"coeff": float(c), "exponents": [int(v) for v in e]}
                          for c, e in zip(self.coeffs, self.exps)]}

    def deriv(self, y, x, alpha) -> float:
        """Partial derivative with multi-index ``alpha`` over ``(y, x)``."""
        pt = np.concatenate((np.atleast_1d(np.asarray(y, dtype=float)).reshape(-1)[:self.k],
                             np.asarray(x, dtype=float).reshape(-1)))
        alpha = np.asarray(alpha, dtype=int)
        e = self.exps - alpha
        ok = np.all(e >= 0, axis=1)
        if not np.any(ok):
            return 0.0
        fall = np.ones(len(self.coeffs))
        for j, a in enumerate(alpha):
            for i in range(a):
                fall = fall * (self.exps[:, j] - i)
        with np.errstate(invalid="ignore"):
            mon = np.prod(np.where(e > 0, pt ** np.maximum(e, 0), 1.0), axis=1)
        return float(np.sum(np.where(ok, self.coeffs * fall * mon, 0.0)))

    def _multi(self, *idx):
        a = np.zeros(self.k + self.m, dtype=int)
        for i in idx:
            a[i] += 1
        return a

    def _table(self, key, multis):
        # stacked derivative polynomials: (output slot, coeff, exponents) per term
        cache = self.__dict__.setdefault("_tables", {})
        if key not in cache:
            slots, cs, es = [], [], []
            for slot, alpha in enumerate(multis):
                e = self.exps - alpha
                fall = np.ones(len(self.coeffs))
                for j, a in enumerate(alpha):
                    for i in range(a):
                        fall = fall * (self.exps[:, j] - i)
                ok = np.all(e >= 0, axis=1) & (fall != 0)
                slots.append(np.full(int(ok.sum()), slot))
                cs.append((self.coeffs * fall)[ok])
                es.append(e[ok])
            cache[key] = (np.concatenate(slots).astype(int), np.concatenate(cs),
                          np.concatenate(es).reshape(-1, self.k + self.m), len(multis))
        return cache[key]

    def _eval(self, key, multis, y, x):
        slot, c, e, n = self._table(key, multis)
        pt = np.concatenate((np.asarray(y, dtype=float).reshape(-1)[:self.k],
                             np.asarray(x, dtype=float).reshape(-1)))
        mon = np.prod(np.where(e > 0, pt ** e, 1.0), axis=1)
        return np.bincount(slot, weights=c * mon, minlength=n)

    def value(self, y, x):
        return float(self._eval("v", [self._multi()], y, x)[0])

    def grad_x(self, y, x):
        return self._eval("g", [self._multi(self.k + i) for i in range(self.m)], y, x)

    def hess_x(self, y, x):
        m, k = self.m, self.k
        return self._eval("h", [self._multi(k + i, k + j) for i in range(m) for j in range(m)],
                          y, x).reshape(m, m)

    def third_x(self, y, x):
        m, k = self.m, self.k
        idx = itertools.product(range(m), repeat=3)
        return self._eval("t", [self._multi(k + i, k + j, k + l) for i, j, l in idx],
                          y, x).reshape(m, m, m)

    def mixed_yx(self, y, x):
        m, k = self.m, self.k
        return self._eval("yx", [self._multi(a, k + i) for a in range(k) for i in range(m)],
                          y, x).reshape(k, m)

    def fiber(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        coeffs = self.coeffs * np.prod(y[None, :] ** self.exps[:, :self.k], axis=1) if self.k else self.coeffs
        merged: dict = {}
        for c, e in zip(coeffs, self.exps[:, self.k:]):
            merged[tuple(e)] = merged.get(tuple(e), 0.0) + c
        terms = [(c, e) for e, c in merged.items() if c != 0.0]
        return PolynomialFamily(terms, 0, self.m, self.provenance)


class CallableFamily(GermFamily):
    """User function ``fn(y, x)``; partials by central differences (no exactness claim)."""

    def __init__(self, fn: Callable, k: int, m: int, h: float = 1e-3):
        self.fn, self.k, self.m, self.h = fn, int(k), int(m), float(h)
        self.provenance = "user"

    def _d(self, y, x, idx):
        # nested central differences over coordinates of (y, x)
        y = np.asarray(y, dtype=float).reshape(-1)
        x = np.asarray(x, dtype=float).reshape(-1)
        h = self.h
        total = 0.0
        for signs in itertools.product((1, -1), repeat=len(idx)):
            yy, xx = y.copy(), x.copy()
            for sgn, i in zip(signs, idx):
                if i < self.k:
                    yy[i] += sgn * h
                else:
                    xx[i - self.k] += sgn * h
            total += np.prod(signs) * self.fn(yy, xx)
        return total / (2 * h) ** len(idx)

    def value(self, y, x):
        return float(self.fn(np.asarray(y, dtype=float), np.asarray(x, dtype=float)))

    def grad_x(self, y, x):
        return np.array([self._d(y, x, (self.k + i,)) for i in range(self.m)])

    def hess_x(self, y, x):
        return np.array([[self._d(y, x, (self.k + i, self.k + j)) for j in range(self.m)]
                         for i in range(self.m)])

    def third_x(self, y, x):
        return np.array([[[self._d(y, x, (self.k + i, self.k + j, self.k + l)) for l in range(self.m)]
                          for j in range(self.m)] for i in range(self.m)])

    def mixed_yx(self, y, x):
        return np.array([[self._d(y, x, (a, self.k + i)) for i in range(self.m)]
                         for a in range(self.k)]).reshape(self.k, self.m)


class _Frozen(GermFamily):
    def __init__(self, base, y):
        self.base, self.y, self.k, self.m = base, y, 0, base.m
        self.provenance = base.provenance

    def value(self, y, x):
        return self.base.value(self.y, x)

    def grad_x(self, y, x):
        return self.base.grad_x(self.y, x)

    def hess_x(self, y, x):
        return self.base.hess_x(self.y, x)

    def third_x(self, y, x):
        return self.base.third_x(self.y, x)

    def mixed_yx(self, y, x):
        return np.zeros((0, self.m))


class _Rotated(GermFamily):
    def __init__(self, base, Q):
        if not np.allclose(Q.T @ Q, np.eye(base.m), atol=1e-12):
            raise ParameterError("rotation matrix is not orthogonal")
        self.base, self.Q, self.k, self.m = base, Q, base.k, base.m
        self.provenance = base.provenance

    def value(self, y, x):
        return self.base.value(y, self.Q @ np.asarray(x, dtype=float))

    def grad_x(self, y, x):
        return self.Q.T @ self.base.grad_x(y, self.Q @ np.asarray(x, dtype=float))

    def hess_x(self, y, x):
        return self.Q.T @ self.base.hess_x(y, self.Q @ np.asarray(x, dtype=float)) @ self.Q

    def third_x(self, y, x):
        T = self.base.third_x(y, self.Q @ np.asarray(x, dtype=float))
        return np.einsum("abc,ai,bj,ck->ijk", T, self.Q, self.Q, self.Q)

    def mixed_yx(self, y, x):
        return self.base.mixed_yx(y, self.Q @ np.asarray(x, dtype=float)) @ self.Q


def unfolding_family(s: int, m: int) -> PolynomialFamily:
    """Standard unfolding ``q_y(z, x) = z^3 + 3 y z - sum_{i<=s} x_i^2 + sum_{i>s} x_i^2``.

    The fibre coordinates are ``(z, x_1, ..., x_{m-1})`` and ``k = 1``.
    """
    if m < 1 or not (0 <= s <= m - 1):
        raise DomainError(f"unfolding index s={s} must satisfy 0 <= s <= m - 1 = {m - 1}")
    d = 1 + m

    def e(**pows):
        out = [0] * d
        for key, v in pows.items():
            out[int(key[1:])] = v
        return out

    terms = [(1.0, e(i1=3)), (3.0, e(i0=1, i1=1))]
    for i in range(1, m):
        terms.append((-1.0 if i <= s else 1.0, e(**{f"i{1 + i}": 2})))
    return PolynomialFamily(terms, 1, m, "unfolding")


# ---------------------------------------------------------------------------
# classification


@dataclass
class SingularPoint:
    """Classified critical point of a function or of a family's fibre function."""

    y: np.ndarray
    x: np.ndarray
    kind: str  # Morse | BirthDeath | Fold | Cusp
    index: int
    eigenvalues: np.ndarray
    kernel: np.ndarray | None = None
    cubic: float | None = None
    transversality: float | None = None

    @property
    def label(self) -> str:
        if self.kind in ("BirthDeath", "Cusp"):
            return f"{self.kind}({self.index}+1/2)"
        return f"{self.kind}({self.index})"

    @property
    def degenerate(self) -> bool:
        return self.kind in ("BirthDeath", "Cusp")

    def to_dict(self) -> dict:
        return {"y": self.y.tolist(), "x": self.x.tolist(), "class": self.kind, "index": self.index,
                "label": self.label, "eigenvalues": self.eigenvalues.tolist(),
                "kernel": None if self.kernel is None else self.kernel.tolist(),
                "cubic": self.cubic, "transversality": self.transversality}


def _spectrum(H, tol_nd):
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    # relative to the spectrum, floored at unit scale so that an all-null
    # Hessian (one fibre variable at a double root) is not read as Morse
    scale = max(float(np.abs(w).max()) if w.size else 0.0, 1.0)
    thresh = tol_nd * scale
    zero = np.abs(w) <= thresh
    return w, V, zero


def _kernel_data(f, y, x, w, V, zero, tol_nd):
    if zero.sum() > 1:
        raise UnclassifiableError(f"fibre Hessian has a {int(zero.sum())}-dimensional kernel at x={x}")
    v = V[:, np.flatnonzero(zero)[0]]
    cubic = float(np.einsum("ijk,i,j,k->", f.third_x(y, x), v, v, v))
    if not abs(cubic) > tol_nd:
        raise UnclassifiableError(f"vanishing cubic term along the kernel at x={x} ({cubic:.3e})")
    return v, cubic


def classify_critical(f: GermFamily, x0, tol_nd: float = TOL_ND, tol_grad: float = TOL_GRAD) -> SingularPoint:
    """Classify a critical point of a function (``k = 0``) as Morse or birth-death."""
    if f.k != 0:
        raise DomainError("classify_critical expects a function without parameters; use .fiber(y)")
    y = np.zeros(0)
    x = np.asarray(x0, dtype=float).reshape(-1)
    g = f.grad_x(y, x)
    if np.linalg.norm(g) > tol_grad:
        raise NotCriticalError(f"gradient norm {np.linalg.norm(g):.3e} exceeds {tol_grad:g} at {x}")
    w, V, zero = _spectrum(f.hess_x(y, x), tol_nd)
    if not zero.any():
        return SingularPoint(y, x, "Morse", int((w < 0).sum()), w)
    v, cubic = _kernel_data(f, y, x, w, V, zero, tol_nd)
    return SingularPoint(y, x, "BirthDeath", int((w[~zero] < 0).sum()), w, v, cubic)


def classify_family_point(F: GermFamily, y0, x0, tol_nd: float = TOL_ND,
                          tol_grad: float = TOL_GRAD) -> SingularPoint:
    """Classify a fibre critical point of a family as fold or cusp."""
    y = np.atleast_1d(np.asarray(y0, dtype=float)).reshape(-1)
    x = np.asarray(x0, dtype=float).reshape(-1)
    g = F.grad_x(y, x)
    if np.linalg.norm(g) > tol_grad:
        raise NotCriticalError(f"fibre gradient norm {np.linalg.norm(g):.3e} exceeds {tol_grad:g}")
    w, V, zero = _spectrum(F.hess_x(y, x), tol_nd)
    if not zero.any():
        return SingularPoint(y, x, "Fold", int((w < 0).sum()), w)
    v, cubic = _kernel_data(F, y, x, w, V, zero, tol_nd)
    trans = F.mixed_yx(y, x) @ v
    tval = float(np.abs(trans).max()) if trans.size else 0.0
    if not tval > tol_nd:
        raise NonTransverseError(f"unfolding is not transverse at y={y}, x={x} ({tval:.3e})")
    return SingularPoint(y, x, "Cusp", int((w[~zero] < 0).sum()), w, v, cubic, tval)


# ---------------------------------------------------------------------------
# critical point search


def _newton_critical(f, y, x, tol_grad, max_iter=60, bound=1e6):
    """Newton on the gradient; steps along near-kernel directions are doubled,
    which restores fast convergence at double roots (birth-death points)."""
    x = np.array(x, dtype=float)
    for _ in range(max_iter):
        g = f.grad_x(y, x)
        H = f.hess_x(y, x)
        w, V = np.linalg.eigh(0.5 * (H + H.T))
        scale = max(float(np.abs(w).max()), 1e-300)
        coef = V.T @ g
        small = np.abs(w) < 1e-3 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(w) > 1e-14 * scale, coef / w, 0.0)
        step = np.where(small, 2.0 * step, step)
        dx = V @ step
        x = x - dx
        if not np.all(np.isfinite(x)) or np.abs(x).max() > bound:
            return None
        if np.linalg.norm(dx) < 1e-15 * max(1.0, np.linalg.norm(x)):
            break
    g = f.grad_x(y, x)
    return x if np.linalg.norm(g) <= tol_grad else None


def find_critical_points(f: GermFamily, region: Sequence[tuple[float, float]], seeds: int = 5,
                         y=None, tol_grad: float = TOL_GRAD, tol_nd: float = TOL_ND,
                         dedup: float = 1e-6) -> list[SingularPoint]:
    """Locate and classify critical points of ``f`` (or of the fibre at ``y``) in a box.

    Newton iterations start from a ``seeds``-per-axis tensor grid of the box;
    converged points inside the box are deduplicated and classified.
    """
    if y is not None:
        f = f.fiber(y)
    if f.k != 0:
        raise DomainError("pass the parameter value y for families")
    region = [(float(a), float(b)) for a, b in region]
    if len(region) != f.m:
        raise DomainError(f"region has {len(region)} axes but the fibre dimension is {f.m}")
    axes = [np.linspace(a, b, seeds) for a, b in region]
    bound = 10.0 * max(max(abs(a), abs(b)) for a, b in region) + 1.0
    found: list[np.ndarray] = []
    for seed in itertools.product(*axes):
        x = _newton_critical(f, np.zeros(0), np.array(seed), tol_grad, bound=bound)
        if x is None:
            continue
        if any(x[i] < a - 1e-9 or x[i] > b + 1e-9 for i, (a, b) in enumerate(region)):
            continue
        if any(np.linalg.norm(x - p) <= dedup for p in found):
            continue
        found.append(x)
    found.sort(key=lambda p: tuple(p))
    return [classify_critical(f, x, tol_nd, tol_grad) for x in found]


# ---------------------------------------------------------------------------
# singular set continuation


@dataclass
class TracedCurve:
    points: np.ndarray  # (N, k + m) rows (y, x)
    classes: list
    cusps: list
    stalled: bool = False
    residual: float = 0.0

    def to_csv(self, names: Sequence[str] | None = None) -> str:
        d = self.points.shape[1]
        names = list(names) if names else [f"c{i}" for i in range(d)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names + ["class"])
        for p, c in zip(self.points, self.classes):
            w.writerow([repr(float(v)) for v in p] + [c])
        return buf.getvalue()


def _residual_fn(F):
    def G(u):
        return F.grad_x(u[:F.k], u[F.k:])

    def J(u):
        return np.hstack((F.mixed_yx(u[:F.k], u[F.k:]).T, F.hess_x(u[:F.k], u[F.k:])))

    return G, J


def _tangent(J, prev=None):
    _, _, Vt = np.linalg.svd(J)
    tau = Vt[-1]
    if prev is not None and tau @ prev < 0:
        tau = -tau
    return tau


def _correct(G, J, u, tau, anchor, tol=1e-10, max_iter=30):
    for _ in range(max_iter):
        r = np.concatenate((G(u), [tau @ (u - anchor)]))
        A = np.vstack((J(u), tau))
        du = np.linalg.solve(A, -r)
        u = u + du
        if np.linalg.norm(du) < tol * 1e-2:
            break
    res = float(np.linalg.norm(G(u)))
    return u, res


def _inside(u, box):
    return all(a <= v <= b for v, (a, b) in zip(u, box))


def singular_set_trace(F: GermFamily, region: Sequence[tuple[float, float]], seeds: int = 9,
                       step: float = 1e-2, tol: float = 1e-10, max_points: int = 20000,
                       tol_nd: float = TOL_ND) -> list[TracedCurve]:
    """Trace ``{(y, x): grad_x F(y, x) = 0}`` for a one-parameter family.

    Seeds are fibre critical points at ``seeds`` parameter slices.  Each curve
    is continued in both directions by pseudo-arclength steps until it
    leaves the box; sign changes of the fibre Hessian determinant along a
    curve are bisected to locate cusp points.
    """
    if F.k != 1:
        raise DomainError("singular-set tracing is implemented for one-parameter families")
    box = [(float(a), float(b)) for a, b in region]
    if len(box) != 1 + F.m:
        raise DomainError("region must list the parameter interval followed by fibre intervals")
    G, J = _residual_fn(F)
    curves: list[TracedCurve] = []
    all_pts: list[np.ndarray] = []
    ylo, yhi = box[0]
    for yv in np.linspace(ylo, yhi, seeds):
        for sp in find_critical_points(F, box[1:], seeds=5, y=[yv]):
            u0 = np.concatenate(([yv], sp.x))
            if all_pts and min(np.linalg.norm(P - u0, axis=1).min() for P in all_pts) < 2 * step:
                continue
            branches, stalled = [], False
            for sign in (1.0, -1.0):
                u = u0.copy()
                tau = sign * _tangent(J(u))
                pts = []
                while len(pts) < max_points:
                    pred = u + step * tau
                    un, res = _correct(G, J, pred, tau, pred, tol)
                    if res > 1e-8 or np.linalg.norm(un - u) > 3 * step:
                        stalled = True
                        break
                    if not _inside(un, box):
                        break
                    tau = _tangent(J(un), tau)
                    u = un
                    pts.append(u)
                branches.append(pts)
            pts = np.array(branches[1][::-1] + [u0] + branches[0])
            classes, cusps = [], []
            dets = []
            for p in pts:
                try:
                    classes.append(classify_family_point(F, p[:1], p[1:], tol_nd, 1e-8).label)
                except ClassificationError as exc:
                    classes.append(type(exc).__name__)
                dets.append(np.linalg.det(F.hess_x(p[:1], p[1:])))
            dets = np.array(dets)
            for i in np.flatnonzero(np.sign(dets[:-1]) * np.sign(dets[1:]) < 0):
                cusps.append(_bisect_cusp(F, G, J, pts[i], pts[i + 1], tol, tol_nd))
            res = float(max(np.linalg.norm(G(p)) for p in pts))
            curves.append(TracedCurve(pts, classes, cusps, stalled, res))
            all_pts.append(pts)
    return curves


def _bisect_cusp(F, G, J, a, b, tol, tol_nd):
    def det(u):
        return np.linalg.det(F.hess_x(u[:1], u[1:]))

    da = det(a)
    for _ in range(80):
        mid = 0.5 * (a + b)
        tau = b - a
        tau = tau / np.linalg.norm(tau)
        mid, _ = _correct(G, J, mid, tau, mid, tol)
        dm = det(mid)
        if dm == 0.0 or np.linalg.norm(b - a) < 1e-14:
            a = b = mid
            break
        if np.sign(dm) == np.sign(da):
            a, da = mid, dm
        else:
            b = mid
    u = 0.5 * (a + b)
    try:
        return classify_family_point(F, u[:1], u[1:], tol_nd, 1e-8)
    except ClassificationError as exc:
        w = np.linalg.eigvalsh(F.hess_x(u[:1], u[1:]))
        return SingularPoint(u[:1], u[1:], type(exc).__name__, -1, w)


# ---------------------------------------------------------------------------
# admissibility and Morse triples


def admissible_check(points: Sequence[SingularPoint], n: int) -> dict:
    """Index bounds for a cobordism of dimension ``n + 1``.

    Morse (and fold) indices must be at most ``n - 2``; birth-death and cusp
    points need ``s <= n - 3`` so that both cancelling indices are admissible.
    """
    rows = []
    for p in points:
        bound = n - 3 if p.degenerate else n - 2
        rows.append({"label": p.label, "index": p.index, "bound": bound, "pass": p.index <= bound})
    return {"n": n, "points": rows, "pass": all(r["pass"] for r in rows)}


MetricField = Callable[[np.ndarray], np.ndarray]


@dataclass
class MorseTripleModel:
    """Function, chart metric and vector field on a box in R^m.

    ``metric`` and ``field`` are callables of the point; ``critical_points``
    are located in ``region`` on first use when not supplied.
    """

    f: GermFamily
    metric: MetricField
    field: Callable[[np.ndarray], np.ndarray]
    region: Sequence[tuple[float, float]] = ((-1.0, 1.0),)
    critical_points: list | None = None
    seeds: int = 5

    def __post_init__(self):
        if self.f.k != 0:
            raise DomainError("a Morse triple needs a function without parameters")

    def crit(self) -> list[SingularPoint]:
        if self.critical_points is None:
            self.critical_points = find_critical_points(self.f, self.region, self.seeds)
        return self.critical_points

    def df(self, x) -> np.ndarray:
        return self.f.grad_x(np.zeros(0), np.asarray(x, dtype=float))

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.linalg.solve(np.asarray(self.metric(x), dtype=float), self.df(x))

    @classmethod
    def euclidean(cls, f: GermFamily, region, field=None, **kw) -> "MorseTripleModel":
        eye = np.eye(f.m)
        model = cls(f, lambda x: eye, field or (lambda x: None), region, **kw)
        if field is None:
            model.field = model.gradient
        return model


def compatible_metric_check(t: MorseTripleModel, tol: float = 1e-10, factor: float = 2.0) -> dict:
    """Check the metric against the Hessian splitting at every critical point.

    With ``E+``/``E-``/``E0`` the positive, negative and null eigenspaces of
    the coordinate Hessian: the spaces must be mutually ``m``-orthogonal, the
    Hessian restricted to ``E+`` (``E-``) must equal ``+factor`` (``-factor``)
    times the metric there, and a kernel direction must have unit length.
    """
    rows = []
    for p in t.crit():
        M = np.asarray(t.metric(p.x), dtype=float)
        H = t.f.hess_x(np.zeros(0), p.x)
        w, V, zero = _spectrum(H, TOL_ND)
        groups = {"+": V[:, (w > 0) & ~zero], "-": V[:, (w < 0) & ~zero], "0": V[:, zero]}
        orth = 0.0
        for a, b in itertools.combinations(groups, 2):
            A, B = groups[a], groups[b]
            if A.size and B.size:
                orth = max(orth, float(np.abs(A.T @ M @ B).max()))
        block = 0.0
        for key, sgn in (("+", 1.0), ("-", -1.0)):
            B = groups[key]
            if B.size:
                block = max(block, float(np.abs(B.T @ H @ B - sgn * factor * (B.T @ M @ B)).max()))
        kern = 0.0
        if groups["0"].size:
            v = groups["0"][:, 0]
            kern = abs(float(v @ M @ v) - 1.0)
        ok = orth <= tol and block <= tol and kern <= tol
        rows.append({"point": p.x.tolist(), "label": p.label, "orthogonality": orth,
                     "block": block, "kernel_length": kern, "pass": ok})
    return {"factor": factor, "tol": tol, "points": rows,
            "max_residual": max([max(r["orthogonality"], r["block"], r["kernel_length"]) for r in rows],
                                default=0.0),
            "pass": bool(rows) and all(r["pass"] for r in rows)}


def gradient_like_check(t: MorseTripleModel, region=None, crit_radius: float = CRIT_RADIUS,
                        samples: int = 21, tol: float = 1e-8) -> dict:
    """``df(V) > 0`` away from critical points and ``V = grad_m f`` near them."""
    region = t.region if region is None else region
    axes = [np.linspace(a, b, samples) for a, b in region]
    crit = [p.x for p in t.crit()]
    min_dfv, max_dev = math.inf, 0.0
    bad_out, bad_in, witness = 0, 0, None
    for pt in itertools.product(*axes):
        x = np.array(pt)
        V = np.asarray(t.field(x), dtype=float)
        near = any(np.linalg.norm(x - c) < crit_radius for c in crit)
        if near:
            dev = float(np.linalg.norm(V - t.gradient(x)))
            max_dev = max(max_dev, dev)
            if dev > tol:
                bad_in += 1
                witness = witness or {"point": x.tolist(), "condition": "V = grad f", "value": dev}
        else:
            dfv = float(t.df(x) @ V)
            min_dfv = min(min_dfv, dfv)
            if not dfv > 0:
                bad_out += 1
                witness = witness or {"point": x.tolist(), "condition": "df(V) > 0", "value": dfv}
    return {"min_df_V": min_dfv, "max_gradient_deviation": max_dev, "violations_outside": bad_out,
            "violations_inside": bad_in, "witness": witness, "crit_radius": crit_radius,
            "pass": bad_out == 0 and bad_in == 0}


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    t: np.ndarray
    points: np.ndarray
    values: np.ndarray
    reason: str

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def trajectory_flow(t: MorseTripleModel, start, direction: str = "forward", until_level=None,
                    until_time: float | None = None, unit_rate: bool = False,
                    crit_radius: float = CRIT_RADIUS, rtol: float = 1e-10, atol: float = 1e-12,
                    max_time: float = 1e3, allow_critical_start: bool = False) -> Trajectory:
    """Integrate the vector field of a Morse triple from ``start``.

    With ``unit_rate`` the field is divided by ``df(V)`` so that ``f``
    changes at unit rate (increasing forward).  Integration stops at the
    requested level, after ``until_time``, or on entering the
    ``crit_radius`` ball of a critical point other than the one at start.
    """
    if direction not in ("forward", "backward"):
        raise ParameterError("direction must be 'forward' or 'backward'")
    sgn = 1.0 if direction == "forward" else -1.0
    x0 = np.asarray(start, dtype=float)
    crit = [p.x for p in t.crit()]
    near0 = [np.linalg.norm(x0 - c) < crit_radius for c in crit]
    if any(near0) and not allow_critical_start:
        dist = min(np.linalg.norm(x0 - c) for c in crit)
        if dist < 1e-12:
            raise FlowError("start point is a critical point")

    def rhs(_, x):
        V = np.asarray(t.field(x), dtype=float)
        if unit_rate:
            dfv = float(t.df(x) @ V)
            if not abs(dfv) > 1e-14:
                raise FlowError(f"df(V) vanishes at {x}; unit-rate flow undefined")
            V = V / dfv
        return sgn * V

    events = []
    if until_level is not None:
        def level(_, x):
            return t.f(x) - until_level
        level.terminal = True
        events.append(level)
    for c, was_near in zip(crit, near0):
        if was_near:
            continue

        def arrive(_, x, c=c):
            return np.linalg.norm(x - c) - crit_radius
        arrive.terminal = True
        arrive.direction = -1
        events.append(arrive)
    T = until_time if until_time is not None else max_time
    sol = solve_ivp(rhs, (0.0, T), x0, method="RK45", rtol=rtol, atol=atol, events=events or None,
                    dense_output=False)
    if sol.status == -1:
        raise FlowError(f"integration failed: {sol.message}")
    pts = sol.y.T
    reason = "time"
    if sol.status == 1:
        hit = [i for i, e in enumerate(sol.t_events) if len(e)]
        first = events[hit[0]]
        reason = "level" if until_level is not None and first is events[0] else "critical"
    values = np.array([t.f(p) for p in pts])
    return Trajectory(sol.t, pts, values, reason)
