"""Scalar curvature of warped-product block metrics.

Closed-form evaluators cover the four metric shapes used throughout the
toolkit:

* ``dt^2 + f(t)^2 ds_{n-1}^2``                       (:class:`SingleWarp`)
* ``dt^2 + u(t)^2 ds_p^2 + v(t)^2 ds_q^2``           (:class:`DoublyWarp`)
* ``dr^2 + a(r,t)^2 dt^2 + F(r,t)^2 ds_n^2``         (:class:`TripleBlock`)
* Riemannian products and collars of the above      (:class:`Product`, :class:`Glued`)

plus :func:`fd_scalar_oracle`, an independent Christoffel/Ricci pipeline by
central differences on an explicit chart, used to validate every closed
form.  All metrics in the toolkit are diagonal in their charts, so each block
also describes itself as a list of diagonal weights; that list drives the
chart metric handed to the oracle.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import (CollarMismatchError, DomainError, GuardMarginError,
                     NonPositiveWarpError, SingularMetricError)
from .warp import GUARD, WarpFn

__all__ = [
    "Field2",
    "BlockMetric",
    "SingleWarp",
    "DoublyWarp",
    "TripleBlock",
    "Interval",
    "Product",
    "Glued",
    "GluedPart",
    "CurvatureGrid",
    "scalar_single_warped",
    "scalar_doubly_warped",
    "scalar_eq21",
    "scalar_eq22",
    "fd_scalar_oracle",
    "block_oracle",
    "compare_to_oracle",
    "positivity_scan",
]

SPHERE_ANGLE = 1.1  # default angular coordinate where chart metrics are probed


# ---------------------------------------------------------------------------
# two-variable fields


Jet2 = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class Field2:
    """Smooth function of ``(r, t)`` with all partials up to order two.

    ``jet_fn(r, t)`` returns ``(value, d_r, d_t, d_rr, d_rt, d_tt)`` and must
    broadcast over its arguments.
    """

    jet_fn: Callable[[np.ndarray, np.ndarray], Jet2] = field(repr=False)
    r_domain: tuple[float, float]
    t_domain: tuple[float, float]
    name: str = "field"
    t_independent: bool = False
    params: dict = field(default_factory=dict)

    def jet(self, r, t) -> Jet2:
        r = np.asarray(r, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(r.shape, t.shape)
        return tuple(np.broadcast_to(np.asarray(x, dtype=float), shape)
                     for x in self.jet_fn(r, t))

    def __call__(self, r, t):
        return self.jet(r, t)[0]

    @classmethod
    def from_r(cls, f: WarpFn, t_domain, name: str | None = None) -> "Field2":
        """``F(r, t) = f(r)``."""

        def jet(r, t):
            v, d1, d2 = f.jet(r)
            z = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(t)))
            return v + z, d1 + z, z, d2 + z, z, z

        return cls(jet, f.domain, tuple(t_domain), name or f.kind, True, {"r": f.kind, **f.params})

    @classmethod
    def constant(cls, c: float, r_domain, t_domain, name: str = "constant") -> "Field2":
        c = float(c)

        def jet(r, t):
            z = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(t)))
            return z + c, z, z, z, z, z

        return cls(jet, tuple(r_domain), tuple(t_domain), name, True, {"value": c})


def fd_check_field(F: Field2, r, t, h: float = 1e-3) -> float:
    """Largest deviation of the supplied partials from five-point differences."""
    from .warp import fd_derivatives

    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    _, fr, ft, frr, frt, ftt = F.jet(r, t)
    dr, drr = fd_derivatives(lambda x: F(x, t), r, h)
    dt, dtt = fd_derivatives(lambda x: F(r, x), t, h)
    drt = (F(r + h, t + h) - F(r + h, t - h) - F(r - h, t + h) + F(r - h, t - h)) / (4 * h * h)
    # the mixed partial uses a second-order stencil; deviation scales like h^2
    errs = [np.abs(dr - fr), np.abs(drr - frr), np.abs(dt - ft), np.abs(dtt - ftt), np.abs(drt - frt)]
    return float(max(e.max() for e in errs))


# ---------------------------------------------------------------------------
# guards


def _check_guard(x, domain, margin, name):
    x = np.asarray(x, dtype=float)
    lo, hi = domain
    if np.any(x < lo + margin) or np.any(x > hi - margin):
        bad = x[(x < lo + margin) | (x > hi - margin)].ravel()[0]
        raise GuardMarginError(
            f"{name}={bad:.17g} within guard margin {margin:g} of domain [{lo:.6g}, {hi:.6g}]")


def _check_positive(v, name, where=None):
    v = np.asarray(v)
    if np.any(~(v > 0)):
        i = int(np.argmax(~(v > 0).ravel()))
        loc = "" if where is None else f" at {np.ravel(where)[i]:.6g}"
        raise NonPositiveWarpError(f"{name} is not positive{loc}: {v.ravel()[i]:.6g}")


# ---------------------------------------------------------------------------
# closed-form evaluators


def scalar_single_warped(f: WarpFn, n: int, t, margin: float = GUARD):
    """Scalar curvature of ``dt^2 + f(t)^2 ds_{n-1}^2`` (total dimension ``n``).

    ``R = (n-1) [ (n-2)(1 - f'^2)/f^2 - 2 f''/f ]``.
    """
    if n < 2:
        raise DomainError(f"dimension n={n} must be >= 2")
    _check_guard(t, f.domain, margin, "t")
    v, d1, d2 = f.jet(t)
    _check_positive(v, "f", t)
    out = kernels.single_warped(v, d1, d2, n)
    return out if np.ndim(t) else float(out)


def scalar_doubly_warped(u: WarpFn, v: WarpFn, p: int, q: int, t, margin: float = GUARD):
    """Scalar curvature of ``dt^2 + u^2 ds_p^2 + v^2 ds_q^2``.

    ``R = -2p u''/u - 2q v''/v + p(p-1)(1-u'^2)/u^2 + q(q-1)(1-v'^2)/v^2
    - 2pq u'v'/(uv)``.
    """
    dom = (max(u.domain[0], v.domain[0]), min(u.domain[1], v.domain[1]))
    _check_guard(t, dom, margin, "t")
    U, V = u.jet(t), v.jet(t)
    _check_positive(U[0], "u", t)
    _check_positive(V[0], "v", t)
    out = kernels.doubly_warped(*U, *V, p, q)
    return out if np.ndim(t) else float(out)


def scalar_eq21(alpha: Field2, F: Field2, n: int, r, t, margin: float = GUARD):
    """Scalar curvature of ``dr^2 + alpha(r,t)^2 dt^2 + F(r,t)^2 ds_n^2``.

    Evaluated term by term as::

        n(n-1)/F^2 [1 - F_r^2 - F_t^2/a^2] - 2n/F [F_rr + F_r a_r/a]
        + 2n/(a^2 F) [-F_tt + F_t a_t/a] - 2 a_rr/a
    """
    _check_guard(r, alpha.r_domain, margin, "r")
    _check_guard(t, alpha.t_domain, margin, "t")
    a, ar, at, arr, _, _ = alpha.jet(r, t)
    G, Gr, Gt, Grr, _, Gtt = F.jet(r, t)
    _check_positive(a, "alpha")
    _check_positive(G, "F")
    out = kernels.eq21(a, ar, at, arr, G, Gr, Gt, Grr, Gtt, n)
    return out if np.ndim(out) else float(out)


def scalar_eq22(alpha: Field2, f: WarpFn, n: int, r, t, margin: float = GUARD):
    """Scalar curvature when the fibre warp depends on ``r`` only.

    ``n(n-1)/f^2 [1 - f_r^2] - 2n/f [f_rr + f_r a_r/a] - 2 a_rr/a``.
    """
    _check_guard(r, alpha.r_domain, margin, "r")
    _check_guard(t, alpha.t_domain, margin, "t")
    a, ar, _, arr, _, _ = alpha.jet(r, t)
    shape = a.shape
    v, d1, d2 = (np.broadcast_to(x, shape) for x in f.jet(np.broadcast_to(r, shape)))
    _check_positive(a, "alpha")
    _check_positive(v, "f")
    out = kernels.eq22(a, ar, arr, v, d1, d2, n)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# finite-difference oracle


def _sphere_diag(angles: np.ndarray) -> np.ndarray:
    """Diagonal of the round metric on ``S^k`` in nested angle coordinates."""
    k = len(angles)
    out = np.ones(k)
    for i in range(1, k):
        out[i] = out[i - 1] * math.sin(angles[i - 1]) ** 2
    return out


def fd_scalar_oracle(g: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-3,
                     richardson: bool = False, cond_max: float = 1e12) -> float:
    """Scalar curvature of the chart metric ``g`` at ``x`` by central differences.

    First and second derivatives of the metric components come from
    second-order central stencils; Christoffel symbols, their derivatives,
    the Ricci tensor and its trace are then assembled exactly.  The sign
    convention gives ``+n(n-1)`` on the unit sphere.  With ``richardson``
    the result is extrapolated from steps ``h`` and ``h/2``.
    """
    if richardson:
        r1 = fd_scalar_oracle(g, x, h, False, cond_max)
        r2 = fd_scalar_oracle(g, x, h / 2, False, cond_max)
        return (4 * r2 - r1) / 3
    x = np.asarray(x, dtype=float)
    d = x.size
    if d > 6:
        raise DomainError(f"oracle chart dimension {d} exceeds 6")
    eye = np.eye(d) * h
    g0 = np.asarray(g(x), dtype=float)
    if not np.all(np.isfinite(g0)) or np.linalg.cond(g0) > cond_max:
        raise SingularMetricError(f"metric is singular or ill-conditioned at {x.tolist()}")
    gi = np.linalg.inv(g0)
    plus = [np.asarray(g(x + eye[i])) for i in range(d)]
    minus = [np.asarray(g(x - eye[i])) for i in range(d)]
    dg = np.array([(plus[i] - minus[i]) / (2 * h) for i in range(d)])  # dg[m, i, j]
    ddg = np.empty((d, d, d, d))
    for a in range(d):
        ddg[a, a] = (plus[a] - 2 * g0 + minus[a]) / h**2
        for b in range(a + 1, d):
            v = (np.asarray(g(x + eye[a] + eye[b])) - np.asarray(g(x + eye[a] - eye[b]))
                 - np.asarray(g(x - eye[a] + eye[b])) + np.asarray(g(x - eye[a] - eye[b]))) / (4 * h * h)
            ddg[a, b] = ddg[b, a] = v
    # lowered Christoffel symbols  C[l, i, j] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    C = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    Gam = np.einsum("kl,lij->kij", gi, C)
    dC = 0.5 * (np.einsum("milj->mlij", ddg) + np.einsum("mjli->mlij", ddg) - ddg)
    dgi = -np.einsum("ka,mab,bl->mkl", gi, dg, gi)
    dGam = np.einsum("mkl,lij->mkij", dgi, C) + np.einsum("kl,mlij->mkij", gi, dC)
    ric = (np.einsum("kkij->ij", dGam) - np.einsum("jkik->ij", dGam)
           + np.einsum("kkl,lij->ij", Gam, Gam) - np.einsum("kjl,lik->ij", Gam, Gam))
    return float(np.einsum("ij,ij->", gi, ric))


# ---------------------------------------------------------------------------
# block metrics


class BlockMetric:
    """Diagonal warped metric on a box chart.

    Subclasses define ``coords`` (names of the non-spherical coordinates),
    ``bounds`` (one interval per coordinate), ``dim`` (total dimension), the
    closed form ``_scalar(*coords)``, the positivity probe ``_warps`` and the
    diagonal line element ``line_element(*coords)``.
    """

    coords: tuple[str, ...] = ()
    bounds: tuple[tuple[float, float], ...] = ()
    dim: int = 0
    shape: str = "block"

    # -- interface used by scans, gluing and comparisons
    def scalar(self, *x, margin: float = GUARD):
        for xi, b, name in zip(x, self.bounds, self.coords):
            _check_guard(xi, b, margin, name)
        w = self._warps(*x)
        for name, v in w.items():
            _check_positive(v, name)
        return self._scalar(*x)

    def _scalar(self, *x):
        raise NotImplementedError

    def _warps(self, *x) -> dict:
        raise NotImplementedError

    def profile(self, *x) -> np.ndarray:
        """Stacked warp values and first derivatives; the metric comparison key."""
        raise NotImplementedError

    def line_element(self, *x) -> tuple[list, list]:
        """``(coordinate weights, [(sphere weight, sphere dim), ...])`` at a point."""
        raise NotImplementedError

    def chart_metric(self, point) -> np.ndarray:
        """Full chart metric at ``point = (coords..., sphere angles...)``."""
        point = np.asarray(point, dtype=float)
        k = len(self.coords)
        weights, spheres = self.line_element(*point[:k])
        diag = [float(w) for w in weights]
        pos = k
        for w, m in spheres:
            diag.extend(float(w) * _sphere_diag(point[pos:pos + m]))
            pos += m
        return np.diag(diag)

    def chart_point(self, *x, angle: float = SPHERE_ANGLE) -> np.ndarray:
        return np.concatenate((np.asarray(x, dtype=float), np.full(self.dim - len(self.coords), angle)))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def restricted(self, lo: float, hi: float, axis: int = 0) -> "BlockMetric":
        """Same metric on a sub-box ``[lo, hi]`` of coordinate ``axis``."""
        raise NotImplementedError(f"{self.shape} does not support restriction")


def _warp_dict(f: WarpFn) -> dict:
    return {"kind": f.kind, "domain": list(f.domain), "params": dict(f.params)}


class SingleWarp(BlockMetric):
    """``dt^2 + f(t)^2 ds_{n-1}^2``; ``n`` is the total dimension."""

    shape = "SingleWarp"

    def __init__(self, f: WarpFn, n: int, coord: str = "t"):
        if n < 2:
            raise DomainError(f"dimension n={n} must be >= 2")
        self.f, self.n = f, int(n)
        self.coords = (coord,)
        self.bounds = (tuple(f.domain),)
        self.dim = self.n

    def _scalar(self, t):
        return kernels.single_warped(*self.f.jet(t), self.n)

    def _warps(self, t):
        return {"f": self.f(t)}

    def profile(self, t):
        v, d1, _ = self.f.jet(t)
        return np.stack((v, d1))

    def line_element(self, t):
        return [1.0], [(self.f(t) ** 2, self.n - 1)]

    def to_dict(self):
        return {"shape": self.shape, "n": self.n, "f": _warp_dict(self.f), "chart": [list(self.bounds[0])]}

    def restricted(self, lo, hi, axis=0):
        return SingleWarp(self.f.restrict(lo, hi), self.n, self.coords[0])


class DoublyWarp(BlockMetric):
    """``dt^2 + u(t)^2 ds_p^2 + v(t)^2 ds_q^2`` of dimension ``p + q + 1``."""

    shape = "DoublyWarp"

    def __init__(self, u: WarpFn, v: WarpFn, p: int, q: int, coord: str = "t"):
        if p < 0 or q < 0 or p + q < 1:
            raise DomainError(f"invalid sphere dimensions p={p}, q={q}")
        self.u, self.v, self.p, self.q = u, v, int(p), int(q)
        self.coords = (coord,)
        self.bounds = ((max(u.domain[0], v.domain[0]), min(u.domain[1], v.domain[1])),)
        self.dim = self.p + self.q + 1

    def _scalar(self, t):
        return kernels.doubly_warped(*self.u.jet(t), *self.v.jet(t), self.p, self.q)

    def _warps(self, t):
        return {"u": self.u(t), "v": self.v(t)}

    def profile(self, t):
        u, u1, _ = self.u.jet(t)
        v, v1, _ = self.v.jet(t)
        return np.stack((u, u1, v, v1))

    def line_element(self, t):
        spheres = []
        if self.p:
            spheres.append((self.u(t) ** 2, self.p))
        if self.q:
            spheres.append((self.v(t) ** 2, self.q))
        return [1.0], spheres

    def to_dict(self):
        return {"shape": self.shape, "p": self.p, "q": self.q, "u": _warp_dict(self.u),
                "v": _warp_dict(self.v), "chart": [list(self.bounds[0])]}

    def restricted(self, lo, hi, axis=0):
        return DoublyWarp(self.u.restrict(lo, hi), self.v.restrict(lo, hi), self.p, self.q, self.coords[0])


class TripleBlock(BlockMetric):
    """``dr^2 + alpha(r,t)^2 dt^2 + F(r,t)^2 ds_n^2`` of dimension ``n + 2``.

    When ``F`` is declared ``t``-independent (and ``f_r`` is supplied) the
    reduced evaluator is used.
    """

    shape = "TripleBlock"

    def __init__(self, alpha: Field2, F: Field2, n: int, f_r: WarpFn | None = None):
        self.alpha, self.F, self.n = alpha, F, int(n)
        self.f_r = f_r
        self.coords = ("r", "t")
        self.bounds = (tuple(alpha.r_domain), tuple(alpha.t_domain))
        self.dim = self.n + 2

    def _scalar(self, r, t):
        a, ar, at, arr, _, _ = self.alpha.jet(r, t)
        G, Gr, Gt, Grr, _, Gtt = self.F.jet(r, t)
        if self.f_r is not None:
            return kernels.eq22(a, ar, arr, G, Gr, Grr, self.n)
        return kernels.eq21(a, ar, at, arr, G, Gr, Gt, Grr, Gtt, self.n)

    def _warps(self, r, t):
        return {"alpha": self.alpha(r, t), "F": self.F(r, t)}

    def profile(self, r, t):
        a, ar, at, *_ = self.alpha.jet(r, t)
        G, Gr, Gt, *_ = self.F.jet(r, t)
        return np.stack((a, ar, at, G, Gr, Gt))

    def line_element(self, r, t):
        return [1.0, self.alpha(r, t) ** 2], [(self.F(r, t) ** 2, self.n)]

    def to_dict(self):
        return {"shape": self.shape, "n": self.n, "alpha": self.alpha.name, "F": self.F.name,
                "alpha_params": self.alpha.params, "F_params": self.F.params,
                "chart": [list(b) for b in self.bounds]}


class Interval(BlockMetric):
    """Flat line segment ``dt^2``."""

    shape = "Interval"

    def __init__(self, lo: float, hi: float, coord: str = "t"):
        self.coords = (coord,)
        self.bounds = ((float(lo), float(hi)),)
        self.dim = 1

    def _scalar(self, t):
        return np.zeros(np.shape(t))

    def _warps(self, t):
        return {}

    def profile(self, t):
        return np.ones((1,) + np.shape(t))

    def line_element(self, t):
        return [1.0], []

    def to_dict(self):
        return {"shape": self.shape, "chart": [list(self.bounds[0])]}

    def restricted(self, lo, hi, axis=0):
        a, b = self.bounds[0]
        if lo < a - 1e-12 or hi > b + 1e-12 or lo >= hi:
            raise DomainError(f"[{lo}, {hi}] is not inside [{a}, {b}]")
        return Interval(lo, hi, self.coords[0])


class Product(BlockMetric):
    """Riemannian product of blocks; curvature adds."""

    shape = "Product"

    def __init__(self, *factors: BlockMetric):
        if not factors:
            raise DomainError("product needs at least one factor")
        self.factors = tuple(factors)
        self.coords = tuple(c for f in factors for c in f.coords)
        self.bounds = tuple(b for f in factors for b in f.bounds)
        self.dim = sum(f.dim for f in factors)
        self._split = np.cumsum([0] + [len(f.coords) for f in factors])

    def _parts(self, x):
        return [x[self._split[i]:self._split[i + 1]] for i in range(len(self.factors))]

    def _scalar(self, *x):
        shape = np.broadcast_shapes(*(np.shape(xi) for xi in x))
        out = np.zeros(shape)
        for f, xs in zip(self.factors, self._parts(x)):
            out = out + f._scalar(*xs)
        return out

    def _warps(self, *x):
        out = {}
        for i, (f, xs) in enumerate(zip(self.factors, self._parts(x))):
            out.update({f"{k}[{i}]": v for k, v in f._warps(*xs).items()})
        return out

    def profile(self, *x):
        shape = np.broadcast_shapes(*(np.shape(xi) for xi in x))
        rows = [np.broadcast_to(f.profile(*xs), (len(f.profile(*xs)),) + shape)
                for f, xs in zip(self.factors, self._parts(x))]
        return np.concatenate(rows, axis=0)

    def line_element(self, *x):
        weights, spheres = [], []
        for f, xs in zip(self.factors, self._parts(x)):
            w, s = f.line_element(*xs)
            weights.extend(w)
            spheres.extend(s)
        return weights, spheres

    def chart_metric(self, point):
        # per-factor ordering: coords of each factor followed by its spheres
        point = np.asarray(point, dtype=float)
        k = len(self.coords)
        coords, angles = point[:k], point[k:]
        blocks, pos = [], 0
        for f, xs in zip(self.factors, self._parts(tuple(coords))):
            m = f.dim - len(f.coords)
            blocks.append(f.chart_metric(np.concatenate((np.asarray(xs, dtype=float), angles[pos:pos + m]))))
            pos += m
        d = sum(b.shape[0] for b in blocks)
        # reorder so all coordinates come first, then sphere angles
        order_coords, order_angles, off = [], [], 0
        for f, b in zip(self.factors, blocks):
            kc = len(f.coords)
            order_coords.extend(range(off, off + kc))
            order_angles.extend(range(off + kc, off + b.shape[0]))
            off += b.shape[0]
        perm = order_coords + order_angles
        full = np.zeros((d, d))
        off = 0
        for b in blocks:
            m = b.shape[0]
            full[off:off + m, off:off + m] = b
            off += m
        return full[np.ix_(perm, perm)]

    def to_dict(self):
        return {"shape": self.shape, "factors": [f.to_dict() for f in self.factors]}

    def restricted(self, lo, hi, axis=0):
        i = int(np.searchsorted(self._split[1:], axis, side="right"))
        local = axis - self._split[i]
        factors = list(self.factors)
        factors[i] = factors[i].restricted(lo, hi, local)
        return Product(*factors)


@dataclass(frozen=True)
class GluedPart:
    """Piece of a glued metric covering ``[lo, hi]`` of the gluing axis.

    The piece's own chart coordinate is ``global - shift``.
    """

    lo: float
    hi: float
    block: BlockMetric
    shift: float = 0.0
    label: str = ""


class Glued(BlockMetric):
    """Metrics on consecutive intervals of one axis, matched on product collars.

    ``collars`` lists ``(seam, half_width)`` pairs; the pieces on either side
    of a seam are products in the axis direction within the collar.
    """

    shape = "Glued"

    def __init__(self, parts: Sequence[GluedPart], axis: int = 0, collars: Sequence = ()):
        parts = sorted(parts, key=lambda p: p.lo)
        if not parts:
            raise DomainError("glued metric needs at least one part")
        dims = {p.block.dim for p in parts}
        ncoords = {len(p.block.coords) for p in parts}
        if len(dims) != 1 or len(ncoords) != 1:
            raise CollarMismatchError(f"glued parts have inconsistent dimensions {sorted(dims)}")
        for a, b in zip(parts, parts[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise CollarMismatchError(f"parts leave a gap or overlap at {a.hi} / {b.lo}",
                                          abs(a.hi - b.lo), a.hi)
        self.parts = tuple(parts)
        self.axis = axis
        self.collars = tuple(collars)
        first = parts[0].block
        self.coords = first.coords
        bounds = list(first.bounds)
        bounds[axis] = (parts[0].lo, parts[-1].hi)
        self.bounds = tuple(bounds)
        self.dim = first.dim

    @property
    def seams(self) -> list[float]:
        return [p.hi for p in self.parts[:-1]]

    def _index(self, s):
        s = np.asarray(s, dtype=float)
        edges = np.array([p.hi for p in self.parts[:-1]])
        return np.searchsorted(edges, s, side="right")

    def _dispatch(self, method, x, stack=False):
        x = [np.asarray(xi, dtype=float) for xi in x]
        shape = np.broadcast_shapes(*(xi.shape for xi in x))
        x = [np.broadcast_to(xi, shape) for xi in x]
        idx = self._index(x[self.axis])
        out = None
        for i, part in enumerate(self.parts):
            mask = idx == i
            if not np.any(mask):
                continue
            xs = [xi[mask] for xi in x]
            xs[self.axis] = xs[self.axis] - part.shift
            val = getattr(part.block, method)(*xs)
            if isinstance(val, dict):
                if out is None:
                    out = {}
                for k, v in val.items():
                    out.setdefault(k, np.full(shape, np.inf))[mask] = v
                continue
            val = np.asarray(val)
            if out is None:
                out = np.full(val.shape[:-1] + shape if stack else shape, np.nan)
            if stack:
                out[..., mask] = val
            else:
                out[mask] = val
        return out if out is not None else {}

    def _scalar(self, *x):
        return self._dispatch("_scalar", x)

    def _warps(self, *x):
        return self._dispatch("_warps", x)

    def profile(self, *x):
        return self._dispatch("profile", x, stack=True)

    def part_at(self, s) -> GluedPart:
        return self.parts[int(self._index(s))]

    def line_element(self, *x):
        part = self.part_at(x[self.axis])
        xs = list(x)
        xs[self.axis] = xs[self.axis] - part.shift
        return part.block.line_element(*xs)

    def chart_metric(self, point):
        point = np.array(point, dtype=float)
        part = self.part_at(point[self.axis])
        point[self.axis] -= part.shift
        return part.block.chart_metric(point)

    def to_dict(self):
        return {"shape": self.shape, "axis": self.axis,
                "parts": [{"interval": [p.lo, p.hi], "shift": p.shift, "label": p.label,
                           "block": p.block.to_dict()} for p in self.parts],
                "collars": [list(c) for c in self.collars]}


def block_oracle(block: BlockMetric, *x, h: float = 1e-3, angle: float = SPHERE_ANGLE,
                 richardson: bool = False) -> float:
    """:func:`fd_scalar_oracle` of a block's chart metric at coordinates ``x``."""
    return fd_scalar_oracle(block.chart_metric, block.chart_point(*x, angle=angle), h, richardson)


def compare_to_oracle(block: BlockMetric, *x, h: float = 1e-3, tol: float = 1e-4) -> dict:
    """Closed form versus oracle at one point, refining once by Richardson if marginal.

    The refinement (steps ``h`` and ``h/2``) is used when the plain relative
    deviation exceeds ``tol / 10``.
    """
    closed = float(np.asarray(block.scalar(*x)))
    oracle = block_oracle(block, *x, h=h)
    rel = abs(closed - oracle) / max(1.0, abs(oracle))
    refined = False
    if rel > tol / 10:
        oracle = block_oracle(block, *x, h=h, richardson=True)
        rel = abs(closed - oracle) / max(1.0, abs(oracle))
        refined = True
    return {"closed": closed, "oracle": oracle, "relative": rel, "refined": refined,
            "pass": rel <= tol}


# ---------------------------------------------------------------------------
# scans


@dataclass
class CurvatureGrid:
    """Sampled scalar curvature with its minimum and failure records."""

    coords: tuple[str, ...]
    points: np.ndarray
    R: np.ndarray
    errors: list = field(default_factory=list)

    @property
    def min_R(self) -> float:
        finite = self.R[np.isfinite(self.R)]
        return float(finite.min()) if finite.size else float("nan")

    @property
    def argmin(self) -> tuple:
        R = np.where(np.isfinite(self.R), self.R, np.inf)
        return tuple(float(v) for v in self.points[int(np.argmin(R))])

    @property
    def margin(self) -> float:
        return self.min_R

    @property
    def passed(self) -> bool:
        return not self.errors and bool(np.all(np.isfinite(self.R))) and self.min_R > 0

    def summary(self) -> dict:
        return {"min": self.min_R, "argmin": list(self.argmin), "pass": self.passed,
                "samples": int(self.R.size), "errors": self.errors[:20]}

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.coords, "R"])
        for pt, r in zip(self.points, self.R):
            w.writerow([repr(float(v)) for v in pt] + [repr(float(r))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self) -> str:
        return json.dumps(self.summary())


def _axis(bounds, n, margin):
    lo, hi = bounds
    return np.linspace(lo + margin, hi - margin, n)


def positivity_scan(m: BlockMetric, grid: int | Sequence[int] = 200, margin: float = GUARD,
                    axes: Sequence[np.ndarray] | None = None) -> CurvatureGrid:
    """Evaluate the closed-form scalar curvature on a tensor grid of the chart.

    Nonpositive warps and nonfinite values are recorded per sample instead of
    raising.  For glued metrics the gluing-axis samples always include the
    seams.
    """
    k = len(m.coords)
    if axes is None:
        sizes = [grid] * k if np.isscalar(grid) else list(grid)
        if min(sizes) < 16:
            raise DomainError("grid needs at least 16 points per axis")
        axes = [_axis(b, n, margin) for b, n in zip(m.bounds, sizes)]
        if isinstance(m, Glued):
            lo, hi = m.bounds[m.axis]
            extra = [s for s in m.seams if lo + margin <= s <= hi - margin]
            axes[m.axis] = np.unique(np.concatenate((axes[m.axis], extra)))
    full = tuple(len(a) for a in axes)
    if isinstance(m, Glued):
        cols = [g.ravel() for g in np.meshgrid(*axes, indexing="ij")]
    else:
        # open grids: separable fields are evaluated once per axis
        cols = list(np.meshgrid(*axes, indexing="ij", sparse=True))
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    errors = []

    def dense(v):
        v = np.asarray(v, dtype=float)
        return v.reshape(full) if v.size == len(pts) else np.broadcast_to(v, full)

    with np.errstate(all="ignore"):
        warps = m._warps(*cols)
        bad = np.zeros(len(pts), dtype=bool)
        for name, v in warps.items():
            nb = ~(dense(v).ravel() > 0)
            for i in np.flatnonzero(nb)[:5]:
                errors.append({"coords": pts[i].tolist(), "error": f"nonpositive {name}"})
            bad |= nb
        R = dense(m._scalar(*cols)).ravel()
    R = np.where(bad, np.nan, R)
    for i in np.flatnonzero(~np.isfinite(R) & ~bad)[:5]:
        errors.append({"coords": pts[i].tolist(), "error": "nonfinite curvature"})
    return CurvatureGrid(tuple(m.coords), pts, R, errors)
