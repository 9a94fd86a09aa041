"""Explicit metric deformations and their numerical certification.

A :class:`MetricPath` maps ``s in [0, 1]`` to a block metric.  The library
paths are

* :func:`lemma21_path`: the two-stage deformation of the torpedo metric
  written as ``dr^2 + alpha(r,t)^2 dt^2 + F(r)^2 ds_n^2``.  Stage one
  (``s in [0, 1/2]``) homotopes ``F`` from ``cos r`` to a concave cap equal
  to one near ``r = 0`` and the ``sin r`` inside ``alpha`` to the blend
  ``h``; stage two (``s in [1/2, 1]``) flattens ``alpha`` to one around
  ``t = pi/2`` by shrinking the cutoff there.
* :func:`delta_scaling_path`: linear variation of a radius parameter.
* :func:`concat` and :func:`reverse`.

:func:`verify_path_psc` scans every sampled metric for positive scalar
curvature and checks the path's own inequality constraints;
:func:`boundary_product_check` certifies the product structure on a collar.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curvature import BlockMetric, Field2, TripleBlock, positivity_scan
from .errors import DomainError, EndpointMismatchError, ParameterError
from .metrics import MetricSpec
from .warp import (GUARD, WarpFn, bump_fn, cap_fn, cosine_fn, h_blend_fn, lerp,
                   sine_fn)

__all__ = [
    "MetricPath",
    "PathReport",
    "CollarRegion",
    "lemma21_path",
    "delta_scaling_path",
    "convex_fault_path",
    "constant_path",
    "concat",
    "reverse",
    "metric_distance",
    "verify_path_psc",
    "boundary_product_check",
]

CONSTRAINT_TOL = 1e-10
ENDPOINT_TOL = 1e-10

# constraint function: (metric, open-grid axes) -> list of (name, values, lo, hi)
ConstraintFn = Callable[[BlockMetric, Sequence[np.ndarray]], list]


@dataclass
class MetricPath:
    """Parameterised family ``s -> BlockMetric`` on ``[0, 1]``.

    ``start``/``end`` are independently constructed declared endpoints
    (optional); ``constraints(s)`` returns the kind-specific constraint
    function to apply to the sample at ``s``.
    """

    at_fn: Callable[[float], BlockMetric]
    kind: str
    params: dict = field(default_factory=dict)
    start: BlockMetric | None = None
    end: BlockMetric | None = None
    constraints: Callable[[float], ConstraintFn | None] = lambda s: None
    breakpoints: tuple[float, ...] = ()

    def at(self, s: float) -> BlockMetric:
        s = float(s)
        if not (-1e-15 <= s <= 1 + 1e-15):
            raise DomainError(f"path parameter s={s} outside [0, 1]")
        return self.at_fn(min(max(s, 0.0), 1.0))

    def samples(self, n: int) -> np.ndarray:
        return np.linspace(0.0, 1.0, n)


def _probe_axes(m: BlockMetric, n: int = 33, margin: float = 1e-3):
    out = []
    for lo, hi in m.bounds:
        pad = margin * (hi - lo)
        out.append(np.linspace(lo + pad, hi - pad, n))
    return out


def metric_distance(m1: BlockMetric, m2: BlockMetric, n: int = 33) -> float:
    """Sup-norm distance of warp values and first derivatives on a probe grid."""
    if m1.dim != m2.dim or len(m1.coords) != len(m2.coords):
        return math.inf
    bounds = [(max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(m1.bounds, m2.bounds)]
    if any(hi <= lo for lo, hi in bounds):
        return math.inf
    axes = [np.linspace(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo), n) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    P1, P2 = m1.profile(*mesh), m2.profile(*mesh)
    if P1.shape != P2.shape:
        return math.inf
    return float(np.abs(P1 - P2).max())


# ---------------------------------------------------------------------------
# torpedo-to-product path family


def _alpha_field(mu: WarpFn, k: WarpFn, r_dom, t_dom, name="alpha", nu: WarpFn | None = None,
                 sigma: float = 0.0) -> Field2:
    """``alpha = 1 - m(t) + m(t) k(r)`` with ``m = mu (1 - sigma nu)``."""

    def jet(r, t):
        kv, k1, k2 = k.jet(r)
        m, m1, m2 = mu.jet(t)
        if nu is not None and sigma:
            c, c1, c2 = nu.jet(t)
            g, g1, g2 = 1.0 - sigma * c, -sigma * c1, -sigma * c2
            m, m1, m2 = m * g, m1 * g + m * g1, m2 * g + 2 * m1 * g1 + m * g2
        one_minus_k = 1.0 - kv
        return (1.0 - m * one_minus_k, m * k1, -m1 * one_minus_k,
                m * k2, m1 * k1, -m2 * one_minus_k)

    return Field2(jet, tuple(r_dom), tuple(t_dom), name, False,
                  {"k": k.kind, "sigma": float(sigma)})


def _lemma21_constraints(m: TripleBlock, axes):
    r, t = np.meshgrid(*axes, indexing="ij", sparse=True)
    a, ar, _, arr, _, _ = m.alpha.jet(r, t)
    _, Fr, _, Frr, _, _ = m.F.jet(r, t)
    tol = CONSTRAINT_TOL
    return [
        ("0 <= d_r alpha", ar, -tol, math.inf),
        ("d_r alpha <= 1", ar, -math.inf, 1.0 + tol),
        ("d_rr alpha <= 0", arr, -math.inf, tol),
        ("-1 <= d_r F", Fr, -1.0 - tol, math.inf),
        ("d_r F <= 0", Fr, -math.inf, tol),
        ("d_rr F <= 0", Frr, -math.inf, tol),
    ]


def lemma21_path(n: int = 3, b: float = 2.0, w: float = 0.3, eps: float = 0.2,
                 plateau: float = 0.6) -> MetricPath:
    """Two-stage deformation from the torpedo in ``(r, t)`` form to a product near ``t = pi/2``.

    Parameters
    ----------
    n : int
        Dimension of the round sphere factor (metric dimension ``n + 2``).
    b : float
        Cylinder length; ``t`` ranges over ``(-b, b + pi)``.
    w : float
        Width parameter of the blend ``h`` and of the cap replacing ``cos r``.
    eps : float
        Half-width of the cutoff ``mu`` around ``t = 0`` and ``t = pi``.
    plateau : float
        Half-width of the region around ``pi/2`` where ``alpha`` becomes one.
    """
    if n < 2:
        raise DomainError(f"lemma21_path needs n >= 2, got {n}")
    if not (0 < eps < math.pi / 4):
        raise ParameterError(f"cutoff width eps={eps} outside (0, pi/4)")
    if not (0 < plateau and math.pi / 2 - 2 * plateau > eps):
        raise ParameterError(f"plateau {plateau} does not fit inside the cutoff plateau")
    if not b > 0:
        raise ParameterError("b must be positive")
    r_dom = (0.0, math.pi / 2)
    t_dom = (-b, b + math.pi)
    mu = bump_fn(-eps, eps, math.pi - eps, math.pi + eps)
    nu = bump_fn(math.pi / 2 - 2 * plateau, math.pi / 2 - plateau,
                 math.pi / 2 + plateau, math.pi / 2 + 2 * plateau)
    cosr = cosine_fn(r_dom)
    sinr = sine_fn(r_dom)
    cap = cap_fn(w)
    h = h_blend_fn(w)

    def build(F: WarpFn, alpha: Field2):
        return TripleBlock(alpha, Field2.from_r(F, t_dom, F.kind), n, f_r=F)

    def at(s):
        if s <= 0.5:
            sigma = 2.0 * s
            F = lerp(cosr, cap, sigma)
            k = lerp(sinr, h, sigma)
            return build(F, _alpha_field(mu, k, r_dom, t_dom))
        sigma = 2.0 * s - 1.0
        return build(cap, _alpha_field(mu, h, r_dom, t_dom, nu=nu, sigma=sigma))

    start = build(cosr, _alpha_field(mu, sinr, r_dom, t_dom))
    end = build(cap, _alpha_field(mu, h, r_dom, t_dom, nu=nu, sigma=1.0))
    return MetricPath(at, "lemma21", {"n": n, "b": b, "w": w, "eps": eps, "plateau": plateau},
                      start, end, lambda s: _lemma21_constraints, (0.5,))


def convex_fault_path(n: int = 3, b: float = 2.0, eps: float = 0.2,
                      amplitude: float = 0.3) -> MetricPath:
    """Control path with ``F = cos r + s A sin^2(2r)``: convex and increasing near ``r = 0``.

    It violates ``-1 <= dF/dr <= 0`` once ``s A > 1/4`` and is meant to fail
    certification.
    """
    r_dom = (0.0, math.pi / 2)
    t_dom = (-b, b + math.pi)
    mu = bump_fn(-eps, eps, math.pi - eps, math.pi + eps)
    alpha = _alpha_field(mu, sine_fn(r_dom), r_dom, t_dom)

    def F_at(s):
        a = s * amplitude

        def jet(r):
            return (np.cos(r) + a * np.sin(2 * r) ** 2, -np.sin(r) + 2 * a * np.sin(4 * r),
                    -np.cos(r) + 8 * a * np.cos(4 * r))

        return WarpFn(jet, r_dom, "convex-fault", {"amplitude": a})

    def at(s):
        F = F_at(s)
        return TripleBlock(alpha, Field2.from_r(F, t_dom, F.kind), n, f_r=F)

    return MetricPath(at, "convex-fault", {"n": n, "b": b, "eps": eps, "amplitude": amplitude},
                      at(0.0), at(1.0), lambda s: _lemma21_constraints)


def delta_scaling_path(m: MetricSpec, delta0: float, delta1: float) -> MetricPath:
    """Metrics ``m`` with radius ``(1 - s) delta0 + s delta1``."""
    if not (delta0 > 0 and delta1 > 0):
        raise ParameterError("radii must be positive")
    m.with_delta(delta0)  # validates that the spec has a radius

    def at(s):
        return m.with_delta((1 - s) * delta0 + s * delta1).build()

    return MetricPath(at, "delta-scaling", {"spec": m.to_dict(), "delta0": delta0, "delta1": delta1},
                      m.with_delta(delta0).build(), m.with_delta(delta1).build())


def constant_path(m: BlockMetric) -> MetricPath:
    return MetricPath(lambda s: m, "custom", {"constant": True}, m, m)


def concat(p1: MetricPath, p2: MetricPath, tol: float = ENDPOINT_TOL) -> MetricPath:
    """Run ``p1`` on ``[0, 1/2]`` and ``p2`` on ``[1/2, 1]``."""
    d = metric_distance(p1.at(1.0), p2.at(0.0))
    if not d <= tol:
        raise EndpointMismatchError(f"p1(1) and p2(0) differ by {d:.3e}")

    def at(s):
        return p1.at(2 * s) if s <= 0.5 else p2.at(2 * s - 1)

    def cons(s):
        return p1.constraints(2 * s) if s <= 0.5 else p2.constraints(2 * s - 1)

    bps = tuple(0.5 * b for b in p1.breakpoints) + (0.5,) + tuple(0.5 + 0.5 * b for b in p2.breakpoints)
    return MetricPath(at, "concat", {"first": p1.kind, "second": p2.kind}, p1.start, p2.end, cons, bps)


def reverse(p: MetricPath) -> MetricPath:
    if p.kind == "reverse" and "inner" in p.params:
        return p.params["inner"]
    return MetricPath(lambda s: p.at(1 - s), "reverse", {"inner": p}, p.end, p.start,
                      lambda s: p.constraints(1 - s), tuple(1 - b for b in reversed(p.breakpoints)))


# ---------------------------------------------------------------------------
# certification


@dataclass
class PathReport:
    kind: str
    samples: list
    failures: list
    passed: bool
    extra: dict = field(default_factory=dict)

    @property
    def min_R(self) -> float:
        return min(s["min_R"] for s in self.samples) if self.samples else float("nan")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "pass": self.passed, "samples": self.samples,
                "failures": self.failures, **self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _violations(name, values, lo, hi, axes, s, limit=3):
    values = np.asarray(values)
    shape = tuple(len(a) for a in axes)
    values = np.broadcast_to(values, shape)
    bad = (values < lo) | (values > hi)
    out = []
    if np.any(bad):
        flat = np.flatnonzero(bad.ravel())
        excess = np.where(values < lo, lo - values, values - hi).ravel()[flat]
        for j in flat[np.argsort(-excess)][:limit]:
            idx = np.unravel_index(j, shape)
            out.append({"s": float(s), "coords": [float(a[i]) for a, i in zip(axes, idx)],
                        "constraint": name, "value": float(values[idx])})
    return out


def _residual(values, lo, hi):
    v = np.asarray(values)
    r = 0.0
    if np.isfinite(lo):
        r = max(r, float((lo - v).max()))
    if np.isfinite(hi):
        r = max(r, float((v - hi).max()))
    return r


def verify_path_psc(p: MetricPath, n_s: int = 50, grid: int | Sequence[int] = 200,
                    margin: float = GUARD, endpoints: bool = True) -> PathReport:
    """Certify positive scalar curvature and path constraints at ``n_s`` samples."""
    if n_s < 2:
        raise DomainError("need at least two path samples")
    samples, failures = [], []
    for s in p.samples(n_s):
        m = p.at(s)
        scan = positivity_scan(m, grid, margin)
        rec = {"s": float(s), "min_R": scan.min_R, "argmin": list(scan.argmin), "pass": scan.passed}
        if not scan.passed:
            failures.append({"s": float(s), "coords": list(scan.argmin), "constraint": "R > 0",
                             "value": scan.min_R})
            failures.extend({"s": float(s), **e, "constraint": "evaluable", "value": float("nan")}
                            for e in scan.errors[:3])
        cfn = p.constraints(s)
        if cfn is not None:
            sizes = [grid] * len(m.coords) if np.isscalar(grid) else list(grid)
            axes = [np.linspace(lo + margin, hi - margin, k) for (lo, hi), k in zip(m.bounds, sizes)]
            resid = {}
            for name, values, lo, hi in cfn(m, axes):
                resid[name] = _residual(values, lo, hi)
                v = _violations(name, values, lo, hi, axes, s)
                if v:
                    rec["pass"] = False
                    failures.extend(v)
            rec["constraint_residuals"] = resid
        samples.append(rec)
    extra = {}
    if endpoints:
        ends = {}
        if p.start is not None:
            ends["start"] = metric_distance(p.at(0.0), p.start)
        if p.end is not None:
            ends["end"] = metric_distance(p.at(1.0), p.end)
        for key, d in ends.items():
            if not d <= ENDPOINT_TOL:
                failures.append({"s": 0.0 if key == "start" else 1.0, "coords": [],
                                 "constraint": f"{key} endpoint", "value": d})
        extra["endpoint_deviation"] = ends
    passed = not failures and all(r["pass"] for r in samples)
    return PathReport(p.kind, samples, failures, passed, extra)


@dataclass(frozen=True)
class CollarRegion:
    """Box ``[lo, hi]`` of coordinate ``axis``; other coordinates are sampled fully."""

    axis: int
    lo: float
    hi: float
    samples: int = 21
    cross_samples: int = 33


def boundary_product_check(p: MetricPath, collar: CollarRegion, n_s: int = 21,
                           relative: bool = True, tol: float = 1e-10,
                           reference: BlockMetric | None = None) -> PathReport:
    """Check that every sampled metric is a product on the collar.

    Warp values and first derivatives must be constant along the collar axis
    and, when ``relative`` is set, equal to those of the fixed reference
    metric (``p(0)`` unless given) for every ``s``.
    """
    ref = reference if reference is not None else p.at(0.0)

    def grid(m):
        axes = []
        for i, (lo, hi) in enumerate(m.bounds):
            if i == collar.axis:
                if collar.lo < lo - 1e-12 or collar.hi > hi + 1e-12:
                    raise DomainError(f"collar [{collar.lo}, {collar.hi}] outside chart [{lo}, {hi}]")
                axes.append(np.linspace(max(collar.lo, lo + GUARD), min(collar.hi, hi - GUARD),
                                        collar.samples))
            else:
                pad = 1e-3 * (hi - lo)
                axes.append(np.linspace(lo + pad, hi - pad, collar.cross_samples))
        return axes

    axes = grid(ref)
    mesh = np.meshgrid(*axes, indexing="ij")
    P0 = ref.profile(*mesh)
    samples, failures = [], []
    for s in p.samples(n_s):
        m = p.at(s)
        P = m.profile(*mesh)
        along = float(np.abs(P - np.take(P, [0], axis=1 + collar.axis)).max())
        drift = float(np.abs(P - P0).max()) if P.shape == P0.shape else math.inf
        ok = along <= tol and (not relative or drift <= tol)
        samples.append({"s": float(s), "axis_deviation": along, "reference_deviation": drift, "pass": ok})
        if not ok:
            bad = along if along > tol else drift
            diff = np.abs(P - (np.take(P, [0], axis=1 + collar.axis) if along > tol else P0))
            idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
            coords = [float(a[i]) for a, i in zip(axes, idx[1:])]
            failures.append({"s": float(s), "coords": coords,
                             "constraint": "product along collar" if along > tol else "fixed boundary metric",
                             "value": bad})
    return PathReport(p.kind, samples, failures, not failures,
                      {"collar": {"axis": collar.axis, "lo": collar.lo, "hi": collar.hi},
                       "relative": relative})
