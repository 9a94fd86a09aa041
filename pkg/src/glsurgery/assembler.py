"""Gromov-Lawson cobordism metric in rotationally symmetric model coordinates.

The model cobordism is the trace of a surgery on ``S^p`` inside
``S^n = S^{p+q+1}`` (``n + 1 = p + q + 2``).  The boundary metric ``g0`` is
``drho^2 + u0(rho)^2 ds_p^2 + v0(rho)^2 ds_q^2`` and is standard,
``eps0^2 ds_p^2 + drho^2 + f_delta(rho)^2 ds_q^2``, on the tube ``rho <= rho_N``.

Region charts

* ``outer``: ``(rho, t) in [rho_N, L] x [0, 1]`` with ``g0 + dt^2``;
* ``U_0``:   ``(rho, t) in [0, rho_N] x [0, c0]`` with ``g0|_N + dt^2``;
* ``U_w``:   handle block ``(a, b) in (0, A] x (0, rho_N]`` with
  ``da^2 + u(a)^2 ds_p^2 + db^2 + f_delta(b)^2 ds_q^2``, standard
  ``ḡ_tor^{p+1}(eps) + g_tor^{q+1}(delta)`` for ``a <= a_s`` and a cutoff
  transition of the ``S^p`` radius from ``eps`` to ``eps0`` beyond;
* ``U_1``:   ``(a, t) in (0, A] x [c1, 1]`` with ``g1|_handle + dt^2``.

Seams between charts are certified by sampling warp radii on both sides of
each collar.  The level metric ``g1`` glues the handle cap to ``g0`` off the
tube.  The region decomposition itself lives in the normal-form chart
``f = 1/2 - |a|^2 + |b|^2`` with the Euclidean gradient as vector field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import ortho_group

from .curvature import (BlockMetric, DoublyWarp, Glued, Interval, Product, SingleWarp,
                        positivity_scan)
from .errors import (DomainError, GeometryError, NonStandardMetricError, ParameterError)
from .metrics import CollarSpec, glue_product_collar, mixed_torpedo_metric
from .singular import (MorseTripleModel, PolynomialFamily, find_critical_points,
                       trajectory_flow, unfolding_family)
from .warp import (TorpedoParams, WarpFn, constant_fn, cutoff_fn, smoothstep, torpedo_fn)

__all__ = [
    "RegionDecomposition",
    "BoundaryModelMetric",
    "ModelCobordismMetric",
    "FamilySlice",
    "BlockFamily",
    "normal_form_model",
    "decompose_regions",
    "bend_hypersurface",
    "assemble_gl_cobordism",
    "equivariance_probe",
    "axis_biased",
    "theorem12_block_family",
]

SEAM_TOL = 1e-10


# ---------------------------------------------------------------------------
# region decomposition in the normal-form chart


def normal_form_model(p: int, q: int, radius: float = 1.5) -> MorseTripleModel:
    """``f = 1/2 - |a|^2 + |b|^2`` on ``R^{p+1} x R^{q+1}`` with the Euclidean gradient."""
    m = p + q + 2
    terms = [(0.5, [0] * m)]
    for i in range(m):
        e = [0] * m
        e[i] = 2
        terms.append((-1.0 if i <= p else 1.0, e))
    f = PolynomialFamily(terms, 0, m, "normal-form")
    model = MorseTripleModel.euclidean(f, [(-radius, radius)] * m, seeds=3)
    model.p, model.q = p, q
    return model


@dataclass
class RegionDecomposition:
    """``U = {|a| |b| < kappa_N}`` split by the levels ``c0 < 1/2 < c1``.

    Points are written in the radial quarter plane ``(A, B) = (|a|, |b|)``.
    ``kappa_N = rho_N sqrt(1/2 + rho_N^2)`` is the trajectory invariant
    ``A B`` of the tube boundary ``{B = rho_N}`` on ``f = 0``.
    """

    p: int
    q: int
    c: float
    c0: float
    c1: float
    rho_N: float
    kappa_N: float
    chart_error: float
    measures: dict
    boundary: dict
    radius: float = 1.5

    def region_of(self, A, B) -> np.ndarray:
        A, B = np.broadcast_arrays(np.asarray(A, dtype=float), np.asarray(B, dtype=float))
        f = 0.5 - A**2 + B**2
        out = np.full(A.shape, "", dtype=object)
        inside = (f >= 0) & (f <= 1)
        inU = inside & (A * B < self.kappa_N)
        out[inside & ~inU] = "outer"
        out[inU & (f <= self.c0)] = "U_0"
        out[inU & (f > self.c0) & (f < self.c1)] = "U_w"
        out[inU & (f >= self.c1)] = "U_1"
        return out

    def chart(self, rho, t):
        """Trajectory chart ``(x in X_0, t) -> psi_x(t)`` with ``f(psi_x(t)) = t``.

        ``rho`` is the radius ``|b|`` of the starting point on ``f = 0``.
        """
        rho = np.asarray(rho, dtype=float)
        kappa = rho * np.sqrt(0.5 + rho**2)
        d = np.asarray(t, dtype=float) - 0.5
        B2 = 0.5 * (d + np.sqrt(d**2 + 4 * kappa**2))
        B = np.sqrt(B2)
        with np.errstate(divide="ignore", invalid="ignore"):
            A = np.where(B > 0, kappa / np.where(B > 0, B, 1.0), np.sqrt(np.maximum(-d, 0.0)))
        return A, B

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "critical_value": self.c, "c0": self.c0, "c1": self.c1,
                "rho_N": self.rho_N, "kappa_N": self.kappa_N, "chart_error": self.chart_error,
                "measures": self.measures, "boundary": self.boundary}


_BOUNDARY_LABELS = ("S^p x D^{q+1}", "S^p x S^q x I", "D^{p+1} x S^q")


def decompose_regions(f: MorseTripleModel, c0: float, c1: float, rho_N: float,
                      injectivity: float = 1.0, grid: int = 400,
                      flow_checks: int = 5) -> RegionDecomposition:
    """Split the model cobordism into ``outer``, ``U_0``, ``U_w``, ``U_1``.

    The trajectory chart is checked against :func:`trajectory_flow` (unit
    rate) at ``flow_checks`` starting radii; measures of the regions are
    quadrature areas in the radial quarter plane.
    """
    if not (0.0 < c0 < 0.5 < c1 < 1.0):
        raise DomainError(f"levels must satisfy 0 < c0 < 1/2 < c1 < 1, got c0={c0}, c1={c1}")
    if not (0.0 < rho_N < injectivity):
        raise DomainError(f"tube radius rho_N={rho_N} must lie in (0, {injectivity})")
    crit = f.crit()
    if len(crit) != 1 or crit[0].kind != "Morse":
        raise DomainError("decomposition needs exactly one nondegenerate critical point")
    w = crit[0]
    c = float(f.f(w.x))
    if abs(c - 0.5) > 1e-12:
        raise DomainError(f"critical value must be 1/2, got {c}")
    p = getattr(f, "p", w.index - 1)
    q = getattr(f, "q", f.f.m - w.index - 1)
    if w.index != p + 1:
        raise DomainError(f"critical point has index {w.index}, expected p + 1 = {p + 1}")
    kappa = rho_N * math.sqrt(0.5 + rho_N**2)
    radius = float(np.abs(np.asarray(f.region)).max())
    d = RegionDecomposition(p, q, c, c0, c1, rho_N, kappa, 0.0, {}, {}, radius)
    # chart versus integrated unit-rate trajectories
    err = 0.0
    m = f.f.m
    for rho in np.linspace(0.1 * rho_N, rho_N, flow_checks):
        A0, B0 = d.chart(rho, 0.0)
        x0 = np.zeros(m)
        x0[0], x0[p + 1] = A0, B0
        tr = trajectory_flow(f, x0, unit_rate=True, until_time=c0, crit_radius=1e-3)
        A1, B1 = d.chart(rho, tr.t[-1])
        err = max(err, float(np.hypot(tr.end[0] - A1, tr.end[p + 1] - B1)))
    d.chart_error = err
    # radial quarter-plane areas
    s = np.linspace(0.0, radius, grid)
    h = s[1] - s[0]
    A, B = np.meshgrid(s + h / 2, s + h / 2, indexing="ij")
    labels = d.region_of(A, B)
    d.measures = {k: float(np.sum(labels == k) * h * h) for k in ("outer", "U_0", "U_w", "U_1")}
    d.measures["U"] = d.measures["U_0"] + d.measures["U_w"] + d.measures["U_1"]
    # boundary of U: incoming tube, side, outgoing tube of the belt sphere
    r = np.linspace(0.0, rho_N, 5)
    tt = np.linspace(0.0, 1.0, 5)
    side = [d.chart(rho_N, t) for t in tt]
    out_face = [d.chart(x, 1.0) for x in r]
    d.boundary = {
        _BOUNDARY_LABELS[0]: {"level": 0.0, "points": [list(map(float, d.chart(x, 0.0))) for x in r]},
        _BOUNDARY_LABELS[1]: {"invariant": kappa, "points": [list(map(float, pt)) for pt in side]},
        _BOUNDARY_LABELS[2]: {"level": 1.0, "points": [list(map(float, pt)) for pt in out_face]},
    }
    return d


# ---------------------------------------------------------------------------
# boundary metric


@dataclass
class BoundaryModelMetric:
    """Rotationally symmetric psc metric on ``S^{p+q+1}``, standard near ``S^p``.

    The default is the mixed torpedo ``drho^2 + f_eps0(L - rho)^2 ds_p^2 +
    f_delta(rho)^2 ds_q^2``; it is standard for ``rho <= L - eps0 pi/2``.
    """

    p: int
    q: int
    eps0: float
    delta: float
    L: float = 1.0
    w: float = 0.7
    block: DoublyWarp | None = None

    def __post_init__(self):
        if self.q < 2:
            raise DomainError(f"surgery needs codimension q + 1 >= 3, got q={self.q}")
        if self.block is None:
            self.block = mixed_torpedo_metric(self.p, self.q, self.eps0, self.delta, self.L, self.w)

    @property
    def standard_radius(self) -> float:
        return self.L - self.eps0 * math.pi / 2

    @property
    def n(self) -> int:
        return self.p + self.q + 1

    def standard_deviation(self, rho_N: float, samples: int = 64) -> float:
        """Sup distance of ``(u0, v0)`` from ``(eps0, f_delta)`` on ``(0, rho_N]``."""
        rho = np.linspace(1e-6, rho_N, samples)
        ref = torpedo_fn(TorpedoParams(self.delta, max(rho_N, self.delta * math.pi / 2) + 1.0, self.w))
        u = self.block.u.jet(rho)
        v = self.block.v.jet(rho)
        r = ref.jet(rho)
        dev = max(float(np.abs(u[0] - self.eps0).max()), float(np.abs(u[1]).max()))
        return max(dev, float(np.abs(v[0] - r[0]).max()), float(np.abs(v[1] - r[1]).max()))

    def require_standard(self, rho_N: float, tol: float = 1e-12) -> None:
        dev = self.standard_deviation(rho_N)
        if not dev <= tol:
            raise NonStandardMetricError(
                f"g0 is not standard on the tube rho <= {rho_N} (deviation {dev:.3e}); "
                "preprocess the fibre with bend_hypersurface or a delta-scaling isotopy")

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "eps0": self.eps0, "delta": self.delta, "L": self.L,
                "w": self.w}


# ---------------------------------------------------------------------------
# bending


def bend_hypersurface(F: WarpFn, c: WarpFn, rho_N: float | None = None, tail: float = 0.05,
                      panels: int = 2000, tol: float = 1e-12) -> WarpFn:
    """Induced radial warp of the graph ``{(rho, theta, c(rho))}`` in ``fibre x R``.

    The induced metric ``(1 + c'^2) drho^2 + F(rho)^2 ds_q^2`` is
    reparameterised by arclength ``s``; the returned warp is ``F(rho(s))``
    with exact chain-rule derivatives.  ``c`` must vanish with its slope on
    the last ``tail`` fraction of ``(0, rho_N]``.
    """
    lo, hi = F.domain
    hi = float(rho_N) if rho_N is not None else hi
    if c.domain[0] > lo + 1e-12 or c.domain[1] < hi - 1e-12:
        raise DomainError("push-out curve does not cover the fibre radius interval")
    rt = np.linspace(hi - tail * (hi - lo), hi, 50)
    cv, c1, _ = c.jet(rt)
    if not (np.abs(cv).max() <= tol and np.abs(c1).max() <= tol):
        raise DomainError(f"push-out curve does not vanish near rho_N = {hi} "
                          f"(|c| <= {np.abs(cv).max():.3e}, |c'| <= {np.abs(c1).max():.3e})")
    xg, wg = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(lo, hi, panels + 1)

    def J(r):
        return np.sqrt(1.0 + c.jet(r)[1] ** 2)

    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    cell = (J(mid[:, None] + half[:, None] * xg[None, :]) * wg).sum(axis=1) * half
    S = np.concatenate(([0.0], np.cumsum(cell)))

    def s_of(r):
        i = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, panels - 1)
        a = edges[i]
        hh = 0.5 * (r - a)
        nodes = (a + hh)[..., None] + hh[..., None] * xg
        return S[i] + (J(nodes) * wg).sum(axis=-1) * hh

    def rho_of(s):
        s = np.asarray(s, dtype=float)
        r = np.interp(s, S, edges)
        for _ in range(8):
            r = np.clip(r - (s_of(r) - s) / J(r), lo, hi)
        return r

    def jet(s):
        r = rho_of(s)
        f, f1, f2 = F.jet(r)
        _, k1, k2 = c.jet(r)
        j2 = 1.0 + k1**2
        return f, f1 / np.sqrt(j2), f2 / j2 - f1 * k1 * k2 / j2**2

    return WarpFn(jet, (0.0, float(S[-1])), "bent", {"from": F.kind, "curve": c.kind,
                                                      "length": float(S[-1])})


# ---------------------------------------------------------------------------
# assembly


@dataclass
class ModelCobordismMetric:
    """Per-region block metrics with seam certificates and the level metric ``g1``."""

    decomposition: RegionDecomposition
    regions: dict
    certificates: list
    params: dict
    level: BlockMetric
    g0: BoundaryModelMetric
    u: WarpFn
    axis_bias: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.certificates)

    def scans(self, grid: int = 64) -> dict:
        return {name: positivity_scan(m, grid) for name, m in self.regions.items()}

    def warp_profile(self, a) -> np.ndarray:
        """Handle ``S^p`` radius ``u(a)`` and slope; the family comparison key."""
        v, d1, _ = self.u.jet(np.asarray(a, dtype=float))
        return np.stack((v, d1))

    def ambient_metric(self, region: str, coords, theta_p, theta_q) -> np.ndarray:
        """Metric in ``(coords, R^{p+1}, R^{q+1})`` with spheres embedded as unit vectors."""
        m = self.regions[region]
        weights, spheres = m.line_element(*coords)
        dims = {s[1]: s for s in spheres}
        p, q = self.g0.p, self.g0.q
        tp, tq = np.asarray(theta_p, dtype=float), np.asarray(theta_q, dtype=float)
        wp = spheres[0][0] if spheres and spheres[0][1] == p else 0.0
        wq = spheres[-1][0] if spheres and spheres[-1][1] == q else 0.0
        del dims
        k = len(weights)
        G = np.zeros((k + p + 1 + q + 1,) * 2)
        diag = np.array(weights, dtype=float)
        if self.axis_bias:
            diag = diag.copy()
            diag[0] *= 1.0 + self.axis_bias * tp[0] ** 2
        G[:k, :k] = np.diag(diag)
        G[k:k + p + 1, k:k + p + 1] = float(wp) * (np.eye(p + 1) - np.outer(tp, tp))
        G[k + p + 1:, k + p + 1:] = float(wq) * (np.eye(q + 1) - np.outer(tq, tq))
        return G

    def certificate_bundle(self, grid: int = 64, equivariance: dict | None = None) -> dict:
        scans = self.scans(grid)
        return {"params": self.params, "decomposition": self.decomposition.to_dict(),
                "seams": self.certificates,
                "scans": [{"region": k, **g.summary()} for k, g in scans.items()],
                "equivariance": equivariance or {},
                "pass": self.passed and all(g.passed for g in scans.values())
                and (equivariance or {}).get("pass", True)}


def _radii(m: BlockMetric, x) -> tuple:
    _, spheres = m.line_element(*x)
    return tuple(math.sqrt(float(w)) for w, _ in spheres)


def _seam(name, left, right, cross, width, samples=9, tol=SEAM_TOL) -> dict:
    """Compare sphere radii of two charts over ``[0, width]`` on each side of a seam.

    ``left(c, d)`` and ``right(c, d)`` map a cross coordinate and a distance
    from the seam to chart points of the two blocks ``(block, point)``.
    """
    worst, where = 0.0, None
    for cc in cross:
        bl, pt = left(cc, 0.0)
        ref = np.array(_radii(bl, pt))
        for d in np.linspace(0.0, width, samples):
            for side in (left, right):
                blk, pt = side(cc, d)
                r = np.array(_radii(blk, pt))
                dev = float(np.abs(r - ref).max()) if r.shape == ref.shape else math.inf
                if dev > worst:
                    worst, where = dev, {"cross": float(cc), "distance": float(d),
                                         "side": "left" if side is left else "right"}
    return {"seam": name, "deviation": worst, "location": where, "pass": worst <= tol}


def _handle_warp(g0: BoundaryModelMetric, eps: float, A: float, a1: float, a2: float,
                 lam: float = 1.0) -> WarpFn:
    """``u(a) = (1 - lam) eps0 + lam (f_eps(a) + chi(a) (eps0 - eps))``."""
    f = torpedo_fn(TorpedoParams(eps, A, g0.w))
    chi = cutoff_fn(a1, a2)
    e0, lam = float(g0.eps0), float(lam)

    def jet(a):
        v, d1, d2 = f.jet(a)
        x, x1, x2 = chi.jet_fn(np.asarray(a, dtype=float))
        if lam == 1.0:
            return v + x * (e0 - eps), d1 + x1 * (e0 - eps), d2 + x2 * (e0 - eps)
        return ((1 - lam) * e0 + lam * (v + x * (e0 - eps)), lam * (d1 + x1 * (e0 - eps)),
                lam * (d2 + x2 * (e0 - eps)))

    return WarpFn(jet, (0.0, A), "handle", {"eps": eps, "eps0": e0, "a1": a1, "a2": a2, "lambda": lam})


def assemble_gl_cobordism(g0: BoundaryModelMetric, d: RegionDecomposition, eps: float,
                          delta: float, collar: float | None = None, transition: float | None = None,
                          _lam: float = 1.0) -> ModelCobordismMetric:
    """Piecewise metric on the model cobordism extending ``g0`` with product ends.

    ``delta`` must be the fibre radius of ``g0`` on the tube; ``eps`` is the
    handle radius, joined to the ``S^p`` radius ``eps0`` of ``g0`` by a
    cutoff along the handle coordinate.
    """
    if g0.q < 2:
        raise DomainError("assembly needs q >= 2")
    if (g0.p, g0.q) != (d.p, d.q):
        raise DomainError(f"decomposition is for (p, q) = {(d.p, d.q)}, metric for {(g0.p, g0.q)}")
    if not (eps > 0 and delta > 0):
        raise ParameterError("eps and delta must be positive")
    if abs(delta - g0.delta) > 1e-15:
        raise NonStandardMetricError(
            f"g0 has fibre radius {g0.delta} on the tube, assembly asked for delta={delta}; "
            "rescale the fibre first (delta-scaling isotopy or bend_hypersurface)")
    rho_N = d.rho_N
    cap = delta * math.pi / 2
    if not rho_N > cap:
        raise DomainError(f"tube radius rho_N={rho_N} must exceed the torpedo cap delta*pi/2={cap:.6g}")
    wc = collar if collar is not None else 0.25 * (rho_N - cap)
    if not (0 < wc <= rho_N - cap) or rho_N + wc > g0.standard_radius:
        raise DomainError(f"collar width {wc} does not fit between the cap and the standard radius")
    g0.require_standard(min(rho_N + wc, g0.standard_radius))
    a1 = eps * math.pi / 2 + wc
    # the radius change eps -> eps0 is spread so that |u''| stays small
    gap = abs(g0.eps0 - eps)
    a2 = a1 + (transition if transition is not None else wc + 10.0 * gap)
    A = a2 + 2 * wc
    u = _handle_warp(g0, eps, A, a1, a2, _lam)
    v = torpedo_fn(TorpedoParams(delta, rho_N, g0.w))
    gb = g0.block
    L = g0.L

    outer = Product(gb.restricted(rho_N, L), Interval(0.0, 1.0))
    U0 = Product(gb.restricted(0.0, rho_N), Interval(0.0, d.c0))
    a_s = a1 - 0.5 * wc
    Hs = Product(SingleWarp(u.restrict(0.0, a_s), g0.p + 1, "a"), SingleWarp(v, g0.q + 1, "b"))
    Ht = Product(SingleWarp(u.restrict(a_s, A), g0.p + 1, "a"), SingleWarp(v, g0.q + 1, "b"))
    Uw = glue_product_collar(Hs, Ht, CollarSpec(0.25 * wc), axis=0, labels=("standard", "transition"))
    handle_level = DoublyWarp(u, constant_fn(delta, (0.0, A)), g0.p, g0.q, "a")
    U1 = Product(handle_level, Interval(d.c1, 1.0))
    level = glue_product_collar(handle_level, gb.restricted(rho_N, L), CollarSpec(wc), axis=0,
                                labels=("handle", "g0"))

    cross_rho = np.linspace(1e-3, rho_N, 9)
    cross_a = np.linspace(1e-3, A, 9)
    cross_t0 = np.linspace(0.0, d.c0, 5)
    cross_t1 = np.linspace(d.c1, 1.0, 5)
    certs = [
        _seam("outer|U_0", lambda c, s: (outer, (rho_N + s, c)), lambda c, s: (U0, (rho_N - s, c)),
              cross_t0, wc),
        _seam("U_0|U_w", lambda c, s: (U0, (c, d.c0 - s)), lambda c, s: (Uw, (A - s, c)),
              cross_rho, wc),
        _seam("U_w|U_1", lambda c, s: (Uw, (c, rho_N - s)), lambda c, s: (U1, (c, d.c1 + s)),
              cross_a, wc),
        _seam("U_w|outer", lambda c, s: (outer, (rho_N + s, 0.5)), lambda c, s: (Uw, (A - c, rho_N - s)),
              np.linspace(0.0, wc, 5), wc),
        _seam("U_1|outer", lambda c, s: (outer, (rho_N + s, c)), lambda c, s: (U1, (A - s, c)),
              cross_t1, wc),
    ]
    for label, g in (("U_w", Uw), ("g1", level)):
        for cert in g.certificates:
            certs.append({"seam": f"{label}@{cert['seam']:.6g}", "deviation": cert["deviation"],
                          "location": cert["location"], "pass": cert["deviation"] <= SEAM_TOL})
    params = {"p": g0.p, "q": g0.q, "epsilon": eps, "delta": delta, "eps0": g0.eps0, "L": L,
              "rho_N": rho_N, "c0": d.c0, "c1": d.c1, "collar": wc, "handle_length": A,
              "a_standard": a_s, "lambda": _lam}
    return ModelCobordismMetric(d, {"outer": outer, "U_0": U0, "U_w": Uw, "U_1": U1}, certs,
                                params, level, g0, u)


def axis_biased(m: ModelCobordismMetric, beta: float = 0.1) -> ModelCobordismMetric:
    """Fault-injection copy whose first chart weight depends on a fixed ``S^p`` axis."""
    return ModelCobordismMetric(m.decomposition, m.regions, m.certificates, m.params, m.level,
                                m.g0, m.u, axis_bias=float(beta))


def _unit(rng, k):
    v = rng.standard_normal(k)
    return v / np.linalg.norm(v)


def equivariance_probe(m: ModelCobordismMetric, rotations: Sequence[tuple] | int = 20,
                       seed: int = 0, points: int = 6) -> dict:
    """Pull back the assembled metric through ``O(p+1) x O(q+1)`` and compare.

    ``rotations`` is a list of ``(Q_p, Q_q)`` pairs or a count of seeded
    random pairs.  The rotated input ``g0`` equals ``g0`` (it is invariant),
    so the assembly of rotated data is the assembled metric itself.
    """
    p, q = m.g0.p, m.g0.q
    rng = np.random.default_rng(seed)
    if isinstance(rotations, int):
        rotations = [(ortho_group.rvs(p + 1, random_state=rng) if p + 1 > 1 else np.eye(1) * rng.choice([-1, 1]),
                      ortho_group.rvs(q + 1, random_state=rng)) for _ in range(rotations)]
    for Qp, Qq in rotations:
        for Q in (Qp, Qq):
            Q = np.atleast_2d(Q)
            if np.abs(Q.T @ Q - np.eye(len(Q))).max() > 1e-12:
                raise ParameterError("probe rotation is not orthogonal to 1e-12")
    probes = []
    for name, block in m.regions.items():
        for _ in range(points):
            x = [lo + (hi - lo) * (0.05 + 0.9 * rng.random()) for lo, hi in block.bounds]
            probes.append((name, x, _unit(rng, p + 1), _unit(rng, q + 1)))
    worst, rows = 0.0, []
    for Qp, Qq in rotations:
        Qp, Qq = np.atleast_2d(Qp), np.atleast_2d(Qq)
        dev_r = 0.0
        for name, x, tp, tq in probes:
            G = m.ambient_metric(name, x, tp, tq)
            Gr = m.ambient_metric(name, x, Qp @ tp, Qq @ tq)
            k = len(x)
            T = np.zeros_like(G)
            T[:k, :k] = np.eye(k)
            T[k:k + p + 1, k:k + p + 1] = Qp
            T[k + p + 1:, k + p + 1:] = Qq
            dev_r = max(dev_r, float(np.abs(T.T @ Gr @ T - G).max()))
        rows.append(dev_r)
        worst = max(worst, dev_r)
    return {"rotations": len(rows), "deviations": rows, "max_deviation": worst, "seed": seed,
            "pass": worst <= 1e-10}


# ---------------------------------------------------------------------------
# one-parameter family across a birth-death point


@dataclass
class FamilySlice:
    y: float
    lam: float
    metric: ModelCobordismMetric
    critical_points: list
    min_R: dict
    boundary: dict
    passed: bool


@dataclass
class BlockFamily:
    slices: list
    lipschitz: float
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.slices)

    def table(self) -> list[dict]:
        return [{"y": s.y, "lambda": s.lam, "critical_points": [p.label for p in s.critical_points],
                 "min_R": s.min_R, "boundary": s.boundary, "pass": s.passed} for s in self.slices]


def _slice_boundary(m: ModelCobordismMetric, g0: BoundaryModelMetric, collar_samples: int = 9) -> dict:
    """Incoming face equals ``g0|_N + dt^2`` and both faces are products."""
    P = m.params
    A, rho_N, wc = P["handle_length"], P["rho_N"], P["collar"]
    Uw = m.regions["U_w"]
    rho = np.linspace(1e-3, rho_N, 9)
    dev_in = 0.0
    for r in rho:
        ref = np.array([g0.block.u(r), g0.block.v(r)], dtype=float)
        for s in np.linspace(0.0, wc, collar_samples):
            dev_in = max(dev_in, float(np.abs(np.array(_radii(Uw, (A - s, r))) - ref).max()))
    dev_out = 0.0
    for a in np.linspace(1e-3, A, 9):
        ref = np.array(_radii(Uw, (a, rho_N)))
        for s in np.linspace(0.0, wc, collar_samples):
            dev_out = max(dev_out, float(np.abs(np.array(_radii(Uw, (a, rho_N - s))) - ref).max()))
    seams = max(c["deviation"] for c in m.certificates)
    ok = dev_in <= SEAM_TOL and dev_out <= SEAM_TOL and seams <= SEAM_TOL
    return {"incoming": dev_in, "outgoing": dev_out, "seams": seams, "pass": ok}


def theorem12_block_family(s: int, dims: tuple[int, int],
                           g0_path: Callable[[float], BoundaryModelMetric] | BoundaryModelMetric,
                           delta_y: float, eps_z: float, eps: float, delta: float,
                           slices: int = 21, c0: float = 0.4, c1: float = 0.6, rho_N: float | None = None,
                           grid: int = 32) -> BlockFamily:
    """Slice metrics ``y -> gbar(y)`` on the standard block ``|y| <= delta_y, |z| <= eps_z``.

    The handle weight ``lam(y)`` falls smoothly from 1 at ``-delta_y`` (the
    handle assembly of :func:`assemble_gl_cobordism`) to 0 at ``+delta_y``
    (the product ``g0(y) + dt^2``); the ``S^p`` radius of the handle block is
    ``(1 - lam) eps0 + lam u(a)``.  Each slice also records the critical
    points of the fibre function ``q_y``.
    """
    p, q = dims
    if not (delta_y > 0 and eps_z > 0):
        raise ParameterError("block parameters delta_y and eps_z must be positive")
    if not math.sqrt(delta_y) < eps_z:
        raise DomainError(f"critical points z = +-sqrt(delta_y) leave the block |z| <= {eps_z}")
    path = g0_path if callable(g0_path) else (lambda y, g=g0_path: g)
    F = unfolding_family(s, s + 2)
    model = normal_form_model(p, q)
    out, prev = [], None
    lip = 0.0
    ys = np.linspace(-delta_y, delta_y, slices)
    probe = None
    for y in ys:
        g0 = path(float(y))
        lam = 1.0 - float(smoothstep(np.array((y + delta_y) / (2 * delta_y)))[0])
        rn = rho_N if rho_N is not None else 2.0 * delta * math.pi / 2
        d = decompose_regions(model, c0, c1, rn, flow_checks=2, grid=50)
        m = assemble_gl_cobordism(g0, d, eps, delta, _lam=lam)
        crit = find_critical_points(F, [(-eps_z, eps_z)] + [(-1.0, 1.0)] * (F.m - 1), seeds=3, y=[y])
        scans = m.scans(grid)
        bnd = _slice_boundary(m, g0)
        ok = all(g.passed for g in scans.values()) and bnd["pass"]
        if probe is None:
            probe = np.linspace(1e-3, m.params["handle_length"], 65)
        prof = m.warp_profile(probe)
        if prev is not None:
            lip = max(lip, float(np.abs(prof - prev[1]).max()) / (y - prev[0]))
        prev = (y, prof)
        out.append(FamilySlice(float(y), lam, m, crit, {k: g.min_R for k, g in scans.items()}, bnd, ok))
    return BlockFamily(out, lip, {"s": s, "dims": [p, q], "delta_y": delta_y, "eps_z": eps_z,
                                  "epsilon": eps, "delta": delta, "slices": slices})
