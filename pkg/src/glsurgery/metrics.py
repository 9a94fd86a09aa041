"""Constructors for the standard metric zoo and product-collar gluing.

All constructors return :class:`~glsurgery.curvature.BlockMetric` values:

* round sphere ``dt^2 + sin^2 t ds_{n-1}^2``;
* torpedo and double torpedo metrics ``dt^2 + f(t)^2 ds_{n-1}^2``;
* mixed torpedo ``dt^2 + f_eps(b - t)^2 ds_p^2 + f_delta(t)^2 ds_q^2``;
* glued assemblies of pieces that are products on a shared collar.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curvature import BlockMetric, DoublyWarp, Glued, GluedPart, SingleWarp
from .errors import CollarMismatchError, DomainError, HypothesisWarning, ParameterError
from .warp import TorpedoParams, double_torpedo_fn, reflect, sine_fn, torpedo_fn

__all__ = [
    "MetricSpec",
    "CollarSpec",
    "round_metric",
    "torpedo_metric",
    "double_torpedo_metric",
    "mixed_torpedo_metric",
    "mixed_torpedo_hypotheses",
    "glue_product_collar",
    "collar_deviation",
]

COLLAR_TOL = 1e-10


def round_metric(n: int) -> SingleWarp:
    """Unit round ``S^n`` as ``dt^2 + sin^2(t) ds_{n-1}^2`` on ``(0, pi)``."""
    if n < 2:
        raise DomainError(f"round metric needs n >= 2, got {n}")
    return SingleWarp(sine_fn((0.0, math.pi)), n)


def torpedo_metric(n: int, p: TorpedoParams) -> SingleWarp:
    """Torpedo metric of radius ``delta`` on the ``n``-disk, cylinder end at ``t = b``."""
    return SingleWarp(torpedo_fn(p), n)


def double_torpedo_metric(n: int, p: TorpedoParams) -> SingleWarp:
    """Two torpedo caps joined along a cylinder; a smooth metric on ``S^n``."""
    return SingleWarp(double_torpedo_fn(p), n)


def mixed_torpedo_hypotheses(p: int, q: int) -> list[str]:
    """Return the violated conditions among ``n = p + q + 1 >= 3`` and ``max(p, q) >= 2``."""
    out = []
    if p + q + 1 < 3:
        out.append(f"n = p + q + 1 = {p + q + 1} < 3")
    if p < 2 and q < 2:
        out.append(f"neither p={p} nor q={q} is at least 2")
    return out


def mixed_torpedo_metric(p: int, q: int, eps: float, delta: float, b: float,
                         w: float = 0.7) -> DoublyWarp:
    """``dt^2 + f_eps(b - t)^2 ds_p^2 + f_delta(t)^2 ds_q^2`` on ``(0, b)``.

    Built even when the dimension hypotheses fail; the block then carries
    ``certified = False`` and a :class:`HypothesisWarning` is issued.
    """
    if p < 1 or q < 1:
        raise DomainError(f"mixed torpedo needs p, q >= 1, got ({p}, {q})")
    if not (eps > 0 and delta > 0):
        raise ParameterError("radii must be positive")
    if not b > (eps + delta) * math.pi / 2:
        raise ParameterError(f"mixed torpedo needs b > (eps + delta) pi/2, got b={b}")
    u = reflect(torpedo_fn(TorpedoParams(eps, b, w)), b)
    v = torpedo_fn(TorpedoParams(delta, b, w))
    m = DoublyWarp(u, v, p, q)
    m.violations = mixed_torpedo_hypotheses(p, q)
    m.certified = not m.violations
    m.params = {"p": p, "q": q, "epsilon": eps, "delta": delta, "b": b, "w": w}
    if m.violations:
        warnings.warn("mixed torpedo outside certified range: " + "; ".join(m.violations),
                      HypothesisWarning, stacklevel=2)
    return m


# ---------------------------------------------------------------------------
# gluing


@dataclass(frozen=True)
class CollarSpec:
    """Product collar of half-width ``width`` on each side of the seam."""

    width: float
    samples: int = 21
    cross_samples: int = 9
    tol: float = COLLAR_TOL


def _cross_grid(m: BlockMetric, axis: int, n: int):
    grids = []
    for i, (lo, hi) in enumerate(m.bounds):
        if i == axis:
            grids.append(None)
        else:
            pad = 1e-3 * (hi - lo)
            grids.append(np.linspace(lo + pad, hi - pad, n))
    return grids


def _profiles(m: BlockMetric, axis: int, s: np.ndarray, cross):
    axes = [s if g is None else g for g in cross]
    mesh = np.meshgrid(*axes, indexing="ij")
    return m.profile(*mesh)  # (k, *grid)


def collar_deviation(m1: BlockMetric, m2: BlockMetric, collar: CollarSpec, axis: int = 0):
    """Product-collar deviation between the top end of ``m1`` and the bottom of ``m2``.

    Returns ``(deviation, location)``: the largest change of any warp value
    or derivative across either collar or across the seam.
    """
    if m1.dim != m2.dim or len(m1.coords) != len(m2.coords):
        raise CollarMismatchError(
            f"cross-section dimensions differ ({m1.dim} vs {m2.dim})", math.inf, None)
    hi1 = m1.bounds[axis][1]
    lo2 = m2.bounds[axis][0]
    w = collar.width
    if w <= 0 or w > m1.bounds[axis][1] - m1.bounds[axis][0] or w > m2.bounds[axis][1] - lo2:
        raise DomainError(f"collar width {w} does not fit both pieces")
    cross = _cross_grid(m1, axis, collar.cross_samples)
    s1 = np.linspace(hi1 - w, hi1 - 1e-9 * max(1.0, abs(hi1)), collar.samples)
    s2 = np.linspace(lo2 + 1e-9 * max(1.0, abs(lo2)), lo2 + w, collar.samples)
    P1 = _profiles(m1, axis, s1, cross)
    P2 = _profiles(m2, axis, s2, cross)
    if P1.shape != P2.shape:
        raise CollarMismatchError(
            f"pieces have different warp structure ({P1.shape[0]} vs {P2.shape[0]} profile rows)",
            math.inf, None)
    ref = np.take(P1, [-1], axis=1 + axis)
    d1 = np.abs(P1 - ref)
    d2 = np.abs(P2 - ref)
    worst = max(float(d1.max()), float(d2.max()))
    side = 1 if d1.max() >= d2.max() else 2
    d = d1 if side == 1 else d2
    idx = np.unravel_index(int(np.argmax(d)), d.shape)
    s = (s1 if side == 1 else s2)[idx[1 + axis]]
    return worst, {"piece": side, "axis_coordinate": float(s), "profile_row": int(idx[0])}


def glue_product_collar(m1: BlockMetric, m2: BlockMetric, collar: CollarSpec | float,
                        axis: int = 0, labels: tuple[str, str] = ("", "")) -> Glued:
    """Glue ``m2`` after ``m1`` along coordinate ``axis``.

    Both pieces must be products over the same cross-section on the collar:
    every warp value and first derivative is constant across
    ``[hi1 - w, hi1]`` and ``[lo2, lo2 + w]`` and agrees across the seam to
    ``collar.tol``.  ``m2`` is translated so that its chart starts where
    ``m1`` ends.
    """
    if not isinstance(collar, CollarSpec):
        collar = CollarSpec(float(collar))
    dev, loc = collar_deviation(m1, m2, collar, axis)
    seam = m1.bounds[axis][1]
    if not dev <= collar.tol:
        raise CollarMismatchError(
            f"collar is not a common product: deviation {dev:.3e} at {loc}", dev, loc)
    lo2, hi2 = m2.bounds[axis]
    shift = seam - lo2
    if isinstance(m1, Glued) and m1.axis == axis:
        parts = list(m1.parts)
        certs = list(getattr(m1, "certificates", []))
        collars = list(m1.collars)
    else:
        parts = [GluedPart(m1.bounds[axis][0], seam, m1, 0.0, labels[0])]
        certs, collars = [], []
    parts.append(GluedPart(seam, hi2 + shift, m2, shift, labels[1]))
    g = Glued(parts, axis=axis, collars=collars + [(seam, collar.width)])
    g.certificates = certs + [{"seam": float(seam), "deviation": float(dev), "location": loc,
                               "pass": True}]
    return g


# ---------------------------------------------------------------------------
# JSON specs


_VARIANTS = ("Round", "Torpedo", "DoubleTorpedo", "MixedTorpedo", "GluedAssembly")


@dataclass
class MetricSpec:
    """JSON-serialisable description of a zoo metric.

    Field names: ``n`` (dimension), ``delta``, ``b``, ``w`` for torpedoes;
    ``p``, ``q``, ``epsilon``, ``delta``, ``b``, ``w`` for the mixed torpedo;
    ``parts`` (list of specs, each optionally with ``interval``) and
    ``collar`` (half-width) for glued assemblies.
    """

    variant: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ParameterError(f"unknown metric variant {self.variant!r}; expected one of {_VARIANTS}")

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSpec":
        if "variant" not in d:
            raise ParameterError("metric spec is missing 'variant'")
        d = dict(d)
        return cls(d.pop("variant"), d)

    @classmethod
    def from_json(cls, text: str) -> "MetricSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"variant": self.variant, **self.params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def _get(self, key, default=None, kind=float):
        if key not in self.params:
            if default is None:
                raise ParameterError(f"{self.variant} spec is missing '{key}'")
            return default
        try:
            return kind(self.params[key])
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"{self.variant}.{key}: {exc}") from None

    def torpedo_params(self) -> TorpedoParams:
        return TorpedoParams(self._get("delta"), self._get("b"), self._get("w", 0.7))

    def with_delta(self, delta: float) -> "MetricSpec":
        if "delta" not in self.params:
            raise ParameterError(f"{self.variant} spec has no delta parameter")
        return MetricSpec(self.variant, {**self.params, "delta": float(delta)})

    def build(self) -> BlockMetric:
        v = self.variant
        if v == "Round":
            return round_metric(self._get("n", kind=int))
        if v == "Torpedo":
            return torpedo_metric(self._get("n", kind=int), self.torpedo_params())
        if v == "DoubleTorpedo":
            return double_torpedo_metric(self._get("n", kind=int), self.torpedo_params())
        if v == "MixedTorpedo":
            return mixed_torpedo_metric(self._get("p", kind=int), self._get("q", kind=int),
                                        self._get("epsilon"), self._get("delta"), self._get("b"),
                                        self._get("w", 0.7))
        parts = self.params.get("parts")
        if not parts:
            raise ParameterError("GluedAssembly needs a non-empty 'parts' list")
        width = self._get("collar")
        out = None
        for i, part in enumerate(parts):
            block = MetricSpec.from_dict({k: x for k, x in part.items() if k != "interval"}).build()
            if "interval" in part:
                lo, hi = part["interval"]
                block = block.restricted(float(lo), float(hi))
            out = block if out is None else glue_product_collar(out, block, width)
        return out
