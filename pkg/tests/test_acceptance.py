"""Acceptance criteria; each prints one PASS/FAIL line in the terminal summary.

Run directly with ``python tests/test_acceptance.py`` for the lines alone.
"""

import itertools
import math
import time

import numpy as np
import pytest

from glsurgery.assembler import (BoundaryModelMetric, assemble_gl_cobordism, decompose_regions,
                                 equivariance_probe, normal_form_model, theorem12_block_family)
from glsurgery.curvature import (Field2, TripleBlock, compare_to_oracle, positivity_scan,
                                 scalar_doubly_warped, scalar_eq21, scalar_eq22,
                                 scalar_single_warped)
from glsurgery.isotopy import lemma21_path, verify_path_psc
from glsurgery.metrics import double_torpedo_metric, mixed_torpedo_metric, torpedo_metric
from glsurgery.singular import (MorseTripleModel, compatible_metric_check, find_critical_points,
                                gradient_like_check, singular_set_trace, unfolding_family)
from glsurgery.warp import TorpedoParams, cosine_fn, from_callable, sine_fn, torpedo_fn

R_DOM = (0.0, math.pi / 2)


def c1_round_normalisation():
    t0 = time.perf_counter()
    worst = 0.0
    t = np.linspace(0.01, math.pi - 0.01, 1000)
    for n in range(2, 8):
        worst = max(worst, np.abs(scalar_single_warped(sine_fn(), n, t) - n * (n - 1)).max())
    t = np.linspace(0.01, math.pi / 2 - 0.01, 1000)
    u, v = cosine_fn(), sine_fn((0.0, math.pi / 2))
    for p, q in itertools.product(range(1, 6), repeat=2):
        if p + q + 1 <= 7:
            R = scalar_doubly_warped(u, v, p, q, t)
            worst = max(worst, np.abs(R - (p + q + 1) * (p + q)).max())
    dt = time.perf_counter() - t0
    return worst <= 1e-9 and dt < 1.0, f"max deviation {worst:.2e}, {dt:.2f} s"


def _perturbed(rng):
    """Smooth positive alpha(r, t) and t-dependent F(r, t) with random coefficients."""
    a1, a2, k = rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.integers(1, 4)
    c1 = rng.uniform(-0.2, 0.2)

    def alpha(r, t):
        s = np.sin(k * t)
        e = a1 * s + a2 * np.cos(t)
        et = a1 * k * np.cos(k * t) - a2 * np.sin(t)
        ett = -a1 * k * k * s - a2 * np.cos(t)
        return 1 + e * r ** 2, 2 * e * r, et * r ** 2, 2 * e, 2 * et * r, ett * r ** 2

    def F(r, t):
        g, gt, gtt = 1 + c1 * np.sin(t), c1 * np.cos(t), -c1 * np.sin(t)
        c, s = np.cos(r), np.sin(r)
        return c * g, -s * g, c * gt, -c * g, -s * gt, c * gtt

    t_dom = (-2.0, 2.0 + math.pi)
    return TripleBlock(Field2(alpha, R_DOM, t_dom), Field2(F, R_DOM, t_dom), 3)


def c2_oracle_agreement():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    cases = {"alpha=1, F=sin r": TripleBlock(Field2.constant(1.0, R_DOM, (0.0, 1.0)),
                                             Field2.from_r(sine_fn(R_DOM), (0.0, 1.0)), 3)}
    path = lemma21_path(n=3)
    for sigma in (0.0, 0.5, 1.0):
        cases[f"stage 1, s={sigma}"] = path.at(0.5 * sigma)
    for i in range(3):
        cases[f"perturbation {i}"] = _perturbed(rng)
    worst, fails = 0.0, []
    for name, blk in cases.items():
        (r0, r1), (t0_, t1_) = blk.bounds
        lo_r = 0.1 if name.startswith("alpha") else 0.05
        for _ in range(100):
            r = rng.uniform(max(r0, lo_r), r1 - 0.1)
            t = rng.uniform(t0_ + 0.05, t1_ - 0.05)
            rep = compare_to_oracle(blk, r, t)
            worst = max(worst, rep["relative"])
            if not rep["pass"]:
                fails.append((name, r, t))
    dt = time.perf_counter() - t0
    return not fails and dt < 30, f"max relative {worst:.2e} over {len(cases)} x 100 points, {dt:.1f} s"


def c3_eq22_reduction():
    rng = np.random.default_rng(3)
    worst = 0.0
    for blk in (lemma21_path(n=3).at(s) for s in (0.0, 0.25, 0.5, 0.75, 1.0)):
        (r0, r1), (t0, t1) = blk.bounds
        r = rng.uniform(r0 + 0.02, r1 - 0.02, 1000)
        t = rng.uniform(t0 + 0.02, t1 - 0.02, 1000)
        a = scalar_eq21(blk.alpha, blk.F, blk.n, r, t)
        b = scalar_eq22(blk.alpha, blk.f_r, blk.n, r, t)
        worst = max(worst, float((np.abs(a - b) / np.maximum(1.0, np.abs(b))).max()))
    return worst <= 1e-10, f"max relative {worst:.2e} at 5 x 1000 points"


def c4_torpedo_matrix():
    worst = math.inf
    for n, delta in itertools.product((3, 4, 5, 6), (1.0, 0.5, 0.25)):
        m = torpedo_metric(n, TorpedoParams(delta, 2 * delta))
        ratio = positivity_scan(m, 200).min_R / ((n - 1) * (n - 2) / delta ** 2)
        worst = min(worst, ratio)
    m = double_torpedo_metric(4, TorpedoParams(0.5, 3.0))
    t = np.linspace(0.01, 2.99, 200)
    sym = float(np.abs(m.scalar(t) - m.scalar(3.0 - t)).max())
    return worst >= 0.9 and sym <= 1e-9, f"min R / bound {worst:.4f}, mirror {sym:.1e}"


def c5_lemma21():
    t0 = time.perf_counter()
    rep = verify_path_psc(lemma21_path(n=3), n_s=50, grid=200)
    res = {}
    for s in rep.samples:
        for k, v in s["constraint_residuals"].items():
            res[k] = max(res.get(k, -math.inf), v)
    dt = time.perf_counter() - t0
    ok = rep.passed and rep.min_R > 0 and all(v <= 0 for v in res.values()) and dt < 300
    return ok, f"min R {rep.min_R:.3f}, worst residual {max(res.values()):.1e}, {dt:.1f} s"


def c6_mixed_torpedo():
    worst, allpass = 0.0, True
    for (p, q), eps, delta in itertools.product([(1, 2), (2, 2), (1, 3)], (1.0, 0.5), (1.0, 0.5)):
        b = 2 * (eps + delta) * math.pi / 2
        m = mixed_torpedo_metric(p, q, eps, delta, b)
        allpass &= positivity_scan(m, 200).passed
        t = np.linspace(delta * math.pi / 2 + 1e-3, b - eps * math.pi / 2 - 1e-3, 50)
        ref = p * (p - 1) / eps ** 2 + q * (q - 1) / delta ** 2
        worst = max(worst, float(np.abs(m.scalar(t) - ref).max()))
    return allpass and worst <= 1e-8, f"12 scans pass={allpass}, product deviation {worst:.1e}"


def c7_unfolding():
    bad = []
    for s, m in ((s, m) for m in range(1, 6) for s in range(0, min(3, m))):
        F = unfolding_family(s, m)
        box = [(-2.0, 2.0)] * m
        kw = {"seeds": 3} if m > 4 else {}
        if find_critical_points(F, box, y=[0.5], **kw):
            bad.append((s, m, "y>0"))
        at = find_critical_points(F, box, y=[0.0], **kw)
        if not (len(at) == 1 and at[0].label == f"BirthDeath({s}+1/2)" and np.abs(at[0].x).max() < 1e-8):
            bad.append((s, m, "y=0"))
        y = -0.49
        below = find_critical_points(F, box, y=[y], **kw)
        zs = sorted(p.x[0] for p in below)
        if not (sorted(p.index for p in below) == [s, s + 1] and all(p.kind == "Morse" for p in below)
                and np.allclose(zs, [-0.7, 0.7], atol=1e-10)):
            bad.append((s, m, "y<0"))
    F = unfolding_family(1, 3)
    curves = singular_set_trace(F, [(-1.0, 1.0), (-1.5, 1.5), (-1, 1), (-1, 1)])
    pts = np.vstack([c.points for c in curves])
    curve_res = float(max(np.abs(pts[:, 1] ** 2 + pts[:, 0]).max(), np.abs(pts[:, 2:]).max()))
    cusps = [p for c in curves for p in c.cusps]
    cusp_ok = len(cusps) == 1 and np.abs(np.concatenate((cusps[0].y, cusps[0].x))).max() < 1e-8
    ok = not bad and curve_res <= 1e-8 and cusp_ok
    return ok, f"count mismatches {bad or 'none'}, trace residual {curve_res:.1e}, cusp={cusp_ok}"


def _per_axis(m, budget=20_000):
    return max(5, int(budget ** (1.0 / len(m.region))))


def c8_gates():
    models = {f"normal form ({p},{q})": normal_form_model(p, q) for p, q in ((1, 3), (2, 2))}
    # unfolding fibre at y = -1/4: |d_zz f| = 3 at both critical points, so the
    # constant metric diag(3/2, 1, 1) splits the Hessian as +-2 times itself
    M = np.diag([1.5, 1.0, 1.0])
    f = unfolding_family(1, 3).fiber([-0.25])
    u = MorseTripleModel(f, lambda x: M, None, [(-1.0, 1.0)] * 3)
    u.field = u.gradient
    models["unfolding y=-1/4"] = u
    rows = {k: (compatible_metric_check(m)["pass"], gradient_like_check(m, samples=_per_axis(m))["pass"])
            for k, m in models.items()}
    good = models["normal form (1,3)"]
    shear = np.eye(good.f.m)
    shear[0, 1] = shear[1, 0] = 0.1
    sheared = MorseTripleModel(good.f, lambda x: shear, good.field, good.region)
    sc = compatible_metric_check(sheared)
    rev = MorseTripleModel(good.f, good.metric, lambda x: -good.gradient(x), good.region)
    gl = gradient_like_check(rev, samples=_per_axis(rev))
    ok = all(a and b for a, b in rows.values()) and not sc["pass"] and sc["max_residual"] > 0 \
        and not gl["pass"] and gl["violations_outside"] > 0
    return ok, (f"models pass {sum(a and b for a, b in rows.values())}/{len(rows)}, "
                f"shear residual {sc['max_residual']:.2e}, reversed violations {gl['violations_outside']}")


def _assembly(p, q):
    d = decompose_regions(normal_form_model(p, q), 0.4, 0.6, 0.2)
    g0 = BoundaryModelMetric(p, q, 0.1, 0.1)
    return g0, d, assemble_gl_cobordism(g0, d, 0.1, 0.1)


def c9_assembly():
    notes, ok = [], True
    for p, q in ((1, 3), (2, 2)):
        g0, d, m = _assembly(p, q)
        outer = m.regions["outer"]
        rho = np.linspace(d.rho_N + 1e-3, g0.L - 1e-3, 64)
        ident = all(np.array_equal(outer.scalar(rho, np.full_like(rho, t)), g0.block.scalar(rho))
                    and np.array_equal(outer.profile(rho, np.full_like(rho, t))[:4], g0.block.profile(rho))
                    for t in (0.01, 0.5, 0.99))
        seams = max(c["deviation"] for c in m.certificates)
        minR = min(g.min_R for g in m.scans(64).values())
        eq = equivariance_probe(m, 20, seed=0)["max_deviation"]
        a = np.linspace(1e-3, m.params["a_standard"], 64)
        tor = torpedo_fn(TorpedoParams(0.1, m.params["handle_length"]))
        lv = m.level.profile(a)
        level = max(float(np.abs(lv[0] - tor(a)).max()), float(np.abs(lv[1] - tor.d1(a)).max()),
                    float(np.abs(lv[2] - 0.1).max()), float(np.abs(lv[3]).max()))
        good = ident and seams <= 1e-10 and minR > 0 and eq <= 1e-10 and level <= 1e-8
        ok &= good
        notes.append(f"({p},{q}) outer identical={ident} seams {seams:.0e} min R {minR:.1f} "
                     f"equivariance {eq:.0e} level {level:.0e}")
    return ok, "; ".join(notes)


def c10_family():
    t0 = time.perf_counter()
    g0, d, m = _assembly(1, 3)
    fam = theorem12_block_family(1, (1, 3), g0, 0.25, 1.0, 0.1, 0.1, slices=21)
    a = np.linspace(1e-3, m.params["handle_length"], 129)
    first = float(np.abs(fam.slices[0].metric.warp_profile(a) - m.warp_profile(a)).max())
    last_prof = fam.slices[-1].metric.warp_profile(a)
    last = float(max(np.abs(last_prof[0] - g0.eps0).max(), np.abs(last_prof[1]).max()))
    bdry = all(s.boundary["pass"] for s in fam.slices)
    dt = time.perf_counter() - t0
    ok = fam.passed and bdry and len(fam.slices) == 21 and first <= 1e-10 and last <= 1e-10 and dt < 600
    return ok, (f"21 slices pass={fam.passed}, endpoints {first:.0e} / {last:.0e}, "
                f"Lipschitz {fam.lipschitz:.2f}, {dt:.1f} s")


CRITERIA = [
    ("1 round normalisation", c1_round_normalisation),
    ("2 two-variable formula vs oracle", c2_oracle_agreement),
    ("3 reduction to r-only fibre warp", c3_eq22_reduction),
    ("4 torpedo positivity matrix", c4_torpedo_matrix),
    ("5 torpedo-to-product path", c5_lemma21),
    ("6 mixed torpedo", c6_mixed_torpedo),
    ("7 unfolding classification", c7_unfolding),
    ("8 compatibility and gradient-like gates", c8_gates),
    ("9 model assembly", c9_assembly),
    ("10 family across a birth-death point", c10_family),
]


@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, record_property):
    ok, detail = check()
    record_property("acceptance", f"criterion {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    print(f"criterion {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


if __name__ == "__main__":
    for name, check in CRITERIA:
        ok, detail = check()
        print(f"criterion {name}: {'PASS' if ok else 'FAIL'} ({detail})")
