import math

import numpy as np
import pytest

from glsurgery.assembler import (BoundaryModelMetric, assemble_gl_cobordism, axis_biased,
                                 bend_hypersurface, decompose_regions, equivariance_probe,
                                 normal_form_model, theorem12_block_family)
from glsurgery.curvature import SingleWarp, positivity_scan
from glsurgery.errors import DomainError, NonStandardMetricError
from glsurgery.warp import (TorpedoParams, WarpFn, cutoff_fn, sine_fn, torpedo_fn)


@pytest.fixture(scope="module", params=[(1, 3), (2, 2)], ids=["p1q3", "p2q2"])
def assembly(request):
    p, q = request.param
    d = decompose_regions(normal_form_model(p, q), 0.4, 0.6, 0.2)
    g0 = BoundaryModelMetric(p, q, 0.1, 0.1)
    return g0, d, assemble_gl_cobordism(g0, d, 0.1, 0.1)


def test_decomposition_regions():
    d = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, 0.2)
    assert d.c == 0.5 and d.kappa_N == pytest.approx(0.2 * math.sqrt(0.54))
    assert d.chart_error < 1e-8
    assert set(d.boundary) == {"S^p x D^{q+1}", "S^p x S^q x I", "D^{p+1} x S^q"}
    assert d.measures["U_0"] == pytest.approx(d.measures["U_1"])
    lab = d.region_of([0.5, 0.7, 0.1, 0.05], [0.5, 0.05, 0.05, 0.7])
    assert list(lab) == ["outer", "U_0", "U_w", "U_1"]


@pytest.mark.parametrize("rho_N,expected", [(0.2, 0.331), (0.1, 0.211), (0.05, 0.129)])
def test_tube_measure_shrinks(rho_N, expected):
    d = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, rho_N, grid=200, flow_checks=2)
    assert d.measures["U"] == pytest.approx(expected, abs=0.01)


def test_chart_follows_trajectories():
    d = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, 0.2)
    t = np.linspace(0.0, 1.0, 11)
    A, B = d.chart(0.15, t)
    np.testing.assert_allclose(0.5 - A ** 2 + B ** 2, t, atol=1e-12)
    np.testing.assert_allclose(A * B, 0.15 * math.sqrt(0.5 + 0.15 ** 2), atol=1e-12)


@pytest.mark.parametrize("args", [(0.6, 0.4, 0.2), (0.4, 0.6, 0.0), (0.55, 0.6, 0.2)])
def test_decomposition_rejects_bad_levels(args):
    with pytest.raises(DomainError):
        decompose_regions(normal_form_model(1, 3), *args)


def test_boundary_metric_standard():
    g0 = BoundaryModelMetric(1, 3, 0.1, 0.1)
    assert g0.standard_deviation(0.8) < 1e-12
    g0.require_standard(0.8)
    with pytest.raises(NonStandardMetricError):
        g0.require_standard(0.95)
    with pytest.raises(DomainError):
        BoundaryModelMetric(2, 1, 0.1, 0.1)


def test_assembly_is_psc(assembly):
    g0, d, m = assembly
    assert m.passed
    for name, g in m.scans(48).items():
        assert g.passed, (name, g.summary())
    assert positivity_scan(m.level, 200).passed


def test_outer_region_is_g0(assembly):
    g0, d, m = assembly
    rho = np.linspace(0.21, 0.99, 50)
    outer = m.regions["outer"]
    for t in (0.01, 0.3, 0.99):
        np.testing.assert_array_equal(outer.scalar(rho, np.full_like(rho, t)), g0.block.scalar(rho))


def test_level_metric_at_c1(assembly):
    g0, d, m = assembly
    P = m.params
    a = np.linspace(0.01, P["a_standard"], 20)
    w = m.warp_profile(a)
    ref = torpedo_fn(TorpedoParams(0.1, P["handle_length"]))
    np.testing.assert_allclose(w[0], ref(a), atol=1e-12)
    np.testing.assert_allclose(w[1], ref.d1(a), atol=1e-12)


def test_equivariance(assembly):
    _, _, m = assembly
    rep = equivariance_probe(m, 20)
    assert rep["pass"] and rep["max_deviation"] < 1e-12
    bad = equivariance_probe(axis_biased(m, 0.1), 5)
    assert not bad["pass"] and bad["max_deviation"] > 1e-3


def test_assembly_preconditions():
    d = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, 0.2)
    g0 = BoundaryModelMetric(1, 3, 0.1, 0.1)
    with pytest.raises(NonStandardMetricError):
        assemble_gl_cobordism(g0, d, 0.1, 0.05)
    rho_small = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, 0.12)
    with pytest.raises(DomainError):
        assemble_gl_cobordism(BoundaryModelMetric(1, 3, 0.1, 0.1), rho_small, 0.1, 0.1)


@pytest.mark.parametrize("eps0", [0.08, 0.12, 0.15])
def test_handle_radius_transition(eps0):
    d = decompose_regions(normal_form_model(1, 3), 0.4, 0.6, 0.2)
    m = assemble_gl_cobordism(BoundaryModelMetric(1, 3, eps0, 0.1), d, 0.1, 0.1)
    assert m.passed and all(g.passed for g in m.scans(40).values())


def test_bend_flat_disk_into_bowl_gives_torpedo():
    delta = 0.3
    F = WarpFn(lambda r: (r, np.ones_like(r), np.zeros_like(r)), (0.0, delta), "identity")
    chi = cutoff_fn(0.5 * delta, 0.8 * delta)

    def jet(r):
        rr = np.minimum(r, 0.95 * delta)
        root = np.sqrt(delta ** 2 - rr ** 2)
        b, b1, b2 = delta - root, rr / root, delta ** 2 / root ** 3
        x, x1, x2 = chi.jet(r)
        return (1 - x) * b, (1 - x) * b1 - x1 * b, (1 - x) * b2 - 2 * x1 * b1 - x2 * b

    bent = bend_hypersurface(F, WarpFn(jet, (0.0, delta), "bowl"))
    s = np.linspace(1e-4, delta * math.asin(0.5), 50)
    tor = torpedo_fn(TorpedoParams(delta, 1.0))
    for a, b in zip(bent.jet(s), tor.jet(s)):
        np.testing.assert_allclose(a, b, atol=1e-9)


@pytest.mark.parametrize("kappa,positive", [(0.1, True), (0.3, False)])
def test_bend_round_fibre(kappa, positive):
    rho_N = 1.2
    F = sine_fn((0.0, rho_N))
    chi = cutoff_fn(0.5, 0.9)

    def jet(r):
        x, x1, x2 = chi.jet(r)
        g = 1 - x
        return (kappa * r ** 2 * g, kappa * (2 * r * g - r ** 2 * x1),
                kappa * (2 * g - 4 * r * x1 - r ** 2 * x2))

    c = WarpFn(jet, (0.0, rho_N), "cup")
    bent = bend_hypersurface(F, c, rho_N)
    sc = positivity_scan(SingleWarp(bent, 4), 400)
    assert sc.passed is positive


def test_bend_requires_flat_tail():
    F = sine_fn((0.0, 1.0))
    c = WarpFn(lambda r: (r, np.ones_like(r), np.zeros_like(r)), (0.0, 1.0), "ramp")
    with pytest.raises(DomainError):
        bend_hypersurface(F, c, 1.0)


def test_block_family_small():
    g0 = BoundaryModelMetric(1, 3, 0.1, 0.1)
    fam = theorem12_block_family(0, (1, 3), g0, 0.04, 0.3, 0.1, 0.1, slices=5, grid=24)
    assert fam.passed, fam.table()
    rows = fam.table()
    assert len(rows[0]["critical_points"]) == 2 and rows[-1]["critical_points"] == []
    assert rows[2]["critical_points"] == ["BirthDeath(0+1/2)"]
    assert np.isfinite(fam.lipschitz)
    with pytest.raises(DomainError):
        theorem12_block_family(0, (1, 3), g0, 0.25, 0.3, 0.1, 0.1, slices=3)
