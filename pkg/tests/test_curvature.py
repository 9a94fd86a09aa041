import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glsurgery.curvature import (DoublyWarp, Field2, Glued, GluedPart, Interval, Product,
                                 SingleWarp, TripleBlock, block_oracle, compare_to_oracle,
                                 fd_check_field, fd_scalar_oracle, positivity_scan,
                                 scalar_doubly_warped, scalar_eq21, scalar_eq22,
                                 scalar_single_warped)
from glsurgery.errors import DomainError, GuardMarginError, NonPositiveWarpError
from glsurgery.warp import TorpedoParams, WarpFn, constant_fn, cosine_fn, from_callable, sine_fn, torpedo_fn


@pytest.mark.parametrize("n", range(2, 8))
def test_round_sphere_is_normalised(n):
    t = np.linspace(0.05, math.pi - 0.05, 1000)
    R = scalar_single_warped(sine_fn((0.0, math.pi)), n, t)
    np.testing.assert_allclose(R, n * (n - 1), rtol=0, atol=1e-9)


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 3), (3, 3), (1, 5)])
def test_doubly_round_sphere(p, q):
    n = p + q + 1
    t = np.linspace(0.05, math.pi / 2 - 0.05, 1000)
    R = scalar_doubly_warped(cosine_fn((0.0, math.pi / 2)), sine_fn((0.0, math.pi / 2)), p, q, t)
    np.testing.assert_allclose(R, n * (n - 1), atol=1e-9)


def test_flat_cylinder_and_product():
    c = constant_fn(0.5, (0.0, 1.0))
    R = scalar_single_warped(c, 4, np.linspace(0.1, 0.9, 7))
    np.testing.assert_allclose(R, 3 * 2 / 0.25)
    prod = Product(SingleWarp(sine_fn((0.0, math.pi)), 3), Interval(0.0, 1.0))
    np.testing.assert_allclose(prod.scalar(1.0, 0.5), 6.0)
    assert prod.dim == 4


def test_guard_and_positivity_errors():
    s = sine_fn((0.0, math.pi))
    with pytest.raises(GuardMarginError):
        scalar_single_warped(s, 3, 0.0)
    neg = from_callable(lambda t: t - 0.5, (0.0, 1.0))
    with pytest.raises(NonPositiveWarpError):
        scalar_single_warped(neg, 3, 0.25)
    with pytest.raises(DomainError):
        scalar_single_warped(s, 1, 1.0)


def _alpha_field(amp):
    def jet(r, t):
        e = amp * np.sin(t)
        return (1 + e * r ** 2, 2 * e * r, amp * np.cos(t) * r ** 2, 2 * e,
                2 * amp * np.cos(t) * r, -e * r ** 2)
    return Field2(jet, (0.0, 1.5), (0.0, 3.0), "alpha")


def _sin_field():
    def jet(r, t):
        s, c = np.sin(r), np.cos(r)
        z = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(t)))
        return s + z, c + z, z, -s + z, z, z
    return Field2(jet, (0.0, 1.5), (0.0, 3.0), "sin", t_independent=True)


def test_fields_pass_difference_check():
    r = np.linspace(0.2, 1.2, 7)
    t = np.linspace(0.3, 2.5, 7)
    assert fd_check_field(_alpha_field(0.3), r, t) < 1e-5
    assert fd_check_field(_sin_field(), r, t) < 1e-5


@given(st.floats(-0.4, 0.4), st.floats(0.2, 1.3), st.floats(0.2, 2.8))
def test_two_variable_formula_reduces_to_r_only(amp, r, t):
    a = _alpha_field(amp)
    R21 = scalar_eq21(a, _sin_field(), 2, r, t)
    R22 = scalar_eq22(a, sine_fn((0.0, 1.5)), 2, r, t)
    assert abs(R21 - R22) <= 1e-10 * max(1.0, abs(R22))


@pytest.mark.parametrize("n", [2, 3])
def test_triple_block_against_oracle(n, rng):
    blk = TripleBlock(_alpha_field(0.25), _sin_field(), n)
    for r, t in rng.uniform([0.3, 0.4], [1.2, 2.6], size=(5, 2)):
        rep = compare_to_oracle(blk, r, t)
        assert rep["pass"], rep


def test_oracle_on_round_sphere():
    m = SingleWarp(sine_fn((0.0, math.pi)), 4)
    assert abs(block_oracle(m, 1.1) - 12.0) < 1e-5
    flat = lambda x: np.eye(3)
    assert abs(fd_scalar_oracle(flat, np.zeros(3))) < 1e-10


def test_doubly_warp_oracle():
    m = DoublyWarp(cosine_fn((0.0, math.pi / 2)), sine_fn((0.0, math.pi / 2)), 2, 2)
    rep = compare_to_oracle(m, 0.7)
    assert rep["pass"] and abs(rep["closed"] - 20.0) < 1e-9


def test_positivity_scan_records_witness():
    m = SingleWarp(torpedo_fn(TorpedoParams(0.5, 2.0)), 3)
    g = positivity_scan(m, 200)
    assert g.passed and g.min_R > 0
    assert g.summary()["samples"] == 200
    assert g.to_csv().splitlines()[0] == "t,R"
    with pytest.raises(DomainError):
        positivity_scan(m, 8)
    bad = SingleWarp(from_callable(lambda t: 1 + 0 * t, (0.0, 1.0)), 2)
    assert not positivity_scan(bad, 32).passed


def test_glued_scan_includes_seam():
    a = SingleWarp(constant_fn(1.0, (0.0, 1.0)), 3)
    b = SingleWarp(constant_fn(1.0, (0.0, 2.0)), 3)
    g = Glued([GluedPart(0.0, 1.0, a), GluedPart(1.0, 3.0, b, 1.0)], collars=[(1.0, 0.2)])
    sc = positivity_scan(g, 33)
    assert np.any(np.isclose(sc.points[:, 0], 1.0))
    np.testing.assert_allclose(sc.R, 2.0)


def test_glued_two_axis_scan():
    left = Product(SingleWarp(torpedo_fn(TorpedoParams(0.5, 1.0)), 3), Interval(0.0, 1.0))
    right = Product(SingleWarp(torpedo_fn(TorpedoParams(0.5, 1.0)), 3), Interval(0.0, 1.0))
    g = Glued([GluedPart(0.0, 1.0, left), GluedPart(1.0, 2.0, right, 1.0)], axis=1)
    sc = positivity_scan(g, [40, 20])
    assert sc.passed and sc.R.size == 40 * (20 + 1)


@given(st.floats(0.01, 0.5), st.floats(0.0, 1.0), st.floats(0.2, 2.0), st.integers(1, 5),
       st.floats(0.05, 0.95), st.floats(0.0, 3.0))
def test_admissible_r_only_families_are_positive(a, c, b, n, r, t):
    # f = 1 - a r^2 has -1 <= f' <= 0, f'' <= 0; alpha = b + c r has 0 <= alpha_r <= 1
    f = WarpFn(lambda x: (1 - a * x ** 2, -2 * a * x, -2 * a + 0 * x), (0.0, 1.0), "concave")

    def jet(rr, tt):
        z = np.zeros(np.broadcast_shapes(np.shape(rr), np.shape(tt)))
        return b + c * rr + z, c + z, z, z, z, z

    alpha = Field2(jet, (0.0, 1.0), (-1.0, 4.0))
    assert scalar_eq22(alpha, f, n, r, t) > 0
