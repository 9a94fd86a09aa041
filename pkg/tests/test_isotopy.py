import math

import numpy as np
import pytest

from glsurgery.curvature import positivity_scan
from glsurgery.errors import DomainError, EndpointMismatchError, ParameterError
from glsurgery.isotopy import (CollarRegion, boundary_product_check, concat, constant_path,
                               convex_fault_path, delta_scaling_path, lemma21_path,
                               metric_distance, reverse, verify_path_psc)
from glsurgery.metrics import MetricSpec, torpedo_metric
from glsurgery.warp import TorpedoParams


@pytest.fixture(scope="module")
def product_path():
    return lemma21_path()


def test_torpedo_product_path_certifies(product_path):
    rep = verify_path_psc(product_path, n_s=11, grid=60)
    assert rep.passed, rep.failures[:3]
    assert rep.min_R > 0
    assert set(rep.samples[0]["constraint_residuals"])
    assert rep.extra["endpoint_deviation"]["start"] <= 1e-10


@pytest.mark.parametrize("n", [2, 4])
def test_torpedo_product_path_other_dimensions(n):
    rep = verify_path_psc(lemma21_path(n=n), n_s=6, grid=40)
    assert rep.passed


def test_torpedo_product_path_boundary_is_product(product_path):
    b = product_path.params["b"]
    col = CollarRegion(axis=1, lo=-b, hi=-b / 2)
    rep = boundary_product_check(product_path, col, n_s=11, relative=False)
    assert rep.passed, rep.failures[:2]


def test_convex_fault_fails_with_witness():
    rep = verify_path_psc(convex_fault_path(), n_s=6, grid=40)
    assert not rep.passed
    f = rep.failures[0]
    assert f["coords"] and f["s"] > 0


def test_delta_scaling_path():
    spec = MetricSpec("Torpedo", {"n": 4, "delta": 1.0, "b": 3.0})
    p = delta_scaling_path(spec, 1.0, 0.5)
    rep = verify_path_psc(p, n_s=5, grid=64)
    assert rep.passed
    assert metric_distance(p.at(1.0), spec.with_delta(0.5).build()) == 0.0
    with pytest.raises(ParameterError):
        delta_scaling_path(spec, 0.0, 1.0)


def test_concat_and_reverse():
    m = torpedo_metric(3, TorpedoParams(0.5, 2.0))
    c = constant_path(m)
    joined = concat(c, reverse(c))
    assert 0.5 in joined.breakpoints
    assert verify_path_psc(joined, n_s=3, grid=32).passed
    assert reverse(reverse(c)) is c
    other = constant_path(torpedo_metric(3, TorpedoParams(0.6, 2.0)))
    with pytest.raises(EndpointMismatchError):
        concat(c, other)


def test_path_parameter_bounds():
    c = constant_path(torpedo_metric(3, TorpedoParams(0.5, 2.0)))
    with pytest.raises(DomainError):
        c.at(1.5)
    with pytest.raises(DomainError):
        verify_path_psc(c, n_s=1)


def test_boundary_check_detects_drift():
    spec = MetricSpec("Torpedo", {"n": 3, "delta": 1.0, "b": 3.0})
    p = delta_scaling_path(spec, 1.0, 0.8)
    rep = boundary_product_check(p, CollarRegion(0, 2.6, 2.9), n_s=5)
    assert not rep.passed
    assert rep.failures[0]["constraint"] == "fixed boundary metric"
    rep = boundary_product_check(p, CollarRegion(0, 2.6, 2.9), n_s=5, relative=False)
    assert rep.passed
