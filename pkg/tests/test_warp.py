import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glsurgery.errors import DomainError, ParameterError
from glsurgery.warp import (TorpedoParams, bump_fn, cap_fn, constant_fn, cutoff_fn,
                            double_torpedo_fn, fd_derivatives, from_callable, h_blend_fn,
                            jet_check, junction_mismatch, lerp, reflect, sine_fn, smoothstep,
                            torpedo_fn)


def test_smoothstep_ends_and_monotone():
    u = np.linspace(-0.5, 1.5, 2001)
    s, s1, s2 = smoothstep(u)
    assert np.all(s[u <= 0] == 0) and np.all(s[u >= 1] == 1)
    assert np.all(s1 >= 0)
    assert abs(smoothstep(np.array(0.5))[0] - 0.5) < 1e-15


@pytest.mark.parametrize("delta", [1.0, 0.5, 0.25, 0.1])
@pytest.mark.parametrize("w", [0.3, 0.7])
def test_torpedo_shape(delta, w):
    f = torpedo_fn(TorpedoParams(delta, 3 * delta, w))
    t = np.linspace(1e-6, 3 * delta, 3000)
    v, d1, d2 = f.jet(t)
    cap = t <= delta * (math.pi / 2 - w)
    np.testing.assert_allclose(v[cap], delta * np.sin(t[cap] / delta), rtol=0, atol=1e-14)
    assert np.all(v[t >= delta * math.pi / 2] == delta)
    assert np.all(d1 >= -1e-15) and np.all(d1 <= 1 + 1e-15)
    assert np.all(d2 <= 1e-12)


@pytest.mark.parametrize("delta", [1.0, 0.5, 0.25])
def test_torpedo_jet_matches_differences(delta):
    f = torpedo_fn(TorpedoParams(delta, 2 * delta))
    rep = jet_check(f, h=1e-3 * delta, tol=1e-5 / delta)
    assert rep.passed, rep


def test_torpedo_junctions_are_c2():
    f = torpedo_fn(TorpedoParams(0.5, 2.0))
    assert junction_mismatch(f) < 1e-9


def test_double_torpedo_symmetric():
    f = double_torpedo_fn(TorpedoParams(0.5, 4.0))
    t = np.linspace(0.01, 3.99, 500)
    np.testing.assert_allclose(f(t), f(4.0 - t), atol=1e-15)
    np.testing.assert_allclose(f.d1(t), -f.d1(4.0 - t), atol=1e-15)
    assert junction_mismatch(f) < 1e-9


@pytest.mark.parametrize("p", [TorpedoParams(0.0, 1.0), TorpedoParams(1.0, 1.0),
                               TorpedoParams(1.0, 3.0, 0.9)])
def test_torpedo_rejects_bad_params(p):
    with pytest.raises(ParameterError):
        torpedo_fn(p)


def test_double_torpedo_needs_room():
    with pytest.raises(ParameterError):
        double_torpedo_fn(TorpedoParams(1.0, 3.0))


@given(st.floats(-3, 3), st.floats(0.05, 2.0))
def test_cutoff_range(t0, width):
    c = cutoff_fn(t0, t0 + width)
    t = np.linspace(t0 - width, t0 + 2 * width, 200)
    v, d1, _ = c.jet(t)
    assert np.all((v >= 0) & (v <= 1)) and np.all(d1 >= 0)
    assert np.all(v[t <= t0] == 0) and np.all(v[t >= t0 + width] == 1)


@pytest.mark.parametrize("t0,t1", [(0.0, 1.0), (-1.0, 2.0)])
def test_cutoff_jets(t0, t1):
    assert jet_check(cutoff_fn(t0, t1)).passed


def test_cutoff_narrow_needs_scaled_step():
    c = cutoff_fn(0.0, 0.1)
    assert jet_check(c, h=1e-4, tol=1e-3).passed


def test_cutoff_rejects_reversed():
    with pytest.raises(DomainError):
        cutoff_fn(1.0, 0.0)


def test_bump_plateau():
    b = bump_fn(0.0, 1.0, 2.0, 3.0)
    t = np.linspace(-1, 4, 1001)
    v = b(t)
    assert np.all(v[(t >= 1) & (t <= 2)] == 1)
    assert np.all(v[(t <= 0) | (t >= 3)] == 0)
    assert jet_check(b).passed


@pytest.mark.parametrize("w", [0.2, 0.3, 0.5, 0.7])
def test_h_blend_properties(w):
    h = h_blend_fn(w)
    r = np.linspace(1e-6, math.pi / 2, 4000)
    v, d1, d2 = h.jet(r)
    left, right = r <= w / 2, r >= 2 * w
    np.testing.assert_allclose(v[left], r[left], atol=1e-14)
    np.testing.assert_allclose(v[right], np.sin(r[right]), atol=1e-14)
    assert np.all(d2 <= 1e-12) and np.all(d1 >= -1e-14) and np.all(d1 <= 1 + 1e-14)
    assert jet_check(h).passed


@pytest.mark.parametrize("w", [0.2, 0.3, 0.5])
def test_cap_properties(w):
    c = cap_fn(w)
    r = np.linspace(1e-6, math.pi / 2, 4000)
    v, d1, d2 = c.jet(r)
    assert np.all(v[r <= w / 2] == 1)
    np.testing.assert_allclose(v[r >= 2 * w], np.cos(r[r >= 2 * w]), atol=1e-14)
    assert np.all(d2 <= 1e-12) and np.all(d1 <= 1e-14) and np.all(d1 >= -1 - 1e-14)
    assert jet_check(c).passed


def test_reflect_and_lerp():
    s = sine_fn((0.0, math.pi))
    r = reflect(s, math.pi)
    t = np.linspace(0.1, 3.0, 50)
    np.testing.assert_allclose(r(t), np.sin(math.pi - t), atol=1e-15)
    np.testing.assert_allclose(r.d1(t), -np.cos(math.pi - t), atol=1e-15)
    c = constant_fn(1.0, (0.0, math.pi))
    m = lerp(s, c, 0.25)
    np.testing.assert_allclose(m(t), 0.75 * np.sin(t) + 0.25, atol=1e-15)
    assert lerp(s, c, 0.0) is s and lerp(s, c, 1.0) is c


def test_from_callable_derivatives():
    f = from_callable(np.exp, (0.0, 1.0))
    t = np.linspace(0.1, 0.9, 9)
    np.testing.assert_allclose(f.d1(t), np.exp(t), rtol=1e-7)
    np.testing.assert_allclose(f.d2(t), np.exp(t), rtol=1e-6)


def test_fd_derivatives_orders():
    t = np.linspace(0.2, 1.0, 5)
    d1, d2 = fd_derivatives(np.sin, t, 1e-3, order=4)
    assert np.abs(d1 - np.cos(t)).max() < 1e-11
    assert np.abs(d2 + np.sin(t)).max() < 1e-7


def test_jet_check_rejects_large_step():
    with pytest.raises(DomainError):
        jet_check(sine_fn((0.0, 0.01)), h=1e-2)


def test_restrict_and_sample():
    f = sine_fn((0.0, math.pi))
    g = f.restrict(0.5, 1.0)
    assert g.domain == (0.5, 1.0)
    assert g.sample(10).shape == (10, 4)
    with pytest.raises(DomainError):
        f.restrict(0.0, 4.0)


@pytest.mark.parametrize("delta", [0.5, 0.25, 2.0])
def test_torpedo_scaling_identity(delta):
    unit = torpedo_fn(TorpedoParams(1.0, 4.0))
    f = torpedo_fn(TorpedoParams(delta, 4.0 * delta))
    t = np.linspace(1e-6, 4.0 * delta, 2001)
    np.testing.assert_allclose(f(t), delta * unit(t / delta), rtol=0, atol=1e-12)
