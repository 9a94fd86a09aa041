import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from glsurgery import _kernels_py, kernels

backends = kernels.available_backends()
needs_compiled = pytest.mark.skipif("compiled" not in backends, reason="extension not built")

pos = arrays(np.float64, 8, elements=st.floats(0.1, 5.0))
anyf = arrays(np.float64, 8, elements=st.floats(-5.0, 5.0))


@pytest.fixture
def compiled():
    prev = kernels.use_backend("compiled")
    yield kernels
    kernels.use_backend(prev)


def test_backend_switching():
    assert "python" in backends
    prev = kernels.use_backend("python")
    assert kernels.backend() == "python"
    kernels.use_backend(prev)
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@needs_compiled
@given(pos, anyf, anyf, st.integers(2, 8))
def test_single_warped_backends_agree(f, f1, f2, n):
    a = _kernels_py.single_warped(f, f1, f2, n)
    prev = kernels.use_backend("compiled")
    try:
        b = kernels.single_warped(f, f1, f2, n)
    finally:
        kernels.use_backend(prev)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-12)


@needs_compiled
@given(pos, anyf, anyf, pos, anyf, anyf, st.integers(1, 4), st.integers(1, 4))
def test_doubly_warped_backends_agree(u, u1, u2, v, v1, v2, p, q):
    a = _kernels_py.doubly_warped(u, u1, u2, v, v1, v2, p, q)
    prev = kernels.use_backend("compiled")
    try:
        b = kernels.doubly_warped(u, u1, u2, v, v1, v2, p, q)
    finally:
        kernels.use_backend(prev)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-10)


@needs_compiled
@given(pos, anyf, anyf, anyf, pos, anyf, anyf, anyf, anyf, st.integers(1, 5))
def test_two_variable_kernels_agree(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, n):
    x = _kernels_py.eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, n)
    prev = kernels.use_backend("compiled")
    try:
        y = kernels.eq21(a, ar, at, arr, F, Fr, Ft, Frr, Ftt, n)
        z = kernels.eq22(a, ar, arr, F, Fr, Frr, n)
    finally:
        kernels.use_backend(prev)
    np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(_kernels_py.eq22(a, ar, arr, F, Fr, Frr, n), z, rtol=1e-12, atol=1e-9)


@needs_compiled
def test_compiled_handles_broadcast_shapes(compiled):
    f = np.full((3, 4), 2.0)
    out = compiled.single_warped(f, np.zeros((3, 4)), np.zeros((3, 4)), 3)
    assert out.shape == (3, 4)
    np.testing.assert_allclose(out, 2 * 1 / 4)


def test_falls_back_to_python_when_extension_missing(monkeypatch):
    import importlib
    import sys

    import glsurgery

    monkeypatch.setitem(sys.modules, "glsurgery._kernels", None)
    monkeypatch.delattr(glsurgery, "_kernels", raising=False)
    try:
        mod = importlib.reload(kernels)
        assert mod.backend() == "python" and mod.available_backends() == ["python"]
        with pytest.raises(RuntimeError):
            mod.use_backend("compiled")
    finally:
        monkeypatch.undo()
        importlib.reload(kernels)
