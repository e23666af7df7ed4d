import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from boson_sde.core import (
    DimensionError,
    ValidationError,
    check_hermitian,
    jacobi_eig,
    sym_eig,
    to_complex,
    to_real,
    trace_distance,
    trace_norm,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize(
    "z, r",
    [
        ([1, 0], [1, 0, 0, 0]),
        ([0, 1j], [0, 0, 0, 1]),
        ([(1 + 1j) / 2, (1 - 1j) / 2], [0.5, 0.5, 0.5, -0.5]),
    ],
)
def test_to_real_examples(z, r):
    np.testing.assert_array_equal(to_real(np.array(z)), r)


def test_to_complex_examples():
    np.testing.assert_array_equal(to_complex([1, 0, 0, 0]), [1, 0])
    np.testing.assert_array_equal(to_complex([0, 0, 1, 0]), [1j, 0])


def test_to_complex_rejects_odd_length():
    with pytest.raises(DimensionError):
        to_complex([1.0, 2.0, 3.0])


def test_round_trip_random(rng):
    z = rng.normal(size=(100, 3)) + 1j * rng.normal(size=(100, 3))
    np.testing.assert_array_equal(to_complex(to_real(z)), z)


@given(arrays(float, st.integers(1, 6).map(lambda k: 2 * k), elements=finite))
def test_real_round_trip_and_norm(r):
    np.testing.assert_array_equal(to_real(to_complex(r)), r)
    assert np.linalg.norm(to_complex(r)) == pytest.approx(np.linalg.norm(r), rel=1e-14, abs=1e-300)


def test_sym_eig_examples():
    w, v = sym_eig(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(w, [3, 1])
    np.testing.assert_allclose(np.abs(v), np.eye(2))
    w, v = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [1, -1], atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(v), [[s, s], [s, s]], atol=1e-15)
    assert v[0, 0] * v[1, 0] > 0 and v[0, 1] * v[1, 1] < 0


def test_sym_eig_reconstruction(rng):
    a = rng.normal(size=(8, 8))
    s = a + a.T
    w, v = sym_eig(s)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.T - s)) <= 1e-10 * np.max(np.abs(s))
    assert np.max(np.abs(v.T @ v - np.eye(8))) <= 1e-10


def test_jacobi_matches_lapack_on_stack(rng):
    a = rng.normal(size=(50, 5, 5))
    s = a + np.swapaxes(a, 1, 2)
    w, _ = jacobi_eig(s)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(s)[:, ::-1], atol=1e-12)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_sym_eig_2x2_characteristic_roots(a, b, d):
    w, _ = sym_eig(np.array([[a, b], [b, d]]))
    mean, half = (a + d) / 2, np.hypot((a - d) / 2, b)
    np.testing.assert_allclose(w, [mean + half, mean - half], atol=1e-12 * max(1.0, abs(a), abs(b), abs(d)))


def test_sym_eig_rejects_non_symmetric():
    with pytest.raises(ValidationError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_check_hermitian_rejects_instead_of_symmetrizing():
    with pytest.raises(ValidationError, match="H0"):
        check_hermitian([[1, 1j], [1j, 1]], "H0")


def test_trace_norm_examples():
    assert trace_norm(np.diag([2.0, -3.0])) == pytest.approx(5.0)
    assert trace_norm(np.zeros((3, 3))) == 0.0
    assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == pytest.approx(2.0)


def test_trace_norm_non_hermitian_is_singular_value_sum(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert trace_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False).sum(), rel=1e-12)
    nil = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert trace_norm(nil) == pytest.approx(1.0)


def test_trace_norm_rejects_non_square():
    with pytest.raises(DimensionError):
        trace_norm(np.zeros((2, 3)))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_trace_norm_subadditive(seed):
    rng = np.random.default_rng(seed)
    a, b = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
    a, b = a + a.conj().T, b + b.conj().T
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12
