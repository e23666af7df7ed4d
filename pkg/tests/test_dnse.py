import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boson_sde.core import ValidationError, sym_eig
from boson_sde.diffusion import compute_D, neg_mass
from boson_sde.dnse import (
    DnseParams,
    alpha_upper_bound,
    build_dnse_spec,
    c_for_error,
    dnse_block,
    lambda_pm,
    ring_hopping,
    trace_bound,
)
from boson_sde.dynamics import compute_drift, dnse_rhs, random_unit

complexes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_ring_hopping():
    np.testing.assert_array_equal(ring_hopping(2), [[0, 1], [1, 0]])
    h = ring_hopping(4)
    assert h[0, 3] == h[3, 0] == 1 and h[0, 2] == 0
    np.testing.assert_array_equal(h.sum(axis=1), 2 * np.ones(4))


def test_spec_builder():
    spec = build_dnse_spec(DnseParams(N=2, n=3, c=4.0))
    nz = np.argwhere(spec.tensor != 0)
    np.testing.assert_array_equal(nz, [[0, 0, 0, 0], [1, 1, 1, 1]])
    assert np.all(spec.tensor[tuple(nz.T)] == 1)
    np.testing.assert_array_equal(spec.Xs[0], np.diag([2.0, 0.0]))
    np.testing.assert_array_equal(spec.Xs[1], np.diag([0.0, 2.0]))
    assert spec.n == 3


def test_params_validation():
    assert DnseParams(N=2, n=2, epsilon=0.1).c == pytest.approx(3.75)
    for kwargs in (dict(c=-1.0), dict(epsilon=0.0), dict(), dict(c=1.0, H0=np.array([[0, 1], [2, 0]]))):
        with pytest.raises(ValidationError):
            DnseParams(N=2, n=2, **kwargs)


def test_large_n_drift_is_dnse(rng):
    spec = build_dnse_spec(DnseParams(N=3, n=2, c=2.0))
    for z in random_unit(3, rng, 20):
        no_dissipation = spec.replace(Xs=np.zeros((0, 3, 3)))
        np.testing.assert_allclose(compute_drift(z, no_dissipation), dnse_rhs(z, spec.H0), atol=1e-12)


def test_block_examples():
    assert np.all(dnse_block(0, 2.0, 3) == 0)
    for c, n in [(0.0, 1), (2.5, 3)]:
        np.testing.assert_allclose(dnse_block(1, c, n), np.array([[0, -0.25], [-0.25, c]]) / n, atol=1e-15)


def test_lambda_examples():
    np.testing.assert_allclose(lambda_pm(1, 0.0, 1), (0.25, -0.25), atol=1e-15)
    np.testing.assert_allclose(lambda_pm(1, 1.0, 2), ((2 + math.sqrt(5)) / 8, (2 - math.sqrt(5)) / 8), atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(complexes, st.floats(0.0, 10.0), st.integers(1, 8))
def test_lambda_matches_eigensolver(zj, c, n):
    w, _ = sym_eig(dnse_block(zj, c, n))
    lp, lm = lambda_pm(zj, c, n)
    np.testing.assert_allclose(np.sort(w), [lm, lp], atol=1e-12)
    assert lp >= 0 >= lm
    if abs(zj) ** 2 > 0:
        assert lp > 0 > lm
    if c > 0:
        assert abs(lm) <= abs(zj) ** 2 / (16 * n * c) * (1 + 1e-12)


def test_blocks_assemble_full_D(rng):
    N, n, c = 3, 2, 1.5
    spec = build_dnse_spec(DnseParams(N=N, n=n, c=c))
    for z in random_unit(N, rng, 20):
        D = compute_D(z, spec)
        expected = np.zeros_like(D)
        for j in range(N):
            idx = np.ix_([j, N + j], [j, N + j])
            expected[idx] = dnse_block(z[j], c, n)
        np.testing.assert_allclose(D, expected, atol=1e-14)
        blocks = sum(-lambda_pm(z[j], c, n)[1] for j in range(N))
        assert abs(neg_mass(D) - blocks) <= 1e-12


def test_c_for_error():
    assert c_for_error(1.0, 0.1) == pytest.approx(3.75, abs=1e-15)
    assert c_for_error(0.0, 0.1) == 0.0
    assert trace_bound(2.0, c_for_error(2.0, 0.05)) == pytest.approx(0.05, rel=1e-15)
    with pytest.raises(ValidationError):
        c_for_error(1.0, 0.0)


def test_alpha_upper_bound(rng):
    assert alpha_upper_bound(3.75, 2) == pytest.approx(1 / 120, rel=1e-15)
    assert alpha_upper_bound(2.0, 3) == pytest.approx(alpha_upper_bound(1.0, 3) / 2, rel=1e-15)
    with pytest.raises(ValidationError):
        alpha_upper_bound(0.0, 1)
    spec = build_dnse_spec(DnseParams(N=3, n=2, c=0.7))
    for z in random_unit(3, rng, 100):
        assert neg_mass(compute_D(z, spec)) <= alpha_upper_bound(0.7, 2) + 1e-15


def test_trace_bound_halves_with_c():
    assert trace_bound(1.0, 2.0) == pytest.approx(trace_bound(1.0, 1.0) / 2, rel=1e-15)
