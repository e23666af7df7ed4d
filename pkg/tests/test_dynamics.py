import numpy as np
import pytest

from boson_sde.core import SingularityError, ValidationError, to_real
from boson_sde.dnse import DnseParams, build_dnse_spec, kronecker_tensor
from boson_sde.dynamics import (
    SystemSpec,
    compute_B,
    compute_drift,
    compute_drift_real,
    dnse_rhs,
    integrate_meanfield,
    linear_generator,
    meanfield_rhs,
    random_spec,
    random_two_body_tensor,
    random_unit,
)

from conftest import loop_B


def free_spec(H0, n=1):
    N = len(H0)
    return SystemSpec(H0=np.asarray(H0, dtype=complex), tensor=np.zeros((N,) * 4), n=n)


def test_compute_B_zero_tensor():
    assert np.all(compute_B(np.array([0.3, 0.4j]), np.zeros((2,) * 4)) == 0)


def test_compute_B_dnse_tensor():
    np.testing.assert_allclose(compute_B(np.array([1, 0]), kronecker_tensor(2)), [[-1j, 0], [0, 0]])


def test_compute_B_matches_loops(rng):
    t = rng.normal(size=(3,) * 4) + 1j * rng.normal(size=(3,) * 4)
    z = random_unit(3, rng)
    np.testing.assert_allclose(compute_B(z, t), loop_B(z, t), atol=1e-12)


def test_compute_B_batched(rng):
    t = random_two_body_tensor(3, rng)
    z = random_unit(3, rng, 5)
    batched = compute_B(z, t)
    for k in range(5):
        np.testing.assert_allclose(batched[k], compute_B(z[k], t), atol=1e-14)


def test_drift_examples():
    assert np.all(compute_drift(np.array([1, 0]), free_spec(np.zeros((2, 2)))) == 0)
    np.testing.assert_allclose(compute_drift(np.array([1, 0]), free_spec(np.diag([1.0, -1.0]))), [-1j, 0])
    for c, n in [(1.0, 2), (3.75, 4)]:
        spec = build_dnse_spec(DnseParams(N=2, n=n, c=c, H0=np.zeros((2, 2))))
        np.testing.assert_allclose(compute_drift(np.array([1, 0]), spec), [-1j - c / n, 0], atol=1e-15)


def test_drift_real_form(rng):
    spec = random_spec(3, 2, 2, rng)
    z = random_unit(3, rng)
    np.testing.assert_array_equal(compute_drift_real(z, spec), to_real(compute_drift(z, spec)))


def test_drift_singular_at_origin():
    with pytest.raises(SingularityError):
        compute_drift(np.zeros(2), free_spec(np.eye(2)))
    with pytest.raises(SingularityError):
        dnse_rhs(np.zeros(2), np.eye(2))


def test_drift_uses_current_norm(rng):
    spec = random_spec(3, 2, 0, rng)
    z = random_unit(3, rng)
    # interaction term is homogeneous of degree 1, like the linear part
    np.testing.assert_allclose(compute_drift(2.5 * z, spec), 2.5 * compute_drift(z, spec), atol=1e-12)


def test_dnse_rhs_examples():
    np.testing.assert_allclose(dnse_rhs(np.array([1, 0]), np.zeros((2, 2))), [-1j, 0])
    z = np.array([1, 1]) / np.sqrt(2)
    v = -1j / (2 * np.sqrt(2))
    np.testing.assert_allclose(dnse_rhs(z, np.zeros((2, 2))), [v, v], atol=1e-15)


def test_dnse_rhs_matches_meanfield_drift(rng):
    spec = build_dnse_spec(DnseParams(N=4, n=3, c=2.0))
    rhs = meanfield_rhs(spec)
    for z in random_unit(4, rng, 20):
        np.testing.assert_allclose(rhs(z), dnse_rhs(z, spec.H0), atol=1e-12)


def test_norm_preserving_deterministic_drift(rng):
    for _ in range(20):
        spec = random_spec(3, 2, 0, rng)
        z = random_unit(3, rng)
        assert abs(np.vdot(z, compute_drift(z, spec)).real) <= 1e-12


def test_linear_drift_without_interactions(rng):
    spec = random_spec(3, 2, 0, rng).replace(tensor=np.zeros((3,) * 4))
    z = random_unit(3, rng)
    np.testing.assert_array_equal(compute_drift(z, spec), -1j * z @ spec.H0.T)


def test_linear_generator_antisymmetric(rng):
    H0 = random_spec(4, 1, 0, rng).H0
    A = linear_generator(H0)
    assert np.max(np.abs(A + A.T)) <= 1e-12
    z = random_unit(4, rng)
    np.testing.assert_allclose(A @ to_real(z), to_real(-1j * H0 @ z), atol=1e-12)


def test_integrate_linear_closed_form():
    spec = free_spec(np.diag([1.0, -1.0]))
    sol = integrate_meanfield(np.array([1, 0]), meanfield_rhs(spec), np.pi, 1e-3)
    assert sol.times[-1] == np.pi
    assert np.all(np.diff(sol.times) > 0)
    assert len(sol.times) == len(sol.states)
    np.testing.assert_allclose(sol.final, [-1, 0], atol=1e-8)


def test_integrate_dnse_phase_rotation():
    sol = integrate_meanfield(np.array([1, 0]), lambda z: dnse_rhs(z, np.zeros((2, 2))), 1.0, 1e-3)
    np.testing.assert_allclose(sol.final, [np.exp(-1j), 0], atol=1e-8)


def test_integrate_short_last_step():
    sol = integrate_meanfield(np.array([1.0]), lambda z: -1j * z, 0.25, 0.1)
    np.testing.assert_allclose(sol.times, [0, 0.1, 0.2, 0.25])
    # RK4 local error at dt = 0.1 is about dt^5 / 120
    np.testing.assert_allclose(sol.final, [np.exp(-0.25j)], atol=1e-6)


def test_rk4_fourth_order():
    spec = free_spec(np.array([[0.3, 0.7], [0.7, -0.2]]))
    exact_w, exact_v = np.linalg.eigh(spec.H0)
    z0 = np.array([1, 0], dtype=complex)
    exact = exact_v @ (np.exp(-1j * exact_w * 5.0) * (exact_v.conj().T @ z0))
    errs = [
        np.max(np.abs(integrate_meanfield(z0, meanfield_rhs(spec), 5.0, dt).final - exact))
        for dt in (0.1, 0.05)
    ]
    assert errs[0] / errs[1] >= 12


def test_systemspec_validation():
    with pytest.raises(ValidationError):
        SystemSpec(H0=[[0, 1], [0, 0]], tensor=np.zeros((2,) * 4))
    bad = np.zeros((2,) * 4, dtype=complex)
    bad[0, 1, 0, 0] = 1j
    with pytest.raises(ValidationError):
        SystemSpec(H0=np.eye(2), tensor=bad)
    with pytest.raises(ValidationError):
        SystemSpec(H0=np.eye(2), tensor=np.zeros((2,) * 4), n=0)
    spec = SystemSpec(H0=np.eye(2), tensor=np.zeros((2,) * 4))
    assert spec.M == 0 and spec.N == 2
    with pytest.raises(ValueError):
        spec.H0[0, 0] = 2.0
