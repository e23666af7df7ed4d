import numpy as np
import pytest

from boson_sde.core import DimensionError, ValidationError, to_real
from boson_sde.dynamics import random_hermitian, random_unit
from boson_sde.fock import coherent_product_state, fock_basis
from boson_sde.observables import Observable, expect_rho, expect_sde, one_body, output_error_bound, population, sample_values
from boson_sde.oracle import ensemble_to_rho


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_number_operator_is_one(rng):
    basis = fock_basis(3, 3)
    assert expect_rho(one_body(np.eye(3)), random_density(rng, basis.dim), basis) == pytest.approx(1.0, abs=1e-12)


def test_product_state_population(rng):
    basis = fock_basis(3, 2)
    for z in random_unit(2, rng, 10):
        psi = coherent_product_state(z, basis)
        rho = np.outer(psi, psi.conj())
        assert expect_rho(population(0, 2), rho, basis) == pytest.approx(abs(z[0]) ** 2, abs=1e-12)


def test_linearity(rng):
    basis = fock_basis(2, 3)
    O1, O2 = random_hermitian(3, rng), random_hermitian(3, rng)
    rho = random_density(rng, basis.dim)
    a, b = 0.7, -1.3
    lhs = expect_rho(one_body(a * O1 + b * O2), rho, basis)
    rhs = a * expect_rho(one_body(O1), rho, basis) + b * expect_rho(one_body(O2), rho, basis)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_unscaled_is_n_times_scaled(rng):
    basis = fock_basis(3, 2)
    O = random_hermitian(2, rng)
    rho = random_density(rng, basis.dim)
    assert expect_rho(one_body(O, scaled=False), rho, basis) == pytest.approx(3 * expect_rho(one_body(O), rho, basis))


def test_fock_matrix_observable(rng):
    basis = fock_basis(2, 2)
    M = random_hermitian(basis.dim, rng)
    rho = random_density(rng, basis.dim)
    assert expect_rho(Observable("fock_matrix", M), rho, basis) == pytest.approx(np.trace(M @ rho).real)
    with pytest.raises(DimensionError):
        Observable("fock_matrix", np.eye(2)).lifted(basis)
    with pytest.raises(ValidationError):
        sample_values(Observable("fock_matrix", M), np.zeros((1, 4)), basis)


def test_rejects_non_hermitian_and_complex_expectation():
    with pytest.raises(ValidationError):
        one_body(np.array([[0, 1], [0, 0]]))
    basis = fock_basis(1, 2)
    with pytest.raises(ValidationError):
        expect_rho(population(0, 2), np.array([[1j, 0], [0, 1]]), basis)


@pytest.mark.parametrize("n, N", [(1, 2), (2, 2), (3, 3)])
def test_estimators_coincide(rng, n, N):
    basis = fock_basis(n, N)
    obs = one_body(random_hermitian(N, rng))
    states = to_real(random_unit(N, rng, 50) * rng.uniform(0.8, 1.2, size=(50, 1)))
    mean, _ = expect_sde(obs, states, basis)
    assert mean == pytest.approx(expect_rho(obs, ensemble_to_rho(states, basis), basis), abs=1e-10)
    unscaled = one_body(obs.matrix, scaled=False)
    assert expect_sde(unscaled, states, (n, N))[0] == pytest.approx(expect_rho(unscaled, ensemble_to_rho(states, basis), basis), abs=1e-10)


def test_delta_ensemble_and_identity(rng):
    z = random_unit(2, rng)
    states = np.tile(to_real(z), (5, 1))
    mean, err = expect_sde(population(1, 2), states, (2, 2))
    assert mean == pytest.approx(abs(z[1]) ** 2, abs=1e-15) and err == 0.0
    mean, _ = expect_sde(one_body(np.eye(2)), to_real(random_unit(2, rng, 30)), (4, 2))
    assert mean == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        expect_sde(population(0, 2), np.zeros((0, 4)), (2, 2))


def test_output_error_bound():
    basis = fock_basis(2, 2)
    assert output_error_bound(population(0, 2), 0.0, basis) == 0.0
    assert output_error_bound(population(0, 2), 0.1, basis) == pytest.approx(0.1)
    with pytest.raises(ValidationError):
        output_error_bound(population(0, 2), -1.0, basis)
