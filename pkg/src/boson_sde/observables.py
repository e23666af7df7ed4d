"""Observables evaluated on both sides of the correspondence.

For a scaled one-body observable O_hat = (1/n) O_jk a+_j a_k, the Fock-side value
Tr[O_hat (|z><z|)^{(x) n}] equals y(z) = |z|^(2n-2) z^H O z, so ensembles of mode
vectors can be scored without building any density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, ValidationError, check_hermitian
from .fock import FockBasis, lift_one_body
from .oracle import as_modes

IMAG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Observable:
    """``kind`` is ``"one_body"`` (N x N matrix, optionally scaled by 1/n) or ``"fock_matrix"``."""

    kind: str
    matrix: np.ndarray
    scaled: bool = True
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("one_body", "fock_matrix"):
            raise ValidationError(f"unknown observable kind {self.kind!r}")
        m = check_hermitian(self.matrix, f"observable {self.name or self.kind}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def lifted(self, basis: FockBasis) -> np.ndarray:
        if self.kind == "fock_matrix":
            if self.matrix.shape != (basis.dim, basis.dim):
                raise DimensionError(f"Fock observable must be {basis.dim}x{basis.dim}")
            return np.asarray(self.matrix)
        lift = lift_one_body(self.matrix, basis)
        return lift / basis.n if self.scaled else lift


def one_body(O, name: str = "", scaled: bool = True) -> Observable:
    return Observable("one_body", np.asarray(O, dtype=complex), scaled, name)


def population(j: int, N: int) -> Observable:
    """Fraction of bosons in mode ``j``: (1/n) a+_j a_j, with y(z) = |z_j|^2 on the unit sphere."""
    O = np.zeros((N, N))
    O[j, j] = 1.0
    return one_body(O, name=f"pop{j}")


def expect_rho(obs: Observable, rho, basis: FockBasis) -> float:
    """Re Tr(O_hat rho); raises if the imaginary residue exceeds 1e-9."""
    value = np.trace(obs.lifted(basis) @ np.asarray(rho, dtype=complex))
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value.real)):
        raise ValidationError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def sample_values(obs: Observable, states, basis_like) -> np.ndarray:
    """y(z) for each sample; ``basis_like`` supplies n and N (a FockBasis or an (n, N) pair)."""
    if obs.kind != "one_body":
        raise ValidationError("z-side evaluation needs a one-body observable")
    n, N = (basis_like.n, basis_like.N) if isinstance(basis_like, FockBasis) else basis_like
    z = as_modes(states, N)
    norm2 = np.sum(np.abs(z) ** 2, axis=-1)
    quad = np.einsum("sj,jk,sk->s", z.conj(), obs.matrix, z).real
    y = norm2 ** (n - 1) * quad
    return y if obs.scaled else n * y


def expect_sde(obs: Observable, states, basis_like) -> tuple[float, float]:
    """Sample mean and standard error of y(z) over an ensemble snapshot."""
    y = sample_values(obs, states, basis_like)
    if len(y) == 0:
        raise ValidationError("ensemble is empty")
    err = float(np.std(y, ddof=1) / math.sqrt(len(y))) if len(y) > 1 else 0.0
    return float(np.mean(y)), err


def output_error_bound(obs: Observable, trace_dist: float, basis: FockBasis) -> float:
    """Holder bound ||O_hat|| * trace_dist on the error of an expectation value."""
    if trace_dist < 0:
        raise ValidationError("trace distance must be non-negative")
    return float(np.max(np.abs(np.linalg.eigvalsh(obs.lifted(basis))))) * trace_dist
