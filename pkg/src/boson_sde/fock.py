"""Symmetric n-boson Fock space over N modes: basis, operator lifts, product states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DimensionError, NORM_TOL, ValidationError, check_hermitian

DEFAULT_CAP = 20_000


class ResourceError(RuntimeError):
    """A requested object would exceed a configured size cap."""


def basis_size(n: int, N: int) -> int:
    return math.comb(n + N - 1, n)


def _occupations(n: int, N: int):
    if N == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _occupations(n - first, N - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation vectors in lexicographically descending order, e.g. (2,0), (1,1), (0,2)."""

    n: int
    N: int
    occupations: np.ndarray = field(repr=False)
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.occupations)

    def __len__(self) -> int:
        return self.dim


def fock_basis(n: int, N: int, cap: int = DEFAULT_CAP) -> FockBasis:
    if n < 1 or N < 1:
        raise ValidationError("fock_basis needs n >= 1 and N >= 1")
    size = basis_size(n, N)
    if size > cap:
        raise ResourceError(f"Fock basis for n={n}, N={N} has {size} states (cap {cap})")
    occ = list(_occupations(n, N))
    arr = np.array(occ, dtype=int)
    arr.setflags(write=False)
    return FockBasis(n=n, N=N, occupations=arr, index={o: i for i, o in enumerate(occ)})


def lift_matrix(K, basis: FockBasis) -> np.ndarray:
    """Matrix of sum_jk K_jk a+_j a_k for any (not necessarily Hermitian) N x N matrix K."""
    K = np.asarray(K, dtype=complex)
    if K.shape != (basis.N, basis.N):
        raise DimensionError(f"one-body matrix must be {basis.N}x{basis.N}, got {K.shape}")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    nz = list(zip(*np.nonzero(K)))
    for i, occ in enumerate(basis.occupations):
        for j, k in nz:
            if occ[k] == 0:
                continue
            v = list(occ)
            amp = math.sqrt(v[k])
            v[k] -= 1
            amp *= math.sqrt(v[j] + 1)
            v[j] += 1
            out[basis.index[tuple(v)], i] += K[j, k] * amp
    return out


def lift_one_body(X, basis: FockBasis) -> np.ndarray:
    """Matrix of sum_jk X_jk a+_j a_k for Hermitian ``X``."""
    return lift_matrix(check_hermitian(X, "X"), basis)


def lift_two_body(tensor, n: int, basis: FockBasis) -> np.ndarray:
    """Matrix of (1/2n) sum T_jklm a+_j a+_k a_l a_m."""
    tensor = np.asarray(tensor, dtype=complex)
    if tensor.shape != (basis.N,) * 4:
        raise DimensionError(f"tensor must have shape {(basis.N,) * 4}, got {tensor.shape}")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    nz = list(zip(*np.nonzero(tensor)))
    for i, occ in enumerate(basis.occupations):
        for j, k, l, m in nz:
            v = list(occ)
            amp = 1.0
            for q in (m, l):
                if v[q] == 0:
                    amp = 0.0
                    break
                amp *= math.sqrt(v[q])
                v[q] -= 1
            if amp == 0.0:
                continue
            for q in (k, j):
                amp *= math.sqrt(v[q] + 1)
                v[q] += 1
            out[basis.index[tuple(v)], i] += tensor[j, k, l, m] * amp
    return out / (2.0 * n)


def _multinomial_sqrt(basis: FockBasis) -> np.ndarray:
    n_fact = math.factorial(basis.n)
    return np.array(
        [math.sqrt(n_fact / math.prod(math.factorial(a) for a in occ)) for occ in basis.occupations]
    )


def product_amplitudes(z, basis: FockBasis) -> np.ndarray:
    """Components of z^{(x) n} in the occupation basis, batched over leading axes (no norm check)."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != basis.N:
        raise DimensionError(f"mode vector has length {z.shape[-1]}, expected {basis.N}")
    powers = np.prod(z[..., None, :] ** basis.occupations, axis=-1)
    return _multinomial_sqrt(basis) * powers


def coherent_product_state(z, basis: FockBasis) -> np.ndarray:
    """|z>^{(x) n} for unit ``z``; amplitude sqrt(n!/prod nu_j!) prod z_j^nu_j."""
    z = np.asarray(z, dtype=complex)
    norm2 = float(np.vdot(z, z).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValidationError(f"coherent_product_state needs unit z, |z|^2 = {norm2!r}")
    return product_amplitudes(z, basis)
