"""Diffusion geometry of the stochastic representation.

``compute_D`` assembles the 2N x 2N Fokker-Planck diffusion matrix of an open
system.  Because the represented density matrix only depends on the direction
of ``r``, radial diffusion can be removed (``project_Dperp``), negative
eigencomponents can be dropped (``psd_part``) and their total weight measured
(``neg_mass``).

Removing the radial rows/columns of D is not free: on the unit sphere the
generator changes by a first-order term ``-2 (Dr)_perp . grad``, which
:func:`radial_drift_correction` returns so the stochastic step can add it back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    NORM_TOL,
    DimensionError,
    ValidationError,
    check_hermitian,
    check_symmetric,
    check_unit,
    jacobi_eig,
    to_real,
)
from .dynamics import SystemSpec, compute_B

PSD_CLIP = 1e-10

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class NotPSDError(ValueError):
    """A matrix expected to be positive semi-definite has a clearly negative eigenvalue."""


def u_vectors(z, Xs) -> np.ndarray:
    """Diffusion directions u_m(z) = (Im X_m z, -Re X_m z), shape (..., M, 2N)."""
    xz = np.einsum("mjk,...k->...mj", np.asarray(Xs, dtype=complex), np.asarray(z, dtype=complex))
    return np.concatenate([xz.imag, -xz.real], axis=-1)


def interaction_block(b) -> np.ndarray:
    """The real 2N x 2N matrix [[Re B, Im B], [Im B, -Re B]]."""
    b = np.asarray(b)
    return np.concatenate(
        [
            np.concatenate([b.real, b.imag], axis=-1),
            np.concatenate([b.imag, -b.real], axis=-1),
        ],
        axis=-2,
    )


def compute_D(z, spec: SystemSpec) -> np.ndarray:
    """D(z) = (1/n) [ (1/4) [[Re B, Im B], [Im B, -Re B]] + sum_m u_m u_m^T ].

    Batched over leading axes of ``z``.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != spec.N:
        raise DimensionError(f"mode vector has length {z.shape[-1]}, expected {spec.N}")
    d = 0.25 * interaction_block(compute_B(z, spec.tensor))
    if spec.M:
        u = u_vectors(z, spec.Xs)
        d = d + np.einsum("...mi,...mj->...ij", u, u)
    return d / spec.n


def _projector(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.eye(r.shape[-1]) - r[..., :, None] * r[..., None, :]


def project_Dperp(D, r) -> np.ndarray:
    """Remove radial components: P D P with P = I - r r^T, for unit ``r``."""
    D = np.asarray(D, dtype=float)
    r = np.asarray(r, dtype=float)
    if D.shape[-1] != r.shape[-1]:
        raise DimensionError("D and r sizes differ")
    norms = np.linalg.norm(r, axis=-1)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ValidationError("project_Dperp needs a unit vector r")
    p = _projector(r)
    return p @ D @ p


def radial_drift_correction(D, r) -> np.ndarray:
    """Drift to add when D is replaced by its projection: -2 P D r / |r|^2.

    With this term the Ito generator acting on direction-only functions is
    unchanged by the projection.
    """
    D = np.asarray(D, dtype=float)
    r = np.asarray(r, dtype=float)
    norm2 = np.sum(r * r, axis=-1, keepdims=True)
    rhat = r / np.sqrt(norm2)
    dr = np.einsum("...ij,...j->...i", D, r)
    dr = dr - rhat * np.sum(rhat * dr, axis=-1, keepdims=True)
    return -2.0 * dr / norm2


def psd_part(S) -> np.ndarray:
    """Positive part (S + |S|)/2: the spectral decomposition with negative eigenvalues zeroed."""
    S = check_symmetric(S, "S")
    w, v = jacobi_eig(S)
    return (v * np.clip(w, 0.0, None)[..., None, :]) @ np.swapaxes(v, -1, -2)


def neg_mass(S) -> float:
    """Absolute sum of the negative eigenvalues of a symmetric matrix."""
    S = check_symmetric(S, "S")
    w, _ = jacobi_eig(S)
    return float(-np.sum(np.clip(w, None, 0.0)))


def neg_mass_batch(S) -> np.ndarray:
    """``neg_mass`` over a stack of symmetric matrices (no validation)."""
    w = np.linalg.eigvalsh(np.asarray(S, dtype=float))
    return -np.sum(np.clip(w, None, 0.0), axis=-1)


def sqrt_2D(Dplus) -> np.ndarray:
    """Symmetric G with G G^T = 2 D for PSD ``D``; eigenvalues in [-1e-10, 0) are clipped."""
    Dplus = check_symmetric(Dplus, "D")
    w, v = jacobi_eig(Dplus)
    if np.any(w < -PSD_CLIP):
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    return (v * np.sqrt(2.0 * np.clip(w, 0.0, None))[..., None, :]) @ np.swapaxes(v, -1, -2)


@dataclass
class DiffusionDecomposition:
    D: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    neg_mass: float


def decompose(D) -> DiffusionDecomposition:
    D = check_symmetric(D, "D")
    w, v = jacobi_eig(D)
    return DiffusionDecomposition(D=D, eigenvalues=w, eigenvectors=v, neg_mass=float(-np.sum(np.clip(w, None, 0.0))))


def alpha(z, spec: SystemSpec) -> float:
    """Negative-eigenvalue mass of D(z)."""
    return neg_mass(compute_D(z, spec))


def alpha_perp(z, spec: SystemSpec) -> float:
    """Negative-eigenvalue mass of the projected D(z) at unit z."""
    z = check_unit(np.asarray(z, dtype=complex))
    return neg_mass(project_Dperp(compute_D(z, spec), to_real(z)))


def build_cancellation_X(z, w, tol: float = NORM_TOL) -> np.ndarray:
    """Hermitian X = i w z^H - i z w^H + i (w^H z) z z^H with -i X z = w.

    Adding ``X`` as a dissipator produces diffusion along ``to_real(w)`` at ``z``.
    Requires unit ``z`` and Re(z^H w) = 0.
    """
    z = check_unit(np.asarray(z, dtype=complex))
    w = np.asarray(w, dtype=complex)
    if w.shape != z.shape:
        raise DimensionError("z and w must have the same length")
    overlap = np.vdot(w, z)
    if abs(overlap.real) > tol:
        raise ValidationError(f"Re(z^H w) must vanish, got {overlap.real:.3e}")
    X = 1j * np.outer(w, z.conj()) - 1j * np.outer(z, w.conj()) + 1j * overlap * np.outer(z, z.conj())
    # exact Hermitian part; the anti-Hermitian residue is 2i Re(w^H z) z z^H
    return 0.5 * (X + X.conj().T)


def tangent_basis(r) -> np.ndarray:
    """Orthonormal basis (rows) of the 2N-1 dimensional complement of unit ``r``."""
    r = np.asarray(r, dtype=float)
    q, _ = np.linalg.qr(np.column_stack([r, np.eye(r.size)]))
    basis = q[:, 1 : r.size].T
    return basis - np.outer(basis @ r, r)


def cancellation_set(z) -> np.ndarray:
    """The 2N-1 dissipators whose diffusion at ``z`` sums to (I - r r^T), one per tangent direction."""
    z = check_unit(np.asarray(z, dtype=complex))
    r = to_real(z)
    out = []
    for s in tangent_basis(r):
        w = s[: z.size] + 1j * s[z.size :]
        out.append(build_cancellation_X(z, w))
    return np.array(out)


def embedding_A(X) -> np.ndarray:
    """Real matrix A with u(r) = A r for the dissipator X: [[Im X, Re X], [-Re X, Im X]]."""
    X = check_hermitian(X, "X")
    return np.block([[X.imag, X.real], [-X.real, X.imag]])


def pauli_demo(n: int) -> tuple[np.ndarray, Callable[..., dict]]:
    """The three Pauli dissipators for N = 2 and a checker of their closed-form diffusion.

    The checker takes a unit real vector ``r`` (length 4) and returns the
    maximum deviations of: the anticommutators {A_j, A_k} from -2 delta_jk, the
    Gram matrix of u_m(r) from the identity, D(r) from (I - r r^T)/n, and the
    projected D from D.
    """
    Xs = PAULI.copy()
    spec = SystemSpec(H0=np.zeros((2, 2)), tensor=np.zeros((2,) * 4), Xs=Xs, n=n)
    A = [embedding_A(x) for x in Xs]
    anti = max(
        float(np.max(np.abs(A[j] @ A[k] + A[k] @ A[j] + 2.0 * (j == k) * np.eye(4))))
        for j in range(3)
        for k in range(3)
    )

    def check(r) -> dict:
        r = np.asarray(r, dtype=float)
        z = r[:2] + 1j * r[2:]
        u = u_vectors(z, Xs)
        D = compute_D(z, spec)
        closed = (np.eye(4) - np.outer(r, r)) / n
        return {
            "anticommutator": anti,
            "u_orthonormal": float(np.max(np.abs(u @ u.T - np.eye(3)))),
            "closed_form": float(np.max(np.abs(D - closed))),
            "projection": float(np.max(np.abs(project_Dperp(D, r) - D))),
        }

    return Xs, check
