"""Shared numerics: complex/real state conversion, validation, eigensolver, trace norm.

A mode vector ``z`` (complex, length N) and its real form ``r = (Re z, Im z)``
(length 2N) are used interchangeably throughout the package.  All functions
accept arrays with leading batch axes where that makes sense; the mode axis is
always the last one.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-9


class DimensionError(ValueError):
    """Array shapes are inconsistent with each other or with the operation."""


class ValidationError(ValueError):
    """An input violates a documented invariant (Hermiticity, unit norm, ...)."""


class SingularityError(ArithmeticError):
    """A formula was evaluated where it is singular (e.g. ``|z| = 0``)."""


def to_real(z):
    """Map complex amplitudes ``z`` (..., N) to ``r = (Re z, Im z)`` (..., 2N)."""
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag], axis=-1).astype(float, copy=False)


def to_complex(r):
    """Inverse of :func:`to_real`."""
    r = np.asarray(r, dtype=float)
    if r.shape[-1] % 2:
        raise DimensionError(f"real state must have even length, got {r.shape[-1]}")
    half = r.shape[-1] // 2
    return r[..., :half] + 1j * r[..., half:]


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_error(m) -> float:
    m = np.asarray(m)
    return max_abs(m - np.swapaxes(m, -1, -2).conj())


def is_hermitian(m, rtol: float = HERMITIAN_RTOL) -> bool:
    m = np.asarray(m)
    return hermiticity_error(m) <= rtol * max(1.0, max_abs(m))


def check_square(m, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def check_hermitian(m, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``m`` as a complex array, raising if it is not Hermitian.

    Inputs are rejected rather than symmetrized so that malformed system
    definitions surface immediately.
    """
    m = check_square(np.asarray(m, dtype=complex), name)
    if not is_hermitian(m, rtol):
        raise ValidationError(
            f"{name} is not Hermitian (max |M - M^H| = {hermiticity_error(m):.3e})"
        )
    return m


def check_symmetric(s, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    s = check_square(np.asarray(s), name)
    if np.iscomplexobj(s):
        if max_abs(s.imag) > rtol * max(1.0, max_abs(s)):
            raise ValidationError(f"{name} must be real")
        s = s.real
    s = s.astype(float, copy=False)
    if max_abs(s - np.swapaxes(s, -1, -2)) > rtol * max(1.0, max_abs(s)):
        raise ValidationError(f"{name} is not symmetric")
    return s


def check_unit(z, name: str = "z", tol: float = NORM_TOL) -> np.ndarray:
    z = np.asarray(z)
    norm2 = float(np.vdot(z, z).real)
    if abs(norm2 - 1.0) > tol:
        raise ValidationError(f"{name} must have unit norm, |{name}|^2 = {norm2!r}")
    return z


def jacobi_eig(s, tol: float = 1e-13, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition of real symmetric matrices.

    Works on a single matrix or a stack (..., m, m); rotations are applied to
    the whole stack at once.  Iterates until the off-diagonal Frobenius norm of
    every matrix is at most ``tol * ||S||_F``.

    Returns
    -------
    w : ndarray (..., m)
        Eigenvalues in descending order.
    v : ndarray (..., m, m)
        Orthonormal eigenvectors as columns, matching ``w``.
    """
    a = np.array(s, dtype=float, copy=True)
    batch_shape = a.shape[:-2]
    m = a.shape[-1]
    a = a.reshape(-1, m, m)
    v = np.broadcast_to(np.eye(m), a.shape).copy()
    fro = np.sqrt(np.einsum("bij,bij->b", a, a))
    iu, ju = np.triu_indices(m, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(a[:, iu, ju] ** 2, axis=1))
        if np.all(off <= tol * fro):
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[:, p, q]
                nz = apq != 0.0
                if not nz.any():
                    continue
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * np.where(nz, apq, 1.0))
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(nz, t, 0.0)
                c = (1.0 / np.sqrt(t * t + 1.0))[:, None]
                sn = t[:, None] * c
                ap, aq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p], a[:, :, q] = c * ap - sn * aq, sn * ap + c * aq
                ap, aq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :], a[:, q, :] = c * ap - sn * aq, sn * ap + c * aq
                vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p], v[:, :, q] = c * vp - sn * vq, sn * vp + c * vq
    w = np.diagonal(a, axis1=1, axis2=2)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w.reshape(batch_shape + (m,)), v.reshape(batch_shape + (m, m))


def sym_eig(s):
    """Validated eigendecomposition ``S = V diag(w) V^T`` with ``w`` descending."""
    s = check_symmetric(s, "S")
    return jacobi_eig(s)


def trace_norm(m) -> float:
    """Sum of singular values of a square matrix."""
    m = check_square(np.asarray(m), "M")
    if m.size == 0:
        return 0.0
    if is_hermitian(m):
        return float(np.sum(np.abs(np.linalg.eigvalsh(m))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(a, b) -> float:
    """Trace-norm distance ``||a - b||_*`` (no factor 1/2)."""
    return trace_norm(np.asarray(a) - np.asarray(b))
