"""Deterministic dynamics: interaction matrix B(z), the full drift, mean-field ODEs.

The open system is

    rho' = -i[H, rho] - sum_m [X_m, [X_m, rho]]
    H    = H0_jk a+_j a_k + (1/2n) T_jklm a+_j a+_k a_l a_m
    X_m  = (1/sqrt n) (X_m)_jk a+_j a_k

and :class:`SystemSpec` stores the unscaled ``H0``, ``T`` and ``X_m``; the
``1/(2n)`` and ``1/sqrt(n)`` prefactors are applied where needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    DimensionError,
    SingularityError,
    ValidationError,
    check_hermitian,
    max_abs,
    to_real,
)


def symmetrized_tensor(tensor) -> np.ndarray:
    """Average of ``T`` over the exchanges j<->k and l<->m.

    Only this part of the tensor contributes to ``a+_j a+_k a_l a_m``.
    """
    t = np.asarray(tensor, dtype=complex)
    return 0.25 * (t + t.transpose(1, 0, 2, 3) + t.transpose(0, 1, 3, 2) + t.transpose(1, 0, 3, 2))


def two_body_hermiticity_error(tensor) -> float:
    """max |S_jklm - conj(S_mlkj)| for the symmetrized tensor S.

    Zero exactly when the two-body operator is Hermitian on every n >= 2 sector.
    """
    s = symmetrized_tensor(tensor)
    return max_abs(s - s.transpose(3, 2, 1, 0).conj())


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Open bosonic system: one-body ``H0``, two-body ``tensor``, dissipators ``Xs``, boson count ``n``."""

    H0: np.ndarray
    tensor: np.ndarray
    Xs: np.ndarray = field(default=None)
    n: int = 1

    def __post_init__(self):
        h0 = check_hermitian(self.H0, "H0")
        N = h0.shape[0]
        tensor = np.asarray(self.tensor, dtype=complex)
        if tensor.shape != (N,) * 4:
            raise DimensionError(f"tensor must have shape {(N,) * 4}, got {tensor.shape}")
        err = two_body_hermiticity_error(tensor)
        if err > 1e-10 * max(1.0, max_abs(tensor)):
            raise ValidationError(f"two-body tensor does not define a Hermitian operator (error {err:.3e})")
        xs = np.zeros((0, N, N), dtype=complex) if self.Xs is None else np.asarray(self.Xs, dtype=complex)
        if xs.ndim == 2:
            xs = xs[None]
        if xs.size == 0:
            xs = np.zeros((0, N, N), dtype=complex)
        if xs.shape[1:] != (N, N):
            raise DimensionError(f"each X_m must be {N}x{N}, got {xs.shape[1:]}")
        for m, x in enumerate(xs):
            check_hermitian(x, f"Xs[{m}]")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"boson count n must be a positive integer, got {self.n!r}")
        for name, value in (("H0", h0), ("tensor", tensor), ("Xs", xs)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "n", int(self.n))

    @property
    def N(self) -> int:
        return self.H0.shape[0]

    @property
    def M(self) -> int:
        return self.Xs.shape[0]

    def replace(self, **changes) -> "SystemSpec":
        kwargs = dict(H0=self.H0, tensor=self.tensor, Xs=self.Xs, n=self.n)
        kwargs.update(changes)
        return SystemSpec(**kwargs)


def _check_modes(z, N: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != N:
        raise DimensionError(f"mode vector has length {z.shape[-1]}, expected {N}")
    return z


def _norm2(z) -> np.ndarray:
    norm2 = np.sum(np.abs(z) ** 2, axis=-1)
    if np.any(norm2 == 0):
        raise SingularityError("drift is singular at |z| = 0")
    return norm2


def compute_B(z, tensor) -> np.ndarray:
    """B_jk(z) = -(i/2) (T_jklm + T_kjlm) z_l z_m; batched over leading axes of ``z``."""
    tensor = np.asarray(tensor, dtype=complex)
    z = _check_modes(z, tensor.shape[0])
    pair = tensor + tensor.transpose(1, 0, 2, 3)
    return -0.5j * np.einsum("jklm,...l,...m->...jk", pair, z, z, optimize=True)


def interaction_drift(z, tensor) -> np.ndarray:
    """Mean-field interaction term ``B(z) z* / |z|^2``."""
    z = np.asarray(z, dtype=complex)
    b = compute_B(z, tensor)
    return np.einsum("...jk,...k->...j", b, z.conj()) / _norm2(z)[..., None]


def compute_drift(z, spec: SystemSpec) -> np.ndarray:
    """F(z) = -i H0 z + B(z) z*/|z|^2 - (1/n) sum_m X_m^2 z."""
    z = _check_modes(z, spec.N)
    f = -1j * z @ spec.H0.T + interaction_drift(z, spec.tensor)
    if spec.M:
        x2 = np.einsum("mij,mjk->ik", spec.Xs, spec.Xs)
        f = f - (z @ x2.T) / spec.n
    return f


def compute_drift_real(z, spec: SystemSpec) -> np.ndarray:
    return to_real(compute_drift(z, spec))


def meanfield_rhs(spec: SystemSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Right-hand side of the n -> infinity limit: z' = -i H0 z + B(z) z*/|z|^2."""

    def rhs(z):
        z = _check_modes(z, spec.N)
        return -1j * z @ spec.H0.T + interaction_drift(z, spec.tensor)

    return rhs


def dnse_rhs(z, H0) -> np.ndarray:
    """Discrete nonlinear Schroedinger right-hand side, z_j' = -i H0_jk z_k - i |z_j|^2 z_j / |z|^2."""
    H0 = np.asarray(H0, dtype=complex)
    z = _check_modes(z, H0.shape[0])
    norm2 = _norm2(z)[..., None]
    return -1j * z @ H0.T - 1j * np.abs(z) ** 2 * z / norm2


def linear_generator(H0) -> np.ndarray:
    """Real 2N x 2N matrix A with r' = A r equivalent to z' = -i H0 z."""
    g = -1j * np.asarray(H0, dtype=complex)
    return np.block([[g.real, -g.imag], [g.imag, g.real]])


@dataclass
class OdeSolution:
    times: np.ndarray
    states: np.ndarray  # (len(times), N) complex

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _time_grid(t_final: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    n_full = int(np.floor(t_final / dt + 1e-9))
    times = dt * np.arange(n_full + 1)
    if t_final - times[-1] > 1e-12 * max(1.0, t_final):
        times = np.append(times, t_final)
    if len(times) > 1:
        times[-1] = t_final
    return times


def integrate_meanfield(
    z0,
    rhs: Callable[[np.ndarray], np.ndarray],
    t_final: float,
    dt: float,
    method: str = "rk4",
) -> OdeSolution:
    """Fixed-step integration of z' = rhs(z); the last step is shortened to land on ``t_final``.

    ``method`` is ``"rk4"`` (classic fourth order) or ``"euler"``.
    """
    if method not in ("rk4", "euler"):
        raise ValueError(f"unknown method {method!r}")
    times = _time_grid(t_final, dt)
    z = np.array(z0, dtype=complex)
    states = np.empty((len(times),) + z.shape, dtype=complex)
    states[0] = z
    for i in range(1, len(times)):
        h = times[i] - times[i - 1]
        if method == "euler":
            z = z + h * rhs(z)
        else:
            k1 = rhs(z)
            k2 = rhs(z + 0.5 * h * k1)
            k3 = rhs(z + 0.5 * h * k2)
            k4 = rhs(z + h * k3)
            z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i] = z
    return OdeSolution(times=times, states=states)


def random_hermitian(N: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return scale * (a + a.conj().T) / 2


def random_two_body_tensor(N: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random tensor whose two-body operator is Hermitian."""
    t = rng.normal(size=(N,) * 4) + 1j * rng.normal(size=(N,) * 4)
    t = symmetrized_tensor(t)
    return scale * 0.5 * (t + t.transpose(3, 2, 1, 0).conj())


def random_spec(N: int, n: int, M: int, rng: np.random.Generator, scale: float = 1.0) -> SystemSpec:
    """Random open system, mostly for tests and demos."""
    return SystemSpec(
        H0=random_hermitian(N, rng, scale),
        tensor=random_two_body_tensor(N, rng, scale),
        Xs=np.array([random_hermitian(N, rng, scale) for _ in range(M)]).reshape(M, N, N),
        n=n,
    )


def random_unit(N: int, rng: np.random.Generator, size: Sequence[int] | int | None = None) -> np.ndarray:
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (N,)
    z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)
