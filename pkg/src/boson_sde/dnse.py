"""Stochastic discrete nonlinear Schroedinger example.

On-site interaction T_jklm = delta_jk delta_kl delta_lm with one dephasing
dissipator sqrt(c) e_m e_m^T per site.  The diffusion matrix splits into 2x2
blocks per site, each with one negative eigenvalue of size at most
|z_j|^2 / (16 n c), so a trace-norm error budget ``epsilon`` at time ``t`` is
met with c = 3t / (8 epsilon).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ValidationError, check_hermitian
from .dynamics import SystemSpec


def ring_hopping(N: int) -> np.ndarray:
    """Nearest-neighbour ring: ones on the two off-diagonals with periodic wrap.

    Entries are assigned, not accumulated, so N = 2 gives [[0, 1], [1, 0]].
    """
    h = np.zeros((N, N))
    for j in range(N):
        if N > 1:
            h[j, (j + 1) % N] = 1.0
            h[(j + 1) % N, j] = 1.0
    return h


def kronecker_tensor(N: int) -> np.ndarray:
    t = np.zeros((N,) * 4, dtype=complex)
    for j in range(N):
        t[j, j, j, j] = 1.0
    return t


def c_for_error(t: float, epsilon: float) -> float:
    """Dissipation strength c = 3t / (8 epsilon) meeting a trace-norm budget epsilon."""
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if t < 0:
        raise ValidationError("t must be non-negative")
    return 3.0 * t / (8.0 * epsilon)


def trace_bound(t: float, c: float) -> float:
    """Closed-form trace-norm error bound 3t / (8c)."""
    if not c > 0:
        raise ValidationError("c must be positive for a finite bound")
    return 3.0 * t / (8.0 * c)


@dataclass(frozen=True)
class DnseParams:
    """Parameters of the stochastic DNSE; give either ``c`` or ``epsilon`` (then c = 3 t / (8 epsilon))."""

    N: int
    n: int
    H0: np.ndarray = field(default=None)
    c: float | None = None
    t_final: float = 1.0
    epsilon: float | None = None

    def __post_init__(self):
        if self.N < 1 or self.n < 1:
            raise ValidationError("N and n must be positive")
        h0 = ring_hopping(self.N) if self.H0 is None else check_hermitian(self.H0, "system.H0")
        if h0.shape != (self.N, self.N):
            raise ValidationError(f"system.H0 must be {self.N}x{self.N}")
        object.__setattr__(self, "H0", h0)
        c = self.c
        if c is None:
            if self.epsilon is None:
                raise ValidationError("one of c or epsilon is required")
            c = c_for_error(self.t_final, self.epsilon)
        elif self.epsilon is not None and not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if c < 0:
            raise ValidationError("c must be non-negative")
        object.__setattr__(self, "c", float(c))


def build_dnse_spec(p: DnseParams) -> SystemSpec:
    Xs = np.zeros((p.N, p.N, p.N))
    for m in range(p.N):
        Xs[m, m, m] = math.sqrt(p.c)
    return SystemSpec(H0=p.H0, tensor=kronecker_tensor(p.N), Xs=Xs, n=p.n)


def dnse_block(zj: complex, c: float, n: int) -> np.ndarray:
    """The 2x2 diffusion block of site j in the (x_j, y_j) coordinates."""
    zj = complex(zj)
    z2 = zj * zj
    off = -0.25 * z2.real - 0.5 * c * z2.imag
    return np.array(
        [
            [0.25 * z2.imag + c * zj.imag**2, off],
            [off, -0.25 * z2.imag + c * zj.real**2],
        ]
    ) / n


def lambda_pm(zj: complex, c: float, n: int) -> tuple[float, float]:
    """Eigenvalues (|z_j|^2 / 4n)(2c +- sqrt(1 + 4c^2)) of :func:`dnse_block`."""
    pref = abs(zj) ** 2 / (4.0 * n)
    root = math.sqrt(1.0 + 4.0 * c * c)
    # lambda_- in the cancellation-free form -1 / (2c + root)
    return pref * (2.0 * c + root), -pref / (2.0 * c + root)


def alpha_upper_bound(c: float, n: int) -> float:
    """1 / (16 n c), the bound on the negative diffusion mass for unit z."""
    if not c > 0:
        raise ValidationError("alpha bound is unbounded for c = 0")
    if n < 1:
        raise ValidationError("n must be positive")
    return 1.0 / (16.0 * n * c)
