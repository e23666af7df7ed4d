"""Exact reference dynamics on the symmetric Fock subspace.

* :func:`integrate_lindblad` solves rho' = -i[H, rho] - sum_m [X_m, [X_m, rho]]
  with RK4 on the lifted operators.
* :func:`random_walk_trajectory` unravels the same evolution into pure states
  driven by +-1 kicks exp(-i sqrt(2 dt) Q_m X_m).
* :func:`ensemble_to_rho` maps an SDE ensemble of mode vectors back to a
  density matrix, averaging (|z><z|)^{(x) n}.
* :func:`beta_witness` and :func:`error_bound_check` evaluate the trace-norm
  error budget of dropping negative diffusion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    NORM_TOL,
    DimensionError,
    ValidationError,
    check_unit,
    hermiticity_error,
    to_complex,
    to_real,
    trace_distance,
    trace_norm,
)
from .diffusion import compute_D, neg_mass, project_Dperp
from .dynamics import SystemSpec, _time_grid
from .fock import DEFAULT_CAP, FockBasis, coherent_product_state, fock_basis, lift_matrix, lift_one_body, lift_two_body, product_amplitudes
from .rng import sign_block

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-8
ORDERINGS = ("hamiltonian_first", "kicks_first", "joint")


class IntegrationAccuracyError(ArithmeticError):
    """The integrated density matrix left the physical set by more than the tolerance."""


class FockModel:
    """Lifted operators of a :class:`SystemSpec` on its n-boson Fock space."""

    def __init__(self, spec: SystemSpec, cap: int = DEFAULT_CAP):
        self.spec = spec
        self.basis = fock_basis(spec.n, spec.N, cap)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @cached_property
    def H(self) -> np.ndarray:
        h = lift_one_body(self.spec.H0, self.basis) + lift_two_body(self.spec.tensor, self.spec.n, self.basis)
        h.setflags(write=False)
        return h

    @cached_property
    def X(self) -> np.ndarray:
        """Lifted dissipators including the 1/sqrt(n) factor, shape (M, dim, dim)."""
        out = np.array(
            [lift_one_body(x, self.basis) / math.sqrt(self.spec.n) for x in self.spec.Xs]
        ).reshape(self.spec.M, self.dim, self.dim)
        out.setflags(write=False)
        return out

    def coherent(self, z) -> np.ndarray:
        return coherent_product_state(z, self.basis)

    def product_density(self, z) -> np.ndarray:
        psi = self.coherent(z)
        return np.outer(psi, psi.conj())


def lindblad_rhs(rho, model: FockModel) -> np.ndarray:
    """-i[H, rho] - sum_m [X_m, [X_m, rho]]."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise DimensionError(f"rho must be {model.dim}x{model.dim}, got {rho.shape}")
    H = model.H
    out = -1j * (H @ rho - rho @ H)
    for x in model.X:
        c = x @ rho - rho @ x
        out -= x @ c - c @ x
    return out


@dataclass
class DensityReport:
    hermiticity: float
    trace_error: float
    min_eigenvalue: float

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity <= HERMITIAN_TOL
            and self.trace_error <= TRACE_TOL
            and self.min_eigenvalue >= -POSITIVITY_TOL
        )


def density_report(rho) -> DensityReport:
    rho = np.asarray(rho, dtype=complex)
    herm = 0.5 * (rho + rho.conj().T)
    return DensityReport(
        hermiticity=hermiticity_error(rho),
        trace_error=abs(np.trace(rho).real - 1.0),
        min_eigenvalue=float(np.linalg.eigvalsh(herm)[0]),
    )


@dataclass
class LindbladSolution:
    times: np.ndarray
    rhos: np.ndarray  # (T, dim, dim)

    @property
    def final(self) -> np.ndarray:
        return self.rhos[-1]


def integrate_lindblad(rho0, model: FockModel, t_final: float, dt: float, snapshot_times=None) -> LindbladSolution:
    """RK4 integration; the step grid ends exactly on ``t_final``.

    Snapshots are taken at the first grid point at or after each requested time
    (default: every grid point).
    """
    rho = np.array(rho0, dtype=complex)
    rep = density_report(rho)
    if not rep.ok:
        raise ValidationError(f"rho0 is not a valid density matrix: {rep}")
    times = _time_grid(t_final, dt)
    if snapshot_times is None:
        keep = np.arange(len(times))
    else:
        keep = np.array([int(np.searchsorted(times, t - 1e-12)) for t in np.atleast_1d(snapshot_times)])
        keep = np.minimum(keep, len(times) - 1)
    out = []
    k = 0
    for i in range(len(times)):
        if i > 0:
            h = times[i] - times[i - 1]
            k1 = lindblad_rhs(rho, model)
            k2 = lindblad_rhs(rho + 0.5 * h * k1, model)
            k3 = lindblad_rhs(rho + 0.5 * h * k2, model)
            k4 = lindblad_rhs(rho + h * k3, model)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        while k < len(keep) and keep[k] == i:
            rep = density_report(rho)
            if rep.min_eigenvalue < -POSITIVITY_TOL:
                raise IntegrationAccuracyError(
                    f"min eigenvalue {rep.min_eigenvalue:.3e} at t={times[i]:.6g}; reduce dt"
                )
            out.append(rho.copy())
            k += 1
    return LindbladSolution(times=times[keep], rhos=np.array(out))


def hermitian_expm(A, scale: complex) -> np.ndarray:
    """exp(scale * A) for Hermitian A, through its eigendecomposition."""
    w, v = np.linalg.eigh(A)
    return (v * np.exp(scale * w)) @ v.conj().T


class StepUnitaries:
    """Per-step unitaries exp(-i H dt) and exp(-+i sqrt(2 dt) X_m)."""

    def __init__(self, model: FockModel, dt: float):
        self.model = model
        self.dt = dt
        self.theta = math.sqrt(2.0 * dt)
        self.UH = hermitian_expm(model.H, -1j * dt)
        self.kick = np.array(
            [[hermitian_expm(x, -1j * self.theta), hermitian_expm(x, 1j * self.theta)] for x in model.X]
        ).reshape(model.spec.M, 2, model.dim, model.dim)

    def kick_matrix(self, m: int, q: float) -> np.ndarray:
        return self.kick[m, 0] if q > 0 else self.kick[m, 1]

    def joint(self, qs) -> np.ndarray:
        gen = self.model.H * self.dt + self.theta * np.tensordot(np.asarray(qs, dtype=float), self.model.X, axes=1)
        return hermitian_expm(gen, -1j)

    def branch_unitary(self, qs, ordering: str = "hamiltonian_first") -> np.ndarray:
        """Full one-step unitary for the sign pattern ``qs``."""
        if ordering == "joint":
            return self.joint(qs)
        kicks = np.eye(self.model.dim, dtype=complex)
        for m, q in enumerate(qs):
            kicks = self.kick_matrix(m, q) @ kicks
        if ordering == "hamiltonian_first":
            return kicks @ self.UH
        if ordering == "kicks_first":
            return self.UH @ kicks
        raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")


def branch_average(rho, model: FockModel, dt: float, ordering: str = "hamiltonian_first", unitaries=None) -> np.ndarray:
    """Exhaustive average of U rho U^H over all 2^M sign patterns of one step."""
    st = unitaries or StepUnitaries(model, dt)
    rho = np.asarray(rho, dtype=complex)
    M = model.spec.M
    out = np.zeros_like(rho)
    for qs in itertools.product((1.0, -1.0), repeat=M):
        U = st.branch_unitary(qs, ordering)
        out += U @ rho @ U.conj().T
    return out / 2**M


def average_step(rho, st: StepUnitaries, ordering: str = "hamiltonian_first") -> np.ndarray:
    """Exact expectation of one random-walk step applied to ``rho``."""
    # independent signs: the 2^M average factorizes into per-m channels
    def kicks(r):
        for m in range(st.model.spec.M):
            a, b = st.kick[m]
            r = 0.5 * (a @ r @ a.conj().T + b @ r @ b.conj().T)
        return r

    def ham(r):
        return st.UH @ r @ st.UH.conj().T

    if ordering == "hamiltonian_first":
        return kicks(ham(rho))
    if ordering == "kicks_first":
        return ham(kicks(rho))
    return branch_average(rho, st.model, st.dt, "joint", st)


def branch_averaged_evolution(rho0, model: FockModel, dt: float, t_final: float, ordering: str = "hamiltonian_first") -> np.ndarray:
    """Exact expectation of the random-walk density matrix after round(t_final/dt) steps."""
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError("t_final must be a multiple of dt for the random walk")
    st = StepUnitaries(model, dt)
    rho = np.array(rho0, dtype=complex)
    for _ in range(steps):
        rho = average_step(rho, st, ordering)
    return rho


@dataclass
class WalkEnsemble:
    times: np.ndarray
    states: np.ndarray  # (T, S, dim)

    def rho(self, i: int) -> np.ndarray:
        psi = self.states[i]
        return psi.T @ psi.conj() / psi.shape[0]


def random_walk_trajectory(
    psi0,
    model: FockModel,
    dt: float,
    t_final: float,
    seed: int = 0,
    runs=1,
    snapshot_times=None,
    ordering: str = "hamiltonian_first",
    signs=None,
) -> WalkEnsemble:
    """Pure-state trajectories under the +-1 random walk.

    ``runs`` is a count or an explicit array of run indices; run ``k`` takes
    Q_m at step s from the counter stream ``(seed, k, s, m)``.  Passing
    ``signs`` with shape (steps, S, M) overrides the stream.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (model.dim,):
        raise DimensionError(f"psi0 must have length {model.dim}")
    if abs(np.vdot(psi0, psi0).real - 1.0) > NORM_TOL:
        raise ValidationError("psi0 must have unit norm")
    if ordering not in ORDERINGS:
        raise ValueError(f"unknown ordering {ordering!r}")
    runs = np.arange(runs) if np.ndim(runs) == 0 else np.asarray(runs)
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError("t_final must be a multiple of dt for the random walk")
    want = np.arange(steps + 1) if snapshot_times is None else np.array(
        [int(math.ceil(t / dt - 1e-9)) for t in np.atleast_1d(snapshot_times)]
    )
    st = StepUnitaries(model, dt)
    M = model.spec.M
    psi = np.broadcast_to(psi0, (len(runs), model.dim)).copy()
    out = []
    k = 0
    for step in range(steps + 1):
        if step > 0:
            q = signs[step - 1] if signs is not None else sign_block(seed, runs, step, M)
            if ordering == "joint":
                for pattern in itertools.product((1.0, -1.0), repeat=M):
                    sel = np.all(q == np.array(pattern), axis=-1)
                    if sel.any():
                        psi[sel] = psi[sel] @ st.joint(pattern).T
            else:
                if ordering == "hamiltonian_first":
                    psi = psi @ st.UH.T
                for m in range(M):
                    plus = q[:, m] > 0
                    psi = np.where(plus[:, None], psi @ st.kick[m, 0].T, psi @ st.kick[m, 1].T)
                if ordering == "kicks_first":
                    psi = psi @ st.UH.T
        while k < len(want) and want[k] == step:
            out.append(psi.copy())
            k += 1
    return WalkEnsemble(times=want * dt, states=np.array(out))


def as_modes(states, N: int) -> np.ndarray:
    """Complex (S, N) mode vectors from complex (S, N) or real (S, 2N) input."""
    states = np.asarray(states)
    if np.iscomplexobj(states):
        z = states
    elif states.shape[-1] == 2 * N:
        z = to_complex(states)
    else:
        raise DimensionError("states must be complex (S, N) or real (S, 2N)")
    if z.ndim == 1:
        z = z[None]
    if z.shape[-1] != N:
        raise DimensionError(f"states have {z.shape[-1]} modes, expected {N}")
    if len(z) == 0:
        raise ValidationError("ensemble is empty")
    return z


def ensemble_vectors(states, basis: FockBasis) -> np.ndarray:
    """Unnormalized z^{(x) n} for every sample, so psi psi^H = (|z><z|)^{(x) n}."""
    return product_amplitudes(as_modes(states, basis.N), basis)


def ensemble_to_rho(states, basis: FockBasis, weights=None) -> np.ndarray:
    """Sample average of (|z><z|)^{(x) n} restricted to the symmetric subspace.

    ``states`` holds complex mode vectors (S, N) or real states (S, 2N).
    """
    psi = ensemble_vectors(states, basis)
    if weights is None:
        return psi.T @ psi.conj() / len(psi)
    weights = np.asarray(weights, dtype=float)
    return (psi.T * weights) @ psi.conj() / weights.sum()


def bootstrap_trace_error(states, basis: FockBasis, n_boot: int = 100, seed: int = 0) -> float:
    """RMS trace distance between bootstrap-resampled reconstructions and the full one."""
    psi = ensemble_vectors(states, basis)
    S = len(psi)
    full = psi.T @ psi.conj() / S
    rng = np.random.default_rng(seed)
    dists = []
    for _ in range(n_boot):
        counts = np.bincount(rng.integers(0, S, size=S), minlength=S)
        boot = (psi.T * counts) @ psi.conj() / S
        dists.append(trace_distance(boot, full))
    return float(np.sqrt(np.mean(np.square(dists))))


def admissible_pair(rng: np.random.Generator, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Random unit z and unit w with Re(z^H w) = 0."""
    z = rng.normal(size=N) + 1j * rng.normal(size=N)
    z /= np.linalg.norm(z)
    w = rng.normal(size=N) + 1j * rng.normal(size=N)
    w -= np.vdot(z, w).real * z
    return z, w / np.linalg.norm(w)


def beta_witness(z, w, n: int, basis: FockBasis | None = None) -> float:
    """Trace norm of the change in rho' at (|z><z|)^{(x) n} caused by unit diffusion along w.

    Builds M = i [w - (z^H w) z] a^+ (z^* . a) on the Fock space and evaluates
    ||E + E^H||_* with E = (M - 2i(z^H w)) M rho - M rho M^H + n (z^H w)^2 rho.
    """
    z = check_unit(np.asarray(z, dtype=complex))
    w = np.asarray(w, dtype=complex)
    if w.shape != z.shape:
        raise DimensionError("z and w must have the same length")
    zw = np.vdot(z, w)
    if abs(zw.real) > NORM_TOL:
        raise ValidationError(f"Re(z^H w) must vanish, got {zw.real:.3e}")
    basis = basis or fock_basis(n, z.size)
    b = w - zw * z
    Mh = lift_matrix(1j * np.outer(b, z.conj()), basis)
    psi = coherent_product_state(z, basis)
    rho = np.outer(psi, psi.conj())
    E = (Mh - 2j * zw * np.eye(basis.dim)) @ Mh @ rho - Mh @ rho @ Mh.conj().T + n * zw**2 * rho
    return trace_norm(E + E.conj().T)


def beta_witness_hessian(z, w, n: int, basis: FockBasis | None = None, h: float = 1e-4) -> float:
    """Cross-check of :func:`beta_witness`: ||s s^T : grad grad (|z><z|)^{(x) n}||_* by central differences."""
    z = np.asarray(z, dtype=complex)
    basis = basis or fock_basis(n, z.size)
    r = to_real(z)
    s = to_real(np.asarray(w, dtype=complex))

    def proj(x):
        psi = product_amplitudes(to_complex(x), basis)
        return np.outer(psi, psi.conj())

    hess = (proj(r + h * s) - 2 * proj(r) + proj(r - h * s)) / h**2
    return trace_norm(hess)


@dataclass
class BoundReport:
    bound: float
    alpha_perp_max: float
    empirical: float | None
    stat_tol: float
    passed: bool | None


def error_bound_check(spec: SystemSpec, t: float, grid, rho_plus=None, rho=None, stat_tol: float = 0.0) -> BoundReport:
    """bound = 6 n t max_grid alpha_perp(z); empirical = ||rho_plus - rho||_* when both are given."""
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if grid.size == 0:
        raise ValidationError("grid must be non-empty")
    alphas = []
    for z in grid:
        z = z / np.linalg.norm(z)
        alphas.append(neg_mass(project_Dperp(compute_D(z, spec), to_real(z))))
    a_max = float(max(alphas))
    bound = 6.0 * spec.n * t * a_max
    if rho_plus is None or rho is None:
        return BoundReport(bound, a_max, None, stat_tol, None)
    emp = trace_distance(rho_plus, rho)
    return BoundReport(bound, a_max, emp, stat_tol, emp <= bound + stat_tol)
