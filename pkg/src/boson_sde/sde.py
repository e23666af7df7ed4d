"""Euler-Maruyama ensembles for dr = F dt + sqrt(2 D+) dW on the hypersphere.

Each step evaluates, at the current r (Ito convention):

* the drift F(z), plus the radial correction -2 P D r / |r|^2 when enabled,
* D+ = positive part of P D P with P = I - r r^T / |r|^2,
* r' = r + drift dt + sqrt(2 D+) xi sqrt(dt), then r' / |r'| if renormalizing.

Trajectory ``k`` draws its Gaussian increments from the counter-based stream
``(seed, k, step, pair)``, so an ensemble is a pure function of its inputs no
matter how the work is split between processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ValidationError, check_unit, to_complex, to_real
from .diffusion import compute_D, psd_part, project_Dperp, radial_drift_correction, sqrt_2D
from .dynamics import SystemSpec, compute_drift
from .rng import gaussian_block

CHUNK = 8192


@dataclass(frozen=True)
class SdeConfig:
    """Integration settings; ``snapshot_times`` defaults to 10 uniform points in (0, t_final]."""

    dt: float
    t_final: float
    samples: int
    seed: int = 0
    renormalize: bool = True
    snapshot_times: tuple = field(default=None)
    radial_correction: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("sde.dt must be positive")
        if self.t_final < 0:
            raise ValidationError("sde.t_final must be non-negative")
        if self.t_final > 0 and self.dt > self.t_final:
            raise ValidationError("sde.dt must not exceed sde.t_final")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValidationError("sde.samples must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("sde.seed must fit in 64 unsigned bits")
        times = self.snapshot_times
        if times is None:
            times = np.linspace(0.0, self.t_final, 11)[1:] if self.t_final > 0 else np.zeros(1)
        times = tuple(float(t) for t in np.atleast_1d(times))
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValidationError("sde.snapshot_times must be sorted")
        if times and (times[0] < 0 or times[-1] > self.t_final * (1 + 1e-12)):
            raise ValidationError("sde.snapshot_times must lie in [0, t_final]")
        object.__setattr__(self, "snapshot_times", times)
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_final / self.dt - 1e-9)) if self.t_final > 0 else 0

    def snapshot_steps(self) -> np.ndarray:
        """Step index of each snapshot: the first boundary at or after the requested time."""
        return np.array([int(math.ceil(t / self.dt - 1e-9)) for t in self.snapshot_times], dtype=int)


@dataclass
class TrajectoryEnsemble:
    """Snapshots of an SDE ensemble, ``snapshots[i, k]`` is the real state of run k at ``times[i]``."""

    config: SdeConfig
    times: np.ndarray
    snapshots: np.ndarray  # (T, samples, 2N)

    def states(self, i: int) -> np.ndarray:
        """Complex mode vectors of snapshot ``i``."""
        return to_complex(self.snapshots[i])

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states(i)


def step_increment(r, spec: SystemSpec, dt: float, noise, radial_correction: bool = True) -> np.ndarray:
    """r' - r for a stack of states (S, 2N) and standard normals of the same shape."""
    r = np.asarray(r, dtype=float)
    z = to_complex(r)
    drift = to_real(compute_drift(z, spec))
    D = compute_D(z, spec)
    if radial_correction:
        drift = drift + radial_drift_correction(D, r)
    rhat = r / np.linalg.norm(r, axis=-1, keepdims=True)
    p = np.eye(r.shape[-1]) - rhat[..., :, None] * rhat[..., None, :]
    dperp = p @ D @ p
    dperp = 0.5 * (dperp + np.swapaxes(dperp, -1, -2))
    w, v = np.linalg.eigh(dperp)
    amp = np.sqrt(2.0 * np.clip(w, 0.0, None))
    coeff = amp * np.einsum("...ji,...j->...i", v, noise)
    kick = np.einsum("...ij,...j->...i", v, coeff)
    return drift * dt + kick * math.sqrt(dt)


def em_step(
    r,
    spec: SystemSpec,
    dt: float,
    noise,
    renormalize: bool = True,
    radial_correction: bool = True,
) -> np.ndarray:
    """One Euler-Maruyama step for a single real state.

    Uses the validated Jacobi route (``project_Dperp`` / ``psd_part`` /
    ``sqrt_2D``); :func:`run_ensemble` uses a batched LAPACK route that is
    tested against this one.
    """
    r = np.asarray(r, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != r.shape:
        raise ValidationError("noise must have the same shape as r")
    z = to_complex(r)
    norm = np.linalg.norm(r)
    D = compute_D(z, spec)
    drift = to_real(compute_drift(z, spec))
    if radial_correction:
        drift = drift + radial_drift_correction(D, r)
    G = sqrt_2D(psd_part(project_Dperp(D, r / norm)))
    out = r + drift * dt + (G @ noise) * math.sqrt(dt)
    if renormalize:
        out = out / np.linalg.norm(out)
    return out


def _run_chunk(args) -> np.ndarray:
    r0, spec, cfg, runs = args
    runs = np.asarray(runs)
    dim = r0.size
    steps = cfg.snapshot_steps()
    out = np.empty((len(steps), len(runs), dim))
    r = np.broadcast_to(r0, (len(runs), dim)).copy()
    k = 0
    while k < len(steps) and steps[k] == 0:
        out[k] = r
        k += 1
    for step in range(1, cfg.n_steps + 1):
        noise = gaussian_block(cfg.seed, runs, step, dim)
        r = r + step_increment(r, spec, cfg.dt, noise, cfg.radial_correction)
        if cfg.renormalize:
            r = r / np.linalg.norm(r, axis=-1, keepdims=True)
        while k < len(steps) and steps[k] == step:
            out[k] = r
            k += 1
    return out


def run_ensemble(z0, spec: SystemSpec, cfg: SdeConfig, workers: int = 1) -> TrajectoryEnsemble:
    """Integrate ``cfg.samples`` trajectories from ``z0``.

    Runs are processed in fixed chunks of ``CHUNK`` trajectories, so the result
    is bit-identical for any ``workers``.
    """
    z0 = check_unit(np.asarray(z0, dtype=complex), "z0")
    if z0.shape != (spec.N,):
        raise ValidationError(f"z0 must have length {spec.N}")
    r0 = to_real(z0)
    bounds = list(range(0, cfg.samples, CHUNK)) + [cfg.samples]
    tasks = [(r0, spec, cfg, np.arange(a, b)) for a, b in zip(bounds, bounds[1:])]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    snapshots = np.concatenate(parts, axis=1)
    times = cfg.snapshot_steps() * cfg.dt
    return TrajectoryEnsemble(config=cfg, times=times, snapshots=snapshots)
