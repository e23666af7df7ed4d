"""TOML run configuration with a strict schema.

Layout::

    [system]       kind = "dnse" | "general", N, n, H0, z0, and
                   c or epsilon (dnse) / tensor, Xs (general)
    [sde]          dt, t_final, samples, seed, renormalize, snapshot_times,
                   radial_correction
    [observables]  populations = true, one_body = [{name, matrix, scaled}]
    [output]       dir
    [lindblad]     dt
    [randomwalk]   trajectories, ordering, exact
    [verify]       bootstrap, grid
    [beta]         draws, seed

Complex numbers may be written as numbers or strings such as ``"0.5-2i"``.
Two-body tensors are sparse lists of ``[j, k, l, m, value]`` entries.
Unknown keys are errors.
"""

from __future__ import annotations

import difflib
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import ValidationError, check_hermitian
from .dnse import DnseParams, build_dnse_spec, ring_hopping
from .dynamics import SystemSpec
from .observables import Observable, one_body, population
from .oracle import ORDERINGS
from .sde import SdeConfig

MODES = ("meanfield", "sde", "lindblad", "randomwalk", "verify", "dnse-demo", "beta-check")

SCHEMA: dict[str, set[str]] = {
    "system": {"kind", "N", "n", "c", "epsilon", "H0", "z0", "tensor", "Xs"},
    "sde": {"dt", "t_final", "samples", "seed", "renormalize", "snapshot_times", "radial_correction"},
    "observables": {"populations", "one_body"},
    "output": {"dir"},
    "lindblad": {"dt"},
    "randomwalk": {"trajectories", "ordering", "exact"},
    "verify": {"bootstrap", "grid"},
    "beta": {"draws", "seed"},
}
OBSERVABLE_KEYS = {"name", "matrix", "scaled"}


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the offending field."""


def _suggest(key: str, options) -> str:
    close = difflib.get_close_matches(key, sorted(options), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_keys(table: dict, allowed, where: str) -> None:
    for key in table:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"unknown key {prefix}{key!r}{_suggest(key, allowed)}")


def parse_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        s = value.replace(" ", "").replace("I", "i")
        if s.endswith("i") or s.endswith("j"):
            s = s[:-1] + "j"
            if s[:-1] == "" or s[-2] in "+-":
                s = s[:-1] + "1j"
        try:
            return complex(s)
        except ValueError:
            pass
    raise ConfigError(f"{where}: cannot read {value!r} as a complex number")


def parse_vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a non-empty array")
    return np.array([parse_complex(v, f"{where}[{i}]") for i, v in enumerate(value)])


def parse_matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise ConfigError(f"{where}: expected a nested array")
    rows = [parse_vector(row, f"{where}[{i}]") for i, row in enumerate(value)]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{where}: rows have different lengths")
    return np.array(rows)


def _hermitian(value, where: str, N: int) -> np.ndarray:
    m = parse_matrix(value, where)
    if m.shape != (N, N):
        raise ConfigError(f"{where}: expected a {N}x{N} matrix, got {m.shape[0]}x{m.shape[1]}")
    try:
        return check_hermitian(m, where)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _int(table: dict, key: str, where: str, default=None, minimum: int | None = None) -> int:
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}.{key} is required")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}")
    return v


def _float(table: dict, key: str, where: str, default=None) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}.{key} is required")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number")
    return float(v)


def _bool(table: dict, key: str, where: str, default: bool) -> bool:
    v = table.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected true or false")
    return v


@dataclass
class RunConfig:
    mode: str
    system: SystemSpec
    z0: np.ndarray
    sde: SdeConfig
    observables: list[Observable]
    output_dir: str = "out"
    dnse: DnseParams | None = None
    lindblad_dt: float = 1e-3
    walk_trajectories: int = 1000
    walk_ordering: str = "hamiltonian_first"
    walk_exact: bool = False
    bootstrap: int = 100
    grid: int = 200
    beta_draws: int = 200
    beta_seed: int = 0
    raw: dict = field(default_factory=dict)


def _system(table: dict, t_final: float) -> tuple[SystemSpec, DnseParams | None, np.ndarray]:
    where = "system"
    _check_keys(table, SCHEMA["system"], where)
    kind = table.get("kind", "dnse")
    if kind not in ("dnse", "general"):
        raise ConfigError(f"system.kind: expected 'dnse' or 'general', got {kind!r}")
    N = _int(table, "N", where, minimum=1)
    n = _int(table, "n", where, minimum=1)
    h0_raw = table.get("H0", "ring")
    if h0_raw == "ring":
        H0 = ring_hopping(N)
    elif isinstance(h0_raw, str):
        raise ConfigError(f"system.H0: expected 'ring' or a matrix, got {h0_raw!r}")
    else:
        H0 = _hermitian(h0_raw, "system.H0", N)
    if "z0" in table:
        z0 = parse_vector(table["z0"], "system.z0")
        if z0.shape != (N,):
            raise ConfigError(f"system.z0: expected {N} entries")
        norm = np.linalg.norm(z0)
        if norm == 0:
            raise ConfigError("system.z0 must be nonzero")
        z0 = z0 / norm
    else:
        z0 = np.eye(N, dtype=complex)[0]

    if kind == "dnse":
        for key in ("tensor", "Xs"):
            if key in table:
                raise ConfigError(f"system.{key} is not used when system.kind = 'dnse'")
        if ("c" in table) == ("epsilon" in table):
            raise ConfigError("system: give exactly one of c or epsilon")
        c = _float(table, "c", where) if "c" in table else None
        eps = _float(table, "epsilon", where) if "epsilon" in table else None
        if c is not None and c < 0:
            raise ConfigError("system.c: must be non-negative")
        if eps is not None and eps <= 0:
            raise ConfigError("system.epsilon: must be positive")
        params = DnseParams(N=N, n=n, H0=H0, c=c, t_final=t_final, epsilon=eps)
        return build_dnse_spec(params), params, z0

    for key in ("c", "epsilon"):
        if key in table:
            raise ConfigError(f"system.{key} is only used when system.kind = 'dnse'")
    tensor = np.zeros((N,) * 4, dtype=complex)
    for i, entry in enumerate(table.get("tensor", [])):
        w = f"system.tensor[{i}]"
        if not isinstance(entry, list) or len(entry) != 5:
            raise ConfigError(f"{w}: expected [j, k, l, m, value]")
        idx = entry[:4]
        if not all(isinstance(q, int) and not isinstance(q, bool) and 0 <= q < N for q in idx):
            raise ConfigError(f"{w}: indices must be integers in [0, {N})")
        tensor[tuple(idx)] += parse_complex(entry[4], w)
    xs_raw = table.get("Xs", [])
    if not isinstance(xs_raw, list):
        raise ConfigError("system.Xs: expected an array of matrices")
    Xs = np.array([_hermitian(x, f"system.Xs[{i}]", N) for i, x in enumerate(xs_raw)]).reshape(-1, N, N)
    try:
        spec = SystemSpec(H0=H0, tensor=tensor, Xs=Xs, n=n)
    except ValidationError as exc:
        raise ConfigError(f"system.tensor: {exc}") from None
    return spec, None, z0


def _observables(table: dict, N: int) -> list[Observable]:
    _check_keys(table, SCHEMA["observables"], "observables")
    out = []
    if _bool(table, "populations", "observables", True):
        out.extend(population(j, N) for j in range(N))
    items = table.get("one_body", [])
    if not isinstance(items, list):
        raise ConfigError("observables.one_body: expected an array of tables")
    for i, item in enumerate(items):
        where = f"observables.one_body[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{where}: expected a table")
        _check_keys(item, OBSERVABLE_KEYS, where)
        if "matrix" not in item:
            raise ConfigError(f"{where}.matrix is required")
        name = item.get("name", f"obs{i}")
        if not isinstance(name, str):
            raise ConfigError(f"{where}.name: expected a string")
        m = _hermitian(item["matrix"], f"{where}.matrix", N)
        out.append(one_body(m, name=name, scaled=_bool(item, "scaled", where, True)))
    if not out:
        raise ConfigError("observables: at least one observable is required")
    names = [o.name for o in out]
    if len(set(names)) != len(names):
        raise ConfigError("observables: names must be unique")
    return out


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected a table")
    return value


def parse_config(text: str, mode: str = "sde") -> RunConfig:
    """Parse and validate a TOML document for ``mode``."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}{_suggest(mode, MODES)}")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    _check_keys(doc, SCHEMA, "")
    if "system" not in doc:
        raise ConfigError("system section is required")

    sde_t = _section(doc, "sde")
    _check_keys(sde_t, SCHEMA["sde"], "sde")
    t_final = _float(sde_t, "t_final", "sde")
    spec, params, z0 = _system(_section(doc, "system"), t_final)

    seed = _int(sde_t, "seed", "sde", default=0, minimum=0)
    snaps = sde_t.get("snapshot_times")
    if snaps is not None and (not isinstance(snaps, list) or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in snaps)):
        raise ConfigError("sde.snapshot_times: expected an array of numbers")
    try:
        sde = SdeConfig(
            dt=_float(sde_t, "dt", "sde"),
            t_final=t_final,
            samples=_int(sde_t, "samples", "sde", default=1000, minimum=1),
            seed=seed,
            renormalize=_bool(sde_t, "renormalize", "sde", True),
            snapshot_times=snaps,
            radial_correction=_bool(sde_t, "radial_correction", "sde", True),
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None

    obs = _observables(_section(doc, "observables"), spec.N)
    out_t = _section(doc, "output")
    _check_keys(out_t, SCHEMA["output"], "output")
    out_dir = out_t.get("dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("output.dir: expected a string")

    lind = _section(doc, "lindblad")
    _check_keys(lind, SCHEMA["lindblad"], "lindblad")
    lindblad_dt = _float(lind, "dt", "lindblad", default=min(1e-3, sde.dt))
    if lindblad_dt <= 0:
        raise ConfigError("lindblad.dt: must be positive")

    walk = _section(doc, "randomwalk")
    _check_keys(walk, SCHEMA["randomwalk"], "randomwalk")
    ordering = walk.get("ordering", "hamiltonian_first")
    if ordering not in ORDERINGS:
        raise ConfigError(f"randomwalk.ordering: expected one of {ORDERINGS}{_suggest(str(ordering), ORDERINGS)}")

    ver = _section(doc, "verify")
    _check_keys(ver, SCHEMA["verify"], "verify")
    beta = _section(doc, "beta")
    _check_keys(beta, SCHEMA["beta"], "beta")

    if mode == "dnse-demo" and params is None:
        raise ConfigError("dnse-demo mode needs system.kind = 'dnse'")

    return RunConfig(
        mode=mode,
        system=spec,
        z0=z0,
        sde=sde,
        observables=obs,
        output_dir=out_dir,
        dnse=params,
        lindblad_dt=lindblad_dt,
        walk_trajectories=_int(walk, "trajectories", "randomwalk", default=1000, minimum=1),
        walk_ordering=ordering,
        walk_exact=_bool(walk, "exact", "randomwalk", False),
        bootstrap=_int(ver, "bootstrap", "verify", default=100, minimum=2),
        grid=_int(ver, "grid", "verify", default=200, minimum=1),
        beta_draws=_int(beta, "draws", "beta", default=200, minimum=1),
        beta_seed=_int(beta, "seed", "beta", default=0, minimum=0),
        raw=doc,
    )


def echo(doc: Any):
    """JSON-friendly copy of a parsed document."""
    if isinstance(doc, dict):
        return {k: echo(v) for k, v in doc.items()}
    if isinstance(doc, list):
        return [echo(v) for v in doc]
    return doc
