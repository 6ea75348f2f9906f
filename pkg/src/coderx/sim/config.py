"""Sweep configuration: a strict YAML schema with field-named validation errors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from ..codes import ParityCheckMatrix, build_rm_code, hamming_7_4, parse_alist, regular_ldpc
from ..optim import SolverSettings

RECEIVERS = ("dlmv", "qp", "joint-qp")
FORMULATIONS = ("exact", "fs", "decomposed")

# name -> (block length, redundancy, bit degree, construction seed)
PROFILES = {
    "ldpc-256-192": (256, 64, 3, 1),
    "ldpc-96-48": (96, 48, 3, 1),
}


class ConfigError(ValueError):
    """Validation failure; ``problems`` lists ``(field, message)`` pairs."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = list(problems)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.problems))


@dataclass(frozen=True)
class CodeSpec:
    """Which parity-check matrix the users share.

    ``family`` is one of ``profile`` (a built-in name), ``ldpc`` (regular
    construction), ``rm`` (Reed-Muller ``RM(r, m)``), ``hamming`` or
    ``alist`` (a file path).
    """

    family: str = "profile"
    name: str = "ldpc-256-192"
    n: int | None = None
    k: int | None = None
    bit_degree: int = 3
    seed: int = 1
    r: int | None = None
    m: int | None = None
    path: str | None = None

    def build(self) -> ParityCheckMatrix:
        if self.family == "profile":
            n, red, dv, seed = PROFILES[self.name]
            return regular_ldpc(n, red, dv, seed=seed)
        if self.family == "ldpc":
            return regular_ldpc(self.n, self.n - self.k, self.bit_degree, seed=self.seed)
        if self.family == "rm":
            return build_rm_code(self.r, self.m)[1]
        if self.family == "hamming":
            return hamming_7_4()
        return parse_alist(Path(self.path).read_text())


@dataclass(frozen=True)
class SimConfig:
    """Everything a sweep depends on; the output is a pure function of it.

    Users are numbered from 1 in the file; user 1 is the target. The
    contamination set lists users whose pilots add to user 1's channel
    estimate. ``covariance_snapshots`` is ``"frame"`` (every snapshot of
    the frame being detected) or a positive count taken from its start.
    """

    seed: int = 1
    antennas: int = 32
    gains: tuple[float, ...] = (1.0, 0.3, 0.7)
    contamination: tuple[int, ...] = (2,)
    code: CodeSpec = field(default_factory=CodeSpec)
    permutation_seeds: tuple[int, ...] = (568, 193, 625)
    receivers: tuple[str, ...] = RECEIVERS
    snr_db: tuple[float, ...] = (16.0, 18.0, 20.0)
    frames: int = 200
    gamma_factor: float = 200.0
    alpha: float = 75.0
    covariance_snapshots: int | str = "frame"
    estimation_noise_factor: float = 0.125
    formulation: str = "decomposed"
    eps_abs: float = 1e-5
    eps_rel: float = 1e-5
    max_iter: int = 20000

    @property
    def num_users(self) -> int:
        return len(self.gains)

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(eps_abs=self.eps_abs, eps_rel=self.eps_rel, max_iter=self.max_iter)

    def with_overrides(self, **changes) -> "SimConfig":
        cfg = replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        bad: list[tuple[str, str]] = []
        if self.antennas < 1:
            bad.append(("antennas", "must be >= 1"))
        if not self.gains:
            bad.append(("gains", "at least one user is required"))
        elif any(not (g > 0 and math.isfinite(g)) for g in self.gains):
            bad.append(("gains", "every gain must be positive and finite"))
        for u in self.contamination:
            if not 2 <= u <= len(self.gains):
                bad.append(("contamination", f"user {u} is not an interferer (valid: 2..{len(self.gains)})"))
        if len(set(self.contamination)) != len(self.contamination):
            bad.append(("contamination", "duplicate users"))
        if len(self.permutation_seeds) != len(self.gains):
            bad.append(("permutation_seeds", f"need one seed per user ({len(self.gains)}), got {len(self.permutation_seeds)}"))
        if not self.receivers:
            bad.append(("receivers", "list is empty"))
        for r in self.receivers:
            if r not in RECEIVERS:
                bad.append(("receivers", f"unknown receiver {r!r} (choose from {', '.join(RECEIVERS)})"))
        if len(set(self.receivers)) != len(self.receivers):
            bad.append(("receivers", "duplicate receivers"))
        if not self.snr_db:
            bad.append(("snr_db", "grid is empty"))
        elif any(not math.isfinite(s) for s in self.snr_db):
            bad.append(("snr_db", "values must be finite"))
        elif len(set(self.snr_db)) != len(self.snr_db):
            bad.append(("snr_db", "duplicate points"))
        if self.frames < 1:
            bad.append(("frames", "must be >= 1"))
        if not self.gamma_factor >= 0:
            bad.append(("gamma_factor", "must be non-negative"))
        if not self.alpha > 0:
            bad.append(("alpha", "must be positive"))
        if not self.estimation_noise_factor >= 0:
            bad.append(("estimation_noise_factor", "must be non-negative"))
        if self.covariance_snapshots != "frame" and not (
                isinstance(self.covariance_snapshots, int) and self.covariance_snapshots >= 1):
            bad.append(("covariance_snapshots", "must be 'frame' or a positive integer"))
        if self.formulation not in FORMULATIONS:
            bad.append(("formulation", f"unknown formulation {self.formulation!r}"))
        if not (self.eps_abs > 0 and self.eps_rel > 0):
            bad.append(("solver", "tolerances must be positive"))
        if self.max_iter < 1:
            bad.append(("solver.max_iter", "must be >= 1"))
        bad.extend(_check_code(self.code))
        if bad:
            raise ConfigError(bad)


def _check_code(c: CodeSpec) -> list[tuple[str, str]]:
    bad = []
    if c.family == "profile":
        if c.name not in PROFILES:
            bad.append(("code.name", f"unknown profile {c.name!r} (choose from {', '.join(PROFILES)})"))
    elif c.family == "ldpc":
        if c.n is None or c.k is None:
            bad.append(("code", "ldpc needs n and k"))
        elif not 0 < c.k < c.n:
            bad.append(("code.k", "must satisfy 0 < k < n"))
    elif c.family == "rm":
        if c.r is None or c.m is None:
            bad.append(("code", "rm needs r and m"))
        elif not 0 <= c.r < c.m:
            bad.append(("code.r", "must satisfy 0 <= r < m"))
    elif c.family == "alist":
        if not c.path:
            bad.append(("code.path", "alist family needs a path"))
        elif not Path(c.path).is_file():
            bad.append(("code.path", f"no such file: {c.path}"))
    elif c.family != "hamming":
        bad.append(("code.family", f"unknown family {c.family!r}"))
    return bad


_TOP_KEYS = {f.name for f in fields(SimConfig)} - {"code", "eps_abs", "eps_rel", "max_iter"} | {"code", "solver"}
_CODE_KEYS = {f.name for f in fields(CodeSpec)}
_SOLVER_KEYS = {"eps_abs", "eps_rel", "max_iter"}


def _number(value, key, bad, kind=float):
    if kind is float and isinstance(value, str):
        # YAML 1.1 reads "1e-5" (no dot) as a string
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        bad.append((key, f"expected a number, got {value!r}"))
        return None
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            bad.append((key, f"expected an integer, got {value!r}"))
            return None
        return int(value)
    return float(value)


def _number_list(value, key, bad, kind=float):
    if not isinstance(value, list):
        bad.append((key, "expected a list"))
        return None
    out = [_number(v, f"{key}[{i}]", bad, kind) for i, v in enumerate(value)]
    return None if any(v is None for v in out) else tuple(out)


def config_from_dict(doc: dict[str, Any], base_dir: Path | None = None) -> SimConfig:
    """Build and validate a :class:`SimConfig`; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise ConfigError([("<root>", "configuration must be a mapping")])
    bad: list[tuple[str, str]] = [(k, "unknown key") for k in doc if k not in _TOP_KEYS]
    kw: dict[str, Any] = {}
    for key in ("seed", "antennas", "frames"):
        if key in doc:
            kw[key] = _number(doc[key], key, bad, int)
    for key in ("gamma_factor", "alpha", "estimation_noise_factor"):
        if key in doc:
            kw[key] = _number(doc[key], key, bad)
    for key, kind in (("gains", float), ("snr_db", float), ("contamination", int), ("permutation_seeds", int)):
        if key in doc:
            kw[key] = _number_list(doc[key], key, bad, kind)
    if "receivers" in doc:
        r = doc["receivers"]
        if isinstance(r, list) and all(isinstance(x, str) for x in r):
            kw["receivers"] = tuple(r)
        else:
            bad.append(("receivers", "expected a list of names"))
    if "formulation" in doc:
        kw["formulation"] = str(doc["formulation"])
    if "covariance_snapshots" in doc:
        v = doc["covariance_snapshots"]
        kw["covariance_snapshots"] = v if v == "frame" else _number(v, "covariance_snapshots", bad, int)
    if "solver" in doc:
        s = doc["solver"]
        if not isinstance(s, dict):
            bad.append(("solver", "expected a mapping"))
        else:
            bad.extend((f"solver.{k}", "unknown key") for k in s if k not in _SOLVER_KEYS)
            for k in ("eps_abs", "eps_rel"):
                if k in s:
                    kw[k] = _number(s[k], f"solver.{k}", bad)
            if "max_iter" in s:
                kw["max_iter"] = _number(s["max_iter"], "solver.max_iter", bad, int)
    if "code" in doc:
        c = doc["code"]
        if not isinstance(c, dict):
            bad.append(("code", "expected a mapping"))
        else:
            bad.extend((f"code.{k}", "unknown key") for k in c if k not in _CODE_KEYS)
            ckw = {}
            for k in ("family", "name", "path"):
                if k in c:
                    ckw[k] = str(c[k])
            for k in ("n", "k", "bit_degree", "seed", "r", "m"):
                if k in c:
                    ckw[k] = _number(c[k], f"code.{k}", bad, int)
            if "path" in ckw and base_dir is not None and not Path(ckw["path"]).is_absolute():
                ckw["path"] = str(base_dir / ckw["path"])
            if "name" in ckw and "family" not in ckw:
                ckw["family"] = "profile"
            kw["code"] = CodeSpec(**{k: v for k, v in ckw.items() if v is not None})
    if bad:
        raise ConfigError(bad)
    cfg = SimConfig(**kw)
    cfg.validate()
    return cfg


def load_config(path) -> SimConfig:
    """Read a YAML sweep configuration from ``path``."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError([("<file>", f"not valid YAML: {exc}")]) from exc
    return config_from_dict(doc if doc is not None else {}, base_dir=path.parent)


def config_to_dict(cfg: SimConfig) -> dict[str, Any]:
    """Plain-data view that :func:`config_from_dict` maps back to ``cfg``."""
    code = {k: v for k, v in vars(cfg.code).items() if v is not None}
    return {
        "seed": cfg.seed, "antennas": cfg.antennas, "gains": list(cfg.gains),
        "contamination": list(cfg.contamination), "code": code,
        "permutation_seeds": list(cfg.permutation_seeds), "receivers": list(cfg.receivers),
        "snr_db": list(cfg.snr_db), "frames": cfg.frames, "gamma_factor": cfg.gamma_factor,
        "alpha": cfg.alpha, "covariance_snapshots": cfg.covariance_snapshots,
        "estimation_noise_factor": cfg.estimation_noise_factor, "formulation": cfg.formulation,
        "solver": {"eps_abs": cfg.eps_abs, "eps_rel": cfg.eps_rel, "max_iter": cfg.max_iter},
    }
