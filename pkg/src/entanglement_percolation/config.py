"""Experiment configuration: defaults, optional YAML/JSON file, CLI flags."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from ._trials import DEFAULT_SEED, MAX_SEED, default_threads
from .models import SchmidtVector, StateError
from .network import BOUNDARIES, LATTICE_KINDS
from .percolation import MIN_TOLERANCE, THRESHOLD_KINDS
from .protocols import DEMO_LAMBDA1
from .schemas import validate_document

COMMANDS = ("scp", "swap", "chain", "thresholds", "square2x2", "honeycomb-demo", "two-point")
FORMATS = ("csv", "json")

# per-command defaults layered under the config file and CLI flags
_COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "scp": {"trials": 0},
    "swap": {"trials": 0},
    "chain": {"trials": 100_000, "N": 1},
    "thresholds": {"trials": 2000, "L": 64},
    "square2x2": {"trials": 100_000},
    "honeycomb-demo": {"trials": 2000, "L": 32},
    "two-point": {"trials": 2000, "L": 32},
}
# commands that run Monte Carlo and therefore need trials >= 1
_MC_COMMANDS = {"chain", "thresholds", "square2x2", "honeycomb-demo", "two-point"}


class ConfigError(ValueError):
    """Raised when experiment parameters are missing, malformed or out of range."""


@dataclass(slots=True)
class ExperimentConfig:
    command: str
    kind: str = "square"
    kinds: list[str] = field(default_factory=lambda: list(THRESHOLD_KINDS))
    L: int = 32
    boundary: str = "periodic"
    coeffs: Optional[list[float]] = None
    coeffs_b: Optional[list[float]] = None
    lambda1: Optional[float] = None
    lambda1_b: Optional[float] = None
    copies: int = 1
    N: int = 1
    sweep: bool = False
    trials: int = 0
    tol: float = MIN_TOLERANCE
    p: Optional[float] = None
    distances: Optional[list[int]] = None
    seed: int = DEFAULT_SEED
    threads: int = field(default_factory=default_threads)
    out: Optional[str] = None
    format: str = "csv"
    dump_network: Optional[str] = None
    config_path: Optional[str] = None

    def bond(self) -> Optional[SchmidtVector]:
        return _bond(self.coeffs, self.lambda1, "coeffs", "lambda1")

    def bond_b(self) -> Optional[SchmidtVector]:
        return _bond(self.coeffs_b, self.lambda1_b, "coeffs_b", "lambda1_b")

    def require_bond(self) -> SchmidtVector:
        bond = self.bond()
        if bond is None:
            raise ConfigError(f"'{self.command}' needs a bond state: pass --coeffs or --lambda1.")
        return bond

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}'.")
        if self.kind not in LATTICE_KINDS:
            raise ConfigError(f"Unsupported lattice kind '{self.kind}'.")
        bad = [k for k in self.kinds if k not in THRESHOLD_KINDS]
        if not self.kinds or bad:
            raise ConfigError(f"Threshold kinds must be drawn from {', '.join(THRESHOLD_KINDS)}.")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"Unsupported boundary '{self.boundary}'.")
        if self.format not in FORMATS:
            raise ConfigError(f"Unsupported output format '{self.format}'. Expected csv or json.")
        _check_int(self.L, "L", 2)
        _check_int(self.copies, "copies", 1)
        _check_int(self.N, "N", 1)
        _check_int(self.seed, "seed", 0)
        if self.seed > MAX_SEED:
            raise ConfigError(f"seed must be <= {MAX_SEED}, got {self.seed}.")
        _check_int(self.threads, "threads", 1)
        _check_int(self.trials, "trials", 1 if self.command in _MC_COMMANDS else 0)
        if not MIN_TOLERANCE <= self.tol <= 0.5:
            raise ConfigError(f"tol must lie in [{MIN_TOLERANCE}, 0.5], got {self.tol!r}.")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p!r}.")
        if self.distances is not None and any(d < 0 for d in self.distances):
            raise ConfigError("distances must be non-negative.")
        # builds the states, surfacing StateError as a config problem
        self.bond()
        self.bond_b()
        return self


def _check_int(value: Any, name: str, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}.")


def _bond(
    coeffs: Optional[list[float]],
    lambda1: Optional[float],
    coeffs_name: str,
    lambda_name: str,
) -> Optional[SchmidtVector]:
    if coeffs is not None and lambda1 is not None:
        raise ConfigError(f"Pass either {coeffs_name} or {lambda_name}, not both.")
    try:
        if coeffs is not None:
            return SchmidtVector(tuple(float(c) for c in coeffs))
        if lambda1 is not None:
            return SchmidtVector.qubit(lambda1)
    except StateError as exc:
        name = coeffs_name if coeffs is not None else lambda_name
        raise ConfigError(f"Invalid {name}: {exc}") from exc
    return None


def _read_structured(path: Path) -> Any:
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix in {".yaml", ".yml"}:
        return yaml.safe_load(text)
    if suffix == ".json":
        return json.loads(text)
    raise ConfigError(f"Unsupported config extension: {suffix}")


def load_config_file(path: str | Path) -> dict[str, Any]:
    src = Path(path).expanduser().resolve()
    if not src.exists():
        raise ConfigError(f"Config file not found: {src}")
    try:
        raw = _read_structured(src)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Failed to parse config file: {src}") from exc
    if raw is None:
        return {}
    validate_document(raw, "config", ConfigError)
    return dict(raw)


def build_config(
    command: str,
    cli_values: Mapping[str, Any],
    file_values: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Merge defaults < config file < explicit CLI values (None means unset)."""
    known = {f.name for f in fields(ExperimentConfig)} - {"command"}
    merged: dict[str, Any] = dict(_COMMAND_DEFAULTS.get(command, {}))
    for source in (file_values or {}, cli_values):
        for key, value in source.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"Unknown configuration key '{key}'.")
            merged[key] = list(value) if isinstance(value, tuple) else value

    # a single `kind` narrows the threshold table unless `kinds` was given
    if command == "thresholds" and "kinds" not in merged and "kind" in merged:
        merged["kinds"] = [merged["kind"]]
    if merged.get("kind") == "chain" and "boundary" not in merged:
        merged["boundary"] = "open"
    if command == "honeycomb-demo" and merged.get("lambda1") is None and merged.get("coeffs") is None:
        merged["lambda1"] = DEMO_LAMBDA1
    if merged.get("format") is None and merged.get("out"):
        merged["format"] = "json" if str(merged["out"]).lower().endswith(".json") else "csv"

    return ExperimentConfig(command=command, **merged).validate()
