from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

import numpy as np

SUM_TOLERANCE = 1e-12
RENORMALIZE_TOLERANCE = 1e-9


class StateError(ValueError):
    """Raised when a Schmidt vector or outcome distribution is invalid."""


class DimensionError(StateError):
    """Raised when an operation receives a state of unsupported Schmidt rank."""


@dataclass(frozen=True, slots=True)
class SchmidtVector:
    """Schmidt coefficients of a bipartite pure state, sorted descending.

    Inputs are sorted (stable, so ties keep their order) and renormalised when
    their sum is within 1e-9 of one. Zero coefficients are kept.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.coeffs, dtype=np.float64).ravel()
        if values.size == 0:
            raise StateError("Schmidt vector needs at least one coefficient.")
        if not np.all(np.isfinite(values)):
            raise StateError(f"Schmidt coefficients must be finite: {self.coeffs!r}")
        if np.any(values < -SUM_TOLERANCE):
            raise StateError(f"Schmidt coefficients must be non-negative: {self.coeffs!r}")
        values = np.clip(values, 0.0, None)
        total = float(values.sum())
        if abs(total - 1.0) > RENORMALIZE_TOLERANCE:
            raise StateError(f"Schmidt coefficients sum to {total!r}, expected 1.")
        values = values / total
        order = np.argsort(-values, kind="stable")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in values[order]))

    @classmethod
    def qubit(cls, lambda1: float) -> "SchmidtVector":
        lam = float(lambda1)
        if not 0.0 <= lam <= 1.0:
            raise StateError(f"lambda1 must lie in [0, 1], got {lam!r}.")
        return cls((lam, 1.0 - lam))

    @classmethod
    def bell(cls) -> "SchmidtVector":
        return cls((0.5, 0.5))

    @classmethod
    def product(cls) -> "SchmidtVector":
        return cls((1.0,))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def lambda1(self) -> float:
        return self.coeffs[0]

    @property
    def is_product(self) -> bool:
        return self.coeffs[0] >= 1.0 - SUM_TOLERANCE

    @property
    def is_maximally_entangled(self) -> bool:
        d = len(self.coeffs)
        return d > 1 and all(abs(c - 1.0 / d) <= SUM_TOLERANCE for c in self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self) -> Iterator[float]:
        return iter(self.coeffs)


@dataclass(frozen=True, slots=True)
class OutcomeDistribution:
    """Finite list of (probability, post-measurement state) pairs."""

    outcomes: tuple[tuple[float, SchmidtVector], ...]

    def __post_init__(self) -> None:
        rows = tuple((float(p), s) for p, s in self.outcomes)
        if not rows:
            raise StateError("Outcome distribution needs at least one outcome.")
        for p, s in rows:
            if not isinstance(s, SchmidtVector):
                raise StateError(f"Outcome state must be a SchmidtVector, got {type(s).__name__}.")
            if p < 0.0 or not math.isfinite(p):
                raise StateError(f"Outcome probability must be >= 0, got {p!r}.")
        total = math.fsum(p for p, _ in rows)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise StateError(f"Outcome probabilities sum to {total!r}, expected 1.")
        object.__setattr__(self, "outcomes", rows)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.outcomes)

    @property
    def states(self) -> tuple[SchmidtVector, ...]:
        return tuple(s for _, s in self.outcomes)

    def expectation(self, fn: Callable[[SchmidtVector], float]) -> float:
        return math.fsum(p * fn(s) for p, s in self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self) -> Iterator[tuple[float, SchmidtVector]]:
        return iter(self.outcomes)


@dataclass(slots=True)
class Estimate:
    value: float
    stderr: float
    trials: int

    def __post_init__(self) -> None:
        self.value = float(self.value)
        self.stderr = float(self.stderr)
        self.trials = int(self.trials)

    def as_dict(self) -> dict[str, Any]:
        return {"value": self.value, "stderr": self.stderr, "trials": self.trials}


@dataclass(slots=True)
class ThresholdEstimate:
    kind: str
    L: int
    p_th_hat: float
    stderr: float
    trials: int
    boundary: str = "periodic"
    p_th_exact: Optional[float] = None

    def as_row(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "L": self.L,
            "boundary": self.boundary,
            "p_th_hat": self.p_th_hat,
            "stderr": self.stderr,
            "trials": self.trials,
            "p_th_exact": self.p_th_exact,
        }


@dataclass(slots=True)
class CurvePoint:
    x: float
    p_hat: float
    stderr: float
    trials: int


@dataclass(slots=True)
class ConnectivityCurve:
    points: list[CurvePoint] = field(default_factory=list)
    label: str = ""

    def xs(self) -> np.ndarray:
        return np.asarray([pt.x for pt in self.points], dtype=np.float64)

    def values(self) -> np.ndarray:
        return np.asarray([pt.p_hat for pt in self.points], dtype=np.float64)

    def at(self, x: float) -> CurvePoint:
        for pt in self.points:
            if pt.x == x:
                return pt
        raise KeyError(x)

    def rows(self) -> list[dict[str, Any]]:
        rows = []
        for pt in self.points:
            row: dict[str, Any] = {}
            if self.label:
                row["series"] = self.label
            row.update({"x": pt.x, "p_hat": pt.p_hat, "stderr": pt.stderr, "trials": pt.trials})
            rows.append(row)
        return rows


@dataclass(slots=True)
class ProtocolReport:
    """Outcome of one distribution strategy.

    Keys of `exact` that also appear in `estimates` are the closed-form
    counterparts of those Monte Carlo numbers.
    """

    strategy: str
    parameters: dict[str, Any] = field(default_factory=dict)
    estimates: dict[str, Estimate] = field(default_factory=dict)
    exact: dict[str, float] = field(default_factory=dict)
    curves: dict[str, ConnectivityCurve] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        return {
            "strategy": self.strategy,
            "parameters": dict(self.parameters),
            "estimates": {k: v.as_dict() for k, v in self.estimates.items()},
            "exact": dict(self.exact),
            "curves": {k: c.rows() for k, c in self.curves.items()},
            "notes": list(self.notes),
        }

    def rows(self) -> list[dict[str, Any]]:
        """Flat quantity rows: one per estimate or exact-only value."""
        out: list[dict[str, Any]] = []
        names = list(self.estimates)
        names.extend(k for k in self.exact if k not in self.estimates)
        for name in names:
            est = self.estimates.get(name)
            out.append(
                {
                    "strategy": self.strategy,
                    "quantity": name,
                    "estimate": None if est is None else est.value,
                    "stderr": None if est is None else est.stderr,
                    "trials": None if est is None else est.trials,
                    "exact": self.exact.get(name),
                }
            )
        return out
