"""Schmidt-coefficient algebra for pure bond states.

Local unitaries are quotiented out: a bond is fully described by its sorted
Schmidt vector and a local measurement by its outcome distribution.
"""

from __future__ import annotations

import math
from typing import Iterable, Protocol, Sequence

import numpy as np

from .models import (
    SUM_TOLERANCE,
    DimensionError,
    OutcomeDistribution,
    SchmidtVector,
    StateError,
)

__all__ = [
    "DimensionError",
    "StateError",
    "average_concurrence",
    "average_scp",
    "bell_swap",
    "chain_concurrence_exact",
    "concurrence",
    "critical_lambda1",
    "majorizes",
    "nielsen_reduce",
    "oneway_chain_concurrence",
    "rank2_concurrence_bound",
    "sample_outcome",
    "scp",
    "swap_chain_distribution",
    "tensor",
]

_MERGE_DIGITS = 13


class UniformSource(Protocol):
    def random(self) -> float: ...


def _require_rank(s: SchmidtVector, max_dim: int, what: str) -> None:
    if s.dim > max_dim:
        raise DimensionError(f"{what} needs Schmidt rank <= {max_dim}, got {s.dim}.")


def _as_qubit_pair(s: SchmidtVector, what: str) -> tuple[float, float]:
    if s.dim != 2:
        raise DimensionError(f"{what} needs a qubit state (Schmidt rank 2), got rank {s.dim}.")
    return s.coeffs[0], s.coeffs[1]


def scp(s: SchmidtVector) -> float:
    """Singlet conversion probability min(1, 2(1 - lambda1))."""
    return min(1.0, max(0.0, 2.0 * (1.0 - s.lambda1)))


def concurrence(s: SchmidtVector) -> float:
    _require_rank(s, 2, "concurrence")
    if s.dim == 1:
        return 0.0
    return min(1.0, 2.0 * math.sqrt(s.coeffs[0] * s.coeffs[1]))


def tensor(a: SchmidtVector, b: SchmidtVector) -> SchmidtVector:
    products = np.outer(a.as_array(), b.as_array()).ravel()
    return SchmidtVector(tuple(products))


def bell_swap(a: SchmidtVector, b: SchmidtVector) -> OutcomeDistribution:
    """Bell-basis measurement at the node holding one half of `a` and one half of `b`.

    Outcomes are listed as (same, same, cross, cross); each pair is
    equiprobable. A zero-probability cross pair keeps a product-state entry so
    the outcome count is always four.
    """
    l1, l2 = _as_qubit_pair(a, "bell_swap")
    m1, m2 = _as_qubit_pair(b, "bell_swap")

    same = l1 * m1 + l2 * m2
    cross = l1 * m2 + l2 * m1

    same_state = _pair_state(l1 * m1, l2 * m2, same)
    cross_state = _pair_state(l1 * m2, l2 * m1, cross)
    return OutcomeDistribution(
        (
            (same / 2.0, same_state),
            (same / 2.0, same_state),
            (cross / 2.0, cross_state),
            (cross / 2.0, cross_state),
        )
    )


def _pair_state(x: float, y: float, norm: float) -> SchmidtVector:
    if norm <= 0.0:
        return SchmidtVector((1.0, 0.0))
    return SchmidtVector((x / norm, y / norm))


def average_scp(dist: OutcomeDistribution) -> float:
    return dist.expectation(scp)


def average_concurrence(dist: OutcomeDistribution) -> float:
    return dist.expectation(concurrence)


def majorizes(a: SchmidtVector, b: SchmidtVector) -> bool:
    """True iff `a` converts deterministically into `b` under LOCC.

    The partial sums of `a` must be dominated by those of `b`; the shorter
    vector is padded with zeros.
    """
    d = max(a.dim, b.dim)
    pa = np.zeros(d)
    pb = np.zeros(d)
    pa[: a.dim] = a.coeffs
    pb[: b.dim] = b.coeffs
    return bool(np.all(np.cumsum(pa) <= np.cumsum(pb) + SUM_TOLERANCE))


def nielsen_reduce(s: SchmidtVector) -> SchmidtVector:
    """Deterministic reduction to the qubit state (lambda1, 1 - lambda1).

    A largest coefficient below 1/2 reaches the Bell state.
    """
    lam = max(s.lambda1, 0.5)
    return SchmidtVector((lam, 1.0 - lam))


def rank2_concurrence_bound(s: SchmidtVector) -> float:
    """Best average concurrence from rank-2 one-sided measurements on `s`."""
    p = scp(s)
    return math.sqrt(max(0.0, p * (2.0 - p)))


def chain_concurrence_exact(bonds: Sequence[SchmidtVector]) -> float:
    if not bonds:
        raise StateError("chain_concurrence_exact needs at least one bond.")
    return math.prod(concurrence(b) for b in bonds)


def oneway_chain_concurrence(first: SchmidtVector, rest: Iterable[SchmidtVector]) -> float:
    _as_qubit_pair(first, "oneway_chain_concurrence")
    return concurrence(first) * math.prod(rank2_concurrence_bound(b) for b in rest)


def sample_outcome(dist: OutcomeDistribution, rng: UniformSource) -> SchmidtVector:
    """Inverse-CDF draw over the listed outcome order."""
    u = float(rng.random())
    cumulative = 0.0
    last_supported = dist.outcomes[0][1]
    for prob, state in dist.outcomes:
        if prob > 0.0:
            last_supported = state
        cumulative += prob
        if u < cumulative:
            return state
    # u landed in the rounding gap above the final cumulative sum
    return last_supported


def swap_chain_distribution(bonds: Sequence[SchmidtVector]) -> OutcomeDistribution:
    """End-to-end outcome distribution of left-to-right Bell swapping.

    Repeater k swaps the accumulated state with bond k + 1. Identical states
    are merged, so the support stays small for long homogeneous chains.
    """
    if not bonds:
        raise StateError("swap_chain_distribution needs at least one bond.")
    for bond in bonds:
        _as_qubit_pair(bond, "swap_chain_distribution")

    support: dict[tuple[float, ...], tuple[float, SchmidtVector]] = {
        _merge_key(bonds[0]): (1.0, bonds[0])
    }
    for bond in bonds[1:]:
        merged: dict[tuple[float, ...], tuple[float, SchmidtVector]] = {}
        for weight, state in support.values():
            for prob, outcome in bell_swap(state, bond):
                if prob == 0.0:
                    continue
                key = _merge_key(outcome)
                acc, kept = merged.get(key, (0.0, outcome))
                merged[key] = (acc + weight * prob, kept)
        support = merged

    total = math.fsum(w for w, _ in support.values())
    return OutcomeDistribution(tuple((w / total, s) for w, s in support.values()))


def _merge_key(s: SchmidtVector) -> tuple[float, ...]:
    return tuple(round(c, _MERGE_DIGITS) for c in s.coeffs)


def critical_lambda1(p_threshold: float, copies: int = 1) -> float:
    """Largest lambda1 whose `copies`-fold tensor bond still reaches `p_threshold`.

    For bonds made of `copies` copies of (lambda1, 1 - lambda1) the SCP is
    2(1 - lambda1**copies) whenever that is below one.
    """
    if not 0.0 <= p_threshold <= 1.0:
        raise StateError(f"p_threshold must lie in [0, 1], got {p_threshold!r}.")
    if copies < 1:
        raise StateError(f"copies must be >= 1, got {copies!r}.")
    return (1.0 - p_threshold / 2.0) ** (1.0 / copies)
