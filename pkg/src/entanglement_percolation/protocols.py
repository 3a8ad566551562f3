"""End-to-end entanglement distribution strategies.

Every strategy returns a `ProtocolReport` whose Monte Carlo estimates sit
next to their closed forms under the same key whenever one exists.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from ._trials import BLOCK_TRIALS, DEFAULT_SEED, block_sizes, run_chunked, trial_stream
from .models import (
    ConnectivityCurve,
    Estimate,
    ProtocolReport,
    SchmidtVector,
    ThresholdEstimate,
)
from .network import (
    LatticeSpec,
    Network,
    build_lattice,
    cycle_network,
    honeycomb_to_triangular,
)
from .percolation import (
    BOND_THRESHOLDS,
    THRESHOLD_KINDS,
    connection_frequency,
    estimate_threshold,
    spanning_frequency,
    two_point,
)
from .state_algebra import (
    average_concurrence,
    average_scp,
    bell_swap,
    chain_concurrence_exact,
    concurrence,
    critical_lambda1,
    nielsen_reduce,
    sample_outcome,
    scp,
    swap_chain_distribution,
    tensor,
)

logger = logging.getLogger(__name__)

HONEYCOMB_CRITICAL_LAMBDA1 = math.sqrt(0.5 + math.sin(math.pi / 18.0))
DEMO_LAMBDA1 = 0.823


class ProtocolError(ValueError):
    """Raised when a strategy receives parameters outside its domain."""


def edge_scps(net: Network) -> np.ndarray:
    """CEP open-probability per edge: the SCP of the tensor of all its copies."""
    return np.asarray([scp(e.effective_state()) for e in net.edges], dtype=np.float64)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ProtocolError(f"trials must be >= 1, got {trials}.")


def cep(
    net: Network,
    a: int,
    b: int,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> ProtocolReport:
    """Classical entanglement percolation between `a` and `b`."""
    _check_trials(trials)
    p = edge_scps(net)
    est = connection_frequency(net, p, a, b, trials, seed, threads)
    report = ProtocolReport(
        strategy="cep",
        parameters={
            "kind": net.kind,
            "L": net.L,
            "a": int(a),
            "b": int(b),
            "trials": trials,
            "seed": seed,
        },
        estimates={"connection_prob": est},
    )
    if p.size and np.all(p == p[0]):
        report.exact["p_edge"] = float(p[0])
    if net.kind == "chain":
        lo, hi = sorted((int(a), int(b)))
        report.exact["connection_prob"] = float(np.prod(p[lo:hi]))
    return report


def _as_chain_qubit(bond: SchmidtVector, notes: list[str]) -> SchmidtVector:
    if bond.dim == 2:
        return bond
    reduced = nielsen_reduce(bond)
    if bond.dim > 2:
        notes.append(
            f"rank-{bond.dim} bond reduced deterministically to ({reduced.coeffs[0]!r}, "
            f"{reduced.coeffs[1]!r}) before swapping"
        )
    return reduced


def _swap_block(
    rng: np.random.Generator,
    n: int,
    bonds: Sequence[SchmidtVector],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Left-to-right Bell swapping for `n` chains at once.

    Draws follow the inverse-CDF order of `bell_swap`: the two "same"
    outcomes (total weight `same`) come before the two "cross" outcomes.
    Returns the end-to-end SCP, concurrence and Procrustean success per chain.
    """
    x1 = np.full(n, bonds[0].coeffs[0])
    x2 = np.full(n, bonds[0].coeffs[1])
    for bond in bonds[1:]:
        m1, m2 = bond.coeffs
        same = x1 * m1 + x2 * m2
        cross = x1 * m2 + x2 * m1
        pick_same = rng.random(n) < same
        with np.errstate(divide="ignore", invalid="ignore"):
            y1 = np.where(pick_same, x1 * m1 / same, x1 * m2 / cross)
            y2 = np.where(pick_same, x2 * m2 / same, x2 * m1 / cross)
        x1, x2 = y1, y2
    scps = np.clip(2.0 * (1.0 - np.maximum(x1, x2)), 0.0, 1.0)
    conc = np.minimum(1.0, 2.0 * np.sqrt(x1 * x2))
    singlet = rng.random(n) < scps
    return scps, conc, singlet


def _run_swap_blocks(
    bonds: Sequence[SchmidtVector],
    trials: int,
    seed: int,
    threads: Optional[int],
    paths: int = 1,
) -> np.ndarray:
    """Sums per block: [scp, scp^2, concurrence, concurrence^2, successes].

    With ``paths > 1`` independent parallel paths are simulated per trial and a
    trial succeeds when any path yields a singlet; the first path's SCP and
    concurrence are recorded.
    """
    sizes = block_sizes(trials, BLOCK_TRIALS)

    def run(start: int, stop: int) -> np.ndarray:
        acc = np.zeros(5, dtype=np.float64)
        for block in range(start, stop):
            rng = trial_stream(seed, block)
            n = sizes[block]
            scps, conc, success = _swap_block(rng, n, bonds)
            for _ in range(paths - 1):
                success = success | _swap_block(rng, n, bonds)[2]
            acc += (
                scps.sum(),
                np.square(scps).sum(),
                conc.sum(),
                np.square(conc).sum(),
                float(np.count_nonzero(success)),
            )
        return acc

    return np.sum(run_chunked(run, len(sizes), 1, threads), axis=0)


def _mean_estimate(total: float, total_sq: float, n: int) -> Estimate:
    mean = float(total) / n
    var = max(total_sq / n - mean * mean, 0.0) * (n / (n - 1) if n > 1 else 0.0)
    return Estimate(mean, math.sqrt(var / n), n)


def _binomial_estimate(successes: float, n: int) -> Estimate:
    f = float(successes) / n
    return Estimate(f, math.sqrt(max(f * (1.0 - f), 0.0) / n), n)


def chain_swap(
    N: int,
    bond: SchmidtVector,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> ProtocolReport:
    """Bell swapping at repeaters 1..N, left to right, on N + 1 identical bonds."""
    if N < 0:
        raise ProtocolError(f"N must be >= 0, got {N}.")
    _check_trials(trials)
    notes: list[str] = []
    qubit = _as_chain_qubit(bond, notes)
    bonds = [qubit] * (N + 1)

    sums = _run_swap_blocks(bonds, trials, seed, threads)
    exact_scp = average_scp(swap_chain_distribution(bonds))
    report = ProtocolReport(
        strategy="chain_swap",
        parameters={
            "N": N,
            "lambda1": qubit.coeffs[0],
            "trials": trials,
            "seed": seed,
        },
        estimates={
            "scp": _mean_estimate(sums[0], sums[1], trials),
            "concurrence": _mean_estimate(sums[2], sums[3], trials),
            "singlet_freq": _binomial_estimate(sums[4], trials),
        },
        exact={
            "scp": exact_scp,
            "concurrence": chain_concurrence_exact(bonds),
            "singlet_freq": exact_scp,
            "p_ok": scp(bond),
        },
        notes=notes,
    )
    if N >= 2:
        report.notes.append("SCP for N >= 2 is the value this protocol achieves, not a proven optimum")
    return report


def chain_comparison(
    N_values: Iterable[int],
    bond: SchmidtVector,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> list[ProtocolReport]:
    """CEP against swapping on chains with N repeaters, one report per N."""
    reports: list[ProtocolReport] = []
    for N in N_values:
        chain = build_lattice(LatticeSpec("chain", N + 2, "open"), bond)
        classical = cep(chain, 0, N + 1, trials, seed, threads)
        swapped = chain_swap(N, bond, trials, seed, threads)
        merged = ProtocolReport(
            strategy="chain",
            parameters={"N": N, "lambda1": bond.lambda1, "trials": trials, "seed": seed},
            notes=list(swapped.notes),
        )
        merged.estimates["cep"] = classical.estimates["connection_prob"]
        merged.exact["cep"] = classical.exact["connection_prob"]
        for key in ("scp", "concurrence", "singlet_freq"):
            merged.estimates[f"swap_{key}"] = swapped.estimates[key]
            merged.exact[f"swap_{key}"] = swapped.exact[key]
        logger.info(
            "chain N=%d: cep=%.5f swap_scp=%.5f", N, merged.estimates["cep"].value,
            merged.estimates["swap_scp"].value,
        )
        reports.append(merged)
    return reports


def square2x2(
    bond: SchmidtVector,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> ProtocolReport:
    """Diagonal corners of the 2x2 square: CEP against two one-repeater swaps."""
    if bond.dim != 2:
        raise ProtocolError(f"square2x2 needs a qubit bond, got Schmidt rank {bond.dim}.")
    _check_trials(trials)
    p = scp(bond)

    classical = cep(cycle_network(4, bond), 0, 2, trials, seed, threads)
    sums = _run_swap_blocks([bond, bond], trials, seed, threads, paths=2)
    return ProtocolReport(
        strategy="square2x2",
        parameters={"lambda1": bond.lambda1, "trials": trials, "seed": seed},
        estimates={
            "cep": classical.estimates["connection_prob"],
            "swap": _binomial_estimate(sums[4], trials),
        },
        exact={
            "cep": 1.0 - (1.0 - p * p) ** 2,
            "swap": 1.0 - (1.0 - p) ** 2,
            "p_ok": p,
        },
        notes=[
            "the probability-one strategy reported for 1/2 <= lambda1 <~ 0.6498 has no "
            "published construction and is not simulated"
        ],
    )


def _row_pairs(net: Network, distances: Sequence[int], sublattice: str = "") -> dict[int, list]:
    L = net.L
    rows = range(0, L, max(1, L // 8))
    pairs: dict[int, list] = {}
    for d in distances:
        pairs[d] = [
            (net.node_at((0, j), sublattice), net.node_at((d, j), sublattice)) for j in rows
        ]
    return pairs


def honeycomb_demo(
    lambda1: float,
    L: int,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
    distances: Optional[Sequence[int]] = None,
) -> ProtocolReport:
    """CEP on a doubled-bond honeycomb against swap-to-triangular then CEP.

    Both strategies run on the same periodic honeycomb of size L. Two-point
    curves use B-sublattice pairs separated by ``x`` cells along the first
    lattice axis, so both curves share their node pairs.
    """
    if not 0.5 <= lambda1 < 1.0:
        raise ProtocolError(f"lambda1 must lie in [0.5, 1), got {lambda1!r}.")
    _check_trials(trials)
    bond = SchmidtVector.qubit(lambda1)
    honeycomb = build_lattice(LatticeSpec("honeycomb", L, "periodic"), bond, copies_per_edge=2)
    p_cep = edge_scps(honeycomb)
    triangular, p_swap = honeycomb_to_triangular(honeycomb)

    span_cep = spanning_frequency(honeycomb, p_cep, trials, seed, 0, threads)
    span_swap = spanning_frequency(triangular, p_swap, trials, seed, 0, threads)
    logger.info("honeycomb demo lambda1=%.5f L=%d: cep=%.4f swap=%.4f", lambda1, L,
                span_cep.value, span_swap.value)

    if distances is None:
        distances = [d for d in (1, 2, 4, 8, 16, 32) if d <= L // 2]
    curves: dict[str, ConnectivityCurve] = {}
    if distances:
        curves["cep"] = two_point(
            honeycomb, p_cep, _row_pairs(honeycomb, distances, "B"), trials, seed, threads,
            label="cep",
        )
        curves["swap"] = two_point(
            triangular, p_swap, _row_pairs(triangular, distances), trials, seed, threads,
            label="swap",
        )

    p_th_h = BOND_THRESHOLDS["honeycomb"]
    p_th_t = BOND_THRESHOLDS["triangular"]
    return ProtocolReport(
        strategy="honeycomb_demo",
        parameters={"lambda1": lambda1, "L": L, "trials": trials, "seed": seed},
        estimates={"spanning_freq_cep": span_cep, "spanning_freq_swap": span_swap},
        exact={
            "p_edge_cep": scp(tensor(bond, bond)),
            "p_edge_swap": float(np.mean(p_swap)),
            "p_th_honeycomb": p_th_h,
            "p_th_triangular": p_th_t,
            "lambda1_window_low": critical_lambda1(p_th_h, copies=2),
            "lambda1_window_high": critical_lambda1(p_th_t, copies=1),
        },
        curves=curves,
    )


def threshold_table(
    kinds: Sequence[str],
    L: int,
    trials: int,
    tol: float = 0.005,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
    boundary: str = "periodic",
) -> list[ThresholdEstimate]:
    unknown = [k for k in kinds if k not in THRESHOLD_KINDS]
    if unknown:
        raise ProtocolError(f"Unsupported lattice kind(s) for thresholds: {', '.join(unknown)}.")
    return [estimate_threshold(k, L, trials, tol, seed, threads, boundary) for k in kinds]


def swap_report(
    a: SchmidtVector,
    b: SchmidtVector,
    trials: int = 0,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> ProtocolReport:
    """Single Bell swap of `a` and `b`: exact averages, optionally checked by sampling."""
    dist = bell_swap(a, b)
    report = ProtocolReport(
        strategy="swap",
        parameters={"a": list(a.coeffs), "b": list(b.coeffs), "trials": trials, "seed": seed},
        exact={
            "scp": average_scp(dist),
            "concurrence": average_concurrence(dist),
        },
    )
    if trials < 1:
        return report

    sizes = block_sizes(trials, BLOCK_TRIALS)

    def run(start: int, stop: int) -> np.ndarray:
        acc = np.zeros(4, dtype=np.float64)
        for block in range(start, stop):
            rng = trial_stream(seed, block)
            for _ in range(sizes[block]):
                state = sample_outcome(dist, rng)
                s, c = scp(state), concurrence(state)
                acc += (s, s * s, c, c * c)
        return acc

    sums = np.sum(run_chunked(run, len(sizes), 1, threads), axis=0)
    report.estimates["scp"] = _mean_estimate(sums[0], sums[1], trials)
    report.estimates["concurrence"] = _mean_estimate(sums[2], sums[3], trials)
    return report
