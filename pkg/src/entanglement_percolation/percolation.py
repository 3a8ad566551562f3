"""Monte Carlo bond percolation on `Network`s.

Trial ``t`` draws its per-edge uniform weights from ``trial_stream(seed, t)``;
edge ``e`` is open when ``weights[e] < p[e]``. Re-running with the same seed at
a larger ``p`` therefore opens a superset of edges (coupled sweeps).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ._trials import DEFAULT_SEED, run_chunked, trial_stream
from .models import ConnectivityCurve, CurvePoint, Estimate, SchmidtVector, ThresholdEstimate
from .network import LatticeSpec, Network, build_lattice
from .unionfind import PercolationError, UnionFind

logger = logging.getLogger(__name__)

_SIN_PI_18 = math.sin(math.pi / 18.0)
BOND_THRESHOLDS = {
    "square": 0.5,
    "triangular": 2.0 * _SIN_PI_18,
    "honeycomb": 1.0 - 2.0 * _SIN_PI_18,
    "chain": 1.0,
}
THRESHOLD_KINDS = ("square", "triangular", "honeycomb")
MIN_TOLERANCE = 0.005

_TRIAL_CHUNK = 32


@dataclass(slots=True)
class PercolationSample:
    network: Network
    open: np.ndarray
    clusters: UnionFind
    weights: Optional[np.ndarray] = None

    @property
    def wraps(self) -> tuple[bool, bool]:
        return bool(self.clusters.wraps[0]), bool(self.clusters.wraps[1])


def edge_probabilities(net: Network, p: float | Sequence[float] | np.ndarray) -> np.ndarray:
    """Broadcast a scalar or per-edge probability list to one value per edge."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(net.n_edges, float(arr))
    elif arr.shape != (net.n_edges,):
        raise PercolationError(
            f"Expected {net.n_edges} per-edge probabilities, got shape {arr.shape}."
        )
    if arr.size and (np.any(~np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        raise PercolationError("Edge probabilities must lie in [0, 1].")
    return arr


def sample(
    net: Network,
    p: float | Sequence[float] | np.ndarray,
    rng: Optional[np.random.Generator] = None,
    *,
    weights: Optional[np.ndarray] = None,
) -> PercolationSample:
    """Open every edge independently with its probability and cluster the result."""
    probs = edge_probabilities(net, p)
    if weights is None:
        if rng is None:
            raise PercolationError("sample() needs either an rng or explicit weights.")
        weights = rng.random(net.n_edges)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (net.n_edges,):
            raise PercolationError(f"Expected {net.n_edges} edge weights, got {weights.shape}.")
    is_open = weights < probs
    clusters = UnionFind(net.n_nodes)
    clusters.union_edges(net.edge_u, net.edge_v, net.edge_shift, is_open)
    return PercolationSample(net, is_open, clusters, weights)


def trial_sample(net: Network, p, seed: int, trial: int) -> PercolationSample:
    return sample(net, p, weights=trial_stream(seed, trial).random(net.n_edges))


def connected(s: PercolationSample, a: int, b: int) -> bool:
    s.network.check_node(a)
    s.network.check_node(b)
    return s.clusters.find(a) == s.clusters.find(b)


def spans(s: PercolationSample, axis: int = 0) -> bool:
    """Whether some cluster wraps (periodic) or crosses face to face (open) along `axis`."""
    net = s.network
    if not net.has_geometry:
        raise PercolationError("Spanning needs a lattice network with cell coordinates.")
    if axis not in (0, 1):
        raise PercolationError(f"axis must be 0 or 1, got {axis!r}.")
    if net.boundary == "periodic":
        return s.wraps[axis]

    column = net.cells[:, axis]
    roots = s.clusters.roots()
    low = roots[column == column.min()]
    high = roots[column == column.max()]
    return bool(np.intersect1d(low, high).size)


def cluster_sizes(s: PercolationSample) -> np.ndarray:
    return s.clusters.component_sizes()


def largest_cluster_fraction(s: PercolationSample) -> float:
    sizes = cluster_sizes(s)
    return float(sizes[0]) / s.network.n_nodes if sizes.size else 0.0


def _per_trial(
    net: Network,
    probs: np.ndarray,
    trials: int,
    seed: int,
    threads: Optional[int],
    measure: Callable[[PercolationSample], float],
) -> np.ndarray:
    if trials < 1:
        raise PercolationError(f"trials must be >= 1, got {trials}.")

    def run(start: int, stop: int) -> np.ndarray:
        return np.asarray(
            [measure(trial_sample(net, probs, seed, t)) for t in range(start, stop)],
            dtype=np.float64,
        )

    return np.concatenate(run_chunked(run, trials, _TRIAL_CHUNK, threads))


def _binomial(successes: float, n: int) -> Estimate:
    f = successes / n
    return Estimate(f, math.sqrt(max(f * (1.0 - f), 0.0) / n), n)


def estimate_theta(
    net: Network,
    p,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> Estimate:
    """Mean largest-cluster fraction, the finite-size proxy for theta(p)."""
    probs = edge_probabilities(net, p)
    values = _per_trial(net, probs, trials, seed, threads, largest_cluster_fraction)
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return Estimate(float(values.mean()), stderr, trials)


def spanning_frequency(
    net: Network,
    p,
    trials: int,
    seed: int = DEFAULT_SEED,
    axis: int = 0,
    threads: Optional[int] = None,
) -> Estimate:
    probs = edge_probabilities(net, p)
    hits = _per_trial(net, probs, trials, seed, threads, lambda s: float(spans(s, axis)))
    return _binomial(float(hits.sum()), trials)


def connection_frequency(
    net: Network,
    p,
    a: int,
    b: int,
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
) -> Estimate:
    net.check_node(a)
    net.check_node(b)
    probs = edge_probabilities(net, p)
    hits = _per_trial(net, probs, trials, seed, threads, lambda s: float(connected(s, a, b)))
    return _binomial(float(hits.sum()), trials)


def estimate_threshold(
    kind: str,
    L: int,
    trials_per_point: int,
    tol: float = 0.01,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
    boundary: str = "periodic",
    axis: int = 0,
) -> ThresholdEstimate:
    """Bisect p for the point where the spanning frequency crosses 1/2.

    Every bisection step reuses the same per-trial weights. The reported
    stderr is the binomial error at 1/2 divided by the spanning-curve slope
    around the estimate, combined with half the final bracket.
    """
    if kind not in THRESHOLD_KINDS:
        raise PercolationError(
            f"Threshold estimation supports {', '.join(THRESHOLD_KINDS)}, got '{kind}'."
        )
    if tol < MIN_TOLERANCE:
        raise PercolationError(f"tol must be >= {MIN_TOLERANCE}, got {tol}.")
    net = build_lattice(LatticeSpec(kind, L, boundary), SchmidtVector.bell())

    def freq(p: float) -> float:
        est = spanning_frequency(net, p, trials_per_point, seed, axis, threads)
        logger.info("%s L=%d p=%.5f spanning=%.4f", kind, L, p, est.value)
        return est.value

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if freq(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    p_hat = 0.5 * (lo + hi)

    delta = max(2.0 * tol, 0.02)
    p_lo, p_hi = max(0.0, p_hat - delta), min(1.0, p_hat + delta)
    slope = (freq(p_hi) - freq(p_lo)) / (p_hi - p_lo)
    sigma_f = math.sqrt(0.25 / trials_per_point)
    statistical = sigma_f / slope if slope > 0.0 else delta
    stderr = math.hypot(statistical, 0.5 * (hi - lo))
    return ThresholdEstimate(
        kind=kind,
        L=L,
        p_th_hat=p_hat,
        stderr=stderr,
        trials=trials_per_point,
        boundary=boundary,
        p_th_exact=BOND_THRESHOLDS[kind],
    )


def two_point(
    net: Network,
    p,
    pairs: Mapping[float, Sequence[tuple[int, int]]],
    trials: int,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None,
    label: str = "",
) -> ConnectivityCurve:
    """Probability that a pair is connected, per distance bucket.

    Pairs and trials are pooled; the stderr is binomial over that pool.
    Empty buckets are left out of the curve.
    """
    probs = edge_probabilities(net, p)
    keys = [k for k in sorted(pairs) if len(pairs[k])]
    for k in sorted(pairs):
        if not pairs[k]:
            logger.warning("no node pairs at distance %s; bucket skipped", k)
    if not keys:
        return ConnectivityCurve(label=label)
    src = [np.asarray([a for a, _ in pairs[k]], dtype=np.int64) for k in keys]
    dst = [np.asarray([b for _, b in pairs[k]], dtype=np.int64) for k in keys]
    for arr in (*src, *dst):
        if arr.size and (arr.min() < 0 or arr.max() >= net.n_nodes):
            raise PercolationError("two_point pair references a node outside the network.")

    if trials < 1:
        raise PercolationError(f"trials must be >= 1, got {trials}.")

    def run(start: int, stop: int) -> np.ndarray:
        counts = np.zeros(len(keys), dtype=np.int64)
        for t in range(start, stop):
            roots = trial_sample(net, probs, seed, t).clusters.roots()
            for i in range(len(keys)):
                counts[i] += int(np.count_nonzero(roots[src[i]] == roots[dst[i]]))
        return counts

    totals = np.sum(run_chunked(run, trials, _TRIAL_CHUNK, threads), axis=0)
    curve = ConnectivityCurve(label=label)
    for i, k in enumerate(keys):
        n = trials * len(pairs[k])
        est = _binomial(float(totals[i]), n)
        curve.points.append(CurvePoint(float(k), est.value, est.stderr, n))
    return curve


def fit_correlation_length(
    curve: ConnectivityCurve,
    x_min: float = 1.0,
    x_max: float = math.inf,
) -> tuple[float, float]:
    """Least-squares fit of p(x) = A exp(-x / xi); returns (xi, A)."""
    xs = curve.xs()
    ys = curve.values()
    mask = (xs >= x_min) & (xs <= x_max) & (ys > 0.0)
    if np.count_nonzero(mask) < 2:
        raise PercolationError("Correlation-length fit needs two positive points in range.")
    slope, intercept = np.polyfit(xs[mask], np.log(ys[mask]), 1)
    if slope >= 0.0:
        raise PercolationError("Connectivity does not decay over the fitted range.")
    return float(-1.0 / slope), float(math.exp(intercept))
