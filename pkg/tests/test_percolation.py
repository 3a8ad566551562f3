from __future__ import annotations

import math

import numpy as np
import pytest

from entanglement_percolation._trials import trial_stream
from entanglement_percolation.models import ConnectivityCurve, CurvePoint, SchmidtVector
from entanglement_percolation.network import (
    LatticeSpec,
    build_lattice,
    custom_network,
    pairs_at_distances,
)
from entanglement_percolation.percolation import (
    BOND_THRESHOLDS,
    PercolationError,
    cluster_sizes,
    connected,
    connection_frequency,
    estimate_theta,
    estimate_threshold,
    fit_correlation_length,
    largest_cluster_fraction,
    sample,
    spanning_frequency,
    spans,
    trial_sample,
    two_point,
)

BELL = SchmidtVector.bell()


def _lattice(kind: str, L: int, boundary: str = "periodic"):
    return build_lattice(LatticeSpec(kind, L, boundary), BELL)


def test_extreme_probabilities():
    net = _lattice("square", 8)
    rng = np.random.default_rng(0)
    closed = sample(net, 0.0, rng)
    assert not connected(closed, 0, 1)
    assert largest_cluster_fraction(closed) == pytest.approx(1.0 / 64)
    assert not spans(closed, 0)

    full = sample(net, 1.0, rng)
    assert connected(full, 0, 63)
    assert largest_cluster_fraction(full) == 1.0
    assert spans(full, 0) and spans(full, 1)


def test_open_boundary_spanning():
    net = _lattice("triangular", 6, "open")
    assert spans(sample(net, 1.0, np.random.default_rng(0)), 0)
    assert not spans(sample(net, 0.0, np.random.default_rng(0)), 1)


def test_cluster_sizes_on_split_network():
    net = custom_network(5, [(0, 1, [BELL]), (1, 2, [BELL]), (3, 4, [BELL])])
    s = sample(net, 1.0, np.random.default_rng(0))
    assert cluster_sizes(s).tolist() == [3, 2]
    assert largest_cluster_fraction(s) == pytest.approx(0.6)


def test_coupled_samples_are_monotone():
    net = _lattice("triangular", 12)
    for trial in range(20):
        weights = trial_stream(5, trial).random(net.n_edges)
        low = sample(net, 0.3, weights=weights)
        high = sample(net, 0.45, weights=weights)
        assert np.all(high.open[low.open])
        r_low = low.clusters.roots()
        r_high = high.clusters.roots()
        # nodes sharing a cluster at the lower p share one at the higher p
        assert np.array_equal(r_high, r_high[r_low])
        assert largest_cluster_fraction(high) >= largest_cluster_fraction(low)


def test_same_seed_same_sample():
    net = _lattice("honeycomb", 6)
    a = trial_sample(net, 0.6, seed=9, trial=3)
    b = trial_sample(net, 0.6, seed=9, trial=3)
    assert np.array_equal(a.open, b.open)
    assert not np.array_equal(a.open, trial_sample(net, 0.6, seed=9, trial=4).open)


def test_results_do_not_depend_on_thread_count():
    net = _lattice("square", 10)
    one = spanning_frequency(net, 0.5, trials=200, seed=3, threads=1)
    many = spanning_frequency(net, 0.5, trials=200, seed=3, threads=4)
    assert one == many
    assert estimate_theta(net, 0.4, 100, seed=3, threads=1) == estimate_theta(
        net, 0.4, 100, seed=3, threads=3
    )


def test_per_edge_probabilities_are_validated():
    net = _lattice("square", 4)
    with pytest.raises(PercolationError):
        sample(net, [0.5, 0.5], np.random.default_rng(0))
    with pytest.raises(PercolationError):
        sample(net, 1.5, np.random.default_rng(0))
    with pytest.raises(PercolationError):
        sample(net, 0.5)
    with pytest.raises(PercolationError):
        spanning_frequency(net, 0.5, trials=0)


def test_spanning_needs_geometry():
    net = custom_network(3, [(0, 1, [BELL]), (1, 2, [BELL])])
    s = sample(net, 1.0, np.random.default_rng(0))
    assert connected(s, 0, 2)
    with pytest.raises(PercolationError):
        spans(s)


def test_connection_frequency_on_chain_matches_product():
    chain = _lattice("chain", 3, "open")
    est = connection_frequency(chain, 0.4, 0, 2, trials=20000, seed=1)
    assert abs(est.value - 0.16) <= 4 * est.stderr
    assert est.trials == 20000


def test_estimate_theta_bounds():
    net = _lattice("square", 8)
    assert estimate_theta(net, 1.0, 10).value == 1.0
    assert estimate_theta(net, 0.0, 10).value == pytest.approx(1.0 / 64)


def test_threshold_validation():
    with pytest.raises(PercolationError):
        estimate_threshold("chain", 16, 10)
    with pytest.raises(PercolationError):
        estimate_threshold("square", 16, 10, tol=0.001)


@pytest.mark.parametrize("kind", ["square", "triangular", "honeycomb"])
def test_thresholds_at_moderate_size(kind):
    est = estimate_threshold(kind, 32, trials_per_point=400, tol=0.01, seed=7)
    assert est.p_th_exact == BOND_THRESHOLDS[kind]
    assert abs(est.p_th_hat - BOND_THRESHOLDS[kind]) < 0.03
    assert est.stderr > 0.0


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["square", "triangular", "honeycomb"])
def test_thresholds_full_size(kind):
    est = estimate_threshold(kind, 64, trials_per_point=2000, tol=0.005, seed=7)
    assert abs(est.p_th_hat - BOND_THRESHOLDS[kind]) < 0.015


def test_threshold_constants():
    s = math.sin(math.pi / 18.0)
    assert BOND_THRESHOLDS["triangular"] == pytest.approx(0.3473, abs=1e-4)
    assert BOND_THRESHOLDS["honeycomb"] == pytest.approx(0.6527, abs=1e-4)
    assert BOND_THRESHOLDS["triangular"] + BOND_THRESHOLDS["honeycomb"] == pytest.approx(1.0)
    assert 2 * s == BOND_THRESHOLDS["triangular"]


def test_two_point_on_chain_decays_geometrically():
    chain = _lattice("chain", 30, "open")
    pairs = {d: [(s, s + d) for s in range(0, 20, 4)] for d in (1, 2, 3, 4)}
    pairs[50] = []
    curve = two_point(chain, 0.5, pairs, trials=4000, seed=2, label="chain")
    assert curve.xs().tolist() == [1.0, 2.0, 3.0, 4.0]
    for point in curve.points:
        assert abs(point.p_hat - 0.5**point.x) <= 4 * point.stderr
    assert all(row["series"] == "chain" for row in curve.rows())


def test_two_point_rejects_unknown_nodes():
    chain = _lattice("chain", 5, "open")
    with pytest.raises(PercolationError):
        two_point(chain, 0.5, {1: [(0, 9)]}, trials=10)


def test_fit_correlation_length_recovers_exponent():
    xi = 3.0
    curve = ConnectivityCurve(
        [CurvePoint(float(x), 0.7 * math.exp(-x / xi), 0.0, 1) for x in range(1, 9)]
    )
    fitted_xi, amplitude = fit_correlation_length(curve)
    assert fitted_xi == pytest.approx(xi)
    assert amplitude == pytest.approx(0.7)

    rising = ConnectivityCurve([CurvePoint(1.0, 0.3, 0.0, 1), CurvePoint(2.0, 0.6, 0.0, 1)])
    with pytest.raises(PercolationError):
        fit_correlation_length(rising)
    with pytest.raises(PercolationError):
        fit_correlation_length(ConnectivityCurve([CurvePoint(1.0, 0.5, 0.0, 1)]))


# wrapping probability at p_c on a finite torus sits slightly above 1/2
_WRAP_FINITE_SIZE = 0.025


@pytest.mark.slow
def test_square_spanning_near_half_at_threshold():
    net = _lattice("square", 64)
    est = spanning_frequency(net, 0.5, trials=1000, seed=31)
    assert abs(est.value - 0.5) <= 3 * est.stderr + _WRAP_FINITE_SIZE


@pytest.mark.slow
def test_square_rarely_spans_below_threshold():
    net = _lattice("square", 64)
    assert spanning_frequency(net, 0.45, trials=500, seed=32).value < 0.2


@pytest.mark.slow
def test_theta_grows_across_threshold():
    net = _lattice("square", 64)
    low = estimate_theta(net, 0.4, trials=200, seed=33)
    high = estimate_theta(net, 0.6, trials=200, seed=33)
    assert high.value - low.value >= 5 * math.hypot(low.stderr, high.stderr)


@pytest.mark.parametrize("kind", ["square", "triangular", "honeycomb"])
def test_spanning_at_exact_threshold_is_intermediate(kind):
    net = _lattice(kind, 32)
    est = spanning_frequency(net, BOND_THRESHOLDS[kind], trials=400, seed=34)
    assert 0.25 <= est.value <= 0.75


@pytest.mark.slow
def test_two_point_on_square_decays_exponentially_below_threshold():
    net = _lattice("square", 64)
    pairs = pairs_at_distances(net, [1, 2, 3, 4])
    curve = two_point(net, 0.3, pairs, trials=500, seed=35)
    values = curve.values().tolist()
    assert values == sorted(values, reverse=True)
    assert values[-1] > 0.0
    xi, amplitude = fit_correlation_length(curve)
    assert 0.0 < xi < 5.0
    assert amplitude > 0.0
