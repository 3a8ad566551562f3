"""entperc: entanglement distribution over pair-entangled pure-state networks."""

from .models import (
    ConnectivityCurve,
    CurvePoint,
    DimensionError,
    Estimate,
    OutcomeDistribution,
    ProtocolReport,
    SchmidtVector,
    StateError,
    ThresholdEstimate,
)
from .network import LatticeSpec, Network, NetworkError, build_lattice, honeycomb_to_triangular
from .percolation import PercolationError, estimate_threshold, estimate_theta, sample, two_point
from .protocols import ProtocolError, cep, chain_swap, honeycomb_demo, square2x2

__version__ = "0.1.0"

__all__ = [
    "ConnectivityCurve",
    "CurvePoint",
    "DimensionError",
    "Estimate",
    "LatticeSpec",
    "Network",
    "NetworkError",
    "OutcomeDistribution",
    "PercolationError",
    "ProtocolError",
    "ProtocolReport",
    "SchmidtVector",
    "StateError",
    "ThresholdEstimate",
    "__version__",
    "build_lattice",
    "cep",
    "chain_swap",
    "estimate_threshold",
    "estimate_theta",
    "honeycomb_demo",
    "honeycomb_to_triangular",
    "sample",
    "square2x2",
    "two_point",
]
