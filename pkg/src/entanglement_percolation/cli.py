from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable

import numpy as np

from . import __version__
from ._trials import TrialError
from .config import ConfigError, ExperimentConfig, build_config, load_config_file
from .models import ProtocolReport, SchmidtVector, StateError
from .network import (
    BOUNDARIES,
    LATTICE_KINDS,
    LatticeSpec,
    NetworkError,
    build_lattice,
    cycle_network,
    dump_network,
    pairs_at_distances,
)
from .percolation import (
    BOND_THRESHOLDS,
    THRESHOLD_KINDS,
    PercolationError,
    fit_correlation_length,
    two_point,
)
from .protocols import (
    ProtocolError,
    chain_comparison,
    edge_scps,
    honeycomb_demo,
    square2x2,
    swap_report,
    threshold_table,
)
from .reporting import ReportError, build_document, render, write_manifest, write_result
from .state_algebra import (
    bell_swap,
    concurrence,
    nielsen_reduce,
    rank2_concurrence_bound,
    scp,
)

logger = logging.getLogger("entanglement_percolation")

_ERRORS = (
    ConfigError,
    StateError,
    NetworkError,
    PercolationError,
    ProtocolError,
    ReportError,
    TrialError,
)

Rows = list[dict[str, Any]]


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from exc


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def _add_bond_args(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--coeffs", type=_float_list, default=None, help="Schmidt coefficients, e.g. 0.8,0.2")
    cmd.add_argument("--lambda1", type=float, default=None, help="Qubit shorthand: (lambda1, 1 - lambda1)")


def _add_lattice_args(cmd: argparse.ArgumentParser, kinds=LATTICE_KINDS) -> None:
    cmd.add_argument("--kind", choices=list(kinds), default=None, help="Lattice kind")
    cmd.add_argument("--L", type=int, default=None, help="Linear lattice size")
    cmd.add_argument("--boundary", choices=list(BOUNDARIES), default=None, help="Boundary condition")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="Result file; stdout when omitted")
    common.add_argument("--format", choices=["csv", "json"], default=None, help="Output format")
    common.add_argument("--seed", type=int, default=None, help="Master seed (default 20070101)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: all cores)")
    common.add_argument("--config", default=None, help="YAML/JSON file with experiment parameters")
    common.add_argument("-v", "--verbose", action="count", default=0, help="Progress logs on stderr")

    parser = argparse.ArgumentParser(
        prog="entperc",
        description="Entanglement percolation: Schmidt-level state algebra and bond percolation experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scp_cmd = sub.add_parser("scp", parents=[common], help="Singlet conversion probability of a state")
    _add_bond_args(scp_cmd)

    swap = sub.add_parser("swap", parents=[common], help="Bell-swap two bond states")
    _add_bond_args(swap)
    swap.add_argument(
        "--coeffs-b",
        dest="coeffs_b",
        type=_float_list,
        default=None,
        help="Second bond (default: same as first)",
    )
    swap.add_argument("--lambda1-b", dest="lambda1_b", type=float, default=None, help="Second bond, qubit shorthand")
    swap.add_argument("--trials", type=int, default=None, help="Optional Monte Carlo check of the averages")

    chain = sub.add_parser("chain", parents=[common], help="CEP against Bell swapping on a repeater chain")
    _add_bond_args(chain)
    chain.add_argument("--N", type=int, default=None, help="Number of repeaters")
    chain.add_argument("--sweep", action="store_true", default=None, help="Run every N from 1 to --N")
    chain.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    chain.add_argument("--dump-network", dest="dump_network", default=None, help="Write the chain as network JSON")

    thresholds = sub.add_parser("thresholds", parents=[common], help="Estimate bond percolation thresholds")
    thresholds.add_argument(
        "--kind",
        dest="kinds",
        action="append",
        choices=list(THRESHOLD_KINDS),
        default=None,
        help="Lattice kind (repeatable; default: all)",
    )
    thresholds.add_argument("--L", type=int, default=None, help="Linear lattice size")
    thresholds.add_argument("--boundary", choices=list(BOUNDARIES), default=None, help="Boundary condition")
    thresholds.add_argument("--trials", type=int, default=None, help="Trials per bisection point")
    thresholds.add_argument("--tol", type=float, default=None, help="Bisection bracket width")

    square = sub.add_parser("square2x2", parents=[common], help="Diagonal corners of the 2x2 square")
    _add_bond_args(square)
    square.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    square.add_argument("--dump-network", dest="dump_network", default=None, help="Write the 4-cycle as network JSON")

    demo = sub.add_parser("honeycomb-demo", parents=[common], help="CEP against swap-then-CEP on the honeycomb")
    _add_bond_args(demo)
    demo.add_argument("--L", type=int, default=None, help="Linear lattice size")
    demo.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    demo.add_argument("--distances", type=_int_list, default=None, help="Cell separations for two-point curves")
    demo.add_argument("--dump-network", dest="dump_network", default=None, help="Write the honeycomb as network JSON")

    tp = sub.add_parser("two-point", parents=[common], help="Two-point connectivity against graph distance")
    _add_lattice_args(tp)
    _add_bond_args(tp)
    tp.add_argument("--p", type=float, default=None, help="Open probability per edge (overrides the bond)")
    tp.add_argument("--copies", type=int, default=None, help="Bond copies per edge")
    tp.add_argument("--distances", type=_int_list, default=None, help="Graph distances")
    tp.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    tp.add_argument("--dump-network", dest="dump_network", default=None, help="Write the lattice as network JSON")

    return parser


def _wide_row(report: ProtocolReport, base: dict[str, Any]) -> dict[str, Any]:
    row = dict(base)
    for key, est in report.estimates.items():
        row[f"{key}_mc"] = est.value
        row[f"{key}_stderr"] = est.stderr
        if key in report.exact:
            row[f"{key}_exact"] = report.exact[key]
    for key, value in report.exact.items():
        if key not in report.estimates:
            row[f"{key}_exact"] = value
    return row


def _maybe_dump(cfg: ExperimentConfig, net) -> None:
    if cfg.dump_network:
        path = dump_network(net, cfg.dump_network)
        logger.info("network written to %s", path)


def _default_distances(L: int) -> list[int]:
    return [d for d in (1, 2, 4, 8, 16, 32, 64) if d <= max(1, L // 2)]


def _run_scp(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    s = cfg.require_bond()
    rows: Rows = [
        {"quantity": "scp", "value": scp(s)},
        {"quantity": "dim", "value": s.dim},
        {"quantity": "lambda1", "value": s.lambda1},
    ]
    if s.dim <= 2:
        rows.append({"quantity": "concurrence", "value": concurrence(s)})
    rows.append({"quantity": "rank2_concurrence_bound", "value": rank2_concurrence_bound(s)})
    rows.append({"quantity": "nielsen_lambda1", "value": nielsen_reduce(s).lambda1})
    return rows, []


def _run_swap(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    a = cfg.require_bond()
    b = cfg.bond_b() or a
    rows: Rows = []
    for k, (prob, state) in enumerate(bell_swap(a, b)):
        rows.append(
            {
                "outcome": k,
                "probability": prob,
                "lambda1": state.coeffs[0],
                "lambda2": state.coeffs[1],
                "scp": scp(state),
                "concurrence": concurrence(state),
            }
        )
    report = swap_report(a, b, cfg.trials, cfg.seed, cfg.threads)
    rows.extend(report.rows())
    return rows, [report]


def _run_chain(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    bond = cfg.require_bond()
    n_values = list(range(1, cfg.N + 1)) if cfg.sweep else [cfg.N]
    _maybe_dump(cfg, build_lattice(LatticeSpec("chain", max(n_values) + 2, "open"), bond))
    reports = chain_comparison(n_values, bond, cfg.trials, cfg.seed, cfg.threads)
    base = {"lambda1": bond.lambda1, "trials": cfg.trials, "seed": cfg.seed}
    rows = [_wide_row(r, {"N": r.parameters["N"], **base}) for r in reports]
    return rows, reports


def _run_thresholds(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    table = threshold_table(cfg.kinds, cfg.L, cfg.trials, cfg.tol, cfg.seed, cfg.threads, cfg.boundary)
    return [t.as_row() for t in table], []


def _run_square2x2(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    bond = cfg.require_bond()
    _maybe_dump(cfg, cycle_network(4, bond))
    report = square2x2(bond, cfg.trials, cfg.seed, cfg.threads)
    row = _wide_row(report, {"lambda1": bond.lambda1, "trials": cfg.trials, "seed": cfg.seed})
    return [row], [report]


def _run_honeycomb_demo(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    bond = cfg.require_bond()
    if bond.dim != 2:
        raise ConfigError("honeycomb-demo needs a qubit bond.")
    if cfg.dump_network:
        _maybe_dump(
            cfg, build_lattice(LatticeSpec("honeycomb", cfg.L, "periodic"), bond, copies_per_edge=2)
        )
    distances = cfg.distances if cfg.distances is not None else _default_distances(cfg.L)
    report = honeycomb_demo(bond.lambda1, cfg.L, cfg.trials, cfg.seed, cfg.threads, distances)
    base = {"lambda1": bond.lambda1, "L": cfg.L, "trials": cfg.trials, "seed": cfg.seed}
    rows: Rows = []
    for strategy, threshold in (("cep", "p_th_honeycomb"), ("swap", "p_th_triangular")):
        span = report.estimates[f"spanning_freq_{strategy}"]
        rows.append(
            {
                "strategy": strategy,
                **base,
                "p_edge": report.exact[f"p_edge_{strategy}"],
                "p_threshold": report.exact[threshold],
                "spanning_freq": span.value,
                "spanning_stderr": span.stderr,
            }
        )
    for curve in report.curves.values():
        rows.extend(curve.rows())
    return rows, [report]


def _run_two_point(cfg: ExperimentConfig) -> tuple[Rows, list[ProtocolReport]]:
    bond = cfg.bond()
    net = build_lattice(
        LatticeSpec(cfg.kind, cfg.L, cfg.boundary), bond or SchmidtVector.bell(), cfg.copies
    )
    _maybe_dump(cfg, net)
    if cfg.p is not None:
        p: Any = cfg.p
    elif bond is not None:
        p = edge_scps(net)
    else:
        p = BOND_THRESHOLDS[cfg.kind]
    p_edge = float(np.mean(p))

    distances = cfg.distances if cfg.distances is not None else _default_distances(cfg.L)
    pairs = pairs_at_distances(net, distances)
    curve = two_point(net, p, pairs, cfg.trials, cfg.seed, cfg.threads, label="two_point")
    report = ProtocolReport(
        strategy="two_point",
        parameters={
            "kind": cfg.kind,
            "L": cfg.L,
            "boundary": cfg.boundary,
            "p_edge": p_edge,
            "trials": cfg.trials,
            "seed": cfg.seed,
        },
        curves={"two_point": curve},
    )
    try:
        xi, amplitude = fit_correlation_length(curve)
        report.parameters.update({"xi": xi, "amplitude": amplitude})
    except PercolationError as exc:
        report.notes.append(f"no correlation-length fit: {exc}")
    return curve.rows(), [report]


_HANDLERS: dict[str, Callable[[ExperimentConfig], tuple[Rows, list[ProtocolReport]]]] = {
    "scp": _run_scp,
    "swap": _run_swap,
    "chain": _run_chain,
    "thresholds": _run_thresholds,
    "square2x2": _run_square2x2,
    "honeycomb-demo": _run_honeycomb_demo,
    "two-point": _run_two_point,
}


def _cli_values(args: argparse.Namespace) -> dict[str, Any]:
    values = {k: v for k, v in vars(args).items() if k not in {"command", "config", "verbose"}}
    values["config_path"] = args.config
    return values


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    _configure_logging(args.verbose)
    try:
        file_values = load_config_file(args.config) if args.config else None
        cfg = build_config(args.command, _cli_values(args), file_values)
        rows, reports = _HANDLERS[cfg.command](cfg)
        doc = build_document(cfg.command, __version__, rows, reports)
        if cfg.out:
            path = write_result(doc, cfg.out, cfg.format)
            write_manifest(
                path, command=cfg.command, version=__version__, config=cfg.as_dict(), fmt=cfg.format
            )
            logger.info("results written to %s", path)
        else:
            sys.stdout.write(render(doc, cfg.format))
    except _ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
