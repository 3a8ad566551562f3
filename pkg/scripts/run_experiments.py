#!/usr/bin/env python3
"""Run the standard experiment set through the CLI into one output folder.

Usage: python scripts/run_experiments.py [OUT_DIR] [--quick]

Each experiment writes a JSON result plus its run manifest. ``--quick`` cuts
lattice sizes and trial counts for a smoke run.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from entanglement_percolation.cli import main  # noqa: E402
from entanglement_percolation.protocols import HONEYCOMB_CRITICAL_LAMBDA1  # noqa: E402


def experiments(quick: bool) -> list[tuple[str, list[str]]]:
    L_thr, L_demo = (16, 8) if quick else (64, 32)
    mc, lattice_trials = (5000, 200) if quick else (100_000, 2000)
    return [
        ("scp_bell", ["scp", "--coeffs", "0.5,0.5"]),
        ("swap_0.8", ["swap", "--lambda1", "0.8", "--trials", str(mc)]),
        ("chain_sweep", ["chain", "--lambda1", "0.8", "--N", "10", "--sweep", "--trials", str(mc)]),
        ("square2x2", ["square2x2", "--lambda1", "0.8", "--trials", str(mc)]),
        ("thresholds", ["thresholds", "--L", str(L_thr), "--trials", str(lattice_trials)]),
        (
            "honeycomb_window",
            ["honeycomb-demo", "--lambda1", "0.823", "--L", str(L_demo), "--trials", str(lattice_trials)],
        ),
        (
            "honeycomb_critical",
            [
                "honeycomb-demo",
                "--lambda1",
                repr(HONEYCOMB_CRITICAL_LAMBDA1),
                "--L",
                str(L_demo),
                "--trials",
                str(lattice_trials),
            ],
        ),
        (
            "two_point_triangular",
            ["two-point", "--kind", "triangular", "--L", str(L_demo), "--trials", str(lattice_trials)],
        ),
    ]


def run_all(out_dir: Path, quick: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, argv in experiments(quick):
        target = out_dir / f"{name}.json"
        code = main([*argv, "--out", str(target), "-v"])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{name}: {status} -> {target}")
        failures += code != 0
    return 1 if failures else 0


if __name__ == "__main__":
    args = [a for a in sys.argv[1:] if a != "--quick"]
    out = Path(args[0]) if args else REPO_ROOT / "results"
    raise SystemExit(run_all(out, quick="--quick" in sys.argv[1:]))
