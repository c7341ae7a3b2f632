"""Command-line driver.

Usage:
    horoflow verify-lemmas [--seed 7] [--out report.json]
    horoflow key-prop      [--grid 200] [--seed 7] [--out report.json]
    horoflow sequence      [--epsilon 0.1 --depth 4 --word-ball 6] [--out ...]
    horoflow witness       [--delta 0.05 --depth 4 --t-max 25] [--out ...]
    horoflow render [figure] [--depth 4] [--out figures.svg]

All commands take the same flags: --epsilon, --delta, --depth,
--spacing, --margin, --t-max, --grid, --word-ball, --precision-bits,
--seed, --out.  HOROFLOW_PRECISION_BITS overrides the per-command
precision default; an explicit --precision-bits beats both.  Reports
are UTF-8 JSON on stdout or at --out; render emits standalone SVG 1.1.
Exit status is 0 when every check passes, 1 when any fails, 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import sys

from mpmath import mpf

from .numeric import SplitMix64, derive_seed, precision
from .horocycle import random_tangency, standardize_tangency
from .report import ReportBuilder
from .sequence import PairSequenceSpec, build_pair_sequence, iterate_winding
from .suites import (
    COMMANDS,
    RunConfig,
    run_key_prop,
    run_sequence,
    run_verify_lemmas,
    run_witness,
)
from .svgfig import FIGURES, render_figures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horoflow",
        description="verify the winding and shadowing bounds of the geodesic flow "
        "on the hyperbolic plane and build non-expansiveness witnesses",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--delta", type=float, default=0.05)
        p.add_argument("--depth", type=int, default=4)
        p.add_argument("--spacing", type=float, default=2.0)
        p.add_argument("--margin", type=float, default=0.9)
        p.add_argument("--t-max", dest="t_max", type=float, default=25.0)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--word-ball", dest="word_ball", type=int, default=None)
        p.add_argument(
            "--precision-bits", dest="precision_bits", type=int, default=None
        )
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--out", type=str, default=None)
        if name == "render":
            p.add_argument(
                "figure",
                nargs="?",
                default="all",
                choices=list(FIGURES) + ["all"],
            )
    return parser


def run_render(cfg: RunConfig) -> str:
    rng = SplitMix64(derive_seed(cfg.seed, "render"))
    std = standardize_tangency(random_tangency(rng, move=False))
    spec = PairSequenceSpec(
        epsilon=mpf(cfg.epsilon),
        depth=cfg.depth,
        spacing=mpf(cfg.spacing),
        margin_factor=mpf(cfg.margin),
    )
    ws = iterate_winding(build_pair_sequence(spec))
    return render_figures(std, ws, cfg.figure)


SUITES = {
    "verify-lemmas": run_verify_lemmas,
    "key-prop": run_key_prop,
    "sequence": run_sequence,
    "witness": run_witness,
}


def run(cfg: RunConfig) -> int:
    with precision(cfg.bits):
        if cfg.command == "render":
            svg = run_render(cfg)
            out = cfg.out or "figures.svg"
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(svg)
            print(f"wrote {out}")
            return 0
        report: ReportBuilder = SUITES[cfg.command](cfg)
    payload = report.dumps()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    if not report.all_passed:
        for record in report.records:
            if not record.passed:
                print(
                    f"FAILED: {record.name} [{record.paper_ref}]", file=sys.stderr
                )
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    kwargs = {k: v for k, v in vars(args).items() if v is not None}
    try:
        cfg = RunConfig(**kwargs)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
