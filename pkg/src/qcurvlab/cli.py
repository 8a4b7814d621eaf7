"""Command-line front end: configuration, suite dispatch, report emission.

Subcommands mirror the suites (identities, yamabe, det4, intervals,
optimize).  Reports stream as JSON lines to stdout or to --out; grid scans
can additionally be exported as CSV.  Exit status: 0 when every verdict
passes, 1 when a numerical check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .models import parse_model_spec
from .reports import VerificationReport
from .suites import (RunConfig, det4_suite, identities_suite, intervals_suite,
                     optimize_suite, yamabe_suite)

ENV_OUTPUT_DIR = "QCURVLAB_OUTPUT_DIR"


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x != "")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x != "")


def _parse_gammas(text: str) -> tuple[tuple[float, float, float], ...]:
    out = []
    for part in text.split(";"):
        vals = _parse_floats(part)
        if len(vals) != 3:
            raise argparse.ArgumentTypeError("each gamma needs three values")
        out.append(vals)
    return tuple(out)


def _read_config_file(path: str) -> dict[str, str]:
    """Simple key=value lines mirroring the long flag names; # comments."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line {raw!r}")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcurvlab",
        description="verification lab for fourth-order conformal curvature "
                    "invariants on Einstein model geometries")
    parser.add_argument("--config", help="key=value file mirroring the flags")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--nodes", type=int, default=256)
        p.add_argument("--step", type=float, default=1e-2)
        p.add_argument("--levels", type=int, default=2)
        p.add_argument("--out", help="JSON-lines output path "
                       f"(default stdout; ${ENV_OUTPUT_DIR} prefixes relative paths)")
        p.add_argument("--csv", help="also write the records as CSV")

    p = sub.add_parser("identities", help="pointwise identity residuals on "
                       "random analytic metrics")
    p.add_argument("--n", default="3,4,5", help="comma list of dimensions")
    common(p)

    p = sub.add_parser("yamabe", help="sharp-constant checks on a sphere model")
    p.add_argument("--model", default="sphere:n=5,lambda=1")
    p.add_argument("--a", default="0", help="comma list of a values")
    p.add_argument("--b", default="0", help="comma list of b values")
    common(p)

    p = sub.add_parser("det4", help="dimension-4 functional checks")
    p.add_argument("--model", default="sphere:n=4,lambda=1")
    p.add_argument("--gamma", default="0,1,0;0,0,1;-1,1,1",
                   help="semicolon-separated gamma triples")
    common(p)

    p = sub.add_parser("intervals", help="exact interval and triple algebra")
    p.add_argument("--n", default="3,4,5,6,7,8,9,10")
    common(p)

    p = sub.add_parser("optimize", help="optimizer witnesses of the extremal values")
    p.add_argument("--model", default="sphere:n=5,lambda=1")
    p.add_argument("--objective", default="total_iab",
                   choices=("total_iab", "f_gamma", "dj"))
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="0")
    p.add_argument("--gamma", default="0,1,0")
    p.add_argument("--degree", type=int, default=8)
    common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    cfg.seed = args.seed
    cfg.trials = args.trials
    cfg.nodes = args.nodes
    cfg.step = args.step
    cfg.richardson_levels = args.levels
    cfg.out = args.out
    cfg.csv = args.csv
    if hasattr(args, "model"):
        cfg.model = args.model
    if hasattr(args, "n"):
        cfg.dims = _parse_ints(args.n)
    if hasattr(args, "a"):
        cfg.a_values = _parse_floats(args.a)
    if hasattr(args, "b"):
        cfg.b_values = _parse_floats(args.b)
    if hasattr(args, "gamma"):
        cfg.gammas = _parse_gammas(args.gamma)
    if hasattr(args, "objective"):
        cfg.objective = args.objective
    if hasattr(args, "degree"):
        cfg.degree = args.degree
    return cfg


def run(config: RunConfig) -> VerificationReport:
    """Execute the configured suite and return its report."""
    if config.subcommand == "identities":
        return identities_suite(config)
    if config.subcommand == "yamabe":
        return yamabe_suite(config, parse_model_spec(config.model))
    if config.subcommand == "det4":
        return det4_suite(config, parse_model_spec(config.model))
    if config.subcommand == "intervals":
        return intervals_suite(config)
    if config.subcommand == "optimize":
        return optimize_suite(config, parse_model_spec(config.model))
    raise ValueError(f"unknown subcommand {config.subcommand!r}")


def _resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(ENV_OUTPUT_DIR)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, remaining = parser.parse_known_args(argv)
    if remaining:
        parser.error(f"unrecognized arguments: {' '.join(remaining)}")
    if args.config:
        defaults = _read_config_file(args.config)
        known = vars(args)
        for key, val in defaults.items():
            if key in known and parser.get_default(key) == known[key]:
                setattr(args, key, type(known[key])(val)
                        if known[key] is not None else val)
    try:
        config = config_from_args(args)
        report = run(config)
    except (ValueError, TypeError) as exc:
        parser.exit(2, f"error: {exc}\n")
    out_path = _resolve_out(config.out)
    if out_path is None:
        report.write_jsonl(sys.stdout)
    else:
        with open(out_path, "w") as fh:
            report.write_jsonl(fh)
        print(f"wrote {len(report.records)} records to {out_path}")
    csv_path = _resolve_out(config.csv)
    if csv_path is not None:
        with open(csv_path, "w") as fh:
            report.write_csv(fh)
        print(f"wrote CSV grid to {csv_path}")
    return 0 if report.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
