"""Command-line harness: generate lineups, run power studies, serve the study.

Thin argument parsing over the library; every verb is deterministic
given its flags and seed.  Machine output is JSONL, human output is an
aligned table.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import (
    ExperimentConfig,
    classical_power,
    generate_study,
    visual_power,
)
from .normality import METHODS, UPPER_TAIL, build_null_table
from .rng import RngStream
from .visual import Evaluation


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    doc = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "alpha", None) is not None:
        doc["alpha"] = args.alpha
    if getattr(args, "reps", None) is not None:
        doc["mc_reps"] = args.reps
    return ExperimentConfig.from_dict(doc)


def cmd_generate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    manifest = generate_study(config, args.out)
    n = len(manifest["lineups"])
    datasets = len({rec["dataset_id"] for rec in manifest["lineups"]})
    print(f"wrote {n} lineups from {datasets} datasets to {args.out}")
    print(f"private manifest: {Path(args.out) / 'manifest.json'} (mode 0600, keep it private)")
    return 0


def cmd_classical_power(args: argparse.Namespace) -> int:
    config = _load_config(args)
    report = classical_power(config, fixed_null=args.fixed_null)
    if args.out:
        Path(args.out).write_text(report.to_jsonl())
        print(f"wrote {args.out}")
    print(report.to_text(), end="")
    return 0


def cmd_visual_power(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    evaluations = []
    text = Path(args.evaluations).read_text()
    for line in text.splitlines():
        line = line.strip()
        if line:
            evaluations.append(Evaluation.from_dict(json.loads(line)))
    if not evaluations:
        print("warning: no evaluations found; report is empty", file=sys.stderr)
    report = visual_power(manifest, evaluations, alpha=args.alpha if args.alpha else 0.05)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1))
        print(f"wrote {args.out}")
    header = f"{'lineup_id':>18} {'design':>10} {'N':>4} {'y':>7} {'p_value':>10} {'reject':>7}"
    print(header)
    print("-" * len(header))
    for row in report["results"]:
        print(
            f"{row['lineup_id']:>18} {row['design']:>10} {row['N']:>4} "
            f"{row['y_weighted']:>7.2f} {row['p_value']:>10.4g} {str(row['reject']):>7}"
        )
    if report["skipped"]:
        print(f"skipped {len(report['skipped'])} evaluation(s):", file=sys.stderr)
        for item in report["skipped"]:
            print(f"  - {item['reason']}", file=sys.stderr)
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    if args.reps < 1000:
        print("error: --reps must be at least 1000", file=sys.stderr)
        return 2
    table = build_null_table(args.method, args.n, args.reps, RngStream(args.seed or 0))
    Path(args.out).write_text(table.to_json())
    print(f"wrote {args.out}")
    upper = UPPER_TAIL[args.method]
    tail = "upper" if upper else "lower"
    for alpha in (0.1, 0.05, 0.01):
        cv = table.critical_value(alpha, upper_tail=upper)
        print(f"alpha={alpha:<5} critical value ({tail} tail): {cv:.4f}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(store_path=args.store)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qqlineup",
        description="Q-Q lineup generation, normality-test power studies, and the study service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render the factorial study to a directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="experiment seed")
    p.add_argument("--config", help="JSON file mirroring ExperimentConfig")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("classical-power", help="Monte Carlo power of the classical tests")
    p.add_argument("--seed", type=int, help="experiment seed")
    p.add_argument("--alpha", type=float, help="significance level")
    p.add_argument("--reps", type=int, help="Monte Carlo replications per cell")
    p.add_argument("--config", help="JSON file mirroring ExperimentConfig")
    p.add_argument(
        "--fixed-null",
        action="store_true",
        help="also run KS against a fixed N(0,1) null",
    )
    p.add_argument("--out", help="write JSONL report here")
    p.set_defaults(fn=cmd_classical_power)

    p = sub.add_parser("visual-power", help="score observer evaluations against a manifest")
    p.add_argument("--manifest", required=True, help="private manifest.json from generate")
    p.add_argument("--evaluations", required=True, help="JSONL file of evaluations")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="write the full JSON report here")
    p.set_defaults(fn=cmd_visual_power)

    p = sub.add_parser("calibrate", help="build a Monte Carlo null table for one test")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSON table path")
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--store", help="event log path (default: QQLINEUP_STORE or ./qqlineup-store.jsonl)")
    p.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
