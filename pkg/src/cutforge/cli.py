"""Command-line entry point: ``cutforge {evolve,evaluate,trace,label,features}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from types import SimpleNamespace

from cutforge.features import compute_features, export_features
from cutforge.forge import (
    PRESETS,
    Direction,
    EvolutionConfig,
    evaluate,
    evolve,
    label,
    load_archive,
    trace,
)
from cutforge.graph import GraphFormatError, read_graph
from cutforge.gw import SdpConvergenceError, solve_sdp

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _config_args(p: argparse.ArgumentParser, need_nodes: bool) -> None:
    if need_nodes:
        p.add_argument("--nodes", type=int, help="node count of evolved instances")
        p.add_argument("--preset", choices=sorted(PRESETS), help="named configuration")
    p.add_argument("--nc", type=int, help="RQAOA brute-force threshold")
    p.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.GW_OVER_RQAOA.value)
    p.add_argument("--runs", type=int, default=100, help="runs per algorithm")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cutforge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", help="evolve instances with CMA-ES")
    _config_args(p, need_nodes=True)
    p.add_argument("--popsize", type=int)
    p.add_argument("--budget", type=int, help="evaluations per restart")
    p.add_argument("--restarts", type=int)
    p.add_argument("--out", required=True, help="archive directory")

    p = sub.add_parser("evaluate", help="run both algorithms on one graph")
    p.add_argument("graph", help="edge-list file")
    _config_args(p, need_nodes=False)
    p.add_argument("--out", help="write the full JSON report here")

    p = sub.add_parser("trace", help="record one RQAOA solve as JSON and DOT files")
    p.add_argument("graph")
    p.add_argument("--nc", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("label", help="label an archive and write its feature CSV")
    p.add_argument("archive")
    p.add_argument("--threshold", type=float, help="GW/RQAOA ratio at or below which the label is 1")
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("features", help="compute the feature vector of one graph")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path")
    return parser


def _evolution_config(args) -> EvolutionConfig:
    base = dict(PRESETS[args.preset]) if args.preset else {}
    overrides = {
        "n": args.nodes,
        "n_c": args.nc,
        "popsize": args.popsize,
        "max_evals_per_restart": args.budget,
        "max_restarts": args.restarts,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "n" not in base or "n_c" not in base:
        raise ValueError("--nodes and --nc are required without --preset")
    return EvolutionConfig(
        direction=args.direction, runs_per_algorithm=args.runs, seed=args.seed, out=args.out, **base
    )


def _cmd_evolve(args) -> None:
    cfg = _evolution_config(args)
    records = evolve(cfg)
    print(f"archived {len(records)} instances in {cfg.out}")
    for r in records[:10]:
        print(f"  {r.instance_id}  ratio {r.ratio:.4f}  rqaoa {r.median_rqaoa:.2f}  gw {r.median_gw:.2f}")


def _cmd_evaluate(args) -> None:
    g = read_graph(args.graph)
    cfg = EvolutionConfig(
        n=max(g.n, 2), n_c=args.nc if args.nc is not None else min(g.n, 10),
        direction=args.direction, runs_per_algorithm=args.runs, seed=args.seed,
    )
    report = evaluate(g, cfg)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"n={report['n']} m={report['m']}")
    print(f"median RQAOA {report['median_rqaoa']:.2f}  median GW {report['median_gw']:.2f}")
    print(f"GW/RQAOA {report['ratio_gw_over_rqaoa']:.4f}  RQAOA/GW {report['ratio_rqaoa_over_gw']:.4f}")
    print(f"SDP bound {report['relaxed_cost']:.4f}")
    if report["optimum"] is not None:
        print(f"optimum {report['optimum']:.2f}")


def _cmd_trace(args) -> None:
    g = read_graph(args.graph)
    if not 1 <= args.nc:
        raise ValueError("--nc must be at least 1")
    doc = trace(g, args.nc, args.seed, args.out)
    print(f"{len(doc['trace'])} contractions, cut {doc['value']:.2f}, written to {args.out}")


def _cmd_label(args) -> None:
    records = label(load_archive(args.archive), args.threshold, args.out)
    ones = sum(r.label for r in records)
    print(f"labelled {len(records)} instances ({ones} with label 1) into {args.out}")


def _cmd_features(args) -> None:
    g = read_graph(args.graph)
    sol = solve_sdp(g) if g.m else None
    fv = compute_features(g, sol, args.seed)
    if args.out:
        export_features(
            [SimpleNamespace(instance_id=Path(args.graph).stem, n=g.n, features=fv, ratio=float("nan"), label=None)],
            args.out,
        )
    for name in fv.values:
        flag = " (approximate)" if name in fv.approximate else ""
        print(f"{name:36s} {fv[name]:.6g}{flag}")


COMMANDS = {
    "evolve": _cmd_evolve,
    "evaluate": _cmd_evaluate,
    "trace": _cmd_trace,
    "label": _cmd_label,
    "features": _cmd_features,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        COMMANDS[args.command](args)
    except SdpConvergenceError as exc:
        print(f"cutforge: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GraphFormatError, ValueError, FileNotFoundError) as exc:
        print(f"cutforge: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
