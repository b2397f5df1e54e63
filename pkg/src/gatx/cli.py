"""Command line: build instances, run one algorithm, or compare both.

    gatx generate (--toy | --mock SEED | --merge K | --config FILE) --out instance.json
    gatx solve instance.json --algo gat --iters 5 --out report.json
    gatx compare a.json b.json --iters 5 --oph-iters 1

``solve`` exits 0 only when the final plan passes the independent validator
(feasibility, every order served once, every LSP at or above its baseline).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from gatx import __version__, bench, gat, oph
from gatx.jsonio import SCHEMA_VERSION, dump, load_instance, save_instance
from gatx.model import Instance, StructuralError, lsp_profits, total_distance
from gatx.pdptw import DEFAULT_PAIR_TIME_LIMIT, initial_solution
from gatx.validate import validate_solution

EXIT_INVALID = 1
EXIT_USAGE = 2
INITIAL_TIME_LIMIT = 30.0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def build_instance(args) -> Instance:
    if args.toy:
        return bench.toy_instance()
    if args.mock is not None:
        return bench.generate_mock_small(args.mock)
    if args.merge is not None:
        if not 0 <= args.merge < len(bench.MERGE_CONFIGS):
            raise ValueError(f"--merge takes 0..{len(bench.MERGE_CONFIGS) - 1}")
        return bench.offset_merge(bench.MERGE_CONFIGS[args.merge])
    doc = json.loads(Path(args.config).read_text())
    kind = doc.pop("kind", "merge")
    if kind == "merge":
        return bench.offset_merge(bench.MergeSpec.from_dict(doc))
    if kind == "mock":
        return bench.generate_mock_small(**doc)
    if kind == "toy":
        return bench.toy_instance()
    raise ValueError(f"unknown config kind {kind!r}")


def run_algorithm(instance: Instance, algo: str, iters: int, seed: int, pair_time_limit: float,
                  threads: int, initial=None, diagnostics=None):
    if initial is None:
        initial = initial_solution(instance, INITIAL_TIME_LIMIT, seed)
    if algo == "gat":
        cfg = gat.GatConfig(iters, pair_time_limit, seed, threads, INITIAL_TIME_LIMIT)
        return gat.run(instance, cfg, initial, diagnostics)
    cfg = oph.OphConfig(iters, seed, INITIAL_TIME_LIMIT)
    return oph.run(instance, cfg, initial, diagnostics)


def make_report(instance: Instance, algo: str, result, settings: dict) -> dict:
    final = result.final
    errors = validate_solution(instance, final)
    profits = lsp_profits(final, instance)
    return {
        "schema_version": SCHEMA_VERSION,
        "instance": instance.name,
        "algo": algo,
        "settings": settings,
        "valid": not errors,
        "errors": errors,
        "welfare": result.history[-1].welfare,
        "lsps": [
            {"id": k, "init": init, "final": p}
            for k, (init, p) in enumerate(zip(final.baseline, profits))
        ],
        "total_profit": {"init": sum(final.baseline), "final": sum(profits)},
        "distance": {"init": final.baseline_distance, "final": total_distance(final, instance)},
        "iterations": len(result.history) - 1,
        "history": [
            {
                "iteration": h.iteration,
                "welfare": h.welfare,
                "total_profit": h.total_profit,
                "lsp_profits": list(h.lsp_profits),
                "actions": h.actions,
                "selected": h.selected,
                "detail": h.detail,
            }
            for h in result.history
        ],
        "schedules": [list(s.stops) for s in final.schedules],
        "timing": {"init_seconds": result.init_seconds, "seconds": result.seconds},
    }


def _fmt_welfare(w: Optional[float]) -> str:
    return "n/a" if w is None else f"{w:.2f}%"


def cmd_generate(args) -> int:
    inst = build_instance(args)
    save_instance(inst, args.out)
    print(f"{inst.name}: {len(inst.orders)} orders, {len(inst.vehicles)} vehicles, "
          f"{len(inst.lsps)} LSPs -> {args.out}")
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    threads = args.threads or gat.default_threads()
    diag = open(args.diagnostics, "w") if args.diagnostics else None
    try:
        result = run_algorithm(inst, args.algo, args.iters, args.seed, args.pair_time_limit / 1000.0,
                               threads, diagnostics=diag)
    finally:
        if diag is not None:
            diag.close()
    settings = {"iters": args.iters, "seed": args.seed, "pair_time_limit_ms": args.pair_time_limit}
    report = make_report(inst, args.algo, result, settings)
    if args.out:
        dump(report, args.out)
    print(f"{args.algo} on {inst.name}: welfare {_fmt_welfare(report['welfare'])} after "
          f"{report['iterations']} iteration(s), {result.seconds:.2f}s")
    for err in report["errors"]:
        print(f"invalid: {err}", file=sys.stderr)
    return 0 if report["valid"] else EXIT_INVALID


def cmd_compare(args) -> int:
    threads = args.threads or gat.default_threads()
    header = ["instance", "OPH Soc. Welf.", "OPH Time(s)", "GAT Soc. Welf.", "GAT Time(s)"]
    rows, ok = [], True
    for path in args.instances:
        inst = load_instance(path)
        initial = initial_solution(inst, INITIAL_TIME_LIMIT, args.seed)
        row = [inst.name]
        for algo, iters in (("oph", args.oph_iters or args.iters), ("gat", args.iters)):
            res = run_algorithm(inst, algo, iters, args.seed, args.pair_time_limit / 1000.0, threads, initial)
            errors = validate_solution(inst, res.final)
            for err in errors:
                print(f"{algo} invalid on {inst.name}: {err}", file=sys.stderr)
            ok = ok and not errors
            row += [_fmt_welfare(res.history[-1].welfare), f"{res.seconds:.2f}"]
        rows.append(row)
    if args.format == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
    else:
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0 if ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gatx", description="Order exchange between logistics providers.")
    ap.add_argument("--version", action="version", version=f"gatx {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance JSON file")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--toy", action="store_true", help="two-LSP swap example")
    src.add_argument("--mock", type=int, metavar="SEED", help="6 LSPs x 10 vehicles, 40 orders")
    src.add_argument("--merge", type=int, metavar="K", help="bundled merge configuration K (0-9)")
    src.add_argument("--config", metavar="FILE", help="JSON config: MergeSpec fields, or kind=mock/toy")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def common(p):
        p.add_argument("--iters", type=_positive_int, default=5)
        p.add_argument("--pair-time-limit", type=_positive_float, default=DEFAULT_PAIR_TIME_LIMIT * 1000,
                       metavar="MS", help="time limit per pair solve, milliseconds")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=_positive_int, default=None,
                       help="worker processes for pair solves (default: $GATX_THREADS or 1)")
        p.add_argument("--out")

    s = sub.add_parser("solve", help="run one algorithm and write a report")
    s.add_argument("instance")
    s.add_argument("--algo", choices=("gat", "oph"), default="gat")
    common(s)
    s.add_argument("--diagnostics", metavar="FILE", help="per-iteration JSON lines")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="run both algorithms on the same baseline")
    c.add_argument("instances", nargs="+")
    common(c)
    c.add_argument("--oph-iters", type=_positive_int, default=None, help="OPH iterations (default: --iters)")
    c.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StructuralError, ValueError, FileNotFoundError) as exc:
        print(f"gatx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
