"""Command line for feasible-space QAP search.

Exit status is 0 on success, 1 when the solver fails and 2 for usage
errors. Every flag can also be given in a ``key = value`` config file
passed with ``--config``; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import MissingBestKnown, QAPError
from .gradient import APPROXIMATE, EXACT
from .heuristics import Heuristic, HeuristicConfig
from .instance_io import Instance, best_known, fetch_instances, load_instance, read_config
from .qubo_baseline import run_qubo_tabu_single_flip, run_random_feasible
from .qubo_model import build_penalty_qubo
from .search import PHASES, SearchConfig, relgap, run_search, run_trials

GRADIENTS = {"approx": APPROXIMATE, "approximate": APPROXIMATE, "exact": EXACT}


@dataclass
class RunRecord:
    instance: str
    n: int
    heuristic: str
    gradient_mode: str
    trial: int
    seed: int
    iterations: int
    best_objective: float
    best_known: float
    relgap: float
    wall_time_ms: float
    gradient_ms: float = 0.0
    neighbourhood_update_ms: float = 0.0
    selection_ms: float = 0.0
    other_ms: float = 0.0
    error: str = ""

    @classmethod
    def from_row(cls, row: dict) -> "RunRecord":
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            kw[f.name] = raw if f.type == "str" else (int(raw) if f.type == "int" else float(raw))
        return cls(**kw)

    def __eq__(self, other):
        if not isinstance(other, RunRecord):
            return NotImplemented
        a, b = dataclasses.astuple(self), dataclasses.astuple(other)
        return all(x == y or (isinstance(x, float) and math.isnan(x) and math.isnan(y))
                   for x, y in zip(a, b))


FIELDS = [f.name for f in fields(RunRecord)]


def emit_csv(records, stream) -> None:
    w = csv.DictWriter(stream, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: repr(float(v)) if isinstance(v, float) else v
                    for k, v in dataclasses.asdict(r).items()})


def parse_csv(stream) -> list[RunRecord]:
    return [RunRecord.from_row(row) for row in csv.DictReader(stream)]


def emit_json(records, stream, summary: dict | None = None) -> None:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v
    payload = {"records": [{k: clean(v) for k, v in dataclasses.asdict(r).items()}
                           for r in records]}
    if summary is not None:
        payload["summary"] = summary
    json.dump(payload, stream, indent=2)
    stream.write("\n")


# ---------------------------------------------------------------- helpers

def _best_known_or_nan(inst: Instance, source: str) -> float:
    try:
        return best_known(inst.name, Path(source).parent if Path(source).exists() else None)
    except MissingBestKnown:
        return math.nan


def _records(inst: Instance, cfg: SearchConfig, results, f_star: float) -> list[RunRecord]:
    out = []
    for t, r in enumerate(results):
        ms = {p: 1000.0 * r.timing_breakdown[p] for p in PHASES}
        out.append(RunRecord(
            inst.name, inst.n, cfg.heuristic.kind.value, cfg.gradient_mode, t, r.seed,
            r.iterations, r.f_best, f_star,
            relgap(r.f_best, f_star) if not math.isnan(f_star) else math.nan,
            1000.0 * r.wall_time, ms["gradient"], ms["neighbourhood_update"],
            ms["selection"], ms["other"]))
    return out


def _search_config(args, heuristic: str | None = None, mode: str | None = None,
                   f_star: float = math.nan) -> SearchConfig:
    target = f_star if args.stop_at_best and not math.isnan(f_star) else None
    return SearchConfig(
        i_max=args.iters,
        gradient_mode=GRADIENTS[mode or args.gradient],
        heuristic=HeuristicConfig(Heuristic(heuristic or args.heuristic), p=args.p,
                                  pool_size=args.pool_size, tabu_length=args.tabu_length),
        start=args.start, trials=args.trials, seed=args.seed, target=target,
        trace=bool(getattr(args, "trace", None)), workers=args.workers)


def _open_out(args):
    if args.out in (None, "-"):
        return sys.stdout, False
    return open(args.out, "w", newline=""), True


def _write(args, records, summary=None) -> None:
    stream, close = _open_out(args)
    try:
        if args.format == "json":
            emit_json(records, stream, summary)
        else:
            emit_csv(records, stream)
    finally:
        if close:
            stream.close()


def _summary(records) -> dict:
    cells: dict[str, float] = {}
    for r in records:
        if r.error:
            continue
        key = f"{r.instance}/{r.heuristic}/{r.gradient_mode}"
        cells[key] = min(cells.get(key, math.inf), r.relgap)
    return {k: (None if math.isnan(v) else v) for k, v in cells.items()}


def _print_summary(summary: dict) -> None:
    for key, gap in summary.items():
        shown = "n/a" if gap is None else f"{100 * gap:.4f}%"
        print(f"relgap_min {key}: {shown}", file=sys.stderr)


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    f_star = _best_known_or_nan(inst, args.instance)
    cfg = _search_config(args, f_star=f_star)
    _, results = run_trials(inst, cfg, f_star=f_star if not math.isnan(f_star) else 1.0)
    records = _records(inst, cfg, results, f_star)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", "iteration", "objective", "accepted_row", "z1", "z2"])
            for t, r in enumerate(results):
                for row in r.trace:
                    w.writerow([t, *row])
    summary = _summary(records)
    _write(args, records, summary)
    _print_summary(summary)
    return 0


def _expand(items) -> list[str]:
    out = []
    for item in items:
        p = Path(item)
        out.extend(sorted(str(f) for f in p.glob("*.dat")) if p.is_dir() else [item])
    return out


def cmd_bench(args) -> int:
    heuristics = args.heuristics or [h.value for h in Heuristic]
    modes = args.gradients or ["approx", "exact"]
    records = []
    for source in _expand(args.instances):
        try:
            inst = load_instance(source)
        except (QAPError, OSError) as exc:
            records.append(RunRecord(Path(source).stem, 0, "", "", 0, args.seed, 0, math.nan,
                                     math.nan, math.nan, 0.0, error=str(exc)))
            continue
        f_star = _best_known_or_nan(inst, source)
        for h in heuristics:
            for m in modes:
                cfg = _search_config(args, h, m, f_star)
                try:
                    _, results = run_trials(inst, cfg, f_star=f_star if not math.isnan(f_star) else 1.0)
                    records.extend(_records(inst, cfg, results, f_star))
                except (QAPError, ArithmeticError, ValueError) as exc:
                    records.append(RunRecord(inst.name, inst.n, h, GRADIENTS[m], 0, args.seed, 0,
                                             math.nan, f_star, math.nan, 0.0, error=str(exc)))
    summary = _summary(records)
    _write(args, records, summary)
    _print_summary(summary)
    return 0


def profile_fractions(timing: dict[str, float]) -> dict[str, float]:
    total = sum(timing[p] for p in PHASES)
    return {p: (timing[p] / total if total > 0 else 0.0) for p in PHASES}


def cmd_profile(args) -> int:
    inst = load_instance(args.instance)
    cfg = dataclasses.replace(_search_config(args), trials=1)
    r = run_search(inst, cfg)
    frac = profile_fractions(r.timing_breakdown)
    report = {"instance": inst.name, "n": inst.n, "gradient_mode": cfg.gradient_mode,
              "iterations": r.iterations, "wall_time_s": r.wall_time,
              "seconds": r.timing_breakdown, "fractions": frac}
    stream, close = _open_out(args)
    try:
        if args.format == "json":
            json.dump(report, stream, indent=2)
            stream.write("\n")
        else:
            w = csv.writer(stream, lineterminator="\n")
            w.writerow(["instance", "n", "gradient_mode", "phase", "seconds", "fraction"])
            for p in PHASES:
                w.writerow([inst.name, inst.n, cfg.gradient_mode, p,
                            repr(float(r.timing_breakdown[p])), repr(float(frac[p]))])
    finally:
        if close:
            stream.close()
    return 0


def compare_baseline(inst: Instance, iters: int, seed: int, alpha: float,
                     f_star: float, gradient: str = EXACT) -> tuple[list[tuple], dict]:
    """Per-iteration best gaps of native tabu, QUBO tabu and random sampling."""
    native = run_search(inst, SearchConfig(
        i_max=iters, gradient_mode=gradient, heuristic=HeuristicConfig(Heuristic.Tabu),
        start="random", seed=seed, trace=True), seed=seed)
    qubo = run_qubo_tabu_single_flip(build_penalty_qubo(inst, alpha), iters, seed)
    rand = run_random_feasible(inst, iters, seed)

    native_obj = np.array([row[1] for row in native.trace], dtype=float)
    curves = {
        "native_tabu": (np.minimum.accumulate(native_obj) if iters else native_obj,
                        np.ones(len(native_obj), dtype=bool)),
        "qubo_tabu": (qubo.best_feasible_curve()[1:], np.array(qubo.feasible[1:], dtype=bool)),
        "random_feasible": (rand.best_feasible_curve(), np.array(rand.feasible, dtype=bool)),
    }
    rows = []
    for label, (curve, feas) in curves.items():
        for i, (v, ok) in enumerate(zip(curve, feas), start=1):
            rows.append((label, i, relgap(float(v), f_star) if not math.isnan(v) else math.nan, int(ok)))
    stats = {label: {"feasible_visits": int(feas.sum()),
                     "final_gap": (relgap(float(curve[-1]), f_star) if len(curve) and not math.isnan(curve[-1])
                                   else None)}
             for label, (curve, feas) in curves.items()}
    return rows, stats


def cmd_compare_baseline(args) -> int:
    inst = load_instance(args.instance)
    f_star = best_known(inst.name, Path(args.instance).parent if Path(args.instance).exists() else None)
    rows, stats = compare_baseline(inst, args.iters, args.seed, args.alpha, f_star,
                                   GRADIENTS[args.gradient])
    stream, close = _open_out(args)
    try:
        if args.format == "json":
            json.dump({"instance": inst.name, "iterations": args.iters, "solvers": stats}, stream,
                      indent=2)
            stream.write("\n")
        else:
            w = csv.writer(stream, lineterminator="\n")
            w.writerow(["solver", "iteration", "best_gap", "feasible"])
            for label, i, gap, ok in rows:
                w.writerow([label, i, "" if math.isnan(gap) else repr(float(gap)), ok])
    finally:
        if close:
            stream.close()
    for label, s in stats.items():
        print(f"{label}: feasible visits {s['feasible_visits']}, final gap {s['final_gap']}",
              file=sys.stderr)
    return 0


def cmd_fetch(args) -> int:
    manifest = fetch_instances(args.names, args.dest, mirror=args.mirror)
    for name, entry in manifest.items():
        print(name, entry["dat"], entry["sln"] or "-")
    return 0


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, iters: int) -> None:
    p.add_argument("--heuristic", choices=[h.value for h in Heuristic], default="top10")
    p.add_argument("--gradient", choices=["approx", "exact"], default="approx")
    p.add_argument("--iters", type=int, default=iters)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", choices=["identity", "random"], default="random")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--p", type=float, default=0.95, help="WalkQAP top-pool probability")
    p.add_argument("--pool-size", type=int, default=10)
    p.add_argument("--tabu-length", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stop-at-best", action="store_true",
                   help="end a trial once it reaches the best-known value")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--config", default=None, help="key = value file with flag defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qapfn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run trials on one instance")
    p.add_argument("instance")
    _common(p, 100_000)
    p.add_argument("--trace", default=None, metavar="FILE", help="write per-iteration CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="heuristic x gradient sweep")
    p.add_argument("instances", nargs="*")
    _common(p, 100_000)
    p.add_argument("--heuristics", nargs="+", choices=[h.value for h in Heuristic])
    p.add_argument("--gradients", nargs="+", choices=["approx", "exact"])
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="phase timing breakdown")
    p.add_argument("instance")
    _common(p, 10_000)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare-baseline", help="native tabu vs QUBO tabu vs random")
    p.add_argument("instance")
    _common(p, 1000)
    p.set_defaults(func=cmd_compare_baseline, gradient="exact")

    p = sub.add_parser("fetch", help="download QAPLIB files")
    p.add_argument("names", nargs="*")
    p.add_argument("--dest", default=".")
    p.add_argument("--mirror", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_fetch)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        if key not in known:
            parser.error(f"unknown config key {key!r}")
        action = known[key]
        if action.type is not None:
            value = action.type(value)
        elif isinstance(action, argparse._StoreTrueAction):
            value = value.strip().lower() in ("1", "true", "yes", "on")
        if action.choices is not None and value not in action.choices:
            parser.error(f"config {key}: invalid choice {value!r}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    for name in ("iters", "trials"):
        if getattr(args, name, 1) < (0 if name == "iters" else 1):
            parser.error(f"--{name} out of range")
    try:
        return args.func(args)
    except (QAPError, OSError) as exc:
        print(f"qapfn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
