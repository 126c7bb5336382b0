"""Command-line front end.

    droneroute solve INSTANCE [--variant tac|tac-plus] [--repeats 10] [--out report.csv]
    droneroute bench 'data/*.txt' --out bench.csv
    droneroute verify 7 50 --seed 9
    droneroute ablate 'inst/*.jsonl' --out ablation.csv
    droneroute gen uniform 20 --count 5 --out inst.jsonl

Reports are CSV (or an aligned text table with ``--format table``).  Whenever
``--out`` is given, figures and traces are written next to the report.
"""

from __future__ import annotations

import argparse
import glob
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import bench_io, oracles
from .bench_io import RunRecord
from .chromosome import dumps, has_adjacent_drones
from .ga import SolverConfig, run
from .instance import AssumptionProfile, Instance, worked_example
from .join import join_feasible
from .seeding import read_tour

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _config(args) -> SolverConfig:
    cfg = SolverConfig.load(args.config) if args.config else SolverConfig()
    kw = {}
    if args.variant == "tac-plus":
        kw["escape"] = True
    elif args.variant == "tac":
        kw["escape"] = False
    if args.no_escape:
        kw["escape"] = False
    if args.no_l_moves:
        kw["use_l_moves"] = False
    if args.time_limit is not None:
        kw["time_limit"] = args.time_limit
    return cfg.replace(**kw)


def _variant_name(cfg: SolverConfig) -> str:
    name = "tac-plus" if cfg.escape else "tac"
    return name if cfg.use_l_moves else name + "-noL"


def _expand(patterns: Sequence[str]) -> List[Path]:
    out: List[Path] = []
    for pat in patterns:
        hits = sorted(glob.glob(pat))
        if not hits and not glob.has_magic(pat):
            raise UsageError(f"no such file: {pat}")
        out.extend(Path(h) for h in hits)
    return out


def _load(paths: Sequence[Path], args) -> List[Instance]:
    insts: List[Instance] = []
    for p in paths:
        insts.extend(bench_io.load_instance(p, range_pct=args.range_pct))
    return insts


def _one(job: Tuple[Instance, SolverConfig, Optional[List[int]]]):
    inst, cfg, tour = job
    res = run(inst, cfg, tour)
    return res.cost, res.elapsed, res.iterations, res.genes, res.trace


def _run_all(insts: Sequence[Instance], cfg: SolverConfig, seed: int, repeats: int,
             jobs: int, tour: Optional[List[int]] = None) -> List[List[tuple]]:
    """Results per instance, repeat r using seed ``seed + r``."""
    work = [(inst, cfg.replace(seed=seed + r), tour) for inst in insts for r in range(repeats)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            flat = list(ex.map(_one, work))
    else:
        flat = [_one(w) for w in work]
    return [flat[i * repeats:(i + 1) * repeats] for i in range(len(insts))]


def _records(insts, results, variant, seed, baselines: Dict[str, float]) -> List[RunRecord]:
    recs = []
    for inst, runs in zip(insts, results):
        best = min(runs, key=lambda t: t[0])
        recs.append(RunRecord(inst.name, variant, [seed + r for r in range(len(runs))],
                              [t[0] for t in runs], [t[1] for t in runs], [t[2] for t in runs],
                              baselines.get(inst.name), best_genes=dumps(best[3])))
    return recs


def _read_baselines(path: Optional[str]) -> Dict[str, float]:
    if not path:
        return {}
    out = {}
    for line in Path(path).read_text().splitlines():
        parts = [p.strip() for p in line.split(",")]
        if len(parts) >= 2:
            try:
                out[parts[0]] = float(parts[1])
            except ValueError:
                continue  # header
    return out


def _emit(records: List[RunRecord], results, args) -> None:
    if not args.out:
        sys.stdout.write(bench_io.render_report(records, args.format))
        return
    from .plotting import convergence_plot

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    for rec, runs in zip(records, results):
        stem = out.with_name(f"{out.stem}_{_safe(rec.instance)}")
        traces = {f"seed {s}": t[4] for s, t in zip(rec.seeds, runs)}
        best = min(range(len(runs)), key=lambda i: runs[i][0])
        trace_path = stem.with_suffix(".trace.jsonl")
        bench_io.write_trace(runs[best][4], trace_path)
        rec.trace_path = str(trace_path)
        convergence_plot(traces, stem.with_suffix(".png"), title=rec.instance)
    bench_io.write_report(records, out, args.format)
    print(f"wrote {out}")


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    cfg = _config(args)
    insts = _load(_expand([args.instance]), args)
    tour = read_tour(args.tsp_tour, insts[0].n) if args.tsp_tour else None
    repeats = args.repeats or 10
    results = _run_all(insts, cfg, args.seed, repeats, args.jobs, tour)
    recs = _records(insts, results, _variant_name(cfg), args.seed, {})
    for inst, rec in zip(insts, recs):
        sol = join_feasible(inst, [int(x) for x in rec.best_genes.split(",")])
        print(f"instance {inst.name}: best {rec.best:.4f} mean {rec.mean:.4f}")
        print(f"chromosome {rec.best_genes}")
        print("operations " + " ".join(map(str, sol.operations)))
    _emit(recs, results, args)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config(args)
    insts = _load(_expand(args.instances), args)
    results = _run_all(insts, cfg, args.seed, args.repeats or 10, args.jobs)
    recs = _records(insts, results, _variant_name(cfg), args.seed, _read_baselines(args.baseline))
    _emit(recs, results, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    if not 1 <= args.n <= 8:
        raise UsageError("verify needs 1 <= n <= 8")
    cfg = _config(args)
    rng = random.Random(args.seed)
    hits = runs = mismatches = 0
    worst = 0.0
    t0 = time.perf_counter()
    for k in range(args.count):
        inst = bench_io.generate_instance("uniform", args.n, alpha=2.0, seed=args.seed * 100_003 + k)
        opt = oracles.exhaustive_tspd(inst).optimum
        for res in _run_all([inst], cfg, args.seed, args.repeats or 1, args.jobs)[0]:
            runs += 1
            g = (res[0] - opt) / opt
            worst = max(worst, g)
            hits += g <= 1e-9
            if g < -1e-9:
                print(f"instance {k}: solver {res[0]} beats the exhaustive optimum {opt}")
                mismatches += 1
        for _ in range(args.chromosomes):
            perm = list(range(1, args.n + 1))
            rng.shuffle(perm)
            genes = [-c if rng.random() < 0.4 else c for c in perm]
            if has_adjacent_drones(genes):
                continue
            a = join_feasible(inst, genes).completion_time
            b = oracles.enumerate_rendezvous(inst, genes).optimum
            if not (a == b or abs(a - b) <= 1e-9 * max(1.0, abs(b))):
                print(f"instance {k}: join {a} != enumeration {b} for {dumps(genes)}")
                mismatches += 1
    rate = hits / runs if runs else 1.0
    print(f"optimality hits {hits}/{runs} ({100 * rate:.1f}%), max gap {100 * worst:.3f}%, "
          f"join-vs-oracle mismatches {mismatches}, {time.perf_counter() - t0:.1f}s")
    ok = mismatches == 0 and rate >= args.min_hit_rate
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ablate(args) -> int:
    cfg = _config(args)
    insts = _load(_expand(args.instances), args)
    reps = args.repeats or 10
    with_l = _run_all(insts, cfg.replace(use_l_moves=True), args.seed, reps, args.jobs)
    without = _run_all(insts, cfg.replace(use_l_moves=False), args.seed, reps, args.jobs)
    rows = []
    for inst, a, b in zip(insts, with_l, without):
        ma = sum(t[0] for t in a) / len(a)
        mb = sum(t[0] for t in b) / len(b)
        rows.append((inst.name, ma, mb, bench_io.gap(mb, ma)))
    lines = ["instance,with_l,without_l,improvement"]
    lines += [f"{n},{a:.2f},{b:.2f},{g:+.2f}" for n, a, b, g in rows]
    if rows:
        ma = sum(r[1] for r in rows) / len(rows)
        mb = sum(r[2] for r in rows) / len(rows)
        lines.append(f"AVERAGE,{ma:.2f},{mb:.2f},{bench_io.gap(mb, ma):+.2f}")
    text = "\n".join(lines) + "\n"
    if not args.out:
        sys.stdout.write(text)
        return EXIT_OK
    from .plotting import ablation_plot

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    ablation_plot([r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows],
                  out.with_suffix(".png"))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "example":
        insts = [worked_example()]
    else:
        prof = AssumptionProfile.fstsp(args.endurance) if args.fstsp else AssumptionProfile.tspd(args.endurance)
        insts = [bench_io.generate_instance(args.kind, args.n, args.alpha, args.seed + k, prof,
                                            args.eligible_frac) for k in range(args.count)]
    if args.out:
        bench_io.write_instances(insts, args.out)
        print(f"wrote {len(insts)} instance(s) to {args.out}")
    else:
        for inst in insts:
            print(json.dumps(bench_io.instance_to_dict(inst)))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="base seed; repeat r uses seed + r")
    shared.add_argument("--repeats", type=int, default=None,
                        help="runs per instance (default 10, verify 1)")
    shared.add_argument("--variant", choices=("tac", "tac-plus"), default="tac")
    shared.add_argument("--config", help="JSON file with solver parameters")
    shared.add_argument("--out", help="report path; figures and traces go next to it")
    shared.add_argument("--format", choices=("csv", "table"), default="csv")
    shared.add_argument("--no-l-moves", action="store_true", help="classic moves only")
    shared.add_argument("--no-escape", action="store_true", help="disable the escape step")
    shared.add_argument("--tsp-tour", help="seed tour, one customer id per line")
    shared.add_argument("--time-limit", type=float, help="soft wall time per run in seconds")
    shared.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    shared.add_argument("--range-pct", type=float, default=None,
                        help="drone range as a percentage of the largest distance (Agatz files)")

    p = argparse.ArgumentParser(prog="droneroute", description="TSPD / FSTSP solver")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[shared], help="solve one instance file")
    s.add_argument("instance")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", parents=[shared], help="run a sweep over instance files")
    b.add_argument("instances", nargs="*", help="files or glob patterns")
    b.add_argument("--baseline", help="CSV of instance,reference value for the gap column")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", parents=[shared], help="check against the exact oracles")
    v.add_argument("n", type=int)
    v.add_argument("count", type=int)
    v.add_argument("--chromosomes", type=int, default=10,
                   help="random chromosomes per instance for the decoder check")
    v.add_argument("--min-hit-rate", type=float, default=0.95)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("ablate", parents=[shared], help="compare runs with and without L1-L7")
    a.add_argument("instances", nargs="*")
    a.set_defaults(func=cmd_ablate)

    g = sub.add_parser("gen", help="write random instances")
    g.add_argument("kind", choices=bench_io.KINDS + ("example",))
    g.add_argument("n", type=int, nargs="?", default=10)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fstsp", action="store_true", help="FSTSP profile with unit launch and retrieval")
    g.add_argument("--endurance", type=float, default=float("inf"))
    g.add_argument("--eligible-frac", type=float, default=1.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def _validate(args, parser) -> None:
    if getattr(args, "variant", None) == "tac-plus" and args.no_escape:
        parser.error("--variant tac-plus contradicts --no-escape")
    for name in ("repeats", "jobs", "count"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            parser.error(f"--{name} must be positive")
    if getattr(args, "time_limit", None) is not None and args.time_limit <= 0:
        parser.error("--time-limit must be positive")
    if getattr(args, "config", None) and not Path(args.config).is_file():
        parser.error(f"config file not found: {args.config}")
    if getattr(args, "tsp_tour", None) and not Path(args.tsp_tour).is_file():
        parser.error(f"tour file not found: {args.tsp_tour}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    try:
        return args.func(args)
    except (UsageError, bench_io.ParseError, ValueError) as exc:
        print(f"droneroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
