"""Command line: ``run`` one scenario, ``sweep`` a parameter, ``validate`` the engine."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import metrics, oracle
from .config import ConfigError, ScenarioConfig, coerce_value, parse_config, parse_overrides
from .engine import SimulationResult, run_simulation
from .metagraph import SCHEMES
from .traffic import TrafficError

TASK_COLUMNS = ("task_id", "src_row", "src_col", "dst_row", "dst_col", "gen_time_s", "scheme",
                "classification", "delay_s", "success", "t_trans_s", "t_prop_s", "t_comp_s",
                "t_wait_s")
SWEEP_COLUMNS = ("scheme", "param", "value", "seed", "wad_s", "success_rate")
SWEEP_PARAMS = ("load", "sat_gflops", "sgl_gbps", "subtask_gflo", "subtask_gb")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _num(x: float) -> str:
    return repr(float(x))


def task_rows(result: SimulationResult) -> list[list[str]]:
    """Per-task CSV rows; delay components come from the subtask that finishes last."""
    rows = []
    for r in result.records:
        t = r.task
        crit = r.critical
        comp = crit.components if crit is not None else None
        cls = ";".join(d.classification.value for d in r.decisions) or "none"
        rows.append([str(t.id), str(t.source_zone.row), str(t.source_zone.col),
                     str(t.dest_zone.row), str(t.dest_zone.col), _num(t.gen_time_s), r.scheme,
                     cls, _num(r.delay_s), "1" if r.success else "0",
                     _num(comp.transmission if comp else 0.0),
                     _num(comp.propagation if comp else 0.0),
                     _num(comp.computation if comp else 0.0),
                     _num(comp.waiting if comp else 0.0)])
    return rows


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def summary_line(result: SimulationResult) -> str:
    head = f"scheme={result.config['scheme']} seed={result.seed} tasks={result.num_tasks}"
    if not result.records:
        return head
    return (f"{head} wad_s={metrics.weighted_average_delay(result):.6f} "
            f"success_rate={metrics.success_rate(result):.6f}")


def _config(args) -> ScenarioConfig:
    overrides = parse_overrides(args.overrides)
    for flag in ("scheme", "seed", "eta"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = value
    if getattr(args, "literal_step16", False):
        overrides["literal_step16"] = True
    return parse_config(args.config, overrides)


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_run(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out)
    result = run_simulation(cfg)
    path = out / f"tasks_{cfg.scheme}_seed{cfg.seed}.csv"
    try:
        write_csv(path, TASK_COLUMNS, task_rows(result))
        line = summary_line(result)
        (out / f"summary_{cfg.scheme}_seed{cfg.seed}.txt").write_text(line + "\n", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write results to {out}: {exc}") from None
    print(line)
    return EXIT_OK


def _sweep_point(cfg: ScenarioConfig) -> tuple[str, str]:
    result = run_simulation(cfg)
    if not result.records:
        return "nan", "nan"
    return _num(metrics.weighted_average_delay(result)), _num(metrics.success_rate(result))


def _csv_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    base = _config(args)
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"{args.param}: unknown param (choose from {', '.join(SWEEP_PARAMS)})")
    values = [coerce_value(args.param, v) for v in _csv_list(args.values)]
    if not values:
        raise ConfigError("--values: empty list")
    seeds = [coerce_value("seed", s) for s in _csv_list(args.seeds)] if args.seeds else [base.seed]
    schemes = _csv_list(args.schemes)
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"scheme: unknown scheme {s!r}")
    # every point reuses the master seed so schemes and values see the same workload
    points = [(s, v, seed, base.replace(scheme=s, seed=seed, **{args.param: v}))
              for s in schemes for v in values for seed in seeds]
    out = _out_dir(args.out)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            stats = list(pool.map(_sweep_point, [p[3] for p in points]))
    else:
        stats = [_sweep_point(p[3]) for p in points]
    rows = [[s, args.param, str(v), str(seed), wad, rate]
            for (s, v, seed, _), (wad, rate) in zip(points, stats)]
    path = out / f"sweep_{args.param}.csv"
    try:
        write_csv(path, SWEEP_COLUMNS, rows)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None
    print(f"rows={len(rows)} out={path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    reports = oracle.validate(args.dominance_instances, args.path_instances, args.seed or 0)
    lines = [r.line() for r in reports]
    if args.out:
        out = _out_dir(args.out)
        (out / "validation.csv").write_text("instance_id,ok\n" + "\n".join(lines) + "\n",
                                            encoding="utf-8")
    if args.verbose:
        print("\n".join(lines))
    print(oracle.summary(reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leofusion",
                                description="LEO task-offloading simulator (fusion, ground, visible).")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_flags(sp):
        sp.add_argument("--config", help="key=value scenario file")
        sp.add_argument("--scheme", help="fusion, ground or visible")
        sp.add_argument("--seed", help="master seed")
        sp.add_argument("--eta", help="uniform, hotspots or file:PATH")
        sp.add_argument("--literal-step16", action="store_true",
                        help="carry the raw volume on computed-tier edges too")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("overrides", nargs="*", metavar="KEY=VALUE")

    run = sub.add_parser("run", help="simulate one scenario")
    scenario_flags(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="sweep one parameter over schemes and seeds")
    scenario_flags(sweep)
    sweep.add_argument("--param", required=True, help=", ".join(SWEEP_PARAMS))
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--seeds", help="comma-separated seeds (default: --seed)")
    sweep.add_argument("--schemes", default=",".join(SCHEMES))
    sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sweep.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate", help="run the oracle suites")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out", help="write validation.csv here")
    val.add_argument("--dominance-instances", type=int, default=200)
    val.add_argument("--path-instances", type=int, default=500)
    val.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TrafficError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
