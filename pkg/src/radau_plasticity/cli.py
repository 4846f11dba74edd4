"""Batch front-end: scenario x method x dt matrices, reference cache, CSV output.

Usage::

    radau-plasticity run --scenario case_II --methods RIIa-q-SP --stages 2 --out results
    radau-plasticity run --config study.json --dts 0.5,0.25,0.125
    radau-plasticity list

The configuration file is JSON; flags override its entries.  Recognised keys:
``scenario`` (name or list), ``methods``, ``stages``, ``dts``, ``eval_times``,
``ref_dt``, ``out``, ``cache_dir``, ``repeats`` and ``scenarios`` (a list of
custom scenario definitions in the :meth:`Scenario.to_dict` layout).

Exit codes: 0 success, 1 run failure, 2 usage error.  ``RADAU_PLASTICITY_WORKERS``
caps the number of worker processes (default 1, so wall times stay comparable).
"""

import argparse
import datetime
import json
import os
import platform
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import __version__
from .convergence_lab import _atomic_write, convergence_study, write_report_csv, write_summary_csv
from .scenarios import Scenario, ScenarioError, builtin_scenarios, default_cache_dir, reference_solution
from .stage_solver import METHOD_LABELS

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
WORKERS_ENV = "RADAU_PLASTICITY_WORKERS"


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    scenarios: List[str]
    methods: List[str]
    stages: int = 2
    dts: Optional[Tuple[float, ...]] = None
    eval_times: Optional[Tuple[float, ...]] = None
    ref_dt: Optional[float] = None
    out: str = "results"
    cache_dir: Optional[str] = None
    repeats: int = 3
    custom: List[dict] = field(default_factory=list)
    deterministic: bool = True

    def validate(self, known):
        if not self.scenarios:
            raise UsageError("no scenario given; valid: " + ", ".join(sorted(known)))
        for name in self.scenarios:
            if name not in known:
                raise UsageError(f"unknown scenario {name!r}; valid: {', '.join(sorted(known))}")
        if not self.methods:
            raise UsageError("empty method list; valid: " + ", ".join(METHOD_LABELS))
        for m in self.methods:
            if m not in METHOD_LABELS:
                raise UsageError(f"unknown method {m!r}; valid: {', '.join(METHOD_LABELS)}")
        if self.stages not in (1, 2, 3):
            raise UsageError("stages must be 1, 2 or 3")
        if self.repeats < 1:
            raise UsageError("repeats must be at least 1")
        for label, values in (("dts", self.dts), ("eval-times", self.eval_times)):
            if values is not None and (not values or any(v <= 0 for v in values)):
                raise UsageError(f"{label} must be a nonempty list of positive numbers")
        if self.ref_dt is not None and self.ref_dt <= 0:
            raise UsageError("ref-dt must be positive")

    def to_dict(self):
        return {
            "scenarios": list(self.scenarios), "methods": list(self.methods), "stages": self.stages,
            "dts": None if self.dts is None else list(self.dts),
            "eval_times": None if self.eval_times is None else list(self.eval_times),
            "ref_dt": self.ref_dt, "out": self.out, "cache_dir": self.cache_dir, "repeats": self.repeats,
            "custom": list(self.custom), "deterministic": self.deterministic,
        }


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="radau-plasticity", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run convergence studies and write CSV reports")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--scenario", type=_names, help="scenario name(s), comma separated")
    p.add_argument("--methods", type=_names, help="method labels, comma separated")
    p.add_argument("--stages", type=int, help="Radau IIa stage count (BE always uses 1)")
    p.add_argument("--dts", type=_floats, help="dt ladder, comma separated")
    p.add_argument("--eval-times", type=_floats, help="evaluation times, comma separated")
    p.add_argument("--ref-dt", type=float, help="reference (overkill) time step")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache-dir", help="reference cache directory")
    p.add_argument("--repeats", type=int, help="timing repetitions per run (median is reported)")
    sub.add_parser("list", help="list built-in scenarios and method labels")
    return parser


def load_config(args):
    """Merge the optional JSON file with flag overrides."""
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    scen = data.get("scenario", [])
    scen = [scen] if isinstance(scen, str) else list(scen)
    methods = data.get("methods", [])
    methods = [methods] if isinstance(methods, str) else list(methods)
    cfg = RunConfig(
        scenarios=args.scenario if args.scenario is not None else scen,
        methods=args.methods if args.methods is not None else methods,
        stages=args.stages if args.stages is not None else int(data.get("stages", 2)),
        dts=args.dts if args.dts is not None else (tuple(data["dts"]) if data.get("dts") else None),
        eval_times=args.eval_times if args.eval_times is not None else (
            tuple(data["eval_times"]) if data.get("eval_times") else None),
        ref_dt=args.ref_dt if args.ref_dt is not None else data.get("ref_dt"),
        out=args.out if args.out is not None else data.get("out", "results"),
        cache_dir=args.cache_dir if args.cache_dir is not None else data.get("cache_dir"),
        repeats=args.repeats if args.repeats is not None else int(data.get("repeats", 3)),
        custom=list(data.get("scenarios", [])),
    )
    return cfg


def known_scenarios(custom=()):
    table = {s.name: s for s in builtin_scenarios()}
    for d in custom:
        try:
            s = Scenario.from_dict(d)
        except (ScenarioError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid custom scenario: {exc}") from exc
        table[s.name] = s
    return table


def _worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}")


def _study(task):
    scenario, method, stages, dts, eval_times, reference, repeats = task
    return convergence_study(scenario, method, stages=stages, dts=dts, eval_times=eval_times, reference=reference,
                             repeats=repeats)


def _report_name(report):
    stages = "" if report.method == "BE" else f"_s{report.stages}"
    return f"{report.method}{stages}_{report.quantity}_t{report.eval_time:g}.csv"


def execute(cfg, log=print):
    """Run the matrix in ``cfg``; returns the list of reports.  Raises on failure."""
    table = known_scenarios(cfg.custom)
    cfg.validate(table)
    max_workers = _worker_count()
    cache_dir = cfg.cache_dir or default_cache_dir()
    tasks, keys = [], {}
    for name in cfg.scenarios:
        scenario = table[name]
        if cfg.ref_dt is not None:
            scenario = scenario.replace(ref_dt=cfg.ref_dt)
        dts = cfg.dts or scenario.dts
        eval_times = cfg.eval_times or scenario.eval_times
        for dt in dts:
            scenario.check_times(dt, eval_times)
        scenario.check_times(scenario.ref_dt, eval_times)
        log(f"[{name}] reference dt={scenario.ref_dt:g}")
        reference, keys[name] = reference_solution(scenario, cache_dir=cache_dir, eval_times=eval_times)
        for method in cfg.methods:
            tasks.append((scenario, method, cfg.stages, dts, eval_times, reference, cfg.repeats))
    workers = min(max_workers, len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_study, tasks))
    else:
        results = [_study(t) for t in tasks]
    reports = [r for batch in results for r in batch]
    for rep in reports:
        write_report_csv(os.path.join(cfg.out, rep.scenario, _report_name(rep)), rep)
        log(f"[{rep.scenario}] {rep.method} s={rep.stages} {rep.quantity} t={rep.eval_time:g}: order {rep.order:.3f}")
    write_summary_csv(os.path.join(cfg.out, "summary.csv"), reports)
    manifest = {
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "config": cfg.to_dict(),
        "reference_cache_keys": keys,
        "cache_dir": os.path.abspath(cache_dir),
        "wall_times": [
            {"scenario": r.scenario, "method": r.method, "stages": r.stages, "eval_time": r.eval_time,
             "dts": [d for d, _ in r.rows], "seconds": r.wall_times}
            for r in reports
        ],
    }
    _atomic_write(os.path.join(cfg.out, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return reports


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command == "list":
        for s in builtin_scenarios():
            print(f"{s.name:14s} {s.kind:15s} eval_times={','.join('%g' % t for t in s.eval_times)}")
        print("methods: " + ", ".join(METHOD_LABELS))
        return EXIT_OK
    try:
        cfg = load_config(args)
        cfg.validate(known_scenarios(cfg.custom))
        _worker_count()
    except (UsageError, ScenarioError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        execute(cfg)
    except (UsageError, ScenarioError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # any failing run turns into exit status 1
        traceback.print_exc()
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
