"""Relative global error, convergence-order regression and speed-up tables."""

import csv
import io
import os
import statistics
import tempfile
import warnings
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import tensor_algebra as ta
from .scenarios import reference_solution, run
from .stage_solver import IntegratorConfig

PLATEAU = 1e-12


class InsufficientDataError(ValueError):
    pass


def _norms(X):
    X = np.asarray(X, dtype=float)
    if X.shape[-1] == 6:
        return ta.norm(X)
    return np.sqrt(np.sum(X * X, axis=-1))


def relative_error(run_snapshot, reference_snapshot, quantity="S"):
    """Gauss-point average of ``|X - X_ref| / |X_ref|`` over plastic points.

    A point counts as plastic when its reference ``alpha > 0``.  Points whose
    reference norm vanishes are dropped with a warning.
    """
    X = run_snapshot.field(quantity)
    Xr = reference_snapshot.field(quantity)
    mask = np.asarray(reference_snapshot.alpha) > 0.0
    if not np.any(mask):
        return 0.0
    ref_norm = _norms(Xr[mask])
    diff = _norms(X[mask] - Xr[mask])
    ok = ref_norm > 0.0
    if not np.all(ok):
        warnings.warn(f"{int((~ok).sum())} plastic points with zero reference {quantity} excluded")
    if not np.any(ok):
        return 0.0
    return float(np.mean(diff[ok] / ref_norm[ok]))


def fit_order(rows, plateau=PLATEAU):
    """Least-squares slope of log10(error) against log10(dt).

    ``rows`` are ``(dt, error)`` pairs; rows with ``error < plateau`` are
    excluded.  Returns ``(order, n_excluded)``.
    """
    rows = [(float(d), float(e)) for d, e in rows]
    usable = [(d, e) for d, e in rows if e >= plateau and d > 0]
    if len(usable) < 3:
        raise InsufficientDataError(f"need at least 3 rows above {plateau:g}, got {len(usable)}")
    x = np.log10([d for d, _ in usable])
    y = np.log10([e for _, e in usable])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope), len(rows) - len(usable)


@dataclass
class ConvergenceReport:
    scenario: str
    method: str
    stages: int
    quantity: str
    eval_time: float
    rows: List[Tuple[float, float]]
    wall_times: List[float] = field(default_factory=list)
    order: float = float("nan")
    n_excluded: int = 0

    def __post_init__(self):
        if any(e < 0 for _, e in self.rows):
            raise ValueError("errors must be nonnegative")
        try:
            self.order, self.n_excluded = fit_order(self.rows)
        except InsufficientDataError:
            self.order, self.n_excluded = float("nan"), len(self.rows)

    @property
    def errors(self):
        return np.array([e for _, e in self.rows])

    def is_strictly_monotone(self):
        """Errors strictly decrease with decreasing dt."""
        rows = sorted(self.rows, reverse=True)
        return all(b[1] < a[1] for a, b in zip(rows, rows[1:]))


def _timed_run(scenario, config, dt, eval_times, repeats):
    results = [run(scenario, config, dt, eval_times) for _ in range(repeats)]
    return results[0], statistics.median(r.wall_time for r in results)


def convergence_study(scenario, method, stages=2, dts=None, eval_times=None, quantity=None, reference=None,
                      cache_dir=None, repeats=1, config_overrides=None):
    """Run one method over a dt ladder; one report per evaluation time."""
    dts = scenario.dts if dts is None else tuple(dts)
    eval_times = scenario.eval_times if eval_times is None else tuple(eval_times)
    quantity = scenario.quantity if quantity is None else quantity
    if reference is None:
        reference, _ = reference_solution(scenario, cache_dir=cache_dir, eval_times=eval_times)
    config = IntegratorConfig.from_label(method, stages=stages, **(config_overrides or {}))
    errors = {t: [] for t in eval_times}
    walls = []
    for dt in dts:
        result, wall = _timed_run(scenario, config, dt, eval_times, repeats)
        walls.append(wall)
        for t in eval_times:
            errors[t].append((dt, relative_error(result.snapshots[t], reference[t], quantity)))
    return [
        ConvergenceReport(scenario.name, method, config.stages, quantity, t, errors[t], list(walls))
        for t in eval_times
    ]


def interpolate_time_at(report, tolerance):
    """Wall time at which the method reaches ``tolerance``, log-log interpolated; ``None`` if unreachable."""
    pts = sorted(
        [(e, w) for (_, e), w in zip(report.rows, report.wall_times) if e > 0 and w > 0],
        key=lambda p: p[0],
    )
    if not pts or tolerance < pts[0][0]:
        return None
    if tolerance >= pts[-1][0]:
        return pts[-1][1]
    le = np.log([p[0] for p in pts])
    lw = np.log([p[1] for p in pts])
    i = np.searchsorted(le, np.log(tolerance))
    w = (np.log(tolerance) - le[i - 1]) / (le[i] - le[i - 1])
    return float(np.exp(lw[i - 1] + w * (lw[i] - lw[i - 1])))


def speedup(reports, tolerances, baseline="BE"):
    """``time(baseline) / time(method)`` at each error tolerance.

    ``reports`` maps method label to a :class:`ConvergenceReport` (same
    scenario, quantity and evaluation time).  Unreachable entries are ``None``.
    """
    if baseline not in reports:
        raise ValueError(f"baseline method {baseline!r} missing from reports")
    table = {}
    for tol in tolerances:
        t_base = interpolate_time_at(reports[baseline], tol)
        row = {}
        for method, rep in reports.items():
            t = interpolate_time_at(rep, tol)
            row[method] = None if (t is None or t_base is None) else t_base / t
        table[tol] = row
    return table


# ---------------------------------------------------------------------------
# CSV output

SUMMARY_COLUMNS = ("scenario", "method", "quantity", "eval_time", "order", "n_points", "n_excluded")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_report_csv(path, report):
    _atomic_write(path, _csv_text(("dt", "error"), report.rows))


def write_summary_csv(path, reports):
    rows = [
        (r.scenario, r.method if r.stages == 1 else f"{r.method}/s{r.stages}", r.quantity, float(r.eval_time),
         float(r.order), len(r.rows), r.n_excluded)
        for r in reports
    ]
    _atomic_write(path, _csv_text(SUMMARY_COLUMNS, rows))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
