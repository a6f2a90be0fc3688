"""Grid runs: evaluate every (n, N) cell, write CSV/JSON/gnuplot files, fit scaling."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
import json
import math
import os

import numpy as np

from . import __version__, _backend
from .inversion import ExperimentPoint, InversionConfig, deviation_delta
from .montecarlo import bigjump_tail_estimate, naive_tail_estimate, rng_identity

CSV_COLUMNS = ("n", "N", "g", "P_X1", "P_Sn_inv", "P_Sn_inv_err", "P_Sn_mc", "P_Sn_mc_err",
               "delta", "ratio_log", "ratio_plain", "I1_ratio", "I2_ratio", "I3_ratio",
               "zN", "yN", "in_range", "discordant")
CSV_SCHEMA_VERSION = 1
DISCORDANCE_SIGMAS = 4.0


class InsufficientPointsError(ValueError):
    """Too few usable points in an n-slice to fit a slope."""


@dataclass
class Report:
    config: object
    points: list
    arms: list
    errors: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def main_points(self):
        return [p for p, arm in zip(self.points, self.arms) if arm == "main"]


def _nan_point(n, N, g, cfg, message):
    nan = float("nan")
    return ExperimentPoint(
        n=n, N=N, g=g, P_X1=nan, P_Sn_inv=nan, P_Sn_inv_err=nan, delta=nan, delta_err=nan,
        z_N=nan, y_N=nan, n_yN=nan, ratio_log=nan, ratio_plain=nan, ratio_budget=nan,
        I1_ratio=nan, I2_ratio=nan, I3_ratio=nan, I_near=nan, closure_residual=nan,
        closure_error=nan, in_range=False, budget_ok=False, far_mode=cfg.far_mode,
        error=message)


def evaluate_cell(cfg, index, n, N, g):
    """One grid cell; failures come back in the point's ``error`` field."""
    try:
        inv = InversionConfig(n=n, N=N, g=g, spec=cfg.smoother, model=cfg.model,
                              far_mode=cfg.far_mode, range_ratio_max=cfg.range_ratio)
        point = deviation_delta(inv)
    except Exception as exc:  # recorded in-row, never aborts the grid
        return _nan_point(n, N, g, cfg, f"{type(exc).__name__}: {exc}")
    try:
        if cfg.estimator == "bigjump" and n >= 2:
            mc = bigjump_tail_estimate(cfg.model, n, N, cfg.trials, cfg.seed, cell=index,
                                       workers=cfg.mc_workers)
        elif cfg.estimator in ("naive", "bigjump"):
            mc = naive_tail_estimate(cfg.model, n, N, cfg.trials, cfg.seed, cell=index,
                                     workers=cfg.mc_workers, force=True)
        else:
            mc = None
    except Exception as exc:
        point.error = f"{type(exc).__name__}: {exc}"
        mc = None
    if mc is not None:
        point.P_Sn_mc = mc.estimate
        point.P_Sn_mc_err = mc.std_error
        gap = abs(point.P_Sn_inv - mc.estimate)
        point.discordant = bool(gap > point.P_Sn_inv_err + DISCORDANCE_SIGMAS * mc.std_error)
    return point


def _cell_job(args):
    return evaluate_cell(*args)


def run_experiment(cfg, out_dir=None, timestamp=True, workers=None):
    """Evaluate the grid and write the report files; returns the Report."""
    cells = cfg.cells()
    jobs = [(cfg, i, n, N, g) for i, (n, N, g, _) in enumerate(cells)]
    workers = cfg.workers if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_cell_job, jobs))
    else:
        points = [_cell_job(j) for j in jobs]
    report = Report(config=cfg, points=points, arms=[c[3] for c in cells])
    report.errors = [{"cell": i, "n": p.n, "N": p.N, "error": p.error}
                     for i, p in enumerate(points) if p.error]
    report.summary = summarize(report)
    out_dir = cfg.out_dir if out_dir is None else out_dir
    if out_dir:
        write_report(report, out_dir, timestamp=timestamp)
    return report


def summarize(report):
    cfg = report.config
    symmetric = cfg.model.symmetric
    summary = {
        "version": __version__,
        "csv_schema": CSV_SCHEMA_VERSION,
        "backend": _backend.BACKEND,
        "rng": rng_identity(),
        "c": cfg.model.skew,
        "ratio": "ratio_plain" if symmetric else "ratio_log",
        "cells": len(report.points),
        "discordant": sum(p.discordant for p in report.points),
        "errors": report.errors,
        "budget_ok_all": all(p.budget_ok for p in report.main_points()),
        "config": cfg.as_dict(),
    }
    try:
        summary["fit"] = fit_scaling(report.main_points(), symmetric=symmetric)
    except InsufficientPointsError as exc:
        summary["fit"] = {"error": str(exc)}
    return summary


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def csv_rows(points):
    for p in points:
        yield [p.n, p.N, p.g, p.P_X1, p.P_Sn_inv, p.P_Sn_inv_err, p.P_Sn_mc, p.P_Sn_mc_err,
               p.delta, p.ratio_log, p.ratio_plain, p.I1_ratio, p.I2_ratio, p.I3_ratio,
               p.z_N, p.y_N, p.in_range, p.discordant]


def format_csv(points, timestamp=None):
    lines = []
    if timestamp:
        lines.append(f"# generated {timestamp}")
    lines.append(",".join(CSV_COLUMNS))
    for row in csv_rows(points):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_report(report, out_dir, timestamp=True):
    os.makedirs(out_dir, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    with open(os.path.join(out_dir, "points.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(report.points, stamp))
    summary = dict(report.summary)
    if stamp:
        summary["generated"] = stamp
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    main = report.main_points()
    for n in sorted({p.n for p in main}):
        rows = [p for p in main if p.n == n and p.delta == p.delta and p.delta != 0]
        with open(os.path.join(out_dir, f"delta_n{n}.dat"), "w", encoding="utf-8") as fh:
            fh.write(f"# n = {n}: log N, log|delta|, in_range\n")
            for p in sorted(rows, key=lambda p: p.N):
                fh.write(f"{math.log(p.N):.10g} {math.log(abs(p.delta)):.10g} {int(p.in_range)}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def fit_scaling(points, symmetric=False, min_points=4):
    """Per-n OLS slope of log|delta| on log N, and max/median of the normalised ratio.

    Only in-range, non-discordant, error-free points enter; discordant ones are counted.
    """
    key = "ratio_plain" if symmetric else "ratio_log"
    usable = [p for p in points if p.in_range and not p.error and not p.discordant
              and np.isfinite(p.delta) and p.delta != 0]
    excluded = sum(1 for p in points if p.discordant)
    slices = {}
    for n in sorted({p.n for p in points}):
        pts = sorted((p for p in usable if p.n == n), key=lambda p: p.N)
        if len(pts) < min_points:
            raise InsufficientPointsError(f"n={n}: {len(pts)} usable points, need {min_points}")
        x = np.log([p.N for p in pts])
        y = np.log([abs(p.delta) for p in pts])
        slope, intercept = np.polyfit(x, y, 1)
        slices[int(n)] = {"slope": float(slope), "intercept": float(intercept),
                          "points": len(pts)}
    if not slices:
        return {"ratio": key, "slices": {}, "excluded_discordant": excluded}
    ratios = np.array([getattr(p, key) for p in usable])
    return {
        "ratio": key,
        "slices": slices,
        "ratio_max": float(ratios.max()),
        "ratio_median": float(np.median(ratios)),
        "ratio_spread": float(ratios.max() / np.median(ratios)),
        "excluded_discordant": excluded,
    }
