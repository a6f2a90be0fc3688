"""Acceptance gate: one test, and one printed verdict line, per criterion.

Criteria 7 to 9 share the session grid runs defined in conftest.py.
"""

import cmath
import dataclasses
import math
import os
import time

import numpy as np
import pytest

from heavytail_ld.charfn import (decomposition_residual, expansion_coeffs, psi_by_quadrature,
                                 psi_exact, psi_minus_one)
from heavytail_ld.config import load_config
from heavytail_ld.experiment import DISCORDANCE_SIGMAS, fit_scaling, run_experiment
from heavytail_ld.inversion import InversionConfig, ToleranceBudget, deviation_delta
from heavytail_ld.model import TailModel
from heavytail_ld.montecarlo import bigjump_tail_estimate, conv2_oracle, naive_tail_estimate
from heavytail_ld.quadrature import OscillandSpec, oscillatory_log_integral
from heavytail_ld.smoother import SmootherSpec, smoother_tail_budget, smoother_values

from acceptance_log import record
from conftest import ROOT

P7 = TailModel(0.7)


def _spread(values):
    values = np.asarray(values, dtype=float)
    return float(values.max() / np.median(values))


def test_criterion_1_decomposition_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    r = np.sqrt(rng.random(10_000))
    phi = rng.uniform(0, 2 * math.pi, 10_000)
    ns = rng.integers(1, 201, 10_000)
    worst = max(decomposition_residual(cmath.rect(a, b), int(n)) / n
                for a, b, n in zip(r, phi, ns))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 1.0
    record(1, ok, f"max residual/n = {worst:.2e} (< 1e-10), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_criterion_2_characteristic_function():
    start = time.perf_counter()
    probes = np.concatenate([-np.logspace(-4, 1, 10), np.logspace(-5, 1.3, 40)])
    worst = max(abs(psi_exact(P7, t).value - psi_by_quadrature(P7, t)) for t in probes)
    regress = 0.0
    for p in (0.5, 0.6, 0.7, 0.9):
        co = expansion_coeffs(TailModel(p))
        c = 2 * p - 1
        targets = {"c": c, "C0": c * (1 - 0.57721566490153286), "C": -math.pi / 2}
        regress = max(regress, max(abs(co.fitted[k] - v) for k, v in targets.items()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and regress < 1e-6 and elapsed < 30
    record(2, ok, f"psi vs density quadrature {worst:.1e} (< 1e-8) at {probes.size} t; "
                  f"regression error {regress:.1e} (< 1e-6); {elapsed:.1f} s")
    assert ok


def test_criterion_3_expansion_residual():
    start = time.perf_counter()
    t = np.logspace(-8, -2, 200)
    bounds = []
    for p in (0.5, 0.7, 0.9):
        co = expansion_coeffs(TailModel(p))
        w = psi_minus_one(TailModel(p), t)
        lt = np.log(t)
        ratio = np.abs(w - (-1j * co.c * t * lt + 1j * co.C0 * t + co.C * t)) / (t * t * np.abs(lt))
        # bounded: no growth toward t -> 0 and one constant covers the grid
        bounds.append((ratio.max(), ratio[:100].max() <= ratio[100:].max()))
    elapsed = time.perf_counter() - start
    K = max(b for b, _ in bounds)
    ok = all(flat for _, flat in bounds) and np.isfinite(K) and elapsed < 1.0
    record(3, ok, f"|Psi - expansion|/(t^2|log t|) <= {K:.3f} on [1e-8, 1e-2], "
                  f"no growth toward 0; {elapsed:.2f} s")
    assert ok


def _trapezoid(spec, num=10_000_000, chunk=1_000_000):
    lo, hi = math.pi / spec.M, spec.upper
    h = (hi - lo) / (num - 1)
    total = 0j
    for start in range(0, num, chunk):
        idx = np.arange(start, min(start + chunk, num))
        t = lo + idx * h
        f = np.exp(-1j * t * spec.M) * np.log(t) ** spec.r / t
        if spec.smoother is not None:
            f = f * smoother_values(spec.smoother, t)[0]
        if spec.m:
            f = f * (1 + psi_minus_one(spec.model, t)) ** spec.m
        w = np.ones(idx.size)
        w[idx == 0] = 0.5
        w[idx == num - 1] = 0.5
        total += np.sum(f * w)
    return total * h


def test_criterion_4_oscillatory_quadrature():
    start = time.perf_counter()
    window = SmootherSpec()
    worst = 0.0
    for M in (1e2, 1e3):
        for r in (0, 1, 2):
            for m in (0, 1, 8):
                spec = OscillandSpec(M=M, r=r, m=m, smoother=window, model=P7)
                got = oscillatory_log_integral(spec, check_decay=False).value
                worst = max(worst, abs(got - _trapezoid(spec)))
    bare = oscillatory_log_integral(OscillandSpec(M=1e4, epsilon=0.5))
    block = float(bare.block_scaled.max() / np.median(bare.block_scaled))
    variation = {}
    for r in (0, 1, 2):
        vals = [abs(oscillatory_log_integral(
            OscillandSpec(M=M, r=r, m=8, smoother=window, model=P7)).value) / math.log(M) ** r
            for M in (1e3, 1e4, 1e5)]
        variation[r] = max(vals) / min(vals) - 1
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and block < 3 and max(variation.values()) < 0.5 and elapsed < 120
    record(4, ok, f"pairing vs trapezoid {worst:.1e} (< 1e-6); k^2|J_k| max/median {block:.2f} "
                  f"(< 3); |value|/(log M)^r variation "
                  + ", ".join(f"r={r}: {v:.0%}" for r, v in variation.items())
                  + f" (< 50%); {elapsed:.0f} s")
    assert ok


def test_criterion_5_two_summand_chain():
    start = time.perf_counter()
    worst = 0.0
    details = []
    for N in (1e2, 1e3):
        exact = conv2_oracle(P7, N)
        naive = naive_tail_estimate(P7, 2, N, 10**7, seed=501)
        big = bigjump_tail_estimate(P7, 2, N, 10**6, seed=502)
        inv = deviation_delta(InversionConfig(n=2, N=N))
        values = {"conv2": (exact, 1e-10),
                  "naive": (naive.estimate, DISCORDANCE_SIGMAS * naive.std_error),
                  "bigjump": (big.estimate, DISCORDANCE_SIGMAS * big.std_error),
                  "inversion": (inv.P_Sn_inv, inv.P_Sn_inv_err)}
        names = list(values)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                (va, ea), (vb, eb) = values[a], values[b]
                worst = max(worst, abs(va - vb) / (ea + eb))
        details.append(f"N={N:g}: conv2 {exact:.6e}, inv {inv.P_Sn_inv:.6e}")
    elapsed = time.perf_counter() - start
    ok = worst <= 1.0 and elapsed < 300
    record(5, ok, f"worst pairwise gap / combined bar = {worst:.2f} (<= 1); "
                  + "; ".join(details) + f"; {elapsed:.0f} s")
    assert ok


def test_criterion_6_budget_chain():
    start = time.perf_counter()
    cfg = load_config(os.path.join(ROOT, "configs", "default.ini"))
    shift, tail = 0.0, 0.0
    for n, N, g, arm in cfg.cells():
        if arm != "main":
            continue
        b = ToleranceBudget.for_threshold(N, cfg.smoother)
        shift = max(shift, b.z_N / (0.1 * N))
        tail = max(tail, smoother_tail_budget(cfg.smoother, b.z_N) / (0.1 * b.y_N))
    elapsed = time.perf_counter() - start
    ok = shift < 1 and tail < 1 and elapsed < 1.0
    record(6, ok, f"a={cfg.smoother.a:g}: max z_N/(0.1 N) = {shift:.3f}, "
                  f"max tail bound/(0.1 y_N) = {tail:.3f} (both < 1); {elapsed:.2f} s")
    assert ok


def test_criterion_7_decomposition_closure(default_grid):
    report, _, seconds = default_grid
    main = [p for p in report.main_points() if not p.error]
    closure = max(p.closure_residual / (10 * p.closure_error) for p in main)
    usable = [p for p in main if p.in_range]
    spreads = {k: _spread([getattr(p, k) for p in usable])
               for k in ("I1_ratio", "I2_ratio", "I3_ratio")}
    ok = (len(main) == len(report.main_points()) and closure < 1
          and max(spreads.values()) < 10 and seconds < 1200)
    record(7, ok, f"max closure residual/(10 x error) = {closure:.2e} (< 1); max/median "
                  + ", ".join(f"{k[:2]} {v:.3g}" for k, v in spreads.items())
                  + f" (each < 10); grid {seconds:.0f} s")
    assert ok


def test_criterion_8_scaling(default_grid, symmetric_grid):
    report, _, t1 = default_grid
    sym, _, t2 = symmetric_grid
    fit = fit_scaling(report.main_points())
    slopes = [s["slope"] for s in fit["slices"].values()]
    sfit = fit_scaling(sym.main_points(), symmetric=True)
    ok = (fit["ratio_spread"] < 10 and all(-2.4 <= s <= -1.6 for s in slopes)
          and sfit["ratio_spread"] < 10 and t1 + t2 < 1800)
    record(8, ok, f"p=0.7 log ratio max/median {fit['ratio_spread']:.2f} (< 10), slopes "
                  f"{min(slopes):.3f}..{max(slopes):.3f} (in [-2.4, -1.6]); p=0.5 plain ratio "
                  f"max/median {sfit['ratio_spread']:.2f} (< 10); {t1 + t2:.0f} s")
    assert ok


def test_criterion_9_reproducibility(default_grid, tmp_path):
    _, first_dir, _ = default_grid
    cfg = load_config(os.path.join(ROOT, "configs", "default.ini"))
    start = time.perf_counter()
    run_experiment(dataclasses.replace(cfg, mc_workers=3), out_dir=str(tmp_path),
                   timestamp=False, workers=2)
    elapsed = time.perf_counter() - start
    with open(os.path.join(first_dir, "points.csv"), "rb") as fh:
        a = fh.read()
    with open(tmp_path / "points.csv", "rb") as fh:
        b = fh.read()
    ok = a == b and elapsed < 300
    record(9, ok, f"CSV identical across runs (workers 1 vs 2, MC workers 1 vs 3): {a == b}, "
                  f"{len(a)} bytes; rerun {elapsed:.0f} s")
    assert ok
