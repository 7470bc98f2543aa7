"""Acceptance gate.

One test per headline criterion, each at its stated tolerance.  Every test
appends a ``PASS``/``FAIL`` line to the session summary (shown at the end of
the pytest run) and prints it as well.
"""

import math
import time

import numpy as np
import pytest

from botbuster.algorithm import botbuster
from botbuster.errors import NumericalError
from botbuster.evaluation import evaluate, evaluate_sweep
from botbuster.indicators import Indicators, compute_indicators, r_function
from botbuster.oracles import RecursionParams, closed_form, recurse
from botbuster.rr import reference_quantities
from botbuster.synth import (BotnetConfig, EmulationDictionary, NormalConfig, Poisson, SimConfig,
                             Synchronous, generate_botnet_trace)
from botbuster.trace import subnet_stats

EPSILONS = (0.05, 0.1, 0.2)


@pytest.fixture
def report(acceptance_log):
    def _report(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        acceptance_log.append(line)
        print(line)
        assert ok, line
    return _report


def _botnet(mode):
    sched = Synchronous(1.0) if mode == "synchronous" else Poisson(1.0)
    return BotnetConfig(10, sched, EmulationDictionary(100, 10.0))


def test_mir_convergence(report):
    start = time.perf_counter()
    means = {}
    for mode in ("poisson", "synchronous"):
        cfg = _botnet(mode)
        rho = [compute_indicators(subnet_stats(generate_botnet_trace(cfg, 600.0, s), range(10), 600.0)).rho_hat
               for s in range(20)]
        means[mode] = float(np.mean(rho))
    elapsed = time.perf_counter() - start
    target = r_function(10, 10)
    ok = all(abs(m / target - 1) <= 0.05 for m in means.values()) and elapsed < 30
    detail = ", ".join(f"{k} {v:.4f}" for k, v in means.items())
    report("MIR convergence", ok, f"{detail} vs {target} (+-5%), {elapsed:.2f}s (< 30s)")


def test_edr_estimator(report):
    rng = np.random.default_rng(2024)
    worst = {}
    for mode in ("poisson", "synchronous"):
        cfg = _botnet(mode)
        full, sub = [], []
        for s in range(20):
            tr = generate_botnet_trace(cfg, 600.0, s)
            full.append(compute_indicators(subnet_stats(tr, range(10), 600.0)).alpha_hat)
            subset = rng.choice(10, size=3, replace=False).tolist()
            sub.append(compute_indicators(subnet_stats(tr, subset, 600.0)).alpha_hat)
        worst[mode] = (float(np.mean(full)), float(np.mean(sub)))
    ok = all(abs(v / 10 - 1) <= 0.10 for pair in worst.values() for v in pair)
    detail = ", ".join(f"{k} full {a:.3f} size-3 {b:.3f}" for k, (a, b) in worst.items())
    report("EDR estimator", ok, f"{detail} vs 10 (+-10%)")


def test_r_function_properties(report):
    rng = np.random.default_rng(7)
    triples = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), size=(10_000, 3)))
    failures = 0
    for a, l1, l2 in triples.tolist():
        r1, r2, r12 = r_function(a, l1), r_function(a, l2), r_function(a, l1 + l2)
        ok = (r1 + r2 > r12
              and r1 <= min(a, l1)
              and r1 == r_function(l1, a)
              and math.isclose(r1, 1 / (1 / a + 1 / l1), rel_tol=4 * np.finfo(float).eps))
        failures += not ok
    report("R-function properties", failures == 0, f"{failures} failures in 10^4 triples")


def _rr_cases(rng, n):
    """Random indicator pairs, with equal repeat rates and repeat-free sides mixed in."""
    lam = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=(n, 2)))
    frac = rng.uniform(0.01, 0.99, size=(n, 2))
    rho = lam * frac
    kind = np.arange(n) % 10
    for i in np.flatnonzero(kind == 1):
        # equal repeat rates: degenerate quadratic
        r = lam[i, 0] - rho[i, 0]
        lam[i, 1] = r + rng.uniform(0.01, 50)
        rho[i, 1] = lam[i, 1] - r
    for i in np.flatnonzero(kind == 2):
        rho[i, 1] = lam[i, 1]
    for i in np.flatnonzero(kind == 3):
        rho[i, 0] = lam[i, 0]
    return lam, rho, kind


def test_rr_correctness(report):
    rng = np.random.default_rng(11)
    lam, rho, kind = _rr_cases(rng, 10_000)
    failures, kinds = [], {"degenerate": 0, "one-sided": 0}
    for i in range(lam.shape[0]):
        l1, l2 = lam[i]
        p1, p2 = rho[i]
        i1, i2 = Indicators.from_rates(l1, p1), Indicators.from_rates(l2, p2)
        r1, r2 = i1.repeat_rate, i2.repeat_rate
        if abs(r1 - r2) < 1e-9 * max(l1, l2):
            kinds["degenerate"] += 1
        if i1.repeat_free != i2.repeat_free:
            kinds["one-sided"] += 1
        try:
            sol = reference_quantities(i1, i2, 0.2)
        except NumericalError as exc:
            failures.append((i, str(exc)))
            continue
        d = sol.delta_star
        checks = [-p1 <= d <= p2]
        # cross-multiplied equality of the two equalised EDRs
        lhs = (l1 + d) * (p1 + d) * r2
        rhs = (l2 - d) * (p2 - d) * r1
        scale = max(abs(lhs), abs(rhs), (l1 + l2) ** 2 * max(r1, r2))
        checks.append(abs(lhs - rhs) <= 1e-9 * scale)
        a1, a2 = i1.alpha_hat, i2.alpha_hat
        lo, hi = min(a1, a2), max(a1, a2)
        checks.append(lo * (1 - 1e-9) <= sol.alpha_prime <= hi * (1 + 1e-9) or math.isinf(hi) and sol.alpha_prime >= lo)
        if r1 > 0 and r2 > 0:
            checks.append(sol.rho_bot < sol.rho_sum)
        if not math.isclose(a1, a2, rel_tol=1e-9):
            checks.append((d > 0) == (a1 < a2))
        else:
            checks.append(abs(d) <= 1e-6 * max(l1, l2))
        if not all(checks):
            failures.append((i, checks))
    ok = not failures and kinds["degenerate"] >= 500 and kinds["one-sided"] >= 1000
    report("RR correctness", ok,
           f"{len(failures)} failures in 10^4 pairs ({kinds['degenerate']} degenerate, "
           f"{kinds['one-sided']} one-sided infinite)")


def test_recursion_oracle(report):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        a = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
        b = float(rng.uniform(0.01, 100))
        c = max(1 - a, 0) + 1e-3 + float(rng.exponential(20))
        f0 = float(rng.uniform(0, 100))
        p = RecursionParams(a, b, c, f0, n_max=1000)
        rec, cf = recurse(p), closed_form(p)
        worst = max(worst, float(np.max(np.abs(rec - cf) / np.abs(rec))))
    p = RecursionParams(1.0, 1.0, 2.0, 0.0, n_max=1_000_000)
    limit_err = abs(recurse(p)[-1] / 1e6 / p.limit - 1)
    ok = worst <= 1e-8 and limit_err <= 1e-3
    report("Recursion oracle", ok,
           f"max rel diff {worst:.2e} (<= 1e-8) over 100 sets; limit rel err {limit_err:.2e} at n=10^6 (<= 0.1%)")


def test_all_normal_false_alarms(report):
    sim = SimConfig(BotnetConfig(0), NormalConfig(count=10), horizon=120.0)
    grid = np.arange(1.0, 121.0)
    start = time.perf_counter()
    reps = evaluate_sweep(sim, grid, EPSILONS, trials=100)
    elapsed = time.perf_counter() - start
    peaks = {r.epsilon: float(np.max(r.eta_nor)) for r in reps}
    ok = all(v <= 0.05 for v in peaks.values()) and elapsed < 300
    detail = ", ".join(f"eps {e}: max {v:.3f}" for e, v in peaks.items())
    report("All-normal network", ok, f"banned fraction {detail} (<= 0.05), {elapsed:.1f}s (< 300s)")


def test_mixed_network_epsilon(report):
    sim = SimConfig(BotnetConfig(10), NormalConfig(count=10), horizon=120.0)
    grid = np.arange(1.0, 121.0)
    reps = evaluate_sweep(sim, grid, EPSILONS, trials=100)
    nor_peak = max(float(np.max(r.eta_nor)) for r in reps)
    final = [r.at(120.0)[0] for r in reps]
    ordered = all(x <= y for x, y in zip(final, final[1:]))
    ok = nor_peak <= 0.01 and ordered and final[-1] >= 0.9
    report("Mixed network vs epsilon", ok,
           f"max eta_nor {nor_peak:.4f} (<= 0.01); eta_bot(120s) "
           + ", ".join(f"{e}: {v:.3f}" for e, v in zip(EPSILONS, final)) + " (non-decreasing, >= 0.9 at 0.2)")


def test_alpha_sweep(report):
    grid = np.arange(60.0, 601.0, 10.0)
    curves = {}
    for alpha in (0.0, 10.0, 50.0):
        sim = SimConfig(BotnetConfig(10, Poisson(1.0), EmulationDictionary(100, alpha)),
                        NormalConfig(count=10), horizon=600.0)
        curves[alpha] = evaluate(sim, grid, 0.2, trials=100)
    b0, b10, b50 = (curves[a].eta_bot for a in (0.0, 10.0, 50.0))
    ordered = bool(np.all(b0 >= b10) and np.all(b10 >= b50))
    first, last = float(b50[0]), float(b50[-1])
    ok = ordered and first > 0.8 and last >= 0.95
    report("EDR sweep", ok,
           f"ordered alpha 0 >= 10 >= 50: {ordered}; eta_bot(alpha=50) {first:.3f} at 60s (> 0.8), "
           f"{last:.3f} at 600s (>= 0.95)")


def test_network_size(report):
    grid = np.arange(1.0, 121.0)
    peaks = {}
    for bots in (0, 10, 50):
        sim = SimConfig(BotnetConfig(bots), NormalConfig(count=50), horizon=120.0)
        peaks[bots] = float(np.max(evaluate(sim, grid, 0.2, trials=20).eta_nor))
    ok = peaks[0] <= 0.05 and peaks[10] <= 0.01 and peaks[50] <= 0.01
    report("Network size", ok,
           f"max eta_nor B=0 {peaks[0]:.4f} (<= 0.05), B=10 {peaks[10]:.4f}, B=50 {peaks[50]:.4f} (<= 0.01)")


def test_scale(report):
    sim = SimConfig(BotnetConfig(50), NormalConfig(count=50), horizon=120.0)
    trace, labels = sim.generate()
    start = time.perf_counter()
    est = botbuster(trace, 100, 120.0)
    elapsed = time.perf_counter() - start
    bots = {u for u, lab in labels.items() if lab == "bot"}
    report("Scale", elapsed < 60,
           f"N=100 detection in {elapsed:.2f}s (< 60s); banned {len(est.banned & bots)}/50 bots, "
           f"{len(est.banned - bots)} normals")
