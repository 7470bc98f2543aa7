import math

import numpy as np
import pytest

from botbuster.algorithm import botbuster
from botbuster.errors import ConfigError
from botbuster.evaluation import evaluate, evaluate_sweep, read_report_csv
from botbuster.synth import BotnetConfig, NormalConfig, SimConfig


def test_no_bots_leaves_eta_bot_undefined():
    rep = evaluate(SimConfig(BotnetConfig(0), NormalConfig(count=4), horizon=20.0), [10, 20], trials=2)
    assert not rep.bot_defined and rep.nor_defined
    assert np.all(np.isnan(rep.eta_bot)) and np.all(np.isfinite(rep.eta_nor))


def test_all_bots_leaves_eta_nor_undefined():
    rep = evaluate(SimConfig(BotnetConfig(4), NormalConfig(count=0), horizon=20.0), [20], trials=2)
    assert rep.bot_defined and not rep.nor_defined


def test_exact_detection_scores_one_and_zero():
    sim = SimConfig(horizon=300.0)
    for seed in range(20):
        trace, labels = sim.generate(seed)
        bots = {u for u, lab in labels.items() if lab == "bot"}
        if botbuster(trace, sim.n_users, 300.0).banned == bots:
            rep = evaluate(SimConfig(horizon=300.0, seed=seed), [300.0], trials=1)
            assert rep.at(300.0) == (1.0, 0.0)
            return
    pytest.fail("no seed with exact detection")


def test_sweep_matches_single_runs():
    sim = SimConfig(horizon=30.0)
    reps = evaluate_sweep(sim, [10, 30], [0.05, 0.2], trials=3)
    for rep in reps:
        single = evaluate(sim, [10, 30], rep.epsilon, trials=3)
        np.testing.assert_array_equal(rep.eta_bot, single.eta_bot)
        np.testing.assert_array_equal(rep.eta_nor, single.eta_nor)


def test_parallel_matches_serial():
    sim = SimConfig(horizon=30.0)
    a = evaluate(sim, [15, 30], trials=4, jobs=1)
    b = evaluate(sim, [15, 30], trials=4, jobs=2)
    np.testing.assert_array_equal(a.eta_bot, b.eta_bot)


def test_csv_round_trip():
    rep = evaluate(SimConfig(BotnetConfig(0), NormalConfig(count=3), horizon=10.0), [5, 10], trials=1)
    text = rep.to_csv()
    assert text.startswith("# ") and "\nt,eta_bot,eta_nor\n" in text
    t, b, n = read_report_csv(text)
    np.testing.assert_array_equal(t, [5, 10])
    assert np.all(np.isnan(b))
    np.testing.assert_array_equal(n, rep.eta_nor)


def test_bad_arguments():
    sim = SimConfig(horizon=10.0)
    with pytest.raises(ConfigError):
        evaluate(sim, [20.0], trials=1)
    with pytest.raises(ConfigError):
        evaluate(sim, [5.0], trials=0)
    with pytest.raises(ConfigError):
        evaluate(SimConfig(BotnetConfig(1), NormalConfig(count=0)), [5.0], trials=1)


@pytest.mark.slow
def test_consistency_at_long_horizon():
    rep = evaluate(SimConfig(horizon=600.0), [600.0], epsilon=0.2, trials=50)
    eta_bot, eta_nor = rep.at(600.0)
    assert eta_bot >= 0.98 and eta_nor <= 0.02
