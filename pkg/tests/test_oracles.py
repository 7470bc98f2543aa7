import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from botbuster.errors import DomainError
from botbuster.oracles import (RecursionParams, closed_form, etas, perturbed_bounds, recurse,
                               slotted_botnet_params)
from botbuster.synth import BotnetConfig, EmulationDictionary, Synchronous, generate_botnet_trace


def test_first_step_by_hand():
    p = RecursionParams(1, 1, 2, 0, n_max=1)
    assert etas(p)[0] == pytest.approx(2 / 3)
    assert recurse(p)[0] == 1
    assert closed_form(p, 1) == 1


def test_zero_fixed_point():
    p = RecursionParams(1.5, 0, 3, 0, n_max=500)
    assert not recurse(p).any()
    assert not np.any(closed_form(p))


def test_limit_at_1e5():
    f = recurse(RecursionParams(1, 1, 2, 0, n_max=100_000))
    assert abs(f[-1] / 1e5 - 0.5) < 1e-3


def test_limit_extrapolation():
    p = RecursionParams(2, 3, 5, 1.0)
    g5, g6 = closed_form(p, 10 ** 5) / 1e5, closed_form(p, 10 ** 6) / 1e6
    # error decays like 1/n
    assert abs(g6 - p.limit) < abs(g5 - p.limit)
    assert (10 * g6 - g5) / 9 == pytest.approx(p.limit, rel=1e-6)


def test_domain():
    with pytest.raises(DomainError):
        RecursionParams(0.5, 1, 0.2)
    with pytest.raises(DomainError):
        RecursionParams(0, 1, 5)
    with pytest.raises(DomainError):
        closed_form(RecursionParams(1, 1, 2), 0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.01, 50), st.floats(0, 100), st.floats(0, 100))
def test_closed_form_matches_recursion(a, b, c_extra, f0):
    c = max(1.0 - a, 0.0) + 1e-3 + c_extra
    p = RecursionParams(a, b, c, f0, n_max=1000)
    np.testing.assert_allclose(closed_form(p), recurse(p), rtol=1e-9)


def test_unperturbed_bounds_reduce_to_limit():
    hi, lo = perturbed_bounds(1, 1, n_max=100_000, c=2)
    assert hi == pytest.approx(0.5, rel=1e-3) and lo == pytest.approx(0.5, rel=1e-3)


def test_vanishing_perturbations():
    hi, lo = perturbed_bounds(2, 3, lambda n: n ** 0.5, lambda n: n ** -0.5, n_max=1_000_000)
    assert hi == pytest.approx(2, rel=0.01) and lo == pytest.approx(2, rel=0.01)


def test_reversed_branch_liminf():
    _, lo = perturbed_bounds(2, -3, lambda n: -(n ** 0.5), lambda n: n ** -0.5, n_max=1_000_000)
    assert lo >= 2 * -3 / 3


def test_non_vanishing_perturbation_warns():
    with pytest.warns(RuntimeWarning):
        perturbed_bounds(1, 1, o_1=lambda n: 1.0, n_max=1000)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        perturbed_bounds(1, 1, o_1=lambda n: 1 / n, n_max=1000)


def test_slotted_botnet_matches_simulation():
    bots, alpha, e0, n = 10, 10.0, 100, 300
    cfg = BotnetConfig(bots, Synchronous(1.0), EmulationDictionary(e0, alpha))
    sizes = [len(set(generate_botnet_trace(cfg, float(n), s).msgs.tolist())) for s in range(20)]
    p = slotted_botnet_params(alpha, 1.0, bots, e0, n)
    assert np.mean(sizes) == pytest.approx(closed_form(p, n), rel=0.05)
    assert p.limit == pytest.approx(alpha * bots / (alpha + bots))
