"""Monte Carlo performance of the identification algorithm.

Each trial draws a labelled trace from a :class:`~botbuster.synth.SimConfig`
(with seed ``sim.seed + trial``), runs the detector at every grid time and
records the fraction of bots banned (``eta_bot``) and the fraction of normal
users banned (``eta_nor``).  The report holds the means over trials.  A
fraction whose population is empty is undefined and reported as ``nan``.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algorithm import TraceIndex, botbuster_grid
from .errors import ConfigError
from .rr import check_epsilon
from .synth import SimConfig
from .trace import format_header


@dataclass
class EvalReport:
    grid: np.ndarray
    eta_bot: np.ndarray
    eta_nor: np.ndarray
    trials: int
    epsilon: float
    config: dict = field(default_factory=dict)

    @property
    def bot_defined(self) -> bool:
        return not np.all(np.isnan(self.eta_bot))

    @property
    def nor_defined(self) -> bool:
        return not np.all(np.isnan(self.eta_nor))

    def at(self, t: float) -> tuple[float, float]:
        i = int(np.argmin(np.abs(self.grid - t)))
        return float(self.eta_bot[i]), float(self.eta_nor[i])

    def to_csv(self, path=None) -> str:
        echo = dict(self.config, epsilon=self.epsilon, trials=self.trials)
        lines = format_header(echo)
        lines.append("t,eta_bot,eta_nor")
        lines.extend(f"{t!r},{b!r},{n!r}" for t, b, n in
                     zip(self.grid.tolist(), self.eta_bot.tolist(), self.eta_nor.tolist()))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def read_report_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse ``t,eta_bot,eta_nor`` rows back into arrays (comments skipped)."""
    rows = [line for line in io.StringIO(text).read().splitlines()
            if line and not line.startswith("#") and not line.startswith("t,")]
    data = np.array([[float(x) for x in r.split(",")] for r in rows]).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]


def _trial(sim: SimConfig, seed: int, grid: np.ndarray, epsilons: tuple) -> np.ndarray:
    """(len(epsilons), 2, G) array of per-trial banned fractions."""
    trace, labels = sim.generate(seed=seed)
    n = sim.n_users
    is_bot = np.array([labels[u] == "bot" for u in range(n)])
    index = TraceIndex(trace, n, grid)
    out = np.full((len(epsilons), 2, grid.size), np.nan)
    for k, eps in enumerate(epsilons):
        banned, _ = botbuster_grid(index, eps)
        if is_bot.any():
            out[k, 0] = banned[:, is_bot].sum(axis=1) / is_bot.sum()
        if (~is_bot).any():
            out[k, 1] = banned[:, ~is_bot].sum(axis=1) / (~is_bot).sum()
    return out


def _check_grid(sim: SimConfig, grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) < 0):
        raise ConfigError("grid must be a non-empty, non-decreasing list of positive times")
    if grid[-1] > sim.horizon:
        raise ConfigError(f"grid reaches {grid[-1]} s beyond the simulated horizon {sim.horizon} s")
    if sim.n_users < 2:
        raise ConfigError("evaluation needs at least two users")
    return grid


def evaluate_sweep(sim: SimConfig, grid, epsilons: Sequence[float], trials: int,
                   jobs: int = 1) -> list[EvalReport]:
    """Like :func:`evaluate` for several ``epsilon`` values on the same traces."""
    if int(trials) != trials or trials < 1:
        raise ConfigError("trials must be a positive integer")
    grid = _check_grid(sim, grid)
    epsilons = tuple(check_epsilon(e) for e in epsilons)
    seeds = [sim.seed + k for k in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial, [sim] * trials, seeds, [grid] * trials,
                                    [epsilons] * trials))
    else:
        results = [_trial(sim, s, grid, epsilons) for s in seeds]
    mean = np.mean(results, axis=0)
    config = sim.to_flat()
    return [EvalReport(grid, mean[k, 0], mean[k, 1], trials, eps, config)
            for k, eps in enumerate(epsilons)]


def evaluate(sim: SimConfig, grid, epsilon: float = 0.2, trials: int = 100, jobs: int = 1) -> EvalReport:
    """Mean ``eta_bot`` / ``eta_nor`` curves over ``trials`` Monte Carlo runs."""
    return evaluate_sweep(sim, grid, [epsilon], trials, jobs)[0]
