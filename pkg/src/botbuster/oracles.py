"""Deterministic recursions behind the innovation-rate limit.

The recursion ``f_n = eta_n * f_{n-1} + b`` with ``eta_n = 1 - 1/(c + a*n)``
has the explicit solution

    f_n = f_0 P_n + a*b/(1+a) * (n + (1 + c/a) * (1 - P_n)),
    P_n = prod_{l=1..n} eta_l

so ``f_n / n -> a*b/(1+a)``.  :func:`recurse` iterates step by step and
:func:`closed_form` evaluates the explicit solution; the two are independent
routes to the same numbers.

For a synchronous botnet of ``B`` bots sending every ``tau`` seconds from a
dictionary of size ``e0 + alpha*tau*n`` at slot ``n``, the mean dictionary size
obeys the same recursion (as an upper bound) with ``a = alpha*tau/B``,
``b = B`` and ``c = e0/B``; see :func:`slotted_botnet_params`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

_ETA_TOL = 1e-12


@dataclass(frozen=True)
class RecursionParams:
    a: float
    b: float
    c: float
    f0: float = 0.0
    n_max: int = 1000

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError("n_max must be a positive integer")
        # eta_n is increasing in n, so eta_1 > 0 covers every step
        if not self.c + self.a >= 1 + self.a * _ETA_TOL:
            raise DomainError(f"eta_1 = 1 - 1/(c + a) is not positive for a={self.a}, c={self.c}")

    @property
    def limit(self) -> float:
        return self.a * self.b / (1 + self.a)


def etas(params: RecursionParams, n_max: int | None = None) -> np.ndarray:
    n = np.arange(1, (n_max or params.n_max) + 1, dtype=float)
    return 1.0 - 1.0 / (params.c + params.a * n)


def recurse(params: RecursionParams) -> np.ndarray:
    """``f_1 .. f_{n_max}`` by direct iteration."""
    out = np.empty(params.n_max)
    f = float(params.f0)
    a, b, c = params.a, params.b, params.c
    for n in range(1, params.n_max + 1):
        f = (1.0 - 1.0 / (c + a * n)) * f + b
        out[n - 1] = f
    return out


def closed_form(params: RecursionParams, n=None):
    """Explicit solution at ``n`` (scalar or array; default ``1..n_max``).

    The running product of ``eta`` is accumulated in log space.
    """
    if n is None:
        n = np.arange(1, params.n_max + 1)
    n_arr = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if np.any(n_arr < 1):
        raise DomainError("n must be a positive integer")
    top = int(n_arr.max())
    log_prod = np.cumsum(np.log1p(-1.0 / (params.c + params.a * np.arange(1, top + 1, dtype=float))))
    lp = log_prod[n_arr - 1]
    prod = np.exp(lp)
    a, b, c = params.a, params.b, params.c
    f = params.f0 * prod + a * b / (1 + a) * (n_arr + (1 + c / a) * -np.expm1(lp))
    return float(f[0]) if np.ndim(n) == 0 else f


def _check_vanishing(o_n, o_1, n_max):
    big = float(n_max)
    if abs(o_n(big)) > 0.05 * big:
        warnings.warn(f"o(n) perturbation is {o_n(big):.3g} at n={n_max}: not small against n",
                      RuntimeWarning, stacklevel=3)
    if abs(o_1(big)) > 0.05:
        warnings.warn(f"o(1) perturbation is {o_1(big):.3g} at n={n_max}: not vanishing",
                      RuntimeWarning, stacklevel=3)


def perturbed_bounds(a: float, b: float,
                     o_n: Callable[[float], float] = lambda n: 0.0,
                     o_1: Callable[[float], float] = lambda n: 0.0,
                     n_max: int = 100_000, f0: float = 0.0, c: float = 0.0,
                     tail: float = 0.1) -> tuple[float, float]:
    """Worst-case iteration of the perturbed recursion.

    Iterates ``f_n = f_{n-1} * (1 - 1/(c + a*n + o_n(n))) + b + o_1(n)``
    (the inequalities taken at equality) and returns the largest and smallest
    ``f_n / n`` over the last ``tail`` fraction of steps, as finite-n stand-ins
    for the limit superior and limit inferior.  Both should sit near
    ``a*b/(1+a)`` when the perturbations are genuinely ``o(n)`` and ``o(1)``;
    a warning is issued when they visibly are not.
    """
    if not a > 0:
        raise DomainError("a must be positive")
    _check_vanishing(o_n, o_1, n_max)
    f = float(f0)
    start = max(1, int(n_max * (1 - tail)))
    hi, lo = -math.inf, math.inf
    for n in range(1, n_max + 1):
        scale = c + a * n + o_n(n)
        if scale < 1:
            # early steps where the perturbation dominates: drop the decay
            eta = 1.0
        else:
            eta = 1.0 - 1.0 / scale
        f = f * eta + b + o_1(n)
        if n >= start:
            r = f / n
            hi = max(hi, r)
            lo = min(lo, r)
    return hi, lo


def slotted_botnet_params(alpha: float, tau: float, n_bots: int, e0: float, n_max: int) -> RecursionParams:
    """Recursion whose limit is the per-slot innovation ``alpha*tau*B/(alpha*tau + B)``."""
    return RecursionParams(a=alpha * tau / n_bots, b=float(n_bots), c=e0 / n_bots, f0=0.0, n_max=n_max)
