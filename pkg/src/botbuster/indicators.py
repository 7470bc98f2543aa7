"""Network activity indicators.

For a subnet observed up to time ``t`` with ``n`` transmissions and ``d``
distinct messages:

* transmission rate ``lambda_hat = n / t``
* message innovation rate (MIR) ``rho_hat = d / t``
* emulation dictionary rate (EDR) estimate
  ``alpha_hat = lambda_hat * rho_hat / (lambda_hat - rho_hat)``

``alpha_hat`` diverges when no message was ever repeated; it is then reported
as ``math.inf``.  The innovation function ``innovation_rate(alpha, lam) =
alpha*lam/(alpha+lam)`` links the three: ``rho_hat == innovation_rate(alpha_hat,
lambda_hat)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .trace import SubnetStats

# lambda_hat - rho_hat below this fraction of lambda_hat counts as "no repeats"
REPEAT_GUARD = 1e-12


def r_function(alpha: float, lam: float) -> float:
    """Innovation rate ``alpha*lam/(alpha+lam)`` of a dictionary growing at
    ``alpha`` sampled at rate ``lam``.

    ``alpha`` may be ``math.inf``, in which case the result is ``lam``.
    """
    if alpha < 0 or lam < 0 or math.isnan(alpha) or math.isnan(lam):
        raise DomainError(f"r_function needs nonnegative arguments, got ({alpha}, {lam})")
    if math.isinf(alpha):
        return float(lam) if not math.isinf(lam) else math.inf
    if math.isinf(lam):
        return float(alpha)
    if alpha == 0 or lam == 0:
        return 0.0
    return alpha * lam / (alpha + lam)


innovation_rate = r_function


def r_array(alpha, lam):
    """Vectorised :func:`r_function` (no domain checks)."""
    alpha = np.asarray(alpha, dtype=float)
    lam = np.asarray(lam, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(alpha + lam > 0, alpha * lam / (alpha + lam), 0.0)
    return np.where(np.isinf(alpha), lam, np.where(np.isinf(lam), alpha, out))


def alpha_from_rates(lam: float, rho: float) -> float:
    """EDR estimate from a rate pair, ``inf`` when there are no repeats."""
    gap = lam - rho
    if gap <= REPEAT_GUARD * lam:
        return math.inf
    return lam * rho / gap


@dataclass(frozen=True)
class Indicators:
    lambda_hat: float
    rho_hat: float
    alpha_hat: float

    def __post_init__(self):
        if self.rho_hat < 0 or self.lambda_hat < 0:
            raise DomainError("rates must be nonnegative")
        if self.rho_hat > self.lambda_hat * (1 + 1e-12):
            raise DomainError(f"MIR {self.rho_hat} exceeds transmission rate {self.lambda_hat}")

    @classmethod
    def from_rates(cls, lambda_hat: float, rho_hat: float) -> "Indicators":
        return cls(float(lambda_hat), float(rho_hat), alpha_from_rates(lambda_hat, rho_hat))

    @property
    def repeat_rate(self) -> float:
        """``lambda_hat - rho_hat``: repeated transmissions per second."""
        return self.lambda_hat - self.rho_hat

    @property
    def repeat_free(self) -> bool:
        return math.isinf(self.alpha_hat)


def compute_indicators(stats: SubnetStats) -> Indicators:
    if not stats.horizon > 0:
        raise DomainError("indicators need a positive observation horizon")
    t = stats.horizon
    n, d = stats.n_events, len(stats.dict)
    lam, rho = n / t, d / t
    # alpha from integer counts: n*d / ((n-d)*t) avoids the lam-rho cancellation
    alpha = math.inf if n == d else n * d / ((n - d) * t)
    return Indicators(lam, rho, alpha)


def indicator_series(n, d, t):
    """Vectorised indicators for count arrays ``n``, ``d`` at times ``t``.

    Returns ``(lambda_hat, rho_hat, alpha_hat)`` arrays.
    """
    n = np.asarray(n, dtype=float)
    d = np.asarray(d, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("indicators need positive observation times")
    rep = n - d
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(rep > 0, n * d / (rep * t), np.inf)
    return n / t, d / t, alpha
