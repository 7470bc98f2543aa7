"""Synthetic labelled traffic.

Bots follow the randomized emulation model: at each transmission epoch ``t``
a bot draws one message uniformly from the first ``floor(e0 + alpha*t)``
entries of a dictionary shared by the whole botnet.  Scheduling is either
synchronous (every bot transmits at ``k/rate``) or independent Poisson.

Normal users are independent Poisson sources.  Each transmission is drawn
with probability ``p_share`` from a global pool shared by all normal users
and otherwise from the user's private pool; both pools grow linearly, and
private pools of different users never intersect.  The shared pool is what
gives normal users some physiological overlap.

Randomness comes from numpy's PCG64 bit generator.  Every user gets its own
stream, derived from ``(seed, population, user index)`` through
``SeedSequence``, so a trace depends only on the configuration and the seed.

Message identifiers live in disjoint 64-bit namespaces: bot dictionary
entries use their index, shared-pool entries set bit 40, and the private
pool of normal user ``v`` is tagged with ``(v + 2) << 40``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, MergeError
from .trace import Trace

_NS_SHIFT = 40
SHARED_NAMESPACE = 1 << _NS_SHIFT
BOT_STREAM, NORMAL_STREAM, PERMUTE_STREAM = 0, 1, 2


def private_namespace(user: int) -> int:
    return (user + 2) << _NS_SHIFT


@dataclass(frozen=True)
class EmulationDictionary:
    e0: int = 100
    alpha: float = 10.0

    def __post_init__(self):
        if int(self.e0) != self.e0 or self.e0 < 0:
            raise ConfigError(f"e0 must be a nonnegative integer, got {self.e0}")
        if not self.alpha >= 0 or math.isinf(self.alpha):
            raise ConfigError(f"alpha must be finite and nonnegative, got {self.alpha}")

    def size(self, t):
        """Number of messages available at time(s) ``t``."""
        return np.floor(self.e0 + self.alpha * np.asarray(t, dtype=float)).astype(np.int64)


@dataclass(frozen=True)
class Synchronous:
    rate: float = 1.0


@dataclass(frozen=True)
class Poisson:
    rates: float | tuple = 1.0

    def per_user(self, n: int) -> np.ndarray:
        if np.ndim(self.rates) == 0:
            return np.full(n, float(self.rates))
        rates = np.asarray(self.rates, dtype=float)
        if rates.shape != (n,):
            raise ConfigError(f"expected {n} per-bot rates, got {rates.size}")
        return rates


@dataclass(frozen=True)
class BotnetConfig:
    size: int = 10
    scheduling: Synchronous | Poisson = field(default_factory=Poisson)
    dictionary: EmulationDictionary = field(default_factory=EmulationDictionary)

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 0:
            raise ConfigError(f"botnet size must be a nonnegative integer, got {self.size}")
        if self.size > 0:
            if isinstance(self.scheduling, Synchronous):
                rates = np.array([self.scheduling.rate], dtype=float)
            elif isinstance(self.scheduling, Poisson):
                rates = self.scheduling.per_user(self.size)
            else:
                raise ConfigError(f"unknown scheduling {self.scheduling!r}")
            if not np.all(rates > 0) or not np.all(np.isfinite(rates)):
                raise ConfigError("bot transmission rates must be strictly positive")

    @property
    def total_rate(self) -> float:
        if isinstance(self.scheduling, Synchronous):
            return self.size * self.scheduling.rate
        return float(self.scheduling.per_user(self.size).sum()) if self.size else 0.0


@dataclass(frozen=True)
class NormalConfig:
    count: int = 10
    rate: float = 1.0
    private_rate: float = 5.0
    shared_rate: float = 5.0
    p_share: float = 0.1
    private_e0: int = 10
    shared_e0: int = 1000

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 0:
            raise ConfigError(f"normal user count must be a nonnegative integer, got {self.count}")
        if self.count and not (self.rate > 0 and math.isfinite(self.rate)):
            raise ConfigError("normal transmission rate must be strictly positive")
        if not 0.0 <= self.p_share < 1.0:
            raise ConfigError(f"p_share must lie in [0, 1), got {self.p_share}")
        for name in ("private_rate", "shared_rate"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be finite and nonnegative")
        for name in ("private_e0", "shared_e0"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ConfigError(f"{name} must be a nonnegative integer")


def _user_rng(seed, stream: int, user: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (stream, user))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=(stream, user))
    return np.random.Generator(np.random.PCG64(ss))


def poisson_epochs(rng: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """Arrival times in ``(0, horizon]`` from exponential inter-arrivals."""
    mean = rate * horizon
    chunk = int(mean + 6.0 * math.sqrt(mean) + 16)
    parts, last = [], 0.0
    while True:
        t = last + np.cumsum(rng.exponential(1.0 / rate, size=chunk))
        if t[-1] > horizon:
            parts.append(t[: np.searchsorted(t, horizon, side="right")])
            break
        parts.append(t)
        last = t[-1]
    return np.concatenate(parts)


def _uniform_index(rng: np.random.Generator, sizes: np.ndarray) -> np.ndarray:
    return np.floor(rng.random(sizes.size) * sizes).astype(np.int64)


def _assemble(times_list, users_list, msgs_list) -> Trace:
    if not times_list:
        return Trace.empty()
    times = np.concatenate(times_list)
    users = np.concatenate(users_list)
    msgs = np.concatenate(msgs_list)
    # ties keep ascending user order, since inputs are concatenated by user
    order = np.lexsort((users, times))
    return Trace(times[order], users[order], msgs[order])


def generate_botnet_trace(cfg: BotnetConfig, horizon: float, rng=0, user_offset: int = 0) -> Trace:
    """Transmissions of ``cfg.size`` bots over ``(0, horizon]``.

    ``rng`` is an integer seed or a ``SeedSequence``.  Epochs at which the
    emulation dictionary is still empty produce no transmission.
    """
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    if cfg.size == 0:
        return Trace.empty()
    dic = cfg.dictionary
    times_l, users_l, msgs_l = [], [], []
    if isinstance(cfg.scheduling, Synchronous):
        lam = cfg.scheduling.rate
        k = np.arange(1, int(math.floor(lam * horizon * (1 + 1e-12))) + 1)
        epochs = k / lam
        epochs = epochs[epochs <= horizon * (1 + 1e-12)]
    else:
        rates = cfg.scheduling.per_user(cfg.size)
    for u in range(cfg.size):
        g = _user_rng(rng, BOT_STREAM, u)
        t = epochs if isinstance(cfg.scheduling, Synchronous) else poisson_epochs(g, rates[u], horizon)
        sizes = dic.size(t)
        keep = sizes > 0
        t, sizes = t[keep], sizes[keep]
        times_l.append(t)
        users_l.append(np.full(t.size, u + user_offset, dtype=np.int64))
        msgs_l.append(_uniform_index(g, sizes).astype(np.uint64))
    return _assemble(times_l, users_l, msgs_l)


def generate_normal_trace(cfg: NormalConfig, horizon: float, rng=0, user_offset: int = 0) -> Trace:
    """Transmissions of ``cfg.count`` independent normal users over ``(0, horizon]``."""
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    times_l, users_l, msgs_l = [], [], []
    for v in range(cfg.count):
        g = _user_rng(rng, NORMAL_STREAM, v)
        t = poisson_epochs(g, cfg.rate, horizon)
        shared = g.random(t.size) < cfg.p_share
        sizes = np.where(shared,
                         np.floor(cfg.shared_e0 + cfg.shared_rate * t),
                         np.floor(cfg.private_e0 + cfg.private_rate * t)).astype(np.int64)
        keep = sizes > 0
        t, shared, sizes = t[keep], shared[keep], sizes[keep]
        idx = _uniform_index(g, sizes).astype(np.uint64)
        ns = np.where(shared, np.uint64(SHARED_NAMESPACE), np.uint64(private_namespace(v)))
        times_l.append(t)
        users_l.append(np.full(t.size, v + user_offset, dtype=np.int64))
        msgs_l.append(idx | ns)
    return _assemble(times_l, users_l, msgs_l)


def merge_traces(a: Trace, b: Trace, labels_a: dict | None = None, labels_b: dict | None = None,
                 label_a: str = "bot", label_b: str = "normal"):
    """Merge two traces over disjoint user sets.

    Returns ``(trace, labels)``.  Users missing from the label maps are
    labelled ``label_a``/``label_b`` according to their source trace.
    """
    la = dict(labels_a) if labels_a is not None else {}
    lb = dict(labels_b) if labels_b is not None else {}
    la.update({u: label_a for u in np.unique(a.users).tolist() if u not in la})
    lb.update({u: label_b for u in np.unique(b.users).tolist() if u not in lb})
    clash = set(la) & set(lb)
    if clash:
        raise MergeError(f"user indices {sorted(clash)[:10]} appear in both traces")
    if len(a) == 0:
        merged = b
    elif len(b) == 0:
        merged = a
    else:
        times = np.concatenate([a.times, b.times])
        order = np.argsort(times, kind="stable")
        merged = Trace(times[order], np.concatenate([a.users, b.users])[order],
                       np.concatenate([a.msgs, b.msgs])[order])
    return merged, {**la, **lb}


def relabel_users(trace: Trace, labels: dict, perm: Sequence[int]):
    """Rename user ``u`` to ``perm[u]`` in both the trace and the labels."""
    perm = np.asarray(perm, dtype=np.int64)
    users = perm[trace.users] if len(trace) else trace.users
    return Trace(trace.times, users, trace.msgs), {int(perm[u]): lab for u, lab in labels.items()}


@dataclass(frozen=True)
class SimConfig:
    botnet: BotnetConfig = field(default_factory=BotnetConfig)
    normal: NormalConfig = field(default_factory=NormalConfig)
    horizon: float = 120.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def n_users(self) -> int:
        return self.botnet.size + self.normal.count

    def generate(self, seed: int | None = None):
        """Labelled trace ``(trace, labels)``.

        Bots get indices ``0..B-1`` and normal users follow, unless
        ``shuffle`` is set, in which case indices are randomly permuted so
        that the label carries no information about the index.
        """
        seed = self.seed if seed is None else seed
        ss = np.random.SeedSequence(int(seed))
        bots = generate_botnet_trace(self.botnet, self.horizon, ss)
        normals = generate_normal_trace(self.normal, self.horizon, ss, user_offset=self.botnet.size)
        la = {u: "bot" for u in range(self.botnet.size)}
        lb = {self.botnet.size + v: "normal" for v in range(self.normal.count)}
        trace, labels = merge_traces(bots, normals, la, lb)
        if self.shuffle and self.n_users > 1:
            perm = _user_rng(ss, PERMUTE_STREAM, 0).permutation(self.n_users)
            trace, labels = relabel_users(trace, labels, perm)
        return trace, labels

    # flat key/value form used by config files and output headers
    def to_flat(self) -> dict:
        sched = self.botnet.scheduling
        if isinstance(sched, Synchronous):
            mode, rate = "synchronous", sched.rate
        else:
            mode, rate = "poisson", sched.rates if np.ndim(sched.rates) == 0 else list(sched.rates)
        flat = {
            "bot_count": self.botnet.size,
            "bot_scheduling": mode,
            "bot_rate": rate,
            "bot_alpha": self.botnet.dictionary.alpha,
            "bot_e0": self.botnet.dictionary.e0,
            "horizon": self.horizon,
            "seed": self.seed,
            "shuffle": self.shuffle,
        }
        flat.update({f"normal_{k}": v for k, v in asdict(self.normal).items()})
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "SimConfig":
        known = set(cls().to_flat())
        unknown = set(flat) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        base = cls().to_flat()
        base.update(flat)
        mode = base["bot_scheduling"]
        rate = base["bot_rate"]
        try:
            if mode == "synchronous":
                sched = Synchronous(float(rate))
            elif mode == "poisson":
                sched = Poisson(tuple(float(r) for r in rate) if isinstance(rate, (list, tuple))
                                else float(rate))
            else:
                raise ConfigError(f"bot_scheduling must be 'poisson' or 'synchronous', got {mode!r}")
            botnet = BotnetConfig(int(base["bot_count"]), sched,
                                  EmulationDictionary(int(base["bot_e0"]), float(base["bot_alpha"])))
            normal = NormalConfig(
                count=int(base["normal_count"]),
                rate=float(base["normal_rate"]),
                private_rate=float(base["normal_private_rate"]),
                shared_rate=float(base["normal_shared_rate"]),
                p_share=float(base["normal_p_share"]),
                private_e0=int(base["normal_private_e0"]),
                shared_e0=int(base["normal_shared_e0"]),
            )
            return cls(botnet, normal, float(base["horizon"]), int(base["seed"]), bool(base["shuffle"]))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config value: {exc}") from None
