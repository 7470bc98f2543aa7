"""Trace events, subnets and empirical dictionaries.

A trace is a time-sorted sequence of ``(time, user, msg)`` transmissions.  It
is stored column-wise in numpy arrays so that the generator and the detector
can share it without copying, while :class:`TraceEvent` gives the row view
used by the streaming accumulator.

On disk a trace is a line-oriented text file::

    # comment lines are allowed anywhere
    time,user,msg
    0.731,3,17
    1.0,0,42

The header row is optional.  ``msg`` is an unsigned 64-bit identifier; for
ingested traffic it is expected to be a content hash (see
:func:`message_id`), and a hash collision can only merge two dictionary
entries, which lowers the measured innovation rate.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import DisjointnessError, DomainError, OrderingError, TraceFormatError

MessageId = int

_U64_MAX = (1 << 64) - 1
TRACE_HEADER = "time,user,msg"
LABEL_HEADER = "user,label"
LABELS = ("bot", "normal")


def message_id(content: bytes | str) -> MessageId:
    """64-bit content hash used as the message identity of ingested traffic."""
    if isinstance(content, str):
        content = content.encode("utf-8")
    digest = hashlib.blake2b(content, digest_size=8).digest()
    return int.from_bytes(digest, "big")


class TraceEvent(NamedTuple):
    time: float
    user: int
    msg: MessageId


@dataclass(frozen=True)
class Trace:
    """Column-oriented, time-sorted trace."""

    times: np.ndarray
    users: np.ndarray
    msgs: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        users = np.ascontiguousarray(self.users, dtype=np.int64)
        msgs = np.ascontiguousarray(self.msgs, dtype=np.uint64)
        if not (times.shape == users.shape == msgs.shape) or times.ndim != 1:
            raise ValueError("trace columns must be 1-d arrays of equal length")
        if times.size:
            if not np.all(np.isfinite(times)) or times[0] < 0:
                raise DomainError("event times must be finite and nonnegative")
            if np.any(np.diff(times) < 0):
                raise OrderingError("trace events are not sorted by time")
            if users.min() < 0:
                raise DomainError("user indices must be nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "msgs", msgs)

    @classmethod
    def empty(cls) -> "Trace":
        return cls(np.empty(0), np.empty(0, np.int64), np.empty(0, np.uint64))

    @classmethod
    def from_events(cls, events: Iterable[TraceEvent | tuple]) -> "Trace":
        rows = list(events)
        if not rows:
            return cls.empty()
        times, users, msgs = zip(*rows)
        return cls(np.array(times, dtype=np.float64),
                   np.array(users, dtype=np.int64),
                   np.array(msgs, dtype=np.uint64))

    def __len__(self) -> int:
        return int(self.times.size)

    def __iter__(self) -> Iterator[TraceEvent]:
        for t, u, m in zip(self.times.tolist(), self.users.tolist(), self.msgs.tolist()):
            yield TraceEvent(t, u, m)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (np.array_equal(self.times, other.times)
                and np.array_equal(self.users, other.users)
                and np.array_equal(self.msgs, other.msgs))

    @property
    def n_users(self) -> int:
        """One past the largest user index present (0 for an empty trace)."""
        return int(self.users.max()) + 1 if self.users.size else 0

    def until(self, t: float) -> "Trace":
        """Prefix of events with ``time <= t``."""
        k = int(np.searchsorted(self.times, t, side="right"))
        return Trace(self.times[:k], self.users[:k], self.msgs[:k])


class Subnet(frozenset):
    """Set of user indices."""

    @classmethod
    def parse(cls, text: str) -> "Subnet":
        """Parse a comma separated user list such as ``"0,3,7"``; ranges like ``2-5`` are allowed."""
        members = set()
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-", 1)
                members.update(range(int(lo), int(hi) + 1))
            else:
                members.add(int(part))
        if not members:
            raise DomainError(f"empty subnet spec {text!r}")
        return cls(members)


@dataclass
class SubnetStats:
    """Running transmission count and empirical dictionary of one subnet.

    ``horizon`` is the observation time the counts refer to.  The object is a
    single-writer accumulator: :func:`fold_event` mutates it in place.
    """

    n_events: int = 0
    dict: set = field(default_factory=set)
    horizon: float = 0.0

    @property
    def dict_size(self) -> int:
        return len(self.dict)

    def copy(self) -> "SubnetStats":
        return SubnetStats(self.n_events, set(self.dict), self.horizon)


def fold_event(stats: SubnetStats, ev: TraceEvent, subnet: Subnet | frozenset | set) -> SubnetStats:
    """Fold one event into ``stats`` and return it.

    Events from users outside ``subnet`` only advance the horizon.
    """
    if ev.time < stats.horizon:
        raise OrderingError(f"event at t={ev.time} folded after horizon {stats.horizon}")
    stats.horizon = float(ev.time)
    if ev.user in subnet:
        stats.n_events += 1
        stats.dict.add(ev.msg)
    return stats


def advance(stats: SubnetStats, t: float) -> SubnetStats:
    """Move the observation horizon forward to ``t`` without new events."""
    if t < stats.horizon:
        raise OrderingError(f"cannot move horizon back from {stats.horizon} to {t}")
    stats.horizon = float(t)
    return stats


def subnet_stats(trace: Trace, subnet, t: float) -> SubnetStats:
    """Batch construction of the stats of ``subnet`` over events with ``time <= t``."""
    if t <= 0:
        raise DomainError("observation time must be positive")
    k = int(np.searchsorted(trace.times, t, side="right"))
    users = trace.users[:k]
    mask = np.isin(users, np.fromiter(subnet, dtype=np.int64, count=len(subnet)))
    msgs = trace.msgs[:k][mask]
    return SubnetStats(int(mask.sum()), set(msgs.tolist()), float(t))


def stream_stats(trace: Trace, subnet, t: float) -> SubnetStats:
    """Event-by-event construction; same result as :func:`subnet_stats`."""
    stats = SubnetStats()
    for ev in trace:
        if ev.time > t:
            break
        fold_event(stats, ev, subnet)
    return advance(stats, t)


def union_stats(trace: Trace, s1, s2, t: float) -> tuple[SubnetStats, SubnetStats, SubnetStats]:
    """Stats of ``s1``, ``s2`` and ``s1 | s2`` at time ``t``.

    The union is built from the two parts (dictionary set-union, summed
    counts) rather than by a third pass over the trace.
    """
    s1, s2 = frozenset(s1), frozenset(s2)
    if s1 & s2:
        raise DisjointnessError(f"subnets overlap on users {sorted(s1 & s2)}")
    if t <= 0:
        raise DomainError("observation time must be positive")
    a = subnet_stats(trace, s1, t)
    b = subnet_stats(trace, s2, t)
    u = SubnetStats(a.n_events + b.n_events, a.dict | b.dict, float(t))
    return a, b, u


# -- text I/O ---------------------------------------------------------------

def format_header(config: dict | None) -> list[str]:
    """Comment lines echoing a resolved configuration."""
    if not config:
        return []
    return [f"# {key} = {config[key]!r}" for key in sorted(config)]


def write_trace(path, trace: Trace, comments: Iterable[str] = ()) -> None:
    lines = [c if c.startswith("#") else f"# {c}" for c in comments]
    lines.append(TRACE_HEADER)
    lines.extend(f"{t!r},{u},{m}" for t, u, m in
                 zip(trace.times.tolist(), trace.users.tolist(), trace.msgs.tolist()))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_trace_lines(lines: Iterable[str], path=None) -> Trace:
    times, users, msgs = [], [], []
    last = 0.0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line == TRACE_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise TraceFormatError(f"expected 3 fields, got {len(parts)}", lineno, path)
        try:
            t = float(parts[0])
            u = int(parts[1])
            m = int(parts[2])
        except ValueError as exc:
            raise TraceFormatError(f"bad field ({exc})", lineno, path) from None
        if not np.isfinite(t) or t < 0:
            raise TraceFormatError(f"bad time {parts[0]!r}", lineno, path)
        if u < 0:
            raise TraceFormatError(f"negative user {u}", lineno, path)
        if not 0 <= m <= _U64_MAX:
            raise TraceFormatError(f"message id {m} outside unsigned 64-bit range", lineno, path)
        if t < last:
            raise TraceFormatError(f"time {t} precedes previous event at {last}", lineno, path)
        last = t
        times.append(t)
        users.append(u)
        msgs.append(m)
    if not times:
        return Trace.empty()
    return Trace(np.array(times), np.array(users, dtype=np.int64), np.array(msgs, dtype=np.uint64))


def read_trace(path) -> Trace:
    try:
        with open(path) as fh:
            return parse_trace_lines(fh, path=str(path))
    except OSError as exc:
        raise TraceFormatError(f"cannot read trace: {exc.strerror}", path=str(path)) from None


def write_labels(path, labels: dict[int, str], comments: Iterable[str] = ()) -> None:
    lines = [c if c.startswith("#") else f"# {c}" for c in comments]
    lines.append(LABEL_HEADER)
    lines.extend(f"{u},{labels[u]}" for u in sorted(labels))
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> dict[int, str]:
    labels = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise TraceFormatError(f"cannot read labels: {exc.strerror}", path=str(path)) from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line == LABEL_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 2 or parts[1] not in LABELS:
                raise TraceFormatError(f"bad label record {line!r}", lineno, str(path))
            try:
                labels[int(parts[0])] = parts[1]
            except ValueError:
                raise TraceFormatError(f"bad user {parts[0]!r}", lineno, str(path)) from None
    return labels
