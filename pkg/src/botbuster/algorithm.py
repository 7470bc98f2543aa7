"""Greedy pivot-based botnet identification.

For every pivot user the candidate set starts as ``{pivot}`` and each other
user ``j`` (ascending index) joins when the pair ``(candidate, {j})`` passes
the pairwise botnet test.  The largest candidate set of size at least two is
returned, the earliest pivot winning ties.

The implementation evaluates a whole grid of observation times in one pass.
Each user is summarised by its distinct messages and the time each was first
sent; a subnet's dictionary at time ``t`` is then the set of messages whose
earliest first-send time within the subnet is ``<= t``.  The candidate set is
tracked separately for every grid time, and its first-send vector is updated
in place as users are admitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .rr import DEFAULT_EPSILON, check_epsilon, decide_arrays
from .trace import Trace


@dataclass(frozen=True)
class PivotResult:
    pivot: int
    members: frozenset
    became_best: bool


@dataclass(frozen=True)
class BotnetEstimate:
    banned: frozenset
    per_pivot: tuple
    eval_time: float


class TraceIndex:
    """Per-user counts and first-send times on a fixed time grid.

    Attributes
    ----------
    grid : (G,) float array of observation times
    n, d : (N, G) int arrays of transmissions / distinct messages per user
    msg_ids : list of (k_u,) arrays of dense message indices per user
    first_seen : list of (k_u,) arrays, time each message was first sent
    n_messages : size of the dense message index space
    """

    def __init__(self, trace: Trace, n_users: int, grid):
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        if grid.ndim != 1 or grid.size == 0:
            raise DomainError("time grid must be a non-empty 1-d sequence")
        if np.any(grid <= 0):
            raise DomainError("observation times must be positive")
        if np.any(np.diff(grid) < 0):
            raise DomainError("time grid must be non-decreasing")
        if len(trace) and trace.n_users > n_users:
            raise DomainError(f"trace contains user {trace.n_users - 1} but n_users={n_users}")
        self.grid = grid
        self.n_users = n_users
        tr = trace.until(grid[-1])
        _, dense = np.unique(tr.msgs, return_inverse=True)
        self.n_messages = int(dense.max()) + 1 if dense.size else 0
        order = np.argsort(tr.users, kind="stable")
        bounds = np.searchsorted(tr.users[order], np.arange(n_users + 1))
        self.n = np.zeros((n_users, grid.size), dtype=np.int64)
        self.d = np.zeros((n_users, grid.size), dtype=np.int64)
        self.msg_ids, self.first_seen = [], []
        for u in range(n_users):
            idx = order[bounds[u]:bounds[u + 1]]
            times = tr.times[idx]
            ids, first = np.unique(dense[idx], return_index=True)
            fs = times[first]
            self.msg_ids.append(ids)
            self.first_seen.append(fs)
            self.n[u] = np.searchsorted(times, grid, side="right")
            self.d[u] = np.searchsorted(np.sort(fs), grid, side="right")


def botbuster_grid(index: TraceIndex, epsilon: float = DEFAULT_EPSILON, keep_pivots: bool = False):
    """Run the identification at every grid time of ``index``.

    Returns ``(banned, pivots)`` where ``banned`` is a (G, N) boolean array
    and ``pivots`` is None or a list of ``(members (G, N), became_best (G,))``
    per pivot.
    """
    check_epsilon(epsilon)
    N, T = index.n_users, index.grid
    G = T.size
    if N < 2:
        raise ConfigError("identification needs at least two users")
    n, d = index.n, index.d
    ids, fs = index.msg_ids, index.first_seen
    Tcol = T[:, None]

    best = np.zeros((G, N), dtype=bool)
    best_size = np.zeros(G, dtype=np.int64)
    pivots = [] if keep_pivots else None
    first_b = np.full((G, max(index.n_messages, 1)), np.inf)

    for b0 in range(N):
        members = np.zeros((G, N), dtype=bool)
        members[:, b0] = True
        first_b[:, ids[b0]] = fs[b0]
        touched = [ids[b0]]
        nb = n[b0].copy()
        db = d[b0].copy()
        for j in range(N):
            if j == b0 or ids[j].size == 0:
                continue
            gathered = first_b[:, ids[j]]
            common = (np.maximum(gathered, fs[j]) <= Tcol).sum(axis=1)
            # with no common message rho_union == rho_sum >= gamma: never admitted
            rows = np.flatnonzero(common)
            if rows.size == 0:
                continue
            du = db[rows] + d[j, rows] - common[rows]
            ok = decide_arrays(nb[rows], db[rows], n[j, rows], d[j, rows], du, T[rows], epsilon)
            if not ok.any():
                continue
            rows = rows[ok]
            members[rows, j] = True
            nb[rows] += n[j, rows]
            db[rows] = du[ok]
            first_b[np.ix_(rows, ids[j])] = np.minimum(gathered[rows], fs[j])
            touched.append(ids[j])
        size = members.sum(axis=1)
        upd = size > np.maximum(1, best_size)
        best[upd] = members[upd]
        best_size[upd] = size[upd]
        if keep_pivots:
            pivots.append((members, upd))
        for cols in touched:
            first_b[:, cols] = np.inf
    return best, pivots


def botbuster(trace: Trace, n_users: int, t: float, epsilon: float = DEFAULT_EPSILON) -> BotnetEstimate:
    """Estimate the botnet hidden among users ``0..n_users-1`` at time ``t``."""
    if n_users < 2:
        raise ConfigError("identification needs at least two users")
    if not t > 0:
        raise DomainError("observation time must be positive")
    index = TraceIndex(trace, n_users, [t])
    best, pivots = botbuster_grid(index, epsilon, keep_pivots=True)
    per_pivot = tuple(
        PivotResult(b0, frozenset(np.flatnonzero(m[0]).tolist()), bool(upd[0]))
        for b0, (m, upd) in enumerate(pivots)
    )
    return BotnetEstimate(frozenset(np.flatnonzero(best[0]).tolist()), per_pivot, float(t))
