"""Interaction timelines on a fixed observation window ``[0, T]``.

Each ordered pair of nodes carries an alternating sequence of interaction
(state 1) and non-interaction (state 0) segments. The first and last
segments are cut by the window boundaries, so only their lower bound on
the true length is observed. Everything the likelihood needs from a pair
is summarised by four numbers, see :class:`PairStats`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ValidationError

LENGTH_RTOL = 1e-9


class PairStats(NamedTuple):
    """Sufficient statistics of one pair.

    ``a_plus``/``a_minus`` count the fully observed (embedded) interaction
    and non-interaction segments; ``x_plus``/``x_minus`` are the total
    times spent in each state, truncated segments included.
    """

    a_plus: int
    a_minus: int
    x_plus: float
    x_minus: float


@dataclass(frozen=True, eq=False)
class EdgeTimeline:
    initial_state: int
    lengths: np.ndarray

    def __post_init__(self):
        if self.initial_state not in (0, 1):
            raise ValidationError(f"initial_state must be 0 or 1, got {self.initial_state!r}")
        lengths = np.asarray(self.lengths, dtype=float).reshape(-1)
        if lengths.size == 0:
            raise ValidationError("a timeline needs at least one segment")
        if not np.all(lengths > 0) or not np.all(np.isfinite(lengths)):
            raise ValidationError("segment lengths must be finite and strictly positive")
        lengths.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)

    @property
    def W(self) -> int:
        return int(self.lengths.size)

    @property
    def states(self) -> np.ndarray:
        """State of every segment, alternating from ``initial_state``."""
        parity = np.arange(self.W) % 2
        return np.where(parity == 0, self.initial_state, 1 - self.initial_state)

    @property
    def horizon(self) -> float:
        return float(self.lengths.sum())

    def check_horizon(self, T: float, pair=None) -> None:
        total = self.horizon
        if abs(total - T) > LENGTH_RTOL * max(abs(T), 1.0):
            where = f" for pair {pair}" if pair is not None else ""
            raise ValidationError(f"segment lengths sum to {total!r}, expected T={T!r}{where}")

    def intervals(self) -> list[tuple[float, float]]:
        """Interaction intervals as ``(start, length)`` tuples."""
        starts = np.concatenate(([0.0], np.cumsum(self.lengths)[:-1]))
        on = self.states == 1
        return [(float(s), float(l)) for s, l in zip(starts[on], self.lengths[on])]

    def __eq__(self, other):
        if not isinstance(other, EdgeTimeline):
            return NotImplemented
        return self.initial_state == other.initial_state and np.array_equal(self.lengths, other.lengths)

    def __repr__(self):
        return f"EdgeTimeline(initial_state={self.initial_state}, lengths={self.lengths.tolist()})"


def empty_timeline(T: float) -> EdgeTimeline:
    """Timeline of a pair that never interacts."""
    return EdgeTimeline(0, np.array([float(T)]))


def compute_pair_stats(timeline: EdgeTimeline, T: float | None = None) -> PairStats:
    if T is not None:
        timeline.check_horizon(T)
    lengths = timeline.lengths
    states = timeline.states
    embedded = states[1:-1]
    a_plus = int(embedded.sum())
    a_minus = int(embedded.size - a_plus)
    x_plus = float(lengths[states == 1].sum())
    x_minus = float(lengths[states == 0].sum())
    return PairStats(a_plus, a_minus, x_plus, x_minus)


def pair_log_density(stats: PairStats, mu: float, nu: float) -> float:
    """Log-probability of one pair's timeline under exponential rates.

    Embedded segments contribute a density ``log(rate) - rate * x`` and the
    two truncated ends a survival term ``-rate * x``, which collapses to
    ``a_plus log mu + a_minus log nu - mu x_plus - nu x_minus``.
    """
    if not (mu > 0 and nu > 0):
        raise ValueError(f"rates must be positive, got mu={mu!r}, nu={nu!r}")
    a_plus, a_minus, x_plus, x_minus = stats
    return a_plus * np.log(mu) + a_minus * np.log(nu) - mu * x_plus - nu * x_minus


@dataclass
class NetworkData:
    """All pair timelines of a network observed on ``[0, T]``.

    Node ids are 0-based. In undirected mode only pairs with ``i < j`` are
    stored. Pairs missing from ``timelines`` are treated as never
    interacting.
    """

    N: int
    T: float
    directed: bool = True
    timelines: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("N must be positive")
        if not self.T > 0:
            raise ValidationError("T must be positive")
        for pair, tl in self.timelines.items():
            self._check_pair(pair)
            tl.check_horizon(self.T, pair)

    def _check_pair(self, pair):
        i, j = pair
        if not (0 <= i < self.N and 0 <= j < self.N):
            raise ValidationError(f"pair {pair} out of range for N={self.N}")
        if i == j:
            raise ValidationError(f"self pair {pair} is not allowed")
        if not self.directed and i > j:
            raise ValidationError(f"undirected networks store pairs with i < j, got {pair}")

    def pairs(self) -> Iterator[tuple[int, int]]:
        """All admissible pairs in row-major order."""
        for i in range(self.N):
            for j in range(self.N) if self.directed else range(i + 1, self.N):
                if i != j:
                    yield i, j

    @property
    def n_pairs(self) -> int:
        return self.N * (self.N - 1) // (1 if self.directed else 2)

    def timeline(self, i: int, j: int) -> EdgeTimeline:
        if not self.directed and i > j:
            i, j = j, i
        tl = self.timelines.get((i, j))
        return tl if tl is not None else empty_timeline(self.T)

    def pair_stats(self) -> dict:
        return {p: compute_pair_stats(self.timeline(*p)) for p in self.pairs()}

    def stats_matrix(self) -> "PairStatsMatrix":
        return stats_matrix(self)

    def to_events(self) -> list[tuple[int, int, float, float]]:
        """Interaction records ``(i, j, start, length)`` of every pair."""
        out = []
        for (i, j), tl in sorted(self.timelines.items()):
            out.extend((i, j, s, l) for s, l in tl.intervals())
        return out


@dataclass(eq=False)
class PairStatsMatrix:
    """Pair statistics laid out as ``N x N`` arrays indexed by (sender, receiver).

    Undirected networks fill the upper triangle only; diagonals are zero.
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    n_segments: np.ndarray
    T: float
    directed: bool = True

    @property
    def N(self) -> int:
        return self.a_plus.shape[0]

    @property
    def total_segments(self) -> int:
        return int(self.n_segments.sum())

    def mask(self) -> np.ndarray:
        """Boolean matrix of stored pairs."""
        m = ~np.eye(self.N, dtype=bool)
        return m if self.directed else np.triu(m)

    def get(self, i: int, j: int) -> PairStats:
        return PairStats(int(self.a_plus[i, j]), int(self.a_minus[i, j]),
                         float(self.x_plus[i, j]), float(self.x_minus[i, j]))

    def items(self) -> Iterator[tuple[tuple[int, int], PairStats]]:
        for i, j in zip(*np.nonzero(self.mask())):
            yield (int(i), int(j)), self.get(i, j)


def stats_matrix(network: NetworkData) -> PairStatsMatrix:
    N = network.N
    pairs = list(network.pairs())
    tls = [network.timeline(i, j) for i, j in pairs]
    W = np.array([tl.W for tl in tls], dtype=np.int64)
    init = np.array([tl.initial_state for tl in tls], dtype=np.int64)
    lengths = np.concatenate([tl.lengths for tl in tls]) if tls else np.zeros(0)
    owner = np.repeat(np.arange(len(tls)), W)
    pos = np.arange(lengths.size) - np.repeat(np.cumsum(W) - W, W)
    state = np.where(pos % 2 == 0, init[owner], 1 - init[owner])
    embedded = (pos > 0) & (pos < W[owner] - 1)
    P = len(tls)
    on = state == 1
    ap = np.bincount(owner, weights=(embedded & on), minlength=P)
    am = np.bincount(owner, weights=(embedded & ~on), minlength=P)
    xp = np.bincount(owner, weights=np.where(on, lengths, 0.0), minlength=P)
    xm = np.bincount(owner, weights=np.where(on, 0.0, lengths), minlength=P)

    out = [np.zeros((N, N)) for _ in range(4)]
    ns = np.zeros((N, N), dtype=np.int64)
    if P:
        ii, jj = np.array(pairs).T
        for arr, vals in zip(out, (ap, am, xp, xm)):
            arr[ii, jj] = vals
        ns[ii, jj] = W
    return PairStatsMatrix(*out, ns, float(network.T), network.directed)


def stats_from_pairs(stats: Iterable[PairStats]) -> np.ndarray:
    """Stack an iterable of :class:`PairStats` into a ``(P, 4)`` array."""
    arr = np.array([tuple(s) for s in stats], dtype=float)
    return arr.reshape(-1, 4)


def from_events(records, N: int, T: float, directed: bool = True) -> NetworkData:
    """Build timelines from interaction records ``(i, j, start, length)``.

    Intervals of a pair are sorted and abutting ones merged; the gaps
    become non-interaction segments. Undirected records are folded onto
    ``(min(i, j), max(i, j))``.
    """
    T = float(T)
    by_pair: dict = {}
    for rec in records:
        i, j, t, length = rec
        i, j, t, length = int(i), int(j), float(t), float(length)
        if not directed and i > j:
            i, j = j, i
        if not length > 0:
            raise ValidationError(f"interaction length must be positive, got {length} for pair {(i, j)}")
        if t < 0 or t + length > T * (1 + LENGTH_RTOL):
            raise ValidationError(f"interval [{t}, {t + length}] of pair {(i, j)} leaves [0, {T}]")
        by_pair.setdefault((i, j), []).append((t, t + length))

    timelines = {}
    for pair, ivs in by_pair.items():
        ivs.sort()
        merged = [list(ivs[0])]
        for start, end in ivs[1:]:
            last = merged[-1]
            if start < last[1] - LENGTH_RTOL * T:
                raise ValidationError(f"overlapping intervals for pair {pair}: {tuple(last)} and {(start, end)}")
            if start <= last[1] + LENGTH_RTOL * T:
                last[1] = max(last[1], end)
            else:
                merged.append([start, end])
        timelines[pair] = _timeline_from_intervals(merged, T, pair)

    network = NetworkData(N, T, directed, {})
    for pair in timelines:
        network._check_pair(pair)
    for pair in network.pairs():
        timelines.setdefault(pair, empty_timeline(T))
    network.timelines = timelines
    return network


def _timeline_from_intervals(merged, T, pair) -> EdgeTimeline:
    tol = LENGTH_RTOL * T
    cuts = [0.0]
    for start, end in merged:
        cuts.append(start)
        cuts.append(min(end, T))
    cuts.append(T)
    initial = 1 if merged[0][0] <= tol else 0
    if initial:
        cuts = cuts[0:1] + cuts[2:]
    if cuts[-2] >= T - tol:
        cuts = cuts[:-1]
        cuts[-1] = T
    lengths = np.diff(np.asarray(cuts))
    if np.any(lengths <= 0):
        raise ValidationError(f"degenerate segment while building pair {pair}")
    return EdgeTimeline(initial, lengths)
