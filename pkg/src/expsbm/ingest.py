"""Turning sampled face-to-face contacts into interaction intervals.

Proximity sensors report a contact between two badges whenever they
exchange packets during a sampling slot (20 s in typical deployments).
An interaction is opened when ``window`` consecutive contacts of a pair
fall within less than ``span_threshold`` seconds, and closed when a run of
``window`` consecutive contacts stretches over more than that.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .timeline import NetworkData, from_events


@dataclass(frozen=True)
class DetectionRule:
    window: int = 5
    span_threshold: float = 300.0
    min_contacts: int = 5

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("window must be at least 2")
        if not self.span_threshold > 0:
            raise ValueError("span_threshold must be positive")


def _open_text(stream):
    if isinstance(stream, (str, os.PathLike)):
        return open(stream, newline="")
    if isinstance(stream, (list, tuple)):
        return io.StringIO("\n".join(stream))
    return stream


def parse_contact_events(stream) -> dict:
    """Read ``t,i,j`` rows into ``{(min id, max id): sorted unique times}``.

    ``stream`` is a path, an open text file or a list of lines. A header
    row starting with ``t`` is skipped; blank lines are ignored.
    """
    f = _open_text(stream)
    raw: dict = {}
    try:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and row[0].strip().lower() in ("t", "time"):
                continue
            try:
                t, i, j = float(row[0]), int(row[1]), int(row[2])
            except (ValueError, IndexError):
                raise ValidationError(f"malformed contact row at line {lineno}: {row!r}") from None
            if len(row) != 3 or t < 0 or i == j or not np.isfinite(t):
                raise ValidationError(f"invalid contact row at line {lineno}: {row!r}")
            raw.setdefault((min(i, j), max(i, j)), []).append(t)
    finally:
        if f is not stream:
            f.close()
    return {pair: np.unique(np.asarray(ts)) for pair, ts in raw.items()}


def detect_interactions(timestamps, rule: DetectionRule = DetectionRule()) -> list[tuple[float, float]]:
    """Interaction intervals ``(start, end)`` of one pair.

    Windows of ``rule.window`` consecutive contacts are scanned in order.
    While idle, a window spanning less than the threshold opens an
    interval at its first contact; while open, a window spanning more than
    the threshold closes it at its first contact. An interval still open
    after the last window ends at the last contact.
    """
    t = np.asarray(timestamps, dtype=float)
    if t.size <= rule.min_contacts or t.size < rule.window:
        return []
    spans = t[rule.window - 1:] - t[: t.size - rule.window + 1]
    intervals = []
    start = None
    for w, span in enumerate(spans):
        if start is None:
            if span < rule.span_threshold:
                start = t[w]
        elif span > rule.span_threshold:
            if t[w] > start:
                intervals.append((float(start), float(t[w])))
            start = None
    if start is not None and t[-1] > start:
        intervals.append((float(start), float(t[-1])))
    return intervals


def detect_all(events: dict, rule: DetectionRule = DetectionRule()) -> dict:
    """Apply :func:`detect_interactions` to every pair; pairs without intervals are dropped."""
    out = {}
    for pair, ts in events.items():
        ivs = detect_interactions(ts, rule)
        if ivs:
            out[pair] = ivs
    return out


def build_network(intervals: dict, N: int, T: float, directed: bool = False) -> NetworkData:
    """Timelines from per-pair ``(start, end)`` intervals with 0-based node ids."""
    records = []
    for (i, j), ivs in intervals.items():
        for start, end in ivs:
            if end > T:
                raise ValidationError(f"interval ({start}, {end}) of pair {(i, j)} ends after T={T}")
            records.append((i, j, start, end - start))
    return from_events(records, N, T, directed)
