"""CSV and JSON formats. Node ids and group labels are 1-based on disk."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .timeline import EdgeTimeline, NetworkData, from_events

TIMELINE_HEADER = ["i", "j", "w", "state", "length"]
INTERVAL_HEADER = ["i", "j", "t", "length"]


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True)
    Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_timeline_csv(network: NetworkData, path, sidecar: bool = True) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TIMELINE_HEADER)
        for i, j in network.pairs():
            tl = network.timeline(i, j)
            for w, (state, length) in enumerate(zip(tl.states, tl.lengths), start=1):
                writer.writerow([i + 1, j + 1, w, int(state), _fmt(length)])
    if sidecar:
        write_json(sidecar_path(path), {"schema": 1, "N": network.N, "T": network.T,
                                        "directed": network.directed})


def write_interval_csv(network: NetworkData, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(INTERVAL_HEADER)
        for i, j, t, length in network.to_events():
            writer.writerow([i + 1, j + 1, _fmt(t), _fmt(length)])


def _read_rows(path):
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = [h.strip() for h in next(reader, [])]
        rows = [(n, r) for n, r in enumerate(reader, start=2) if r and any(c.strip() for c in r)]
    return header, rows


def _meta(path, N, T, directed):
    side = sidecar_path(path)
    meta = read_json(side) if side.exists() else {}
    N = N if N is not None else meta.get("N")
    T = T if T is not None else meta.get("T")
    directed = directed if directed is not None else meta.get("directed", True)
    return N, T, directed


def read_timeline_csv(path, N=None, T=None, directed=None) -> NetworkData:
    """Read the long timeline format.

    ``N``, ``T`` and ``directed`` default to the sidecar metadata; failing
    that, to the largest node id, the length sum of the first pair, and
    ``True``.
    """
    header, rows = _read_rows(path)
    if header != TIMELINE_HEADER:
        raise ValidationError(f"{path}: expected header {','.join(TIMELINE_HEADER)}")
    N, T, directed = _meta(path, N, T, directed)
    grouped: dict = {}
    max_id = 0
    for lineno, row in rows:
        try:
            i, j, w, state, length = int(row[0]), int(row[1]), int(row[2]), int(row[3]), float(row[4])
        except (ValueError, IndexError):
            raise ValidationError(f"{path}: malformed row at line {lineno}") from None
        if i < 1 or j < 1:
            raise ValidationError(f"{path}: node ids are 1-based (line {lineno})")
        max_id = max(max_id, i, j)
        grouped.setdefault((i - 1, j - 1), []).append((w, state, length, lineno))

    timelines = {}
    for (i, j), segs in grouped.items():
        segs.sort()
        ws = [s[0] for s in segs]
        if ws != list(range(1, len(segs) + 1)):
            raise ValidationError(f"{path}: segment indices of pair {(i + 1, j + 1)} are not 1..W")
        states = [s[1] for s in segs]
        if any(a == b for a, b in zip(states, states[1:])) or any(s not in (0, 1) for s in states):
            raise ValidationError(f"{path}: states of pair {(i + 1, j + 1)} do not alternate")
        if not directed and i > j:
            i, j = j, i
        if (i, j) in timelines:
            raise ValidationError(f"{path}: pair {(i + 1, j + 1)} listed twice")
        timelines[(i, j)] = EdgeTimeline(states[0], np.array([s[2] for s in segs]))
    if T is None:
        if not timelines:
            raise ValidationError(f"{path}: cannot infer T from an empty file")
        T = next(iter(timelines.values())).horizon
    N = max_id if N is None else N
    return NetworkData(int(N), float(T), bool(directed), timelines)


def read_interval_csv(path, N=None, T=None, directed=None) -> NetworkData:
    header, rows = _read_rows(path)
    if header != INTERVAL_HEADER:
        raise ValidationError(f"{path}: expected header {','.join(INTERVAL_HEADER)}")
    N, T, directed = _meta(path, N, T, directed)
    if T is None:
        raise ValidationError("the horizon T must be given for interval files")
    records = []
    max_id = 0
    for lineno, row in rows:
        try:
            i, j, t, length = int(row[0]), int(row[1]), float(row[2]), float(row[3])
        except (ValueError, IndexError):
            raise ValidationError(f"{path}: malformed row at line {lineno}") from None
        if i < 1 or j < 1:
            raise ValidationError(f"{path}: node ids are 1-based (line {lineno})")
        max_id = max(max_id, i, j)
        records.append((i - 1, j - 1, t, length))
    N = max_id if N is None else N
    return from_events(records, int(N), float(T), bool(directed))


def read_network(path, N=None, T=None, directed=None) -> NetworkData:
    """Read either CSV format, chosen by header."""
    with open(path, newline="") as f:
        header = [h.strip() for h in next(csv.reader(f), [])]
    if header == TIMELINE_HEADER:
        return read_timeline_csv(path, N, T, directed)
    if header == INTERVAL_HEADER:
        return read_interval_csv(path, N, T, directed)
    raise ValidationError(f"{path}: unrecognised header {header}")


def write_labels(path, z) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["i", "z"])
        for i, label in enumerate(np.asarray(z, dtype=int), start=1):
            writer.writerow([i, int(label) + 1])


def read_labels(path) -> np.ndarray:
    """0-based labels ordered by node id."""
    header, rows = _read_rows(path)
    if header != ["i", "z"]:
        raise ValidationError(f"{path}: expected header i,z")
    pairs = []
    for lineno, row in rows:
        try:
            pairs.append((int(row[0]), int(row[1])))
        except (ValueError, IndexError):
            raise ValidationError(f"{path}: malformed row at line {lineno}") from None
    pairs.sort()
    if [p[0] for p in pairs] != list(range(1, len(pairs) + 1)):
        raise ValidationError(f"{path}: node ids must run 1..N")
    return np.array([p[1] - 1 for p in pairs], dtype=int)
