"""Partition agreement."""
import numpy as np


def _comb2(x):
    return x * (x - 1) // 2


def pair_counts(a, b):
    """Integer pair counts ``(same_in_both, same_in_a, same_in_b, total_pairs)``."""
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"partitions have different lengths: {a.size} and {b.size}")
    if a.size < 2:
        raise ValueError("need at least two items to compare partitions")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    both = int(_comb2(table).sum())
    same_a = int(_comb2(table.sum(axis=1)).sum())
    same_b = int(_comb2(table.sum(axis=0)).sum())
    return both, same_a, same_b, _comb2(int(a.size))


def ari_from_counts(both, same_a, same_b, total):
    # 2 (M n11 - na nb) / (M (na + nb) - 2 na nb), kept in integers until the division
    num = 2 * (total * both - same_a * same_b)
    den = total * (same_a + same_b) - 2 * same_a * same_b
    if den == 0:
        return 1.0
    return num / den


def adjusted_rand_index(a, b) -> float:
    """Adjusted Rand index between two labelings of the same items.

    Only the induced partitions matter, so labels may be any hashable
    values numpy can sort. Returns 1.0 when the chance-corrected
    denominator vanishes, which happens only for identical trivial
    partitions.

    >>> adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2])
    -0.5
    """
    return ari_from_counts(*pair_counts(a, b))
