"""Odd-even sorting networks over abstract comparator semantics.

The network builder is shared by all comparator interpretations: boolean
constants, NNF node construction, and decision-graph combination.  Inputs
use 0-based list positions; the pseudocode indices of the classical
formulation are 1-based and are shifted here once, at the slicing sites.
"""

from __future__ import annotations

from . import dg as _dg
from .dg import AND, OR, ApplyTask, apply


class ComparatorSemantics:
    """Max/min combination for comparator outputs, plus the padding value.

    On boolean constants max must behave as `or` and min as `and`.  The
    instance counts comparator applications.
    """

    def __init__(self, max_combine, min_combine, false):
        self.max_combine = max_combine
        self.min_combine = min_combine
        self.false = false
        self.comparators = 0

    def compare(self, a, b):
        self.comparators += 1
        return self.max_combine(a, b), self.min_combine(a, b)


def boolean_semantics() -> ComparatorSemantics:
    return ComparatorSemantics(lambda a, b: a | b, lambda a, b: a & b, 0)


def nnf_semantics(arena) -> ComparatorSemantics:
    """Comparators as constant-time NNF node constructors."""
    return ComparatorSemantics(
        lambda a, b: arena.mk_or([a, b]),
        lambda a, b: arena.mk_and([a, b]),
        arena.mk_or([]))


def dg_semantics(arena, task: ApplyTask = None) -> ComparatorSemantics:
    """Comparators as decision-graph apply operations (no longer constant time)."""
    if task is None:
        task = ApplyTask()
    return ComparatorSemantics(
        lambda a, b: apply(arena, a, b, OR, task=task),
        lambda a, b: apply(arena, a, b, AND, task=task),
        _dg.FALSE)


def _check_power_of_two(n, what):
    if n <= 0 or n & (n - 1):
        raise ValueError(f"{what} must be a power of 2, got {n}")


def _merge(a, b, sem, skip_pairs):
    m = len(a)
    if m == 1:
        (va, sa), (vb, sb) = a[0], b[0]
        if skip_pairs and sa is not None and sb == sa + 1 and sa % 2 == 0:
            # the two wires are an original presorted (hi, lo) input pair
            return [a[0], b[0]]
        hi, lo = sem.compare(va, vb)
        return [(hi, None), (lo, None)]
    c = _merge(a[0::2], b[0::2], sem, skip_pairs)
    d = _merge(a[1::2], b[1::2], sem, skip_pairs)
    y = [c[0]]
    for i in range(1, m):
        hi, lo = sem.compare(c[i][0], d[i - 1][0])
        y.append((hi, None))
        y.append((lo, None))
    y.append(d[m - 1])
    return y


def _sortnet(items, sem, skip_pairs):
    if len(items) == 1:
        return items
    m = len(items) // 2
    a = _sortnet(items[:m], sem, skip_pairs)
    b = _sortnet(items[m:], sem, skip_pairs)
    return _merge(a, b, sem, skip_pairs)


def sortnet(inputs, semantics: ComparatorSemantics) -> list:
    """Sorted outputs y_1..y_n (descending) of the odd-even network.

    For circuit-valued inputs, output j (1-based) evaluates true at a world
    iff at least j inputs evaluate true there.
    """
    _check_power_of_two(len(inputs), "sortnet input length")
    items = [(v, None) for v in inputs]
    return [v for v, _ in _sortnet(items, semantics, False)]


def merge(a, b, semantics: ComparatorSemantics) -> list:
    """Merge two individually sorted lists of equal power-of-2 length."""
    if len(a) != len(b):
        raise ValueError(f"merge inputs differ in length: {len(a)} vs {len(b)}")
    _check_power_of_two(len(a), "merge input length")
    out = _merge([(v, None) for v in a], [(v, None) for v in b], semantics, False)
    return [v for v, _ in out]


def sortnet_presorted_pairs(pairs, semantics: ComparatorSemantics) -> list:
    """Sort the interleaved inputs hi_1, lo_1, ..., hi_n, lo_n, skipping the
    first comparator layer.

    Each (hi, lo) pair must already be semantically sorted (hi dominates lo),
    which lets the network omit the comparator that would sort the pair.
    """
    _check_power_of_two(len(pairs), "number of presorted pairs")
    items = []
    for l, (hi, lo) in enumerate(pairs):
        items.append((hi, 2 * l))
        items.append((lo, 2 * l + 1))
    return [v for v, _ in _sortnet(items, semantics, True)]


def merge_comparator_count(m) -> int:
    """Comparators used by one merge of two sorted lists of length m."""
    _check_power_of_two(m, "merge length")
    if m == 1:
        return 1
    return 2 * merge_comparator_count(m // 2) + (m - 1)


def sortnet_comparator_count(n) -> int:
    """Comparators used by the full n-input network (Batcher recurrence)."""
    _check_power_of_two(n, "network width")
    if n == 1:
        return 0
    return 2 * sortnet_comparator_count(n // 2) + merge_comparator_count(n // 2)


def comparator_schedule(n) -> list:
    """Wire-level schedule of the n-input network as (layer, i, j) triples."""
    _check_power_of_two(n, "network width")
    schedule = []
    layer = 0
    p = 1
    while p < n:
        k = p
        while k >= 1:
            found = False
            for j in range(k % p, n - k, 2 * k):
                for i in range(min(k, n - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        schedule.append((layer, i + j, i + j + k))
                        found = True
            if found:
                layer += 1
            k //= 2
        p *= 2
    return schedule
