"""Set-partition enumeration and partition-weighted combinatorial sums.

Partitions of ``{0, ..., n-1}`` are streamed via restricted growth strings,
so memory stays constant per item and consumers can fold bound checks
incrementally.  Blocks are emitted sorted by their smallest element, which
makes equality structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

DEFAULT_SIZE_GUARD = 14


class CombinatorialBlowupError(ValueError):
    """Raised when an enumeration would exceed the configured size guard."""

    def __init__(self, n: int, guard: int):
        super().__init__(
            f"refusing to enumerate partitions of {n} elements "
            f"(Bell({n}) = {bell_number(n)} items exceeds guard of {guard} elements); "
            "raise size_guard to opt in"
        )
        self.n = n
        self.guard = guard


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{0, ..., parent_length-1}`` into disjoint blocks.

    Blocks are tuples of sorted positions; the block list is sorted by
    smallest element.
    """

    blocks: tuple
    parent_length: int

    def __post_init__(self):
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty block in partition")
            seen.update(block)
        if seen != set(range(self.parent_length)):
            raise ValueError("blocks do not cover the parent positions")
        if len(seen) != sum(len(b) for b in self.blocks):
            raise ValueError("blocks are not disjoint")

    @classmethod
    def from_blocks(cls, blocks, parent_length=None) -> "SetPartition":
        norm = tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))
        if parent_length is None:
            parent_length = sum(len(b) for b in norm)
        return cls(norm, parent_length)

    def __len__(self):
        return len(self.blocks)


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def _check_guard(n: int, size_guard: int):
    if n > size_guard:
        raise CombinatorialBlowupError(n, size_guard)


def _rgs_strings(n: int) -> Iterator[list]:
    """Restricted growth strings of length n, lexicographic order.

    a[0] = 0 and a[i] <= 1 + max(a[:i]); each string encodes one partition,
    with a[i] the block index of position i.
    """
    a = [0] * n
    # mx[i] = max(a[:i]); position i is incrementable while a[i] <= mx[i]
    mx = [0] * n
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] > mx[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            mx[j] = max(mx[j - 1], a[j - 1])
            a[j] = 0


def _rgs_to_partition(a: Sequence[int], n: int) -> SetPartition:
    blocks = [[] for _ in range(max(a) + 1)]
    for pos, b in enumerate(a):
        blocks[b].append(pos)
    # block indices follow first occurrence, so blocks are already ordered
    # by smallest element
    return SetPartition(tuple(tuple(b) for b in blocks), n)


def enumerate_partitions(n: int, size_guard: int = DEFAULT_SIZE_GUARD) -> Iterator[SetPartition]:
    """Stream every partition of ``{0, ..., n-1}`` exactly once."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_guard(n, size_guard)
    for a in _rgs_strings(n):
        yield _rgs_to_partition(a, n)


def group_ranges(groups, tail=()):
    """Position ranges of concatenated groups; tail occupies the last range."""
    ranges = []
    offset = 0
    for g in groups:
        ranges.append(range(offset, offset + len(g)))
        offset += len(g)
    return ranges, range(offset, offset + len(tail))


def is_restricted(partition: SetPartition, ranges) -> bool:
    """True when no block lies entirely inside a single group range."""
    for block in partition.blocks:
        for rng in ranges:
            if all(pos in rng for pos in block):
                return False
    return True


def enumerate_restricted(groups, tail=(), size_guard: int = DEFAULT_SIZE_GUARD) -> Iterator[SetPartition]:
    """Partitions of the concatenation of groups and tail with no block
    internal to any one group.  Blocks inside the tail are permitted.

    Only the lengths of the groups matter; positions are assigned in
    concatenation order.
    """
    ranges, _ = group_ranges(groups, tail)
    total = sum(len(g) for g in groups) + len(tail)
    if total < 1:
        raise ValueError("need at least one position")
    _check_guard(total, size_guard)
    range_sets = [frozenset(r) for r in ranges]
    for part in enumerate_partitions(total, size_guard=size_guard):
        if is_restricted(part, range_sets):
            yield part


def factorial_partition_sum(n: int, size_guard: int = DEFAULT_SIZE_GUARD) -> int:
    """Exact value of  sum over partitions pi of {1..n} of prod_{S in pi} |S|!.

    Computed by the recurrence obtained by conditioning on the block of the
    last element (choose k-1 companions out of n-1, weight k!):
    a(n) = sum_k C(n-1, k-1) k! a(n-k).  Exact integer arithmetic; the
    streamed enumeration is kept as a test oracle at small n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_guard(n, size_guard)
    a = [1] * (n + 1)
    for m in range(1, n + 1):
        a[m] = sum(
            math.comb(m - 1, k - 1) * math.factorial(k) * a[m - k]
            for k in range(1, m + 1)
        )
    return a[n]


def verify_comb_est(n: int, size_guard: int = DEFAULT_SIZE_GUARD):
    """Check  sum_pi prod |S|!  <=  (2n)! e^(2n)  for partitions of 2n elements."""
    from .reports import BoundReport

    lhs = factorial_partition_sum(2 * n, size_guard=size_guard)
    rhs = math.factorial(2 * n) * math.e ** (2 * n)
    return BoundReport(
        inequality_id="factorial-partition-sum",
        lhs=float(lhs),
        rhs=rhs,
        witnesses={"n": n, "elements": 2 * n, "lhs_exact": str(lhs)},
    )
