"""Pure-Python kernels.  Bitsets are Python ints: bit ``i`` is attribute ``i``."""

from __future__ import annotations

from typing import Sequence


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def closure(rows: Sequence[int], n_attrs: int, mask: int) -> int:
    """Intent of the extent of ``mask``; all attributes when the extent is empty."""
    out = (1 << n_attrs) - 1
    for r in rows:
        if r & mask == mask:
            out &= r
    return out


def extent(rows: Sequence[int], mask: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        if r & mask == mask:
            out |= 1 << i
    return out


def next_closure_intents(rows: Sequence[int], n_attrs: int) -> list[int]:
    """Every closed attribute set, in lectic order (Ganter's Next-Closure)."""
    current = closure(rows, n_attrs, 0)
    out = [current]
    full = (1 << n_attrs) - 1
    while current != full:
        for i in range(n_attrs - 1, -1, -1):
            bit = 1 << i
            if current & bit:
                continue
            low = bit - 1
            candidate = closure(rows, n_attrs, (current & low) | bit)
            if candidate & low == current & low:
                current = candidate
                break
        else:  # pragma: no cover - unreachable for a valid context
            break
        out.append(current)
    return out


def cover_pairs(intents: Sequence[int]) -> list[tuple[int, int]]:
    """``(lower, upper)`` index pairs of the covering relation; lower has the larger intent."""
    pairs = []
    n = len(intents)
    for lo in range(n):
        a = intents[lo]
        ups = [u for u in range(n) if u != lo and intents[u] & a == intents[u] and intents[u] != a]
        for u in ups:
            b = intents[u]
            if not any(
                k != u and intents[k] & a == intents[k] and intents[k] != a
                and b & intents[k] == b and intents[k] != b
                for k in ups
            ):
                pairs.append((lo, u))
    return pairs
