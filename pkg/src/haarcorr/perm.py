"""
Permutations of S_n in 0-based one-line form.

A permutation is a tuple ``p`` with ``p[i]`` the image of ``i``. Cycle
notation (1-based, e.g. ``"(1 2)(3 4)"``) is only used for text I/O.

>>> compose((1, 0, 2), (0, 2, 1))
(1, 2, 0)
>>> cycle_stats((1, 2, 0))
CycleStats(cycle_lengths=(3,), num_cycles=1, transposition_distance=2, parity=1)
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

Permutation = tuple[int, ...]

MAX_ENUMERATE = 10


@dataclass(frozen=True)
class CycleStats:
    cycle_lengths: tuple[int, ...]  # sorted, descending
    num_cycles: int
    transposition_distance: int
    parity: int


def validate(p: Sequence[int]) -> Permutation:
    """Return ``p`` as a tuple, raising ValueError unless it is a bijection on range(n)."""
    p = tuple(int(i) for i in p)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of range({len(p)}): {p}")
    return p


def identity(n: int) -> Permutation:
    return tuple(range(n))


def compose(p: Sequence[int], r: Sequence[int]) -> Permutation:
    """The permutation ``i -> p[r[i]]``."""
    if len(p) != len(r):
        raise ValueError(f"size mismatch: {len(p)} vs {len(r)}")
    return tuple(p[j] for j in r)


def inverse(p: Sequence[int]) -> Permutation:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def cycles(p: Sequence[int]) -> list[tuple[int, ...]]:
    """Disjoint cycles of ``p``, each starting at its smallest element, in order of that element."""
    seen = [False] * len(p)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = p[i]
        out.append(tuple(cyc))
    return out


def cycle_type(p: Sequence[int]) -> tuple[int, ...]:
    """Cycle lengths as a partition of n (descending)."""
    return tuple(sorted((len(c) for c in cycles(p)), reverse=True))


def num_cycles(p: Sequence[int]) -> int:
    seen = [False] * len(p)
    count = 0
    for start in range(len(p)):
        if seen[start]:
            continue
        count += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = p[i]
    return count


def cycle_stats(p: Sequence[int]) -> CycleStats:
    lengths = cycle_type(p)
    dist = len(p) - len(lengths)
    return CycleStats(lengths, len(lengths), dist, -1 if dist % 2 else 1)


def transposition_distance(p: Sequence[int]) -> int:
    """Minimum number of transpositions whose product is ``p``."""
    return len(p) - num_cycles(p)


def parity(p: Sequence[int]) -> int:
    return -1 if transposition_distance(p) % 2 else 1


def is_even_cycle_only(p: Sequence[int]) -> bool:
    """True iff every cycle of ``p`` has even length (identity on zero points counts)."""
    return all(len(c) % 2 == 0 for c in cycles(p))


def catalan(k: int) -> int:
    if k < 0:
        raise ValueError("catalan index must be non-negative")
    return math.comb(2 * k, k) // (k + 1)


def enumerate_perms(n: int) -> Iterator[Permutation]:
    """All n! permutations of range(n) in lexicographic order."""
    if n < 0 or n > MAX_ENUMERATE:
        raise ValueError(f"n={n} outside supported range [0, {MAX_ENUMERATE}]")
    return itertools.permutations(range(n))


def canonical_pi(n: int) -> Permutation:
    """The n-cycle ``i -> i+1 (mod n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return tuple((i + 1) % n for i in range(n))


def partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Integer partitions of n in descending part order, reverse-lexicographically."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in partitions(n - k, k):
            yield (k,) + rest


def representative(cycle_type_: Sequence[int]) -> Permutation:
    """A permutation with the given cycle type, cycles on consecutive blocks."""
    images: list[int] = []
    start = 0
    for length in cycle_type_:
        images.extend(start + (i + 1) % length for i in range(length))
        start += length
    return tuple(images)


def from_cycles(cyc: Sequence[Sequence[int]], n: int) -> Permutation:
    """Build a permutation of range(n) from 0-based cycles; unlisted points are fixed."""
    images = list(range(n))
    seen: set[int] = set()
    for c in cyc:
        for a, b in zip(c, list(c[1:]) + [c[0]]):
            if a in seen or not 0 <= a < n:
                raise ValueError(f"bad cycle entry {a} for n={n}")
            seen.add(a)
            images[a] = b
    return validate(images)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int | None = None) -> Permutation:
    """Parse 1-based cycle notation such as ``"(1 2)(3 4)"``.

    ``n`` defaults to the largest point mentioned. ``"()"`` or ``""`` with
    ``n`` given is the identity.
    """
    stripped = _CYCLE_RE.sub("", text).strip()
    if stripped:
        raise ValueError(f"unparseable cycle notation: {text!r}")
    cyc = []
    for body in _CYCLE_RE.findall(text):
        items = body.replace(",", " ").split()
        if items:
            cyc.append([int(x) - 1 for x in items])
    if n is None:
        n = max((max(c) for c in cyc if c), default=-1) + 1
    return from_cycles(cyc, n)


def format_cycles(p: Sequence[int], include_fixed: bool = False) -> str:
    """1-based cycle notation; the identity prints as ``"()"``."""
    parts = []
    for c in cycles(p):
        if len(c) == 1 and not include_fixed:
            continue
        parts.append("(" + " ".join(str(i + 1) for i in c) + ")")
    return "".join(parts) or "()"
