"""
Cobweb diagrams: a ring of 2E vertices with a perfect matching of chords.

Boundary segment ``k`` runs from vertex ``k`` to vertex ``k+1`` (mod 2E).
Every chord identifies index lines so that leaving segment ``k`` at vertex
``k+1`` continues on the segment after that vertex's partner; the index
loops are the cycles of ``k -> partner(k+1)``. The empty ring is one loop.

For the OTOC layout the ring is cut into four arcs of T vertices, read in
trace order ``1 | 2b | 2 | 1b``: arcs 1 and 2 hold U's, arcs 2b and 1b hold
U^dagger's, and a Z sits on the segment at each of the four arc interfaces.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

ARC_LABELS = ("1", "2b", "2", "1b")
RED_ARCS = (0, 2)
BLUE_ARCS = (1, 3)


@dataclass(frozen=True)
class CobwebDiagram:
    n_vertices: int
    chords: tuple[tuple[int, int], ...]
    arc_length: int | None = None  # T when laid out as four coloured arcs
    decorations: tuple[int, ...] = ()  # segments carrying a traceless involutory operator

    def __post_init__(self):
        chords = tuple(sorted(tuple(sorted(c)) for c in self.chords))
        object.__setattr__(self, "chords", chords)
        object.__setattr__(self, "decorations", tuple(sorted(self.decorations)))
        if self.n_vertices % 2 or self.n_vertices < 0:
            raise ValueError("a cobweb ring needs an even number of vertices")
        seen = sorted(v for c in chords for v in c)
        if seen != list(range(self.n_vertices)):
            raise ValueError(f"chords {chords} are not a perfect matching of {self.n_vertices} vertices")
        if any(a == b for a, b in chords):
            raise ValueError("chord endpoints must differ")
        if self.arc_length is not None:
            if 4 * self.arc_length != self.n_vertices:
                raise ValueError("coloured layout needs four arcs of equal length")
            for a, b in chords:
                if (self.arc_of(a) in RED_ARCS) == (self.arc_of(b) in RED_ARCS):
                    raise ValueError(f"chord {a}-{b} joins arcs of the same colour")
        if any(not 0 <= s < max(self.n_vertices, 1) for s in self.decorations):
            raise ValueError("decoration on a non-existent segment")

    @property
    def n_edges(self) -> int:
        return len(self.chords)

    @property
    def partner(self) -> list[int]:
        p = [0] * self.n_vertices
        for a, b in self.chords:
            p[a], p[b] = b, a
        return p

    def arc_of(self, v: int) -> int:
        if self.arc_length is None:
            raise ValueError("diagram has no arc colouring")
        return v // self.arc_length

    def chord_classes(self) -> dict[tuple[str, str], int]:
        """Chord counts keyed by (red arc label, blue arc label)."""
        out = {(ARC_LABELS[r], ARC_LABELS[b]): 0 for r in RED_ARCS for b in BLUE_ARCS}
        for a, b in self.chords:
            ra, rb = self.arc_of(a), self.arc_of(b)
            if ra in BLUE_ARCS:
                ra, rb = rb, ra
            out[(ARC_LABELS[ra], ARC_LABELS[rb])] += 1
        return out

    def uncoloured(self) -> "CobwebDiagram":
        return CobwebDiagram(self.n_vertices, self.chords)


def otoc_layout(T: int, chords: Sequence[tuple[int, int]]) -> CobwebDiagram:
    """Coloured four-arc diagram with the interface decorations."""
    return CobwebDiagram(4 * T, tuple(chords), arc_length=T,
                         decorations=tuple((a + 1) * T - 1 for a in range(4)))


def loops(d: CobwebDiagram) -> list[tuple[int, ...]]:
    """Index loops as tuples of boundary segments."""
    if d.n_vertices == 0:
        return [()]
    p = d.partner
    v = d.n_vertices
    seen = [False] * v
    out = []
    for s0 in range(v):
        if seen[s0]:
            continue
        loop = []
        s = s0
        while not seen[s]:
            seen[s] = True
            loop.append(s)
            s = p[(s + 1) % v]
        out.append(tuple(loop))
    return out


def count_loops(d: CobwebDiagram) -> int:
    return len(loops(d))


def crossings(d: CobwebDiagram) -> int:
    count = 0
    for (a, b), (c, e) in itertools.combinations(d.chords, 2):
        if (a < c < b) != (a < e < b):
            count += 1
    return count


def value(d: CobwebDiagram, q: int) -> int:
    """q ** (number of index loops) for an undecorated diagram."""
    if d.decorations:
        raise ValueError("decorated diagram: use decorated_value")
    return q ** count_loops(d)


def decorated_value(d: CobwebDiagram, q: int) -> int:
    """Value with each decoration an involutory traceless operator: loops with an odd count vanish."""
    dec = set(d.decorations)
    total = 1
    for loop in loops(d):
        if sum(s in dec for s in loop) % 2:
            return 0
        total *= q
    return total


# -- reduction -----------------------------------------------------------------

@dataclass(frozen=True)
class ReductionStep:
    rule: str  # "bubble" or "parallel"
    removed: tuple[int, int]  # chord in the labelling before removal
    diagram: CobwebDiagram  # diagram after removal


@dataclass(frozen=True)
class ReductionReport:
    reduced: CobwebDiagram
    removed_parallel: int
    removed_bubble: int
    steps: tuple[ReductionStep, ...] = field(default=(), repr=False)

    @property
    def loop_credits(self) -> int:
        return self.removed_parallel + self.removed_bubble

    def log(self) -> str:
        lines = []
        for i, st in enumerate(self.steps, 1):
            lines.append(f"{i}: {st.rule} removes {st.removed[0]}-{st.removed[1]} -> {format_diagram(st.diagram)}")
        return "\n".join(lines)


def _candidates(d: CobwebDiagram) -> list[tuple[str, tuple[int, int]]]:
    v = d.n_vertices
    p = d.partner
    out = []
    for a, b in d.chords:
        if (b - a) % v == 1 or (a - b) % v == 1:
            out.append(("bubble", (a, b)))
    for a, b in d.chords:
        for i, j in ((a, b), (b, a)):
            i2, j2 = (i + 1) % v, (j - 1) % v
            if i2 != j and p[i2] == j2 and i2 != j2:
                inner = tuple(sorted((i2, j2)))
                if inner != (a, b):
                    out.append(("parallel", inner))
                    out.append(("parallel", (a, b)))
    # unique, stable order
    return list(dict.fromkeys(out))


def _remove(d: CobwebDiagram, chord: tuple[int, int]) -> CobwebDiagram:
    a, b = chord
    keep = [x for x in range(d.n_vertices) if x not in (a, b)]
    relabel = {old: new for new, old in enumerate(keep)}
    chords = tuple((relabel[x], relabel[y]) for x, y in d.chords if (x, y) != (a, b))
    return CobwebDiagram(len(keep), chords)


def reduce(d: CobwebDiagram, rng: random.Random | None = None) -> ReductionReport:
    """Apply the edge-bubble and parallel-edge rules until neither applies.

    Each application deletes one chord and credits one index loop. With
    ``rng`` the applicable move is chosen at random, otherwise the first
    bubble (then parallel pair) in chord order is used.
    """
    cur = d.uncoloured()
    steps = []
    par = bub = 0
    while True:
        cands = _candidates(cur)
        if not cands:
            break
        rule, chord = rng.choice(cands) if rng is not None else cands[0]
        cur = _remove(cur, chord)
        steps.append(ReductionStep(rule, chord, cur))
        if rule == "bubble":
            bub += 1
        else:
            par += 1
    return ReductionReport(cur, par, bub, tuple(steps))


def is_reduced(d: CobwebDiagram) -> bool:
    return not _candidates(d.uncoloured())


# -- enumeration ----------------------------------------------------------------

def all_matchings(n_vertices: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every perfect matching of range(n_vertices), lowest free vertex matched first."""
    def rec(free):
        if not free:
            yield ()
            return
        a = free[0]
        for k in range(1, len(free)):
            rest = free[1:k] + free[k + 1:]
            for m in rec(rest):
                yield ((a, free[k]),) + m
    yield from rec(list(range(n_vertices)))


def random_diagram(n_edges: int, rng: random.Random) -> CobwebDiagram:
    verts = list(range(2 * n_edges))
    rng.shuffle(verts)
    return CobwebDiagram(2 * n_edges, tuple(zip(verts[::2], verts[1::2])))


def coloured_matchings(T: int) -> Iterator[CobwebDiagram]:
    """All colour-legal matchings (U to U^dagger) of the four-arc ring."""
    red = [v for a in RED_ARCS for v in range(a * T, (a + 1) * T)]
    blue = [v for a in BLUE_ARCS for v in range(a * T, (a + 1) * T)]
    for perm_ in itertools.permutations(blue):
        yield otoc_layout(T, tuple(zip(red, perm_)))


def enumerate_leading(T: int) -> list[CobwebDiagram]:
    """Non-vanishing coloured diagrams with the maximal loop count E - 1 (E = 2T)."""
    if not 2 <= T <= 4:
        raise ValueError("T must be in [2, 4]")
    out = []
    for d in coloured_matchings(T):
        if decorated_value(d, 2) and count_loops(d) == 2 * T - 1:
            out.append(d)
    return out


def ladder_diagram(T: int, n_minus: int) -> CobwebDiagram:
    """Ladder with E(1,1b) = E(2,2b) = n_minus and E(1,2b) = E(2,1b) = T - n_minus.

    Each chord class is a bundle of parallel chords; built directly rather
    than by search, so it serves as an independent check on enumeration.
    """
    if not 0 <= n_minus <= T:
        raise ValueError("need 0 <= n_minus <= T")
    a1, a2b, a2, a1b = (k * T for k in range(4))
    n = n_minus
    chords = []
    chords += [(a1 + k, a2 - 1 - k) for k in range(T - n)]        # 1 -> end of 2b
    chords += [(a1 + T - n + j, a1b + n - 1 - j) for j in range(n)]  # 1 -> start of 1b
    chords += [(a2b + j, a1b - 1 - j) for j in range(n)]          # start of 2b -> end of 2
    chords += [(a2 + j, 4 * T - 1 - j) for j in range(T - n)]     # 2 -> end of 1b
    return otoc_layout(T, chords)


def ladder_family(T: int) -> list[CobwebDiagram]:
    """Ladders with 1 <= n_minus <= T-1, the non-vanishing members."""
    return [ladder_diagram(T, n) for n in range(1, T)]


# -- text format ----------------------------------------------------------------

def parse_diagram(text: str) -> CobwebDiagram:
    """``"4; 0-2, 1-3"`` or ``"8; 0-5, ...; colors: 2"``."""
    parts = [p.strip() for p in text.split(";")]
    if not parts or not parts[0].isdigit():
        raise ValueError(f"diagram must start with the vertex count: {text!r}")
    nv = int(parts[0])
    chords = []
    arc = None
    for p in parts[1:]:
        if not p:
            continue
        m = re.fullmatch(r"colou?rs\s*:\s*(\d+)", p)
        if m:
            arc = int(m.group(1))
            continue
        for item in p.split(","):
            item = item.strip()
            if not item:
                continue
            m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", item)
            if not m:
                raise ValueError(f"bad chord {item!r}")
            chords.append((int(m.group(1)), int(m.group(2))))
    if arc is not None:
        if 4 * arc != nv:
            raise ValueError("colors: T requires 4T vertices")
        return otoc_layout(arc, chords)
    return CobwebDiagram(nv, tuple(chords))


def format_diagram(d: CobwebDiagram) -> str:
    s = f"{d.n_vertices}; " + ", ".join(f"{a}-{b}" for a, b in d.chords)
    if d.arc_length is not None:
        s += f"; colors: {d.arc_length}"
    return s
