"""
Polynomial trace expressions in one random unitary U and fixed operators.

An expression is ``prefactor * prod_f Tr(word_f)`` where each word is a cyclic
sequence of atoms: ``UPow(k)`` for U^k (negative k means powers of U^dagger)
or ``Fixed(name)`` referring to a q x q matrix in ``operators``.

Text form, as used by the CLI::

    tr[ Z U Z U^-1 ] * tr[ U^2 U^-2 ]

Scalar factors ``2``, ``0.5``, ``q``, ``1/q`` and ``q^-2`` may appear between
the ``*`` separators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

MAX_POWER = 64


@dataclass(frozen=True)
class UPow:
    k: int

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("UPow exponent must be nonzero")


@dataclass(frozen=True)
class Fixed:
    op: str


Atom = Union[UPow, Fixed]
Word = tuple[Atom, ...]


@dataclass(frozen=True)
class MomentExpression:
    factors: tuple[Word, ...]
    operators: Mapping[str, np.ndarray] = field(default_factory=dict, compare=False)
    prefactor: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(w) for w in self.factors))
        for word in self.factors:
            for atom in word:
                if isinstance(atom, Fixed) and atom.op not in self.operators:
                    raise KeyError(f"operator {atom.op!r} is not bound")
                if not isinstance(atom, (UPow, Fixed)):
                    raise TypeError(f"bad atom {atom!r}")

    @property
    def n_u(self) -> int:
        """Number of single U factors after expanding powers."""
        return sum(a.k for w in self.factors for a in w if isinstance(a, UPow) and a.k > 0)

    @property
    def n_udag(self) -> int:
        return sum(-a.k for w in self.factors for a in w if isinstance(a, UPow) and a.k < 0)

    def dimension(self) -> int | None:
        shapes = {m.shape for m in self.operators.values()}
        if not shapes:
            return None
        if len(shapes) > 1:
            raise ValueError(f"operators have inconsistent shapes {shapes}")
        (shape,) = shapes
        if shape[0] != shape[1]:
            raise ValueError(f"operators must be square, got {shape}")
        return shape[0]

    def __mul__(self, other: "MomentExpression") -> "MomentExpression":
        ops = dict(self.operators)
        for name, mat in other.operators.items():
            if name in ops and not np.array_equal(ops[name], mat):
                raise ValueError(f"operator {name!r} bound to different matrices")
            ops[name] = mat
        return MomentExpression(self.factors + other.factors, ops, self.prefactor * other.prefactor)


def word_from_tokens(tokens: Iterable[str]) -> Word:
    atoms: list[Atom] = []
    for tok in tokens:
        if tok == "U":
            atoms.append(UPow(1))
        elif tok.startswith("U^"):
            atoms.append(UPow(int(tok[2:])))
        elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_†']*", tok):
            atoms.append(Fixed(tok))
        else:
            raise ValueError(f"bad atom token {tok!r}")
    return tuple(atoms)


_TRACE_RE = re.compile(r"^tr\[(.*)\]$", re.S)


def _scalar(tok: str, q: int | None) -> complex:
    tok = tok.replace(" ", "")
    m = re.fullmatch(r"(1/)?q(\^(-?\d+))?", tok)
    if m:
        if q is None:
            raise ValueError("expression uses q but no q was given")
        power = int(m.group(3) or 1)
        if m.group(1):
            power = -power
        return float(q) ** power
    return complex(tok)


def parse_expression(text: str, operators: Mapping[str, np.ndarray] | None = None,
                     q: int | None = None) -> MomentExpression:
    """Parse ``"tr[ Z U Z U^-1 ] * q^-1"`` style text."""
    operators = dict(operators or {})
    factors: list[Word] = []
    prefactor: complex = 1.0
    for part in text.split("*"):
        part = part.strip()
        if not part:
            raise ValueError(f"empty factor in {text!r}")
        m = _TRACE_RE.match(part)
        if m:
            factors.append(word_from_tokens(m.group(1).split()))
        else:
            prefactor *= _scalar(part, q)
    return MomentExpression(tuple(factors), operators, prefactor)


def format_word(word: Sequence[Atom]) -> str:
    toks = []
    for a in word:
        if isinstance(a, Fixed):
            toks.append(a.op)
        else:
            toks.append("U" if a.k == 1 else f"U^{a.k}")
    return "tr[ " + " ".join(toks) + " ]"


def format_expression(expr: MomentExpression) -> str:
    parts = [format_word(w) for w in expr.factors]
    if expr.prefactor != 1:
        pf = expr.prefactor
        parts.insert(0, repr(pf.real) if isinstance(pf, complex) and pf.imag == 0 else repr(pf))
    return " * ".join(parts)


def adjoint_name(name: str) -> str:
    return name[:-1] if name.endswith("†") else name + "†"


def adjoint_word(word: Sequence[Atom], operators: dict[str, np.ndarray]) -> Word:
    """Word for the complex conjugate of ``Tr(word)``: reversed, powers inverted, operators adjointed.

    Adjoint matrices are registered in ``operators`` (mutated) unless the
    operator is Hermitian, in which case the same name is reused.
    """
    out: list[Atom] = []
    for a in reversed(word):
        if isinstance(a, UPow):
            out.append(UPow(-a.k))
            continue
        mat = operators[a.op]
        adj = mat.conj().T
        if np.array_equal(adj, mat):
            out.append(a)
            continue
        name = adjoint_name(a.op)
        if name in operators and not np.allclose(operators[name], adj):
            raise ValueError(f"name {name!r} already bound to a non-adjoint matrix")
        operators[name] = adj
        out.append(Fixed(name))
    return tuple(out)


def trace_power_expression(a: Sequence[int], b: Sequence[int]) -> MomentExpression:
    """``prod_m Tr(U^m)^a_m Tr(U^-m)^b_m`` with ``a[m-1] = a_m``."""
    factors: list[Word] = []
    for m, count in enumerate(a, start=1):
        factors.extend([(UPow(m),)] * count)
    for m, count in enumerate(b, start=1):
        factors.extend([(UPow(-m),)] * count)
    return MomentExpression(tuple(factors))


class PowerCache:
    """Integer powers of a fixed unitary by repeated multiplication."""

    def __init__(self, u: np.ndarray):
        self.u = u
        self._pos = {1: u}

    def __call__(self, k: int) -> np.ndarray:
        if abs(k) > MAX_POWER:
            raise ValueError(f"|power| {abs(k)} exceeds guard {MAX_POWER}")
        if k < 0:
            return self(-k).conj().T
        if k not in self._pos:
            top = max(self._pos)
            mat = self._pos[top]
            while top < k:
                mat = mat @ self.u
                top += 1
                self._pos[top] = mat
        return self._pos[k]


def merge_powers(word: Sequence[Atom]) -> Word:
    """Combine cyclically adjacent unitary powers, dropping those that cancel."""
    out: list[Atom] = []
    for a in word:
        if isinstance(a, UPow) and out and isinstance(out[-1], UPow):
            k = out.pop().k + a.k
            if k:
                out.append(UPow(k))
        else:
            out.append(a)
    while len(out) > 1 and isinstance(out[0], UPow) and isinstance(out[-1], UPow):
        k = out.pop().k + out.pop(0).k
        if k:
            out.insert(0, UPow(k))
    return tuple(out)


def evaluate(expr: MomentExpression, u: np.ndarray) -> complex:
    """Value of the expression at a fixed unitary ``u``."""
    powers = PowerCache(u)
    q = u.shape[0]
    total: complex = complex(expr.prefactor)
    for word in expr.factors:
        mat = None
        for a in merge_powers(word):
            m = powers(a.k) if isinstance(a, UPow) else expr.operators[a.op]
            mat = m if mat is None else mat @ m
        total *= complex(np.trace(mat)) if mat is not None else q
    return total
