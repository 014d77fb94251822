"""
Unitary Weingarten function Wg(q, sigma) for S_n.

The exact values solve the Gram system ``sum_tau Wg(sigma tau^-1) q^#(tau) =
[sigma == e]``. Because Wg is a class function the system is solved on cycle
types only (p(n) unknowns), either in float64 or in exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

import numpy as np

from . import perm

MAX_GRAM_N = 6
MAX_WG_N = 7


@dataclass(frozen=True)
class WeingartenTable:
    n: int
    q: float | Fraction
    values: dict[tuple[int, ...], float | Fraction] = field(repr=False)

    def __call__(self, sigma: Sequence[int]) -> float | Fraction:
        return self.values[perm.cycle_type(sigma)]


def gram_matrix(n: int, q: float) -> np.ndarray:
    """``G[s, t] = q ** #cycles(s t^-1)`` with rows/cols in lexicographic S_n order."""
    if not 1 <= n <= MAX_GRAM_N:
        raise ValueError(f"n={n} outside [1, {MAX_GRAM_N}]")
    if q <= 0:
        raise ValueError("q must be positive")
    elems = list(perm.enumerate_perms(n))
    inv = [perm.inverse(t) for t in elems]
    g = np.empty((len(elems), len(elems)))
    for i, s in enumerate(elems):
        for j, ti in enumerate(inv):
            g[i, j] = float(q) ** perm.num_cycles(perm.compose(s, ti))
    return g


@lru_cache(maxsize=None)
def _class_counts(n: int) -> tuple[tuple[tuple[int, ...], ...], tuple[dict[tuple[tuple[int, ...], int], int], ...]]:
    # For each class representative sigma, count tau by (type(sigma tau^-1), #cycles(tau)).
    types = tuple(perm.partitions(n))
    rows = []
    for lam in types:
        sigma = perm.representative(lam)
        counts: dict[tuple[tuple[int, ...], int], int] = {}
        for tau in perm.enumerate_perms(n):
            key = (perm.cycle_type(perm.compose(sigma, perm.inverse(tau))), perm.num_cycles(tau))
            counts[key] = counts.get(key, 0) + 1
        rows.append(counts)
    return types, tuple(rows)


def _solve_fraction(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular Weingarten system")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _check_args(n: int, q) -> None:
    if not 1 <= n <= MAX_WG_N:
        raise ValueError(f"n={n} outside [1, {MAX_WG_N}]")
    if q < n:
        raise ValueError(f"q={q} < n={n}: Gram matrix is singular or outside the supported regime")


@lru_cache(maxsize=256)
def weingarten_table(n: int, q: float | int | Fraction, exact: bool = False) -> WeingartenTable:
    """Wg for every cycle type of S_n.

    With ``exact=True`` and rational ``q`` the values are Fractions.
    """
    _check_args(n, q)
    types, rows = _class_counts(n)
    index = {lam: i for i, lam in enumerate(types)}
    ident = tuple([1] * n)
    if exact:
        if not isinstance(q, Rational):
            raise TypeError("exact Weingarten values need an integer or Fraction q")
        qf = Fraction(q)
        a = [[Fraction(0)] * len(types) for _ in types]
        for i, counts in enumerate(rows):
            for (mu, c), k in counts.items():
                a[i][index[mu]] += k * qf ** c
        b = [Fraction(int(lam == ident)) for lam in types]
        sol = _solve_fraction(a, b)
        return WeingartenTable(n, qf, dict(zip(types, sol)))
    qf = float(q)
    a = np.zeros((len(types), len(types)))
    for i, counts in enumerate(rows):
        for (mu, c), k in counts.items():
            a[i, index[mu]] += k * qf ** c
    b = np.array([float(lam == ident) for lam in types])
    sol = np.linalg.solve(a, b)
    return WeingartenTable(n, qf, {lam: float(v) for lam, v in zip(types, sol)})


def wg_exact(n: int, q, sigma: Sequence[int], exact: bool = False):
    if len(sigma) != n:
        raise ValueError(f"sigma has size {len(sigma)}, expected {n}")
    return weingarten_table(n, q, exact)(sigma)


def leading_coefficient(sigma: Sequence[int]) -> int:
    """``prod_c (-1)^(|c|-1) Cat_(|c|-1)`` over the cycles of sigma."""
    coef = 1
    for length in perm.cycle_type(sigma):
        coef *= (-1) ** (length - 1) * perm.catalan(length - 1)
    return coef


def wg_leading(n: int, q: float, sigma: Sequence[int]) -> float:
    """Leading large-q term ``q^-(n+|sigma|) prod_c (-1)^(|c|-1) Cat_(|c|-1)``."""
    if len(sigma) != n:
        raise ValueError(f"sigma has size {len(sigma)}, expected {n}")
    if q <= 0:
        raise ValueError("q must be positive")
    return leading_coefficient(sigma) * float(q) ** -(n + perm.transposition_distance(sigma))


def term_order(sigma: Sequence[int], tau: Sequence[int], n: int) -> int:
    """Exponent ``r = #C(tau) + #C(sigma) - n - |tau sigma^-1 pi|`` with pi the canonical n-cycle."""
    if len(sigma) != n or len(tau) != n:
        raise ValueError("size mismatch")
    pi = perm.canonical_pi(n)
    w = perm.compose(perm.compose(tau, perm.inverse(sigma)), pi)
    return perm.num_cycles(tau) + perm.num_cycles(sigma) - n - perm.transposition_distance(w)
