"""
Exact Haar averages of trace expressions by the Weingarten double sum.

After expanding powers, an expression with N copies of U and N copies of
U^dagger averages to

    sum_{sigma, tau in S_N} Wg(q, sigma tau^-1) * prod_loops Tr(ops on loop)

where ``sigma`` glues the row index of the k-th U to the column index of the
``sigma(k)``-th U^dagger and ``tau`` glues the column index of the k-th U to
the row index of the ``tau(k)``-th U^dagger. The fixed operators between
consecutive unitaries form *segments*; the gluing turns the segments into a
permutation whose cycles are the index loops.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import perm
from .expression import MomentExpression, UPow
from .weingarten import weingarten_table

MAX_N = 7


@dataclass(frozen=True)
class ExactAverage:
    value: complex
    n_unitaries: int
    term_count: int


@dataclass
class _Wiring:
    q: int
    n: int
    constant: complex
    seg_after_u: list[int]
    seg_after_d: list[int]
    end_is_u: list[bool]
    end_idx: list[int]
    seg_mats: list[np.ndarray | None]


def _build_wiring(expr: MomentExpression, q: int) -> _Wiring:
    constant = complex(expr.prefactor)
    seg_after_u: dict[int, int] = {}
    seg_after_d: dict[int, int] = {}
    end_is_u: list[bool] = []
    end_idx: list[int] = []
    seg_mats: list[np.ndarray | None] = []
    nu = nd = 0
    for word in expr.factors:
        toks: list[object] = []
        for a in word:
            if isinstance(a, UPow):
                toks.extend(["U" if a.k > 0 else "D"] * abs(a.k))
            else:
                toks.append(a)
        upos = [i for i, t in enumerate(toks) if t in ("U", "D")]
        if not upos:
            mat = np.eye(q, dtype=complex)
            for t in toks:
                mat = mat @ expr.operators[t.op]
            constant *= complex(np.trace(mat))
            continue
        # rotate so the word starts at a unitary
        toks = toks[upos[0]:] + toks[:upos[0]]
        labels = []
        for t in toks:
            if t == "U":
                labels.append(("U", nu))
                nu += 1
            elif t == "D":
                labels.append(("D", nd))
                nd += 1
            else:
                labels.append(t)
        uidx = [i for i, t in enumerate(labels) if isinstance(t, tuple)]
        for j, start in enumerate(uidx):
            stop = uidx[j + 1] if j + 1 < len(uidx) else len(labels)
            between = labels[start + 1:stop]
            seg = len(seg_mats)
            kind, idx = labels[start]
            (seg_after_u if kind == "U" else seg_after_d)[idx] = seg
            ekind, eidx = labels[stop % len(labels)]
            end_is_u.append(ekind == "U")
            end_idx.append(eidx)
            mat = None
            for t in between:
                m = expr.operators[t.op]
                mat = m if mat is None else mat @ m
            seg_mats.append(None if mat is None else np.asarray(mat, dtype=complex))
    assert nu == nd
    return _Wiring(q, nu, constant,
                   [seg_after_u[k] for k in range(nu)],
                   [seg_after_d[k] for k in range(nd)],
                   end_is_u, end_idx, seg_mats)


class _LoopEvaluator:
    def __init__(self, w: _Wiring):
        self.w = w
        self.cache: dict[tuple[int, ...], complex] = {}
        self.all_identity = all(m is None for m in w.seg_mats)
        self.nseg = len(w.seg_mats)

    def loop_value(self, loop: tuple[int, ...]) -> complex:
        val = self.cache.get(loop)
        if val is None:
            mats = [self.w.seg_mats[s] for s in loop if self.w.seg_mats[s] is not None]
            if not mats:
                val = complex(self.w.q)
            else:
                prod = mats[0]
                for m in mats[1:]:
                    prod = prod @ m
                val = complex(np.trace(prod))
            self.cache[loop] = val
        return val

    def term(self, sigma: Sequence[int], tau_inv: Sequence[int]) -> complex:
        w = self.w
        nxt = [w.seg_after_d[sigma[e]] if isu else w.seg_after_u[tau_inv[e]]
               for isu, e in zip(w.end_is_u, w.end_idx)]
        seen = [False] * self.nseg
        if self.all_identity:
            loops = 0
            for s in range(self.nseg):
                if not seen[s]:
                    loops += 1
                    while not seen[s]:
                        seen[s] = True
                        s = nxt[s]
            return complex(w.q) ** loops
        val = 1 + 0j
        for s0 in range(self.nseg):
            if seen[s0]:
                continue
            loop = []
            s = s0
            while not seen[s]:
                seen[s] = True
                loop.append(s)
                s = nxt[s]
            val *= self.loop_value(tuple(loop))
            if val == 0:
                return val
        return val


def _partial_sums(w: _Wiring, alphas: Sequence[tuple[int, ...]], wg: dict) -> list[complex]:
    ev = _LoopEvaluator(w)
    sigmas = list(perm.enumerate_perms(w.n))
    sig_inv = [perm.inverse(s) for s in sigmas]
    out = []
    for alpha in alphas:
        weight = wg[perm.cycle_type(alpha)]
        acc = 0j
        for sigma, si in zip(sigmas, sig_inv):
            # tau = alpha^-1 sigma, so sigma tau^-1 = alpha and tau^-1 = sigma^-1 alpha
            acc += ev.term(sigma, perm.compose(si, alpha))
        out.append(weight * acc)
    return out


def _weights(n: int, q: int) -> dict:
    table = weingarten_table(n, int(q), exact=True)
    return {k: float(v) for k, v in table.values.items()}


def haar_average(expr: MomentExpression, q: int, workers: int = 1,
                 progress: Callable[[int, int], None] | None = None) -> ExactAverage:
    """Exact Haar average of ``expr`` over U(q).

    ``workers > 1`` splits the outer sum over ``alpha = sigma tau^-1`` across
    processes; partial sums are reduced in lexicographic alpha order, so the
    result does not depend on the worker count. ``progress(done, total)`` is
    called after each chunk of alphas.
    """
    dim = expr.dimension()
    if dim is not None and dim != q:
        raise ValueError(f"operators are {dim}x{dim} but q={q}")
    nu, nd = expr.n_u, expr.n_udag
    if nu != nd:
        return ExactAverage(0j, max(nu, nd), 0)
    if nu > MAX_N:
        raise ValueError(f"{nu} unitaries exceeds the oracle limit {MAX_N}")
    if q < nu:
        raise ValueError(f"q={q} < N={nu}: outside the Weingarten regime")
    w = _build_wiring(expr, q)
    if nu == 0:
        return ExactAverage(w.constant, 0, 1)
    if w.constant == 0:
        return ExactAverage(0j, nu, 0)
    wg = _weights(nu, q)
    alphas = list(perm.enumerate_perms(nu))
    nchunks = max(1, min(len(alphas), 8 * workers if workers > 1 else (64 if progress else 1)))
    size = math.ceil(len(alphas) / nchunks)
    chunks = [alphas[i:i + size] for i in range(0, len(alphas), size)]
    partials: list[complex] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_partial_sums, w, c, wg) for c in chunks]
            for i, f in enumerate(futures):
                partials.extend(f.result())
                if progress:
                    progress(i + 1, len(chunks))
    else:
        for i, c in enumerate(chunks):
            partials.extend(_partial_sums(w, c, wg))
            if progress:
                progress(i + 1, len(chunks))
    total = 0j
    for p in partials:
        total += p
    return ExactAverage(w.constant * total, nu, len(alphas) ** 2)


def trace_power_moment(a: Sequence[int], b: Sequence[int], q: int) -> int:
    """Closed form of ``E prod_m Tr(U^m)^a_m Tr(U^-m)^b_m`` (``a[m-1] = a_m``).

    Valid for ``q >= max(sum m a_m, sum m b_m)``.
    """
    na = sum(m * c for m, c in enumerate(a, start=1))
    nb = sum(m * c for m, c in enumerate(b, start=1))
    if q < max(na, nb):
        raise ValueError(f"q={q} below validity threshold {max(na, nb)}")
    size = max(len(a), len(b))
    a = list(a) + [0] * (size - len(a))
    b = list(b) + [0] * (size - len(b))
    if a != b:
        return 0
    out = 1
    for m, c in enumerate(a, start=1):
        out *= m ** c * math.factorial(c)
    return out


def h_value(tau: Sequence[int], q: int, n: int) -> int:
    """Trace diagram of an involutory traceless Z wired by tau: q^#cycles if all cycles even, else 0."""
    if len(tau) != n:
        raise ValueError(f"tau has size {len(tau)}, expected {n}")
    if not perm.is_even_cycle_only(tau):
        return 0
    return q ** perm.num_cycles(tau)
