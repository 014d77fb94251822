"""
n-point correlators <Z(t_1) ... Z(t_n)> = (1/q) Tr[prod_i U^t_i Z U^-t_i]
and products of them, averaged exactly (oracle) or by Monte Carlo.

Times are integers; consecutive times (cyclically) must differ. With
``x_i = t_{i+1} - t_i`` and ``x_n = t_1 - t_n`` the correlator is
``(1/q) Tr[Z U^x_1 Z U^x_2 ... Z U^x_n]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import haar_mc, oracle
from .expression import Fixed, MomentExpression, PowerCache, UPow, Word, adjoint_word


@dataclass(frozen=True)
class TimeSequence:
    times: tuple[int, ...]
    canonical: bool = False

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class DifferenceVector:
    x: tuple[int, ...]
    n_unitaries: int


def _validate(times: Sequence[int]) -> tuple[int, ...]:
    times = tuple(int(t) for t in times)
    if len(times) < 2:
        raise ValueError("a correlator needs at least two times")
    for i in range(len(times)):
        if times[i] == times[(i + 1) % len(times)]:
            raise ValueError(f"consecutive equal times at positions {i}, {(i + 1) % len(times)}: {times}")
    return times


def _rotations(times: Sequence[int]) -> list[tuple[int, ...]]:
    return [tuple(times[k:]) + tuple(times[:k]) for k in range(len(times))]


def canonicalize(times: Sequence[int] | TimeSequence) -> TimeSequence:
    """Lexicographically smallest rotation (so the minimum time comes first)."""
    if isinstance(times, TimeSequence):
        times = times.times
    times = _validate(times)
    return TimeSequence(min(_rotations(times)), canonical=True)


def as_sequence(t: Sequence[int] | TimeSequence) -> TimeSequence:
    if isinstance(t, TimeSequence):
        return t
    return TimeSequence(_validate(t))


def parse_times(text: str) -> TimeSequence:
    """``"0,1,0,2"`` -> TimeSequence (not canonicalized)."""
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise ValueError(f"bad time sequence {text!r}") from exc
    return TimeSequence(_validate(vals))


def differences(t: Sequence[int] | TimeSequence) -> DifferenceVector:
    times = as_sequence(t).times
    n = len(times)
    x = tuple(times[(i + 1) % n] - times[i] for i in range(n))
    return DifferenceVector(x, sum(abs(v) for v in x) // 2)


def default_z(q: int) -> np.ndarray:
    """diag(+1 x q/2, -1 x q/2): traceless, Hermitian and involutory."""
    if q % 2:
        raise ValueError(f"the default Z needs even q, got {q}")
    return np.diag(np.r_[np.ones(q // 2), -np.ones(q // 2)]).astype(complex)


def is_involutory_traceless(z: np.ndarray, atol: float = 1e-12) -> bool:
    q = z.shape[0]
    return (abs(np.trace(z)) <= atol * q
            and np.allclose(z @ z, np.eye(q), atol=atol)
            and np.allclose(z, z.conj().T, atol=atol))


def correlator_word(times: Sequence[int], ops: Sequence[str]) -> Word:
    """Word ``O_1 U^x_1 O_2 U^x_2 ... O_n U^x_n`` for ``prod_i U^t_i O_i U^-t_i``."""
    n = len(times)
    atoms: list = []
    for i in range(n):
        atoms.append(Fixed(ops[i]))
        x = times[(i + 1) % n] - times[i]
        if x:
            atoms.append(UPow(x))
    return tuple(atoms)


def correlator_expression(t: Sequence[int] | TimeSequence, z: np.ndarray, conj: bool = False) -> MomentExpression:
    times = as_sequence(t).times
    ops = {"Z": z}
    word = correlator_word(times, ["Z"] * len(times))
    if conj:
        word = adjoint_word(word, ops)
    return MomentExpression((word,), ops, 1.0 / z.shape[0])


def product_expression(ts: Sequence[Sequence[int] | TimeSequence], conj: Sequence[bool],
                       z: np.ndarray) -> MomentExpression:
    if len(ts) != len(conj):
        raise ValueError("need one conjugation flag per sequence")
    ops = {"Z": z}
    words = []
    for t, c in zip(ts, conj):
        word = correlator_word(as_sequence(t).times, ["Z"] * len(as_sequence(t)))
        words.append(adjoint_word(word, ops) if c else word)
    return MomentExpression(tuple(words), ops, z.shape[0] ** -float(len(ts)))


def parse_conj(text: str) -> tuple[bool, ...]:
    """``"+-"`` -> (False, True)."""
    if not text or set(text) - {"+", "-"}:
        raise ValueError(f"conjugation flags must be a +/- string, got {text!r}")
    return tuple(c == "-" for c in text)


def evaluate(t: Sequence[int] | TimeSequence, u: np.ndarray, z: np.ndarray) -> complex:
    """``(1/q) Tr[prod_i U^t_i Z U^-t_i]`` for a fixed unitary."""
    if u.shape != z.shape:
        raise ValueError(f"dimension mismatch: U {u.shape}, Z {z.shape}")
    powers = PowerCache(u)
    q = u.shape[0]
    mat = np.eye(q, dtype=complex)
    for ti in as_sequence(t).times:
        if ti:
            mat = mat @ powers(ti) @ z @ powers(-ti)
        else:
            mat = mat @ z
    return complex(np.trace(mat)) / q


def _z_or_default(z, q):
    z = default_z(q) if z is None else np.asarray(z, dtype=complex)
    if z.shape != (q, q):
        raise ValueError(f"Z has shape {z.shape}, expected {(q, q)}")
    return z


def avg_correlator_exact(t: Sequence[int] | TimeSequence, q: int, z: np.ndarray | None = None) -> complex:
    return oracle.haar_average(correlator_expression(t, _z_or_default(z, q)), q).value


def avg_product_exact(ts: Sequence[Sequence[int] | TimeSequence], conj: Sequence[bool], q: int,
                      z: np.ndarray | None = None, workers: int = 1) -> complex:
    expr = product_expression(ts, conj, _z_or_default(z, q))
    return oracle.haar_average(expr, q, workers=workers).value


def avg_product_mc(ts, conj, q: int, n_samples: int, seed: int, z: np.ndarray | None = None,
                   workers: int = 1) -> haar_mc.HaarEstimate:
    expr = product_expression(ts, conj, _z_or_default(z, q))
    return haar_mc.estimate(expr, q, n_samples, seed, workers)


def _shift_equal(a: Sequence[int], b: Sequence[int]) -> bool:
    d = b[0] - a[0]
    return all(y - x == d for x, y in zip(a, b))


def symmetry_factor(t: Sequence[int] | TimeSequence) -> int:
    """Number of cyclic rotations of t equal to t up to a global time shift."""
    times = as_sequence(t).times
    return sum(_shift_equal(r, times) for r in _rotations(times))


def cyclic_equivalent(t: Sequence[int] | TimeSequence, t2: Sequence[int] | TimeSequence) -> bool:
    a, b = as_sequence(t).times, as_sequence(t2).times
    if len(a) != len(b):
        return False
    return any(_shift_equal(r, b) for r in _rotations(a))


@dataclass(frozen=True)
class ProbeRow:
    q: int
    value: complex
    compensated: complex  # value * q^2
    std_error: complex | None = None


def scaling_probe(t: Sequence[int] | TimeSequence, qs: Sequence[int], mode: str = "exact",
                  partner: Sequence[int] | TimeSequence | None = None,
                  n_samples: int = 10_000, seed: int = 0, workers: int = 1) -> list[ProbeRow]:
    """value and value*q^2 per q for <Z(t)>, or for <Z(t)><Z(partner)>^* when a partner is given."""
    if list(qs) != sorted(qs):
        raise ValueError("qs must be ascending")
    if mode not in ("exact", "mc"):
        raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if partner is None:
        ts, conj = [t], [False]
    else:
        ts, conj = [t, partner], [False, True]
    rows = []
    for q in qs:
        if mode == "exact":
            val = avg_product_exact(ts, conj, q, workers=workers)
            rows.append(ProbeRow(q, val, val * q * q))
        else:
            est = avg_product_mc(ts, conj, q, n_samples, seed, workers=workers)
            rows.append(ProbeRow(q, est.mean, est.mean * q * q, est.std_error * q * q))
    return rows
