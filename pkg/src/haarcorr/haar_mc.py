"""
Seeded Haar sampling and Monte Carlo estimates of trace expressions.

Sample ``i`` of a run with global seed ``s`` draws from its own Philox stream
keyed by ``SeedSequence(s, spawn_key=(i,))``, so every sample is reproducible
on its own and the estimate does not depend on how samples are split across
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expression import MomentExpression, evaluate


@dataclass(frozen=True)
class HaarEstimate:
    mean: complex
    std_error: complex  # real part: s.e. of Re, imag part: s.e. of Im
    n_samples: int
    seed: int
    q: int

    @property
    def se_re(self) -> float:
        return self.std_error.real

    @property
    def se_im(self) -> float:
        return self.std_error.imag


def sample_stream(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_unitary(q: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary: QR of a complex Ginibre matrix with R-diagonal phases moved into Q."""
    if q < 1:
        raise ValueError("q must be >= 1")
    z = (rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))) / math.sqrt(2)
    qmat, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return qmat * (d / np.abs(d))


def _eval_range(func: Callable[[np.ndarray], complex], q: int, seed: int, start: int, stop: int) -> np.ndarray:
    out = np.empty(stop - start, dtype=complex)
    for j, i in enumerate(range(start, stop)):
        out[j] = func(sample_unitary(q, sample_stream(seed, i)))
    return out


class _ExprFunc:
    # picklable wrapper for process pools
    def __init__(self, expr: MomentExpression):
        self.expr = expr

    def __call__(self, u: np.ndarray) -> complex:
        return evaluate(self.expr, u)


def sample_values(func: Callable[[np.ndarray], complex], q: int, n_samples: int, seed: int,
                  workers: int = 1) -> np.ndarray:
    """``func(U_i)`` for samples ``i = 0..n_samples-1``, in sample order."""
    if workers <= 1:
        return _eval_range(func, q, seed, 0, n_samples)
    bounds = np.linspace(0, n_samples, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = [pool.submit(_eval_range, func, q, seed, int(a), int(b))
                 for a, b in zip(bounds[:-1], bounds[1:])]
        return np.concatenate([p.result() for p in parts])


def summarize(values: np.ndarray, seed: int, q: int) -> HaarEstimate:
    n = len(values)
    if n < 2:
        raise ValueError("need at least two samples")
    se_re = np.std(values.real, ddof=1) / math.sqrt(n)
    se_im = np.std(values.imag, ddof=1) / math.sqrt(n)
    return HaarEstimate(complex(np.mean(values)), complex(se_re, se_im), n, seed, q)


def estimate_function(func: Callable[[np.ndarray], complex], q: int, n_samples: int, seed: int,
                      workers: int = 1) -> HaarEstimate:
    return summarize(sample_values(func, q, n_samples, seed, workers), seed, q)


def estimate(expr: MomentExpression, q: int, n_samples: int, seed: int, workers: int = 1) -> HaarEstimate:
    """Monte Carlo mean of ``expr`` over ``n_samples`` Haar unitaries of size q."""
    dim = expr.dimension()
    if dim is not None and dim != q:
        raise ValueError(f"operators are {dim}x{dim} but q={q}")
    return estimate_function(_ExprFunc(expr), q, n_samples, seed, workers)
