"""
Physical OTOCs <Z A Z(T) B^dag Z C Z(T) D^dag> and their leading-order
evaluation in the two-dimensional pair space span{|+>, |->}.

Legs: ``1`` carries A, ``2`` carries C, ``1b`` carries D^dag and ``2b``
carries B^dag. With this assignment the Z at time 0 joins leg 1 to 1b and
leg 2 to 2b (the ``+`` wiring) and the Z(T) at the end joins 1 to 2b and 2 to
1b (the ``-`` wiring), so the OTOC reads ``q <Z_+| Gamma |Z(T)_->``.

Pair states are normalised wirings: ``|+>`` pairs (1,1b)(2,2b), ``|->``
pairs (1,2b)(2,1b), each with a 1/q factor, so <+|+> = <-|-> = 1 and
<+|-> = 1/q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import haar_mc, oracle
from .correlators import correlator_word, default_z
from .expression import MomentExpression, PowerCache, adjoint_name

LEGS = ("1", "1b", "2", "2b")
FORWARD = ("1", "2")
PAIRINGS = {
    "+": {"1": "1b", "2": "2b", "1b": "1", "2b": "2"},
    "-": {"1": "2b", "2": "1b", "2b": "1", "1b": "2"},
}
STATES = ("+", "-")


@dataclass(frozen=True)
class LayerSpec:
    insertions: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = set(self.insertions) - set(LEGS)
        if bad:
            raise ValueError(f"unknown legs {sorted(bad)}; legs are {LEGS}")

    @classmethod
    def on(cls, *legs: str, op: str = "Z") -> "LayerSpec":
        return cls({leg: op for leg in legs})


def parse_layers(text: str, T: int, op: str = "Z") -> list[LayerSpec]:
    """``"1,1b;2,2b"`` -> two layers. T-1 entries are required; an empty entry is an empty layer."""
    if T < 1:
        raise ValueError("T must be >= 1")
    text = (text or "").strip()
    if T == 1:
        if text:
            raise ValueError("T=1 has no layers")
        return []
    entries = text.split(";")
    if len(entries) != T - 1:
        raise ValueError(f"expected {T - 1} layers, got {len(entries)} in {text!r}")
    layers = []
    for e in entries:
        legs = [leg.strip() for leg in e.split(",") if leg.strip()]
        layers.append(LayerSpec.on(*legs, op=op))
    return layers


def format_layers(layers: Sequence[LayerSpec]) -> str:
    return ";".join(",".join(leg for leg in LEGS if leg in layer.insertions) for layer in layers)


def _operators(q: int, operators: Mapping[str, np.ndarray] | None) -> dict[str, np.ndarray]:
    ops = dict(operators or {})
    if "Z" not in ops:
        ops["Z"] = default_z(q)
    for name, mat in ops.items():
        if mat.shape != (q, q):
            raise ValueError(f"operator {name!r} has shape {mat.shape}, expected {(q, q)}")
    return ops


def pair_gram(q: int) -> np.ndarray:
    if q < 2:
        raise ValueError("q must be >= 2")
    return np.array([[1.0, 1.0 / q], [1.0 / q, 1.0]])


def _leg_matrices(layer: LayerSpec, ops: Mapping[str, np.ndarray]) -> dict[str, np.ndarray | None]:
    mats: dict[str, np.ndarray | None] = {}
    for leg in LEGS:
        name = layer.insertions.get(leg)
        if name is None:
            mats[leg] = None
        else:
            m = ops[name]
            mats[leg] = m.conj().T if leg.endswith("b") else m
    return mats


def _pair_element(left: str, right: str, mats: Mapping[str, np.ndarray | None], q: int) -> complex:
    # Walk: forward leg -> (right wiring) -> barred leg -> (left wiring) -> forward leg.
    val = 1 + 0j
    done: set[str] = set()
    for start in FORWARD:
        if start in done:
            continue
        prod = None
        leg = start
        while leg not in done:
            done.add(leg)
            bar = PAIRINGS[right][leg]
            for m in (mats[leg], mats[bar]):
                if m is not None:
                    prod = m if prod is None else prod @ m
            leg = PAIRINGS[left][bar]
        val *= q if prod is None else complex(np.trace(prod))
    return val / q**2


def layer_matrix(layer: LayerSpec, q: int, operators: Mapping[str, np.ndarray] | None = None) -> np.ndarray:
    """``[[<+|G|+>, <+|G|->], [<-|G|+>, <-|G|->]]`` by loop tracing.

    Barred legs contribute the adjoint of their inserted operator, in loop order.
    """
    mats = _leg_matrices(layer, _operators(q, operators))
    return np.array([[_pair_element(a, b, mats, q) for b in STATES] for a in STATES])


@dataclass(frozen=True)
class PairProjector:
    """Projector onto span{|+>, |->} written as ``K = sum_ab |a> kernel[a, b] <b|``."""
    q: int
    gram: np.ndarray
    kernel: np.ndarray

    def coefficients(self, overlaps: Sequence[complex]) -> np.ndarray:
        """Pair-basis coefficients of ``K|v>`` given ``(<+|v>, <-|v>)``."""
        return self.kernel @ np.asarray(overlaps)

    def squared_kernel(self) -> np.ndarray:
        """Kernel of K @ K; equals ``kernel`` for a projector."""
        return self.kernel @ self.gram @ self.kernel

    def pair_basis_matrix(self) -> np.ndarray:
        """Matrix of K restricted to span{|+>, |->} in that basis."""
        return self.kernel @ self.gram


def projector_k(q: int) -> PairProjector:
    g = pair_gram(q)
    return PairProjector(q, g, np.linalg.inv(g))


def boundary_overlaps(q: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(<Z_+|+>, <Z_+|->)`` and ``(<+|Z(T)_->, <-|Z(T)_->)``."""
    tr = complex(np.trace(z))
    tr2 = complex(np.trace(z @ z))
    left = np.array([tr * tr, tr2]) / q**2
    right = np.array([tr2, tr * tr]) / q**2
    return left, right


def theorem4_value(layers: Sequence[LayerSpec], q: int, operators: Mapping[str, np.ndarray] | None = None) -> complex:
    """``q <Z_+| K G(1) K ... K G(T-1) K |Z(T)_->`` evaluated in the pair space."""
    ops = _operators(q, operators)
    left, right = boundary_overlaps(q, ops["Z"])
    kern = projector_k(q).kernel
    vec = left @ kern
    for layer in layers:
        vec = vec @ layer_matrix(layer, q, ops) @ kern
    return complex(q * (vec @ right))


def otoc_plus_minus(layers: Sequence[LayerSpec], q: int,
                    operators: Mapping[str, np.ndarray] | None = None) -> tuple[complex, complex]:
    """The two ladder sums (sigma = tau terms, |sigma tau^-1| = 1 terms); the OTOC is plus - minus.

    plus  = q^-2 sum_{m=1}^{T-1} prod_{t<m} <-|G_t|-> * q <-|G_m|+> * prod_{t>m} <+|G_t|+>
    minus = q^-2 sum_{m=0}^{T-1} prod_{t<=m} <-|G_t|-> * prod_{t>m} <+|G_t|+>
    """
    ops = _operators(q, operators)
    mats = [layer_matrix(layer, q, ops) for layer in layers]
    mm = [m[1, 1] for m in mats]
    pp = [m[0, 0] for m in mats]
    T = len(layers) + 1
    plus = 0j
    for m in range(1, T):
        plus += np.prod(mm[:m - 1]) * q * mats[m - 1][1, 0] * np.prod(pp[m:])
    minus = 0j
    for m in range(0, T):
        minus += np.prod(mm[:m]) * np.prod(pp[m:])
    return complex(plus / q**2), complex(minus / q**2)


def otoc_sequence(layers: Sequence[LayerSpec]) -> tuple[list[int], list[tuple[str, bool]]]:
    """Times and (operator, adjointed) per insertion along the trace, starting at the time-0 Z."""
    T = len(layers) + 1
    times: list[int] = []
    ops: list[tuple[str, bool]] = []

    def add(t, name, adj=False):
        times.append(t)
        ops.append((name, adj))

    add(0, "Z")
    for j, layer in enumerate(layers, start=1):
        if "1" in layer.insertions:
            add(j, layer.insertions["1"])
    add(T, "Z")
    for j in range(T - 1, 0, -1):
        if "2b" in layers[j - 1].insertions:
            add(j, layers[j - 1].insertions["2b"], True)
    add(0, "Z")
    for j, layer in enumerate(layers, start=1):
        if "2" in layer.insertions:
            add(j, layer.insertions["2"])
    add(T, "Z")
    for j in range(T - 1, 0, -1):
        if "1b" in layers[j - 1].insertions:
            add(j, layers[j - 1].insertions["1b"], True)
    return times, ops


def otoc_expression(layers: Sequence[LayerSpec], q: int,
                    operators: Mapping[str, np.ndarray] | None = None) -> MomentExpression:
    ops = _operators(q, operators)
    times, inserted = otoc_sequence(layers)
    names = []
    for name, adj in inserted:
        if adj and not np.array_equal(ops[name].conj().T, ops[name]):
            ops[adjoint_name(name)] = ops[name].conj().T
            name = adjoint_name(name)
        names.append(name)
    return MomentExpression((correlator_word(times, names),), ops, 1.0 / q)


def otoc_exact(layers: Sequence[LayerSpec], q: int, operators: Mapping[str, np.ndarray] | None = None,
               workers: int = 1) -> complex:
    return oracle.haar_average(otoc_expression(layers, q, operators), q, workers=workers).value


class _DirectOTOC:
    # direct simulation of the OTOC at a sampled U; picklable for worker pools
    def __init__(self, layers, ops):
        self.times, inserted = otoc_sequence(layers)
        self.mats = [ops[n].conj().T if adj else ops[n] for n, adj in inserted]

    def __call__(self, u: np.ndarray) -> complex:
        powers = PowerCache(u)
        prod = np.eye(u.shape[0], dtype=complex)
        for t, m in zip(self.times, self.mats):
            prod = prod @ (powers(t) @ m @ powers(-t) if t else m)
        return complex(np.trace(prod)) / u.shape[0]


def otoc_mc(layers: Sequence[LayerSpec], q: int, n_samples: int, seed: int,
            operators: Mapping[str, np.ndarray] | None = None, workers: int = 1) -> haar_mc.HaarEstimate:
    func = _DirectOTOC(layers, _operators(q, operators))
    return haar_mc.estimate_function(func, q, n_samples, seed, workers)
