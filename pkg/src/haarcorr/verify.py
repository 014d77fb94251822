"""
Acceptance checks: oracle against closed forms, scaling bands for the
large-q statements, and the cobweb engine invariants.

Each check returns a ``CheckResult``; the CLI ``verify`` subcommand and the
acceptance tests both call these functions so tolerances live in one place.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import cobweb, correlators, haar_mc, oracle, otoc, perm, weingarten
from .expression import MomentExpression, UPow

BAND_FACTOR = 3.0
DIACONIS_RTOL = 1e-9
GRAM_RTOL = 1e-9
EXACT_ATOL = 1e-12
THEOREM1_EVEN_BOUND = 10.0
MC_SIGMAS = 4.0
FIT_SIGMAS = 3.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.elapsed:.2f}s)"


def _timed(name, func, *args, **kwargs) -> CheckResult:
    t0 = time.perf_counter()
    res = func(*args, **kwargs)
    res.name = name
    res.elapsed = time.perf_counter() - t0
    return res


def within_band(values: Sequence[float], factor: float = BAND_FACTOR, atol: float = 1e-12) -> bool:
    """True when no later value exceeds ``factor`` times the first (values are magnitudes, q ascending)."""
    ref = abs(values[0])
    return all(abs(v) <= factor * ref + atol for v in values)


# -- criterion 1 -------------------------------------------------------------------

def _weight_vectors(max_weight: int) -> list[tuple[int, ...]]:
    out = []
    for a in itertools.product(*(range(max_weight // m + 1) for m in range(1, max_weight + 1))):
        if sum(m * c for m, c in enumerate(a, start=1)) <= max_weight:
            out.append(a)
    return out


def _diaconis(qs, max_weight):
    worst = 0.0
    cases = 0
    for q in qs:
        for a in _weight_vectors(max_weight):
            for b in _weight_vectors(max_weight):
                expr = MomentExpression(
                    tuple((UPow(m),) for m, c in enumerate(a, 1) for _ in range(c))
                    + tuple((UPow(-m),) for m, c in enumerate(b, 1) for _ in range(c)))
                got = oracle.haar_average(expr, q).value
                want = oracle.trace_power_moment(a, b, q)
                err = abs(got - want) / max(1.0, abs(want))
                worst = max(worst, err)
                cases += 1
    return CheckResult("", worst <= DIACONIS_RTOL, f"{cases} cases, worst rel err {worst:.2e}",
                       data={"worst": worst, "cases": cases})


def check_diaconis(qs: Sequence[int] = (4, 6), max_weight: int = 3) -> CheckResult:
    return _timed("diaconis", _diaconis, qs, max_weight)


# -- criterion 2 -------------------------------------------------------------------

def _weingarten(rel_qs, band_qs, n_max):
    worst = 0.0
    for n in range(1, n_max + 1):
        perms = list(perm.enumerate_perms(n))
        for q in rel_qs:
            table = weingarten.weingarten_table(n, q)
            for s in perms:
                tot = sum(table(perm.compose(s, perm.inverse(t))) * q ** perm.num_cycles(t) for t in perms)
                want = 1.0 if s == perm.identity(n) else 0.0
                worst = max(worst, abs(tot - want))
    bands = {}
    ok_band = True
    for n in range(1, n_max + 1):
        for ct in perm.partitions(n):
            s = perm.representative(ct)
            k = perm.transposition_distance(s)
            vals = [abs(float(weingarten.wg_exact(n, q, s, exact=True)) - weingarten.wg_leading(n, q, s))
                    * q ** (n + k + 2) for q in band_qs]
            bands[ct] = vals
            ok_band &= within_band(vals)
    ok = worst <= GRAM_RTOL and ok_band
    top = max(max(v) for v in bands.values())
    return CheckResult("", ok, f"defining relation err {worst:.1e}; max compensated error {top:.3g}",
                       data={"relation_err": worst, "bands": bands})


def check_weingarten(rel_qs: Sequence[int] = (6, 9), band_qs: Sequence[int] = (8, 16, 32, 64),
                     n_max: int = 4) -> CheckResult:
    return _timed("weingarten", _weingarten, rel_qs, band_qs, n_max)


# -- criterion 3 -------------------------------------------------------------------

def canonical_sequences(n: int, max_unitaries: int) -> list[tuple[int, ...]]:
    """Canonical time sequences of length n, up to cyclic rotation and global shift."""
    span = max_unitaries  # sum |x_i| >= 2 (max - min)
    found = set()
    for t in itertools.product(range(span + 1), repeat=n):
        if min(t) != 0 or any(t[i] == t[(i + 1) % n] for i in range(n)):
            continue
        if correlators.differences(t).n_unitaries > max_unitaries:
            continue
        found.add(correlators.canonicalize(t).times)
    return sorted(found)


def _theorem1(odd_qs, even_qs, anchor_qs, max_unitaries):
    worst_odd = 0.0
    n_odd = 0
    for n in (3, 5):
        for t in canonical_sequences(n, max_unitaries):
            for q in odd_qs:
                worst_odd = max(worst_odd, abs(correlators.avg_correlator_exact(t, q)))
                n_odd += 1
    worst_even = 0.0
    even = canonical_sequences(4, max_unitaries)
    for t in even:
        for q in even_qs:
            worst_even = max(worst_even, q * q * abs(correlators.avg_correlator_exact(t, q)))
    anchor = max(abs(correlators.avg_correlator_exact((0, 1, 0, 1), q) + 1 / (q * q - 1)) for q in anchor_qs)
    ok = worst_odd <= EXACT_ATOL and worst_even <= THEOREM1_EVEN_BOUND and anchor <= EXACT_ATOL
    return CheckResult("", ok, f"odd max |v| {worst_odd:.1e} over {n_odd}; even max q^2|v| {worst_even:.3g} "
                               f"over {len(even)} sequences; anchor err {anchor:.1e}",
                       data={"odd": worst_odd, "even": worst_even, "anchor": anchor})


def check_theorem1(odd_qs: Sequence[int] = (4, 6), even_qs: Sequence[int] = (6, 8, 12),
                   anchor_qs: Sequence[int] = (4, 8), max_unitaries: int = 3) -> CheckResult:
    return _timed("theorem1", _theorem1, odd_qs, even_qs, anchor_qs, max_unitaries)


# -- criterion 4 -------------------------------------------------------------------

def fit_inverse_q(qs: Sequence[int], y: Sequence[float], se: Sequence[float], limit: float) -> tuple[float, np.ndarray]:
    """Weighted least-squares C in ``y = limit + C/q``; returns C and residuals in units of se."""
    qs = np.asarray(qs, float)
    y = np.asarray(y, float) - limit
    w = 1.0 / np.asarray(se, float) ** 2
    x = 1.0 / qs
    c = float(np.sum(w * x * y) / np.sum(w * x * x))
    return c, (y - c * x) / np.asarray(se, float)


def _theorem3(exact_qs, mc_qs, n_samples, seed, workers):
    exact_err = max(abs(correlators.avg_product_exact([(0, 1), (0, 1)], [False, True], q) - 1 / (q * q - 1))
                    for q in exact_qs)
    rows = correlators.scaling_probe((0, 1, 0, 1), mc_qs, mode="mc", partner=(0, 1, 0, 1),
                                     n_samples=n_samples, seed=seed, workers=workers)
    y = [r.compensated.real for r in rows]
    se = [r.std_error.real for r in rows]
    c, resid = fit_inverse_q(mc_qs, y, se, 2.0)
    fit_ok = bool(np.all(np.abs(resid) <= FIT_SIGMAS))
    inequiv = max(abs(r.compensated) for r in correlators.scaling_probe((0, 1), mc_qs, partner=(0, 2)))
    ok = exact_err <= EXACT_ATOL and fit_ok and inequiv <= 1e-9
    ys = ", ".join(f"q={q}: {v:.3f}+-{s:.3f}" for q, v, s in zip(mc_qs, y, se))
    return CheckResult("", ok, f"(0,1) err {exact_err:.1e}; (0,1,0,1) {ys}, C={c:.2f}, "
                               f"max resid {np.max(np.abs(resid)):.2f} sigma; inequivalent {inequiv:.1e}",
                       data={"exact_err": exact_err, "y": y, "se": se, "C": c, "inequivalent": inequiv})


def check_theorem3(exact_qs: Sequence[int] = (4, 8), mc_qs: Sequence[int] = (8, 16),
                   n_samples: int = 20_000, seed: int = 7, workers: int = 1) -> CheckResult:
    return _timed("theorem3", _theorem3, exact_qs, mc_qs, n_samples, seed, workers)


# -- criterion 5 -------------------------------------------------------------------

def _theorem2(qs):
    vals = [q * q * abs(correlators.avg_product_exact([(0, 1)] * 3, [False, True, False], q)) for q in qs]
    return CheckResult("", within_band(vals), "q^2|v| = " + ", ".join(f"{v:.3g}" for v in vals),
                       data={"values": vals})


def check_theorem2(qs: Sequence[int] = (6, 8, 12)) -> CheckResult:
    return _timed("theorem2", _theorem2, qs)


# -- criterion 6 -------------------------------------------------------------------

def _theorem4(T, qs, t1_qs, layer):
    t1 = max(abs(otoc.theorem4_value([], q) - otoc.otoc_exact([], q)) for q in t1_qs)
    t1 = max(t1, max(abs(otoc.otoc_exact([], q) + 1 / (q * q - 1)) for q in t1_qs))
    layers = otoc.parse_layers(layer, T)
    vals = [q ** 3 * abs(otoc.theorem4_value(layers, q) - otoc.otoc_exact(layers, q)) for q in qs]
    idem = 0.0
    for q in qs:
        k = otoc.projector_k(q)
        idem = max(idem, float(np.max(np.abs(k.squared_kernel() - k.kernel))))
    ok = t1 <= EXACT_ATOL and within_band(vals) and idem <= EXACT_ATOL
    return CheckResult("", ok, f"T=1 err {t1:.1e}; T={T} q^3|diff| = "
                               + ", ".join(f"{v:.3g}" for v in vals) + f"; K idempotence {idem:.1e}",
                       data={"t1": t1, "values": vals, "idempotence": idem})


def check_theorem4(T: int = 2, qs: Sequence[int] = (4, 8, 16), t1_qs: Sequence[int] = (4, 8),
                   layer: str = "1,1b") -> CheckResult:
    return _timed("theorem4", _theorem4, T, qs, t1_qs, layer)


# -- criterion 7 -------------------------------------------------------------------

def _cobweb(samples, seed, max_edges, exhaustive_edges):
    problems = []
    for e in range(exhaustive_edges + 1):
        for m in cobweb.all_matchings(2 * e):
            d = cobweb.CobwebDiagram(2 * e, m)
            planar = cobweb.crossings(d) == 0
            if planar != (cobweb.reduce(d).reduced.n_edges == 0) or planar != (cobweb.count_loops(d) == e + 1):
                problems.append(f"planarity {cobweb.format_diagram(d)}")
    rng = random.Random(seed)
    for _ in range(samples):
        d = cobweb.random_diagram(rng.randint(1, max_edges), rng)
        n = cobweb.count_loops(d)
        rep = cobweb.reduce(d)
        for credits, st in enumerate(rep.steps, start=1):
            if n != credits + cobweb.count_loops(st.diagram):
                problems.append(f"soundness {cobweb.format_diagram(d)}")
        ep = rep.reduced.n_edges
        if ep >= 2 and cobweb.count_loops(rep.reduced) > max(1, 2 * ep / 3):
            problems.append(f"reduced bound {cobweb.format_diagram(d)}")
        if cobweb.crossings(d) and n > d.n_edges - ep / 3:
            problems.append(f"full bound {cobweb.format_diagram(d)}")
        outcomes = set()
        for k in range(10):
            r = cobweb.reduce(d, random.Random(rng.getrandbits(32) + k))
            outcomes.add((r.reduced.n_edges, r.loop_credits))
        if len(outcomes) > 1:
            problems.append(f"confluence {cobweb.format_diagram(d)}")
    for T in (2, 3):
        got = set(cobweb.enumerate_leading(T))
        if got != set(cobweb.ladder_family(T)):
            problems.append(f"leading family T={T}")
        for d in got:
            cls = d.chord_classes()
            if cls[("1", "1b")] != cls[("2", "2b")] or cobweb.crossings(d) == 0:
                problems.append(f"leading member {cobweb.format_diagram(d)}")
    detail = "all invariants hold" if not problems else "; ".join(problems[:5])
    return CheckResult("", not problems, detail, data={"problems": problems})


def check_cobweb(samples: int = 200, seed: int = 1, max_edges: int = 8, exhaustive_edges: int = 5) -> CheckResult:
    return _timed("cobweb", _cobweb, samples, seed, max_edges, exhaustive_edges)


# -- criterion 8 (Haar part) ---------------------------------------------------------

def _haar(q, n_samples, seed, m_max, workers):
    worst = 0.0
    parts = []
    for m in range(1, m_max + 1):
        expr = MomentExpression(((UPow(m),), (UPow(-m),)))
        est = haar_mc.estimate(expr, q, n_samples, seed + m, workers)
        z = abs(est.mean.real - m) / est.se_re
        worst = max(worst, z)
        parts.append(f"m={m}: {est.mean.real:.3f}+-{est.se_re:.3f}")
    return CheckResult("", worst <= MC_SIGMAS, ", ".join(parts) + f"; max {worst:.2f} sigma",
                       data={"max_sigma": worst})


def check_haar(q: int = 8, n_samples: int = 10_000, seed: int = 0, m_max: int = 3, workers: int = 1) -> CheckResult:
    return _timed("haar", _haar, q, n_samples, seed, m_max, workers)


CHECKS = {
    "diaconis": check_diaconis,
    "weingarten": check_weingarten,
    "theorem1": check_theorem1,
    "theorem2": check_theorem2,
    "theorem3": check_theorem3,
    "theorem4": check_theorem4,
    "cobweb": check_cobweb,
    "haar": check_haar,
}


def parity_obstruction(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs (sigma, tau) of fixed-point-free involutions with tau sigma^-1 = pi; empty for even n."""
    pi = perm.canonical_pi(n)
    invs = [p for p in perm.enumerate_perms(n) if perm.cycle_type(p) == (2,) * (n // 2)] if n % 2 == 0 else []
    return [(s, t) for s in invs for t in invs if perm.compose(t, perm.inverse(s)) == pi]

