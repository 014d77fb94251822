import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from haarcorr import correlators as C
from haarcorr import haar_mc

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def test_canonicalize():
    assert C.canonicalize((0, 1, 0, 1)).times == (0, 1, 0, 1)
    # minimum first, ties broken by the lexicographically smallest rotation
    assert C.canonicalize((3, 2, 4, 2)).times == (2, 3, 2, 4)
    assert C.canonicalize((5, 1, 3)).times == (1, 3, 5)
    with pytest.raises(ValueError):
        C.canonicalize((0, 1, 1))
    with pytest.raises(ValueError):
        C.canonicalize((0, 1, 0))
    with pytest.raises(ValueError):
        C.canonicalize((4,))


def test_differences():
    d = C.differences((0, 1, 0, 1))
    assert d.x == (1, -1, 1, -1) and d.n_unitaries == 2
    assert C.differences((0, 2)) == C.DifferenceVector((2, -2), 2)
    d = C.differences((0, 1, 0, 2))
    assert d.x == (1, -1, 2, -2) and d.n_unitaries == 3


def test_parse_times_and_conj():
    assert C.parse_times("0,1,0,2").times == (0, 1, 0, 2)
    with pytest.raises(ValueError):
        C.parse_times("0,a")
    assert C.parse_conj("+-") == (False, True)
    with pytest.raises(ValueError):
        C.parse_conj("+x")


def test_evaluate_examples():
    assert C.evaluate((0, 1), np.eye(2), PAULI_Z) == pytest.approx(1.0)
    assert C.evaluate((0, 1), PAULI_X, PAULI_Z) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        C.evaluate((0, 1), np.eye(3), PAULI_Z)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=6), st.integers(0, 5), st.integers(0, 10**6))
def test_evaluate_rotation_invariant(times, k, seed):
    times = tuple(times)
    if any(times[i] == times[(i + 1) % len(times)] for i in range(len(times))):
        return
    u = haar_mc.sample_unitary(4, haar_mc.sample_stream(seed, 0))
    z = C.default_z(4)
    k %= len(times)
    rot = times[k:] + times[:k]
    assert C.evaluate(rot, u, z) == pytest.approx(C.evaluate(times, u, z), abs=1e-10)


def test_evaluate_matches_expression_word():
    from haarcorr.expression import evaluate as eval_expr
    u = haar_mc.sample_unitary(6, haar_mc.sample_stream(2, 0))
    z = C.default_z(6)
    for t in [(0, 1, 0, 2), (0, 2, 1, 3), (1, 0)]:
        assert eval_expr(C.correlator_expression(t, z), u) == pytest.approx(C.evaluate(t, u, z), abs=1e-12)
        conj = eval_expr(C.correlator_expression(t, z, conj=True), u)
        assert conj == pytest.approx(np.conj(C.evaluate(t, u, z)), abs=1e-12)


def test_default_z():
    z = C.default_z(6)
    assert C.is_involutory_traceless(z)
    with pytest.raises(ValueError):
        C.default_z(5)


def test_avg_correlator_examples():
    assert abs(C.avg_correlator_exact((0, 1), 4)) <= 1e-12
    assert C.avg_correlator_exact((0, 1, 0, 1), 4) == pytest.approx(-1 / 15, abs=1e-12)
    assert abs(C.avg_correlator_exact((0, 1, 2), 6)) <= 1e-12


def test_time_translation_invariance():
    for t in [(0, 1, 0, 2), (0, 2, 1, 3)]:
        shifted = tuple(x + 5 for x in t)
        assert C.avg_correlator_exact(shifted, 6) == pytest.approx(C.avg_correlator_exact(t, 6), abs=1e-13)


def test_avg_product_examples():
    assert C.avg_product_exact([(0, 1), (0, 1)], [False, True], 4) == pytest.approx(1 / 15, abs=1e-12)
    vals = [q * q * abs(C.avg_product_exact([(0, 1), (0, 2)], [False, True], q)) for q in (6, 8, 12)]
    assert max(vals) <= 1e-9
    with pytest.raises(ValueError):
        C.avg_product_exact([(0, 1)], [False, True], 4)


def test_three_fold_product_vanishes_by_symmetry():
    # Z -> -Z under U -> U X maps each (0,1) factor to minus itself
    for q in (6, 8):
        assert abs(C.avg_product_exact([(0, 1)] * 3, [False, True, False], q)) <= 1e-12


def test_product_decay_orders():
    # odd p = 3 with a non-vanishing combination decays at least like 1/q^2
    vals = [q * q * abs(C.avg_product_exact([(0, 1), (0, 1), (0, 2)], [False, True, True], q)) for q in (6, 8, 12)]
    assert vals == sorted(vals, reverse=True) and vals[-1] < 0.05
    # p = 4 decays like 1/q^4 with a finite constant
    vals = [q ** 4 * C.avg_product_exact([(0, 1)] * 4, [False, True, False, True], q).real for q in (6, 8, 12)]
    assert all(2.5 < v < 3.5 for v in vals)


def test_symmetry_factor():
    assert C.symmetry_factor((0, 1)) == 1
    assert C.symmetry_factor((0, 1, 0, 1)) == 2
    assert C.symmetry_factor((0, 1, 0, 1, 0, 1)) == 3
    for t in [(0, 1, 0, 2), (0, 2, 1, 3, 0, 2, 1, 3), (0, 1, 2)]:
        assert len(t) % C.symmetry_factor(t) == 0


def test_cyclic_equivalent():
    assert C.cyclic_equivalent((0, 1), (5, 6))
    assert not C.cyclic_equivalent((0, 1), (0, 2))
    assert C.cyclic_equivalent((0, 1, 0, 2), (0, 2, 0, 1))
    assert not C.cyclic_equivalent((0, 1), (0, 1, 0, 1))


def test_scaling_probe_exact():
    rows = C.scaling_probe((0, 1, 0, 1), (4, 8, 16))
    want = [-16 / 15, -64 / 63, -256 / 255]
    assert [r.compensated.real for r in rows] == pytest.approx(want, abs=1e-12)
    rows = C.scaling_probe((0, 1), (4, 8, 16), partner=(0, 1))
    comp = [r.compensated.real for r in rows]
    assert comp == sorted(comp, reverse=True) and comp[-1] == pytest.approx(256 / 255)
    assert all(r.value == 0 for r in C.scaling_probe((0, 1, 2), (4, 6)))
    with pytest.raises(ValueError):
        C.scaling_probe((0, 1), (8, 4))


def test_second_moment_leading_constant():
    # (0,1,0,1) has S = 2; the exact compensated value approaches it from above
    vals = [q * q * C.avg_product_exact([(0, 1, 0, 1)] * 2, [False, True], q).real for q in (8, 16)]
    assert abs(vals[1] - 2) < abs(vals[0] - 2) < 8 / 8
    assert abs(vals[1] - 2) * 16 < 1.0


def test_mc_matches_exact():
    est = C.avg_product_mc([(0, 1, 0, 2)], [False], 6, 4000, seed=3)
    exact = C.avg_correlator_exact((0, 1, 0, 2), 6)
    assert abs(est.mean.real - exact.real) <= 4 * est.se_re
