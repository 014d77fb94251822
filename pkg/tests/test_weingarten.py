import itertools
from fractions import Fraction

import numpy as np
import pytest

from haarcorr import perm, verify, weingarten as wg

SWAP = (1, 0)


def test_gram_small():
    assert np.array_equal(wg.gram_matrix(1, 3.0), [[3.0]])
    assert np.array_equal(wg.gram_matrix(2, 2), [[4, 2], [2, 4]])
    q = 5.0
    assert np.array_equal(wg.gram_matrix(2, q), [[q * q, q], [q, q * q]])


def test_gram_range():
    with pytest.raises(ValueError):
        wg.gram_matrix(wg.MAX_GRAM_N + 1, 8)


@pytest.mark.parametrize("q", [2, 3, 7, 10])
def test_closed_forms(q):
    assert wg.wg_exact(1, q, (0,), exact=True) == Fraction(1, q)
    assert wg.wg_exact(2, q, (0, 1), exact=True) == Fraction(1, q * q - 1)
    assert wg.wg_exact(2, q, SWAP, exact=True) == Fraction(-1, q * (q * q - 1))
    assert wg.wg_exact(2, q, SWAP) == pytest.approx(-1 / (q * (q * q - 1)), rel=1e-12)


def test_three_cycle_closed_form():
    q = 5
    want = Fraction(2, (q * q - 1) * (q * q - 4) * q)
    assert wg.wg_exact(3, q, (1, 2, 0), exact=True) == want


def test_rejects_small_q():
    with pytest.raises(ValueError):
        wg.wg_exact(3, 2, (0, 1, 2))


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("q", [6, 9])
def test_defining_relation(n, q):
    g = wg.gram_matrix(n, q)
    elems = list(perm.enumerate_perms(n))
    w = np.array([[wg.wg_exact(n, q, perm.compose(s, perm.inverse(t))) for t in elems] for s in elems])
    assert np.allclose(w @ g, np.eye(len(elems)), atol=1e-9)


@pytest.mark.parametrize("n", range(1, 5))
def test_conjugation_invariance(n):
    elems = list(perm.enumerate_perms(n))
    q = 7
    table = wg.weingarten_table(n, q, exact=True)
    by_type = {}
    for s in elems:
        by_type.setdefault(perm.cycle_type(s), set()).add(table(s))
    assert all(len(v) == 1 for v in by_type.values())
    for s, g in itertools.product(elems, repeat=2):
        conj = perm.compose(perm.compose(g, s), perm.inverse(g))
        assert table(conj) == table(s)


def test_float_matches_exact():
    for n in range(1, 6):
        for lam in perm.partitions(n):
            s = perm.representative(lam)
            assert wg.wg_exact(n, 11, s) == pytest.approx(float(wg.wg_exact(n, 11, s, exact=True)), rel=1e-10)


def test_leading_examples():
    assert wg.wg_leading(3, 4.0, perm.identity(3)) == 4.0 ** -3
    assert wg.wg_leading(2, 3.0, SWAP) == -(3.0 ** -3)
    assert wg.wg_leading(3, 2.0, (1, 2, 0)) == 2 * 2.0 ** -5


@pytest.mark.parametrize("lam", [lam for n in range(1, 5) for lam in perm.partitions(n)])
def test_asymptotic_band(lam):
    n = sum(lam)
    s = perm.representative(lam)
    k = perm.transposition_distance(s)
    vals = [abs(float(wg.wg_exact(n, q, s, exact=True)) - wg.wg_leading(n, q, s)) * q ** (n + k + 2)
            for q in (8, 16, 32, 64)]
    assert verify.within_band(vals)
    assert max(vals) < 100


def test_term_order_examples():
    assert wg.term_order(SWAP, SWAP, 2) == -1
    assert wg.term_order((0, 1), (0, 1), 2) == 1
    s = (1, 0, 3, 2)
    assert wg.term_order(s, s, 4) == -3


@pytest.mark.parametrize("n", [2, 4])
def test_parity_obstruction(n):
    assert verify.parity_obstruction(n) == []
