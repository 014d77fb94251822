import itertools

import numpy as np
import pytest

from haarcorr import otoc
from haarcorr.correlators import default_z
from haarcorr.verify import within_band

ALL_LEGS = otoc.LayerSpec.on(*otoc.LEGS)
ONE_BAR = otoc.LayerSpec.on("1", "1b")


def pair_vectors(q):
    """|+> and |-> as explicit q^4 vectors, legs ordered (1, 1b, 2, 2b)."""
    plus = np.zeros((q,) * 4)
    minus = np.zeros((q,) * 4)
    for i, j in itertools.product(range(q), repeat=2):
        plus[i, i, j, j] = 1
        minus[i, j, j, i] = 1
    return plus.ravel() / q, minus.ravel() / q


def random_traceless(q, seed, hermitian=True):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
    if hermitian:
        m = m + m.conj().T
    m -= np.trace(m) / q * np.eye(q)
    return m / np.sqrt(np.trace(m.conj().T @ m).real / q)


def test_pair_gram():
    assert np.array_equal(otoc.pair_gram(4), [[1, 0.25], [0.25, 1]])
    assert np.array_equal(otoc.pair_gram(2), [[1, 0.5], [0.5, 1]])
    for q in (2, 5, 64):
        assert np.allclose(np.linalg.eigvalsh(otoc.pair_gram(q)), [1 - 1 / q, 1 + 1 / q])
    with pytest.raises(ValueError):
        otoc.pair_gram(1)


@pytest.mark.parametrize("q", [2, 3])
def test_gram_matches_explicit_vectors(q):
    p, m = pair_vectors(q)
    assert np.allclose([[p @ p, p @ m], [m @ p, m @ m]], otoc.pair_gram(q))


def test_layer_matrix_examples():
    q = 8
    assert np.allclose(otoc.layer_matrix(otoc.LayerSpec(), q), otoc.pair_gram(q))
    assert np.allclose(otoc.layer_matrix(ALL_LEGS, q), otoc.pair_gram(q))
    assert np.allclose(otoc.layer_matrix(ONE_BAR, q), [[1, 1 / q], [1 / q, 0]])


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("legs", [("1",), ("1", "1b"), ("1", "2b"), ("1", "1b", "2"), otoc.LEGS])
def test_layer_matrix_matches_tensor_contraction(q, legs):
    ops = {"A": random_traceless(q, 1, hermitian=False), "Z": np.eye(q)}
    layer = otoc.LayerSpec.on(*legs, op="A")
    # barred legs act by the entrywise conjugate in the tensor-product picture
    factors = [ops["A"] if leg in legs else np.eye(q) for leg in ("1", "1b", "2", "2b")]
    factors = [f.conj() if leg.endswith("b") and leg in legs else f for f, leg in zip(factors, ("1", "1b", "2", "2b"))]
    gamma = factors[0]
    for f in factors[1:]:
        gamma = np.kron(gamma, f)
    p, m = pair_vectors(q)
    want = np.array([[a.conj() @ gamma @ b for b in (p, m)] for a in (p, m)])
    assert np.allclose(otoc.layer_matrix(layer, q, ops), want)


@pytest.mark.parametrize("q", [2, 4, 8, 64])
def test_k_idempotent(q):
    k = otoc.projector_k(q)
    assert np.max(np.abs(k.squared_kernel() - k.kernel)) <= 1e-12
    assert np.allclose(k.pair_basis_matrix(), np.eye(2), atol=1e-12)
    assert np.allclose(k.coefficients(otoc.pair_gram(q)[:, 0]), [1, 0], atol=1e-12)


@pytest.mark.parametrize("q", [2, 3])
def test_k_is_projector_on_full_space(q):
    p, m = pair_vectors(q)
    basis = np.stack([p, m], axis=1)
    kmat = basis @ otoc.projector_k(q).kernel @ basis.T
    assert np.allclose(kmat @ kmat, kmat, atol=1e-12)
    assert np.allclose(kmat @ p, p) and np.allclose(kmat @ m, m)


def test_k_on_boundary_state():
    q = 4
    _, right = otoc.boundary_overlaps(q, default_z(q))
    assert np.allclose(right, [1 / q, 0])
    assert np.allclose(otoc.projector_k(q).coefficients(right), [4 / 15, -1 / 15])


def test_literal_prefactor_is_not_a_projector():
    # <0| = <+| - (1/q)<-| with prefactor 1/(1-q^2) maps |+> to -(1/q^2)|+>
    q = 4
    g = otoc.pair_gram(q)
    zero_bra = g[0] - g[1] / q  # (<0|+>, <0|->)
    coef_plus = zero_bra[0] / (1 - q * q)
    assert coef_plus == pytest.approx(-1 / q**2)
    assert otoc.projector_k(q).coefficients(g[:, 0])[0] == pytest.approx(1.0)


@pytest.mark.parametrize("q", [4, 8])
def test_t1_exact(q):
    assert otoc.theorem4_value([], q) == pytest.approx(-1 / (q * q - 1), abs=1e-12)
    assert otoc.otoc_exact([], q) == pytest.approx(-1 / (q * q - 1), abs=1e-12)


@pytest.mark.parametrize("layer", ["1,1b", "", "2,2b", "1,1b,2,2b"])
def test_t2_error_band(layer):
    layers = otoc.parse_layers(layer, 2)
    vals = [q**3 * abs(otoc.theorem4_value(layers, q) - otoc.otoc_exact(layers, q)) for q in (4, 8, 16)]
    assert within_band(vals)


def test_lone_insertion_vanishes():
    layers = [otoc.LayerSpec.on("1")]
    assert otoc.theorem4_value(layers, 8) == 0
    assert abs(otoc.otoc_exact(layers, 8)) <= 1e-12


def test_leg_relabeling_symmetry():
    for q in (4, 6):
        a = otoc.otoc_exact([otoc.LayerSpec.on("1", "1b")], q)
        b = otoc.otoc_exact([otoc.LayerSpec.on("2", "2b")], q)
        assert a == pytest.approx(b, abs=1e-12)


def test_general_traceless_insertion():
    vals = []
    for q in (4, 8, 16):
        ops = {"Z": default_z(q), "O": random_traceless(q, 7)}
        layers = [otoc.LayerSpec.on("1", "1b", op="O")]
        vals.append(q**3 * abs(otoc.theorem4_value(layers, q, ops) - otoc.otoc_exact(layers, q, ops)))
    assert within_band(vals)


def test_adjoint_convention_is_pinned_by_oracle():
    # barred legs take the adjoint; using the bare operator there misses the oracle
    for q in (8, 16):
        a = random_traceless(q, 3, hermitian=False)
        ops = {"Z": default_z(q), "A": a, "B": a.conj().T}
        right = [otoc.LayerSpec(dict.fromkeys(otoc.LEGS, "A"))]
        wrong = [otoc.LayerSpec({"1": "A", "1b": "B", "2": "A", "2b": "B"})]
        exact = otoc.otoc_exact(right, q, ops)
        assert q**2 * abs(otoc.theorem4_value(right, q, ops) - exact) < 0.01
        assert q**2 * abs(otoc.theorem4_value(wrong, q, ops) - exact) > 0.1


def test_plus_minus_decomposition():
    q = 8
    plus, minus = otoc.otoc_plus_minus([], q)
    assert plus == 0 and minus == pytest.approx(1 / q**2)
    for layer in ["", "1,1b", "1,2b"]:
        layers = otoc.parse_layers(layer, 2)
        diffs = []
        for q in (8, 16, 32):
            p, m = otoc.otoc_plus_minus(layers, q)
            diffs.append(q**2 * abs((p - m) - otoc.theorem4_value(layers, q)))
        # agreement at order 1/q^2: the q^2-compensated difference dies off
        assert diffs == sorted(diffs, reverse=True) and diffs[-1] < 0.02


def test_parse_layers():
    layers = otoc.parse_layers("1,1b;;2,2b", 4)
    assert [dict(l.insertions) for l in layers] == [{"1": "Z", "1b": "Z"}, {}, {"2": "Z", "2b": "Z"}]
    assert otoc.format_layers(layers) == "1,1b;;2,2b"
    assert otoc.parse_layers("", 1) == []
    with pytest.raises(ValueError):
        otoc.parse_layers("1", 3)
    with pytest.raises(ValueError):
        otoc.parse_layers("3", 2)
    with pytest.raises(ValueError):
        otoc.parse_layers("1", 1)


def test_mc_agrees():
    est = otoc.otoc_mc([], 8, 2000, seed=1)
    assert abs(est.mean.real + 1 / 63) <= 3 * est.se_re
    layers = [ONE_BAR]
    est = otoc.otoc_mc(layers, 8, 2000, seed=2)
    assert abs(est.mean.real - otoc.otoc_exact(layers, 8).real) <= 3 * est.se_re
