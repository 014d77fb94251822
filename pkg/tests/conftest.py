import random

import numpy as np
import pytest

from haarcorr.expression import Fixed, MomentExpression, UPow


def random_expression(rng: random.Random, q: int, max_n: int = 3, n_ops: int = 2) -> MomentExpression:
    """Random balanced expression: N U's, N U^dagger's and a few fixed operators over 1-2 trace words."""
    nrng = np.random.default_rng(rng.getrandbits(32))
    n = rng.randint(1, max_n)
    ops = {}
    for k in range(n_ops):
        m = nrng.standard_normal((q, q)) + 1j * nrng.standard_normal((q, q))
        ops[f"A{k}"] = m / np.sqrt(np.trace(m.conj().T @ m).real / q)
    atoms = [UPow(1)] * n + [UPow(-1)] * n + [Fixed(name) for name in ops for _ in range(rng.randint(0, 2))]
    rng.shuffle(atoms)
    cut = rng.randint(1, len(atoms) - 1) if rng.random() < 0.5 else len(atoms)
    words = tuple(w for w in (tuple(atoms[:cut]), tuple(atoms[cut:])) if w)
    return MomentExpression(words, ops, q ** -float(len(words)))


@pytest.fixture
def z4():
    return np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
