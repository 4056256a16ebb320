"""Shared builders for randomized tests; all tests seed their own rng."""

import numpy as np

from cnisim.pauli import CliffordCircuit, PauliString
from cnisim.tableau import init_basis_state


def random_circuit(n, depth, rng):
    ops = []
    for _ in range(depth):
        k = rng.integers(0, 3 if n > 1 else 2)
        if k == 0:
            ops.append(("H", int(rng.integers(0, n))))
        elif k == 1:
            ops.append(("S", int(rng.integers(0, n))))
        else:
            q = rng.permutation(n)[:2]
            ops.append(("CNOT", int(q[0]), int(q[1])))
    return CliffordCircuit(n, ops)


def random_pauli(n, rng, signed=True):
    return PauliString(
        n,
        int(rng.integers(0, 2)) if signed else 0,
        int(rng.integers(0, 2**n)),
        int(rng.integers(0, 2**n)),
    )


def random_stabilizer_state(n, rng, depth=None):
    tab = init_basis_state(n, int(rng.integers(0, 2**n)))
    tab.apply_ops(random_circuit(n, depth or 4 * n, rng).ops)
    return tab


def random_ops_with_projectors(n, depth, rng, p_proj=0.25):
    """Op sequence mixing unitaries with projector insertions."""
    ops = []
    for _ in range(depth):
        u = rng.random()
        if u < p_proj:
            ops.append((f"P{int(rng.integers(0, 2))}", int(rng.integers(0, n))))
        elif u < 0.5 or n == 1:
            ops.append((("H", "S")[int(rng.integers(0, 2))], int(rng.integers(0, n))))
        else:
            q = rng.permutation(n)[:2]
            ops.append(("CNOT", int(q[0]), int(q[1])))
    return ops
