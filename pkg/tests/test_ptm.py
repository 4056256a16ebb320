import numpy as np
import pytest

from conftest import random_circuit, random_pauli, random_stabilizer_state
from cnisim.pauli import CliffordCircuit, PauliString, pauli_from_text
from cnisim.ptm import (
    Ptm,
    apply_ptm,
    basis_state_vector,
    check_propagable,
    compose,
    diagonal_observable_vector,
    circuit_unitary,
    index_to_masks,
    measurement_channel,
    ops_kraus,
    pauli_dense,
    pauli_diag_signs,
    pauli_index,
    propagate_through_measurement,
    ptm_from_kraus,
    ptm_of_clifford_conjugation,
    ptm_of_ops,
    ptm_of_pauli_channel,
    ptm_of_unitary,
    tableau_to_density_matrix,
    tableau_to_pauli_vector,
    twirl_average,
    twirl_exact,
    twirl_sampled,
    twirl_set,
    z_block,
    z_indices,
)
from cnisim.tableau import init_basis_state


def test_pauli_index_convention():
    # index = sum_q (z_q + 2 x_q) 4^q: I=0, Z=1, X=2, Y=3 per qubit
    assert pauli_index(0, 0) == 0
    assert pauli_index(1, 0) == 1
    assert pauli_index(0, 1) == 2
    assert pauli_index(1, 1) == 3
    assert pauli_index(0b10, 0b01) == 2 + 4 * 1
    for idx in range(64):
        z, x = index_to_masks(idx, 3)
        assert pauli_index(z, x) == idx


def test_ptm_entries_are_trace_coefficients():
    rng = np.random.default_rng(21)
    n = 2
    c = random_circuit(n, 8, rng)
    e = ptm_of_unitary(c)
    u = circuit_unitary(c)
    for a in range(16):
        za, xa = index_to_masks(a, n)
        pa = pauli_dense(n, za, xa)
        for b in range(16):
            zb, xb = index_to_masks(b, n)
            pb = pauli_dense(n, zb, xb)
            want = np.trace(pa @ u @ pb @ u.conj().T).real / 2**n
            assert abs(e.mat[a, b] - want) < 1e-12


def test_clifford_ptm_is_orthogonal():
    rng = np.random.default_rng(22)
    for _ in range(15):
        n = int(rng.integers(1, 4))
        e = ptm_of_unitary(random_circuit(n, 10, rng))
        assert np.allclose(e.mat @ e.mat.T, np.eye(4**n), atol=1e-12)


def test_ptm_of_ops_matches_kraus_route():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(1, 3))
        ops = random_circuit(n, 6, rng).ops
        a = ptm_of_ops(n, ops)
        b = ptm_from_kraus(n, ops_kraus(n, ops))
        assert np.allclose(a.mat, b.mat, atol=1e-12)


def test_conjugation_ptm_matches_unitary_ptm():
    rng = np.random.default_rng(24)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        c = random_circuit(n, 8, rng)
        assert np.allclose(
            ptm_of_clifford_conjugation(c).mat, ptm_of_unitary(c).mat, atol=1e-12
        )


def test_pauli_channel_ptm_is_diagonal():
    probs = {
        pauli_from_text("+II"): 0.9,
        pauli_from_text("+XX"): 0.1,
    }
    e = ptm_of_pauli_channel(2, probs)
    assert np.allclose(e.mat, np.diag(np.diag(e.mat)))
    # lambda_sigma = sum_P p_P (-1)^<sigma,P>
    xx = pauli_index(0, 0b11)
    zi = pauli_index(0b01, 0)
    assert abs(e.mat[xx, xx] - 1.0) < 1e-15
    assert abs(e.mat[zi, zi] - 0.8) < 1e-15


def test_pauli_diag_signs_match_commutation():
    rng = np.random.default_rng(25)
    n = 2
    for _ in range(10):
        p = random_pauli(n, rng, signed=False)
        signs = pauli_diag_signs(n, p.z_mask, p.x_mask)
        e = ptm_of_pauli_channel(n, {p: 1.0})
        assert np.allclose(np.diag(e.mat), signs)


def test_measurement_channel_keeps_z_sector():
    n = 2
    m = measurement_channel(n)
    assert np.allclose(m.mat, np.diag(np.diag(m.mat)))
    diag = np.diag(m.mat)
    zset = set(z_indices(n))
    for idx in range(4**n):
        assert abs(diag[idx] - (1.0 if idx in zset else 0.0)) < 1e-15


def test_z_block_and_propagation_identity():
    # E' M_Z = M_Z E with E' the measurement-propagated channel
    rng = np.random.default_rng(26)
    for _ in range(20):
        n = int(rng.integers(1, 3))
        paulis = {PauliString(n, 0, 0, 0): 0.75}
        while len(paulis) < 3:
            p = random_pauli(n, rng, signed=False)
            if p not in paulis:
                paulis[p] = 0.125
        e = ptm_of_pauli_channel(n, paulis)
        assert check_propagable(e)
        m = measurement_channel(n)
        left = compose(propagate_through_measurement(e), m)
        right = compose(m, e)
        assert np.allclose(left.mat, right.mat, atol=1e-12)


def test_check_propagable_rejects_leaky_channel():
    # conjugation by H maps Z into X: E01 block nonzero
    e = ptm_of_ops(1, [("H", 0)])
    assert not check_propagable(e)


def test_z_block_shape():
    n = 2
    e = ptm_of_pauli_channel(n, {PauliString(n, 0, 0, 0): 1.0})
    zb = z_block(e)
    assert zb.shape == (2**n, 2**n)
    assert np.allclose(zb, np.eye(2**n))


def test_twirl_exact_diagonalizes_kept_sector():
    rng = np.random.default_rng(27)
    n = 2
    kraus = ops_kraus(n, random_circuit(n, 6, rng).ops)
    # a non-Clifford-looking channel: mix two unitaries
    e1 = ptm_from_kraus(n, kraus)
    e2 = ptm_of_ops(n, [("S", 0)])
    mixed = Ptm(n, 0.7 * e1.mat + 0.3 * e2.mat)
    t = twirl_exact(mixed, "pauli")
    assert np.allclose(t.mat, np.diag(np.diag(t.mat)), atol=1e-12)
    assert np.allclose(np.diag(t.mat), np.diag(mixed.mat), atol=1e-12)


def test_twirl_average_matches_exact():
    rng = np.random.default_rng(28)
    n = 2
    e = Ptm(n, ptm_of_ops(n, [("H", 0), ("CNOT", 0, 1)]).mat)
    for which in ("z", "pauli"):
        avg = twirl_average(e, twirl_set(n, which))
        assert np.allclose(avg.mat, twirl_exact(e, which).mat, atol=1e-12)


def test_twirl_sampled_converges():
    rng = np.random.default_rng(29)
    n = 2
    e = ptm_of_ops(n, [("H", 0)])
    t = twirl_sampled(e, 4000, rng, which="pauli")
    exact = twirl_exact(e, "pauli")
    assert np.max(np.abs(t.mat - exact.mat)) < 0.1


def test_state_and_observable_vectors():
    rng = np.random.default_rng(30)
    n = 2
    v = basis_state_vector(n, 0b10)
    fvals = rng.normal(size=4)
    f = diagonal_observable_vector(n, fvals)
    assert abs(f.dot(v) - fvals[0b10]) < 1e-12
    tab = random_stabilizer_state(n, rng)
    tv = tableau_to_pauli_vector(tab)
    rho = tableau_to_density_matrix(tab)
    want = float(np.real(np.sum(fvals * np.diag(rho))))
    assert abs(f.dot(tv) - want) < 1e-12


def test_apply_ptm_evolves_vectors():
    n = 1
    v = basis_state_vector(n, 0)
    e = ptm_of_ops(n, [("H", 0)])
    w = apply_ptm(e, v)
    f = diagonal_observable_vector(n, [1.0, 0.0])  # <0|rho|0>
    assert abs(f.dot(w) - 0.5) < 1e-12
