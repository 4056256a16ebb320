import numpy as np
import pytest

from conftest import random_circuit, random_pauli
from cnisim.pauli import (
    CliffordCircuit,
    PauliString,
    commutes,
    conjugate_by_circuit,
    conjugate_by_ops,
    gate_on_word,
    is_in_z_group,
    pauli_from_text,
    pauli_identity,
    pauli_multiply,
    pauli_to_text,
)
from cnisim.ptm import circuit_unitary, op_matrix, pauli_dense


def test_text_round_trip():
    # leftmost letter is qubit 1 (the low bit)
    p = pauli_from_text("-XIZY")
    assert p.n == 4
    assert p.sign_bit == 1
    assert p.x_mask == 0b1001
    assert p.z_mask == 0b1100
    assert pauli_to_text(p) == "-XIZY"
    # the sign prefix is optional and omitted for positive words
    assert pauli_to_text(pauli_from_text("+IIII")) == "IIII"
    for text in ("X", "-Z", "YY", "-IXZY"):
        assert pauli_to_text(pauli_from_text(text)) == text


def test_identity():
    p = pauli_identity(3)
    assert p.is_identity()
    assert pauli_to_text(p) == "III"


def test_dense_is_hermitian():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        p = random_pauli(n, rng)
        m = pauli_dense(n, p.z_mask, p.x_mask, p.sign_bit)
        assert np.allclose(m, m.conj().T)
        assert np.allclose(m @ m, np.eye(2**n))


def test_multiply_against_dense():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        a, b = random_pauli(n, rng), random_pauli(n, rng)
        phase, w = pauli_multiply(a, b)
        da = pauli_dense(n, a.z_mask, a.x_mask, a.sign_bit)
        db = pauli_dense(n, b.z_mask, b.x_mask, b.sign_bit)
        dw = pauli_dense(n, w.z_mask, w.x_mask, w.sign_bit)
        assert np.allclose(da @ db, phase * dw)
        assert phase in (1, 1j, -1j)  # -1 is folded into w's sign bit


def test_commutes_against_dense():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        a, b = random_pauli(n, rng), random_pauli(n, rng)
        da = pauli_dense(n, a.z_mask, a.x_mask, a.sign_bit)
        db = pauli_dense(n, b.z_mask, b.x_mask, b.sign_bit)
        assert commutes(a, b) == np.allclose(da @ db, db @ da)


def test_gate_on_word_exhaustive_dense():
    # all single and two qubit words through each generator gate
    for op in (("H", 0), ("S", 0), ("H", 1), ("S", 1), ("CNOT", 0, 1), ("CNOT", 1, 0)):
        n = 2
        u = op_matrix(n, op)
        for s in (0, 1):
            for z in range(4):
                for x in range(4):
                    s2, z2, x2 = gate_on_word(op, s, z, x)
                    before = pauli_dense(n, z, x, s)
                    after = pauli_dense(n, z2, x2, s2)
                    assert np.allclose(u @ before @ u.conj().T, after), (op, s, z, x)


def test_conjugate_by_circuit_inverse_round_trip():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        c = random_circuit(n, 12, rng)
        p = random_pauli(n, rng)
        q = conjugate_by_circuit(p, c)
        back = conjugate_by_ops(q, c.inverse().ops)
        assert back == p


def test_conjugate_matches_dense():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        c = random_circuit(n, 8, rng)
        p = random_pauli(n, rng)
        q = conjugate_by_circuit(p, c)
        u = circuit_unitary(c)
        before = pauli_dense(n, p.z_mask, p.x_mask, p.sign_bit)
        after = pauli_dense(n, q.z_mask, q.x_mask, q.sign_bit)
        assert np.allclose(u @ before @ u.conj().T, after)


def test_is_in_z_group():
    assert is_in_z_group(pauli_from_text("ZIZ"))
    assert is_in_z_group(pauli_from_text("IIII"))
    # the group is sign-free: a negative word is not a member
    assert not is_in_z_group(pauli_from_text("-IIII"))
    assert not is_in_z_group(pauli_from_text("XII"))
    assert not is_in_z_group(pauli_from_text("YZI"))


def test_circuit_text_round_trip():
    text = "H 1\nS 3\nCNOT 1 2"
    c = CliffordCircuit.from_text(text, 3)
    assert c.ops == [("H", 0), ("S", 2), ("CNOT", 0, 1)]
    assert c.to_text() == text
    assert CliffordCircuit.from_text(c.key(), 3).ops == c.ops


def test_circuit_text_rejects_bad_lines():
    with pytest.raises(ValueError):
        CliffordCircuit.from_text("H 5", 3)
    with pytest.raises(ValueError):
        CliffordCircuit.from_text("CNOT 1 1", 3)
    with pytest.raises(ValueError):
        CliffordCircuit.from_text("T 1", 3)


def test_circuit_inverse_is_identity_dense():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        c = random_circuit(n, 10, rng)
        u = circuit_unitary(c)
        v = circuit_unitary(c.inverse())
        assert np.allclose(v @ u, np.eye(2**n))
