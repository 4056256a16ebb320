import numpy as np
import pytest

from conftest import random_circuit, random_ops_with_projectors, random_pauli
from cnisim.compress import (
    compress,
    compress_global,
    compress_pairwise,
    same_z_block_clifford,
    same_z_block_general,
    z_block_key_clifford,
    z_block_key_general,
)
from cnisim.noise import (
    BasisChannel,
    GateNoiseSpec,
    GlobalNoiseModel,
    gamma_of,
    invert_pauli_channel,
    make_decomposition,
    truncate_gatewise,
)
from cnisim.pauli import CliffordCircuit, PauliString, pauli_from_text
from cnisim.ptm import (
    compose,
    measurement_channel,
    ptm_of_ops,
    ptm_of_pauli_channel,
    z_block,
)


def dense_same_z_block(b1, b2):
    return np.allclose(z_block(b1.ptm()), z_block(b2.ptm()), atol=1e-10)


def random_clifford_channel(n, rng):
    if rng.random() < 0.4:
        p = random_pauli(n, rng, signed=False)
        return BasisChannel.from_pauli(p)
    return BasisChannel.from_ops(n, tuple(random_circuit(n, int(rng.integers(0, 8)), rng).ops))


def random_general_channel(n, rng):
    if rng.random() < 0.25:
        return random_clifford_channel(n, rng)
    ops = random_ops_with_projectors(n, int(rng.integers(1, 8)), rng)
    return BasisChannel.from_ops(n, tuple(ops))


def test_clifford_comparison_matches_dense():
    rng = np.random.default_rng(41)
    for trial in range(120):
        n = int(rng.integers(1, 4))
        b1 = random_clifford_channel(n, rng)
        if rng.random() < 0.3:
            # same action, different presentation
            extra = tuple(b1.ops) + (("S", 0),) * 4 if b1.kind == "ops" else None
            b2 = BasisChannel.from_ops(n, extra) if extra else b1
        else:
            b2 = random_clifford_channel(n, rng)
        assert same_z_block_clifford(b1, b2) == dense_same_z_block(b1, b2), trial


def test_general_comparison_matches_dense():
    rng = np.random.default_rng(42)
    for trial in range(120):
        n = int(rng.integers(1, 4))
        b1 = random_general_channel(n, rng)
        b2 = random_general_channel(n, rng) if rng.random() < 0.7 else b1
        assert same_z_block_general(b1, b2) == dense_same_z_block(b1, b2), trial


def test_general_comparison_handles_annihilating_projectors():
    # two channels whose nonzero-input sets are proper affine subspaces:
    # identical on basis probes, different in the Z block
    zero_channel = BasisChannel.from_ops(
        2, (("P1", 0), ("S", 0), ("P0", 0), ("CNOT", 1, 0), ("P0", 1), ("CNOT", 0, 1))
    )
    picky = BasisChannel.from_ops(2, (("P1", 1), ("S", 0), ("P1", 0)))
    assert not dense_same_z_block(zero_channel, picky)
    assert not same_z_block_general(zero_channel, picky)


def test_comparisons_agree_on_clifford_channels():
    rng = np.random.default_rng(43)
    for _ in range(80):
        n = int(rng.integers(1, 4))
        b1 = random_clifford_channel(n, rng)
        b2 = random_clifford_channel(n, rng)
        assert same_z_block_clifford(b1, b2) == same_z_block_general(b1, b2)


def test_compress_merges_z_group_fault():
    # the XX inverse term propagates to ZZ, the identity class
    d = invert_pauli_channel(
        {pauli_from_text("+II"): 0.9, pauli_from_text("+XX"): 0.1}
    )
    assert d.gamma == 1.25
    tail = CliffordCircuit(2, [("H", 0), ("H", 1)])
    c = compress(d, context=tail)
    assert len(c.terms) == 1
    assert c.terms[0][0].is_identity()
    assert abs(c.terms[0][1] - 1.0) < 1e-14
    assert c.gamma == 1.0


def test_compress_without_context_keeps_distinct_terms():
    d = invert_pauli_channel(
        {pauli_from_text("+II"): 0.9, pauli_from_text("+XX"): 0.1}
    )
    c = compress(d)
    assert len(c.terms) == 2
    assert c.gamma == d.gamma


def test_compress_is_idempotent():
    rng = np.random.default_rng(44)
    for _ in range(20):
        n = 2
        probs = {PauliString(n, 0, 0, 0): 0.85}
        while len(probs) < 4:
            p = random_pauli(n, rng, signed=False)
            if p not in probs:
                probs[p] = 0.05
        d = invert_pauli_channel(probs)
        tail = random_circuit(n, 6, rng)
        c1 = compress(d, context=tail)
        c2 = compress(c1)
        assert len(c2.terms) == len(c1.terms)
        assert abs(c2.gamma - c1.gamma) < 1e-12


def test_keyed_compression_matches_pairwise():
    rng = np.random.default_rng(45)
    for _ in range(15):
        n = 2
        terms = [(BasisChannel.identity(n), 1.2)]
        for _ in range(int(rng.integers(2, 6))):
            terms.append(
                (random_clifford_channel(n, rng), float(rng.uniform(-0.3, 0.3)))
            )
        d = make_decomposition(n, terms)
        a = compress(d)
        b = compress_pairwise(d)
        assert {(ch.label(), round(q, 12)) for ch, q in a.terms} == {
            (ch.label(), round(q, 12)) for ch, q in b.terms
        }


def test_compressed_inverse_still_inverts_measured_channel():
    # M_Z E'^-1 E = M_Z: compression must not change what the measurement sees
    rng = np.random.default_rng(46)
    for _ in range(12):
        n = 2
        probs = {PauliString(n, 0, 0, 0): 0.82}
        while len(probs) < 4:
            p = random_pauli(n, rng, signed=False)
            if p not in probs:
                probs[p] = 0.06
        d = invert_pauli_channel(probs)
        tail = random_circuit(n, 8, rng)
        c = compress(d, context=tail)
        assert c.gamma <= d.gamma + 1e-12
        # compression preserves each term's action on measured states, so
        # M_Z C M_Z E_prop = M_Z for the tail-conjugated channel E_prop
        e = ptm_of_pauli_channel(n, probs)
        u = ptm_of_ops(n, tail.ops)
        uinv = ptm_of_ops(n, tail.inverse().ops)
        e_prop = compose(u, compose(e, uinv))
        m = measurement_channel(n)
        left = compose(m, compose(c.ptm(), compose(m, e_prop)))
        assert np.allclose(left.mat, m.mat, atol=1e-11)


def test_compress_global_merges_z_group_terms():
    zz = BasisChannel.from_pauli(pauli_from_text("+ZZ"))
    m = GlobalNoiseModel(
        2, 1.0, ((BasisChannel.identity(2), 0.9, 1), (zz, 0.1, 1))
    )
    c = compress_global(m)
    assert len(c.terms) == 1
    assert c.terms[0][0].is_identity()
    assert abs(c.eta - 1.0) < 1e-14
    assert abs(gamma_of(c) - 1.0) < 1e-14


def test_compress_global_signed_cancellation():
    zz = BasisChannel.from_pauli(pauli_from_text("+ZZ"))
    zi = BasisChannel.from_pauli(pauli_from_text("+ZI"))
    m = GlobalNoiseModel(
        2, 2.0, ((BasisChannel.identity(2), 0.5, 1), (zz, 0.25, 1), (zi, 0.25, -1))
    )
    c = compress_global(m)
    assert len(c.terms) == 1 and c.terms[0][0].is_identity()
    assert abs(c.eta - 1.0) < 1e-14


def test_compress_global_preserves_z_block_and_gamma():
    rng = np.random.default_rng(47)
    for _ in range(10):
        n = 2
        circ = CliffordCircuit(n, [("CNOT", 0, 1), ("H", 0), ("CNOT", 1, 0)])
        specs = []
        for gi in circ.cnot_positions():
            p = random_pauli(n, rng, signed=False)
            if p.is_identity():
                continue
            specs.append(GateNoiseSpec.from_map(gi, {p: float(rng.uniform(0.02, 0.1))}))
        if not specs:
            continue
        m = truncate_gatewise(specs, circ)
        c = compress_global(m)
        assert gamma_of(c) <= gamma_of(m) + 1e-12
        assert np.allclose(
            z_block(c.ptm()), z_block(m.ptm()), atol=1e-11
        )


def test_compress_global_rejects_noninvertible():
    xx = BasisChannel.from_pauli(pauli_from_text("+XX"))
    singular = GlobalNoiseModel(
        2, 1.0, ((BasisChannel.identity(2), 0.5, 1), (xx, 0.5, 1))
    )
    with pytest.raises(ValueError, match="non-invertible"):
        compress_global(singular)
    signed = GlobalNoiseModel(
        2, 1.0, ((BasisChannel.identity(2), 0.2, 1), (xx, 0.8, -1))
    )
    with pytest.raises(ValueError, match="Pr"):
        compress_global(signed)


def test_compress_global_keeps_deep_flip_mask_models():
    # beyond the geometric-series radius yet exactly invertible: the merge
    # must not reject it
    xx = BasisChannel.from_pauli(pauli_from_text("+XX"))
    m = GlobalNoiseModel(
        2, 1.0, ((BasisChannel.identity(2), 0.2, 1), (xx, 0.8, 1))
    )
    c = compress_global(m)
    assert c.pr_identity == pytest.approx(0.2)
    assert np.allclose(z_block(c.ptm()), z_block(m.ptm()), atol=1e-12)
