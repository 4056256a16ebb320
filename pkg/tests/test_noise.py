import json
import math

import numpy as np
import pytest

from conftest import random_circuit, random_pauli
from cnisim.noise import (
    BasisChannel,
    GateNoiseSpec,
    GlobalNoiseModel,
    L_MAX,
    QuasiProbDecomposition,
    bitflip_gate_specs,
    depolarizing_gate_specs,
    gamma_of,
    identity_model,
    invert_channel_dense,
    invert_pauli_channel,
    make_decomposition,
    neumann_sample_inverse,
    noise_from_json,
    noise_to_json,
    propagate_error,
    truncate_gatewise,
    uniform_depolarizing_model,
    universal_basis_channels,
)
from cnisim.pauli import CliffordCircuit, PauliString, pauli_from_text
from cnisim.ptm import Ptm, compose, ptm_of_ops, ptm_of_pauli_channel


def depolarizing_probs(n, p):
    probs = {}
    for z in range(2**n):
        for x in range(2**n):
            if z == 0 and x == 0:
                continue
            probs[PauliString(n, 0, z, x)] = p / (4**n - 1)
    probs[PauliString(n, 0, 0, 0)] = 1.0 - p
    return probs


def test_invert_two_qubit_bitflip_frozen():
    probs = {
        pauli_from_text("+II"): 0.9,
        pauli_from_text("+XX"): 0.1,
    }
    d = invert_pauli_channel(probs)
    coeffs = {ch.label(): q for ch, q in d.terms}
    assert coeffs == {"II": 1.125, "XX": -0.125}
    assert d.gamma == 1.25


def test_invert_depolarizing_gamma_frozen():
    d = invert_pauli_channel(depolarizing_probs(2, 0.05))
    assert abs(d.gamma - 1.105633802816901) < 1e-15


def test_inverse_round_trips_dense():
    rng = np.random.default_rng(31)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        probs = {PauliString(n, 0, 0, 0): 0.8}
        while len(probs) < 4:
            p = random_pauli(n, rng, signed=False)
            if p not in probs:
                probs[p] = 0.2 / 3
        d = invert_pauli_channel(probs)
        e = ptm_of_pauli_channel(n, probs)
        prod = compose(d.ptm(), e)
        assert np.allclose(prod.mat, np.eye(4**n), atol=1e-10)


def test_invert_singular_channel_raises():
    # lambda vanishes for the fully dephasing direction
    probs = {
        pauli_from_text("+I"): 0.5,
        pauli_from_text("+X"): 0.5,
    }
    with pytest.raises(ValueError):
        invert_pauli_channel(probs)


def test_gate_noise_spec_normalizes_signs():
    spec = GateNoiseSpec.from_map(2, {pauli_from_text("-XX"): 0.1})
    (p, q), = spec.paulis
    assert p.sign_bit == 0 and q == 0.1
    assert spec.total_rate == 0.1


def test_gate_noise_spec_rejects_identity_and_overflow():
    with pytest.raises(ValueError):
        GateNoiseSpec.from_map(0, {pauli_from_text("+II"): 0.1})
    with pytest.raises(ValueError):
        GateNoiseSpec.from_map(0, {pauli_from_text("+XX"): 1.2})


def test_propagate_error_conjugates_pauli():
    tail = CliffordCircuit(2, [("CNOT", 0, 1), ("H", 0)])
    b = BasisChannel.from_pauli(pauli_from_text("+XI"))
    out = propagate_error(b, tail)
    # X on the control spreads through CNOT then H turns X into Z
    assert out.kind == "pauli"
    assert (out.z_mask, out.x_mask) == (0b01, 0b10)


def test_propagate_error_wraps_ops():
    tail = CliffordCircuit(1, [("H", 0)])
    b = BasisChannel.from_ops(1, (("P0", 0),))
    out = propagate_error(b, tail)
    assert out.kind == "ops"
    want = compose(
        ptm_of_ops(1, [("H", 0)]),
        compose(b.ptm(), ptm_of_ops(1, [("H", 0)])),
    )
    assert np.allclose(out.ptm().mat, want.mat, atol=1e-12)


def test_truncate_gatewise_counts_and_identity_weight():
    n = 2
    circ = CliffordCircuit(n, [("CNOT", 0, 1)] * 10)
    p = 0.004
    specs = depolarizing_gate_specs(circ, p)
    model = truncate_gatewise(specs, circ)
    assert model.eta == 1.0
    assert abs(model.pr_identity - (1 - 10 * p)) < 1e-12
    tails = [t for t in model.terms if not t[0].is_identity()]
    assert len(tails) == 150  # 10 gates x 15 Pauli faults
    assert all(abs(q - p / 15) < 1e-15 for _, q, _ in tails)
    assert all(s == 1 for _, _, s in tails)


def test_truncate_gatewise_first_order_error_is_quadratic():
    n = 2
    N = 3
    p = 0.01
    circ = CliffordCircuit(n, [("CNOT", 0, 1), ("H", 0), ("CNOT", 1, 0)])
    specs = depolarizing_gate_specs(circ, p)
    model = truncate_gatewise(specs, circ)
    # exact faulty circuit vs ideal + first order tail, as channels
    exact = Ptm(n, np.eye(4**n))
    ideal = ptm_of_ops(n, circ.ops)
    spec_map = {s.gate_index: s for s in specs}
    for i, op in enumerate(circ.ops):
        exact = compose(ptm_of_ops(n, [op]), exact)
        if i in spec_map:
            probs = {q: w for q, w in spec_map[i].paulis}
            probs[PauliString(n, 0, 0, 0)] = 1 - spec_map[i].total_rate
            exact = compose(ptm_of_pauli_channel(n, probs), exact)
    approx = compose(model.ptm(), ideal)
    dist = np.max(np.abs(exact.mat - approx.mat))
    assert dist <= 3 * (N * p) ** 2


def test_truncate_gatewise_rejects_total_rate_one():
    circ = CliffordCircuit(2, [("CNOT", 0, 1)] * 2)
    specs = [
        GateNoiseSpec.from_map(i, {pauli_from_text("+XX"): 0.5}) for i in range(2)
    ]
    with pytest.raises(ValueError):
        truncate_gatewise(specs, circ)


def _bitflip_model(n, pr_noise):
    circ = CliffordCircuit(n, [("CNOT", 0, 1)])
    specs = [GateNoiseSpec.from_map(0, {pauli_from_text("+XX"): pr_noise})]
    return truncate_gatewise(specs, circ)


def test_neumann_weight_magnitude_is_constant():
    rng = np.random.default_rng(32)
    model = _bitflip_model(2, 0.1)
    gamma = gamma_of(model)
    assert abs(gamma - 1.25) < 1e-15
    orders = []
    for _ in range(3000):
        w, chans = neumann_sample_inverse(model, rng)
        assert abs(abs(w) - gamma) < 1e-15
        assert w == gamma * (-1) ** len(chans)
        orders.append(len(chans))
    # P(l = 0) = 1 - Pr(N)/Pr(I) = 8/9
    frac0 = orders.count(0) / len(orders)
    assert abs(frac0 - 8 / 9) < 0.03


def test_neumann_mean_inverts_channel():
    rng = np.random.default_rng(33)
    model = _bitflip_model(2, 0.1)
    n = model.n
    acc = np.zeros((4**n, 4**n))
    draws = 60000
    for _ in range(draws):
        w, chans = neumann_sample_inverse(model, rng)
        term = np.eye(4**n)
        for ch in chans:
            term = ch.ptm().mat @ term
        acc += w * term
    acc /= draws
    prod = acc @ model.ptm().mat
    assert np.max(np.abs(prod - np.eye(4**n))) < 0.02


def test_neumann_rejects_noninvertible():
    rng = np.random.default_rng(34)
    with pytest.raises(ValueError):
        neumann_sample_inverse(_bitflip_model(2, 0.5), rng)


def test_neumann_series_cap():
    class _StubRng:
        def random(self):
            return 1.0 - 1e-12  # rng.random() stays below 1, this is legal

        def choice(self, k, size=None, p=None):
            return np.zeros(size or 1, dtype=int)

    model = _bitflip_model(2, 0.45)
    with pytest.raises(RuntimeError):
        neumann_sample_inverse(model, _StubRng())


def test_noiseless_model_draws_identity():
    rng = np.random.default_rng(35)
    w, chans = neumann_sample_inverse(identity_model(2), rng)
    assert w == 1.0 and chans == ()


def test_universal_basis_spans():
    for n in (1, 2):
        chans = universal_basis_channels(n)
        vecs = np.stack([ch.ptm().mat.ravel() for ch in chans])
        assert len(chans) == 16**n
        assert np.linalg.matrix_rank(vecs) == 16**n


def test_invert_channel_dense_round_trip():
    rng = np.random.default_rng(36)
    n = 1
    # non-Pauli noise: a small coherent rotation mixed with a reset
    mats = [
        0.85 * ptm_of_ops(n, [("S", 0)]).mat,
        0.15 * BasisChannel.from_ops(n, (("P0", 0),)).ptm().mat,
    ]
    e = Ptm(n, sum(mats))
    d = invert_channel_dense(e)
    prod = compose(d.ptm(), e)
    assert np.allclose(prod.mat, np.eye(4**n), atol=1e-8)
    assert d.gamma >= 1.0


def test_invert_channel_dense_rejects_singular():
    n = 1
    mat = np.zeros((4, 4))
    mat[0, 0] = 1.0
    with pytest.raises(ValueError):
        invert_channel_dense(Ptm(n, mat))


def test_gate_spec_builders():
    circ = CliffordCircuit(3, [("H", 0), ("CNOT", 0, 1), ("S", 1), ("CNOT", 1, 2)])
    bf = bitflip_gate_specs(circ, 0.1)
    assert [s.gate_index for s in bf] == [1, 3]
    for s in bf:
        (p, q), = s.paulis
        assert q == 0.1 and p.z_mask == 0
        assert bin(p.x_mask).count("1") == 2
    dp = depolarizing_gate_specs(circ, 0.15)
    assert all(len(s.paulis) == 15 for s in dp)
    assert all(abs(s.total_rate - 0.15) < 1e-12 for s in dp)


def test_uniform_depolarizing_model_terms():
    m = uniform_depolarizing_model(2, 0.3)
    assert abs(m.pr_identity - 0.7) < 1e-15
    assert len(m.terms) == 16
    assert abs(m.pr_noise - 0.3) < 1e-15


def test_json_round_trip_specs():
    circ = CliffordCircuit(2, [("CNOT", 0, 1)])
    specs = depolarizing_gate_specs(circ, 0.06)
    data = json.loads(json.dumps(noise_to_json(specs)))
    back = noise_from_json(data)
    assert back == specs


def test_json_round_trip_model():
    model = _bitflip_model(2, 0.1)
    data = json.loads(json.dumps(noise_to_json(model)))
    back = noise_from_json(data)
    assert back.eta == model.eta
    assert back.terms == model.terms


def test_quasi_prob_sampling_frequencies():
    rng = np.random.default_rng(37)
    d = make_decomposition(
        2,
        [
            (BasisChannel.identity(2), 1.125),
            (BasisChannel.from_pauli(pauli_from_text("+XX")), -0.125),
        ],
    )
    assert d.gamma == 1.25
    hits = 0
    for _ in range(4000):
        sign, ch = d.sample(rng)
        if ch.is_identity():
            assert sign == 1
        else:
            assert sign == -1
            hits += 1
    assert abs(hits / 4000 - 0.1) < 0.03
