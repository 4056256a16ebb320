import json
import math

import numpy as np
import pytest

from conftest import random_circuit
from cnisim.montecarlo import (
    EstimateRecord,
    InversionPlan,
    NoisyCircuit,
    ObservableF,
    cni_run,
    cni_single,
    cpec_run,
    estimate_seminorms,
    variance_bound,
)
from cnisim.noise import (
    GateNoiseSpec,
    bitflip_gate_specs,
    invert_pauli_channel,
    uniform_depolarizing_model,
)
from cnisim.pauli import CliffordCircuit, PauliString, pauli_from_text
from cnisim.ptm import (
    apply_ptm,
    basis_state_vector,
    diagonal_observable_vector,
    measurement_channel,
    ptm_of_ops,
    tableau_to_density_matrix,
    tableau_to_pauli_vector,
)
from cnisim.tableau import init_basis_state, run_channel_sequence


def ideal_value(circuit, rho_bits, F):
    """Dense <<F| M_Z U |rho>>, the quantity every estimator targets."""
    n = circuit.n
    v = basis_state_vector(n, rho_bits)
    v = apply_ptm(ptm_of_ops(n, list(circuit.ops)), v)
    v = apply_ptm(measurement_channel(n), v)
    if F.kind == "diagonal":
        fv = diagonal_observable_vector(n, [F.f(b) for b in range(2**n)])
    else:
        fv = tableau_to_pauli_vector(F.state)
    return fv.dot(v)


def ghz_circuit(n=4):
    ops = [("H", 0)] + [("CNOT", q, q + 1) for q in range(n - 1)]
    return CliffordCircuit(n, ops)


def random_gate_noise(circuit, rng, pmax=0.06):
    n = circuit.n
    specs = []
    for gi in circuit.cnot_positions():
        faults = {}
        for _ in range(int(rng.integers(1, 3))):
            z = int(rng.integers(0, 2**n))
            x = int(rng.integers(0, 2**n))
            if z == 0 and x == 0:
                continue
            faults[PauliString(n, 0, z, x)] = float(rng.uniform(0.01, pmax))
        if faults:
            specs.append(GateNoiseSpec.from_map(gi, faults))
    return specs


def test_noiseless_run_is_exact():
    rng = np.random.default_rng(51)
    circ = ghz_circuit()
    echo = CliffordCircuit(4, list(circ.ops) + list(circ.inverse().ops))
    F = ObservableF.indicator(4, 0)
    rec = cni_run(echo, 0, None, F, 40, 1, rng)
    assert rec.gamma_used == 1.0
    assert all(v == 1.0 for v in rec.per_sample)
    assert rec.mean == 1.0


def test_observable_value_matches_dense():
    rng = np.random.default_rng(52)
    from conftest import random_ops_with_projectors

    for _ in range(40):
        n = int(rng.integers(1, 4))
        ops = random_ops_with_projectors(n, int(rng.integers(0, 10)), rng)
        tab, _ = run_channel_sequence(int(rng.integers(0, 2**n)), n, ops)
        fvals = rng.normal(size=2**n)
        F = ObservableF.diagonal(n, lambda b, fv=fvals: fv[b])
        rho = tableau_to_density_matrix(tab)
        want = float(np.real(np.sum(fvals * np.diag(rho))))
        assert abs(F.value(tab) - want) < 1e-10


def test_indicator_agrees_with_diagonal_form():
    n = 3
    bits = 0b101
    ind = ObservableF.indicator(n, bits)
    diag = ObservableF.diagonal(n, lambda b: 1.0 if b == bits else 0.0)
    for b in range(2**n):
        assert ind.at_basis(b) == diag.at_basis(b)


def test_projector_observable_rejects_subnormalized_state():
    tab = init_basis_state(2, 0)
    tab.apply_gate(("H", 0))
    tab.apply_projector(0, 0)
    with pytest.raises(ValueError):
        ObservableF.stabilizer_projector(tab)


def test_cni_single_mean_matches_dense():
    rng = np.random.default_rng(53)
    n = 2
    d = invert_pauli_channel(
        {pauli_from_text("+II"): 0.9, pauli_from_text("+XX"): 0.1}
    )
    fvals = rng.normal(size=4)
    F = ObservableF.diagonal(n, lambda b: fvals[b])
    b = 0b01
    draws = np.array([cni_single(b, d, F, rng) for _ in range(40000)])
    want = fvals[b] * 1.125 - fvals[b ^ 0b11] * 0.125
    se = draws.std(ddof=1) / math.sqrt(len(draws))
    assert abs(draws.mean() - want) < 5 * se


def test_cni_run_unbiased_for_random_triples():
    # 20 random (circuit, noise, F) triples, 1e5 total samples
    rng = np.random.default_rng(54)
    for trial in range(20):
        n = int(rng.integers(2, 4))
        circ = random_circuit(n, 8, rng)
        specs = random_gate_noise(circ, rng)
        rho_bits = int(rng.integers(0, 2**n))
        if rng.random() < 0.5:
            fvals = rng.normal(size=2**n)
            F = ObservableF.diagonal(n, lambda b, fv=fvals: fv[b])
        else:
            st = init_basis_state(n, 0)
            st.apply_ops(random_circuit(n, 6, rng).ops)
            F = ObservableF.stabilizer_projector(st)
        want = ideal_value(circ, rho_bits, F)
        rec = cni_run(circ, rho_bits, specs, F, 2500, 2, rng)
        se = max(rec.std_error, 1e-12)
        assert abs(rec.mean - want) <= 5 * se, (trial, rec.mean, want)


def test_cni_run_unbiased_for_global_model():
    rng = np.random.default_rng(55)
    n = 2
    for _ in range(4):
        circ = random_circuit(n, 6, rng)
        model = uniform_depolarizing_model(n, 0.12)
        fvals = rng.normal(size=2**n)
        F = ObservableF.diagonal(n, lambda b, fv=fvals: fv[b])
        rho_bits = int(rng.integers(0, 2**n))
        want = ideal_value(circ, rho_bits, F)
        rec = cni_run(circ, rho_bits, model, F, 5000, 2, rng)
        assert abs(rec.mean - want) <= 5 * max(rec.std_error, 1e-12)


def test_cpec_run_unbiased_both_noise_kinds():
    rng = np.random.default_rng(56)
    n = 2
    circ = CliffordCircuit(n, [("H", 0), ("CNOT", 0, 1), ("S", 1), ("CNOT", 1, 0)])
    fvals = rng.normal(size=2**n)
    F = ObservableF.diagonal(n, lambda b: fvals[b])
    want = ideal_value(circ, 0, F)
    for noise in (bitflip_gate_specs(circ, 0.08), uniform_depolarizing_model(n, 0.12)):
        rec = cpec_run(circ, 0, noise, F, 4000, 3, rng)
        assert rec.M == 4000 and rec.K == 3
        assert abs(rec.mean - want) <= 5 * max(rec.std_error, 1e-12)


def test_variance_bound_frozen_example():
    assert abs(variance_bound(1.25, 1000, 10, 0.5, 0.3) - 1.65625e-4) < 1e-12


def test_variance_bound_limits():
    # L=1 keeps only the star term; large L keeps only the circ term
    assert variance_bound(2.0, 100, 1, 0.5, 0.3) == 4.0 * 0.25 / 100
    big = variance_bound(2.0, 100, 10**9, 0.5, 0.3)
    assert abs(big - 4.0 * 0.09 / 100) < 1e-9


def test_variance_bound_validates_args():
    with pytest.raises(ValueError):
        variance_bound(1.0, 0, 1, 0.5, 0.3)
    with pytest.raises(ValueError):
        variance_bound(1.0, 1, 0, 0.5, 0.3)


def test_estimate_record_guards_mean():
    with pytest.raises(ValueError):
        EstimateRecord(0.5, (1.0, 1.0), 2, 1, 1, 1.0)


def test_estimate_record_json_fields():
    rec = EstimateRecord(1.0, (1.0, 1.0, 1.0), 3, 2, 1, 1.25, rng_seed=99)
    data = json.loads(json.dumps(rec.to_json(config_hash="deadbeef")))
    assert data["seed"] == 99
    assert data["config_hash"] == "deadbeef"
    assert data["mean"] == 1.0
    assert data["sample_variance"] == 0.0
    assert data["std_error"] == 0.0


def test_seminorms_identity_noise_bounded():
    rng = np.random.default_rng(57)
    n = 3
    circ = random_circuit(n, 8, rng)
    F = ObservableF.diagonal(n, lambda b: 1.0 if b % 2 else -1.0)  # |f| <= 1
    star, circ_norm = estimate_seminorms(F, circ, None, None, 0, 2000, rng)
    assert star.value <= 1.0 + 1e-12
    assert circ_norm.value <= 1.0 + 1e-12


def test_seminorm_ordering_circ_below_star():
    rng = np.random.default_rng(58)
    circ = ghz_circuit()
    specs = bitflip_gate_specs(circ, 0.1)
    ghz_state = init_basis_state(4, 0)
    ghz_state.apply_ops(circ.ops)
    F = ObservableF.stabilizer_projector(ghz_state)
    star, circ_norm = estimate_seminorms(F, circ, specs, None, 0, 6000, rng)
    assert circ_norm.squared <= star.squared + 3 * (star.squared_se + circ_norm.squared_se)


def test_theorem_bound_and_l_monotonicity():
    rng = np.random.default_rng(59)
    circ = ghz_circuit()
    specs = bitflip_gate_specs(circ, 0.1)
    ghz_state = init_basis_state(4, 0)
    ghz_state.apply_ops(circ.ops)
    F = ObservableF.stabilizer_projector(ghz_state)
    plan = InversionPlan.from_noise(circ, specs)
    star, circ_norm = estimate_seminorms(F, circ, specs, plan, 0, 8000, rng)
    reps = 30
    K = 400
    emp = {}
    for L in (1, 10):
        means = [cni_run(circ, 0, specs, F, K, L, rng).mean for _ in range(reps)]
        emp[L] = float(np.var(means, ddof=1))
        bound = variance_bound(plan.gamma, K, L, star.value, circ_norm.value)
        se_var = emp[L] * math.sqrt(2.0 / (reps - 1))
        assert emp[L] <= bound + 3 * se_var, (L, emp[L], bound)
    assert emp[10] <= emp[1]


def test_global_model_requires_physical_terms():
    from cnisim.noise import BasisChannel, GlobalNoiseModel

    signed = GlobalNoiseModel(
        2,
        1.0,
        (
            (BasisChannel.identity(2), 0.9, 1),
            (BasisChannel.from_pauli(pauli_from_text("+XX")), 0.1, -1),
        ),
    )
    with pytest.raises(ValueError):
        NoisyCircuit(CliffordCircuit(2, [("CNOT", 0, 1)]), signed)


def first_order_cnot_model(circuit, p):
    from cnisim.noise import depolarizing_gate_specs, truncate_gatewise

    return truncate_gatewise(depolarizing_gate_specs(circuit, p), circuit)


def test_global_plan_exact_beyond_geometric_reach():
    # per-gate depolarizing with total rate N*p > 1/2: the geometric series
    # has no valid sampler there, the exact plan must still invert the model
    from cnisim.ptm import Ptm, compose, z_block

    rng = np.random.default_rng(57)
    n = 3
    for _ in range(6):
        circ = random_circuit(n, 8, rng)
        k = len(circ.cnot_positions())
        if k < 3:
            continue
        p = 0.55 / k
        model = first_order_cnot_model(circ, p)
        assert model.pr_noise > 0.5

        full = InversionPlan.from_noise(circ, model, compressed=False)
        comp = InversionPlan.from_noise(circ, model, compressed=True)
        assert full.pauli_only and comp.pauli_only
        # uncompressed plan inverts the whole channel
        (d_full,) = full.parts
        prod = compose(d_full.ptm(), model.ptm())
        assert np.allclose(prod.mat, np.eye(4**n), atol=1e-10)
        # compressed plan inverts the action on outcomes
        (d_comp,) = comp.parts
        zb = z_block(compose(d_comp.ptm(), model.ptm()))
        assert np.allclose(zb, np.eye(2**n), atol=1e-10)
        # compression can only lower the overhead
        assert comp.gamma <= full.gamma + 1e-12


def test_cni_run_unbiased_beyond_geometric_reach():
    rng = np.random.default_rng(58)
    n = 3
    circ = CliffordCircuit(
        n,
        [
            ("H", 0),
            ("CNOT", 0, 1),
            ("S", 1),
            ("CNOT", 1, 2),
            ("CNOT", 2, 0),
            ("H", 2),
            ("CNOT", 0, 2),
        ],
    )
    model = first_order_cnot_model(circ, 0.145)
    assert model.pr_noise > 0.5
    fvals = rng.normal(size=2**n)
    F = ObservableF.diagonal(n, lambda b: fvals[b])
    want = ideal_value(circ, 5, F)
    rec = cni_run(circ, 5, model, F, 6000, 2, rng)
    assert abs(rec.mean - want) <= 5 * max(rec.std_error, 1e-12)


def test_cpec_run_unbiased_beyond_geometric_reach():
    rng = np.random.default_rng(59)
    n = 2
    circ = CliffordCircuit(n, [("H", 0), ("CNOT", 0, 1), ("S", 0), ("CNOT", 1, 0)])
    model = first_order_cnot_model(circ, 0.3)
    assert model.pr_noise > 0.5
    fvals = rng.normal(size=2**n)
    F = ObservableF.diagonal(n, lambda b: fvals[b])
    want = ideal_value(circ, 1, F)
    rec = cpec_run(circ, 1, model, F, 6000, 2, rng)
    assert abs(rec.mean - want) <= 5 * max(rec.std_error, 1e-12)
