"""Dense-oracle verification for montecarlo.py before freezing tests."""
import math
import numpy as np

from cnisim.pauli import CliffordCircuit, PauliString
from cnisim.tableau import StabilizerTableau, init_basis_state, run_channel_sequence
from cnisim.noise import (
    GateNoiseSpec, GlobalNoiseModel, bitflip_gate_specs, depolarizing_gate_specs,
    uniform_depolarizing_model, invert_pauli_channel, gamma_of,
)
from cnisim.ptm import (
    ptm_of_ops, ptm_of_pauli_channel, measurement_channel, basis_state_vector,
    diagonal_observable_vector, tableau_to_pauli_vector, compose, apply_ptm, Ptm,
)
from cnisim.montecarlo import (
    ObservableF, EstimateRecord, NoisyCircuit, InversionPlan,
    cni_single, cni_run, cpec_run, estimate_seminorms, variance_bound,
)

rng = np.random.default_rng(7)


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


def noisy_ptm(circuit, specs):
    """Dense PTM of the faulty circuit (fault channel after each noisy gate)."""
    n = circuit.n
    t = np.eye(4**n)
    spec_map = {s.gate_index: s for s in specs}
    for i, op in enumerate(circuit.ops):
        t = ptm_of_ops(n, [op]).mat @ t
        if i in spec_map:
            s = spec_map[i]
            probs = {p: q for p, q in s.paulis}
            probs[PauliString(n, 0, 0, 0)] = 1.0 - s.total_rate
            t = ptm_of_pauli_channel(n, probs).mat @ t
    return Ptm(n, t)


def ideal_value(circuit, rho_bits, F):
    n = circuit.n
    v = basis_state_vector(n, rho_bits)
    v = apply_ptm(ptm_of_ops(n, list(circuit.ops)), v)
    v = apply_ptm(measurement_channel(n), v)
    if F.kind == "diagonal":
        fv = diagonal_observable_vector(n, [F.f(b) for b in range(2**n)])
    else:
        fv = tableau_to_pauli_vector(F.state)
    return fv.dot(v)


# ---- 1. noiseless exactness -------------------------------------------------
n = 4
ghz = CliffordCircuit(n, [("H", 0), ("CNOT", 0, 1), ("CNOT", 1, 2), ("CNOT", 2, 3)])
echo = CliffordCircuit(n, list(ghz.ops) + list(ghz.inverse().ops))
F0 = ObservableF.indicator(n, 0)
rec = cni_run(echo, 0, None, F0, 50, 1, rng)
assert rec.gamma_used == 1.0 and all(v == 1.0 for v in rec.per_sample), rec
print("1. noiseless echo exact: ok")

# ---- 2. ObservableF.value vs dense ------------------------------------------
for trial in range(60):
    nn = int(rng.integers(1, 4))
    c = random_circuit(nn, int(rng.integers(0, 12)), rng)
    tab = init_basis_state(nn, int(rng.integers(0, 2**nn)))
    tab.apply_ops(c.ops)
    # maybe a projector to get subnormalized states
    if rng.random() < 0.5:
        tab.apply_projector(int(rng.integers(0, nn)), int(rng.integers(0, 2)))
    fvals = rng.normal(size=2**nn)
    F = ObservableF.diagonal(nn, lambda b, fv=fvals: fv[b])
    from cnisim.ptm import tableau_to_density_matrix
    rho = tableau_to_density_matrix(tab)
    want = float(np.real(np.sum(fvals * np.diag(rho))))
    got = F.value(tab)
    assert abs(want - got) < 1e-10, (trial, want, got)
print("2. ObservableF.value dense: ok")

# ---- 3. cni_single / cni_run unbiasedness (local specs) ----------------------
fails = 0
for trial in range(20):
    nn = int(rng.integers(2, 4))
    c = random_circuit(nn, 8, rng)
    cn = c.cnot_positions()
    specs = []
    for gi in cn:
        m = {}
        for _ in range(int(rng.integers(1, 3))):
            z = int(rng.integers(0, 2**nn)); x = int(rng.integers(0, 2**nn))
            if z == 0 and x == 0:
                continue
            m[PauliString(nn, 0, z, x)] = float(rng.uniform(0.01, 0.06))
        if m:
            specs.append(GateNoiseSpec.from_map(gi, m))
    if not specs:
        continue
    rho_bits = int(rng.integers(0, 2**nn))
    if rng.random() < 0.5:
        fvals = rng.normal(size=2**nn)
        F = ObservableF.diagonal(nn, lambda b, fv=fvals: fv[b])
    else:
        st = init_basis_state(nn, 0); st.apply_ops(random_circuit(nn, 6, rng).ops)
        F = ObservableF.stabilizer_projector(st)
    want = ideal_value(c, rho_bits, F)
    rec = cni_run(c, rho_bits, specs, F, 4000, 2, rng)
    se = rec.std_error
    pull = abs(rec.mean - want) / max(se, 1e-12)
    if pull > 5:
        fails += 1
        print("  trial", trial, "pull", pull, "want", want, "got", rec.mean)
assert fails == 0, fails
print("3. cni_run local unbiasedness (20 triples, 5 SE): ok")

# ---- 4. cni_run global-model unbiasedness ------------------------------------
fails = 0
for trial in range(8):
    nn = 2
    c = random_circuit(nn, 6, rng)
    model = uniform_depolarizing_model(nn, 0.12)
    rho_bits = int(rng.integers(0, 2**nn))
    fvals = rng.normal(size=2**nn)
    F = ObservableF.diagonal(nn, lambda b, fv=fvals: fv[b])
    want = ideal_value(c, rho_bits, F)
    rec = cni_run(c, rho_bits, model, F, 6000, 2, rng)
    pull = abs(rec.mean - want) / max(rec.std_error, 1e-12)
    if pull > 5:
        fails += 1
        print("  trial", trial, "pull", pull)
assert fails == 0
print("4. cni_run global unbiasedness: ok")

# ---- 5. cpec_run unbiasedness (both noise kinds) ------------------------------
fails = 0
for trial in range(8):
    nn = 2
    c = random_circuit(nn, 6, rng)
    rho_bits = int(rng.integers(0, 2**nn))
    fvals = rng.normal(size=2**nn)
    F = ObservableF.diagonal(nn, lambda b, fv=fvals: fv[b])
    want = ideal_value(c, rho_bits, F)
    if trial % 2 == 0:
        noise = bitflip_gate_specs(c, 0.08)
        if not noise:
            continue
    else:
        noise = uniform_depolarizing_model(nn, 0.12)
    rec = cpec_run(c, rho_bits, noise, F, 4000, 3, rng)
    pull = abs(rec.mean - want) / max(rec.std_error, 1e-12)
    if pull > 5:
        fails += 1
        print("  cpec trial", trial, "pull", pull, want, rec.mean)
assert fails == 0
print("5. cpec_run unbiasedness: ok")

# ---- 6. variance bound worked example -----------------------------------------
vb = variance_bound(1.25, 1000, 10, 0.5, 0.3)
assert abs(vb - 1.65625e-4) < 1e-12, vb
print("6. variance_bound worked example 1.65625e-4: ok", vb)

# ---- 7. GHZ-4 bit-flip: seminorms, Theorem-1 bound, L-monotonicity -------------
p = 0.1
specs = bitflip_gate_specs(ghz, p)
ghz_state = init_basis_state(4, 0)
ghz_state.apply_ops(ghz.ops)
F = ObservableF.stabilizer_projector(ghz_state)
plan = InversionPlan.from_noise(ghz, specs)
print("   gamma'(GHZ4 bitflip p=0.1) =", plan.gamma)
ns, nc = estimate_seminorms(F, ghz, specs, plan, 0, 20000, rng)
print("   |F|* =", ns.value, "+-", ns.squared_se, " |F|o =", nc.value, "+-", nc.squared_se)
K = 1000
reps = 60
means = {1: [], 10: []}
for L in (1, 10):
    for r in range(reps):
        rec = cni_run(ghz, 0, specs, F, K, L, rng)
        means[L].append(rec.mean)
for L in (1, 10):
    emp_var = float(np.var(means[L], ddof=1))
    bound = variance_bound(plan.gamma, K, L, ns.value, nc.value)
    # SE of an empirical variance over reps ~ var * sqrt(2/(reps-1))
    se_var = emp_var * math.sqrt(2.0 / (reps - 1))
    print(f"   L={L}: emp var {emp_var:.3e}  bound {bound:.3e}  ok={emp_var <= bound + 3*se_var}")
    assert emp_var <= bound + 3 * se_var
v1 = float(np.var(means[1], ddof=1)); v10 = float(np.var(means[10], ddof=1))
print("   var(L=10) <= var(L=1):", v10 <= v1, v10, v1)
want = ideal_value(ghz, 0, F)
print("   dense target <<F|M_Z U|0>> =", want)
bias = abs(np.mean(means[10]) - want) / (np.std(means[10], ddof=1) / math.sqrt(reps))
print("   bias pulls (L=10):", bias)
assert bias < 5

# ---- 8. EstimateRecord json ----------------------------------------------------
import json
j = rec.to_json(config_hash="abc")
json.dumps(j)
print("8. record json: ok", {k: j[k] for k in ("K", "L", "M", "gamma_used")})
print("ALL MC CHECKS PASSED")
