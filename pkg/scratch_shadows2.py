"""Scratch validation for shadows.py, phase 2: protocols, norms, toy bound."""
import math
from fractions import Fraction

import numpy as np

from cnisim.montecarlo import NoisyCircuit
from cnisim.noise import BasisChannel
from cnisim.pauli import CliffordCircuit, PauliString
from cnisim.shadows import (
    ConditionalNoiseTable,
    EnsembleSpec,
    OutcomeOverlap,
    bitflip_noise_family,
    calibrate_srse,
    compute_g_h,
    deviated_observable_norm_check,
    estimate_cpec_shadow_norms,
    estimate_shadow_norms,
    estimate_table_ns1,
    global_depol_noise_family,
    mutual_information,
    run_cni_shadow,
    run_cpec_shadow,
    run_srse,
    sample_clifford,
    shadow_variance_bound,
    single_qubit_cliffords,
    snapshot_overlap,
    tabulated_bound_terms,
    uniform_depol_noise_family,
)
from cnisim.tableau import init_basis_state

rng = np.random.default_rng(11)


def ghz(n):
    tab = init_basis_state(n, 0)
    tab.apply_gate(("H", 0))
    for q in range(1, n):
        tab.apply_gate(("CNOT", 0, q))
    return tab


def check_mean(name, rec, truth, nsig=5.0):
    se = rec.std_error
    ok = abs(rec.mean - truth) <= nsig * se
    print(f"  {name}: mean={rec.mean:+.4f} truth={truth:+.4f} se={se:.4f} "
          f"dev={abs(rec.mean-truth)/se if se else 0:.2f} sigma {'OK' if ok else 'FAIL'}")
    assert ok, name
    return rec


# A. noiseless means, both ensemble kinds, two observables
n = 2
rho = ghz(n)
specg = EnsembleSpec("global_clifford", n)
specl = EnsembleSpec("local_clifford_tensor", n)
print("A. noiseless protocol means (n=2 GHZ)")
check_mean("cni global O=rho", run_cni_shadow(rho, ghz(n), None, specg, 3000, 2, 2, 1), 1.0)
check_mean("cni local  O=rho", run_cni_shadow(rho, ghz(n), None, specl, 3000, 2, 2, 2), 1.0)
check_mean("cni global O=|00>", run_cni_shadow(rho, init_basis_state(n, 0), None, specg, 3000, 1, 1, 3), 0.5)
check_mean("cpec global O=rho", run_cpec_shadow(rho, ghz(n), None, specg, 3000, 2, 4), 1.0)
check_mean("srse noiseless", run_srse(rho, ghz(n), None, specg, 2000, 2, 20000, 5), 1.0)

# B. noisy unbiasedness: CNI and cPEC correct, plain is biased
print("B. noisy regimes (n=3 GHZ)")
n = 3
rho3 = ghz(n)
specg3 = EnsembleSpec("global_clifford", n)
specl3 = EnsembleSpec("local_clifford_tensor", n)
fam_local = bitflip_noise_family(0.1)
fam_glob = global_depol_noise_family(0.3)
check_mean("cni local-noise global-ens", run_cni_shadow(rho3, ghz(n), fam_local, specg3, 4000, 2, 2, 6), 1.0)
check_mean("cni local-noise local-ens", run_cni_shadow(rho3, ghz(n), fam_local, specl3, 4000, 2, 2, 7), 1.0)
check_mean("cni global-noise", run_cni_shadow(rho3, ghz(n), fam_glob, specg3, 4000, 2, 2, 8), 1.0)
check_mean("cpec local-noise", run_cpec_shadow(rho3, ghz(n), fam_local, specg3, 4000, 2, 9), 1.0)
check_mean("cpec global-noise", run_cpec_shadow(rho3, ghz(n), fam_glob, specg3, 4000, 2, 10), 1.0)
plain = run_srse(rho3, ghz(n), fam_local, specg3, 4000, 2, None, 11, r_hat=1.0 / ((1 << n) + 1))
print(f"  plain under noise: mean={plain.mean:.4f} (bias expected, "
      f"{abs(plain.mean-1.0)/plain.std_error:.1f} sigma)")
assert abs(plain.mean - 1.0) > 5 * plain.std_error

# sRSE under uniform (circuit-independent) depolarizing noise is unbiased
fam_unif = uniform_depol_noise_family(n, 0.2)
check_mean("srse uniform-depol", run_srse(rho3, ghz(n), fam_unif, specg3, 3000, 2, 60000, 12), 1.0)

# C. sRSE calibration: noiseless n=1 single-round statistic, E = 1/3
print("C. sRSE calibration")
spec1 = EnsembleSpec("global_clifford", 1)
g = np.random.default_rng(13)
zero1 = init_basis_state(1, 0)
vals = np.empty(100_000)
for i in range(vals.size):
    U = sample_clifford(spec1, g)
    b = NoisyCircuit(U, None).sample_outcome(0, g)
    vals[i] = 2.0 * OutcomeOverlap(U, zero1)(b) - 1.0
se = vals.std(ddof=1) / math.sqrt(vals.size)
print(f"  E[r_hat] = {vals.mean():.5f} vs 1/3, {abs(vals.mean()-1/3)/se:.2f} sigma")
assert abs(vals.mean() - 1.0 / 3.0) <= 5 * se
r_hat = calibrate_srse(None, spec1, 50_000, 14)
assert abs(r_hat - 1.0 / 3.0) < 0.02
print(f"  calibrate_srse noiseless r_hat = {r_hat:.4f}")

# exact 24-element brute force with Fractions
total = Fraction(0)
for c in single_qubit_cliffords():
    table = OutcomeOverlap(c, zero1)
    for b in (0, 1):
        p = Fraction(table(b))
        total += p * p
total = total / 24
r_exact = 2 * total - 1
print(f"  brute force E[R] = {total} -> r = {r_exact}")
assert r_exact == Fraction(1, 3)

# D. norms and the variance bound (noisy, global ensemble, n=2)
print("D. shadow norms and Theorem-2 bound")
n = 2
rho2 = ghz(n)
fam = bitflip_noise_family(0.1)
ns1, ns2, xs = estimate_shadow_norms(rho2, ghz(n), fam, specg, 30_000, 15)
print(f"  NS1^2={ns1.squared:.3f}+-{ns1.squared_se:.3f}  NS2^2={ns2.squared:.3f}"
      f"+-{ns2.squared_se:.3f}  XS^2={xs.squared:.3f}+-{xs.squared_se:.3f}")
assert ns2.value <= ns1.value + 3 * (ns1.squared_se + ns2.squared_se)

# observed variance of the shadow estimator vs the bound, K=4, L=2
M, K, L = 60, 4, 2
reps = 300
means = np.empty(reps)
gmax = 1.0
for i in range(reps):
    rec = run_cni_shadow(rho2, ghz(n), fam, specg, M, K, L, 1000 + i)
    means[i] = rec.mean
    gmax = max(gmax, rec.gamma_used)
var_obs = means.var(ddof=1)
var_se = var_obs * math.sqrt(2.0 / (reps - 1))
bound = shadow_variance_bound(gmax, M, K, L, ns1.value, ns2.value, xs.value)
print(f"  observed var={var_obs:.5f}+-{var_se:.5f}  bound={bound:.5f}  gamma={gmax:.3f}")
assert bound >= var_obs - 3 * var_se
# and the bound should not be absurdly loose at L=1/K=1 noiseless
ns1n, ns2n, xsn = estimate_shadow_norms(rho2, ghz(n), None, specg, 20_000, 16)
print(f"  noiseless NS1^2={ns1n.squared:.3f} (shadow norm scale ~2^n+2)")

# cpec norms run and are finite
nsc, nxc = estimate_cpec_shadow_norms(rho2, ghz(n), fam, specg, 20_000, 17)
print(f"  cPEC NS^2={nsc.squared:.3f}+-{nsc.squared_se:.3f} NXS^2={nxc.squared:.3f}+-{nxc.squared_se:.3f}")

# E. deviated-observable Frobenius check
print("E. deviated-observable norm preservation")
obs = {PauliString(2, 0, 1, 2): 0.7, PauliString(2, 1, 3, 1): -0.3, PauliString(2, 0, 0, 0): 0.5}
assert deviated_observable_norm_check(PauliString(2, 0, 1, 0), specg, 60, np.random.default_rng(18))
assert deviated_observable_norm_check(obs, specg, 60, np.random.default_rng(19))
assert deviated_observable_norm_check(obs, specl, 60, np.random.default_rng(20))
print("  ok (global and local kinds)")

# F. tabulated toy: g, h, MI, bound vs exact and estimated NS1^2
print("F. conditional-noise toy table")
n = 2
U1 = CliffordCircuit(n, [("H", 0), ("CNOT", 0, 1)])
U2 = CliffordCircuit(n, [("H", 1), ("S", 0), ("CNOT", 1, 0)])
X1 = BasisChannel(n, "pauli", 0, 1)
X2 = BasisChannel(n, "pauli", 0, 2)
I2 = BasisChannel.identity(n)
table = ConditionalNoiseTable(n, (
    (U1, ((I2, 0.9), (X1, 0.1)), 1.0),
    (U2, ((I2, 0.8), (X2, 0.2)), 1.0),
))
gval, hval = compute_g_h(table)
mi = mutual_information(table)
print(f"  g={gval} h={hval} MI={mi:.6f} ln(h)={math.log(hval):.6f}")
assert abs(gval - 0.8) < 1e-12 and abs(hval - 2.0) < 1e-12
assert math.log(hval) >= mi
expected_mi = (0.45 * math.log(0.9 / 0.85) + 0.05 * math.log(2)
               + 0.4 * math.log(0.8 / 0.85) + 0.1 * math.log(2))
assert abs(mi - expected_mi) < 1e-12

rho_t = init_basis_state(n, 0)
target_t = ghz(n)
for spc in (specg, specl):
    terms = tabulated_bound_terms(table, rho_t, target_t, spc)
    est = estimate_table_ns1(table, rho_t, target_t, spc, 40_000, 21)
    bound_ideal = terms["g"] * terms["s_sq"] + (1 - terms["g"]) * terms["h"] * terms["dev_sq"]
    bound_noisy = terms["bound"]
    print(f"  [{spc.kind}] ns1_sq exact={terms['ns1_sq']:.4f} est={est.squared:.4f}"
          f"+-{est.squared_se:.4f}")
    print(f"    s_sq={terms['s_sq']:.4f}/{terms['s_sq_noisy']:.4f} "
          f"dev_sq={terms['dev_sq']:.4f}/{terms['dev_sq_noisy']:.4f} "
          f"bound ideal={bound_ideal:.4f} noisy={bound_noisy:.4f}")
    assert abs(est.squared - terms["ns1_sq"]) <= 3 * est.squared_se + 1e-9
    print(f"    bound_ideal >= exact ns1: {bound_ideal >= terms['ns1_sq']}")
    print(f"    bound_noisy >= exact ns1: {bound_noisy >= terms['ns1_sq']}")

# uniform-noise table: h must be exactly 1
tableu = ConditionalNoiseTable(n, (
    (U1, ((I2, 0.9), (X1, 0.1)), 1.0),
    (U2, ((I2, 0.9), (X1, 0.1)), 1.0),
))
gu, hu = compute_g_h(tableu)
assert gu == 0.9 and hu == 1.0 and abs(mutual_information(tableu)) < 1e-15
print("  U-independent table: g=0.9 h=1 MI=0 ok")

# G. determinism: integer seed reproduces exactly
print("G. determinism")
a = run_cni_shadow(rho2, ghz(2), fam, specg, 50, 2, 2, 99)
b = run_cni_shadow(rho2, ghz(2), fam, specg, 50, 2, 2, 99)
assert a.mean == b.mean and a.per_sample == b.per_sample
c = run_srse(rho2, ghz(2), fam_unif if False else None, specg, 50, 2, 500, 99)
d = run_srse(rho2, ghz(2), None, specg, 50, 2, 500, 99)
assert c.mean == d.mean
e = run_cpec_shadow(rho2, ghz(2), fam, specg, 50, 2, 99)
f = run_cpec_shadow(rho2, ghz(2), fam, specg, 50, 2, 99)
assert e.mean == f.mean
print("  ok")
print("phase 2 all ok")
