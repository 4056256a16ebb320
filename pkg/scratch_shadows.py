"""Scratch validation for shadows.py, phase 1: sampler and snapshots."""
import math
import numpy as np

from cnisim.gf2 import parity
from cnisim.pauli import CliffordCircuit, PauliString, conjugate_by_circuit
from cnisim.shadows import (
    EnsembleSpec,
    OutcomeOverlap,
    _sample_symplectic,
    _synthesize,
    sample_clifford,
    single_qubit_cliffords,
    snapshot_overlap,
)
from cnisim.tableau import StabilizerTableau, init_basis_state
from cnisim.ptm import circuit_unitary, tableau_to_density_matrix, pauli_dense
from tests.conftest import random_circuit, random_stabilizer_state

rng = np.random.default_rng(7)

# 1. synthesis round trip: sampled images are realized exactly
for trial in range(400):
    n = int(rng.integers(1, 7))
    imgs = _sample_symplectic(n, rng)
    signs = rng.integers(0, 2, size=2 * n)
    words = [(int(s), z, x) for s, (z, x) in zip(signs, imgs)]
    V = _synthesize(n, words)
    for q in range(n):
        got = conjugate_by_circuit(PauliString(n, 0, 0, 1 << q), V)
        assert (got.sign_bit, got.z_mask, got.x_mask) == words[q], (n, q, trial)
        got = conjugate_by_circuit(PauliString(n, 0, 1 << q, 0), V)
        assert (got.sign_bit, got.z_mask, got.x_mask) == words[n + q], (n, q, trial)
print("synthesis round trip ok (400 draws, n 1..6)")

# symplectic products of sampled images are the standard ones
for trial in range(100):
    n = int(rng.integers(1, 6))
    imgs = _sample_symplectic(n, rng)
    vecs = [z | (x << n) for z, x in imgs]

    def sp(u, v):
        mask = (1 << n) - 1
        return parity((((u & mask) << n) | (u >> n)) & v)

    for i in range(n):
        for j in range(n):
            assert sp(vecs[i], vecs[j]) == 0
            assert sp(vecs[n + i], vecs[n + j]) == 0
            assert sp(vecs[i], vecs[n + j]) == (1 if i == j else 0)
print("symplectic form preserved ok")

# 2. single-qubit table and n=1 uniformity over the 24 classes
group = single_qubit_cliffords()
assert len(group) == 24
x1 = PauliString(1, 0, 0, 1)
z1 = PauliString(1, 0, 1, 0)


def cls_of(c):
    return (conjugate_by_circuit(x1, c), conjugate_by_circuit(z1, c))


table_classes = {cls_of(c) for c in group}
assert len(table_classes) == 24

spec1 = EnsembleSpec("global_clifford", 1)
N = 100_000
counts = {}
for _ in range(N):
    c = sample_clifford(spec1, rng)
    k = cls_of(c)
    counts[k] = counts.get(k, 0) + 1
assert set(counts) == table_classes
p0 = 1 / 24
sig = math.sqrt(p0 * (1 - p0) / N)
worst = max(abs(v / N - p0) for v in counts.values())
print(f"n=1 uniformity: worst |freq－p| = {worst:.5f} vs 3 sigma = {3*sig:.5f}")
assert worst < 3 * sig

# local tensor sampler at n=1 should match
countsL = {}
specl1 = EnsembleSpec("local_clifford_tensor", 1)
for _ in range(N):
    c = sample_clifford(specl1, rng)
    k = cls_of(c)
    countsL[k] = countsL.get(k, 0) + 1
worst = max(abs(v / N - p0) for v in countsL.values())
assert set(countsL) == table_classes and worst < 3 * sig
print("n=1 local-tensor uniformity ok")

# 3. first moment E_U[U^dag M_Z U] = diag(1, 1/5, ...) at n=2 (global);
#    local tensor gives (1/3)^w per weight-w word.
n = 2
spec2 = EnsembleSpec("global_clifford", n)
specl2 = EnsembleSpec("local_clifford_tensor", n)
paulis = [
    PauliString(n, 0, z, x) for z in range(4) for x in range(4) if z or x
]
Ng = 20_000
for spec, expected in ((spec2, lambda p: 1 / 5), (specl2, lambda p: (1 / 3) ** (p.z_mask | p.x_mask).bit_count())):
    hits = {p: 0 for p in paulis}
    for _ in range(Ng):
        U = sample_clifford(spec, rng)
        for p in paulis:
            q = conjugate_by_circuit(p, U)
            if q.x_mask == 0:
                hits[p] += 1
    for p in paulis:
        e = expected(p)
        s3 = 3 * math.sqrt(e * (1 - e) / Ng)
        assert abs(hits[p] / Ng - e) < s3, (spec.kind, p, hits[p] / Ng, e)
print("two-design first moment ok (global diag 1/5; local (1/3)^w)")

# 4. snapshot_overlap: trivial identities and dense cross-check
for n in (1, 2, 3):
    spec = EnsembleSpec("global_clifford", n)
    I = CliffordCircuit(n, [])
    rho0 = init_basis_state(n, 0)
    assert abs(snapshot_overlap(I, 0, rho0, spec) - (1 << n)) < 1e-12
    assert abs(snapshot_overlap(I, (1 << n) - 1, rho0, spec) - (-1.0)) < 1e-12
    specl = EnsembleSpec("local_clifford_tensor", n)
    assert abs(snapshot_overlap(I, 0, rho0, specl) - (1 << n)) < 1e-12
    assert abs(snapshot_overlap(I, (1 << n) - 1, rho0, specl) - (-1.0) ** n) < 1e-12
print("snapshot trivial values ok")


def dense_snapshot(U, b, target, spec, pauli_shift=None):
    n = spec.n
    d = 1 << n
    Um = circuit_unitary(U)
    v = np.zeros(d, dtype=complex)
    v[b] = 1.0
    A = np.outer(v, v.conj())
    if pauli_shift is not None:
        P = pauli_dense(n, pauli_shift.z_mask, pauli_shift.x_mask)
        A = P @ A @ P.conj().T
    A = Um.conj().T @ A @ Um
    O = tableau_to_density_matrix(target)
    if spec.kind == "global_clifford":
        return float(np.real((d + 1) * np.trace(O @ A) - np.trace(A)))
    total = 0.0
    for z in range(d):
        for x in range(d):
            P = pauli_dense(n, z, x)
            w = (z | x).bit_count()
            aP = np.trace(A @ P)
            oP = np.trace(O @ P)
            total += (3.0**w) * np.real(aP * oP)
    return total / d


checked = 0
for trial in range(120):
    n = int(rng.integers(1, 4))
    U = random_circuit(n, int(rng.integers(0, 12)), rng)
    target = random_stabilizer_state(n, rng)
    b = int(rng.integers(0, 1 << n))
    shift = None
    if rng.random() < 0.5:
        shift = PauliString(n, 0, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
    for spec in (EnsembleSpec("global_clifford", n), EnsembleSpec("local_clifford_tensor", n)):
        from cnisim.noise import BasisChannel

        extra = None if shift is None else BasisChannel.from_pauli(shift)
        got = snapshot_overlap(U, b, target, spec, extra)
        want = dense_snapshot(U, b, target, spec, shift)
        assert abs(got - want) < 1e-9, (n, spec.kind, got, want)
        checked += 1
print(f"snapshot dense cross-check ok ({checked} cases)")

# OutcomeOverlap agrees with dense outcome law of measuring U|target>
for trial in range(60):
    n = int(rng.integers(1, 4))
    U = random_circuit(n, int(rng.integers(0, 12)), rng)
    target = random_stabilizer_state(n, rng)
    table = OutcomeOverlap(U, target)
    Um = circuit_unitary(U)
    psi = Um @ tableau_to_density_matrix(target) @ Um.conj().T
    for b in range(1 << n):
        want = float(np.real(psi[b, b]))
        assert abs(table(b) - want) < 1e-12, (n, b, table(b), want)
print("OutcomeOverlap dense cross-check ok")
