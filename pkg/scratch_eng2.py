"""Prototype: affine outcome sampling + vectorized overlap tables.

Measuring U rho in the computational basis yields outcomes uniform over an
affine GF(2) set: one particular solution of the stabilizer z-constraints
plus a random element of their nullspace.  Squared overlap with a target
stabilizer state is a membership test against the target's own constraint
system times 2^-x_rank.  Both vectorize over outcome arrays.
"""
import numpy as np
from cnisim.gf2 import gf2_solve_system, gf2_nullspace_basis, parity
from cnisim.tableau import init_basis_state
from cnisim.shadows import EnsembleSpec, sample_clifford, OutcomeOverlap


def ghz(n):
    tab = init_basis_state(n, 0)
    tab.apply_gate(("H", 0))
    for q in range(1, n):
        tab.apply_gate(("CNOT", 0, q))
    return tab


def affine_outcome_data(evolved):
    """(b0, kernel list, rows, t, inside) for the evolved state."""
    n = evolved.n
    rows, t = evolved.z_constraints()
    rows_t = list(zip(rows, t))
    b0 = gf2_solve_system(rows, t)
    assert b0 is not None
    kernel = gf2_nullspace_basis(rows, n)
    inside = 2.0 ** (-evolved.x_rank())
    return b0, kernel, rows, t, inside


def sample_outcomes(b0, kernel, n, rng, size):
    sel = rng.integers(0, 1 << n, size=size, dtype=np.int64)
    b = np.full(size, b0, dtype=np.int64)
    for j, kv in enumerate(kernel):
        b ^= np.where((sel >> j) & 1 == 1, np.int64(kv), np.int64(0))
    return b


def overlap_values(rows, t, inside, b):
    """inside * [b satisfies constraints], vectorized over int array b."""
    ok = np.ones(b.shape, dtype=bool)
    for r, ti in zip(rows, t):
        bits = np.bitwise_count((b & np.int64(r)).astype(np.uint64))
        ok &= (bits.astype(np.int64) & 1) == ti
    return np.where(ok, inside, 0.0)


def main():
    rng = np.random.default_rng(5)
    n = 4
    spec = EnsembleSpec("global_clifford", n)
    state = ghz(n)

    # 1) overlap table matches OutcomeOverlap for every b
    for _ in range(40):
        U = sample_clifford(spec, rng)
        ev = state.copy()
        ev.apply_ops(U.ops)
        b0, kernel, rows, t, inside = affine_outcome_data(ev)
        table = OutcomeOverlap(U, ghz(n))
        bb = np.arange(1 << n, dtype=np.int64)
        got = overlap_values(rows, t, inside, bb)
        want = np.array([table(int(b)) for b in bb])
        assert np.array_equal(got, want), (U.ops,)
    print("overlap tables match OutcomeOverlap on 40 circuits")

    # 2) affine sampling matches tableau outcome law
    for trial in range(10):
        U = sample_clifford(spec, rng)
        ev = state.copy()
        ev.apply_ops(U.ops)
        b0, kernel, rows, t, inside = affine_outcome_data(ev)
        draws = sample_outcomes(b0, kernel, n, rng, 40_000)
        counts = np.bincount(draws, minlength=1 << n)
        ref = np.zeros(1 << n)
        for _ in range(4000):
            ref[ev.copy().sample_outcome(rng)] += 1
        sup_aff = set(np.nonzero(counts)[0].tolist())
        sup_tab = set(np.nonzero(ref)[0].tolist())
        assert sup_aff == sup_tab, (trial, sup_aff, sup_tab)
        p = counts / counts.sum()
        expected = 1.0 / len(sup_aff)
        assert np.allclose(p[list(sup_aff)], expected, atol=5 * np.sqrt(
            expected / 40_000) + 1e-3)
    print("affine outcome sampling matches tableau law on 10 circuits")


if __name__ == "__main__":
    main()
