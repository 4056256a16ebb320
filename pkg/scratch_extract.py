"""Prototype: compile sampled Clifford elements to CNOT-minimal circuits.

Descent through the coset distance table: at distance d, some right factor
(two-qubit local dressing followed by a CNOT) reaches distance d-1.  The
residual at distance 0 is a tensor of single-qubit symplectics; a trailing
Pauli layer fixes generator signs.
"""
import numpy as np
import time
from scratch_bfs import (make_canon, make_gen_luts, apply_lut, pack_key,
                         sp_matrix_rows, mat_mul)
from cnisim.pauli import PauliString, CliffordCircuit, conjugate_by_circuit
from cnisim.shadows import _sample_symplectic, _sp_row
from cnisim.gf2 import parity

N = 4
W = 2 * N
canon = make_canon(N)
KEYS = np.load("/root/sp8_keys.npy")
DIST = np.load("/root/sp8_dist.npy")


def lookup_dist(keys):
    idx = np.searchsorted(KEYS, keys)
    assert np.all(KEYS[np.minimum(idx, KEYS.size - 1)] == keys)
    return DIST[idx]


# single-qubit symplectic words: 2x2 matrix (4 bits) -> gate word
def _sq_words():
    base = {(1, 0, 0, 1): ()}
    mats = {"H": ((0, 1), (1, 0)), "S": ((1, 0), (1, 1))}
    frontier = list(base)
    while frontier:
        nxt = []
        for m in frontier:
            for g, gm in mats.items():
                # word w then gate g: matrix M_g @ M_w
                a, b, c, d = m
                e = (gm[0][0] * a ^ gm[0][1] * c, gm[0][0] * b ^ gm[0][1] * d,
                     gm[1][0] * a ^ gm[1][1] * c, gm[1][0] * b ^ gm[1][1] * d)
                if e not in base:
                    base[e] = base[m] + (g,)
                    nxt.append(e)
        frontier = nxt
    assert len(base) == 6
    return base

SQ_WORDS = _sq_words()
SQ_MATS = list(SQ_WORDS)


def _sq_mat_mul(p, q):
    return (p[0] * q[0] ^ p[1] * q[2], p[0] * q[1] ^ p[1] * q[3],
            p[2] * q[0] ^ p[3] * q[2], p[2] * q[1] ^ p[3] * q[3])


def _sq_inv(p):
    for q in SQ_MATS:
        if _sq_mat_mul(p, q) == (1, 0, 0, 1):
            return q
    raise AssertionError


# composite right generators: local pair dressing + CNOT
def _composites():
    out = []
    cnots = [(c, t) for c in range(N) for t in range(N) if c != t]
    for (c, t) in cnots:
        for u in SQ_MATS:
            for v in SQ_MATS:
                rows = [1 << i for i in range(W)]
                # local on c: rows (2c, 2c+1) of M_l: block u
                loc = [1 << i for i in range(W)]
                loc[2 * c] = u[0] << (2 * c) | u[1] << (2 * c + 1)
                loc[2 * c + 1] = u[2] << (2 * c) | u[3] << (2 * c + 1)
                loc[2 * t] = v[0] << (2 * t) | v[1] << (2 * t + 1)
                loc[2 * t + 1] = v[2] << (2 * t) | v[3] << (2 * t + 1)
                cn = sp_matrix_rows(N, ("CNOT", c, t))
                comp = mat_mul(N, loc, cn)  # M_l @ M_c ?  order checked below
                out.append(((c, t), u, v, comp))
    return out


def _lut_of(rows_g):
    lut = np.zeros(256, dtype=np.uint64)
    for vv in range(1 << W):
        r = 0
        for j in range(W):
            if (vv >> j) & 1:
                r ^= rows_g[j]
        lut[vv] = r
    return lut


# right multiply by M: S' = S @ M.  With row-int encoding, S@M has rows
# row_i(S') = row_i(S) applied through M:  bit j of row_i(S) selects row_j(M).
COMPS = _composites()
COMP_LUTS = [_lut_of(comp[3]) for comp in COMPS]


def key_of_rows(rows):
    return np.array([pack_key(N, rows)], dtype=np.uint64)


def compile_symplectic(rows):
    """rows: matrix of the target element (columns = generator images)."""
    S = list(rows)
    word = []  # list of (pair, u, v) steps
    d = int(lookup_dist(canon(key_of_rows(S)))[0])
    while d > 0:
        found = False
        for ci, (pair, u, v, comp) in enumerate(COMPS):
            k2 = canon(apply_lut(key_of_rows(S), COMP_LUTS[ci], N))
            if int(lookup_dist(k2)[0]) == d - 1:
                S = mat_mul(N, S, comp)
                word.append((pair, u, v))
                d -= 1
                found = True
                break
        assert found, "no descending move"
    # residual S is local: extract per-qubit blocks
    resid = []
    for q in range(N):
        a = (S[2 * q] >> (2 * q)) & 1, (S[2 * q] >> (2 * q + 1)) & 1
        b = (S[2 * q + 1] >> (2 * q)) & 1, (S[2 * q + 1] >> (2 * q + 1)) & 1
        blk = (a[0], a[1], b[0], b[1])
        # verify off-block rows are clean
        mask = 3 << (2 * q)
        assert S[2 * q] & ~mask == 0 and S[2 * q + 1] & ~mask == 0
        resid.append(blk)
    ops = []
    for (pair, u, v) in word:
        ui, vi = _sq_inv(u), _sq_inv(v)
        for g in SQ_WORDS[ui]:
            ops.append((g, pair[0]))
        for g in SQ_WORDS[vi]:
            ops.append((g, pair[1]))
        ops.append(("CNOT", pair[0], pair[1]))
    for q in range(N):
        for g in SQ_WORDS[resid[q]]:
            ops.append((g, q))
    return ops, len(word)


def matrix_of_ops(ops):
    rows = [1 << i for i in range(W)]
    for op in ops:
        rows = mat_mul(N, sp_matrix_rows(N, op), rows)
    return rows


def target_matrix_from_words(words):
    """columns = (z|x)-packed images?  Build rows from generator images."""
    # words: list of 2n (z, x) images for X_0..X_{n-1} then Z_0..Z_{n-1};
    # column index for X_q is 2q, for Z_q is 2q+1; row index 2r is the x_r
    # bit of the image, row 2r+1 the z_r bit.
    rows = [0] * W
    for gi in range(2 * N):
        q = gi % N
        is_z = gi >= N
        col = 2 * q + (1 if is_z else 0)
        z, x = words[gi]
        for r in range(N):
            if (x >> r) & 1:
                rows[2 * r] |= 1 << col
            if (z >> r) & 1:
                rows[2 * r + 1] |= 1 << col
    return rows


def main():
    rng = np.random.default_rng(3)
    t0 = time.time()
    counts = []
    for trial in range(120):
        words = _sample_symplectic(N, rng)
        rows = target_matrix_from_words(words)
        ops, ncnot = compile_symplectic(rows)
        got = matrix_of_ops(ops)
        assert got == rows, (trial,)
        counts.append(ncnot)
        # sign fixing: realized vs random target signs
        signs = int(rng.integers(0, 1 << W))
        circ = CliffordCircuit(N, ops)
        zP = 0
        xP = 0
        for gi in range(2 * N):
            q = gi % N
            if gi < N:
                gen = PauliString(N, 0, 0, 1 << q)
            else:
                gen = PauliString(N, 0, 1 << q, 0)
            img = conjugate_by_circuit(gen, circ)
            want_sign = (signs >> gi) & 1
            flip = img.sign_bit ^ want_sign
            if gi < N:
                zP |= flip << q
            else:
                xP |= flip << q
        pauli_ops = []
        for q in range(N):
            zb, xb = (zP >> q) & 1, (xP >> q) & 1
            if zb:
                pauli_ops += [("S", q), ("S", q)]
            if xb:
                pauli_ops += [("H", q), ("S", q), ("S", q), ("H", q)]
        full = CliffordCircuit(N, tuple(pauli_ops) + tuple(ops))
        for gi in range(2 * N):
            q = gi % N
            gen = PauliString(N, 0, 0, 1 << q) if gi < N else \
                PauliString(N, 0, 1 << q, 0)
            img = conjugate_by_circuit(gen, full)
            z, x = words[gi]
            assert (img.z_mask, img.x_mask) == (z, x)
            assert img.sign_bit == ((signs >> gi) & 1)
    counts = np.array(counts)
    print(f"compiled 120 uniform samples in {time.time()-t0:.1f}s; "
          f"cnots mean {counts.mean():.2f} max {counts.max()}")
    # table-wide histogram
    hist = np.bincount(DIST)
    print("coset dist histogram:", hist.tolist())
    mean = (np.arange(hist.size) * hist).sum() / hist.sum()
    print(f"element-uniform mean cnots {mean:.3f}")


if __name__ == "__main__":
    main()
