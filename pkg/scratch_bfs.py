"""Prototype: CNOT-count BFS tables.

Part 1: GL(4,2) under CNOT generators (no local moves) as an encoding warmup.
Part 2: left-coset 0-1 BFS for Sp(2n,2) with free single-qubit moves, n<=3.
Validates canonicalization, generator LUTs, and distances against a direct
Cayley BFS over the full group at n=2.
"""
import numpy as np
from collections import deque

# ---------------------------------------------------------------- GL(4,2)
def gl_warmup():
    n = 4
    gens = []
    for c in range(n):
        for t in range(n):
            if c != t:
                gens.append((c, t))
    # matrix as tuple of n rows, each an n-bit int; CNOT(c,t): row t ^= row c
    start = tuple(1 << i for i in range(n))
    dist = {start: 0}
    q = deque([start])
    while q:
        m = q.popleft()
        d = dist[m]
        for (c, t) in gens:
            rows = list(m)
            rows[t] ^= rows[c]
            m2 = tuple(rows)
            if m2 not in dist:
                dist[m2] = d + 1
                q.append(m2)
    hist = {}
    for v in dist.values():
        hist[v] = hist.get(v, 0) + 1
    print("GL(4,2): |group| =", len(dist), " hist =", sorted(hist.items()))

# ------------------------------------------------- Sp(2n,2) coset BFS
# Coordinates interleaved: index 2q = x_q, 2q+1 = z_q.  A group element is
# an invertible matrix M acting on column vectors; key packs row 0 in the
# most significant byte so lexicographic order on keys equals row order.

def sp_matrix_rows(n, op):
    """Rows (as bit-ints over 2n columns) of the generator matrix."""
    W = 2 * n
    rows = [1 << i for i in range(W)]
    kind = op[0]
    if kind == "H":
        q = op[1]
        rows[2 * q], rows[2 * q + 1] = rows[2 * q + 1], rows[2 * q]
    elif kind == "S":
        q = op[1]
        rows[2 * q + 1] ^= rows[2 * q]
    elif kind == "CNOT":
        c, t = op[1], op[2]
        rows[2 * t] ^= rows[2 * c]          # x_t += x_c
        rows[2 * c + 1] ^= rows[2 * t + 1]  # z_c += z_t
    else:
        raise ValueError(op)
    return rows

def mat_mul(n, A, B):
    """Row-int product A@B over GF(2); A,B lists of 2n row ints."""
    W = 2 * n
    out = []
    for i in range(W):
        r = 0
        a = A[i]
        for j in range(W):
            if (a >> j) & 1:
                r ^= B[j]
        out.append(r)
    return out

def pack_key(n, rows):
    W = 2 * n
    k = 0
    for i in range(W):
        k = (k << 8) | rows[i]
    return k

# vectorized canonical form for n<=4 using u64 keys, one byte per row
def make_canon(n):
    W = 2 * n
    shifts = [8 * (W - 1 - i) for i in range(W)]

    def canon(keys):
        lanes = [(keys >> s) & np.uint64(0xFF) for s in shifts]
        out = np.zeros_like(keys)
        for q in range(n):
            a = lanes[2 * q]
            b = lanes[2 * q + 1]
            ab = a ^ b
            c0 = (a << np.uint64(8)) | b
            c1 = (b << np.uint64(8)) | a
            c2 = (ab << np.uint64(8)) | b
            c3 = (b << np.uint64(8)) | ab
            c4 = (ab << np.uint64(8)) | a
            c5 = (a << np.uint64(8)) | ab
            m = np.minimum(np.minimum(np.minimum(c0, c1), np.minimum(c2, c3)),
                           np.minimum(c4, c5))
            out |= m << np.uint64(8 * (W - 2 - 2 * q))
        return out
    return canon

def make_gen_luts(n, ops):
    """Right-multiplication by each generator as per-row byte LUTs.

    S' = S @ M_g is a column operation applied to every row of S; a row is a
    byte, so the op is one 256-entry table lookup per row.
    """
    W = 2 * n
    luts = []
    for op in ops:
        rows_g = sp_matrix_rows(n, op)
        lut = np.zeros(256, dtype=np.uint64)
        for v in range(1 << W):
            r = 0
            for j in range(W):
                if (v >> j) & 1:
                    # row bit j contributes row j of M_g to the product row
                    r ^= rows_g[j]
            lut[v] = r
        luts.append(lut)
    return luts

def apply_lut(keys, lut, n):
    W = 2 * n
    out = np.zeros_like(keys)
    for i in range(W):
        s = np.uint64(8 * (W - 1 - i))
        lane = (keys >> s) & np.uint64(0xFF)
        out |= lut[lane] << s
    return out

def in_sorted(x, sorted_arr):
    if sorted_arr.size == 0:
        return np.zeros(x.shape, dtype=bool)
    idx = np.searchsorted(sorted_arr, x)
    idx[idx == sorted_arr.size] = 0
    return sorted_arr[idx] == x

def sp_coset_bfs(n, verbose=False):
    W = 2 * n
    canon = make_canon(n)
    local_ops = [("H", q) for q in range(n)] + [("S", q) for q in range(n)]
    cnot_ops = [("CNOT", c, t) for c in range(n) for t in range(n) if c != t]
    local_luts = make_gen_luts(n, local_ops)
    cnot_luts = make_gen_luts(n, cnot_ops)

    ident = np.array([pack_key(n, [1 << i for i in range(W)])], dtype=np.uint64)
    visited_blocks = []

    def in_visited(x):
        r = np.zeros(x.shape, dtype=bool)
        for b in visited_blocks:
            r |= in_sorted(x, b)
        return r

    def close0(seed, level):
        work = seed
        while work.size:
            exp = np.unique(np.concatenate(
                [canon(apply_lut(work, lut, n)) for lut in local_luts]))
            exp = exp[~in_sorted(exp, level)]
            exp = exp[~in_visited(exp)]
            if exp.size == 0:
                break
            level = np.union1d(level, exp)
            work = exp
        return level

    seed = canon(ident)
    level = close0(seed, np.unique(seed))
    dists = []
    d = 0
    total = 0
    while level.size:
        visited_blocks.append(level)
        dists.append(level.size)
        total += level.size
        if verbose:
            print(f"  dist {d}: {level.size} cosets (total {total})")
        if not cnot_luts:
            break
        nxt = np.unique(np.concatenate(
            [canon(apply_lut(level, lut, n)) for lut in cnot_luts]))
        nxt = nxt[~in_visited(nxt)]
        if nxt.size == 0:
            break
        level = close0(nxt, nxt)
        d += 1
    return visited_blocks, dists

def sp_group_order(n):
    o = 1
    for i in range(1, n + 1):
        o *= 4**i - 1
    return o << (n * n)

# direct full-group 0-1 BFS at n=2 for cross-checking
def direct_clifford_cnot_distance(n=2):
    W = 2 * n
    local = [("H", 0), ("H", 1), ("S", 0), ("S", 1)]
    cnots = [("CNOT", 0, 1), ("CNOT", 1, 0)]
    I = tuple(1 << i for i in range(W))
    dist = {I: 0}
    frontier = {I}
    # 0-1 BFS via repeated relaxation: locals cost 0, cnots cost 1
    def neighbors(m, ops):
        out = []
        for op in ops:
            g = sp_matrix_rows(n, op)
            out.append(tuple(mat_mul(n, list(m), g)))
        return out
    # Dijkstra-lite with deque
    from collections import deque as dq
    dd = {I: 0}
    queue = dq([I])
    while queue:
        m = queue.popleft()
        for m2 in neighbors(m, local):
            if m2 not in dd or dd[m2] > dd[m]:
                if m2 not in dd:
                    dd[m2] = dd[m]
                    queue.appendleft(m2)
                elif dd[m] < dd[m2]:
                    dd[m2] = dd[m]
                    queue.appendleft(m2)
        for m2 in neighbors(m, cnots):
            nd = dd[m] + 1
            if m2 not in dd or nd < dd[m2]:
                dd[m2] = nd
                queue.append(m2)
    hist = {}
    for v in dd.values():
        hist[v] = hist.get(v, 0) + 1
    return len(dd), sorted(hist.items())

if __name__ == "__main__":
    gl_warmup()
    sz, hist = direct_clifford_cnot_distance(2)
    print("Sp(4,2) direct 0-1 BFS: |group| =", sz, " dist hist =", hist)
    for n in (1, 2, 3):
        blocks, dists = sp_coset_bfs(n)
        tot = sum(dists)
        expect = sp_group_order(n) // 6**n
        print(f"Sp({2*n},2) cosets: found {tot} expect {expect} "
              f"per-dist {dists}")
        # group-element-weighted histogram equals coset histogram
