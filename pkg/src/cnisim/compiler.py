"""CNOT-minimal synthesis of sampled Clifford elements.

Simulation cost under gate-attached noise is governed by the CNOT count of
every compiled circuit, so the uniform-ensemble sampler should not emit a
single entangling gate more than the group element requires.  Synthesis is
table-driven.  Single-qubit gates are free, which quotients the symplectic
group by its local subgroup: a breadth-first sweep over the left cosets
records each coset's CNOT distance, then a second sweep records one
distance-decreasing right move per coset (a local dressing of one qubit
pair followed by a CNOT).  Compiling walks the recorded moves down to a
purely local residue, so the emitted circuit realizes the element with the
minimum possible number of CNOTs; a trailing check of generator signs
prepends a Pauli layer of single-qubit gates.

Matrices act on column vectors with interleaved coordinates, index 2q for
x_q and 2q + 1 for z_q, each row stored as a bit-int over the 2n columns.
A state packs its rows into one uint64 key, row 0 in the most significant
byte, so lexicographic order on keys is row order and the canonical coset
representative is a byte-lane minimum over the 6 GL(2) images of every
row pair.  Right multiplication is a column operation, hence one 256-entry
byte lookup per row, which keeps the sweeps and the batched descent in
plain numpy.

Table sizes grow quickly (20 cosets at n = 2, 6 720 at n = 3, 36 556 800
at n = 4); the n = 4 build takes a few minutes and is cached on disk under
$CNISIM_CACHE or ~/.cache/cnisim.  Widths above 4 are out of reach for
this table and fall back to the greedy synthesizer.
"""

from __future__ import annotations

import os
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .pauli import CliffordCircuit, PauliString, conjugate_by_ops

TABLE_WIDTHS = (1, 2, 3, 4)
_CACHE_VERSION = "v1"
_CHUNK = 6_000_000
_NO_MOVE = np.uint16(0xFFFF)

# verified against the completed sweeps (tests pin these to the tables)
MIN_CNOT_DIAMETER = {1: 0, 2: 3, 3: 6, 4: 9}


# ---------------------------------------------------------------------------
# generator matrices and byte lookups


def _sp_matrix_rows(n: int, op: tuple) -> List[int]:
    """Rows of the generator matrix over the interleaved coordinates."""
    rows = [1 << i for i in range(2 * n)]
    kind = op[0]
    if kind == "H":
        q = op[1]
        rows[2 * q], rows[2 * q + 1] = rows[2 * q + 1], rows[2 * q]
    elif kind == "S":
        q = op[1]
        rows[2 * q + 1] ^= rows[2 * q]
    elif kind == "CNOT":
        c, t = op[1], op[2]
        rows[2 * t] ^= rows[2 * c]
        rows[2 * c + 1] ^= rows[2 * t + 1]
    else:
        raise ValueError(f"unknown op {op!r}")
    return rows


def _mat_mul(n: int, a: Sequence[int], b: Sequence[int]) -> List[int]:
    """Row-int product a @ b over GF(2)."""
    out = []
    for i in range(2 * n):
        r = 0
        v = a[i]
        for j in range(2 * n):
            if (v >> j) & 1:
                r ^= b[j]
        out.append(r)
    return out


def _pack_key(n: int, rows: Sequence[int]) -> int:
    k = 0
    for r in rows:
        k = (k << 8) | r
    return k


def _row_lut(n: int, rows_g: Sequence[int], dtype) -> np.ndarray:
    """Right multiplication by the matrix as a per-row byte map.

    Bit j of a state row selects row j of the factor, so the image of a
    row is a parity-fold the table stores once per byte value.
    """
    w = 2 * n
    lut = np.zeros(256, dtype=dtype)
    for v in range(1 << w):
        r = 0
        for j in range(w):
            if (v >> j) & 1:
                r ^= rows_g[j]
        lut[v] = r
    return lut


def _make_canon(n: int):
    """Vectorized canonical coset key: per-pair minimum over GL(2) images."""
    w = 2 * n
    shifts = [np.uint64(8 * (w - 1 - i)) for i in range(w)]

    def canon(keys: np.ndarray) -> np.ndarray:
        lanes = [(keys >> s) & np.uint64(0xFF) for s in shifts]
        out = np.zeros_like(keys)
        for q in range(n):
            a = lanes[2 * q]
            b = lanes[2 * q + 1]
            ab = a ^ b
            cands = (
                (a << np.uint64(8)) | b,
                (b << np.uint64(8)) | a,
                (ab << np.uint64(8)) | b,
                (b << np.uint64(8)) | ab,
                (ab << np.uint64(8)) | a,
                (a << np.uint64(8)) | ab,
            )
            m = cands[0]
            for c in cands[1:]:
                m = np.minimum(m, c)
            out |= m << np.uint64(8 * (w - 2 - 2 * q))
        return out

    return canon


def _apply_u64_lut(keys: np.ndarray, lut: np.ndarray, n: int) -> np.ndarray:
    w = 2 * n
    out = np.zeros_like(keys)
    for i in range(w):
        s = np.uint64(8 * (w - 1 - i))
        out |= lut[(keys >> s) & np.uint64(0xFF)] << s
    return out


# ---------------------------------------------------------------------------
# single-qubit words and pair composites


def _single_qubit_words() -> Dict[Tuple[int, int, int, int], Tuple[str, ...]]:
    """Gate word realizing each of the 6 GL(2) blocks, (m00, m01, m10, m11).

    Appending gate g to word w multiplies M_g on the left.
    """
    mats = {"H": (0, 1, 1, 0), "S": (1, 0, 1, 1)}
    words: Dict[Tuple[int, int, int, int], Tuple[str, ...]] = {
        (1, 0, 0, 1): ()
    }
    frontier = [(1, 0, 0, 1)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in ("H", "S"):
                gm = mats[g]
                e = (
                    gm[0] * m[0] ^ gm[1] * m[2],
                    gm[0] * m[1] ^ gm[1] * m[3],
                    gm[2] * m[0] ^ gm[3] * m[2],
                    gm[2] * m[1] ^ gm[3] * m[3],
                )
                if e not in words:
                    words[e] = words[m] + (g,)
                    nxt.append(e)
        frontier = nxt
    assert len(words) == 6
    return words


_SQ_WORDS = _single_qubit_words()
_SQ_MATS = tuple(_SQ_WORDS)


def _sq_mul(p, q):
    return (
        p[0] * q[0] ^ p[1] * q[2],
        p[0] * q[1] ^ p[1] * q[3],
        p[2] * q[0] ^ p[3] * q[2],
        p[2] * q[1] ^ p[3] * q[3],
    )


_SQ_INV = {
    p: next(q for q in _SQ_MATS if _sq_mul(p, q) == (1, 0, 0, 1))
    for p in _SQ_MATS
}


def _composites(n: int) -> List[Tuple[Tuple[int, int], tuple, tuple, List[int]]]:
    """Right moves for the descent: dress a pair locally, then one CNOT.

    The order of this list is part of the cache format; the successor
    table stores indices into it.
    """
    out = []
    for c in range(n):
        for t in range(n):
            if c == t:
                continue
            cn = _sp_matrix_rows(n, ("CNOT", c, t))
            for u in _SQ_MATS:
                for v in _SQ_MATS:
                    loc = [1 << i for i in range(2 * n)]
                    loc[2 * c] = u[0] << (2 * c) | u[1] << (2 * c + 1)
                    loc[2 * c + 1] = u[2] << (2 * c) | u[3] << (2 * c + 1)
                    loc[2 * t] = v[0] << (2 * t) | v[1] << (2 * t + 1)
                    loc[2 * t + 1] = v[2] << (2 * t) | v[3] << (2 * t + 1)
                    out.append(((c, t), u, v, _mat_mul(n, loc, cn)))
    return out


# ---------------------------------------------------------------------------
# table build


def _cache_dir() -> str:
    root = os.environ.get("CNISIM_CACHE")
    if not root:
        root = os.path.join(os.path.expanduser("~"), ".cache", "cnisim")
    return root


def _cache_paths(n: int) -> Dict[str, str]:
    root = _cache_dir()
    stem = f"cnot_table_{_CACHE_VERSION}_n{n}"
    return {
        part: os.path.join(root, f"{stem}_{part}.npy")
        for part in ("keys", "dist", "succ")
    }


def _in_sorted(x: np.ndarray, sorted_arr: np.ndarray) -> np.ndarray:
    if sorted_arr.size == 0:
        return np.zeros(x.shape, dtype=bool)
    idx = np.searchsorted(sorted_arr, x)
    idx[idx == sorted_arr.size] = 0
    return sorted_arr[idx] == x


def _coset_bfs(n: int, canon, verbose: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Distance-layered sweep; locals are free, each CNOT costs one."""
    local_luts = [
        _row_lut(n, _sp_matrix_rows(n, op), np.uint64)
        for q in range(n)
        for op in (("H", q), ("S", q))
    ]
    cnot_luts = [
        _row_lut(n, _sp_matrix_rows(n, ("CNOT", c, t)), np.uint64)
        for c in range(n)
        for t in range(n)
        if c != t
    ]

    def expand_unique(keys: np.ndarray, luts) -> np.ndarray:
        parts = []
        for lut in luts:
            for lo in range(0, keys.size, _CHUNK):
                img = canon(_apply_u64_lut(keys[lo : lo + _CHUNK], lut, n))
                parts.append(np.unique(img))
                if sum(p.size for p in parts) > 4 * _CHUNK:
                    parts = [np.unique(np.concatenate(parts))]
        return np.unique(np.concatenate(parts))

    visited_blocks: List[np.ndarray] = []

    def in_visited(x: np.ndarray) -> np.ndarray:
        r = np.zeros(x.shape, dtype=bool)
        for b in visited_blocks:
            r |= _in_sorted(x, b)
        return r

    def close_free(seed: np.ndarray) -> np.ndarray:
        level = np.unique(seed)
        work = level
        while work.size:
            exp = expand_unique(work, local_luts)
            exp = exp[~_in_sorted(exp, level)]
            exp = exp[~in_visited(exp)]
            if exp.size == 0:
                break
            level = np.union1d(level, exp)
            work = exp
        return level

    ident = np.array(
        [_pack_key(n, [1 << i for i in range(2 * n)])], dtype=np.uint64
    )
    level = close_free(canon(ident))
    t0 = time.time()
    d = 0
    while level.size:
        visited_blocks.append(level)
        if verbose:
            total = sum(b.size for b in visited_blocks)
            print(
                f"  cnot table n={n}: depth {d}, {level.size:,} cosets "
                f"({total:,} total, {time.time() - t0:.0f}s)",
                file=sys.stderr,
                flush=True,
            )
        if not cnot_luts:
            break
        nxt = expand_unique(level, cnot_luts)
        nxt = nxt[~in_visited(nxt)]
        if nxt.size == 0:
            break
        level = close_free(nxt)
        d += 1

    keys = np.concatenate(visited_blocks)
    dist = np.concatenate(
        [np.full(b.size, i, dtype=np.uint8) for i, b in enumerate(visited_blocks)]
    )
    order = np.argsort(keys, kind="stable")
    return keys[order], dist[order]


def _successor_sweep(
    n: int, canon, keys: np.ndarray, dist: np.ndarray, comp_luts, verbose: bool
) -> np.ndarray:
    """First distance-decreasing composite per coset.

    Every coset at positive distance has one: take a minimal decomposition,
    cancel its final CNOT together with the pair part of the trailing local
    layer.  The sweep therefore must resolve every entry, and checking that
    it did certifies minimality of the whole table.
    """
    succ = np.full(keys.size, _NO_MOVE, dtype=np.uint16)
    pending = np.flatnonzero(dist > 0).astype(np.int64)
    t0 = time.time()
    for ci, lut in enumerate(comp_luts):
        if pending.size == 0:
            break
        for lo in range(0, pending.size, _CHUNK):
            sel = pending[lo : lo + _CHUNK]
            img = canon(_apply_u64_lut(keys[sel], lut, n))
            down = dist[np.searchsorted(keys, img)] < dist[sel]
            succ[sel[down]] = ci
        pending = pending[succ[pending] == _NO_MOVE]
        if verbose and ci % 64 == 63:
            print(
                f"  cnot table n={n}: successor sweep {ci + 1} moves, "
                f"{pending.size:,} pending ({time.time() - t0:.0f}s)",
                file=sys.stderr,
                flush=True,
            )
    if pending.size:
        raise AssertionError("coset without a distance-decreasing move")
    return succ


@dataclass(frozen=True)
class CnotTable:
    """Sorted coset keys with CNOT distances and descent moves for one n."""

    n: int
    keys: np.ndarray
    dist: np.ndarray
    succ: np.ndarray

    @property
    def diameter(self) -> int:
        return int(self.dist.max(initial=0))

    def distance_histogram(self) -> np.ndarray:
        return np.bincount(self.dist, minlength=self.diameter + 1)


_TABLES: Dict[int, CnotTable] = {}
_CANONS: Dict[int, object] = {}
_COMPS: Dict[int, list] = {}
_COMP_U64_LUTS: Dict[int, list] = {}
_COMP_BYTE_LUTS: Dict[int, np.ndarray] = {}


def _canon_for(n: int):
    if n not in _CANONS:
        _CANONS[n] = _make_canon(n)
    return _CANONS[n]


def _comps_for(n: int) -> list:
    if n not in _COMPS:
        _COMPS[n] = _composites(n)
    return _COMPS[n]


def _comp_u64_luts(n: int) -> list:
    if n not in _COMP_U64_LUTS:
        _COMP_U64_LUTS[n] = [
            _row_lut(n, comp[3], np.uint64) for comp in _comps_for(n)
        ]
    return _COMP_U64_LUTS[n]


def _comp_byte_luts(n: int) -> np.ndarray:
    if n not in _COMP_BYTE_LUTS:
        luts = [_row_lut(n, comp[3], np.uint8) for comp in _comps_for(n)]
        _COMP_BYTE_LUTS[n] = (
            np.stack(luts) if luts else np.zeros((0, 256), dtype=np.uint8)
        )
    return _COMP_BYTE_LUTS[n]


def build_table(n: int, verbose: bool = True) -> CnotTable:
    """Run both sweeps in memory; no cache interaction."""
    if n not in TABLE_WIDTHS:
        raise ValueError(f"no CNOT table for n={n}")
    canon = _canon_for(n)
    keys, dist = _coset_bfs(n, canon, verbose)
    succ = _successor_sweep(
        n, canon, keys, dist, _comp_u64_luts(n), verbose
    )
    return CnotTable(n, keys, dist, succ)


def load_table(n: int, verbose: bool = True) -> CnotTable:
    """Cached table for n qubits, building it on first use.

    Small widths rebuild in memory instantly; n = 4 persists its ~400 MB
    of arrays under the cache directory since the sweeps take minutes.
    """
    if n in _TABLES:
        return _TABLES[n]
    if n not in TABLE_WIDTHS:
        raise ValueError(f"no CNOT table for n={n}")
    if n <= 3:
        table = build_table(n, verbose=False)
        _TABLES[n] = table
        return table
    paths = _cache_paths(n)
    if all(os.path.exists(p) for p in paths.values()):
        table = CnotTable(
            n,
            np.load(paths["keys"]),
            np.load(paths["dist"]),
            np.load(paths["succ"]),
        )
        _TABLES[n] = table
        return table
    if verbose:
        print(
            f"building CNOT-distance table for n={n} "
            f"(one-time, a few minutes, cached at {_cache_dir()})",
            file=sys.stderr,
            flush=True,
        )
    table = build_table(n, verbose=verbose)
    os.makedirs(_cache_dir(), exist_ok=True)
    for part, arr in (
        ("keys", table.keys),
        ("dist", table.dist),
        ("succ", table.succ),
    ):
        tmp = paths[part] + f".tmp{os.getpid()}"
        np.save(tmp, arr)
        os.replace(tmp, paths[part])
    _TABLES[n] = table
    return table


# ---------------------------------------------------------------------------
# compilation


def _target_matrix(n: int, words: Sequence[Tuple[int, int]]) -> List[int]:
    """Rows of the element sending X_q, Z_q onto the given (z, x) images.

    Column 2q holds the image of X_q, column 2q + 1 the image of Z_q; row
    2r carries the x_r bit of an image and row 2r + 1 its z_r bit.
    """
    rows = [0] * (2 * n)
    for gi, (z, x) in enumerate(words):
        q = gi % n
        col = 2 * q + (1 if gi >= n else 0)
        for r in range(n):
            if (x >> r) & 1:
                rows[2 * r] |= 1 << col
            if (z >> r) & 1:
                rows[2 * r + 1] |= 1 << col
    return rows


def _pack_batch(rows: np.ndarray, n: int) -> np.ndarray:
    w = 2 * n
    keys = np.zeros(rows.shape[0], dtype=np.uint64)
    for i in range(w):
        keys |= rows[:, i].astype(np.uint64) << np.uint64(8 * (w - 1 - i))
    return keys


def _descend_batch(
    table: CnotTable, rows: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Lockstep descent of a batch of row matrices to local residues.

    rows is [B, 2n] uint8 and is consumed; returns the residual rows and
    the [B, diameter] int16 move sequence, -1 past the end.
    """
    n = table.n
    canon = _canon_for(n)
    byte_luts = _comp_byte_luts(n)
    b = rows.shape[0]
    moves = np.full((b, max(table.diameter, 1)), -1, dtype=np.int16)
    active = np.arange(b)
    step = 0
    while active.size:
        keys = canon(_pack_batch(rows[active], n))
        idx = np.searchsorted(table.keys, keys)
        if not np.all(table.keys[np.minimum(idx, table.keys.size - 1)] == keys):
            raise AssertionError("state outside the coset table")
        live = table.dist[idx] > 0
        active = active[live]
        if not active.size:
            break
        ci = table.succ[idx[live]].astype(np.int16)
        moves[active, step] = ci
        rows[active] = byte_luts[ci[:, None], rows[active]]
        step += 1
    return rows, moves


_Z_WORD = ("S", "S")
_X_WORD = ("H", "S", "S", "H")


def _emit_ops(
    n: int,
    comps: list,
    move_row: np.ndarray,
    resid_rows: np.ndarray,
) -> List[tuple]:
    """Gate list realizing the element from its move sequence and residue."""
    ops: List[tuple] = []
    for ci in move_row:
        if ci < 0:
            break
        (c, t), u, v, _ = comps[ci]
        for g in _SQ_WORDS[_SQ_INV[u]]:
            ops.append((g, c))
        for g in _SQ_WORDS[_SQ_INV[v]]:
            ops.append((g, t))
        ops.append(("CNOT", c, t))
    for q in range(n):
        r0 = int(resid_rows[2 * q])
        r1 = int(resid_rows[2 * q + 1])
        mask = 3 << (2 * q)
        assert r0 & ~mask == 0 and r1 & ~mask == 0
        blk = (
            (r0 >> (2 * q)) & 1,
            (r0 >> (2 * q + 1)) & 1,
            (r1 >> (2 * q)) & 1,
            (r1 >> (2 * q + 1)) & 1,
        )
        for g in _SQ_WORDS[blk]:
            ops.append((g, q))
    return ops


def _sign_layer(
    n: int, ops: List[tuple], words: Sequence[Tuple[int, int, int]]
) -> List[tuple]:
    """Pauli prefix flipping realized generator signs onto the targets."""
    z_flips = 0
    x_flips = 0
    for gi, (sign, _, _) in enumerate(words):
        q = gi % n
        gen = (
            PauliString(n, 0, 0, 1 << q)
            if gi < n
            else PauliString(n, 0, 1 << q, 0)
        )
        img = conjugate_by_ops(gen, ops)
        if img.sign_bit ^ sign:
            if gi < n:
                z_flips |= 1 << q
            else:
                x_flips |= 1 << q
    prefix: List[tuple] = []
    for q in range(n):
        if (z_flips >> q) & 1:
            prefix.extend((g, q) for g in _Z_WORD)
        if (x_flips >> q) & 1:
            prefix.extend((g, q) for g in _X_WORD)
    return prefix


def compile_words_batch(
    n: int, words_batch: Sequence[Sequence[Tuple[int, int, int]]]
) -> List[CliffordCircuit]:
    """CNOT-minimal circuits for signed generator images, batched.

    Each entry lists targets for X_1..X_n then Z_1..Z_n as (sign, z, x)
    triples.  The whole batch descends the distance table in lockstep;
    gate emission and the sign layer run per element.
    """
    table = load_table(n)
    comps = _comps_for(n)
    b = len(words_batch)
    rows = np.zeros((b, 2 * n), dtype=np.uint8)
    for i, words in enumerate(words_batch):
        rows[i] = _target_matrix(n, [(z, x) for _, z, x in words])
    resid, moves = _descend_batch(table, rows)
    out = []
    for i, words in enumerate(words_batch):
        ops = _emit_ops(n, comps, moves[i], resid[i])
        prefix = _sign_layer(n, ops, words)
        out.append(CliffordCircuit(n, tuple(prefix) + tuple(ops)))
    return out


def compile_words(
    n: int, words: Sequence[Tuple[int, int, int]]
) -> CliffordCircuit:
    """Single-element convenience wrapper over the batched compiler."""
    return compile_words_batch(n, [words])[0]
