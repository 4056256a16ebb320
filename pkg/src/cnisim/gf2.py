"""Small GF(2) linear algebra helpers on int bitsets.

Vectors are python ints (bit k = coordinate k), matrices are lists of row
ints. Everything is little, allocation-free and exact; these helpers back the
stabilizer echelon forms and the symplectic sampler.
"""

from __future__ import annotations

from typing import List, Optional, Tuple


def parity(x: int) -> int:
    """Parity of the set bits of x."""
    return bin(x).count("1") & 1


def gf2_rank(rows: List[int]) -> int:
    """Rank of the row set over GF(2)."""
    work = [r for r in rows if r]
    rank = 0
    while work:
        pivot = work.pop()
        if pivot == 0:
            continue
        rank += 1
        low = pivot & -pivot
        work = [r ^ pivot if r & low else r for r in work]
    return rank


def gf2_reduce(vec: int, pivots: List[Tuple[int, int]]) -> int:
    """Reduce vec by (low_bit, row) pivot pairs; returns the residual."""
    for low, row in pivots:
        if vec & low:
            vec ^= row
    return vec


def gf2_solve(rows: List[int], target: int) -> Optional[int]:
    """Find x (combination bitmask over rows) with XOR of selected rows == target.

    Returns None when target is outside the rowspan. Rows need not be
    independent; any one solution is returned.
    """
    # Augment each row with its selector bits above the value bits.
    width = max([r.bit_length() for r in rows] + [target.bit_length()]) or 1
    aug = [(r | (1 << (width + i))) for i, r in enumerate(rows)]
    pivots: List[Tuple[int, int]] = []
    value_mask = (1 << width) - 1
    for row in aug:
        for low, p in pivots:
            if row & low:
                row ^= p
        if row & value_mask:
            low = (row & value_mask) & -(row & value_mask)
            pivots.append((low, row))
    acc = target
    combo = 0
    for low, p in pivots:
        if acc & low:
            acc ^= p & value_mask
            combo ^= p >> width
    if acc != 0:
        return None
    return combo


def gf2_nullspace_basis(rows: List[int], n_cols: int) -> List[int]:
    """Basis of {v : parity(row & v) == 0 for every row}."""
    # Row-reduce, track pivot columns, then read kernel vectors off the
    # free columns.
    work: List[int] = []
    pivot_cols: List[int] = []
    for r in rows:
        for col, p in zip(pivot_cols, work):
            if (r >> col) & 1:
                r ^= p
        if r:
            col = (r & -r).bit_length() - 1
            # insert keeping pivot columns sorted for the back-substitution
            idx = 0
            while idx < len(pivot_cols) and pivot_cols[idx] < col:
                idx += 1
            pivot_cols.insert(idx, col)
            work.insert(idx, r)
            # clear this column from the other pivot rows
            for j in range(len(work)):
                if j != idx and (work[j] >> col) & 1:
                    work[j] ^= r
    basis = []
    pivot_set = set(pivot_cols)
    for free in range(n_cols):
        if free in pivot_set:
            continue
        v = 1 << free
        for col, p in zip(pivot_cols, work):
            if (p >> free) & 1:
                v |= 1 << col
        basis.append(v)
    return basis


def gf2_solve_system(rows: List[int], rhs: List[int]) -> Optional[int]:
    """One x with parity(rows[i] & x) == rhs[i] for every i, or None.

    Together with gf2_nullspace_basis this parameterizes the full solution
    set of an affine system.
    """
    echelon: List[Tuple[int, int, int]] = []  # (row, bit, pivot column)
    for row, b in zip(rows, rhs):
        for prow, pb, pcol in echelon:
            if (row >> pcol) & 1:
                row ^= prow
                b ^= pb
        if row == 0:
            if b:
                return None
            continue
        echelon.append((row, b, row.bit_length() - 1))
    x = 0
    # Pivot is each row's highest bit, so filling pivots upward only ever
    # reads bits already decided.
    for prow, pb, pcol in sorted(echelon, key=lambda t: t[2]):
        if parity(prow & x) != pb:
            x |= 1 << pcol
    return x
