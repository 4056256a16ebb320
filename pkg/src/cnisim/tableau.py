"""Stabilizer tableau simulation with subnormalized states.

A tableau holds n commuting signed Pauli generators for a pure stabilizer
state |phi><phi| together with a scalar trace factor g = 2**(-m_exp), so the
represented object is g * |phi><phi|. Non-renormalized Z projectors either
halve g (fresh outcome), leave it (consistent forced outcome), or annihilate
the state (contradiction, `zero` flag). This is exactly what is needed to
evaluate basis channels B(|b><b|) and matrix elements <<c|B|b>>.

Rows are (sign, z_mask, x_mask) int triples; qubit q is bit q of each mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .gf2 import parity
from .pauli import PauliString, gate_on_word, pauli_to_text

Word = Tuple[int, int, int]  # (sign, z_mask, x_mask)


@dataclass(frozen=True)
class EchelonForm:
    """Canonical echelon data of a stabilizer group.

    The X block carries rows (s_i, A_i | C_i) with C of full row rank; the
    X-free rows carry (t_i, D_i). rank(C) + rank(D) = n. Equal groups give
    bit-identical forms, so (t, D) comparisons across states are meaningful.
    """

    n: int
    s: Tuple[int, ...]
    a_rows: Tuple[int, ...]
    c_rows: Tuple[int, ...]
    t: Tuple[int, ...]
    d_rows: Tuple[int, ...]


def _word_mul(a: Word, b: Word) -> Word:
    """Product of two commuting signed words; the +-1 folds into the sign."""
    s1, z1, x1 = a
    s2, z2, x2 = b
    z3 = z1 ^ z2
    x3 = x1 ^ x2
    k = (
        -bin(z1 & x1).count("1")
        - bin(z2 & x2).count("1")
        + 2 * bin(x1 & z2).count("1")
        + bin(z3 & x3).count("1")
    ) % 4
    if k & 1:
        raise ValueError("anticommuting rows multiplied inside a tableau")
    return (s1 ^ s2 ^ (k >> 1), z3, x3)


class StabilizerTableau:
    """Subnormalized pure stabilizer state g * |phi><phi|."""

    __slots__ = ("n", "rows", "m_exp", "zero")

    def __init__(self, n: int, rows: List[Word], m_exp: int = 0, zero: bool = False):
        self.n = n
        self.rows = rows
        self.m_exp = m_exp
        self.zero = zero

    @classmethod
    def basis_state(cls, n: int, bits: int = 0) -> "StabilizerTableau":
        """|bits><bits| with qubit q read from bit q."""
        rows = [(((bits >> q) & 1), 1 << q, 0) for q in range(n)]
        return cls(n, rows)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, list(self.rows), self.m_exp, self.zero)

    @property
    def g(self) -> float:
        return 0.0 if self.zero else 2.0 ** (-self.m_exp)

    # -- channel application ------------------------------------------------

    def apply_gate(self, op: Tuple) -> None:
        if self.zero:
            return
        self.rows = [gate_on_word(op, *row) for row in self.rows]

    def apply_ops(self, ops: Sequence[Tuple]) -> None:
        """Run a mixed sequence of gates and ("P0"|"P1", q) projectors."""
        for op in ops:
            if op[0] == "P0":
                self.apply_projector(op[1], 0)
            elif op[0] == "P1":
                self.apply_projector(op[1], 1)
            else:
                self.apply_gate(op)

    def apply_pauli(self, p: PauliString) -> None:
        """Conjugate the state by a Pauli: rows anticommuting with it flip sign."""
        if self.zero:
            return
        self.rows = [
            (
                s ^ parity(z & p.x_mask) ^ parity(x & p.z_mask),
                z,
                x,
            )
            for s, z, x in self.rows
        ]

    def _collapse(self, q: int, outcome: int) -> None:
        """Case (a) row update: pivot becomes (-1)^outcome Z_q."""
        m = 1 << q
        pivot_idx = next(i for i, r in enumerate(self.rows) if r[2] & m)
        pivot = self.rows[pivot_idx]
        for i, row in enumerate(self.rows):
            if i != pivot_idx and row[2] & m:
                self.rows[i] = _word_mul(row, pivot)
        self.rows[pivot_idx] = (outcome & 1, m, 0)

    def _forced_sign(self, q: int) -> int:
        """Sign s with (-1)^s Z_q in the group; valid only in case (b)."""
        sign, residue = self._reduce_z_word(1 << q)
        if residue != 0:
            raise AssertionError("Z_q not in the stabilizer group")
        return sign

    def _reduce_z_word(self, z_target: int) -> Tuple[int, int]:
        """Reduce a Z-type word modulo the group's Z-type subgroup.

        Returns (sign, residue): residue == 0 means (-1)^sign Z[z_target]
        is a group element.
        """
        pool = self._z_subgroup_pool()
        sign = 0
        w = z_target
        while w:
            low = w & (-w)
            row = pool.get(low)
            if row is None:
                break
            sign ^= row[0]
            w ^= row[1]
        return sign, w

    def _z_subgroup_pool(self) -> Dict[int, Word]:
        """X-free echelon basis {low_z_bit: (sign, z, 0)} of the group."""
        scratch = list(self.rows)
        used = [False] * len(scratch)
        for col in range(self.n):
            m = 1 << col
            pivot_idx = None
            for i, row in enumerate(scratch):
                if not used[i] and row[2] & m:
                    pivot_idx = i
                    break
            if pivot_idx is None:
                continue
            used[pivot_idx] = True
            pivot = scratch[pivot_idx]
            for i, row in enumerate(scratch):
                if i != pivot_idx and row[2] & m:
                    scratch[i] = _word_mul(row, pivot)
        pool: Dict[int, Word] = {}
        for i, row in enumerate(scratch):
            if used[i]:
                continue
            s, z, _ = row
            while z:
                low = z & (-z)
                other = pool.get(low)
                if other is None:
                    pool[low] = (s, z, 0)
                    break
                s ^= other[0]
                z ^= other[1]
        return pool

    def measure_z(self, q: int, rng) -> int:
        """Sample a Z measurement of qubit q and collapse (renormalized)."""
        if self.zero:
            raise ValueError("cannot sample from the zero state")
        m = 1 << q
        if any(row[2] & m for row in self.rows):
            outcome = int(rng.integers(2))
            self._collapse(q, outcome)
            return outcome
        return self._forced_sign(q)

    def measure_all(self, rng) -> int:
        """Sample the full computational-basis register, collapsing in place."""
        bits = 0
        for q in range(self.n):
            bits |= self.measure_z(q, rng) << q
        return bits

    def apply_projector(self, q: int, outcome: int) -> None:
        """Non-renormalized projector |outcome><outcome| on qubit q."""
        if self.zero:
            return
        m = 1 << q
        if any(row[2] & m for row in self.rows):
            self.m_exp += 1
            self._collapse(q, outcome)
            return
        if self._forced_sign(q) != (outcome & 1):
            self.zero = True
            self.rows = []

    # -- canonical form and derived data -------------------------------------

    def canonical_rows(self) -> List[Word]:
        """Unique echelon generating set for the signed group.

        X block first (RREF over x columns, pivots in column order), then the
        X-free block in RREF over z columns, then the X block's z parts are
        reduced modulo the X-free block so every entry is canonical.
        """
        if self.zero:
            return []
        rows = list(self.rows)
        x_block: List[Word] = []
        remaining = rows
        for col in range(self.n):
            m = 1 << col
            pivot = None
            rest: List[Word] = []
            for row in remaining:
                if pivot is None and row[2] & m:
                    pivot = row
                else:
                    rest.append(row)
            if pivot is None:
                remaining = rest
                continue
            x_block = [
                _word_mul(r, pivot) if r[2] & m else r for r in x_block
            ]
            remaining = [
                _word_mul(r, pivot) if r[2] & m else r for r in rest
            ]
            x_block.append(pivot)
        z_block: List[Word] = []
        for col in range(self.n):
            m = 1 << col
            pivot = None
            rest = []
            for row in remaining:
                if pivot is None and row[1] & m:
                    pivot = row
                else:
                    rest.append(row)
            if pivot is None:
                remaining = rest
                continue
            z_block = [_word_mul(r, pivot) if r[1] & m else r for r in z_block]
            remaining = [_word_mul(r, pivot) if r[1] & m else r for r in rest]
            z_block.append(pivot)
        if remaining:
            raise AssertionError("dependent generators in tableau")
        for pivot in z_block:
            low = pivot[1] & (-pivot[1])
            x_block = [
                _word_mul(r, pivot) if r[1] & low else r for r in x_block
            ]
        return x_block + z_block

    def row_echelon(self) -> EchelonForm:
        if self.zero:
            raise ValueError("echelon form of the zero state")
        s_bits: List[int] = []
        a_rows: List[int] = []
        c_rows: List[int] = []
        t_bits: List[int] = []
        d_rows: List[int] = []
        for s, z, x in self.canonical_rows():
            if x:
                s_bits.append(s)
                a_rows.append(z)
                c_rows.append(x)
            else:
                t_bits.append(s)
                d_rows.append(z)
        return EchelonForm(
            self.n,
            tuple(s_bits),
            tuple(a_rows),
            tuple(c_rows),
            tuple(t_bits),
            tuple(d_rows),
        )

    def x_rank(self) -> int:
        return sum(1 for row in self.canonical_rows() if row[2])

    def z_constraints(self) -> Tuple[List[int], List[int]]:
        """(D, t): outcome c has support iff parity(D_i & c) == t_i for all i."""
        d_rows: List[int] = []
        t_bits: List[int] = []
        for s, z, x in self.canonical_rows():
            if x == 0:
                d_rows.append(z)
                t_bits.append(s)
        return d_rows, t_bits

    def z_block_signature(self) -> Tuple:
        """Hashable invariant deciding measurement-distribution equality."""
        if self.zero:
            return ("zero",)
        d_rows, t_bits = self.z_constraints()
        return (self.m_exp, tuple(d_rows), tuple(t_bits))

    def overlap_with_basis(self, bits: int) -> float:
        """g * |<bits|phi>|**2, i.e. the outcome probability times g."""
        if self.zero:
            return 0.0
        d_rows, t_bits = self.z_constraints()
        for d, t in zip(d_rows, t_bits):
            if parity(d & bits) != t:
                return 0.0
        rank_c = self.n - len(d_rows)
        return self.g * 2.0 ** (-rank_c)

    def sample_outcome(self, rng) -> int:
        """Draw one measurement outcome without collapsing the tableau."""
        if self.zero:
            raise ValueError("cannot sample from the zero state")
        d_rows, t_bits = self.z_constraints()
        c = 0
        for d, t in zip(d_rows, t_bits):
            if t:
                c |= d & (-d)
        pivot_mask = 0
        for d in d_rows:
            pivot_mask |= d & (-d)
        for col in range(self.n):
            m = 1 << col
            if pivot_mask & m:
                continue
            if rng.integers(2):
                c ^= m
                for d, _ in zip(d_rows, t_bits):
                    if d & m:
                        c ^= d & (-d)
        return c

    # -- signed membership and overlaps ---------------------------------------

    def _signed_pool(self) -> Dict[int, Word]:
        """Echelon pool over combined (x<<n | z) vectors for signed reduction."""
        pool: Dict[int, Word] = {}
        n = self.n
        for row in self.rows:
            s, z, x = row
            ph = 2 * s  # i-exponent, mod 4
            while True:
                vec = (x << n) | z
                if vec == 0:
                    raise AssertionError("dependent generators in tableau")
                low = vec & (-vec)
                entry = pool.get(low)
                if entry is None:
                    if ph & 1:
                        raise AssertionError("imaginary phase on a group element")
                    pool[low] = ((ph >> 1) & 1, z, x)
                    break
                ph += _phase_exponent((z, x), (entry[1], entry[2])) + 2 * entry[0]
                z ^= entry[1]
                x ^= entry[2]
        return pool

    def expectation_pauli(self, p: PauliString) -> float:
        """Tr(|phi><phi| P) for a signed Pauli: +1, -1, or 0."""
        if self.zero:
            return 0.0
        pool = self._signed_pool()
        n = self.n
        z, x = p.z_mask, p.x_mask
        ph = 2 * p.sign_bit
        while (z | x) != 0:
            vec = (x << n) | z
            low = vec & (-vec)
            entry = pool.get(low)
            if entry is None:
                return 0.0
            ph += _phase_exponent((z, x), (entry[1], entry[2])) + 2 * entry[0]
            z ^= entry[1]
            x ^= entry[2]
        if ph & 1:
            raise AssertionError("imaginary phase for a Hermitian expectation")
        return -1.0 if (ph >> 1) & 1 else 1.0

    def overlap_magnitude(self, other: "StabilizerTableau") -> float:
        """|<phi_self|phi_other>|**2 for the normalized states; 0 if orthogonal.

        The overlap is 2^(k-n) with k the dimension of the group
        intersection, or 0 when some word belongs to both groups with
        opposite signs. The intersection basis is found by phase-free
        GF(2) reduction of the other group's generators (tracking which of
        them combine); each witness's sign is then evaluated inside each
        abelian group separately. Mixing the two groups in one signed
        reduction would be unsound: their elements need not commute, so an
        interleaved product can silently reorder past a sign flip.
        """
        if self.zero or other.zero:
            return 0.0
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        n = self.n
        signed_pool = self._signed_pool()
        vec_pool: Dict[int, int] = {}
        for _, z, x in self.rows:
            vec = (x << n) | z
            while vec:
                low = vec & (-vec)
                entry = vec_pool.get(low)
                if entry is None:
                    vec_pool[low] = vec
                    break
                vec ^= entry
        aux: Dict[int, Tuple[int, int]] = {}
        k = 0
        for j, row in enumerate(other.rows):
            vec = (row[2] << n) | row[1]
            comb = 1 << j
            while vec:
                low = vec & (-vec)
                if low in vec_pool:
                    vec ^= vec_pool[low]
                    continue
                entry = aux.get(low)
                if entry is None:
                    aux[low] = (vec, comb)
                    break
                vec ^= entry[0]
                comb ^= entry[1]
            if vec:
                continue
            # the generators in comb multiply to a word in both groups
            word = (0, 0, 0)
            c = comb
            while c:
                t = c & (-c)
                word = _word_mul(word, other.rows[t.bit_length() - 1])
                c ^= t
            while word[1] | word[2]:
                wv = (word[2] << n) | word[1]
                word = _word_mul(word, signed_pool[wv & (-wv)])
            if word[0]:
                return 0.0
            k += 1
        return 2.0 ** (k - n)

    def to_text(self) -> str:
        """One generator per line plus a trace-factor trailer."""
        if self.zero:
            return "g=0"
        lines = [
            pauli_to_text(PauliString(self.n, s, z, x)) for s, z, x in self.rows
        ]
        lines.append(f"g=2^-{self.m_exp}")
        return "\n".join(lines)


def _phase_exponent(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    """i-exponent of W(a) W(b) relative to W(a^b), mod 4 (signs excluded)."""
    z1, x1 = a
    z2, x2 = b
    z3 = z1 ^ z2
    x3 = x1 ^ x2
    return (
        -bin(z1 & x1).count("1")
        - bin(z2 & x2).count("1")
        + 2 * bin(x1 & z2).count("1")
        + bin(z3 & x3).count("1")
    ) % 4


def init_basis_state(n: int, bits: int = 0) -> StabilizerTableau:
    return StabilizerTableau.basis_state(n, bits)


def run_channel_sequence(
    bits: int, n: int, ops: Sequence[Tuple]
) -> Tuple[StabilizerTableau, float]:
    """Simulate an op sequence applied to |bits><bits|; returns (tableau, g)."""
    tab = StabilizerTableau.basis_state(n, bits)
    tab.apply_ops(ops)
    return tab, tab.g
