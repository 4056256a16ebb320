"""Signed Pauli strings and Clifford circuits.

An n-qubit signed Pauli is a (2n+1)-bit word (sign_bit, z_mask, x_mask)
encoding

    P = (-1)^sign_bit  *  prod_r (-i)^(z_r x_r) Z_r^(z_r) X_r^(x_r),

which is Hermitian by construction (the (-i) factor turns each ZX pair into
Y). Masks use qubit 1 as the least significant bit. Products of two such
words carry an extra phase in {1, i, -1, -i}; `pauli_multiply` returns it
separately so that callers multiplying commuting operators can fold the +-1
into the sign bit and assert that no +-i survives.

Circuits are lists of ("H", q), ("S", q), ("CNOT", c, t) ops with 0-based
qubit indices; the text format is 1-based with qubit 1 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

from .gf2 import parity

_LETTER = {(0, 0): "I", (1, 0): "Z", (0, 1): "X", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}

GateOp = Tuple  # ("H", q) | ("S", q) | ("CNOT", c, t)


class PauliString:
    """Mutable signed Pauli word."""

    __slots__ = ("n", "sign_bit", "z_mask", "x_mask")

    def __init__(self, n: int, sign_bit: int = 0, z_mask: int = 0, x_mask: int = 0):
        self.n = n
        self.sign_bit = sign_bit & 1
        self.z_mask = z_mask
        self.x_mask = x_mask

    def copy(self) -> "PauliString":
        return PauliString(self.n, self.sign_bit, self.z_mask, self.x_mask)

    def is_identity(self) -> bool:
        return self.z_mask == 0 and self.x_mask == 0 and self.sign_bit == 0

    def weight(self) -> int:
        return bin(self.z_mask | self.x_mask).count("1")

    def phase_free(self) -> Tuple[int, int]:
        return (self.z_mask, self.x_mask)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n == other.n
            and self.sign_bit == other.sign_bit
            and self.z_mask == other.z_mask
            and self.x_mask == other.x_mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.sign_bit, self.z_mask, self.x_mask))

    def __repr__(self) -> str:
        return f"PauliString({pauli_to_text(self)!r})"


def pauli_identity(n: int) -> PauliString:
    return PauliString(n)


def pauli_from_text(text: str, n: int | None = None) -> PauliString:
    """Parse "-XIZY" (sign prefix optional, qubit 1 leftmost)."""
    text = text.strip()
    sign = 0
    if text[:1] in "+-":
        sign = 1 if text[0] == "-" else 0
        text = text[1:]
    if n is not None and len(text) != n:
        raise ValueError(f"expected {n} qubits, got {len(text)!r} letters")
    z = x = 0
    for k, letter in enumerate(text):
        try:
            zb, xb = _BITS[letter]
        except KeyError:
            raise ValueError(f"bad Pauli letter {letter!r} in {text!r}") from None
        z |= zb << k
        x |= xb << k
    return PauliString(len(text), sign, z, x)


def pauli_to_text(p: PauliString) -> str:
    body = "".join(
        _LETTER[((p.z_mask >> k) & 1, (p.x_mask >> k) & 1)] for k in range(p.n)
    )
    return ("-" if p.sign_bit else "") + body


def pauli_multiply(a: PauliString, b: PauliString) -> Tuple[complex, PauliString]:
    """Product a*b as (phase, word).

    phase in {1, i, -i}; a real -1 prefactor is folded into the word's sign
    bit instead, so phase is +-i exactly when a and b anticommute on an odd
    number of sites... precisely: when the i-exponent of the product is odd.
    """
    if a.n != b.n:
        raise ValueError("qubit count mismatch")
    z3 = a.z_mask ^ b.z_mask
    x3 = a.x_mask ^ b.x_mask
    # i-exponent per qubit: -(z1x1) - (z2x2) + 2*(x1z2) + (z3x3)
    k = (
        -bin(a.z_mask & a.x_mask).count("1")
        - bin(b.z_mask & b.x_mask).count("1")
        + 2 * bin(a.x_mask & b.z_mask).count("1")
        + bin(z3 & x3).count("1")
        + 2 * (a.sign_bit ^ b.sign_bit)
    ) % 4
    if k == 0:
        return 1.0, PauliString(a.n, 0, z3, x3)
    if k == 2:
        return 1.0, PauliString(a.n, 1, z3, x3)
    return (1j if k == 1 else -1j), PauliString(a.n, 0, z3, x3)


def commutes(a: PauliString, b: PauliString) -> bool:
    """Symplectic inner product: true iff the operators commute."""
    return (parity(a.z_mask & b.x_mask) ^ parity(a.x_mask & b.z_mask)) == 0


def is_in_z_group(p: PauliString) -> bool:
    """Membership in the sign-free Z-type group {I, Z}^n."""
    return p.x_mask == 0 and p.sign_bit == 0


def gate_on_word(op: GateOp, s: int, z: int, x: int) -> Tuple[int, int, int]:
    """Apply one Clifford gate to a (sign, z, x) word by conjugation.

    Single shared implementation of the bit update rules; the CNOT sign rule
    is s ^= x_c z_t (x_t + z_c + 1), the unique choice consistent with the
    Hermitian (-i)^(zx) encoding (checked against dense conjugation).
    """
    kind = op[0]
    if kind == "H":
        m = 1 << op[1]
        zb, xb = z & m, x & m
        if zb and xb:
            s ^= 1
        z = (z & ~m) | xb
        x = (x & ~m) | zb
    elif kind == "S":
        m = 1 << op[1]
        if z & x & m:
            s ^= 1
        z ^= x & m
    elif kind == "CNOT":
        cm = 1 << op[1]
        tm = 1 << op[2]
        if (x & cm) and (z & tm) and (bool(x & tm) == bool(z & cm)):
            s ^= 1
        if z & tm:
            z ^= cm
        if x & cm:
            x ^= tm
    else:
        raise ValueError(f"unknown gate {kind!r}")
    return s, z, x


@dataclass
class CliffordCircuit:
    """Gate list over {H, S, CNOT}, applied left to right."""

    n: int
    ops: List[GateOp] = field(default_factory=list)

    def append(self, *op) -> None:
        self.ops.append(tuple(op))

    def __len__(self) -> int:
        return len(self.ops)

    def cnot_positions(self) -> List[int]:
        return [i for i, op in enumerate(self.ops) if op[0] == "CNOT"]

    def inverse(self) -> "CliffordCircuit":
        """Reverse the gate order; S is replaced by S^3 (H, CNOT self-inverse)."""
        inv: List[GateOp] = []
        for op in reversed(self.ops):
            if op[0] == "S":
                inv.extend([op, op, op])
            else:
                inv.append(op)
        return CliffordCircuit(self.n, inv)

    def to_text(self) -> str:
        lines = []
        for op in self.ops:
            if op[0] == "CNOT":
                lines.append(f"CNOT {op[1] + 1} {op[2] + 1}")
            else:
                lines.append(f"{op[0]} {op[1] + 1}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, n: int) -> "CliffordCircuit":
        ops: List[GateOp] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            name = parts[0].upper()
            args = [int(tok) - 1 for tok in parts[1:]]
            if any(q < 0 or q >= n for q in args):
                raise ValueError(f"qubit out of range in {raw!r}")
            if name in ("H", "S") and len(args) == 1:
                ops.append((name, args[0]))
            elif name == "CNOT" and len(args) == 2 and args[0] != args[1]:
                ops.append(("CNOT", args[0], args[1]))
            else:
                raise ValueError(f"bad circuit line {raw!r}")
        return cls(n, ops)

    def key(self) -> str:
        """Canonical text form; stable hash key for per-circuit caches."""
        return self.to_text()


def conjugate_by_circuit(p: PauliString, circuit: CliffordCircuit) -> PauliString:
    """Image U P U^dagger for the whole circuit U (first op acts first)."""
    s, z, x = p.sign_bit, p.z_mask, p.x_mask
    for op in circuit.ops:
        s, z, x = gate_on_word(op, s, z, x)
    return PauliString(p.n, s, z, x)


def conjugate_by_ops(p: PauliString, ops: Iterable[GateOp]) -> PauliString:
    s, z, x = p.sign_bit, p.z_mask, p.x_mask
    for op in ops:
        s, z, x = gate_on_word(op, s, z, x)
    return PauliString(p.n, s, z, x)
