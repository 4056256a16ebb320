"""Dense Pauli transfer matrices, built from explicit complex matrix algebra.

Everything here is deliberately independent of the bit-twiddling rules in
`pauli` and `tableau`: unitaries and Kraus operators are materialized as
2**n x 2**n complex arrays and transfer matrices as 4**n x 4**n reals, so
this module can serve as the ground-truth oracle the fast paths are checked
against. Intended for small n (<= 5).

Conventions. Basis index = sum_q digit_q * 4**q with digits I=0, Z=1, X=2,
Y=3, i.e. digit_q = z_q + 2 x_q and qubit 1 in the least significant digit.
Vectors live in the normalized basis sigma_a = P_a / sqrt(2**n): a state rho
has coeffs v_a = Tr(sigma_a rho) (so v_I = Tr(rho)/sqrt(2**n)), an observable
F has w_a = Tr(sigma_a F), and Tr(F rho) = w . v. A channel E has
mat[a, b] = Tr(sigma_a E(sigma_b)), so coefficient vectors transform as
v -> mat @ v and composition is matrix multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .gf2 import parity
from .pauli import (
    CliffordCircuit,
    PauliString,
    conjugate_by_circuit,
    pauli_from_text,
)

_I2 = np.eye(2, dtype=complex)
_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S2 = np.array([[1, 0], [0, 1j]], dtype=complex)

_SINGLE = {(0, 0): _I2, (1, 0): _Z2, (0, 1): _X2, (1, 1): _Y2}


@dataclass(frozen=True)
class Ptm:
    """Real transfer matrix of a linear map on n qubits."""

    n: int
    mat: np.ndarray

    def compose(self, first: "Ptm") -> "Ptm":
        """self after first."""
        if self.n != first.n:
            raise ValueError("dimension mismatch")
        return Ptm(self.n, self.mat @ first.mat)

    def apply(self, v: "PauliVector") -> "PauliVector":
        if self.n != v.n:
            raise ValueError("dimension mismatch")
        return PauliVector(v.n, self.mat @ v.coeffs)


@dataclass(frozen=True)
class PauliVector:
    """Coefficients over the normalized Pauli basis."""

    n: int
    coeffs: np.ndarray

    def dot(self, other: "PauliVector") -> float:
        return float(self.coeffs @ other.coeffs)

    def to_density_matrix(self) -> np.ndarray:
        """Dense matrix sum_a v_a P_a / sqrt(2**n)."""
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        root = np.sqrt(dim)
        for idx, c in enumerate(self.coeffs):
            if c != 0.0:
                z, x = index_to_masks(idx, self.n)
                out += (c / root) * pauli_dense(self.n, z, x)
        return out


def compose(e2: Ptm, e1: Ptm) -> Ptm:
    return e2.compose(e1)


def apply_ptm(e: Ptm, v: PauliVector) -> PauliVector:
    return e.apply(v)


def pauli_index(z: int, x: int) -> int:
    """Basis index of the word with the given masks."""
    idx = 0
    q = 0
    while z or x:
        idx += ((z & 1) + 2 * (x & 1)) << (2 * q)
        z >>= 1
        x >>= 1
        q += 1
    return idx


def index_to_masks(idx: int, n: int) -> Tuple[int, int]:
    z = x = 0
    for q in range(n):
        digit = (idx >> (2 * q)) & 3
        z |= (digit & 1) << q
        x |= (digit >> 1) << q
    return z, x


def pauli_dense(n: int, z: int, x: int, sign: int = 0) -> np.ndarray:
    """Dense matrix of the Hermitian word (-1)^sign W(z, x)."""
    mat = np.array([[1.0 + 0.0j]])
    for q in range(n - 1, -1, -1):
        mat = np.kron(mat, _SINGLE[((z >> q) & 1, (x >> q) & 1)])
    return -mat if sign & 1 else mat


def _embed_single(n: int, q: int, a: np.ndarray) -> np.ndarray:
    left = np.eye(1 << (n - 1 - q), dtype=complex)
    right = np.eye(1 << q, dtype=complex)
    return np.kron(np.kron(left, a), right)


def _cnot_matrix(n: int, c: int, t: int) -> np.ndarray:
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        mat[b ^ (((b >> c) & 1) << t), b] = 1.0
    return mat


def _projector_matrix(n: int, q: int, outcome: int) -> np.ndarray:
    dim = 1 << n
    diag = np.array(
        [1.0 if ((b >> q) & 1) == outcome else 0.0 for b in range(dim)]
    )
    return np.diag(diag).astype(complex)


def op_matrix(n: int, op: Tuple) -> np.ndarray:
    kind = op[0]
    if kind == "H":
        return _embed_single(n, op[1], _H2)
    if kind == "S":
        return _embed_single(n, op[1], _S2)
    if kind == "CNOT":
        return _cnot_matrix(n, op[1], op[2])
    if kind == "P0":
        return _projector_matrix(n, op[1], 0)
    if kind == "P1":
        return _projector_matrix(n, op[1], 1)
    raise ValueError(f"unknown op {op!r}")


def ops_kraus(n: int, ops: Sequence[Tuple]) -> np.ndarray:
    """Single Kraus operator of a gate/projector sequence (first op acts first)."""
    k = np.eye(1 << n, dtype=complex)
    for op in ops:
        k = op_matrix(n, op) @ k
    return k


def circuit_unitary(circuit: CliffordCircuit) -> np.ndarray:
    return ops_kraus(circuit.n, circuit.ops)


def dense_run_ops(n: int, bits: int, ops: Sequence[Tuple]) -> np.ndarray:
    """Dense density-matrix simulation of an op sequence on |bits><bits|."""
    k = ops_kraus(n, ops)
    col = k[:, bits]
    return np.outer(col, col.conj())


def _basis_tensor(n: int) -> np.ndarray:
    words = np.empty((1 << (2 * n), 1 << n, 1 << n), dtype=complex)
    for idx in range(1 << (2 * n)):
        z, x = index_to_masks(idx, n)
        words[idx] = pauli_dense(n, z, x)
    return words


def ptm_from_kraus(n: int, kraus: np.ndarray) -> Ptm:
    """Transfer matrix of rho -> K rho K^dagger."""
    dim = 1 << n
    basis = _basis_tensor(n)
    flat = basis.reshape(dim * dim, dim * dim)
    out = np.empty((dim * dim, dim * dim))
    kd = kraus.conj().T
    for b in range(dim * dim):
        image = kraus @ basis[b] @ kd
        # Tr(P_a M) = sum_ij P_a[i,j] M[j,i]; the normalization cancels
        out[:, b] = (flat @ image.T.reshape(-1)).real / dim
    return Ptm(n, out)


def ptm_of_ops(n: int, ops: Sequence[Tuple]) -> Ptm:
    return ptm_from_kraus(n, ops_kraus(n, ops))


def ptm_of_unitary(circuit: CliffordCircuit) -> Ptm:
    """Dense transfer matrix of a Clifford circuit (n <= 5)."""
    if circuit.n > 5:
        raise ValueError("dense transfer matrices are capped at n = 5")
    return ptm_of_ops(circuit.n, circuit.ops)


def ptm_of_clifford_conjugation(circuit: CliffordCircuit) -> Ptm:
    """Signed permutation matrix from the bit-rule conjugation path.

    Same object as ptm_of_unitary but computed entirely through the word
    update rules, so comparing the two exercises every rule.
    """
    n = circuit.n
    dim = 1 << (2 * n)
    out = np.zeros((dim, dim))
    for b in range(dim):
        z, x = index_to_masks(b, n)
        img = conjugate_by_circuit(PauliString(n, 0, z, x), circuit)
        out[pauli_index(img.z_mask, img.x_mask), b] = -1.0 if img.sign_bit else 1.0
    return Ptm(n, out)


PauliMap = Union[
    Mapping[Union[str, PauliString], float],
    Iterable[Tuple[PauliString, float]],
]


def _iter_pauli_map(n: int, probs: PauliMap) -> List[Tuple[PauliString, float]]:
    items = probs.items() if isinstance(probs, Mapping) else probs
    out = []
    for key, coeff in items:
        p = pauli_from_text(key, n) if isinstance(key, str) else key
        out.append((p, float(coeff)))
    return out


def ptm_of_pauli_channel(n: int, probs: PauliMap) -> Ptm:
    """Diagonal transfer matrix of A -> sum_P c_P P A P."""
    diag = np.zeros(1 << (2 * n))
    for p, coeff in _iter_pauli_map(n, probs):
        diag += coeff * pauli_diag_signs(n, p.z_mask, p.x_mask)
    return Ptm(n, np.diag(diag))


def pauli_diag_signs(n: int, z: int, x: int) -> np.ndarray:
    """Diagonal of the transfer matrix of A -> P A P, entries +-1."""
    signs = np.empty(1 << (2 * n))
    for idx in range(1 << (2 * n)):
        za, xa = index_to_masks(idx, n)
        anti = parity(za & x) ^ parity(xa & z)
        signs[idx] = -1.0 if anti else 1.0
    return signs


def z_indices(n: int) -> List[int]:
    """Indices of Z-type words, ordered by z mask."""
    return [pauli_index(z, 0) for z in range(1 << n)]


def _z_mask_vector(n: int) -> np.ndarray:
    mask = np.zeros(1 << (2 * n), dtype=bool)
    mask[z_indices(n)] = True
    return mask


def measurement_channel(n: int) -> Ptm:
    """Completely dephasing channel: projection onto the Z-type span."""
    return Ptm(n, np.diag(_z_mask_vector(n).astype(float)))


def z_block(e: Ptm) -> np.ndarray:
    idx = z_indices(e.n)
    return e.mat[np.ix_(idx, idx)]


def check_propagable(e: Ptm, tol: float = 1e-10) -> bool:
    """True iff Z-type rows have no support on non-Z columns (upper-right 0)."""
    mask = _z_mask_vector(e.n)
    off = e.mat[np.ix_(mask, ~mask)]
    return off.size == 0 or float(np.max(np.abs(off))) <= tol


def propagate_through_measurement(e: Ptm) -> Ptm:
    """Block-diagonal surrogate E' with E' M_Z = M_Z E.

    Keeps the Z-Z block and the non-Z diagonal block, zeroing both
    off-diagonal blocks (the free blocks are set to A = 0, B = E_11).
    """
    if not check_propagable(e):
        raise ValueError("channel does not propagate through measurement")
    mask = _z_mask_vector(e.n)
    out = np.zeros_like(e.mat)
    out[np.ix_(mask, mask)] = e.mat[np.ix_(mask, mask)]
    out[np.ix_(~mask, ~mask)] = e.mat[np.ix_(~mask, ~mask)]
    return Ptm(e.n, out)


def _twirl_keep_mask(n: int, which: str) -> np.ndarray:
    dim = 1 << (2 * n)
    keep = np.zeros((dim, dim), dtype=bool)
    if which == "pauli":
        np.fill_diagonal(keep, True)
        return keep
    if which != "z":
        raise ValueError(f"unknown twirl set {which!r}")
    xs = np.array([index_to_masks(i, n)[1] for i in range(dim)])
    return xs[:, None] == xs[None, :]


def twirl_exact(e: Ptm, which: str) -> Ptm:
    """Exact twirl: 'z' keeps entries with sigma sigma' Z-type, 'pauli' the diagonal."""
    return Ptm(e.n, np.where(_twirl_keep_mask(e.n, which), e.mat, 0.0))


def twirl_set(n: int, which: str) -> List[PauliString]:
    """The Pauli set averaged over by the corresponding twirl."""
    if which == "z":
        return [PauliString(n, 0, z, 0) for z in range(1 << n)]
    if which == "pauli":
        return [
            PauliString(n, 0, *index_to_masks(idx, n))
            for idx in range(1 << (2 * n))
        ]
    raise ValueError(f"unknown twirl set {which!r}")


def twirl_average(e: Ptm, paulis: Sequence[PauliString]) -> Ptm:
    """Average of P . E . P over an explicit set.

    Sign patterns are accumulated as integers, so cancellations are exact;
    agreement with twirl_exact is a tested identity, not an assumption.
    """
    weight = np.zeros(e.mat.shape, dtype=np.int64)
    for p in paulis:
        s = pauli_diag_signs(e.n, p.z_mask, p.x_mask).astype(np.int64)
        weight += np.outer(s, s)
    return Ptm(e.n, e.mat * (weight / len(paulis)))


def twirl_sampled(e: Ptm, k: int, rng, which: str = "z") -> Ptm:
    """Monte Carlo twirl over k uniform draws from the set."""
    paulis = twirl_set(e.n, which)
    acc = np.zeros_like(e.mat)
    for _ in range(k):
        p = paulis[int(rng.integers(len(paulis)))]
        s = pauli_diag_signs(e.n, p.z_mask, p.x_mask)
        acc += np.outer(s, s) * e.mat
    return Ptm(e.n, acc / k)


def basis_state_vector(n: int, bits: int) -> PauliVector:
    """Coefficient vector of |bits><bits| in the normalized basis."""
    v = np.zeros(1 << (2 * n))
    root = np.sqrt(float(1 << n))
    for z in range(1 << n):
        v[pauli_index(z, 0)] = (-1.0 if parity(z & bits) else 1.0) / root
    return PauliVector(n, v)


def diagonal_observable_vector(n: int, fvals: Sequence[float]) -> PauliVector:
    """w with Tr(F rho) = w . v(rho) for F = diag(fvals)."""
    dim = 1 << n
    root = np.sqrt(float(dim))
    w = np.zeros(dim * dim)
    for z in range(dim):
        acc = 0.0
        for c in range(dim):
            acc += fvals[c] * (-1.0 if parity(z & c) else 1.0)
        w[pauli_index(z, 0)] = acc / root
    return PauliVector(n, w)


def tableau_to_pauli_vector(tab) -> PauliVector:
    """Coefficient vector of the subnormalized state a tableau represents."""
    n = tab.n
    v = np.zeros(1 << (2 * n))
    if tab.zero:
        return PauliVector(n, v)
    # |phi><phi| = 2^-n sum over the full group; enumerate by subset products
    from .tableau import _word_mul

    scale = tab.g / np.sqrt(float(1 << n))
    words = [(0, 0, 0)]
    for row in tab.rows:
        words += [_word_mul(w, row) for w in words]
    for s, z, x in words:
        v[pauli_index(z, x)] = -scale if s else scale
    return PauliVector(n, v)


def tableau_to_density_matrix(tab) -> np.ndarray:
    """Dense g * |phi><phi| reconstructed from the generators."""
    n = tab.n
    dim = 1 << n
    if tab.zero:
        return np.zeros((dim, dim), dtype=complex)
    from .tableau import _word_mul

    words = [(0, 0, 0)]
    for row in tab.rows:
        words += [_word_mul(w, row) for w in words]
    out = np.zeros((dim, dim), dtype=complex)
    for s, z, x in words:
        out += pauli_dense(n, z, x, s)
    return out * (tab.g / dim)
