"""Noise models and their quasi-probability inverses.

Two representations are used.  A QuasiProbDecomposition is an exact signed
mixture E^-1 = sum_B q_B [B] over classically simulable basis channels, with
sampling overhead gamma = sum_B |q_B|.  A GlobalNoiseModel is the
multiplicative form E = eta * (Pr(I) [I] + sum_B Pr(B) sgn(B) [B]) whose
inverse is never expanded: it is sampled term by term from the geometric
series via neumann_sample_inverse.

Basis channels are single-Kraus maps built from Clifford gates and the
projectors P0, P1, so every term can be pushed through a stabilizer run.
Pauli conjugations get a dedicated kind with bitmask storage; everything
else is an explicit op sequence.  A channel rho -> P rho P does not depend
on the sign of P, so channels store sign-free masks only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .pauli import (
    CliffordCircuit,
    PauliString,
    conjugate_by_ops,
    pauli_from_text,
    pauli_to_text,
)
from .ptm import (
    Ptm,
    _iter_pauli_map,
    index_to_masks,
    pauli_diag_signs,
    ptm_of_ops,
)
from .tableau import StabilizerTableau

# Geometric sampling of the series order l stops here; the branch has
# probability below 2^-64 for any invertible model we accept.
L_MAX = 64


# ---------------------------------------------------------------------------
# basis channels


@dataclass(frozen=True)
class BasisChannel:
    """One classically simulable channel: a Pauli conjugation or an op sequence.

    kind "pauli": rho -> P rho P with P the sign-free word (z_mask, x_mask).
    kind "ops":   rho -> K rho K^dag with K the ordered product of Clifford
                  gates and projectors in ops (stabilizer-engine op syntax).
    The identity is the pauli kind with both masks zero.
    """

    n: int
    kind: str = "pauli"
    z_mask: int = 0
    x_mask: int = 0
    ops: Tuple[tuple, ...] = ()

    def __post_init__(self):
        if self.kind not in ("pauli", "ops"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "pauli" and self.ops:
            raise ValueError("pauli kind takes masks, not ops")
        if self.kind == "ops" and (self.z_mask or self.x_mask):
            raise ValueError("ops kind takes ops, not masks")

    @classmethod
    def identity(cls, n: int) -> "BasisChannel":
        return cls(n)

    @classmethod
    def from_pauli(cls, p: PauliString) -> "BasisChannel":
        return cls(p.n, "pauli", p.z_mask, p.x_mask)

    @classmethod
    def from_ops(cls, n: int, ops: Sequence[tuple]) -> "BasisChannel":
        return cls(n, "ops", 0, 0, tuple(ops))

    def is_identity(self) -> bool:
        if self.kind == "pauli":
            return self.z_mask == 0 and self.x_mask == 0
        return not self.ops

    @property
    def support(self) -> frozenset:
        if self.kind == "pauli":
            bits = self.z_mask | self.x_mask
        else:
            bits = 0
            for op in self.ops:
                for q in op[1:]:
                    bits |= 1 << q
        return frozenset(q for q in range(self.n) if (bits >> q) & 1)

    def has_projector(self) -> bool:
        return self.kind == "ops" and any(op[0] in ("P0", "P1") for op in self.ops)

    def pauli(self) -> PauliString:
        if self.kind != "pauli":
            raise ValueError("not a Pauli conjugation")
        return PauliString(self.n, 0, self.z_mask, self.x_mask)

    def apply_to_tableau(self, tab: StabilizerTableau) -> None:
        if self.kind == "pauli":
            if self.z_mask or self.x_mask:
                tab.apply_pauli(self.pauli())
        else:
            tab.apply_ops(self.ops)

    def ptm(self) -> Ptm:
        if self.kind == "pauli":
            diag = pauli_diag_signs(self.n, self.z_mask, self.x_mask)
            return Ptm(self.n, np.diag(diag.astype(float)))
        return ptm_of_ops(self.n, self.ops)

    def label(self) -> str:
        if self.kind == "pauli":
            return pauli_to_text(self.pauli())
        return "; ".join(
            " ".join([op[0]] + [str(q + 1) for q in op[1:]]) for op in self.ops
        )


# ---------------------------------------------------------------------------
# quasi-probability decompositions


@dataclass(frozen=True)
class QuasiProbDecomposition:
    """Signed mixture sum_B q_B [B]; sampled with probability |q_B| / gamma."""

    n: int
    terms: Tuple[Tuple[BasisChannel, float], ...]

    def __post_init__(self):
        for ch, q in self.terms:
            if q == 0.0:
                raise ValueError("zero-coefficient term")
            if ch.n != self.n:
                raise ValueError("channel width mismatch")

    @cached_property
    def gamma(self) -> float:
        return float(sum(abs(q) for _, q in self.terms))

    @cached_property
    def probabilities(self) -> np.ndarray:
        return np.array([abs(q) for _, q in self.terms]) / self.gamma

    @cached_property
    def signs(self) -> Tuple[int, ...]:
        return tuple(1 if q > 0 else -1 for _, q in self.terms)

    @cached_property
    def _cum(self) -> np.ndarray:
        return np.cumsum(self.probabilities)

    def sample(self, rng) -> Tuple[int, BasisChannel]:
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        i = min(i, len(self.terms) - 1)
        return self.signs[i], self.terms[i][0]

    def ptm(self) -> Ptm:
        mat = sum(q * ch.ptm().mat for ch, q in self.terms)
        return Ptm(self.n, mat)


def make_decomposition(
    n: int, terms: Sequence[Tuple[BasisChannel, float]], tol: float = 1e-14
) -> QuasiProbDecomposition:
    """Drop numerically zero coefficients, keep order otherwise."""
    kept = tuple((ch, float(q)) for ch, q in terms if abs(q) > tol)
    return QuasiProbDecomposition(n, kept)


# ---------------------------------------------------------------------------
# noise model types


@dataclass(frozen=True)
class GateNoiseSpec:
    """Pauli noise attached to one gate: non-identity faults with probabilities.

    The remainder 1 - sum(prob) is the implicit identity outcome.
    """

    gate_index: int
    paulis: Tuple[Tuple[PauliString, float], ...]

    def __post_init__(self):
        total = 0.0
        for p, prob in self.paulis:
            if p.is_identity():
                raise ValueError("identity fault must stay implicit")
            if prob < 0:
                raise ValueError("negative fault probability")
            total += prob
        if total > 1 + 1e-12:
            raise ValueError("fault probabilities exceed 1")

    @classmethod
    def from_map(cls, gate_index: int, mapping: Mapping) -> "GateNoiseSpec":
        items = []
        for key, prob in mapping.items():
            p = pauli_from_text(key) if isinstance(key, str) else key
            if prob != 0.0:
                items.append((PauliString(p.n, 0, p.z_mask, p.x_mask), float(prob)))
        return cls(gate_index, tuple(items))

    @property
    def total_rate(self) -> float:
        return float(sum(prob for _, prob in self.paulis))


@dataclass(frozen=True)
class GlobalNoiseModel:
    """E = eta * sum_t Pr(t) sgn(t) [B_t], identity terms included in the sum."""

    n: int
    eta: float
    terms: Tuple[Tuple[BasisChannel, float, int], ...]

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        total = 0.0
        for ch, prob, sign in self.terms:
            if ch.n != self.n:
                raise ValueError("channel width mismatch")
            if prob < -1e-15:
                raise ValueError("negative probability")
            if sign not in (1, -1):
                raise ValueError("sign must be +-1")
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @cached_property
    def pr_identity(self) -> float:
        return float(sum(p for ch, p, _ in self.terms if ch.is_identity()))

    @cached_property
    def pr_noise(self) -> float:
        return 1.0 - self.pr_identity

    @cached_property
    def _noise_part(self) -> Tuple[Tuple[BasisChannel, ...], np.ndarray, np.ndarray]:
        chans = []
        probs = []
        signs = []
        for ch, p, s in self.terms:
            if not ch.is_identity() and p > 0:
                chans.append(ch)
                probs.append(p)
                signs.append(s)
        probs = np.array(probs, dtype=float)
        if probs.size:
            probs = probs / probs.sum()
        return tuple(chans), probs, np.array(signs, dtype=np.int64)

    @cached_property
    def identity_sign(self) -> int:
        for ch, p, s in self.terms:
            if ch.is_identity() and p > 0:
                return s
        return 1

    def ptm(self) -> Ptm:
        mat = sum(p * s * ch.ptm().mat for ch, p, s in self.terms)
        return Ptm(self.n, self.eta * np.asarray(mat, dtype=float))


def identity_model(n: int) -> GlobalNoiseModel:
    return GlobalNoiseModel(n, 1.0, ((BasisChannel.identity(n), 1.0, 1),))


# ---------------------------------------------------------------------------
# Pauli-channel inversion (Walsh-Hadamard over the commutation table)


def _map_width(probs: Mapping) -> int:
    for key in probs:
        return key.n if isinstance(key, PauliString) else len(key.lstrip("+-"))
    raise ValueError("empty Pauli map")


def _fwht(vec: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh transform: out[a] = sum_v vec[v] (-1)^popcount(a & v)."""
    out = np.array(vec, dtype=float)
    m = out.size
    h = 1
    while h < m:
        out = out.reshape(-1, 2, h)
        top = out[:, 0, :] + out[:, 1, :]
        bot = out[:, 0, :] - out[:, 1, :]
        out = np.stack((top, bot), axis=1)
        h *= 2
    return out.reshape(m)


def _gf2_span_coords(words: Sequence[int]) -> Tuple[List[int], List[int]]:
    """Reduced GF(2) basis of span(words) and each word's coordinates in it."""
    basis: List[int] = []
    pivots: List[int] = []
    for w in words:
        cur = w
        for b, pv in zip(basis, pivots):
            if (cur >> pv) & 1:
                cur ^= b
        if cur:
            pv = cur.bit_length() - 1
            # keep every basis vector clear at every other pivot
            basis = [b ^ cur if (b >> pv) & 1 else b for b in basis]
            basis.append(cur)
            pivots.append(pv)
    coords = []
    for w in words:
        cur = w
        c = 0
        for i, (b, pv) in enumerate(zip(basis, pivots)):
            if (cur >> pv) & 1:
                cur ^= b
                c |= 1 << i
        coords.append(c)
    return basis, coords


def invert_pauli_channel(probs: Mapping, n: int = None) -> QuasiProbDecomposition:
    """Exact inverse of a Pauli channel as a signed Pauli-conjugation mixture.

    The channel PTM is diagonal with eigenvalues
        lam_sigma = sum_P p_P (-1)^{<sigma, P>},
    which depend on sigma only through its commutation pattern with the group
    generated by the fault words, so the inverse diagonal 1/lam re-expands
    over that group by a Walsh-Hadamard transform of size 2^rank.  Raises on
    a zero eigenvalue (e.g. bit-flip at p = 1/2).
    """
    if n is None:
        n = _map_width(probs)
    items = _iter_pauli_map(n, probs)
    total = sum(p for _, p in items)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"channel probabilities sum to {total}, not 1")
    if any(p < -1e-15 for _, p in items):
        raise ValueError("negative channel probability")

    words = [p.z_mask | (p.x_mask << n) for p, _ in items]
    basis, coords = _gf2_span_coords(words)
    r = len(basis)
    if r > 20:
        raise ValueError("fault-word rank too large for exact inversion")
    dim = 1 << r
    weights = np.zeros(dim)
    for c, (_, prob) in zip(coords, items):
        weights[c] += prob
    lam = _fwht(weights)
    if np.min(np.abs(lam)) < 1e-12:
        raise ValueError("singular channel: zero PTM eigenvalue")
    coeff = _fwht(1.0 / lam) / dim

    group = [0] * dim
    for i, b in enumerate(basis):
        step = 1 << i
        for v in range(step):
            group[v | step] = group[v] ^ b

    zmask = (1 << n) - 1
    keyed: List[Tuple[int, BasisChannel, float]] = []
    for v in range(dim):
        q = float(coeff[v])
        if abs(q) <= 1e-14:
            continue
        z, x = group[v] & zmask, group[v] >> n
        key = 0
        for qb in range(n):
            key |= ((z >> qb) & 1) << (2 * qb)
            key |= ((x >> qb) & 1) << (2 * qb + 1)
        keyed.append((key, BasisChannel(n, "pauli", z, x), q))
    # identity first, then ascending word index
    keyed.sort(key=lambda t: t[0])
    return QuasiProbDecomposition(n, tuple((ch, q) for _, ch, q in keyed))


# ---------------------------------------------------------------------------
# propagation and first-order truncation


def propagate_error(b: BasisChannel, downstream: CliffordCircuit) -> BasisChannel:
    """Conjugate a channel to the measurement end: B -> U_tail B U_tail^dag."""
    if b.n != downstream.n:
        raise ValueError("width mismatch")
    if b.kind == "pauli":
        if b.is_identity() or not downstream.ops:
            return b
        img = conjugate_by_ops(b.pauli(), downstream.ops)
        return BasisChannel(b.n, "pauli", img.z_mask, img.x_mask)
    inv = downstream.inverse().ops
    return BasisChannel.from_ops(b.n, tuple(inv) + b.ops + tuple(downstream.ops))


def truncate_gatewise(
    specs: Sequence[GateNoiseSpec], circuit: CliffordCircuit
) -> GlobalNoiseModel:
    """First-order model: faultless term plus one propagated fault per term.

    E = (1 - sum_i p_i) [I] + sum_i p_i [U_tail,i P U_tail,i^dag], eta = 1.
    """
    n = circuit.n
    terms: List[Tuple[BasisChannel, float, int]] = []
    total = 0.0
    for spec in specs:
        if not 0 <= spec.gate_index < len(circuit.ops):
            raise ValueError("gate index outside circuit")
        tail = circuit.ops[spec.gate_index + 1 :]
        for p, prob in spec.paulis:
            if prob == 0.0:
                continue
            img = conjugate_by_ops(p, tail) if tail else p
            terms.append((BasisChannel(n, "pauli", img.z_mask, img.x_mask), prob, 1))
            total += prob
    if total >= 1.0:
        raise ValueError(f"total first-order rate {total} >= 1")
    out = [(BasisChannel.identity(n), 1.0 - total, 1)]
    out.extend(terms)
    return GlobalNoiseModel(n, 1.0, tuple(out))


# ---------------------------------------------------------------------------
# geometric (Neumann) inverse sampling


def neumann_sample_inverse(m: GlobalNoiseModel, rng) -> Tuple[float, Tuple[BasisChannel, ...]]:
    """One draw of the series inverse: (weight, channels to apply in order).

    l is geometric with ratio q = Pr(N)/Pr(I); the channels are l independent
    draws from Pr(B)/Pr(N); weight = (-1)^l prod sgn / (eta (Pr(I) - Pr(N))).
    E[weight * composition] = E^-1, and |weight| is the constant gamma.
    """
    pr_i, pr_n = m.pr_identity, m.pr_noise
    if pr_i <= pr_n:
        raise ValueError("non-invertible model: Pr(I) <= Pr(N)")
    denom = m.eta * (pr_i - pr_n)
    ratio = pr_n / pr_i
    if ratio == 0.0:
        return 1.0 / denom, ()
    u = rng.random()
    l = int(math.log1p(-u) / math.log(ratio))
    if l > L_MAX:
        raise RuntimeError(f"series order {l} exceeds cap {L_MAX}")
    if l == 0:
        return 1.0 / denom, ()
    chans, probs, signs = m._noise_part
    idx = rng.choice(len(chans), size=l, p=probs)
    sign = 1
    for i in idx:
        sign *= int(signs[i])
    weight = ((-1.0) ** l) * sign / denom
    return weight, tuple(chans[i] for i in idx)


def gamma_of(d: Union[QuasiProbDecomposition, GlobalNoiseModel]) -> float:
    """Sampling overhead: sum |q| for mixtures, the series prefactor otherwise."""
    if isinstance(d, QuasiProbDecomposition):
        return d.gamma
    if isinstance(d, GlobalNoiseModel):
        denom = d.eta * (d.pr_identity - d.pr_noise)
        if denom <= 0:
            raise ValueError("non-invertible model: Pr(I) <= Pr(N)")
        return 1.0 / denom
    raise TypeError(f"no overhead defined for {type(d).__name__}")


# ---------------------------------------------------------------------------
# generic (non-Pauli) inversion over the universal basis


@lru_cache(maxsize=None)
def universal_basis_channels(n: int) -> Tuple[BasisChannel, ...]:
    """A spanning set of 16^n simulable channels, tensor powers of a 1-qubit set.

    The 1-qubit set is chosen greedily from Pauli conjugations, Clifford
    conjugations, and rank-one maps C_u P0 C_v^dag built from projectors;
    the rank-one maps alone already span, the earlier entries keep common
    decompositions sparse.  Deterministic order.
    """
    if n < 1 or n > 3:
        raise ValueError("universal basis built for 1 <= n <= 3 only")
    singles = _single_qubit_basis()
    if n == 1:
        return tuple(BasisChannel.from_ops(1, ops) if ops or kind == "ops" else BasisChannel(1, "pauli", z, x)
                     for kind, z, x, ops in singles)
    out = []
    for combo in range(16**n):
        ops: List[tuple] = []
        rest = combo
        for q in range(n):
            kind, z, x, base_ops = singles[rest % 16]
            rest //= 16
            if kind == "pauli":
                if z or x:
                    word = PauliString(1, 0, z, x)
                    ops.extend(_pauli_ops(word, q))
            else:
                ops.extend(_shift_ops(base_ops, q))
        out.append(BasisChannel.from_ops(n, tuple(ops)))
    return tuple(out)


def _shift_ops(ops: Sequence[tuple], offset: int) -> List[tuple]:
    return [(op[0],) + tuple(q + offset for q in op[1:]) for op in ops]


def _pauli_ops(p: PauliString, offset: int) -> List[tuple]:
    """Gate realization of a 1-qubit Pauli conjugation: Z = S S, X = H Z H."""
    z = p.z_mask & 1
    x = p.x_mask & 1
    ops: List[tuple] = []
    if x:
        ops += [("H", offset), ("S", offset), ("S", offset), ("H", offset)]
    if z:
        ops += [("S", offset), ("S", offset)]
    return ops


@lru_cache(maxsize=None)
def _single_qubit_basis() -> Tuple[Tuple[str, int, int, Tuple[tuple, ...]], ...]:
    """16 independent 1-qubit channels as (kind, z, x, ops) records."""
    # stabilizer states as circuits C with C|0> = |state|
    preps = {
        "0": (),
        "1": (("H", 0), ("S", 0), ("S", 0), ("H", 0)),  # X|0>
        "+": (("H", 0),),
        "-": (("H", 0), ("S", 0), ("S", 0)),  # Z H? no: S S after H gives Z|+> = |->
        "i": (("H", 0), ("S", 0)),
        "j": (("H", 0), ("S", 0), ("S", 0), ("S", 0)),  # S^dag |+> = |-i>
    }
    candidates: List[Tuple[str, int, int, Tuple[tuple, ...]]] = []
    candidates.append(("pauli", 0, 0, ()))  # identity
    candidates.append(("pauli", 0, 1, ()))  # X
    candidates.append(("pauli", 1, 1, ()))  # Y
    candidates.append(("pauli", 1, 0, ()))  # Z
    candidates.append(("ops", 0, 0, (("H", 0),)))
    candidates.append(("ops", 0, 0, (("S", 0),)))
    candidates.append(("ops", 0, 0, (("S", 0), ("H", 0))))
    candidates.append(("ops", 0, 0, (("H", 0), ("S", 0))))
    for u in ("0", "1", "+", "-", "i", "j"):
        for v in ("0", "1", "+", "-", "i", "j"):
            inv_v = CliffordCircuit(1, list(preps[v])).inverse().ops
            ops = tuple(inv_v) + (("P0", 0),) + tuple(preps[u])
            candidates.append(("ops", 0, 0, ops))

    picked: List[Tuple[str, int, int, Tuple[tuple, ...]]] = []
    rows: List[np.ndarray] = []
    rank = 0
    for cand in candidates:
        kind, z, x, ops = cand
        ch = (
            BasisChannel(1, "pauli", z, x)
            if kind == "pauli"
            else BasisChannel.from_ops(1, ops)
        )
        vec = ch.ptm().mat.reshape(-1)
        trial = np.vstack(rows + [vec]) if rows else vec[None, :]
        r = np.linalg.matrix_rank(trial, tol=1e-9)
        if r > rank:
            picked.append(cand)
            rows.append(vec)
            rank = r
        if rank == 16:
            break
    if rank != 16:
        raise RuntimeError("1-qubit basis set failed to span")
    return tuple(picked)


def invert_channel_dense(e: Ptm, tol: float = 1e-8) -> QuasiProbDecomposition:
    """Invert a general channel by a linear solve over the universal basis.

    Only for small supports: the basis has 16^n members.  Raises when the
    PTM is singular or the solve does not reproduce the inverse.
    """
    n = e.n
    basis = universal_basis_channels(n)
    try:
        target = np.linalg.inv(e.mat).reshape(-1)
    except np.linalg.LinAlgError as err:
        raise ValueError("channel PTM is singular") from err
    mat = np.column_stack([ch.ptm().mat.reshape(-1) for ch in basis])
    q = np.linalg.solve(mat, target)
    resid = float(np.max(np.abs(mat @ q - target)))
    if resid > tol:
        raise ValueError(f"basis solve residual {resid} above {tol}")
    terms = [(basis[i], float(q[i])) for i in range(len(basis)) if abs(q[i]) > 1e-12]
    return QuasiProbDecomposition(n, tuple(terms))


# ---------------------------------------------------------------------------
# standard model builders


def bitflip_gate_specs(circuit: CliffordCircuit, p: float) -> List[GateNoiseSpec]:
    """XX with probability p after every CNOT."""
    out = []
    for i, op in enumerate(circuit.ops):
        if op[0] == "CNOT":
            mask = (1 << op[1]) | (1 << op[2])
            fault = PauliString(circuit.n, 0, 0, mask)
            out.append(GateNoiseSpec(i, ((fault, p),)))
    return out


def depolarizing_gate_specs(circuit: CliffordCircuit, p: float) -> List[GateNoiseSpec]:
    """Two-qubit depolarizing after every CNOT: 15 faults each p/15."""
    out = []
    for i, op in enumerate(circuit.ops):
        if op[0] == "CNOT":
            c, t = op[1], op[2]
            faults = []
            for idx in range(1, 16):
                zc, xc = idx & 1, (idx >> 1) & 1
                zt, xt = (idx >> 2) & 1, (idx >> 3) & 1
                z = (zc << c) | (zt << t)
                x = (xc << c) | (xt << t)
                faults.append((PauliString(circuit.n, 0, z, x), p / 15.0))
            out.append(GateNoiseSpec(i, tuple(faults)))
    return out


def uniform_depolarizing_model(n: int, p: float) -> GlobalNoiseModel:
    """Gate-independent global depolarizing: every non-identity word p/(4^n - 1)."""
    if not 0 <= p < 1:
        raise ValueError("rate outside [0, 1)")
    terms: List[Tuple[BasisChannel, float, int]] = [
        (BasisChannel.identity(n), 1.0 - p, 1)
    ]
    share = p / (4**n - 1)
    for idx in range(1, 4**n):
        z, x = index_to_masks(idx, n)
        terms.append((BasisChannel(n, "pauli", z, x), share, 1))
    return GlobalNoiseModel(n, 1.0, tuple(terms))


# ---------------------------------------------------------------------------
# JSON noise format


def noise_to_json(obj: Union[GlobalNoiseModel, Sequence[GateNoiseSpec]]) -> dict:
    """{eta, terms:[{pauli, prob, sign}]} or {gate_specs:[{index, paulis}]}."""
    if isinstance(obj, GlobalNoiseModel):
        terms = []
        for ch, prob, sign in obj.terms:
            if ch.kind != "pauli":
                raise ValueError("JSON format holds Pauli terms only")
            terms.append(
                {"pauli": pauli_to_text(ch.pauli()), "prob": prob, "sign": sign}
            )
        return {"eta": obj.eta, "terms": terms}
    specs = []
    for spec in obj:
        paulis = {pauli_to_text(p): prob for p, prob in spec.paulis}
        specs.append({"index": spec.gate_index, "paulis": paulis})
    return {"gate_specs": specs}


def noise_from_json(data: Mapping) -> Union[GlobalNoiseModel, List[GateNoiseSpec]]:
    if "gate_specs" in data and data["gate_specs"] is not None:
        specs = []
        for rec in data["gate_specs"]:
            specs.append(GateNoiseSpec.from_map(int(rec["index"]), rec["paulis"]))
        return specs
    if "terms" not in data or not data["terms"]:
        raise ValueError("noise JSON needs 'terms' or 'gate_specs'")
    eta = float(data.get("eta", 1.0))
    terms = []
    n = None
    for rec in data["terms"]:
        p = pauli_from_text(rec["pauli"])
        n = p.n if n is None else n
        if p.n != n:
            raise ValueError("inconsistent Pauli widths")
        ch = BasisChannel(n, "pauli", p.z_mask, p.x_mask)
        terms.append((ch, float(rec["prob"]), int(rec.get("sign", 1))))
    return GlobalNoiseModel(n, eta, tuple(terms))
