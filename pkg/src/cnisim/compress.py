"""Noise compression: merge basis channels that share a Z-block.

Only the Z-block of a propagated error survives the computational-basis
measurement, so channels with identical Z-blocks are interchangeable and
their quasi-probability coefficients can be summed.  Cancellations between
signed coefficients shrink the overhead: gamma' <= gamma, often strictly.

Two comparison routines implement the grouping test.  For products of
Clifford conjugations the forward images of the n generators Z_i decide
equality (conjugation is multiplicative on Pauli words).  With projectors
in play multiplicativity fails.  Probing the channel on the basis states
{0^n, e_1, .., e_n} and comparing echelon data looks sufficient (the
constraint rows D are input independent and their signs t affine in the
input) but is not: once a projector branch annihilates some inputs, the
nonzero set is an affine subspace the n + 1 probes cannot resolve, and
channels with different blocks collide (e.g. one that kills every basis
state versus one that kills all but |11>).  Instead the channel is run on
one half of a maximally entangled 2n-qubit pair: the output's outcome
distribution lists every block entry at once, |<c| K |b>|^2 / 2^n, so the
canonical signature (g, D, t) of that single state decides block equality
exactly, zero branches included, at the same polynomial cost.

Grouping is keyed (hash buckets) rather than pairwise; the pairwise scan is
kept as a cross-checkable reference.  Class representatives are first-seen,
output order is first-seen, so results are deterministic.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .noise import (
    BasisChannel,
    GlobalNoiseModel,
    QuasiProbDecomposition,
    invert_pauli_channel,
    propagate_error,
)
from .gf2 import gf2_nullspace_basis
from .pauli import CliffordCircuit, PauliString, conjugate_by_ops, pauli_multiply
from .tableau import StabilizerTableau

_TOL = 1e-14


# ---------------------------------------------------------------------------
# Z-block keys


def _rref_basis(vecs: Sequence[int]) -> List[int]:
    """Unique reduced echelon basis of the span, pivots at lowest set bits."""
    pool: Dict[int, int] = {}
    for v in vecs:
        while v:
            low = v & (-v)
            if low in pool:
                v ^= pool[low]
            else:
                pool[low] = v
                break
    for low in sorted(pool, reverse=True):
        for l2 in list(pool):
            if l2 != low and pool[l2] & low:
                pool[l2] ^= pool[low]
    return [pool[k] for k in sorted(pool)]


def z_block_key_clifford(b: BasisChannel) -> Tuple:
    """Complete Z-block invariant of a Clifford conjugation.

    The block has entry (u, w) = s(w) [u == L(w)] on the subspace V of
    Z-words whose images stay in the Z-group, and zero columns elsewhere;
    s and L are linear on V.  Equal generator images imply equal blocks but
    not conversely (images may leave the Z-group, zeroing the column for
    both channels), so the key is the triple list (v, L(v), s(v)) over the
    canonical basis of V.
    """
    if b.has_projector():
        raise ValueError("Clifford comparison cannot handle projectors")
    n = b.n
    if b.kind == "pauli":
        # Z_i maps to (-1)^{x_i} Z_i: V is everything, L the identity.
        return tuple((1 << i, 1 << i, (b.x_mask >> i) & 1) for i in range(n))
    imgs = [conjugate_by_ops(PauliString(n, 0, 1 << i, 0), b.ops) for i in range(n)]
    eqn_rows = []
    for r in range(n):
        row = 0
        for i, img in enumerate(imgs):
            row |= ((img.x_mask >> r) & 1) << i
        eqn_rows.append(row)
    kernel = _rref_basis(gf2_nullspace_basis(eqn_rows, n))
    out = []
    for v in kernel:
        word = None
        rest = v
        while rest:
            i = (rest & (-rest)).bit_length() - 1
            rest &= rest - 1
            if word is None:
                word = imgs[i]
            else:
                phase, word = pauli_multiply(word, imgs[i])
                if phase != 1:
                    raise AssertionError("images of commuting words anticommute")
        if word.x_mask:
            raise AssertionError("kernel vector image left the Z-group")
        out.append((v, word.z_mask, word.sign_bit))
    return tuple(out)


def z_block_key_general(b: BasisChannel) -> Tuple:
    """Canonical signature of the channel applied to half an entangled pair.

    With |Phi> = 2^{-n/2} sum_b |b>|b>, the state (K (x) I)|Phi> assigns
    outcome (c, b) the probability |<c| K |b>|^2 / 2^n, the full Z-block
    table, and z_block_signature is a complete invariant of that table.
    """
    n = b.n
    rows = [(0, 0, (1 << i) | (1 << (n + i))) for i in range(n)]
    rows += [(0, (1 << i) | (1 << (n + i)), 0) for i in range(n)]
    tab = StabilizerTableau(2 * n, rows)
    if b.kind == "pauli":
        if b.z_mask or b.x_mask:
            tab.apply_pauli(PauliString(2 * n, 0, b.z_mask, b.x_mask))
    else:
        tab.apply_ops(b.ops)
    return tab.z_block_signature()


def same_z_block_clifford(b1: BasisChannel, b2: BasisChannel, n: int = None) -> bool:
    if n is not None and (b1.n != n or b2.n != n):
        raise ValueError("width mismatch")
    return z_block_key_clifford(b1) == z_block_key_clifford(b2)


def same_z_block_general(b1: BasisChannel, b2: BasisChannel, n: int = None) -> bool:
    if n is not None and (b1.n != n or b2.n != n):
        raise ValueError("width mismatch")
    return z_block_key_general(b1) == z_block_key_general(b2)


def z_block_key(b: BasisChannel, clifford_only: bool) -> Tuple:
    return z_block_key_clifford(b) if clifford_only else z_block_key_general(b)


# ---------------------------------------------------------------------------
# compression of quasi-probability decompositions


def _propagated_terms(
    terms: Sequence[Tuple[BasisChannel, float]], context: Optional[CliffordCircuit]
) -> List[Tuple[BasisChannel, float]]:
    if context is None or not context.ops:
        return list(terms)
    return [(propagate_error(ch, context), q) for ch, q in terms]


def compress(
    d: QuasiProbDecomposition, context: Optional[CliffordCircuit] = None
) -> QuasiProbDecomposition:
    """Merge equal-Z-block terms; coefficients sum, representatives first-seen.

    context, when given, is the ideal circuit tail: terms are propagated to
    the measurement before grouping, matching where compression acts.
    """
    terms = _propagated_terms(d.terms, context)
    clifford_only = all(not ch.has_projector() for ch, _ in terms)
    classes: Dict[Tuple, List] = {}
    for ch, q in terms:
        key = z_block_key(ch, clifford_only)
        entry = classes.get(key)
        if entry is None:
            classes[key] = [ch, q]
        else:
            entry[1] += q
    out = tuple((ch, q) for ch, q in classes.values() if abs(q) > _TOL)
    return QuasiProbDecomposition(d.n, out)


def compress_pairwise(
    d: QuasiProbDecomposition, context: Optional[CliffordCircuit] = None
) -> QuasiProbDecomposition:
    """Reference implementation with the quadratic scan over representatives."""
    terms = _propagated_terms(d.terms, context)
    clifford_only = all(not ch.has_projector() for ch, _ in terms)
    same = same_z_block_clifford if clifford_only else same_z_block_general
    reps: List[BasisChannel] = []
    coeffs: List[float] = []
    for ch, q in terms:
        for i, rep in enumerate(reps):
            if same(rep, ch):
                coeffs[i] += q
                break
        else:
            reps.append(ch)
            coeffs.append(q)
    out = tuple((r, q) for r, q in zip(reps, coeffs) if abs(q) > _TOL)
    return QuasiProbDecomposition(d.n, out)


# ---------------------------------------------------------------------------
# compression of global models


def compress_global(m: GlobalNoiseModel) -> GlobalNoiseModel:
    """Merge signed probabilities per Z-block class and renormalize.

    The merged coefficients C' sum per class; the class matching the
    identity's Z-block becomes the faultless term, zero classes vanish.
    Rescaling by S = sum |C'| keeps stored probabilities a distribution
    while eta' = eta S preserves the channel.  On the geometric-series
    route the overhead is gamma' = 1 / (eta (|C'_I| - sum_t |C'_t|)),
    never above gamma; that route needs |C'_I| > sum_t |C'_t| and the
    merge raises when a non-Pauli or signed class structure leaves no
    other inversion.  Flip-mask models (every class a Pauli with a
    nonnegative coefficient) invert exactly instead, so only a zero
    Walsh eigenvalue of the merged outcome action is an error there.
    """
    n = m.n
    clifford_only = all(not ch.has_projector() for ch, _, _ in m.terms)
    id_key = z_block_key(BasisChannel.identity(n), clifford_only)
    classes: Dict[Tuple, List] = {id_key: [BasisChannel.identity(n), 0.0]}
    for ch, prob, sign in m.terms:
        key = z_block_key(ch, clifford_only)
        entry = classes.get(key)
        if entry is None:
            classes[key] = [ch, sign * prob]
        else:
            entry[1] += sign * prob
    c_id = classes.pop(id_key)[1]
    rest = [(ch, c) for ch, c in classes.values() if abs(c) > _TOL]
    spread = sum(abs(c) for _, c in rest)
    exact_route = c_id >= -_TOL and all(
        ch.kind == "pauli" and c > 0 for ch, c in rest
    )
    if exact_route:
        # flip-mask channels invert exactly, so the merged model only has to
        # keep every Walsh eigenvalue of its outcome action away from zero;
        # eta and the rescale are positive factors that cannot zero one out
        total = max(c_id, 0.0) + spread
        if total <= _TOL:
            raise ValueError("non-invertible after merge: channel vanishes")
        mask_probs: Dict[PauliString, float] = {}
        for ch, c in [(BasisChannel.identity(n), max(c_id, 0.0))] + rest:
            key = PauliString(n, 0, 0, ch.x_mask)
            mask_probs[key] = mask_probs.get(key, 0.0) + c / total
        try:
            invert_pauli_channel(mask_probs, n)
        except ValueError as err:
            raise ValueError(f"non-invertible after merge: {err}") from None
    else:
        if c_id <= _TOL:
            raise ValueError(
                "non-invertible after merge: identity class not positive"
            )
        if c_id - spread <= 0:
            raise ValueError("non-invertible after merge: Pr(I) <= Pr(N)")
    scale = c_id + spread
    terms: List[Tuple[BasisChannel, float, int]] = [
        (BasisChannel.identity(n), c_id / scale, 1)
    ]
    for ch, c in rest:
        terms.append((ch, abs(c) / scale, 1 if c > 0 else -1))
    return GlobalNoiseModel(n, m.eta * scale, tuple(terms))
