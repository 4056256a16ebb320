"""Random-Clifford shadows and the three noise-handling estimation routes.

A classical shadow is the snapshot M^-1 U^dagger(|b><b|) built from one
random unitary U and one measured outcome b; averaging Tr(rho_t snapshot)
over rounds estimates fidelity-type observables.  Under circuit noise the
raw snapshot is biased, and this module implements three repairs:

  * post-processing inversion (run_cni_shadow): per circuit U the
    measurement-propagated noise is inverted through its compressed
    quasi-probability decomposition; each shot is corrected by L signed
    channel draws applied to the outcome before the ideal inversion M^-1.
  * calibrated inversion (run_srse): the noisy measurement channel is
    modelled as the depolarizing map r I + (1-r) D, r is fitted on |0..0>
    calibration rounds, and M^-1 is replaced by the fitted inverse.
    Unbiased only when the noise really is circuit-independent.
  * in-circuit cancellation (run_cpec_shadow): one channel drawn from the
    uncompressed inverse is spliced into the simulated execution per
    circuit, and the plain snapshot is read out.

The module also hosts the uniform Clifford sampler (symplectic images drawn
pair by pair from the shrinking commutant, then synthesized to {H,S,CNOT}),
Monte-Carlo estimators of the noisy shadow norms entering the variance
bound, and the g-h conditional-noise bound, whose moments are enumerated
exactly on tabulated toy ensembles.

Measurement ensembles: the global kind inverts with M^-1(A) = (2^n+1)A -
Tr(A) I; the local kind applies the single-site analog 3A - Tr(A) I per
qubit, which scales a weight-w Pauli by 3^w.  All snapshot arithmetic stays
inside the stabilizer formalism: overlaps are affine-subspace membership
tests, never dense matrices.

Protocol runs derive one rng stream per circuit index from a master seed,
so results do not depend on the order circuits are processed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .compiler import TABLE_WIDTHS, compile_words
from .gf2 import gf2_nullspace_basis, parity
from .montecarlo import (
    CpecSampler,
    EstimateRecord,
    InversionPlan,
    NoiseInput,
    NoisyCircuit,
    SemiNormEstimate,
)
from .noise import (
    BasisChannel,
    bitflip_gate_specs,
    depolarizing_gate_specs,
    truncate_gatewise,
    uniform_depolarizing_model,
    _pauli_ops,
)
from .pauli import CliffordCircuit, PauliString, conjugate_by_circuit, gate_on_word
from .tableau import StabilizerTableau, _word_mul, init_basis_state

NoiseFamily = Optional[Callable[[CliffordCircuit], NoiseInput]]


# ---------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True)
class EnsembleSpec:
    """Measurement ensemble: uniform n-qubit Cliffords or a tensor of
    single-qubit ones, each with its own ideal inverse M^-1."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("global_clifford", "local_clifford_tensor"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.kind == "global_clifford" and self.n > 12:
            raise ValueError("global ensemble capped at n = 12")


@dataclass(frozen=True)
class ShadowSample:
    """One round: the sampled circuit, its outcome, and the L signed
    inversion draws conditioned on this circuit's noise model."""

    circuit: CliffordCircuit
    outcome: int
    inversion_draws: Tuple[Tuple[float, BasisChannel], ...]


def _low_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


_SQ_CLIFFORDS: List[CliffordCircuit] = []


def single_qubit_cliffords() -> List[CliffordCircuit]:
    """The 24 single-qubit Cliffords as shortest {H,S} words.

    Elements are distinguished by their signed action on (X, Z); breadth
    first search from the empty word closes the group.
    """
    if not _SQ_CLIFFORDS:
        x = PauliString(1, 0, 0, 1)
        z = PauliString(1, 0, 1, 0)
        seen = {}
        queue = [CliffordCircuit(1, [])]
        while queue:
            c = queue.pop(0)
            key = (conjugate_by_circuit(x, c), conjugate_by_circuit(z, c))
            if key in seen:
                continue
            seen[key] = c
            for g in (("H", 0), ("S", 0)):
                queue.append(CliffordCircuit(1, list(c.ops) + [g]))
        assert len(seen) == 24
        _SQ_CLIFFORDS.extend(seen.values())
    return list(_SQ_CLIFFORDS)


def _sp_row(v: int, n: int) -> int:
    """Constraint row r with parity(r & u) = symplectic product <v, u>,
    for vectors packed as z | (x << n)."""
    mask = (1 << n) - 1
    return ((v & mask) << n) | (v >> n)


def _sample_symplectic(n: int, rng) -> List[Tuple[int, int]]:
    """Uniform symplectic images (z, x) of X_1..X_n, Z_1..Z_n.

    Pair i is drawn from the commutant of all earlier pairs: alpha uniform
    nonzero, beta uniform over {<alpha, beta> = 1}.  The choice counts per
    step multiply to |Sp(2n, 2)|, so the draw is uniform over the group.
    """
    chosen: List[int] = []
    ximgs: List[int] = []
    zimgs: List[int] = []
    for _ in range(n):
        basis = gf2_nullspace_basis([_sp_row(v, n) for v in chosen], 2 * n)
        d = len(basis)
        m = int(rng.integers(1, 1 << d))
        alpha = 0
        for j in range(d):
            if (m >> j) & 1:
                alpha ^= basis[j]
        arow = _sp_row(alpha, n)
        t = [parity(arow & bv) for bv in basis]
        k = t.index(1)  # exists: the form is nondegenerate on the commutant
        m = int(rng.integers(0, 1 << d))
        beta = 0
        odd = 0
        for j in range(d):
            if (m >> j) & 1:
                beta ^= basis[j]
                odd ^= t[j]
        if not odd:
            beta ^= basis[k]
        chosen.append(alpha)
        chosen.append(beta)
        ximgs.append(alpha)
        zimgs.append(beta)
    mask = (1 << n) - 1
    return [(v & mask, v >> n) for v in ximgs + zimgs]


def _synthesize(n: int, words: List[Tuple[int, int, int]]) -> CliffordCircuit:
    """Circuit sending the standard generators onto the given signed images.

    words lists the targets for X_1..X_n then Z_1..Z_n as (sign, z, x).
    The images are reduced to the standard generators by recorded
    conjugation sweeps; the inverse of the recorded list is the answer.
    Sweep for qubit q: bring an X to qubit q and clear the rest of that
    image, then shape its partner into Z_q using only ops fixing X_q.
    """
    words = list(words)
    ops: List[tuple] = []

    def do(op: tuple) -> None:
        for i, (s, z, x) in enumerate(words):
            words[i] = gate_on_word(op, s, z, x)
        ops.append(op)

    for q in range(n):
        s, z, x = words[q]
        if not (x >> q):
            do(("H", q + _low_bit(z >> q)))
            s, z, x = words[q]
        j = q + _low_bit(x >> q)
        if j != q:
            do(("CNOT", q, j))
            do(("CNOT", j, q))
            do(("CNOT", q, j))
        s, z, x = words[q]
        rest = x & ~(1 << q)
        while rest:
            do(("CNOT", q, q + _low_bit(rest >> q)))
            rest &= rest - 1
        s, z, x = words[q]
        if (z >> q) & 1:
            do(("S", q))
            s, z, x = words[q]
        rest = z >> (q + 1)
        while rest:
            j = q + 1 + _low_bit(rest)
            do(("H", j))
            do(("CNOT", q, j))
            rest &= rest - 1
        # partner: anticommutes with X_q, so z_q is set; clear support > q
        s, z, x = words[n + q]
        rest = (x | z) >> (q + 1)
        while rest:
            j = q + 1 + _low_bit(rest)
            s, z, x = words[n + q]
            if (x >> j) & 1 and (z >> j) & 1:
                do(("S", j))
                s, z, x = words[n + q]
            if (x >> j) & 1:
                do(("H", j))
                s, z, x = words[n + q]
            if (z >> j) & 1:
                do(("CNOT", j, q))
            rest &= rest - 1
        s, z, x = words[n + q]
        if (x >> q) & 1:  # Y_q -> Z_q while X_q -> Z_q -> Z_q -> X_q
            do(("H", q))
            do(("S", q))
            do(("H", q))
    for q in range(n):
        if words[q][0]:  # conjugation by Z_q flips the X_q image sign
            do(("S", q))
            do(("S", q))
        if words[n + q][0]:  # conjugation by X_q flips the Z_q image sign
            do(("H", q))
            do(("S", q))
            do(("S", q))
            do(("H", q))
    for q in range(n):
        assert words[q] == (0, 0, 1 << q) and words[n + q] == (0, 1 << q, 0)
    return CliffordCircuit(n, ops).inverse()


def _offset_ops(ops: Sequence[tuple], off: int) -> List[tuple]:
    return [(op[0], *(q + off for q in op[1:])) for op in ops]


def sample_clifford(spec: EnsembleSpec, rng) -> CliffordCircuit:
    """Uniform draw from the ensemble, compiled to {H, S, CNOT}."""
    if spec.kind == "local_clifford_tensor":
        group = single_qubit_cliffords()
        ops: List[tuple] = []
        for q in range(spec.n):
            c = group[int(rng.integers(0, len(group)))]
            ops.extend(_offset_ops(c.ops, q))
        return CliffordCircuit(spec.n, ops)
    imgs = _sample_symplectic(spec.n, rng)
    signs = rng.integers(0, 2, size=2 * spec.n)
    words = [(int(s), z, x) for s, (z, x) in zip(signs, imgs)]
    if spec.n in TABLE_WIDTHS:
        return compile_words(spec.n, words)
    return _synthesize(spec.n, words)


# ---------------------------------------------------------------------------
# snapshot values


class OutcomeOverlap:
    """Per-circuit lookup of |<target| U^dagger |b>|^2 over outcome bits.

    Measuring U|target> yields b with exactly that probability, so the
    support is an affine subspace: membership is a handful of parity checks
    and the value inside is 2^-rank.
    """

    def __init__(self, circuit: CliffordCircuit, target: StabilizerTableau):
        tab = target.copy()
        tab.apply_ops(circuit.ops)
        self.rows, self.t = tab.z_constraints()
        self.inside = 2.0 ** (-tab.x_rank())

    def __call__(self, b: int) -> float:
        for row, want in zip(self.rows, self.t):
            if parity(row & b) != want:
                return 0.0
        return self.inside


def snapshot_overlap(
    U: CliffordCircuit,
    b: int,
    target_rho: StabilizerTableau,
    spec: EnsembleSpec,
    extra_channel=None,
) -> float:
    """<<rho_t | M^-1 U^dagger (B) | b>> via stabilizer overlaps.

    extra_channel plays the sampled basis channel B applied to |b><b|
    before the inverse evolution (a BasisChannel or a sequence applied in
    order); its trace factor rides along through g.
    """
    tab = init_basis_state(spec.n, b)
    if extra_channel is not None:
        chans = (
            extra_channel
            if isinstance(extra_channel, (list, tuple))
            else (extra_channel,)
        )
        for ch in chans:
            ch.apply_to_tableau(tab)
    tab.apply_ops(U.inverse().ops)
    if tab.zero:
        return 0.0
    g = tab.g
    if spec.kind == "global_clifford":
        return ((1 << spec.n) + 1) * g * tab.overlap_magnitude(target_rho) - g
    # local kind: expand the snapshot over its stabilizer group; the
    # per-site inverse scales a weight-w word by 3^w
    rows = tab.canonical_rows()
    total = 1.0
    for m in range(1, 1 << spec.n):
        word = (0, 0, 0)
        mm = m
        while mm:
            word = _word_mul(word, rows[_low_bit(mm)])
            mm &= mm - 1
        s, z, x = word
        exp = target_rho.expectation_pauli(PauliString(spec.n, s, z, x))
        if exp:
            total += (3.0 ** (z | x).bit_count()) * exp
    return g * total / (1 << spec.n)


def _payload_channels(n: int, payload) -> Tuple[BasisChannel, ...]:
    """InversionPlan payload as channels; the z part of a flip mask is
    irrelevant on a post-measurement state."""
    if isinstance(payload, int):
        return (BasisChannel(n, "pauli", 0, payload),) if payload else ()
    return tuple(payload)


def _as_single_channel(n: int, payload) -> BasisChannel:
    """Collapse an InversionPlan payload to one BasisChannel record."""
    chans = _payload_channels(n, payload)
    if not chans:
        return BasisChannel.identity(n)
    if len(chans) == 1:
        return chans[0]
    ops: List[tuple] = []
    for ch in chans:
        if ch.kind == "pauli":
            ops.extend(_pauli_ops(ch.pauli(), 0))
        else:
            ops.extend(ch.ops)
    return BasisChannel.from_ops(n, ops)


# ---------------------------------------------------------------------------
# rng plumbing: one stream per circuit index, derived from a master seed


def _master_entropy(rng) -> int:
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2**63 - 1))


def _stream(master: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=master, spawn_key=key))


def _resolve(noise_family: NoiseFamily, U: CliffordCircuit) -> NoiseInput:
    return noise_family(U) if noise_family is not None else None


# ---------------------------------------------------------------------------
# protocols


def shadow_sample(
    U: CliffordCircuit,
    noise: NoiseInput,
    rho,
    L: int,
    rng,
    plan: Optional[InversionPlan] = None,
) -> ShadowSample:
    """One recorded round: outcome plus L signed draws from this circuit's
    compressed inverse."""
    if plan is None:
        plan = InversionPlan.from_noise(U, noise)
    b = NoisyCircuit(U, noise).sample_outcome(rho, rng)
    draws = []
    for _ in range(L):
        weight, payload = plan.sample(rng)
        draws.append((weight, _as_single_channel(U.n, payload)))
    return ShadowSample(U, b, tuple(draws))


def run_cni_shadow(
    rho,
    target_obs: StabilizerTableau,
    noise_family: NoiseFamily,
    spec: EnsembleSpec,
    M: int,
    K: int,
    L: int,
    rng,
    rng_seed: Optional[int] = None,
) -> EstimateRecord:
    """M random circuits, K shots each, L inversion draws per shot.

    Estimator per draw: gamma'_U sgn(B) <<O | M^-1 U^dagger B | b>>.  The
    compressed inversion plan is memoized on the circuit key so repeated
    shots reuse it.  gamma_used reports the largest gamma'_U encountered.
    """
    master = _master_entropy(rng)
    plans: Dict[str, InversionPlan] = {}
    scale = (1 << spec.n) + 1
    per_circuit = np.empty(M)
    gamma_max = 1.0
    for m in range(M):
        g = _stream(master, m)
        U = sample_clifford(spec, g)
        noise = _resolve(noise_family, U)
        key = U.key()
        plan = plans.get(key)
        if plan is None:
            plan = InversionPlan.from_noise(U, noise)
            plans[key] = plan
        gamma_max = max(gamma_max, plan.gamma)
        sim = NoisyCircuit(U, noise)
        fast = plan.pauli_only and spec.kind == "global_clifford"
        table = OutcomeOverlap(U, target_obs) if fast else None
        acc = 0.0
        for _ in range(K):
            b = sim.sample_outcome(rho, g)
            for _ in range(L):
                weight, payload = plan.sample(g)
                if fast:
                    acc += weight * (scale * table(b ^ payload) - 1.0)
                else:
                    acc += weight * snapshot_overlap(
                        U, b, target_obs, spec, _payload_channels(spec.n, payload)
                    )
        per_circuit[m] = acc / (K * L)
    mean = float(per_circuit.mean())
    seed = master if rng_seed is None else rng_seed
    return EstimateRecord(mean, tuple(per_circuit), K, L, M, gamma_max, seed)


def calibrate_srse(
    noise_family: NoiseFamily, spec: EnsembleSpec, calib_M: int, rng
) -> float:
    """Fitted r of the depolarizing model for the noisy measurement channel.

    calib_M noisy rounds on |0..0|: R_hat averages <<0|U^dagger|b>> and
    r_hat = (2^n R_hat - 1)/(2^n - 1).
    """
    master = _master_entropy(rng)
    g = _stream(master, 0)
    n = spec.n
    zero = init_basis_state(n, 0)
    acc = 0.0
    for _ in range(calib_M):
        U = sample_clifford(spec, g)
        sim = NoisyCircuit(U, _resolve(noise_family, U))
        b = sim.sample_outcome(0, g)
        acc += OutcomeOverlap(U, zero)(b)
    r_hat = ((1 << n) * (acc / calib_M) - 1.0) / ((1 << n) - 1.0)
    if r_hat <= 0.0:
        raise ValueError("calibration failed: fitted r is not positive")
    return r_hat


def run_srse(
    rho,
    target_obs: StabilizerTableau,
    noise_family: NoiseFamily,
    spec: EnsembleSpec,
    M: int,
    K: int,
    calib_M: Optional[int],
    rng,
    r_hat: Optional[float] = None,
    rng_seed: Optional[int] = None,
) -> EstimateRecord:
    """Robust shadow estimation with the calibrated inverse
    (1/r) I - ((1-r)/r) D, D the completely depolarizing channel.

    Snapshot value: <<O| fitted-inverse U^dagger |b>> = ov/r - (1-r)/(r 2^n)
    with ov the plain squared overlap.  A precomputed r_hat (shared across
    repetitions) skips the calibration phase; calib_M defaults to 320 M.
    """
    if spec.kind != "global_clifford":
        raise ValueError("calibrated inversion is defined for the global ensemble")
    master = _master_entropy(rng)
    if r_hat is None:
        if calib_M is None:
            calib_M = 320 * M
        r_hat = calibrate_srse(noise_family, spec, calib_M, _stream(master, 0))
    n = spec.n
    offset = (1.0 - r_hat) / (r_hat * (1 << n))
    per_circuit = np.empty(M)
    for m in range(M):
        g = _stream(master, 1, m)
        U = sample_clifford(spec, g)
        sim = NoisyCircuit(U, _resolve(noise_family, U))
        table = OutcomeOverlap(U, target_obs)
        acc = 0.0
        for _ in range(K):
            acc += table(sim.sample_outcome(rho, g)) / r_hat - offset
        per_circuit[m] = acc / K
    mean = float(per_circuit.mean())
    seed = master if rng_seed is None else rng_seed
    return EstimateRecord(mean, tuple(per_circuit), K, 1, M, 1.0, seed)


def run_cpec_shadow(
    rho,
    target_obs: StabilizerTableau,
    noise_family: NoiseFamily,
    spec: EnsembleSpec,
    M: int,
    K: int,
    rng,
    rng_seed: Optional[int] = None,
) -> EstimateRecord:
    """Shadows with in-circuit cancellation: per circuit, one channel from
    the uncompressed inverse runs inside the simulated execution and the
    plain snapshot gamma_U sgn(B) <<O|M^-1 U^dagger|b>> is averaged."""
    if spec.kind != "global_clifford":
        raise ValueError("in-circuit cancellation implemented for the global ensemble")
    master = _master_entropy(rng)
    scale = (1 << spec.n) + 1
    per_circuit = np.empty(M)
    gamma_max = 1.0
    for m in range(M):
        g = _stream(master, m)
        U = sample_clifford(spec, g)
        noise = _resolve(noise_family, U)
        sampler = CpecSampler(U, noise)
        gamma_max = max(gamma_max, sampler.gamma)
        sim = NoisyCircuit(U, noise)
        table = OutcomeOverlap(U, target_obs)
        weight, inserts, tail = sampler.sample(g)
        acc = 0.0
        for _ in range(K):
            b = sim.sample_outcome(rho, g, inserts=inserts, tail_channels=tail)
            acc += scale * table(b) - 1.0
        per_circuit[m] = weight * acc / K
    mean = float(per_circuit.mean())
    seed = master if rng_seed is None else rng_seed
    return EstimateRecord(mean, tuple(per_circuit), K, 1, M, gamma_max, seed)


# ---------------------------------------------------------------------------
# noisy shadow norms and the variance bound


def estimate_shadow_norms(
    rho,
    O: StabilizerTableau,
    noise_family: NoiseFamily,
    spec: EnsembleSpec,
    samples: int,
    rng,
) -> Tuple[SemiNormEstimate, SemiNormEstimate, SemiNormEstimate]:
    """Monte-Carlo (NS1, NS2, XS) at a fixed input state.

    Per sample: one noisy outcome b, then v_i = <<O|M^-1 U^dagger B_i|b>>
    for two independent draws B_i from the compressed inverse.  NS1
    averages v^2, NS2 the signed product sgn_1 v_1 sgn_2 v_2, and XS pairs
    plain snapshot values over two independent noiseless outcomes.
    """
    master = _master_entropy(rng)
    scale = (1 << spec.n) + 1
    ns1 = np.empty(samples)
    ns2 = np.empty(samples)
    xs = np.empty(samples)
    for s in range(samples):
        g = _stream(master, s)
        U = sample_clifford(spec, g)
        noise = _resolve(noise_family, U)
        plan = InversionPlan.from_noise(U, noise)
        sim = NoisyCircuit(U, noise)
        fast = plan.pauli_only and spec.kind == "global_clifford"
        table = OutcomeOverlap(U, O) if fast else None

        def snap(b: int, payload=None) -> float:
            if fast:
                mask = payload if isinstance(payload, int) else 0
                return scale * table(b ^ mask) - 1.0
            chans = None if payload is None else _payload_channels(spec.n, payload)
            return snapshot_overlap(U, b, O, spec, chans)

        b = sim.sample_outcome(rho, g)
        w1, p1 = plan.sample(g)
        w2, p2 = plan.sample(g)
        v1 = snap(b, p1)
        v2 = snap(b, p2)
        ns1[s] = v1 * v1
        ns2[s] = (w1 / plan.gamma) * v1 * (w2 / plan.gamma) * v2
        ideal = NoisyCircuit(U, None)
        xs[s] = snap(ideal.sample_outcome(rho, g)) * snap(ideal.sample_outcome(rho, g))

    def est(vals: np.ndarray) -> SemiNormEstimate:
        se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        return SemiNormEstimate(float(vals.mean()), se, samples)

    return est(ns1), est(ns2), est(xs)


def estimate_cpec_shadow_norms(
    rho,
    O: StabilizerTableau,
    noise_family: NoiseFamily,
    spec: EnsembleSpec,
    samples: int,
    rng,
) -> Tuple[SemiNormEstimate, SemiNormEstimate]:
    """(NS, NXS) for the in-circuit route: the drawn channel runs inside the
    execution, the snapshot is ideal, and NXS pairs two outcomes of the
    same spliced circuit."""
    master = _master_entropy(rng)
    scale = (1 << spec.n) + 1
    ns = np.empty(samples)
    nxs = np.empty(samples)
    for s in range(samples):
        g = _stream(master, s)
        U = sample_clifford(spec, g)
        noise = _resolve(noise_family, U)
        sampler = CpecSampler(U, noise)
        sim = NoisyCircuit(U, noise)
        table = OutcomeOverlap(U, O)
        weight, inserts, tail = sampler.sample(g)
        b1 = sim.sample_outcome(rho, g, inserts=inserts, tail_channels=tail)
        b2 = sim.sample_outcome(rho, g, inserts=inserts, tail_channels=tail)
        v1 = scale * table(b1) - 1.0
        v2 = scale * table(b2) - 1.0
        ns[s] = v1 * v1
        nxs[s] = v1 * v2

    def est(vals: np.ndarray) -> SemiNormEstimate:
        se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        return SemiNormEstimate(float(vals.mean()), se, samples)

    return est(ns), est(nxs)


def shadow_variance_bound(
    gamma_max: float, M: int, K: int, L: int, ns1: float, ns2: float, xs: float
) -> float:
    """Variance bound for the M-circuit, K-shot, L-draw estimator:

        (1/M) [ (gamma^2/K) (NS1^2/L + (1 - 1/L) NS2^2) + (1 - 1/K) XS^2 ].
    """
    if M < 1 or K < 1 or L < 1:
        raise ValueError("counts must be at least 1")
    inner = (gamma_max**2 / K) * (ns1**2 / L + (1.0 - 1.0 / L) * ns2**2)
    return (inner + (1.0 - 1.0 / K) * xs**2) / M


# ---------------------------------------------------------------------------
# conditional-noise tables: the g-h bound, enumerated exactly


@dataclass(frozen=True)
class ConditionalNoiseTable:
    """Finite circuit ensemble (uniform weights) with a channel distribution
    and sampling overhead gamma'_U per circuit."""

    n: int
    entries: Tuple[Tuple[CliffordCircuit, Tuple[Tuple[BasisChannel, float], ...], float], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty table")
        for _, cond, _ in self.entries:
            total = sum(p for _, p in cond)
            if any(p < 0 for _, p in cond) or abs(total - 1.0) > 1e-9:
                raise ValueError("conditional distribution must sum to 1")

    def identity_prob(self, cond) -> float:
        return sum(p for ch, p in cond if ch.is_identity())

    def marginal(self) -> Dict[BasisChannel, float]:
        w = 1.0 / len(self.entries)
        out: Dict[BasisChannel, float] = {}
        for _, cond, _ in self.entries:
            for ch, p in cond:
                out[ch] = out.get(ch, 0.0) + w * p
        return out


def compute_g_h(table: ConditionalNoiseTable) -> Tuple[float, float]:
    """g = min_U Pr(identity|U); h bounds the shifted conditionals,
    Pr'(B|U) <= h Pr'(B).

    h is the larger of max Pr(B|U)/Pr(B) over non-identity B and
    max (Pr(I|U) - g)/(Pr(I) - g), the identity term being 1 when every
    conditional identity weight equals g.
    """
    marg = table.marginal()
    pr_i = sum(p for ch, p in marg.items() if ch.is_identity())
    g = min(table.identity_prob(cond) for _, cond, _ in table.entries)
    h = 1.0
    for _, cond, _ in table.entries:
        for ch, p in cond:
            if ch.is_identity() or p == 0.0:
                continue
            h = max(h, p / marg[ch])
        if pr_i > g:
            h = max(h, (table.identity_prob(cond) - g) / (pr_i - g))
    return g, h


def mutual_information(table: ConditionalNoiseTable) -> float:
    """I(U; B) in nats between the uniform circuit index and the drawn
    channel; log h upper-bounds it."""
    marg = table.marginal()
    w = 1.0 / len(table.entries)
    total = 0.0
    for _, cond, _ in table.entries:
        for ch, p in cond:
            if p > 0.0:
                total += w * p * math.log(p / marg[ch])
    return total


def tabulated_bound_terms(
    table: ConditionalNoiseTable,
    rho: StabilizerTableau,
    target: StabilizerTableau,
    spec: EnsembleSpec,
) -> Dict[str, float]:
    """Exact moments of the conditional-noise bound on a tabulated ensemble.

    Enumerates circuits, channels and outcomes, so every term is a finite
    sum: ns1_sq pairs each squared snapshot value with the noisy outcome
    law it is estimated under; s_sq / dev_sq are fixed-state shadow norms
    of the target and of the worst deviated observable U^dagger B U
    (target).  The bound g s_sq + (1 - g) h dev_sq uses the norms under
    the ideal outcome law, which is what the shadow norm denotes; the
    noisy-law variants ride along as diagnostics.
    """
    n = table.n
    w = 1.0 / len(table.entries)
    outcomes = range(1 << n)

    laws = []  # per entry: (cond, p_ideal, p_noisy, u_target, u_by_channel)
    for U, cond, _ in table.entries:
        out = rho.copy()
        out.apply_ops(U.ops)
        p_ideal = [out.overlap_with_basis(b) for b in outcomes]
        p_noisy = [0.0] * (1 << n)
        for ch, p in cond:
            shifted = out.copy()
            ch.apply_to_tableau(shifted)
            for b in outcomes:
                p_noisy[b] += p * shifted.overlap_with_basis(b)
        u_t = [snapshot_overlap(U, b, target, spec) for b in outcomes]
        u_ch = {
            ch: [snapshot_overlap(U, b, target, spec, ch) for b in outcomes]
            for ch, _ in cond
        }
        laws.append((cond, p_ideal, p_noisy, u_t, u_ch))

    ns1_sq = sum(
        w * p * pn[b] * u_ch[ch][b] ** 2
        for cond, _, pn, _, u_ch in laws
        for ch, p in cond
        for b in outcomes
    )
    s_sq = sum(w * pi[b] * ut[b] ** 2 for _, pi, _, ut, _ in laws for b in outcomes)
    s_sq_noisy = sum(
        w * pn[b] * ut[b] ** 2 for _, _, pn, ut, _ in laws for b in outcomes
    )

    # deviated observables U^dagger B U (target) over the table's pairs
    dev_sq = 0.0
    dev_sq_noisy = 0.0
    for U, cond, _ in table.entries:
        for ch, _ in cond:
            if ch.is_identity():
                continue
            if ch.kind != "pauli":
                raise ValueError("deviated observables need Pauli channels")
            dev = target.copy()
            dev.apply_ops(U.ops)
            dev.apply_pauli(ch.pauli())
            dev.apply_ops(U.inverse().ops)
            acc_i = 0.0
            acc_n = 0.0
            for (U2, _, _), (_, pi, pn, _, _) in zip(table.entries, laws):
                for b in outcomes:
                    u = snapshot_overlap(U2, b, dev, spec)
                    acc_i += w * pi[b] * u * u
                    acc_n += w * pn[b] * u * u
            dev_sq = max(dev_sq, acc_i)
            dev_sq_noisy = max(dev_sq_noisy, acc_n)

    g, h = compute_g_h(table)
    return {
        "g": g,
        "h": h,
        "ns1_sq": ns1_sq,
        "s_sq": s_sq,
        "s_sq_noisy": s_sq_noisy,
        "dev_sq": dev_sq,
        "dev_sq_noisy": dev_sq_noisy,
        "bound": g * s_sq + (1.0 - g) * h * dev_sq,
    }


def estimate_table_ns1(
    table: ConditionalNoiseTable,
    rho: StabilizerTableau,
    target: StabilizerTableau,
    spec: EnsembleSpec,
    samples: int,
    rng,
) -> SemiNormEstimate:
    """Monte-Carlo NS1^2 on a tabulated ensemble, for checking the
    conditional-noise bound against a statistically independent estimate.

    Per sample: uniform table entry, one noisy outcome b (channel drawn
    from the entry's conditional law), an independent channel draw B from
    the same law, and the squared snapshot <<target|M^-1 U^dagger B|b>>^2.
    """
    master = _master_entropy(rng)
    vals = np.empty(samples)
    for s in range(samples):
        g = _stream(master, s)
        U, cond, _ = table.entries[int(g.integers(0, len(table.entries)))]
        probs = np.array([p for _, p in cond])
        chans = [ch for ch, _ in cond]
        fault = chans[int(g.choice(len(chans), p=probs))]
        out = rho.copy()
        out.apply_ops(U.ops)
        fault.apply_to_tableau(out)
        b = out.sample_outcome(g)
        B = chans[int(g.choice(len(chans), p=probs))]
        v = snapshot_overlap(U, b, target, spec, B)
        vals[s] = v * v
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return SemiNormEstimate(float(vals.mean()), se, samples)


def deviated_observable_norm_check(
    O: Union[PauliString, Mapping[PauliString, float]],
    spec: EnsembleSpec,
    trials: int,
    rng,
) -> bool:
    """Frobenius invariance of O under U^dagger B U for random (U, B).

    Conjugation permutes Pauli words and flips coefficient signs, so the
    multiset of squared coefficients must be preserved exactly; under the
    local ensemble each word's support set is preserved as well.
    """
    if isinstance(O, PauliString):
        O = {O: 1.0}
    words = list(O.items())
    n = spec.n

    def canon(p: PauliString, c: float) -> Tuple[Tuple[int, int], float]:
        return (p.z_mask, p.x_mask), (-c if p.sign_bit else c)

    base = np.sort(np.array([c * c for _, c in words]))
    for _ in range(trials):
        U = sample_clifford(spec, rng)
        bz = int(rng.integers(0, 1 << n))
        bx = int(rng.integers(0, 1 << n))
        if bz == 0 and bx == 0:
            bx = 1
        B = PauliString(n, 0, bz, bx)
        Uinv = U.inverse()
        out = []
        for p, c in words:
            q = conjugate_by_circuit(p, U)
            if parity(q.z_mask & B.x_mask) ^ parity(q.x_mask & B.z_mask):
                c = -c
            q = conjugate_by_circuit(q, Uinv)
            (zx, cc) = canon(q, c)
            out.append((zx, cc))
            if spec.kind == "local_clifford_tensor":
                if (q.z_mask | q.x_mask) != (p.z_mask | p.x_mask):
                    return False
        got = np.sort(np.array([c * c for _, c in out]))
        if not np.array_equal(base, got):
            return False
    return True


# ---------------------------------------------------------------------------
# noise families and result records


def bitflip_noise_family(p: float) -> NoiseFamily:
    """Local regime: every CNOT is followed by an XX flip with rate p."""
    if not 0.0 <= p < 0.5:
        raise ValueError("bit-flip rate outside [0, 0.5)")
    if p == 0.0:
        return None

    def family(circuit: CliffordCircuit) -> NoiseInput:
        return bitflip_gate_specs(circuit, p)

    return family


def global_depol_noise_family(p: float) -> NoiseFamily:
    """Correlated regime: first-order model, rate p per CNOT.

    Each CNOT contributes a propagated two-qubit depolarizing fault at rate
    p, so Pr(identity) = 1 - kp for a k-CNOT compilation.  Gate dependence
    is the point of this regime: deeper compilations carry more noise, and
    the total weight kp must stay below 1 for the first-order truncation.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("per-gate fault rate outside [0, 1)")
    if p == 0.0:
        return None

    def family(circuit: CliffordCircuit) -> NoiseInput:
        if not circuit.cnot_positions():
            return None
        return truncate_gatewise(depolarizing_gate_specs(circuit, p), circuit)

    return family


def uniform_depol_noise_family(n: int, p: float) -> NoiseFamily:
    """Circuit-independent global depolarizing noise (the regime where the
    calibrated inverse is actually unbiased)."""
    if p == 0.0:
        return None
    model = uniform_depolarizing_model(n, p)

    def family(circuit: CliffordCircuit) -> NoiseInput:
        return model

    return family


def protocol_record(
    method: str,
    n: int,
    noise_kind: str,
    p: float,
    records: Sequence[EstimateRecord],
    seed: int,
) -> dict:
    """JSON-ready summary of repeated protocol runs."""
    first = records[0]
    return {
        "method": method,
        "n": n,
        "noise": {"kind": noise_kind, "p": p},
        "M": first.M,
        "K": first.K,
        "L": first.L,
        "repetitions": len(records),
        "means": [r.mean for r in records],
        "stds": [math.sqrt(r.sample_variance) for r in records],
        "seed": seed,
    }
