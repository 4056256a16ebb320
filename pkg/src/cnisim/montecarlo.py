"""Monte-Carlo estimators for a fixed noisy circuit.

The quantum side is emulated: each shot runs the stabilizer engine over the
ideal gates with faults drawn from the noise model, ending in a sampled
measurement outcome b.  The classical side then evaluates

    f_hat = gamma' * sgn(B) * <<F| B |b>>

with B drawn from the compressed inverse.  K shots with L inversion
instances each give the (K, L) estimator whose variance obeys

    Var <= (gamma'^2 / K) (|F|*^2 / L + (1 - 1/L) |F|o^2),

where the two semi-norms are the mean square of <<F|B|b>> and the mean
squared inner expectation; both are estimated here by Monte Carlo at the
fixed input state.  The conventional baseline (cpec_run) instead samples M
basis channels from the uncompressed inverse, inserts each into the
simulated circuit, and measures K shots per insertion.

Pauli-only plans never touch a tableau in the inner loop: a Pauli
conjugation moves |b> to |b xor x_mask|, so the estimate is an f lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .compress import compress, compress_global
from .noise import (
    BasisChannel,
    GateNoiseSpec,
    GlobalNoiseModel,
    QuasiProbDecomposition,
    gamma_of,
    invert_pauli_channel,
    neumann_sample_inverse,
)
from .pauli import CliffordCircuit, PauliString
from .tableau import StabilizerTableau, init_basis_state

NoiseInput = Union[None, Sequence[GateNoiseSpec], GlobalNoiseModel]


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class ObservableF:
    """F = sum_b f(b)|b><b| (diagonal) or a stabilizer projector |psi><psi|."""

    kind: str
    n: int
    f: Optional[Callable[[int], float]] = None
    state: Optional[StabilizerTableau] = None

    @classmethod
    def diagonal(cls, n: int, f: Callable[[int], float]) -> "ObservableF":
        return cls("diagonal", n, f=f)

    @classmethod
    def indicator(cls, n: int, bits: int) -> "ObservableF":
        """[b == bits], evaluated as the basis-state projector."""
        return cls.stabilizer_projector(init_basis_state(n, bits))

    @classmethod
    def stabilizer_projector(cls, state: StabilizerTableau) -> "ObservableF":
        if state.zero or state.m_exp != 0:
            raise ValueError("projector observable needs a normalized state")
        return cls("projector", state.n, state=state)

    def at_basis(self, bits: int) -> float:
        """<<F|b>>: the observable against one basis state."""
        if self.kind == "diagonal":
            return float(self.f(bits))
        return self.state.overlap_with_basis(bits)

    def value(self, tab: StabilizerTableau) -> float:
        """<<F applied to a subnormalized stabilizer state g|phi><phi|."""
        if tab.zero:
            return 0.0
        if self.kind == "projector":
            return tab.g * tab.overlap_magnitude(self.state)
        d_rows, t_bits = tab.z_constraints()
        base = 0
        for d, t in zip(d_rows, t_bits):
            if t:
                base ^= d & (-d)
        pivots = 0
        for d in d_rows:
            pivots |= d & (-d)
        kernel = []
        for m in range(tab.n):
            bit = 1 << m
            if pivots & bit:
                continue
            vec = bit
            for d in d_rows:
                if d & bit:
                    vec ^= d & (-d)
            kernel.append(vec)
        # uniform distribution over the affine set, 2^{-|kernel|} each
        total = 0.0
        for combo in range(1 << len(kernel)):
            c = base
            rest = combo
            idx = 0
            while rest:
                if rest & 1:
                    c ^= kernel[idx]
                rest >>= 1
                idx += 1
            total += float(self.f(c))
        return tab.g * total / float(1 << len(kernel))


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class EstimateRecord:
    """One estimator run: mean of per_sample plus the knobs that made it."""

    mean: float
    per_sample: Tuple[float, ...]
    K: int
    L: int
    M: int
    gamma_used: float
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if self.per_sample:
            m = sum(self.per_sample) / len(self.per_sample)
            if not math.isclose(m, self.mean, rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError("mean does not match per_sample")

    @property
    def sample_variance(self) -> float:
        if len(self.per_sample) < 2:
            return 0.0
        return float(np.var(self.per_sample, ddof=1))

    @property
    def std_error(self) -> float:
        if len(self.per_sample) < 2:
            return 0.0
        return float(math.sqrt(self.sample_variance / len(self.per_sample)))

    def to_json(self, config_hash: Optional[str] = None) -> dict:
        return {
            "seed": self.rng_seed,
            "config_hash": config_hash,
            "mean": self.mean,
            "sample_variance": self.sample_variance,
            "std_error": self.std_error,
            "K": self.K,
            "L": self.L,
            "M": self.M,
            "gamma_used": self.gamma_used,
        }


# ---------------------------------------------------------------------------
# noisy-shot simulation


class NoisyCircuit:
    """Shot sampler: ideal gates with faults drawn from the noise model."""

    def __init__(self, circuit: CliffordCircuit, noise: NoiseInput):
        self.circuit = circuit
        self.n = circuit.n
        self.gate_faults = {}
        self.global_terms = None
        if noise is None:
            return
        if isinstance(noise, GlobalNoiseModel):
            if noise.eta != 1.0 or any(s != 1 for _, _, s in noise.terms):
                raise ValueError("only probabilistic models can be simulated")
            chans = [ch for ch, p, _ in noise.terms if not ch.is_identity()]
            probs = [p for ch, p, _ in noise.terms if not ch.is_identity()]
            self.global_terms = (chans, np.cumsum(probs))
        else:
            for spec in noise:
                words = [(p.z_mask, p.x_mask) for p, _ in spec.paulis]
                cum = np.cumsum([prob for _, prob in spec.paulis])
                if len(words):
                    self.gate_faults[spec.gate_index] = (words, cum)

    def sample_outcome(
        self,
        input_state,
        rng,
        inserts: Optional[dict] = None,
        tail_channels: Sequence[BasisChannel] = (),
    ) -> int:
        """One shot; inserts/tail_channels splice extra channels in (cPEC).

        input_state is basis bits or a prepared StabilizerTableau (copied).
        """
        if isinstance(input_state, StabilizerTableau):
            tab = input_state.copy()
        else:
            tab = init_basis_state(self.n, input_state)
        for i, op in enumerate(self.circuit.ops):
            tab.apply_gate(op)
            fault = self.gate_faults.get(i)
            if fault is not None:
                words, cum = fault
                u = rng.random()
                if u < cum[-1]:
                    z, x = words[int(np.searchsorted(cum, u, side="right"))]
                    tab.apply_pauli(PauliString(self.n, 0, z, x))
            if inserts is not None and i in inserts:
                for ch in inserts[i]:
                    ch.apply_to_tableau(tab)
        if self.global_terms is not None:
            chans, cum = self.global_terms
            u = rng.random()
            if u < cum[-1]:
                chans[int(np.searchsorted(cum, u, side="right"))].apply_to_tableau(tab)
        for ch in tail_channels:
            ch.apply_to_tableau(tab)
        return tab.measure_all(rng)


# ---------------------------------------------------------------------------
# inversion plans


class InversionPlan:
    """Sampler for the inverse of the propagated noise of a whole circuit.

    Local gate-wise noise gives one compressed decomposition per noisy gate
    (sampled independently, weights multiply).  A global model built from
    physical Pauli terms is inverted exactly (compressed plans invert the
    outcome-flip channel, uncompressed ones the full Pauli channel); other
    global models are compressed once and sampled through the geometric
    series, which needs Pr(N) < Pr(I).  When every term is a Pauli
    conjugation the sample collapses to an outcome-flip mask.
    """

    def __init__(self, kind, parts, gamma, pauli_only, n):
        self.kind = kind
        self.parts = parts
        self.gamma = gamma
        self.pauli_only = pauli_only
        self.n = n

    @classmethod
    def identity(cls, n: int) -> "InversionPlan":
        return cls("local", [], 1.0, True, n)

    @classmethod
    def from_decomposition(cls, d: QuasiProbDecomposition) -> "InversionPlan":
        pauli_only = all(ch.kind == "pauli" for ch, _ in d.terms)
        return cls("local", [d], d.gamma, pauli_only, d.n)

    @classmethod
    def from_noise(
        cls, circuit: CliffordCircuit, noise: NoiseInput, compressed: bool = True
    ) -> "InversionPlan":
        n = circuit.n
        if noise is None:
            return cls.identity(n)
        if isinstance(noise, GlobalNoiseModel):
            model = compress_global(noise) if compressed else noise
            pauli_only = all(ch.kind == "pauli" for ch, _, _ in model.terms)
            physical = abs(model.eta - 1.0) <= 1e-9 and all(
                s == 1 for _, _, s in model.terms
            )
            if pauli_only and physical:
                # explicit Pauli terms invert exactly; compressed plans only
                # need the channel's action on outcome bits, so the words
                # collapse to their flip masks first
                probs: dict = {}
                for ch, p, _ in model.terms:
                    z = 0 if compressed else ch.z_mask
                    key = PauliString(n, 0, z, ch.x_mask)
                    probs[key] = probs.get(key, 0.0) + model.eta * p
                d = invert_pauli_channel(probs, n)
                return cls("local", [d], d.gamma, True, n)
            return cls("global", model, gamma_of(model), pauli_only, n)
        parts = []
        gamma = 1.0
        for spec in noise:
            if spec.total_rate == 0.0:
                continue
            probs = {p: prob for p, prob in spec.paulis}
            probs[PauliString(n, 0, 0, 0)] = 1.0 - spec.total_rate
            d = invert_pauli_channel(probs, n)
            if compressed:
                tail = CliffordCircuit(n, list(circuit.ops[spec.gate_index + 1 :]))
                d = compress(d, context=tail)
            if len(d.terms) == 1 and d.terms[0][0].is_identity():
                gamma *= d.gamma
                continue
            parts.append((spec.gate_index, d))
            gamma *= d.gamma
        pauli_only = all(
            ch.kind == "pauli" for _, d in parts for ch, _ in d.terms
        )
        return cls("local", [d for _, d in parts], gamma, pauli_only, n)

    def sample(self, rng) -> Tuple[float, Union[int, List[BasisChannel]]]:
        """(weight, payload): weight = +-gamma; payload a flip mask or channels."""
        if self.kind == "global":
            weight, chans = neumann_sample_inverse(self.parts, rng)
            if self.pauli_only:
                mask = 0
                for ch in chans:
                    mask ^= ch.x_mask
                return weight, mask
            return weight, list(chans)
        weight = self.gamma
        if self.pauli_only:
            mask = 0
            for d in self.parts:
                sign, ch = d.sample(rng)
                weight *= sign
                mask ^= ch.x_mask
            return weight, mask
        chans: List[BasisChannel] = []
        for d in self.parts:
            sign, ch = d.sample(rng)
            weight *= sign
            chans.append(ch)
        # inverses compose in reverse gate order onto the outcome state
        chans.reverse()
        return weight, chans

    def evaluate(self, F: ObservableF, bits: int, weight: float, payload) -> float:
        if self.pauli_only:
            return weight * F.at_basis(bits ^ payload)
        tab = init_basis_state(self.n, bits)
        for ch in payload:
            ch.apply_to_tableau(tab)
        return weight * F.value(tab)


# ---------------------------------------------------------------------------
# estimators


def cni_single(b: int, d: QuasiProbDecomposition, F: ObservableF, rng) -> float:
    """One draw of gamma' sgn(B) <<F|B|b>> from a compressed decomposition."""
    sign, ch = d.sample(rng)
    if ch.kind == "pauli":
        return d.gamma * sign * F.at_basis(b ^ ch.x_mask)
    tab = init_basis_state(d.n, b)
    ch.apply_to_tableau(tab)
    return d.gamma * sign * F.value(tab)


def cni_run(
    circuit: CliffordCircuit,
    input_state: int,
    noise: NoiseInput,
    F: ObservableF,
    K: int,
    L: int,
    rng,
    rng_seed: Optional[int] = None,
) -> EstimateRecord:
    """K noisy shots, L classical inversions each; per_sample holds shot means."""
    sim = NoisyCircuit(circuit, noise)
    plan = InversionPlan.from_noise(circuit, noise)
    per_shot = []
    for _ in range(K):
        b = sim.sample_outcome(input_state, rng)
        acc = 0.0
        for _ in range(L):
            weight, payload = plan.sample(rng)
            acc += plan.evaluate(F, b, weight, payload)
        per_shot.append(acc / L)
    mean = sum(per_shot) / K
    return EstimateRecord(mean, tuple(per_shot), K, L, 1, plan.gamma, rng_seed)


class CpecSampler:
    """Draws of the uncompressed inverse, shaped for in-circuit splicing.

    Local noise yields one channel per noisy gate placed at that gate;
    an end-propagated global model yields a tail channel sequence.  Either
    way the draw is executed inside the quantum run and the estimator reads
    the plain outcome, scaled by gamma sgn(B).
    """

    def __init__(self, circuit: CliffordCircuit, noise: NoiseInput):
        self.n = circuit.n
        self.gate_parts: List[Tuple[int, QuasiProbDecomposition]] = []
        self.global_plan: Optional[InversionPlan] = None
        if isinstance(noise, GlobalNoiseModel):
            self.global_plan = InversionPlan.from_noise(circuit, noise, compressed=False)
            self.gamma = self.global_plan.gamma
            return
        gamma = 1.0
        for spec in noise or []:
            if spec.total_rate == 0.0:
                continue
            probs = {p: prob for p, prob in spec.paulis}
            probs[PauliString(self.n, 0, 0, 0)] = 1.0 - spec.total_rate
            d = invert_pauli_channel(probs, self.n)
            self.gate_parts.append((spec.gate_index, d))
            gamma *= d.gamma
        self.gamma = gamma

    def sample(self, rng) -> Tuple[float, Optional[dict], List[BasisChannel]]:
        """(weight, inserts, tail_channels) for NoisyCircuit.sample_outcome."""
        if self.global_plan is not None:
            weight, payload = self.global_plan.sample(rng)
            if self.global_plan.pauli_only:
                tail = [BasisChannel(self.n, "pauli", 0, payload)] if payload else []
            else:
                tail = payload
                if any(ch.has_projector() for ch in tail):
                    raise ValueError(
                        "projector channel cannot run inside a sampled circuit"
                    )
            return weight, None, tail
        weight = self.gamma
        inserts: dict = {}
        for gi, d in self.gate_parts:
            sign, ch = d.sample(rng)
            weight *= sign
            inserts.setdefault(gi, []).append(ch)
        return weight, inserts, []


def cpec_run(
    circuit: CliffordCircuit,
    input_state: int,
    noise: NoiseInput,
    F: ObservableF,
    M: int,
    K: int,
    rng,
    rng_seed: Optional[int] = None,
) -> EstimateRecord:
    """Baseline: M channels from the uncompressed inverse run in-circuit.

    Each sampled channel is spliced into the quantum run (at its gate for
    local noise, at the end for an end-propagated global model) and the
    plain <<F|b>> is averaged over K shots, scaled by gamma sgn(B).
    """
    sim = NoisyCircuit(circuit, noise)
    sampler = CpecSampler(circuit, noise)
    per_circuit = []
    for _ in range(M):
        weight, inserts, tail = sampler.sample(rng)
        acc = 0.0
        for _ in range(K):
            b = sim.sample_outcome(input_state, rng, inserts=inserts, tail_channels=tail)
            acc += F.at_basis(b)
        per_circuit.append(weight * acc / K)
    mean = sum(per_circuit) / M
    return EstimateRecord(mean, tuple(per_circuit), K, 1, M, sampler.gamma, rng_seed)


# ---------------------------------------------------------------------------
# semi-norms and the variance bound


@dataclass(frozen=True)
class SemiNormEstimate:
    """Monte-Carlo estimate of a squared semi-norm at a fixed input state."""

    squared: float
    squared_se: float
    samples: int

    @property
    def value(self) -> float:
        return math.sqrt(max(self.squared, 0.0))

    def __float__(self) -> float:
        return self.value


def estimate_seminorms(
    F: ObservableF,
    circuit: CliffordCircuit,
    noise: NoiseInput,
    d: Union[None, QuasiProbDecomposition, InversionPlan],
    rho: int,
    samples: int,
    rng,
) -> Tuple[SemiNormEstimate, SemiNormEstimate]:
    """(|F|* , |F|o) at the given input state, by Monte Carlo.

    The star norm averages <<F|B|b>>^2 over one draw per outcome; the circ
    norm multiplies two independent signed draws per outcome, which is an
    unbiased estimate of the squared inner expectation.
    """
    if isinstance(d, InversionPlan):
        plan = d
    elif isinstance(d, QuasiProbDecomposition):
        plan = InversionPlan.from_decomposition(d)
    else:
        plan = InversionPlan.from_noise(circuit, noise)
    sim = NoisyCircuit(circuit, noise)
    g = plan.gamma
    star_vals = np.empty(samples)
    circ_vals = np.empty(samples)
    for i in range(samples):
        b = sim.sample_outcome(rho, rng)
        w1, p1 = plan.sample(rng)
        w2, p2 = plan.sample(rng)
        v1 = plan.evaluate(F, b, w1, p1) / g
        v2 = plan.evaluate(F, b, w2, p2) / g
        star_vals[i] = v1 * v1
        circ_vals[i] = v1 * v2
    def rec(vals):
        se = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        return SemiNormEstimate(float(np.mean(vals)), se, samples)
    return rec(star_vals), rec(circ_vals)


def variance_bound(
    gamma_prime: float, K: int, L: int, norm_star: float, norm_circ: float
) -> float:
    """(gamma'^2 / K) (norm_star^2 / L + (1 - 1/L) norm_circ^2)."""
    if K < 1 or L < 1:
        raise ValueError("K and L must be at least 1")
    ns2 = float(norm_star) ** 2
    nc2 = float(norm_circ) ** 2
    return (gamma_prime**2 / K) * (ns2 / L + (1.0 - 1.0 / L) * nc2)
