"""Interference power at the radar receiver, non-coherent and coherent.

In the coherent case every active relay rotates its forwarded signal by a
phase ``phi_k``; the contributions then add as phasors at the radar::

    I = |A + sum_k B_k exp(-1j * phi_k)|**2

Restricting each rotated phasor to point along ``A`` (in-phase) or opposite
it (anti-phase) turns the phase problem into two-way number partitioning of
the magnitudes ``{|A|, |B_k|}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .model import ChannelRealization, PowerAllocation, ScenarioConfig, check_subset
from .rate import amplification_gain, self_interference

TWO_PI = 2.0 * math.pi


def canonical_phase(phi: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    out = math.fmod(phi, TWO_PI)
    if out < 0:
        out += TWO_PI
    return 0.0 if out >= TWO_PI else out


def interference_noncoherent_full(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation) -> float:
    subset = check_subset(subset, ch.relay_count)
    zeta = cfg.zeta_vector
    total = abs(ch.h_sp) ** 2 * alloc.p_s
    for k in subset:
        g_rp = abs(ch.h_rp[k]) ** 2
        received = (abs(ch.h_sr[k]) ** 2 * alloc.p_s
                    + self_interference(ch, cfg, subset, alloc, k)
                    + cfg.noise_power_relay)
        gain = amplification_gain(ch, cfg, subset, alloc, k)
        total += g_rp * zeta[k] * alloc.p_r[k] + gain ** 2 * g_rp * alloc.p_r[k] * received
    return total


def interference_noncoherent_simplified(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation) -> float:
    """Same quantity as the full form after cancelling ``G_k**2`` against its own normalisation."""
    subset = check_subset(subset, ch.relay_count)
    zeta = cfg.zeta_vector
    return abs(ch.h_sp) ** 2 * alloc.p_s + sum(
        abs(ch.h_rp[k]) ** 2 * alloc.p_r[k] * (1.0 + zeta[k]) for k in subset)


def noncoherent_coefficients(ch: ChannelRealization, cfg: ScenarioConfig, subset) -> tuple[float, dict[int, float]]:
    """Coefficients of the (affine) non-coherent interference in ``P_S`` and each ``P_R``."""
    zeta = cfg.zeta_vector
    return abs(ch.h_sp) ** 2, {k: abs(ch.h_rp[k]) ** 2 * (1.0 + zeta[k]) for k in subset}


@dataclass(frozen=True)
class CoherentTerms:
    """Phasors seen at the radar before any relay phase rotation."""

    a_term: complex
    b_terms: dict[int, complex]

    @property
    def subset(self) -> tuple[int, ...]:
        return tuple(self.b_terms)

    @property
    def abs_a(self) -> float:
        return abs(self.a_term)

    @property
    def phase_a(self) -> float:
        return cmath.phase(self.a_term)

    def abs_b(self, k: int) -> float:
        return abs(self.b_terms[k])

    def phase_b(self, k: int) -> float:
        return cmath.phase(self.b_terms[k])


def coherent_terms(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation) -> CoherentTerms:
    """Aggregate direct term ``A`` and per-relay forwarded terms ``B_k``.

    Relay noise enters each ``B_k`` once, as ``sigma_k (1+j)/sqrt(2)``.
    """
    subset = check_subset(subset, ch.relay_count)
    zeta = cfg.zeta_vector
    sigma = math.sqrt(cfg.noise_power_relay)
    a_term = ch.h_sp * math.sqrt(alloc.p_s) + sum(
        ch.h_rp[k] * math.sqrt(zeta[k] * alloc.p_r[k]) for k in subset)
    b_terms = {}
    for k in subset:
        inner = (ch.h_sr[k] * math.sqrt(alloc.p_s)
                 + sum(ch.h_rr[i, k] * math.sqrt(zeta[i] * alloc.p_r[i]) for i in subset)
                 + sigma * (1 + 1j) / math.sqrt(2.0))
        gain = amplification_gain(ch, cfg, subset, alloc, k)
        b_terms[k] = complex(inner * gain * ch.h_rp[k] * math.sqrt(alloc.p_r[k]))
    return CoherentTerms(complex(a_term), b_terms)


@dataclass(frozen=True)
class PhaseAssignment:
    phi: Mapping[int, float]

    def __post_init__(self):
        object.__setattr__(self, "phi", {k: canonical_phase(v) for k, v in self.phi.items()})

    def delays(self, sampling_frequency: float) -> dict[int, float]:
        """Relay delays in seconds equivalent to the phase rotations."""
        return {k: v / (TWO_PI * sampling_frequency) for k, v in self.phi.items()}

    @classmethod
    def from_delays(cls, delays: Mapping[int, float], sampling_frequency: float) -> "PhaseAssignment":
        return cls({k: TWO_PI * sampling_frequency * d for k, d in delays.items()})


def _rotated(terms: CoherentTerms, phases: PhaseAssignment) -> list[complex]:
    if set(phases.phi) != set(terms.b_terms):
        raise ValueError("phase assignment does not match the relay subset")
    return [terms.a_term] + [b * cmath.exp(-1j * phases.phi[k]) for k, b in terms.b_terms.items()]


def interference_coherent(terms: CoherentTerms, phases: PhaseAssignment) -> float:
    return abs(sum(_rotated(terms, phases))) ** 2


def interference_coherent_expanded(terms: CoherentTerms, phases: PhaseAssignment) -> float:
    """Pair expansion ``sum |z_i|**2 + 2 sum_{i<k} Re(z_i conj(z_k))`` of the coherent interference.

    Products and sums are exact, so the expansion stays accurate when the
    phasors nearly cancel.
    """
    parts = [(Fraction(z.real), Fraction(z.imag)) for z in _rotated(terms, phases)]
    total = sum(x * x + y * y for x, y in parts)
    for k in range(len(parts)):
        for i in range(k + 1, len(parts)):
            total += 2 * (parts[k][0] * parts[i][0] + parts[k][1] * parts[i][1])
    return float(total)


def _pair_sums(terms: CoherentTerms, phases: PhaseAssignment, trig) -> dict[int, float]:
    mags = {0: terms.abs_a} | {k + 1: terms.abs_b(k) for k in terms.subset}
    angles = {0: terms.phase_a} | {k + 1: terms.phase_b(k) - phases.phi[k] for k in terms.subset}
    out = {}
    for k in terms.subset:
        key = k + 1
        out[k] = 2.0 * sum(mags[key] * mags[i] * trig(angles[key] - angles[i])
                           for i in mags if i != key)
    return out


def phase_gradient(terms: CoherentTerms, phases: PhaseAssignment) -> dict[int, float]:
    """Partial derivatives of the coherent interference in each relay phase."""
    if set(phases.phi) != set(terms.b_terms):
        raise ValueError("phase assignment does not match the relay subset")
    return _pair_sums(terms, phases, math.sin)


def phase_hessian_diag(terms: CoherentTerms, phases: PhaseAssignment) -> dict[int, float]:
    """Second derivatives ``d2 I / d phi_k**2``; a negative entry rules out convexity."""
    if set(phases.phi) != set(terms.b_terms):
        raise ValueError("phase assignment does not match the relay subset")
    return {k: -v for k, v in _pair_sums(terms, phases, math.cos).items()}


@dataclass(frozen=True)
class PhasePartition:
    """Split of the active relays into in-phase and anti-phase groups.

    ``residual`` is ``|A| + sum(|B_k|, in_phase) - sum(|B_l|, anti_phase)``;
    the interference is its square. ``A`` always sits on the in-phase side.
    """

    in_phase: tuple[int, ...]
    anti_phase: tuple[int, ...]
    residual: float
    interference: float

    @classmethod
    def from_sets(cls, terms: CoherentTerms, in_phase, anti_phase) -> "PhasePartition":
        in_phase, anti_phase = tuple(sorted(in_phase)), tuple(sorted(anti_phase))
        if set(in_phase) & set(anti_phase) or set(in_phase) | set(anti_phase) != set(terms.subset):
            raise ValueError("partition must split the relay subset into two disjoint groups")
        residual = (terms.abs_a + sum(terms.abs_b(k) for k in in_phase)
                    - sum(terms.abs_b(k) for k in anti_phase))
        return cls(in_phase, anti_phase, residual, residual ** 2)

    def signs(self, subset) -> list[float]:
        return [1.0 if k in self.in_phase else -1.0 for k in subset]

    def to_dict(self) -> dict:
        return {"in_phase": list(self.in_phase), "anti_phase": list(self.anti_phase),
                "residual": self.residual, "interference": self.interference}


def interference_coherent_partition(terms: CoherentTerms, partition: PhasePartition) -> float:
    """Interference under in-phase/anti-phase regulation, from the magnitudes in ``terms``."""
    return PhasePartition.from_sets(terms, partition.in_phase, partition.anti_phase).interference
