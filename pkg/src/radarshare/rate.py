"""Amplify-and-forward gain and achievable rate of the relayed link."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ChannelRealization, PowerAllocation, ScenarioConfig, check_subset


@dataclass(frozen=True)
class RateBreakdown:
    per_relay_sinr_term: dict[int, float]
    total_rate: float
    gain: dict[int, float]

    @property
    def inner_sum(self) -> float:
        return sum(self.per_relay_sinr_term.values())


def self_interference(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation, k: int) -> float:
    """Residual distortion power reaching relay ``k`` from every active relay (itself included)."""
    zeta = cfg.zeta_vector
    return sum(zeta[j] * abs(ch.h_rr[j, k]) ** 2 * alloc.p_r[j] for j in subset)


def amplification_gain(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation, k: int) -> float:
    subset = check_subset(subset, ch.relay_count)
    if k not in subset:
        raise ValueError(f"relay {k} is not in the active subset {subset}")
    received = (alloc.p_s * abs(ch.h_sr[k]) ** 2
                + self_interference(ch, cfg, subset, alloc, k)
                + cfg.noise_power_relay)
    return received ** -0.5


def _summand(a: float, signal: float, denom: float) -> float:
    # a*b/(1+a+b) with b = signal/denom, written so denom == 0 is the b -> inf limit
    bottom = (1.0 + a) * denom + signal
    return a * signal / bottom if bottom > 0 else 0.0


def achievable_rate(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation) -> RateBreakdown:
    """Rate in bits/s/Hz of the multi-relay link; the direct S->D path is ignored."""
    subset = check_subset(subset, ch.relay_count)
    terms, gains = {}, {}
    for k in subset:
        a = alloc.p_r[k] * abs(ch.h_rd[k]) ** 2 / cfg.noise_power_dest
        signal = alloc.p_s * abs(ch.h_sr[k]) ** 2
        denom = self_interference(ch, cfg, subset, alloc, k) + cfg.noise_power_relay
        terms[k] = _summand(a, signal, denom)
        gains[k] = amplification_gain(ch, cfg, subset, alloc, k)
    return RateBreakdown(terms, math.log2(1.0 + sum(terms.values())), gains)


def simplified_rate_objective(ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation) -> float:
    """Inner sum of the rate with relay noise dropped from the SINR denominators.

    Only meaningful when self-interference dominates the relay noise; raises
    when some relay sees no self-interference at all.
    """
    subset = check_subset(subset, ch.relay_count)
    total = 0.0
    for k in subset:
        denom = self_interference(ch, cfg, subset, alloc, k)
        if denom <= 0:
            raise ValueError(f"relay {k} sees zero self-interference; the noise-free objective is undefined")
        a = alloc.p_r[k] * abs(ch.h_rd[k]) ** 2 / cfg.noise_power_dest
        total += _summand(a, alloc.p_s * abs(ch.h_sr[k]) ** 2, denom)
    return total
