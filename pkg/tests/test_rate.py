import itertools
import math

import numpy as np
import pytest

from oracles import gain_reference, make_channels, random_allocation, random_instance, rate_reference
from radarshare.model import PowerAllocation, ScenarioConfig
from radarshare.rate import achievable_rate, amplification_gain, simplified_rate_objective


def single_relay(h_sr=1.0, h_rd=1.0, h_rr=0.0, h_rp=1.0, h_sp=1.0):
    return make_channels([h_sr], [h_rd], [h_rp], h_sp, [[h_rr]])


def test_gain_noise_only():
    cfg = ScenarioConfig(relay_count=1, zeta=0.0)
    assert amplification_gain(single_relay(), cfg, [0], PowerAllocation(0.0, {0: 0.0}), 0) == 1.0


def test_gain_half():
    cfg = ScenarioConfig(relay_count=1, zeta=0.0)
    assert amplification_gain(single_relay(), cfg, [0], PowerAllocation(3.0, {0: 7.0}), 0) == pytest.approx(0.5)


def test_gain_rejects_inactive_relay(rng):
    ch, cfg, _, _ = random_instance(rng, k=3, subset=(0, 1))
    with pytest.raises(ValueError):
        amplification_gain(ch, cfg, (0, 1), PowerAllocation(1.0, {0: 1.0, 1: 1.0}), 2)


def test_gain_identity(rng):
    for _ in range(200):
        ch, cfg, subset, alloc = random_instance(rng)
        for k in subset:
            g = amplification_gain(ch, cfg, subset, alloc, k)
            bracket = alloc.p_s * abs(ch.h_sr[k]) ** 2 + cfg.noise_power_relay + sum(
                cfg.zeta_vector[j] * alloc.p_r[j] * abs(ch.h_rr[j, k]) ** 2 for j in subset)
            assert abs(g * g * bracket - 1.0) < 1e-12
            assert g == pytest.approx(gain_reference(ch, cfg, subset, alloc, k), rel=1e-14)


def test_zero_source_or_relay_power_gives_zero_rate(rng):
    ch, cfg, subset, alloc = random_instance(rng, k=3, subset=(0, 1, 2))
    assert achievable_rate(ch, cfg, subset, PowerAllocation(0.0, dict(alloc.p_r))).total_rate == 0.0
    assert achievable_rate(ch, cfg, subset, PowerAllocation(alloc.p_s, {k: 0.0 for k in subset})).total_rate == 0.0


def test_unit_snr_plug_in():
    cfg = ScenarioConfig(relay_count=1, zeta=0.0)
    out = achievable_rate(single_relay(), cfg, [0], PowerAllocation(1.0, {0: 1.0}))
    assert out.per_relay_sinr_term[0] == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert out.total_rate == pytest.approx(math.log2(4.0 / 3.0), rel=1e-15)


def test_matches_reference_transcription(rng):
    for _ in range(300):
        ch, cfg, subset, alloc = random_instance(rng, k=2, subset=(0, 1))
        out = achievable_rate(ch, cfg, subset, alloc)
        ref = rate_reference(ch, cfg, subset, alloc)
        assert abs(out.total_rate - ref) <= 1e-12 * max(1.0, ref)
        assert all(v >= 0 for v in out.per_relay_sinr_term.values())
        assert out.total_rate == pytest.approx(math.log2(1 + out.inner_sum), rel=1e-15)


def test_rate_nondecreasing_in_source_power(rng):
    for _ in range(50):
        ch, cfg, subset, alloc = random_instance(rng)
        rates = [achievable_rate(ch, cfg, subset, PowerAllocation(p, dict(alloc.p_r))).total_rate
                 for p in np.linspace(0, cfg.p_s_max, 25)]
        assert np.all(np.diff(rates) >= -1e-15)


def test_rate_nonincreasing_in_zeta(rng):
    for _ in range(50):
        ch, cfg, subset, alloc = random_instance(rng)
        lo = achievable_rate(ch, cfg, subset, alloc).total_rate
        bigger = cfg.replace(zeta=tuple(z * 1.7 + 0.01 for z in cfg.zeta_vector))
        assert achievable_rate(ch, bigger, subset, alloc).total_rate <= lo + 1e-15


def test_simplified_objective_zero_source():
    cfg = ScenarioConfig(relay_count=1, zeta=0.1)
    ch = single_relay(h_rr=1.0)
    assert simplified_rate_objective(ch, cfg, [0], PowerAllocation(0.0, {0: 5.0})) == 0.0


def test_simplified_objective_rejects_zero_self_interference():
    cfg = ScenarioConfig(relay_count=1, zeta=0.0)
    with pytest.raises(ValueError):
        simplified_rate_objective(single_relay(h_rr=1.0), cfg, [0], PowerAllocation(1.0, {0: 1.0}))


def test_simplified_close_when_self_interference_dominates(rng):
    cfg = ScenarioConfig(relay_count=3, zeta=10.0, p_s_max=100.0, p_r_max=100.0)
    checked = 0
    while checked < 20:
        ch, _, _, _ = random_instance(rng, k=3, subset=(0, 1, 2))
        alloc = PowerAllocation(100.0, {0: 100.0, 1: 100.0, 2: 100.0})
        residual = 1000.0 * (np.abs(ch.h_rr) ** 2).sum(axis=0)
        if residual.min() < 1000 * cfg.noise_power_relay:
            continue
        checked += 1
        exact = achievable_rate(ch, cfg, (0, 1, 2), alloc)
        simple = simplified_rate_objective(ch, cfg, (0, 1, 2), alloc)
        assert simple == pytest.approx(exact.inner_sum, rel=1e-3)


def test_simplified_grid_argmax_matches_exact(rng):
    cfg = ScenarioConfig(relay_count=2, zeta=10.0, p_s_max=100.0, p_r_max=100.0)
    levels = np.linspace(20.0, 100.0, 6)
    for _ in range(10):
        ch, _, _, _ = random_instance(rng, k=2, subset=(0, 1))
        best_simple = best_exact = None
        for p_s, p1, p2 in itertools.product(levels, repeat=3):
            alloc = PowerAllocation(p_s, {0: p1, 1: p2})
            residual = [sum(cfg.zeta_vector[j] * abs(ch.h_rr[j, k]) ** 2 * alloc.p_r[j] for j in (0, 1))
                        for k in (0, 1)]
            if min(residual) < 100 * cfg.noise_power_relay:
                continue
            s = simplified_rate_objective(ch, cfg, (0, 1), alloc)
            e = achievable_rate(ch, cfg, (0, 1), alloc).total_rate
            if best_simple is None or s > best_simple[0]:
                best_simple = (s, (p_s, p1, p2))
            if best_exact is None or e > best_exact[0]:
                best_exact = (e, (p_s, p1, p2))
        if best_simple is not None:
            assert best_simple[1] == best_exact[1]


def test_log_form_preserves_argmax(rng):
    ch, cfg, subset, _ = random_instance(rng, k=3, subset=(0, 1, 2))
    allocs = [random_allocation(rng, cfg, subset) for _ in range(50)]
    out = [achievable_rate(ch, cfg, subset, a) for a in allocs]
    assert np.argmax([o.total_rate for o in out]) == np.argmax([o.inner_sum for o in out])
