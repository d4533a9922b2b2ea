import itertools

import pytest

import radarshare.selection as selection
from oracles import make_channels
from radarshare.model import ScenarioConfig, generate_channels
from radarshare.optimizer import MODES, SolverOptions, solve
from radarshare.selection import MAX_RELAYS, select, select_multi, select_single


def scenario(k, seed, zeta=0.01):
    cfg = ScenarioConfig(relay_count=k, zeta=zeta).replace(p_max_db=20, i_bar_db=5)
    return generate_channels(cfg, seed), cfg


@pytest.mark.parametrize("mode", MODES)
def test_single_relay_network_mrs_equals_srs(mode):
    for seed in range(5):
        ch, cfg = scenario(1, seed)
        opts = SolverOptions(mode=mode)
        multi, single = select_multi(ch, cfg, opts), select_single(ch, cfg, opts)
        assert multi.subset == single.subset == (0,)
        assert multi.rate == single.rate


@pytest.mark.parametrize("mode", MODES)
def test_multi_is_best_explicit_subset(mode):
    for seed in range(4):
        ch, cfg = scenario(3, seed)
        opts = SolverOptions(mode=mode)
        multi = select_multi(ch, cfg, opts)
        rates = {s: solve(ch, cfg, s, opts).rate for n in (1, 2, 3) for s in itertools.combinations(range(3), n)}
        assert multi.rate == max(rates.values())
        assert multi.diagnostics["subsets_evaluated"] == 7
        assert multi.rate >= select_single(ch, cfg, opts).rate
        assert select(ch, cfg, opts, "all").subset == (0, 1, 2)


def test_dead_relay_is_not_selected():
    # relay 1 cannot hear the source yet interferes with the radar
    ch = make_channels([1.0, 0.0], [1.0, 1.0], [0.3, 0.3], 0.2, [[0.1, 0.1], [0.1, 0.1]])
    cfg = ScenarioConfig(relay_count=2, zeta=0.01, p_s_max=100.0, p_r_max=100.0, i_bar=2.0)
    for mode in MODES:
        res = select_multi(ch, cfg, SolverOptions(mode=mode))
        assert res.subset == (0,)


def test_tie_prefers_smaller_subset():
    ch = make_channels([1.0, 1.0], [1.0, 1.0], [0.3, 0.3], 0.2, [[0.0, 0.0], [0.0, 0.0]])
    cfg = ScenarioConfig(relay_count=2, zeta=0.0, i_bar=1e9)
    # two identical relays: the singletons tie and the first one wins
    assert select_single(ch, cfg, SolverOptions()).subset == (0,)


def test_pick_ties():
    def fake(subset, rate):
        return type("R", (), {"subset": subset, "rate": rate})()
    picked = selection._pick([fake((0, 1), 2.0), fake((1,), 2.0 * (1 - 1e-12)), fake((0,), 1.0)])
    assert picked.subset == (1,)
    assert selection._pick([fake((1,), 1.0), fake((0,), 1.0)]).subset == (0,)


def test_relay_count_guard():
    cfg = ScenarioConfig(relay_count=MAX_RELAYS + 1)
    with pytest.raises(ValueError):
        select_multi(generate_channels(cfg, 0), cfg, SolverOptions())
    ch, cfg = scenario(2, 0)
    with pytest.raises(ValueError):
        select(ch, cfg, SolverOptions(), "best")


def test_memo_shares_singleton_solves(monkeypatch):
    calls = []
    real = selection.solve

    def counting(ch, cfg, subset, opts, cache=None):
        calls.append(subset)
        return real(ch, cfg, subset, opts, cache)

    monkeypatch.setattr(selection, "solve", counting)
    ch, cfg = scenario(3, 2)
    memo = {}
    multi = select(ch, cfg, SolverOptions(), "mrs", memo=memo)
    single = select(ch, cfg, SolverOptions(), "srs", memo=memo)
    assert len(calls) == 7
    assert single.rate <= multi.rate
    select(ch, cfg, SolverOptions(mode="coherent"), "srs", memo=memo)
    assert len(calls) == 10
