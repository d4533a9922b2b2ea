"""Relay subset selection by exhaustive enumeration."""

from __future__ import annotations

import itertools
from dataclasses import replace

from .model import ChannelRealization, ScenarioConfig
from .optimizer import SolveResult, SolverOptions, solve

MAX_RELAYS = 10
SELECTIONS = ("mrs", "srs", "all")
# rates this close (relative) count as tied; the smaller subset then wins
TIE_RTOL = 1e-9


def _pick(results: list[SolveResult]) -> SolveResult:
    """Best rate; near-ties go to the smaller subset, then the lexicographically first."""
    top = max(r.rate for r in results)
    slack = TIE_RTOL * max(1.0, abs(top))
    tied = [r for r in results if r.rate >= top - slack]
    return min(tied, key=lambda r: (len(r.subset), r.subset))


def _solve_all(ch, cfg, subsets, opts, cache, memo) -> SolveResult:
    results = []
    for s in subsets:
        key = (s, opts)
        if memo is not None and key in memo:
            results.append(memo[key])
            continue
        result = solve(ch, cfg, s, opts, cache)
        if memo is not None:
            memo[key] = result
        results.append(result)
    best = _pick(results)
    diagnostics = dict(best.diagnostics)
    diagnostics["subsets_evaluated"] = len(results)
    diagnostics["subset_rates"] = {",".join(map(str, r.subset)): r.rate for r in results}
    return replace(best, diagnostics=diagnostics)


def select_multi(ch: ChannelRealization, cfg: ScenarioConfig, opts: SolverOptions,
                 cache: dict | None = None, memo: dict | None = None) -> SolveResult:
    """Solve every nonempty relay subset and keep the best."""
    k = ch.relay_count
    if k > MAX_RELAYS:
        raise ValueError(f"subset enumeration limited to {MAX_RELAYS} relays, got {k}")
    subsets = [c for size in range(1, k + 1) for c in itertools.combinations(range(k), size)]
    return _solve_all(ch, cfg, subsets, opts, cache, memo)


def select_single(ch: ChannelRealization, cfg: ScenarioConfig, opts: SolverOptions,
                  cache: dict | None = None, memo: dict | None = None) -> SolveResult:
    """Best single relay."""
    return _solve_all(ch, cfg, [(k,) for k in range(ch.relay_count)], opts, cache, memo)


def select(ch: ChannelRealization, cfg: ScenarioConfig, opts: SolverOptions, selection: str = "mrs",
           cache: dict | None = None, memo: dict | None = None) -> SolveResult:
    """``mrs``: best subset; ``srs``: best single relay; ``all``: every relay active.

    ``memo`` (a dict) shares per-subset solves between calls on the same
    channel and configuration.
    """
    if selection == "mrs":
        return select_multi(ch, cfg, opts, cache, memo)
    if selection == "srs":
        return select_single(ch, cfg, opts, cache, memo)
    if selection == "all":
        return _solve_all(ch, cfg, [tuple(range(ch.relay_count))], opts, cache, memo)
    raise ValueError(f"selection must be one of {SELECTIONS}")
