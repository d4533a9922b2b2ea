"""Rate maximisation under the radar interference cap.

Coordinate ascent over transmit powers with single-relay (``greedy1``) or
two-relay (``greedy2``) update blocks, plus an exhaustive grid oracle.

Every 1-D update scans its coordinate, keeps the best feasible scan point
and refines it by golden-section search between the neighbouring scan
points (bisecting onto the constraint boundary where a neighbour is
infeasible).

Non-coherent mode: the constraint is affine in every power. Because the
rate increases with ``P_S``, each relay update lets the source absorb the
interference budget the relay frees (or gives up what the relay takes),
i.e. the source power is set to its best response inside every relay
line search.

Coherent mode: line searches run in amplitude variables ``p = sqrt(P)``
and a point counts as feasible when its best in-phase/anti-phase partition
keeps the interference under the cap. The reported partition is the best
of the complete greedy search, the tracked partition and exact enumeration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .interference import PhasePartition, coherent_terms, interference_noncoherent_simplified
from .kernels import SubsetModel
from .model import ChannelRealization, PowerAllocation, ScenarioConfig
from .partition import (PartitionInstance, PartitionSolution, instance_from_terms, partition_to_phases, solve_cga,
                        to_phase_partition)
from .rate import achievable_rate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
SCAN_POINTS = 512
BLOCK_GRID = 33
BISECT_STEPS = 26
ORACLE_MAX_DIMS = 5
ORACLE_ROUNDS = 10

MODES = ("noncoherent", "coherent")
SCHEDULES = ("greedy1", "greedy2", "grid_oracle")
OBJECTIVES = ("exact", "simplified")


class InfeasiblePointError(ValueError):
    """The current point violates the interference constraint."""


@dataclass(frozen=True)
class SolverOptions:
    mode: str = "noncoherent"
    schedule: str = "greedy1"
    block_size: int | None = None
    scalar_tol: float = 1e-6
    outer_tol: float = 1e-7
    max_outer_iters: int = 200
    grid_points: int = 41
    objective: str = "exact"
    refine: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.block_size is None:
            object.__setattr__(self, "block_size", 2 if self.schedule == "greedy2" else 1)
        if self.block_size not in (1, 2):
            raise ValueError("block_size must be 1 or 2")
        if not (self.scalar_tol > 0 and self.outer_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.grid_points < 2:
            raise ValueError("max_outer_iters >= 1 and grid_points >= 2 required")

    def replace(self, **changes) -> "SolverOptions":
        if "schedule" in changes and "block_size" not in changes:
            changes["block_size"] = None
        return SolverOptions(**{**self.__dict__, **changes})


@dataclass
class SolveResult:
    allocation: PowerAllocation
    subset: tuple[int, ...]
    rate: float
    interference: float
    objective: float
    iterations: int
    objective_trace: list[float]
    mode: str
    schedule: str
    partition: PhasePartition | None = None
    phases: dict[int, float] | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "allocation": self.allocation.to_dict(),
            "rate": self.rate,
            "interference": self.interference,
            "objective": self.objective,
            "iterations": self.iterations,
            "objective_trace": list(self.objective_trace),
            "mode": self.mode,
            "schedule": self.schedule,
            "partition": None if self.partition is None else self.partition.to_dict(),
            "phases": None if self.phases is None else {str(k): v for k, v in self.phases.items()},
            "diagnostics": self.diagnostics,
        }


def golden_section_max(f, lo, hi, tol: float = 1e-6):
    """Batched golden-section maximisation.

    ``lo``/``hi`` are arrays of bracket ends, one independent 1-D problem per
    entry; ``f`` maps an array of abscissae (one per problem) to values.
    Brackets shrink to ``tol`` times their initial width. The best point
    seen (endpoints included) is returned, so monotone functions land on
    the right edge.
    """
    lo = np.array(lo, dtype=float, ndmin=1)
    hi = np.array(hi, dtype=float, ndmin=1)
    best_x = lo.copy()
    best_f = f(lo)
    f_hi = f(hi)
    take = f_hi > best_f
    best_x[take], best_f[take] = hi[take], f_hi[take]

    steps = max(1, math.ceil(math.log(tol) / math.log(INV_PHI)))
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for x, fx in ((c, fc), (d, fd)):
        take = fx > best_f
        best_x[take], best_f[take] = x[take], fx[take]
    for _ in range(steps):
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        c_new = hi - INV_PHI * (hi - lo)
        d_new = lo + INV_PHI * (hi - lo)
        probe = np.where(left, c_new, d_new)
        fp = f(probe)
        c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        take = fp > best_f
        best_x[take], best_f[take] = probe[take], fp[take]
    return best_x, best_f


def _bisect(slack, good, bad):
    """Shrink brackets ``(good, bad)`` onto the feasibility boundary; returns the feasible end."""
    good, bad = good.copy(), bad.copy()
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (good + bad)
        ok = slack(mid) >= 0
        good = np.where(ok, mid, good)
        bad = np.where(ok, bad, mid)
    return good


def feasible_runs(probe, ub, anchor):
    """Feasible sub-interval of ``[0, ub]`` for a batch of 1-D constraints.

    ``probe(U)`` maps an ``(b, n)`` array of abscissae to ``(slack, score)``;
    points are feasible where slack >= 0 and ``score`` may be None. The
    interval is located on a scan and its ends bisected. Rows with a finite
    ``anchor`` get the run containing it. Other rows get the run holding the
    best-scoring feasible scan point, or the run reaching furthest right
    when there is no score. Returns ``(lo, hi, ok)``.
    """
    ub = np.asarray(ub, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    b = len(ub)
    grid = ub[:, None] * np.linspace(0.0, 1.0, SCAN_POINTS)
    slack_grid, score_grid = probe(grid)
    feasible = slack_grid >= 0
    idx = np.arange(SCAN_POINTS)
    rows = np.arange(b)
    has_anchor = np.isfinite(anchor)
    ok = has_anchor | feasible.any(axis=1)

    if score_grid is None:
        chosen = np.where(feasible, idx, -1).max(axis=1)
    else:
        chosen = np.argmax(np.where(feasible, score_grid, -np.inf), axis=1)
    pivot = np.where(has_anchor, anchor, grid[rows, np.maximum(chosen, 0)])

    bad_left = np.where(~feasible & (grid < pivot[:, None]), idx, -1).max(axis=1)
    bad_right = np.where(~feasible & (grid > pivot[:, None]), idx, SCAN_POINTS).min(axis=1)

    lo_bad = grid[rows, np.maximum(bad_left, 0)]
    lo_good = np.minimum(grid[rows, np.minimum(bad_left + 1, SCAN_POINTS - 1)], pivot)
    hi_bad = grid[rows, np.minimum(bad_right, SCAN_POINTS - 1)]
    hi_good = np.maximum(grid[rows, np.maximum(bad_right - 1, 0)], pivot)

    good = np.stack([lo_good, hi_good], axis=1)
    bad = np.stack([lo_bad, hi_bad], axis=1)
    edges = _bisect(lambda U: probe(U)[0], good, bad)
    lo = np.where(bad_left < 0, 0.0, edges[:, 0])
    hi = np.where(bad_right >= SCAN_POINTS, ub, edges[:, 1])
    return lo, hi, ok


class _CoordinateAscent:
    """Mutable solver state: point ``x`` (powers), partition signs, trace."""

    def __init__(self, model: SubsetModel, opts: SolverOptions):
        self.model = model
        self.opts = opts
        self.exact = opts.objective == "exact"
        self.coherent = opts.mode == "coherent"
        self.i_bar = model.i_bar
        self.tol = 1e-12 * max(1.0, self.i_bar)
        self.signs = np.ones(model.m)
        self.x = np.zeros(model.m + 1)

    # -- evaluation -------------------------------------------------------
    def f(self, X):
        return self.model.objective(X, self.exact)

    def interference(self, X):
        if self.coherent:
            return self.model.min_partition_interference(X)[0]
        return self.model.noncoherent(X)

    def penalised(self, X):
        val, level = self.model.evaluate(X, self.exact, self.coherent)
        return np.where(self.i_bar - level >= -self.tol, val, -np.inf)

    def probe(self, build):
        """Slack and objective of ``build(U)``, shaped like ``U``."""
        def run(U):
            val, level = self.model.evaluate(build(U), self.exact, self.coherent)
            return (self.i_bar - level).reshape(U.shape), val.reshape(U.shape)
        return run

    def current_value(self) -> float:
        return float(self.f(self.x[None])[0])

    def _rows(self, n):
        return np.tile(self.x, (n, 1))

    # -- partition --------------------------------------------------------
    def repartition(self) -> None:
        abs_a, abs_b = self.model.magnitudes(self.x[None])
        sol = solve_cga(PartitionInstance((abs_a[0], *abs_b[0])))
        if 0 not in sol.set1:
            sol = sol.swapped()
        signs = np.array([1.0 if i + 1 in sol.set1 else -1.0 for i in range(self.model.m)])
        old = (abs_a[0] + abs_b[0] @ self.signs) ** 2
        new = (abs_a[0] + abs_b[0] @ signs) ** 2
        if new <= old or old > self.i_bar:
            self.signs = signs

    # -- initial point ----------------------------------------------------
    def initialise(self) -> None:
        box = self.model.box
        if not self.coherent:
            level = self.model.noncoherent(box[None])[0]
            scale = 1.0 if level <= self.i_bar else self.i_bar / level
            self.x = scale * box
            self.x[0] = self.model.best_source_power(self.x[None, 1:])[0]
            return

        def slack(U):
            X = (U.reshape(-1, 1) ** 2) * box
            return (self.i_bar - self.interference(X)).reshape(U.shape), None

        _, root, _ = feasible_runs(slack, np.ones(1), np.array([np.nan]))
        self.x = root[0] ** 2 * box
        self.repartition()

    # -- coordinate steps -------------------------------------------------
    def _accept(self, X_best) -> None:
        # judged with the same evaluation as the trace; the batch kernel may differ in the last bits
        if self.f(X_best[None])[0] > self.current_value():
            self.x = X_best

    def _candidates(self, rows, col, U):
        """Points ``rows`` with column ``col`` replaced by each entry of ``U`` (one row of ``U`` per base row).

        Coherent searches run in square-root power; non-coherent ones move
        the source to its best response whenever a relay changes.
        """
        n = U.shape[1] if U.ndim == 2 else 1
        X = np.repeat(rows, n, axis=0)
        X[:, col] = (U ** 2 if self.coherent else U).ravel()
        if not self.coherent and col > 0:
            X[:, 0] = self.model.best_source_power(X[:, 1:])
        return X

    def _upper(self, rows, col):
        m = self.model
        if self.coherent:
            return np.full(len(rows), math.sqrt(m.box[col]))
        if col == 0:
            coeff = m.g_sp
            used = rows[:, 1:] @ m.c_relay
        else:
            coeff = m.c_relay[col - 1]
            used = rows[:, 1:] @ m.c_relay - coeff * rows[:, col]
        if coeff == 0:
            return np.full(len(rows), m.box[col])
        return np.clip((self.i_bar - used) / coeff, 0.0, m.box[col])

    def _line_search(self, build, ub):
        """Maximise along a batch of lines ``build(U)``, ``U`` in ``[0, ub]`` per row.

        A scan picks the best feasible point; golden-section search then
        refines between its neighbouring scan points, with an infeasible
        neighbour replaced by the bisected constraint boundary. Rows with no
        feasible scan point get value ``-inf``.
        """
        probe = self.probe(build)
        b = len(ub)
        rows = np.arange(b)
        grid = ub[:, None] * np.linspace(0.0, 1.0, SCAN_POINTS)
        slack, val = probe(grid)
        feasible = slack >= -self.tol
        val = np.where(feasible, val, -np.inf)
        best = np.argmax(val, axis=1)
        best_u, best_f = grid[rows, best], val[rows, best]
        left, right = np.maximum(best - 1, 0), np.minimum(best + 1, SCAN_POINTS - 1)
        lo, hi = grid[rows, left], grid[rows, right]
        lo_bad, hi_bad = ~feasible[rows, left], ~feasible[rows, right]
        if lo_bad.any() or hi_bad.any():
            start = np.stack([best_u, best_u], axis=1)
            edges = _bisect(lambda U: probe(U)[0] + self.tol, start, np.stack([lo, hi], axis=1))
            lo, hi = np.where(lo_bad, edges[:, 0], lo), np.where(hi_bad, edges[:, 1], hi)
        tol = min(0.5, self.opts.scalar_tol * (SCAN_POINTS - 1) / 2)
        u, fu = golden_section_max(lambda t: self.penalised(build(t[:, None])), lo, hi, tol)
        keep = best_f >= fu
        return np.where(keep, best_u, u), np.where(keep, best_f, fu)

    def _search_rows(self, rows, col) -> None:
        """Best line-search result of ``col`` over the base points ``rows``."""
        u, fu = self._line_search(lambda U: self._candidates(rows, col, U), self._upper(rows, col))
        best = int(np.argmax(fu))
        if np.isfinite(fu[best]):
            self._accept(self._candidates(rows[best : best + 1], col, u[best : best + 1])[0])

    def step_single(self, col: int) -> None:
        if not self.coherent and col == 0:
            # the objective increases in the source power, so its best response is exact
            X = self.x.copy()
            X[0] = self.model.best_source_power(X[None, 1:])[0]
            if self.penalised(X[None])[0] > -np.inf:
                self._accept(X)
            return
        self._search_rows(self._rows(1), col)

    def step_pair(self, col: int, other: int) -> None:
        """Joint update of two relay powers: outer one on a grid, inner one by line search."""
        steps = np.linspace(0.0, 1.0, BLOCK_GRID)
        rows = self._rows(BLOCK_GRID)
        if self.coherent:
            rows[:, col] = (steps * math.sqrt(self.model.box[col])) ** 2
        else:
            base = self._rows(1)
            base[:, other] = 0.0
            rows[:, other] = 0.0
            rows[:, col] = steps * self._upper(base, col)[0]
        self._search_rows(rows, other)

    # -- outer loop -------------------------------------------------------
    def run(self) -> tuple[list[float], int]:
        trace = [self.current_value()]
        relays = list(range(1, self.model.m + 1))
        iterations = 0
        for iterations in range(1, self.opts.max_outer_iters + 1):
            if self.coherent:
                self.repartition()
            self.step_single(0)
            if self.opts.block_size == 1:
                for col in relays:
                    self.step_single(col)
            else:
                for i in range(0, len(relays), 2):
                    if i + 1 < len(relays):
                        self.step_pair(relays[i], relays[i + 1])
                    else:
                        self.step_single(relays[i])
            value = self.current_value()
            gain = value - trace[-1]
            trace.append(value)
            if gain < self.opts.outer_tol * (1.0 + abs(trace[-2])):
                break
        return trace, iterations


def _finish(ch, cfg, subset, opts, state: _CoordinateAscent, trace, iterations, extra=None) -> SolveResult:
    subset = state.model.subset
    alloc = PowerAllocation.from_vector(np.clip(state.x, 0.0, state.model.box), subset)
    partition = phases = None
    if opts.mode == "coherent":
        terms = coherent_terms(ch, cfg, subset, alloc)
        model = state.model
        exact_signs = model.sign_patterns[:, model.min_partition_interference(state.x[None])[1][0]]
        candidates = [to_phase_partition(solve_cga(instance_from_terms(terms)), terms)]
        for signs in (state.signs, exact_signs):
            candidates.append(PhasePartition.from_sets(terms, [k for k, s in zip(subset, signs) if s > 0],
                                                       [k for k, s in zip(subset, signs) if s < 0]))
        partition = min(candidates, key=lambda p: p.interference)
        positions = {k: i + 1 for i, k in enumerate(subset)}
        phase_sol = PartitionSolution((0, *(positions[k] for k in partition.in_phase)),
                                      tuple(positions[k] for k in partition.anti_phase), abs(partition.residual))
        phases = dict(partition_to_phases(phase_sol, terms).phi)
        interference = partition.interference
    else:
        interference = interference_noncoherent_simplified(ch, cfg, subset, alloc)
    rate = achievable_rate(ch, cfg, subset, alloc).total_rate
    objective = float(state.model.objective(state.x[None], state.exact)[0])
    diagnostics = {
        "objective_kind": opts.objective,
        "exact_inner_sum": float(state.model.objective(state.x[None], True)[0]),
        "constraint_slack": cfg.i_bar - interference,
    }
    diagnostics.update(extra or {})
    return SolveResult(alloc, tuple(subset), rate, interference, objective, iterations, trace,
                       opts.mode, opts.schedule, partition, phases, diagnostics)


def _start(ch, cfg, subset, opts) -> _CoordinateAscent:
    return _CoordinateAscent(SubsetModel(ch, cfg, subset), opts)


def solve_coordinate_ascent(ch: ChannelRealization, cfg: ScenarioConfig, subset, opts: SolverOptions,
                            start: np.ndarray | None = None) -> SolveResult:
    """Maximise the rate over the powers of ``subset`` by coordinate ascent.

    ``start`` (``[P_S, P_R...]``) overrides the default initial point, which
    is the largest feasible uniform scaling of the power caps.
    """
    t0 = time.perf_counter()
    state = _start(ch, cfg, subset, opts)
    if start is None:
        state.initialise()
    else:
        state.x = np.asarray(start, dtype=float).copy()
        if state.coherent:
            state.repartition()
        if np.any(state.i_bar - state.interference(state.x[None]) < -state.tol):
            raise InfeasiblePointError("starting point violates the interference constraint")
    trace, iterations = state.run()
    return _finish(ch, cfg, subset, opts, state, trace, iterations,
                   {"solve_seconds": time.perf_counter() - t0})


def feasible_interval(mode: str, ch: ChannelRealization, cfg: ScenarioConfig, subset, alloc: PowerAllocation,
                      var, partition: PhasePartition | None = None) -> tuple[float, float]:
    """Range of one power (``"p_s"`` or a relay index) keeping the constraint, others fixed.

    Coherent mode uses the given partition, or the one found by the complete
    greedy search at ``alloc``.
    """
    opts = SolverOptions(mode=mode)
    state = _start(ch, cfg, subset, opts)
    subset = state.model.subset
    state.x = np.array([alloc.p_s, *alloc.relay_powers(subset)])
    col = 0 if var == "p_s" else subset.index(var) + 1
    if state.coherent:
        if partition is None:
            state.repartition()
        else:
            state.signs = np.array(partition.signs(subset))
    base = state._rows(1)
    level = (state.model.residual(base, state.signs) ** 2 if state.coherent
             else state.interference(base))[0]
    if state.i_bar - level < -state.tol:
        raise InfeasiblePointError("current allocation violates the interference constraint")
    if not state.coherent:
        m = state.model
        coeff = m.g_sp if col == 0 else m.c_relay[col - 1]
        used = m.noncoherent(base)[0] - coeff * base[0, col]
        hi = m.box[col] if coeff == 0 else min(m.box[col], max(0.0, (cfg.i_bar - used) / coeff))
        return 0.0, float(hi)

    signs = state.signs

    def slack(U):
        X = np.repeat(base, U.size, axis=0)
        X[:, col] = U.ravel() ** 2
        return (state.i_bar - state.model.residual(X, signs) ** 2).reshape(U.shape), None

    lo, hi, _ = feasible_runs(slack, np.sqrt(state.model.box[col : col + 1]), np.sqrt(base[:, col]))
    return float(lo[0] ** 2), float(hi[0] ** 2)


def _oracle_grid(model: SubsetModel, opts: SolverOptions, exact: bool):
    """Objective and interference on the full coherent grid (independent of the threshold)."""
    axes = np.array([np.linspace(0.0, b, opts.grid_points) for b in model.box])
    values, interference = model.coherent_grid(axes, exact)
    return axes, values, interference


def _channel_key(ch: ChannelRealization) -> int:
    parts = (ch.h_sr, ch.h_rd, ch.h_rp, ch.h_rr, np.array([ch.h_sd, ch.h_sp]))
    return hash(b"".join(np.ascontiguousarray(p).tobytes() for p in parts))


def solve_grid_oracle(ch: ChannelRealization, cfg: ScenarioConfig, subset, opts: SolverOptions,
                      cache: dict | None = None) -> SolveResult:
    """Exhaustive search over a uniform power grid, then coordinate-ascent refinement.

    The refinement alternates single and pair update blocks until neither improves.

    Non-coherent mode grids the relay powers only: the rate increases with
    ``P_S``, so the best source power for each relay grid point is the
    largest feasible one, computed exactly. Coherent mode grids every power
    and takes the exact best phase partition at each point.

    ``cache`` (a dict) lets repeated calls that differ only in the threshold
    reuse the coherent grid evaluation.
    """
    t0 = time.perf_counter()
    model = SubsetModel(ch, cfg, subset)
    if model.m + 1 > ORACLE_MAX_DIMS:
        raise ValueError(f"grid oracle limited to {ORACLE_MAX_DIMS} power variables")
    exact = opts.objective == "exact"
    g = opts.grid_points
    if opts.mode == "noncoherent":
        axes = [np.linspace(0.0, b, g) for b in model.box[1:]]
        P_r = np.stack([x.ravel() for x in np.meshgrid(*axes, indexing="ij")], axis=1)
        X = np.column_stack([model.best_source_power(P_r), P_r])
        values = model.evaluate(X, exact, False)[0]
        vals = np.where(P_r @ model.c_relay <= cfg.i_bar, values, -np.inf)
        i = int(np.argmax(vals))
        best_f, best_x = vals[i], X[i]
    else:
        key = (_channel_key(ch), model.subset, g, exact, cfg.replace(i_bar=1.0))
        if cache is not None and key in cache:
            axes, values, interference = cache[key]
        else:
            axes, values, interference = _oracle_grid(model, opts, exact)
            if cache is not None:
                cache[key] = (axes, values, interference)
        vals = np.where(interference <= cfg.i_bar, values, -np.inf)
        i = int(np.argmax(vals))
        best_f = vals[i]
        best_x = np.array([axes[d][c] for d, c in enumerate(np.unravel_index(i, (g,) * (model.m + 1)))])

    refine_opts = opts.replace(schedule="greedy1")
    state = _CoordinateAscent(model, refine_opts)
    state.x = best_x.copy()
    if state.coherent:
        patterns = model.sign_patterns
        state.signs = patterns[:, model.min_partition_interference(best_x[None])[1][0]].copy()
    if opts.refine:
        trace, iterations = state.run()
        if model.m >= 2:
            # pair moves can slide along an active constraint where single moves stall
            pair_opts = opts.replace(schedule="greedy2")
            for _ in range(ORACLE_ROUNDS):
                before = trace[-1]
                for step_opts in (pair_opts, refine_opts):
                    state.opts = step_opts
                    more, count = state.run()
                    trace += more[1:]
                    iterations += count
                if trace[-1] - before < opts.outer_tol * (1.0 + abs(before)):
                    break
    else:
        trace, iterations = [float(best_f)], 0
    result = _finish(ch, cfg, subset, opts, state, trace, iterations,
                     {"grid_best": float(best_f), "solve_seconds": time.perf_counter() - t0})
    return result


def solve(ch: ChannelRealization, cfg: ScenarioConfig, subset, opts: SolverOptions, cache: dict | None = None) -> SolveResult:
    if opts.schedule == "grid_oracle":
        return solve_grid_oracle(ch, cfg, subset, opts, cache)
    return solve_coordinate_ascent(ch, cfg, subset, opts)
