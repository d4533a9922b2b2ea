"""Monte-Carlo sweeps comparing solvers on paired channel draws."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import ScenarioConfig, generate_channels
from .optimizer import MODES, SCHEDULES, SolverOptions
from .selection import SELECTIONS, select

log = logging.getLogger(__name__)

WORKERS_ENV = "RADARSHARE_WORKERS"
CSV_COLUMNS = ("swept_name", "swept_value", "mode", "schedule", "selection",
               "mean_rate_bps_hz", "stderr", "gap_pct", "mean_solve_ms")


@dataclass(frozen=True)
class Algorithm:
    mode: str
    schedule: str
    selection: str = "all"

    def __post_init__(self):
        if self.mode not in MODES or self.schedule not in SCHEDULES or self.selection not in SELECTIONS:
            raise ValueError(f"unknown algorithm {self}")

    @property
    def oracle(self) -> "Algorithm":
        return Algorithm(self.mode, "grid_oracle", self.selection)


DEFAULT_ALGORITHMS = tuple(Algorithm(m, s) for m in MODES for s in SCHEDULES)


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    swept_name: str
    swept_values: tuple[float, ...]
    trials: int = 200
    seed: int = 0
    algorithms: tuple[Algorithm, ...] = DEFAULT_ALGORITHMS
    grid_points: int = 21
    record_timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "swept_values", tuple(float(v) for v in self.swept_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.swept_values:
            raise ValueError("swept values must be nonempty")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for value in self.swept_values:
            self.config_at(value)

    def config_at(self, value: float) -> ScenarioConfig:
        key = self.swept_name
        if key == "relay_count":
            value = int(value)
        try:
            return self.base.replace(**{key: value})
        except (KeyError, TypeError):
            raise ValueError(f"unknown swept parameter {key!r}") from None

    def options(self, alg: Algorithm) -> SolverOptions:
        return SolverOptions(mode=alg.mode, schedule=alg.schedule, grid_points=self.grid_points)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        sweep = data.get("sweep", {"name": "i_bar_db", "values": [data.get("scenario", {}).get("i_bar_db", 0.0)]})
        algorithms = data.get("algorithms")
        return cls(
            base=ScenarioConfig.from_dict(data.get("scenario", {})),
            swept_name=sweep["name"],
            swept_values=tuple(sweep["values"]),
            trials=int(data.get("trials", 200)),
            seed=int(data.get("seed", 0)),
            algorithms=DEFAULT_ALGORITHMS if algorithms is None else tuple(Algorithm(**a) for a in algorithms),
            grid_points=int(data.get("grid_points", 21)),
            record_timing=bool(data.get("record_timing", True)),
        )


@dataclass(frozen=True)
class SweepRow:
    swept_name: str
    swept_value: float
    mode: str
    schedule: str
    selection: str
    mean_rate_bps_hz: float
    stderr: float
    gap_pct: float
    mean_solve_ms: float


@dataclass(frozen=True)
class SolveRecord:
    """Per-solve facts kept for auditing constraint satisfaction and traces."""

    trial: int
    swept_value: float
    algorithm: Algorithm
    rate: float
    interference: float
    i_bar: float
    in_box: bool
    trace_monotone: bool
    seconds: float


@dataclass
class TrialOutcome:
    trial: int
    records: list[SolveRecord] = field(default_factory=list)
    error: str | None = None


def run_trial(spec: SweepSpec, trial: int) -> TrialOutcome:
    """Every swept value and algorithm on the channel drawn with seed ``spec.seed + trial``."""
    out = TrialOutcome(trial)
    cache: dict = {}
    try:
        for value in spec.swept_values:
            cfg = spec.config_at(value)
            ch = generate_channels(cfg, spec.seed + trial)
            memo: dict = {}
            for alg in spec.algorithms:
                t0 = time.perf_counter()
                res = select(ch, cfg, spec.options(alg), alg.selection, cache, memo)
                seconds = time.perf_counter() - t0
                trace = np.asarray(res.objective_trace)
                out.records.append(SolveRecord(
                    trial, value, alg, res.rate, res.interference, cfg.i_bar,
                    res.allocation.within_bounds(cfg), bool(np.all(np.diff(trace) >= 0)), seconds))
    except Exception as exc:  # a failed solve drops the whole trial so comparisons stay paired
        out.records.clear()
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _outcomes(spec: SweepSpec, workers: int) -> list[TrialOutcome]:
    trials = range(spec.trials)
    if workers == 1:
        return [run_trial(spec, t) for t in trials]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, [spec] * spec.trials, trials))


def run_sweep(spec: SweepSpec, records: list | None = None, workers: int | None = None) -> list[SweepRow]:
    """Paired Monte-Carlo sweep; one row per swept value and algorithm.

    Gaps compare mean rates against the oracle of the same mode and
    selection (NaN when that oracle was not requested). Failed trials are
    logged and left out of every mean. ``records``, if given, receives a
    ``SolveRecord`` per solve. Parallelism defaults to the
    ``RADARSHARE_WORKERS`` environment variable.
    """
    outcomes = _outcomes(spec, workers or _workers())
    rates: dict = {}
    times: dict = {}
    for outcome in sorted(outcomes, key=lambda o: o.trial):
        if outcome.error is not None:
            log.warning("trial %d skipped: %s", outcome.trial, outcome.error)
            continue
        for r in outcome.records:
            rates.setdefault((r.swept_value, r.algorithm), []).append(r.rate)
            times.setdefault((r.swept_value, r.algorithm), []).append(r.seconds)
        if records is not None:
            records.extend(outcome.records)

    rows = []
    for value in spec.swept_values:
        for alg in spec.algorithms:
            sample = np.array(rates.get((value, alg), []))
            n = len(sample)
            mean = float(sample.mean()) if n else math.nan
            stderr = float(sample.std(ddof=1) / math.sqrt(n)) if n > 1 else (0.0 if n else math.nan)
            oracle = rates.get((value, alg.oracle))
            gap = math.nan
            if oracle is not None and n:
                best = float(np.mean(oracle))
                gap = 100.0 * (best - mean) / best if best > 0 else 0.0
            ms = 1000.0 * float(np.mean(times[(value, alg)])) if spec.record_timing and n else 0.0
            rows.append(SweepRow(spec.swept_name, value, alg.mode, alg.schedule, alg.selection,
                                 mean, stderr, gap, ms))
    return rows


def emit_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(row, c) for c in CSV_COLUMNS)])
    return buf.getvalue()


def parse_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(rec["swept_name"], float(rec["swept_value"]), rec["mode"], rec["schedule"],
                             rec["selection"], *(float(rec[c]) for c in CSV_COLUMNS[5:])))
    return rows


def emit_table(rows: list[SweepRow]) -> str:
    """Fixed-width text table, columns sized to their widest cell."""
    header = ("swept", "value", "mode", "schedule", "selection", "rate", "stderr", "gap %", "ms")
    cells = [header]
    for r in rows:
        cells.append((r.swept_name, f"{r.swept_value:g}", r.mode, r.schedule, r.selection,
                      f"{r.mean_rate_bps_hz:.4f}", f"{r.stderr:.4f}", f"{r.gap_pct:.4f}", f"{r.mean_solve_ms:.1f}"))
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    numeric = [False, True, False, False, False, True, True, True, True]
    lines = []
    for row in cells:
        parts = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(row, widths, numeric)]
        lines.append("  ".join(parts).rstrip())
    return "\n".join(lines) + "\n"
