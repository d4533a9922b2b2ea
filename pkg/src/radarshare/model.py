"""Scenario configuration, channel draws and power-allocation containers."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if not x > 0:
        raise ValueError(f"linear_to_db needs a positive value, got {x!r}")
    return 10.0 * math.log10(x)


def _interval(value, name: str) -> tuple[float, float]:
    if np.isscalar(value):
        lo = hi = float(value)
    else:
        lo, hi = (float(v) for v in value)
    if lo < 0 or hi < lo:
        raise ValueError(f"{name} must be an interval 0 <= lo <= hi, got {value!r}")
    return lo, hi


@dataclass(frozen=True)
class ScenarioConfig:
    """Network parameters for one scenario, all in linear units.

    ``var_rr``, ``var_sp`` and ``var_rp`` are ``(lo, hi)`` ranges; each
    channel draw samples one variance per link uniformly inside the range.
    A scalar collapses the range to a point. ``zeta`` may be a scalar (same
    self-interference quality at every relay) or one value per relay.
    """

    relay_count: int = 4
    noise_power_relay: float = 1.0
    noise_power_dest: float = 1.0
    noise_power_pu: float = 1.0
    var_sr: float = 1.0
    var_rd: float = 1.0
    var_sd: float = 0.1
    var_rr: tuple[float, float] = (0.5, 1.0)
    var_sp: tuple[float, float] = (0.8, 1.0)
    var_rp: tuple[float, float] = (0.8, 1.0)
    zeta: float | tuple[float, ...] = 0.01
    p_s_max: float = 100.0
    p_r_max: float = 100.0
    i_bar: float = 1.0
    sampling_frequency: float = 1.0e6

    def __post_init__(self):
        if int(self.relay_count) != self.relay_count or self.relay_count < 1:
            raise ValueError("relay_count must be a positive integer")
        object.__setattr__(self, "relay_count", int(self.relay_count))
        for name in ("var_rr", "var_sp", "var_rp"):
            object.__setattr__(self, name, _interval(getattr(self, name), name))
        for name in ("var_sr", "var_rd", "var_sd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("noise_power_relay", "noise_power_dest", "noise_power_pu",
                     "p_s_max", "p_r_max", "i_bar", "sampling_frequency"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if np.isscalar(self.zeta):
            zeta = float(self.zeta)
            if zeta < 0:
                raise ValueError("zeta must be nonnegative")
        else:
            zeta = tuple(float(z) for z in self.zeta)
            if len(zeta) != self.relay_count:
                raise ValueError("per-relay zeta needs exactly relay_count entries")
            if min(zeta) < 0:
                raise ValueError("zeta must be nonnegative")
        object.__setattr__(self, "zeta", zeta)

    @property
    def zeta_vector(self) -> np.ndarray:
        if isinstance(self.zeta, tuple):
            return np.array(self.zeta)
        return np.full(self.relay_count, self.zeta)

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with some fields changed; ``*_db`` keys are converted to linear.

        ``p_max`` / ``p_max_db`` sets both power caps at once.
        """
        return dataclasses.replace(self, **_normalise_keys(changes))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioConfig":
        return cls(**_normalise_keys(dict(data)))


def _normalise_keys(data: dict) -> dict:
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    out = {}
    for key, value in data.items():
        if key.endswith("_db"):
            key = key[:-3]
            value = db_to_linear(float(value))
        if key == "p_max":
            out["p_s_max"] = out["p_r_max"] = value
            continue
        if key not in names:
            raise KeyError(f"unknown scenario field {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario from a JSON file (field names, or ``<field>_db``)."""
    with open(path) as fh:
        return ScenarioConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of every complex link coefficient.

    ``h_rr[j, k]`` is the link from relay ``j`` into relay ``k``; the
    diagonal holds the residual self-loop of each full-duplex relay.
    """

    h_sr: np.ndarray
    h_rd: np.ndarray
    h_sd: complex
    h_rp: np.ndarray
    h_sp: complex
    h_rr: np.ndarray

    def __post_init__(self):
        k = len(self.h_sr)
        if not (len(self.h_rd) == len(self.h_rp) == k and self.h_rr.shape == (k, k)):
            raise ValueError("inconsistent channel dimensions")
        for arr in (self.h_sr, self.h_rd, self.h_rp, self.h_rr, self.h_sd, self.h_sp):
            if not np.all(np.isfinite(arr)):
                raise ValueError("channel coefficients must be finite")
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def relay_count(self) -> int:
        return len(self.h_sr)

    def to_dict(self) -> dict:
        def pair(z):
            z = np.asarray(z)
            return {"re": z.real.tolist(), "im": z.imag.tolist()}

        return {f.name: pair(getattr(self, f.name)) for f in dataclasses.fields(self)}


def _cn(rng: np.random.Generator, variance, shape=()) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_channels(config: ScenarioConfig, seed: int) -> ChannelRealization:
    """Draw a Rayleigh-fading realization for ``config``.

    The draw order is fixed, so two configs that differ only in powers,
    thresholds or ``zeta`` see the same channels for the same seed.
    """
    rng = np.random.default_rng(seed)
    k = config.relay_count
    var_rr = rng.uniform(*config.var_rr, size=(k, k))
    var_sp = rng.uniform(*config.var_sp)
    var_rp = rng.uniform(*config.var_rp, size=k)
    return ChannelRealization(
        h_sr=_cn(rng, config.var_sr, k),
        h_rd=_cn(rng, config.var_rd, k),
        h_sd=complex(_cn(rng, config.var_sd)),
        h_rp=_cn(rng, var_rp, k),
        h_sp=complex(_cn(rng, var_sp)),
        h_rr=_cn(rng, var_rr, (k, k)),
    )


def check_subset(subset: Sequence[int], relay_count: int) -> tuple[int, ...]:
    """Validate a relay subset (0-based indices) and return it as a tuple."""
    out = tuple(int(i) for i in subset)
    if not out:
        raise ValueError("relay subset must be nonempty")
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate relay indices in {out}")
    if min(out) < 0 or max(out) >= relay_count:
        raise ValueError(f"relay indices {out} outside 0..{relay_count - 1}")
    return out


@dataclass(frozen=True)
class PowerAllocation:
    """Source power and per-relay powers for the active relays."""

    p_s: float
    p_r: Mapping[int, float] = field(default_factory=dict)

    @property
    def subset(self) -> tuple[int, ...]:
        return tuple(self.p_r)

    def relay_powers(self, subset: Sequence[int]) -> np.ndarray:
        try:
            return np.array([self.p_r[k] for k in subset], dtype=float)
        except KeyError as exc:
            raise ValueError(f"allocation has no power for relay {exc.args[0]}") from None

    def within_bounds(self, config: ScenarioConfig, slack: float = 0.0) -> bool:
        ok = -slack <= self.p_s <= config.p_s_max + slack
        return ok and all(-slack <= p <= config.p_r_max + slack for p in self.p_r.values())

    @classmethod
    def from_vector(cls, x: Sequence[float], subset: Sequence[int]) -> "PowerAllocation":
        """Build from ``[P_S, P_R(subset[0]), ...]``."""
        return cls(float(x[0]), {int(k): float(p) for k, p in zip(subset, x[1:])})

    def to_dict(self) -> dict:
        return {"p_s": self.p_s, "p_r": {str(k): v for k, v in self.p_r.items()}}
