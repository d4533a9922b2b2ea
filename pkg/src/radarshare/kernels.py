"""Vectorised objective/constraint evaluation for a fixed relay subset.

Points are rows ``[P_S, P_R(subset[0]), ..., P_R(subset[-1])]`` of a 2-D
array, so a whole grid or a batch of line-search candidates is evaluated
in one call.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numba import njit

from .model import ChannelRealization, ScenarioConfig, check_subset

MAX_PATTERN_RELAYS = 12


@njit(cache=True)
def _modulus(z):
    return np.sqrt(z.real * z.real + z.imag * z.imag)


@njit(cache=True)
def _min_residual(abs_a, abs_b, sums):
    """``min |abs_a + sum(+-abs_b)|`` over all sign patterns, built by doubling."""
    sums[0] = abs_a
    size = 1
    for k in range(len(abs_b)):
        for i in range(size):
            sums[size + i] = sums[i] - abs_b[k]
            sums[i] += abs_b[k]
        size *= 2
    best = np.inf
    for i in range(size):
        best = min(best, abs(sums[i]))
    return best


@njit(cache=True)
def _evaluate_rows(X, g_sr, g_rd, g_rp, zhat, sqrt_zeta, h_sp, h_rp, h_sr, h_rr,
                   noise_r, noise_d, noise_phasor, exact, coherent, c_relay, g_sp):
    n = X.shape[0]
    m = len(g_sr)
    obj = np.empty(n)
    level = np.empty(n)
    zsum = np.empty(m)
    leak = np.empty(m)
    abs_b = np.empty(m)
    sums = np.empty(1 << m)
    for r in range(n):
        p_s = X[r, 0]
        total = 0.0
        for k in range(m):
            z = 0.0
            for j in range(m):
                z += X[r, 1 + j] * zhat[j, k]
            zsum[k] = z
            a = X[r, 1 + k] * g_rd[k] / noise_d
            signal = p_s * g_sr[k]
            bottom = (1.0 + a) * (z + noise_r if exact else z) + signal
            if bottom > 0:
                total += a * signal / bottom
        obj[r] = total
        if not coherent:
            value = p_s * g_sp
            for j in range(m):
                value += X[r, 1 + j] * c_relay[j]
            level[r] = value
            continue
        root_s = np.sqrt(p_s)
        a_term = h_sp * root_s
        for j in range(m):
            leak[j] = sqrt_zeta[j] * np.sqrt(X[r, 1 + j])
            a_term += h_rp[j] * leak[j]
        for k in range(m):
            inner = root_s * h_sr[k] + noise_phasor
            for i in range(m):
                inner += h_rr[i, k] * leak[i]
            p_k = X[r, 1 + k]
            abs_b[k] = _modulus(inner) * np.sqrt(p_k * g_rp[k] / (p_s * g_sr[k] + zsum[k] + noise_r)) if p_k > 0 else 0.0
        best = _min_residual(_modulus(a_term), abs_b, sums)
        level[r] = best * best
    return obj, level


@njit(cache=True)
def _coherent_grid(axes, g_sr, g_rd, g_rp, zhat, sqrt_zeta, h_sp, h_rp, h_sr, h_rr,
                   noise_r, noise_d, noise_phasor, exact):
    """Objective and coherent interference on the tensor grid of ``axes``; ``P_S`` varies slowest."""
    dims, g = axes.shape
    m = dims - 1
    relay_points = g ** m
    obj = np.empty(g * relay_points)
    level = np.empty(g * relay_points)
    p_r = np.empty(m)
    zsum = np.empty(m)
    a_rd = np.empty(m)
    inner_relay = np.empty(m, dtype=np.complex128)
    abs_b = np.empty(m)
    sums = np.empty(1 << m)
    roots_s = np.sqrt(axes[0])
    for flat in range(relay_points):
        rest = flat
        for d in range(m - 1, -1, -1):
            p_r[d] = axes[d + 1, rest % g]
            rest //= g
        a_relay = 0j
        for k in range(m):
            z = 0.0
            for j in range(m):
                z += p_r[j] * zhat[j, k]
            zsum[k] = z
            a_rd[k] = p_r[k] * g_rd[k] / noise_d
            a_relay += h_rp[k] * sqrt_zeta[k] * np.sqrt(p_r[k])
            inner = noise_phasor
            for i in range(m):
                inner += h_rr[i, k] * sqrt_zeta[i] * np.sqrt(p_r[i])
            inner_relay[k] = inner
        for s in range(g):
            p_s = axes[0, s]
            total = 0.0
            for k in range(m):
                signal = p_s * g_sr[k]
                bottom = (1.0 + a_rd[k]) * (zsum[k] + noise_r if exact else zsum[k]) + signal
                if bottom > 0:
                    total += a_rd[k] * signal / bottom
                if p_r[k] > 0:
                    abs_b[k] = (_modulus(roots_s[s] * h_sr[k] + inner_relay[k])
                                * np.sqrt(p_r[k] * g_rp[k] / (signal + zsum[k] + noise_r)))
                else:
                    abs_b[k] = 0.0
            best = _min_residual(_modulus(h_sp * roots_s[s] + a_relay), abs_b, sums)
            obj[s * relay_points + flat] = total
            level[s * relay_points + flat] = best * best
    return obj, level


class SubsetModel:
    def __init__(self, ch: ChannelRealization, cfg: ScenarioConfig, subset):
        self.subset = check_subset(subset, ch.relay_count)
        s = np.array(self.subset)
        self.m = len(s)
        self.cfg = cfg
        self.zeta = cfg.zeta_vector[s]
        self.sqrt_zeta = np.sqrt(self.zeta)
        self.h_sr = ch.h_sr[s]
        self.h_rp = ch.h_rp[s]
        self.h_sp = ch.h_sp
        self.h_rr = ch.h_rr[np.ix_(s, s)]
        self.g_sr = np.abs(self.h_sr) ** 2
        self.g_rd = np.abs(ch.h_rd[s]) ** 2
        self.g_rp = np.abs(self.h_rp) ** 2
        self.g_sp = abs(self.h_sp) ** 2
        # zhat[j, k]: distortion power gain from relay j into relay k
        self.zhat = self.zeta[:, None] * np.abs(self.h_rr) ** 2
        self.noise_r = cfg.noise_power_relay
        self.noise_d = cfg.noise_power_dest
        self.noise_phasor = math.sqrt(cfg.noise_power_relay) * (1 + 1j) / math.sqrt(2.0)
        self.c_relay = self.g_rp * (1.0 + self.zeta)
        self.box = np.array([cfg.p_s_max] + [cfg.p_r_max] * self.m)
        self.i_bar = cfg.i_bar
        self._patterns = None

    @property
    def sign_patterns(self) -> np.ndarray:
        """All ``2**m`` in/anti-phase sign vectors as an ``(m, 2**m)`` matrix."""
        if self._patterns is None:
            if self.m > MAX_PATTERN_RELAYS:
                raise ValueError("too many relays to enumerate phase partitions")
            self._patterns = np.array(list(itertools.product((1.0, -1.0), repeat=self.m))).T
        return self._patterns

    def summands(self, X: np.ndarray, exact: bool = True) -> np.ndarray:
        p_s, p_r = X[:, :1], X[:, 1:]
        a = p_r * self.g_rd / self.noise_d
        signal = p_s * self.g_sr
        denom = p_r @ self.zhat
        if exact:
            denom = denom + self.noise_r
        bottom = (1.0 + a) * denom + signal
        with np.errstate(invalid="ignore", divide="ignore"):
            out = a * signal / bottom
        return np.where(bottom > 0, out, 0.0)

    def objective(self, X: np.ndarray, exact: bool = True) -> np.ndarray:
        """Inner rate sum ``x`` (the rate is ``log2(1 + x)``)."""
        return self.summands(X, exact).sum(axis=1)

    def rate(self, X: np.ndarray) -> np.ndarray:
        return np.log2(1.0 + self.objective(X, exact=True))

    def gain(self, X: np.ndarray) -> np.ndarray:
        received = X[:, :1] * self.g_sr + X[:, 1:] @ self.zhat + self.noise_r
        return received ** -0.5

    def noncoherent(self, X: np.ndarray) -> np.ndarray:
        return X[:, 0] * self.g_sp + X[:, 1:] @ self.c_relay

    def best_source_power(self, P_r: np.ndarray) -> np.ndarray:
        """Largest feasible ``P_S`` for given relay powers (non-coherent constraint)."""
        budget = self.i_bar - P_r @ self.c_relay
        if self.g_sp == 0:
            return np.where(budget >= 0, self.box[0], 0.0)
        return np.clip(budget / self.g_sp, 0.0, self.box[0])

    def phasors(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        root = np.sqrt(X)
        leak = root[:, 1:] * self.sqrt_zeta
        a = self.h_sp * root[:, 0] + leak @ self.h_rp
        inner = root[:, :1] * self.h_sr + leak @ self.h_rr + self.noise_phasor
        b = inner * self.gain(X) * self.h_rp * root[:, 1:]
        return a, b

    def magnitudes(self, X: np.ndarray, zsum: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``|A|`` and ``|B_k|`` per row; ``zsum`` is ``X[:, 1:] @ zhat`` if already at hand."""
        if zsum is None:
            zsum = X[:, 1:] @ self.zhat
        root = np.sqrt(X)
        leak = root[:, 1:] * self.sqrt_zeta
        abs_a = np.abs(self.h_sp * root[:, 0] + leak @ self.h_rp)
        inner = root[:, :1] * self.h_sr + leak @ self.h_rr + self.noise_phasor
        received = X[:, :1] * self.g_sr + zsum + self.noise_r
        return abs_a, np.abs(inner) * np.sqrt(X[:, 1:] * self.g_rp / received)

    def residual(self, X: np.ndarray, signs: np.ndarray) -> np.ndarray:
        abs_a, abs_b = self.magnitudes(X)
        return abs_a + abs_b @ signs

    def min_partition_interference(self, X: np.ndarray, zsum: np.ndarray | None = None
                                   ) -> tuple[np.ndarray, np.ndarray]:
        """Exact minimum over all partitions; also returns the best pattern index per row."""
        abs_a, abs_b = self.magnitudes(X, zsum)
        d = np.abs(abs_a[:, None] + abs_b @ self.sign_patterns)
        best = np.argmin(d, axis=1)
        return d[np.arange(len(d)), best] ** 2, best

    def _params(self, exact: bool, coherent: bool) -> tuple:
        return (self.g_sr, self.g_rd, self.g_rp, self.zhat, self.sqrt_zeta, complex(self.h_sp),
                self.h_rp, self.h_sr, self.h_rr, float(self.noise_r), float(self.noise_d),
                complex(self.noise_phasor), exact, coherent, self.c_relay, float(self.g_sp))

    def evaluate(self, X: np.ndarray, exact: bool, coherent: bool) -> tuple[np.ndarray, np.ndarray]:
        """Objective and interference (min over partitions when coherent) per row, compiled."""
        X = np.ascontiguousarray(X, dtype=float)
        return _evaluate_rows(X, *self._params(exact, coherent))

    def coherent_grid(self, axes: np.ndarray, exact: bool) -> tuple[np.ndarray, np.ndarray]:
        """Objective and coherent interference on the tensor grid of ``axes`` (C order)."""
        return _coherent_grid(np.ascontiguousarray(axes, dtype=float), *self._params(exact, True)[:13])
