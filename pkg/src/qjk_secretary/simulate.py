"""Seeded Monte Carlo estimate of the competitive ratio.

Each trial ``t`` draws its arrival order by Fisher-Yates from its own stream,
a SplitMix64 sequence keyed by ``(seed, t)``, so any trial can be replayed in
isolation and results do not depend on how trials are split across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import ProblemSpec, offline_optimum
from .dual import ThresholdTable

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LOW32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _stream_start(seed, trial):
    return _mix64(_mix64(np.uint64(seed)) ^ np.uint64(trial))


@njit(cache=True, inline="always")
def _below(state, bound):
    """Unbiased integer in ``[0, bound)`` (Lemire); returns ``(value, state)``."""
    b = np.uint64(bound)
    while True:
        state = state + _GOLDEN
        u = _mix64(state) >> np.uint64(32)
        prod = u * b
        low = prod & _LOW32
        if low >= b or low >= (_TWO32 - b) % b:
            return np.int64(prod >> np.uint64(32)), state


@njit(cache=True)
def trial_permutation(n, seed, trial):
    """Full arrival order (global ranks 1..n) used by ``trial`` of ``seed``."""
    perm = np.arange(1, n + 1)
    state = _stream_start(seed, trial)
    for p in range(n):
        r, state = _below(state, n - p)
        r += p
        tmp = perm[p]
        perm[p] = perm[r]
        perm[r] = tmp
    return perm


@njit(cache=True, nogil=True)
def _protocol_trials(n, Q, J, K, m, thr, weights, seed, first, out):
    """Payoff of trials ``first .. first + len(out) - 1`` into ``out``.

    Only the arrival prefix actually interviewed is drawn; a trial stops once
    all ``J`` hires are made.
    """
    base = np.arange(1, n + 1).astype(np.int32)
    perm = np.empty(n, dtype=np.int32)
    top = np.empty((Q, K), dtype=np.int64)
    cnt = np.empty(Q, dtype=np.int64)
    for b in range(out.shape[0]):
        perm[:] = base
        cnt[:] = 0
        state = _stream_start(seed, first + b)
        hired = 0
        payoff = 0.0
        for step in range(m):
            for q in range(Q):
                p = step * Q + q
                r, state = _below(state, n - p)
                r += p
                # position p is never drawn again, so only slot r needs the swap
                v = np.int64(perm[r])
                perm[r] = perm[p]
                c = cnt[q]
                cnt[q] = c + 1
                if c >= K and v > top[q, K - 1]:
                    continue
                # insertion position among the K best seen so far in queue q
                stored = min(c, K)
                pos = stored
                while pos > 0 and top[q, pos - 1] > v:
                    pos -= 1
                if pos < K:
                    last = stored if stored < K else K - 1
                    for s in range(last, pos, -1):
                        top[q, s] = top[q, s - 1]
                    top[q, pos] = v
                if hired < J and pos < K and step + 1 >= thr[q, hired, pos]:
                    hired += 1
                    if v <= K:
                        payoff += weights[v - 1]
            if hired >= J:
                break
        out[b] = payoff


def trial_payoffs(spec: ProblemSpec, table: ThresholdTable, seed: int, first: int, count: int) -> np.ndarray:
    out = np.empty(count)
    _protocol_trials(spec.n, spec.Q, spec.J, spec.K, table.horizon,
                     np.ascontiguousarray(table.thresholds, dtype=np.int64),
                     np.asarray(spec.weights, dtype=float), np.uint64(seed & (2**64 - 1)),
                     first, out)
    return out


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    mean_ratio: float
    std_error: float
    seed: int
    spec: str

    def lines(self) -> list[str]:
        return [f"trials={self.trials}", f"mean_ratio={self.mean_ratio:.10g}",
                f"std_error={self.std_error:.10g}", f"seed={self.seed}"]


CHUNK = 1 << 16


def run_trials(kernel_for_range, trials: int, threads: int = 1) -> tuple[float, float]:
    """Evaluate ``kernel_for_range(first, count) -> payoffs`` over fixed-size chunks.

    Returns ``(mean, std_error)``. Chunks are reduced in trial order with exact
    summation, so the result is independent of ``threads``.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials")
    ranges = [(f, min(CHUNK, trials - f)) for f in range(0, trials, CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(lambda fc: kernel_for_range(*fc), ranges))
    else:
        chunks = [kernel_for_range(f, c) for f, c in ranges]
    total = math.fsum(math.fsum(c) for c in chunks)
    mean = total / trials
    ss = math.fsum(math.fsum((c - mean) ** 2) for c in chunks)
    return mean, math.sqrt(ss / (trials - 1) / trials)


def monte_carlo(spec: ProblemSpec, table: ThresholdTable, trials: int, seed: int,
                threads: int = 1) -> SimulationReport:
    W = offline_optimum(spec)
    thr = np.ascontiguousarray(table.thresholds, dtype=np.int64)
    weights = np.asarray(spec.weights, dtype=float) / W
    useed = np.uint64(seed & (2**64 - 1))

    def kernel(first, count):
        out = np.empty(count)
        _protocol_trials(spec.n, spec.Q, spec.J, spec.K, table.horizon, thr, weights,
                         useed, first, out)
        return out

    mean, se = run_trials(kernel, trials, threads)
    return SimulationReport(trials, mean, se, seed, spec.describe())
