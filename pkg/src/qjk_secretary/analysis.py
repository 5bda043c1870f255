"""Closed-form results for two special cases and the (1,1,K) ratio table.

* ``k_best_lower_bound``: large-``n`` guarantee of a three-phase rule for
  hiring one of the top ``K`` from a single queue.
* ``solve_222_constants``: limiting thresholds ``gamma_{j,k} = lim i_{q,j,k}/n``
  and the ratio for two queues, two hires, top two valued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import bisect

from .core import ProblemSpec
from .dual import ThresholdTable, solve_dual
from .primal import primal_from_thresholds
from .simulate import _below, _stream_start, run_trials

ROOT_XTOL = 1e-10
SCAN_STEP = 1e-3


class BracketError(RuntimeError):
    """No sign change found where a root is expected."""


# --- (1,1,K): three-phase rule ---------------------------------------------

def k_best_phases(K: int) -> tuple[float, float]:
    """Phase starts ``(gamma1, gamma2) = (1 - x, 1 - x^2)`` with ``x = K^(-2/K)``."""
    if K < 2:
        raise ValueError(f"three-phase bound needs K >= 2, got K={K}")
    x = K ** (-2.0 / K)
    return 1.0 - x, 1.0 - x * x


def k_best_lower_bound(K: int) -> float:
    g1, g2 = k_best_phases(K)
    r = g1 / g2
    return ((1 - r) * (1 - (1 - g1) ** K)
            - (r - g1 * g2 + K * g1) * (1 - g2) ** K
            + r - g1 * g2)


def three_phase_run(n: int, K: int, gamma1: float, gamma2: float, arrival) -> int:
    """Payoff (0 or 1) of the three-phase rule on one arrival order of global ranks.

    Positions ``[floor(g1 n), floor(g2 n))`` take the first best-so-far;
    positions ``[floor(g2 n), n]`` take the first best-or-second-best-so-far.
    """
    if not 0.0 <= gamma1 <= gamma2 <= 1.0:
        raise ValueError(f"need 0 <= gamma1 <= gamma2 <= 1, got {gamma1}, {gamma2}")
    p1, p2 = math.floor(gamma1 * n), math.floor(gamma2 * n)
    best = second = n + 1
    for pos, v in enumerate(arrival, 1):
        if v < best:
            rank = 1
            best, second = v, best
        elif v < second:
            rank = 2
            second = v
        else:
            rank = 3
        if pos >= p2:
            if rank <= 2:
                return int(v <= K)
        elif pos >= p1 and rank == 1:
            return int(v <= K)
    return 0


def three_phase_table(n: int, K: int, gamma1: float, gamma2: float) -> ThresholdTable:
    """The three-phase rule as a (1,1,K) threshold table.

    Local rank 1 activates at ``floor(g1 n)``, rank 2 at ``floor(g2 n)``; ranks
    3..K never activate. Its exact ratio is then available from the primal map.
    """
    spec = ProblemSpec(n, 1, 1, K)
    thr = np.full((1, 1, K), n + 1, dtype=np.int64)
    thr[0, 0, 0] = max(1, math.floor(gamma1 * n))
    if K >= 2:
        thr[0, 0, 1] = max(1, math.floor(gamma2 * n))
    return ThresholdTable(spec, thr, n)


def three_phase_exact(n: int, K: int, gamma1: float, gamma2: float) -> float:
    table = three_phase_table(n, K, gamma1, gamma2)
    return primal_from_thresholds(table.spec, table).objective


@njit(cache=True, nogil=True)
def _three_phase_trials(n, K, p1, p2, seed, first, out):
    base = np.arange(1, n + 1).astype(np.int32)
    perm = np.empty(n, dtype=np.int32)
    for b in range(out.shape[0]):
        perm[:] = base
        state = _stream_start(seed, first + b)
        best = n + 1
        second = n + 1
        payoff = 0.0
        for p in range(n):
            r, state = _below(state, n - p)
            r += p
            v = np.int64(perm[r])
            perm[r] = perm[p]
            pos = p + 1
            if v < best:
                rank = 1
                second = best
                best = v
            elif v < second:
                rank = 2
                second = v
            else:
                rank = 3
            if (pos >= p2 and rank <= 2) or (p1 <= pos < p2 and rank == 1):
                if v <= K:
                    payoff = 1.0
                break
        out[b] = payoff


def three_phase_monte_carlo(n: int, K: int, gamma1: float, gamma2: float,
                            trials: int, seed: int, threads: int = 1) -> tuple[float, float]:
    """``(mean payoff, std_error)`` of the three-phase rule over seeded uniform arrivals."""
    p1, p2 = math.floor(gamma1 * n), math.floor(gamma2 * n)
    useed = np.uint64(seed & (2**64 - 1))

    def kernel(first, count):
        out = np.empty(count)
        _three_phase_trials(n, K, p1, p2, useed, first, out)
        return out

    return run_trials(kernel, trials, threads)


# --- (2,2,2) constants ------------------------------------------------------
# R_{i,j} is the total round-j dual mass at positions >= i (all queues, both
# ranks). Arguments below are g = i/n; r1_* evaluates R_{.,1} and r2_* R_{.,2}.

def r2_top(g):
    """R_{i,2} for i_{2,2,2} <= i <= n/2."""
    return 2 * g / 3 - 16 * g**4 / 3


def r2_mid(g, g22):
    """R_{i,2} for i_{2,2,1} <= i < i_{2,2,2}."""
    return g * g / 2 + 2 * g - 2 * g * g / g22 - g * g * math.log(g22 / g)


def r1_top(g):
    """R_{i,1} for i_{2,2,2} <= i <= n/2."""
    return 14 * g / 9 - 112 * g**4 / 9 - 64 * g**4 / 3 * math.log(1 / (2 * g))


def r1_upper_mid(g, g22, r1_at_22):
    """R_{i,1} for i_{2,1,2} <= i < i_{2,2,2}."""
    return (10 * g / 3 + (1 - math.log(g22 / g) - 2 / g22) * 2 * g * g
            + (2 / (3 * g22**3) - 2 / g22**2 + r1_at_22 / g22**4) * g**4)


def r1_lower_mid(g, g12, g22, r1_at_12):
    """R_{i,1} for i_{2,2,1} <= i < i_{2,1,2}."""
    lg = math.log(g12 / g)
    return 6 * g - (6 / g12 + 4 / g22 * lg + lg * math.log(g22**2 / (g12 * g))
                    - r1_at_12 / g12**2) * g * g


def r1_bottom(g, g21, r2_at_21, r1_at_21):
    """R_{i,1} for i_{2,1,1} <= i < i_{2,2,1}."""
    return (2 * g - 2 * g * g / g21 - g * g * math.log(g21 / g)
            + r2_at_21 * (1 - g * g / g21**2) + r1_at_21 * g * g / g21**2)


def find_root(f, lo: float, hi: float) -> float:
    """First sign change of ``f`` on a ``SCAN_STEP`` grid in ``(lo, hi)``, refined by bisection."""
    grid = np.arange(lo + SCAN_STEP, hi, SCAN_STEP)
    prev_x, prev_v = grid[0], f(grid[0])
    for x in grid[1:]:
        v = f(x)
        if prev_v == 0.0:
            return float(prev_x)
        if np.sign(v) != np.sign(prev_v):
            return float(bisect(f, prev_x, x, xtol=ROOT_XTOL))
        prev_x, prev_v = x, v
    raise BracketError(f"no sign change on ({lo}, {hi})")


@dataclass(frozen=True)
class TwoQueueConstants:
    gamma_11: float
    gamma_12: float
    gamma_21: float
    gamma_22: float
    ratio_222: float
    R: dict[str, float] = field(default_factory=dict)

    def lines(self) -> list[str]:
        return [f"gamma_11={self.gamma_11:.10g}", f"gamma_12={self.gamma_12:.10g}",
                f"gamma_21={self.gamma_21:.10g}", f"gamma_22={self.gamma_22:.10g}",
                f"ratio_222={self.ratio_222:.10g}"]


def solve_222_constants() -> TwoQueueConstants:
    g22 = find_root(lambda g: g * g / 2 - 2 * g / 3 + 16 * g**4 / 3, 0.0, 1.0)
    g21 = find_root(lambda g: r2_mid(g, g22) - g * (1 - g / 2), 0.0, g22)
    r1_22 = r1_top(g22)
    g12 = find_root(lambda g: r1_upper_mid(g, g22, r1_22) - g * g / 2 - r2_mid(g, g22), g21, g22)
    r1_12 = r1_upper_mid(g12, g22, r1_22)
    r2_21 = r2_mid(g21, g22)
    r1_21 = r1_lower_mid(g21, g12, g22, r1_12)
    g11 = find_root(lambda g: r1_bottom(g, g21, r2_21, r1_21) - g * (1 - g / 2) - r2_21, 0.0, g21)
    ratio = r1_bottom(g11, g21, r2_21, r1_21)
    R = {"R1_at_gamma22": r1_22, "R1_at_gamma12": r1_12, "R1_at_gamma21": r1_21,
         "R2_at_gamma21": r2_21, "R2_at_gamma12": r2_mid(g12, g22), "R2_at_gamma22": r2_top(g22)}
    return TwoQueueConstants(g11, g12, g21, g22, ratio, R)


# --- (1,1,K) ratio table ----------------------------------------------------

def table1_reproduce(n: int = 10000, K_max: int = 10) -> list[tuple[int, float]]:
    if not 1 <= K_max <= 30:
        raise ValueError(f"K_max must be in 1..30, got {K_max}")
    out = []
    for K in range(1, K_max + 1):
        spec = ProblemSpec(n, 1, 1, K)
        _, table = solve_dual(spec)
        out.append((K, primal_from_thresholds(spec, table).objective))
    return out
