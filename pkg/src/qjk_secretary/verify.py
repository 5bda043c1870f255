"""Optimality certificate and exhaustive ground truth.

Constraint residuals are recomputed here in the per-queue ``(q, i)`` form,
independently of the flattened sweeps that produced the solutions:

* primal, for every ``(q, i, j, k)``::

      rhs = sum_{m, s<i} (1/s) D^{j}_{m,s} + sum_{m<q} (1/i) D^{j}_{m,i},
      D^{j}_{m,s} = sum_l (x_{m,s}^{j-1|l} - x_{m,s}^{j|l})

  with the dummy round contributing 1 to every first-round constraint;
* dual, for every ``(q, i, j, k)``::

      lhs = y_{q,i}^{j|k} + (1/i) sum_{m, s>i} E^{j}_{m,s} + (1/i) sum_{m>q} E^{j}_{m,i}
            >= b_i^k / (nW),
      E^{j}_{m,s} = sum_l (y_{m,s}^{j|l} - y_{m,s}^{j+1|l}).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ProblemSpec, b_table, offline_optimum
from .dual import DualSolution, ThresholdTable
from .primal import PrimalSolution
from .protocol import run_instance

FEAS_TOL = 1e-9
SLACK_TOL = 1e-9
GAP_RTOL = 1e-9
BRUTE_FORCE_MAX_N = 9


@dataclass
class CertificateReport:
    primal_feasible: bool
    primal_violation: float
    dual_feasible: bool
    dual_violation: float
    slackness_violations: int
    slackness_max_xys: float
    slackness_max_yxs: float
    duality_gap: float
    relative_gap: float
    primal_objective: float
    dual_objective: float

    @property
    def certified(self) -> bool:
        return (self.primal_feasible and self.dual_feasible
                and self.slackness_violations == 0 and self.relative_gap <= GAP_RTOL)

    @property
    def verdict(self) -> str:
        return "certified" if self.certified else "failed"

    def lines(self) -> list[str]:
        def st(ok):
            return "pass" if ok else "fail"
        return [
            f"check=primal_feasible status={st(self.primal_feasible)} max_violation={self.primal_violation:.10g}",
            f"check=dual_feasible status={st(self.dual_feasible)} max_violation={self.dual_violation:.10g}",
            f"check=slackness_x_ys status={st(self.slackness_max_xys <= SLACK_TOL)} max_violation={self.slackness_max_xys:.10g}",
            f"check=slackness_y_xs status={st(self.slackness_max_yxs <= SLACK_TOL)} max_violation={self.slackness_max_yxs:.10g}",
            f"check=duality_gap status={st(self.relative_gap <= GAP_RTOL)} max_violation={self.relative_gap:.10g}",
            f"verdict={self.verdict}",
        ]


def primal_slack(spec: ProblemSpec, sol: PrimalSolution) -> np.ndarray:
    """``rhs - x`` for every crucial constraint; shape ``(Q, m, J, K)``."""
    x = sol.x
    Q, m, _, K = x.shape
    J = spec.J
    d = x[:, :, :-1, :].sum(axis=3) - x[:, :, 1:, :].sum(axis=3)  # (Q, m, J): D^{j}
    pos = np.arange(1, m + 1, dtype=float)
    per_s = d.sum(axis=0) / pos[:, None]  # (m, J) summed over queues, scaled 1/s
    earlier = np.concatenate([np.zeros((1, J)), np.cumsum(per_s, axis=0)[:-1]])  # s < i
    same_step = np.concatenate([np.zeros((1, m, J)), np.cumsum(d, axis=0)[:-1]]) / pos[None, :, None]
    rhs = earlier[None, :, :] + same_step  # (Q, m, J)
    # the dummy hire sits at (1, 1); constraint (1, 1, 1, k) reads x <= 1
    rhs[0, 0, 0] = 1.0
    return rhs[..., None] - x[:, :, 1:, :]


def dual_slack(spec: ProblemSpec, sol: DualSolution) -> np.ndarray:
    """``lhs - b/(nW)`` for every dual constraint; shape ``(Q, m, J, K)``."""
    y = sol.y
    Q, m, _, K = y.shape
    J = spec.J
    e = y[:, :, :J, :].sum(axis=3) - y[:, :, 1:, :].sum(axis=3)  # (Q, m, J): E^{j}
    pos = np.arange(1, m + 1, dtype=float)
    per_s = e.sum(axis=0)  # (m, J)
    later = np.concatenate([np.cumsum(per_s[::-1], axis=0)[::-1][1:], np.zeros((1, J))])  # s > i
    rev = np.cumsum(e[::-1], axis=0)[::-1]
    same_step = np.concatenate([rev[1:], np.zeros((1, m, J))])  # m > q
    lhs_extra = (later[None, :, :] + same_step) / pos[None, :, None]
    rhs = b_table(spec, m) / (spec.n * offline_optimum(spec))  # (m, K)
    return y[:, :, :J, :] + lhs_extra[..., None] - rhs[None, :, None, :]


def check_primal_feasible(spec: ProblemSpec, sol: PrimalSolution) -> tuple[bool, float]:
    slack = primal_slack(spec, sol)
    x = sol.x[:, :, 1:, :]
    worst = max(0.0, float(-slack.min()), float(-x.min()))
    return worst <= FEAS_TOL, worst


def check_dual_feasible(spec: ProblemSpec, sol: DualSolution) -> tuple[bool, float]:
    slack = dual_slack(spec, sol)
    scale = b_table(spec, sol.horizon) / (spec.n * offline_optimum(spec))
    # where b = 0 (k > i) the constraint is checked against the largest right-hand side
    denom = np.where(scale > 0, scale, scale.max())
    rel = -slack / denom[None, :, None, :]
    y = sol.y[:, :, :spec.J, :]
    worst = max(0.0, float(rel.max()), float(-y.min()))
    return worst <= FEAS_TOL, worst


def certify_optimal(spec: ProblemSpec, primal: PrimalSolution, dual: DualSolution) -> CertificateReport:
    want = (spec.Q, primal.horizon, spec.J + 1, spec.K)
    if primal.x.shape != want or dual.y.shape != want:
        raise ValueError(f"primal {primal.x.shape} and dual {dual.y.shape} dimensions differ "
                         f"from the expected {want}")
    p_ok, p_viol = check_primal_feasible(spec, primal)
    d_ok, d_viol = check_dual_feasible(spec, dual)

    x = primal.x[:, :, 1:, :]
    y = dual.y[:, :, :spec.J, :]
    xs = np.maximum(primal_slack(spec, primal), 0.0)
    ys = np.maximum(dual_slack(spec, dual), 0.0)
    x_scale = max(float(x.max()), np.finfo(float).tiny)
    y_scale = max(float(y.max()), np.finfo(float).tiny)
    xys = np.abs(x / x_scale * ys / y_scale)
    yxs = np.abs(y / y_scale * xs / x_scale)
    violations = int(np.count_nonzero(xys > SLACK_TOL) + np.count_nonzero(yxs > SLACK_TOL))

    zp = primal.objective
    zd = float(np.sum(dual.y[:, :, 0, :]))
    gap = abs(zp - zd)
    rel = gap / max(abs(zp), abs(zd), np.finfo(float).tiny)
    return CertificateReport(p_ok, p_viol, d_ok, d_viol, violations,
                             float(xys.max(initial=0.0)), float(yxs.max(initial=0.0)),
                             gap, rel, zp, zd)


def _payoffs(spec: ProblemSpec, table: ThresholdTable, perms) -> list[float]:
    return [run_instance(spec, table, p, check=False)[1] for p in perms]


def brute_force_expected_ratio(spec: ProblemSpec, table: ThresholdTable, workers: int = 1) -> float:
    """Mean payoff over all ``n!`` arrival orders, divided by ``W``.

    Permutations are enumerated lexicographically; with ``workers > 1`` they are
    split into contiguous ranges by first element and the payoffs concatenated
    in the same order, so the exact sum is identical.
    """
    n = spec.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        heads = list(range(1, n + 1))
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_payoffs_with_head, [(spec, table, h) for h in heads]))
        payoffs = [p for chunk in chunks for p in chunk]
    else:
        payoffs = _payoffs(spec, table, itertools.permutations(range(1, n + 1)))
    return math.fsum(payoffs) / len(payoffs) / offline_optimum(spec)


def _payoffs_with_head(args) -> list[float]:
    spec, table, head = args
    rest = [v for v in range(1, spec.n + 1) if v != head]
    return _payoffs(spec, table, ((head, *p) for p in itertools.permutations(rest)))
