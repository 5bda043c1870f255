"""Primal solution induced by a threshold table, and the exact competitive ratio.

``x[q, i, j, k]`` is the probability that the protocol hires ``c(q, i)`` as the
``j``-th hire given that it is ``k``-th best so far in its queue. For positions
at or past ``i_{q,j,k}`` it equals the probability that exactly ``j - 1`` hires
happened earlier in global order; before that it is zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import ProblemSpec, b_table, offline_optimum
from .dual import ThresholdTable


@dataclass
class PrimalSolution:
    """``x[q-1, i-1, j, k-1]`` for ``j = 0..J``; layer ``j = 0`` is the dummy round.

    The dummy layer carries only ``x[0, 0, 0, 0] = 1`` so that the first-round
    constraint has the same shape as the others.
    """

    spec: ProblemSpec
    x: np.ndarray
    horizon: int
    objective: float = float("nan")
    # prob_before[t-1, j] = Pr(exactly j hires before global position t), j = 0..J
    prob_before: np.ndarray | None = None

    def flat(self) -> np.ndarray:
        """Real rounds in global order: shape ``(horizon * Q, J, K)``."""
        J, K = self.spec.J, self.spec.K
        return self.x[:, :, 1:, :].transpose(1, 0, 2, 3).reshape(-1, J, K)


def primal_from_thresholds(spec: ProblemSpec, table: ThresholdTable) -> PrimalSolution:
    if table.spec != spec:
        raise ValueError("threshold table was built for a different spec")
    Q, J, K = spec.Q, spec.J, spec.K
    m = table.horizon
    thr = table.thresholds
    N = m * Q
    xf = np.zeros((N, J, K))
    prob_before = np.zeros((N, J + 1))
    # at_least[j] = Pr(at least j hires before the current position); at_least[0] = 1
    at_least = np.zeros(J + 2)
    at_least[0] = 1.0
    for t in range(1, N + 1):
        q, i = (t - 1) % Q, (t - 1) // Q + 1
        exactly = at_least[:J + 1] - at_least[1:J + 2]
        prob_before[t - 1] = exactly
        active = i >= thr[q]  # (J, K)
        xt = np.where(active, exactly[:J, None], 0.0)
        xf[t - 1] = xt
        at_least[1:J + 1] += xt.sum(axis=1) / i

    x = np.zeros((Q, m, J + 1, K))
    x[:, :, 1:, :] = xf.reshape(m, Q, J, K).transpose(1, 0, 2, 3)
    x[0, 0, 0, 0] = 1.0
    sol = PrimalSolution(spec, x, m, prob_before=prob_before)
    sol.objective = primal_objective(spec, sol)
    return sol


def primal_objective(spec: ProblemSpec, sol: PrimalSolution) -> float:
    """Competitive ratio: ``sum b_i^l x_{q,i}^{j|l} / (nW)`` over real rounds."""
    b = b_table(spec, sol.horizon)  # (m, K)
    total = np.einsum("qijk,ik->", sol.x[:, :, 1:, :], b)
    z = float(total) / (spec.n * offline_optimum(spec))
    sol.objective = z
    return z


def exact_ratio(spec: ProblemSpec, table: ThresholdTable) -> float:
    return primal_from_thresholds(spec, table).objective


def exclusive_ratio(parts: list[tuple[ProblemSpec, float]], spec: ProblemSpec) -> float:
    """Combine per-queue ratios ``(spec_q, ratio_q)`` into the overall ratio.

    Expected hired weights add across queues; the total is normalised by the
    offline optimum of the pooled quota ``J = sum J_q``.
    """
    J = sum(sq.J for sq, _ in parts)
    W = float(sum(spec.weights[: min(J, spec.K)]))
    return sum(r * offline_optimum(sq) for sq, r in parts) / W


def primal_to_csv(sol: PrimalSolution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "i", "j", "k", "x"])
    Q, m, J1, K = sol.x.shape
    for q in range(Q):
        for i in range(m):
            for j in range(1, J1):
                for k in range(K):
                    w.writerow([q + 1, i + 1, j, k + 1, f"{sol.x[q, i, j, k]:.17g}"])
    return buf.getvalue()
