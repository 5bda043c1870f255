"""Preprocessing: the dual (0,1)-solution and the crucial-position table.

The sweep runs over the flattened global order from the last interviewed
candidate back to the first. At each position the dual value for every
``(round j, local rank k)`` is the tight value of its constraint,

    y_t^{j|k} = b_{i_t}^k / (nW) + (S_{j+1}(t) - S_j(t)) / i_t,

where ``S_j(t)`` is the sum of ``y_s^{j|l}`` over strictly later positions ``s``
and all ranks ``l``. Non-positive values are clamped to zero; the position at
which a ``(q, j, k)`` column switches from zero to positive is its threshold.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ProblemSpec, SpecError, b_table, offline_optimum, validate_spec

CLAMP_RTOL = 1e-13


@dataclass(frozen=True)
class ThresholdTable:
    """Crucial positions ``i_{q,j,k}``; ``thresholds[q-1, j-1, k-1]`` in ``1..m+1``.

    A value of ``m + 1`` means the ``(q, j, k)`` rule is never active.
    """

    spec: ProblemSpec
    thresholds: np.ndarray
    horizon: int

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.int64)
        t.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        shape = (self.spec.Q, self.spec.J, self.spec.K)
        if t.shape != shape:
            raise SpecError(f"threshold table shape {t.shape} does not match spec {shape}")
        if not 1 <= self.horizon <= self.spec.m:
            raise SpecError(f"horizon {self.horizon} outside 1..{self.spec.m}")
        if t.size and (t.min() < 1 or t.max() > self.horizon + 1):
            raise SpecError(f"thresholds must lie in 1..{self.horizon + 1}")

    def __getitem__(self, qjk: tuple[int, int, int]) -> int:
        q, j, k = qjk
        return int(self.thresholds[q - 1, j - 1, k - 1])

    def with_thresholds(self, thresholds: np.ndarray) -> "ThresholdTable":
        return ThresholdTable(self.spec, np.asarray(thresholds), self.horizon)


@dataclass(frozen=True)
class DualSolution:
    """Dual values ``y[q-1, i-1, j-1, k-1]`` for ``j = 1..J+1`` (layer ``J+1`` is zero)."""

    spec: ProblemSpec
    y: np.ndarray
    horizon: int

    @property
    def objective(self) -> float:
        return dual_objective(self)

    def flat(self) -> np.ndarray:
        """View in global order: shape ``(horizon * Q, J + 1, K)``."""
        return self.y.transpose(1, 0, 2, 3).reshape(-1, self.spec.J + 1, self.spec.K)


def dual_objective(sol: DualSolution) -> float:
    return float(np.sum(sol.y[:, :, 0, :]))


def _check_horizon(spec: ProblemSpec, horizon: int | None) -> int:
    m = spec.m if horizon is None else int(horizon)
    if not 1 <= m <= spec.m:
        raise SpecError(f"horizon {m} outside 1..{spec.m}")
    return m


def solve_dual(spec: ProblemSpec, horizon: int | None = None) -> tuple[DualSolution, ThresholdTable]:
    """Run the preprocessing sweep; returns the dual solution and the threshold table.

    With ``horizon = m < n/Q`` only the first ``m`` positions of each queue are
    interviewed (fractional variant); ``b`` keeps the full ``n``.
    """
    validate_spec(spec)
    m = _check_horizon(spec, horizon)
    Q, J, K = spec.Q, spec.J, spec.K
    scale = 1.0 / (spec.n * offline_optimum(spec))
    rhs = b_table(spec, m) * scale  # (m, K)
    floor = CLAMP_RTOL * np.maximum(1.0, rhs)

    N = m * Q
    y = np.zeros((N, J + 1, K))
    # suffix[j] = sum over strictly later positions and all ranks of y^{j+1|.}
    suffix = np.zeros(J + 2)
    for t in range(N, 0, -1):
        i = (t - 1) // Q + 1
        inv_i = 1.0 / i
        row = y[t - 1]
        for j in range(J, 0, -1):
            vals = rhs[i - 1] + (suffix[j + 1] - suffix[j]) * inv_i
            row[j - 1] = np.where(vals <= floor[i - 1], 0.0, vals)
        suffix[1:J + 1] += row[:J].sum(axis=1)

    y_qi = y.reshape(m, Q, J + 1, K).transpose(1, 0, 2, 3).copy()
    sol = DualSolution(spec, y_qi, m)
    return sol, ThresholdTable(spec, crucial_positions(y_qi[:, :, :J, :]), m)


def crucial_positions(y: np.ndarray) -> np.ndarray:
    """Thresholds from dual values ``y[q, i, j, k]`` (j over real rounds only).

    Scans positions downward; a zero entry whose successor is positive (or that
    sits at the last position) records ``i + 1``. Initial value 1.
    """
    Q, m, J, K = y.shape
    thr = np.ones((Q, J, K), dtype=np.int64)
    for i in range(m, 0, -1):
        zero = y[:, i - 1] <= 0.0
        if i == m:
            hit = zero
        else:
            hit = zero & (y[:, i] > 0.0)
        thr[hit] = i + 1
    return thr


# --- exclusive variant ------------------------------------------------------

def parse_exclusive(text: str) -> list[tuple[int, int]]:
    """Parse ``"J_1:n_1,J_2:n_2,..."`` into ``[(J_q, n_q), ...]``."""
    out = []
    for idx, part in enumerate(text.split(","), 1):
        try:
            jq, nq = (int(s) for s in part.split(":"))
        except ValueError:
            raise SpecError(f"exclusive entry {idx} {part!r} is not J:n") from None
        if jq < 1 or nq < 1:
            raise SpecError(f"exclusive entry {idx} {part!r} must be positive")
        out.append((jq, nq))
    if not out:
        raise SpecError("empty exclusive specification")
    return out


def exclusive_specs(spec: ProblemSpec, quotas: list[tuple[int, int]]) -> list[tuple[ProblemSpec, int]]:
    """One single-queue fractional problem per queue: ``(spec_q, horizon n_q)``.

    Queue sizes must sum to ``spec.n``; each queue keeps the global ``n`` in its
    rank-weight kernel and interviews only its own ``n_q`` candidates.
    """
    total = sum(nq for _, nq in quotas)
    if total != spec.n:
        raise SpecError(f"queue sizes sum to {total}, expected n={spec.n}")
    out = []
    for jq, nq in quotas:
        sq = validate_spec(ProblemSpec(spec.n, 1, jq, spec.K, spec.weights))
        out.append((sq, nq))
    return out


# --- CSV I/O ----------------------------------------------------------------

def thresholds_to_csv(table: ThresholdTable, queue_offset: int = 0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not queue_offset:
        w.writerow(["q", "j", "k", "threshold"])
    Q, J, K = table.thresholds.shape
    for q in range(Q):
        for j in range(J):
            for k in range(K):
                w.writerow([q + 1 + queue_offset, j + 1, k + 1, int(table.thresholds[q, j, k])])
    return buf.getvalue()


def thresholds_from_csv(text: str, spec: ProblemSpec, horizon: int | None = None) -> ThresholdTable:
    """Inverse of :func:`thresholds_to_csv`; every ``(q, j, k)`` must appear once."""
    m = _check_horizon(spec, horizon)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["q", "j", "k", "threshold"]:
        raise SpecError("threshold CSV must start with header q,j,k,threshold")
    thr = np.zeros((spec.Q, spec.J, spec.K), dtype=np.int64)
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        try:
            q, j, k, v = (int(x) for x in row)
        except ValueError:
            raise SpecError(f"threshold CSV line {lineno}: malformed row {row!r}") from None
        if not (1 <= q <= spec.Q and 1 <= j <= spec.J and 1 <= k <= spec.K):
            raise SpecError(f"threshold CSV line {lineno}: index ({q},{j},{k}) out of range for spec")
        if thr[q - 1, j - 1, k - 1]:
            raise SpecError(f"threshold CSV line {lineno}: duplicate entry ({q},{j},{k})")
        thr[q - 1, j - 1, k - 1] = v
    if (thr == 0).any():
        raise SpecError("threshold CSV is missing entries for this spec")
    return ThresholdTable(spec, thr, m)


def load_thresholds(path: str | Path, spec: ProblemSpec, horizon: int | None = None) -> ThresholdTable:
    return thresholds_from_csv(Path(path).read_text(), spec, horizon)
