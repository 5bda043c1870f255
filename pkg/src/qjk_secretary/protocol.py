"""Online execution of the threshold protocol over Q synchronised queues.

At step ``i`` every queue interviews its ``i``-th candidate, in queue order
1..Q. With ``j`` hires made so far (globally), queue ``q`` hires its candidate
iff ``j < J``, the candidate's local rank ``r`` is at most ``K`` and
``i >= i_{q, j+1, r}``. A hire is visible to later queues in the same step.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .core import ProblemSpec
from .dual import ThresholdTable


class ProtocolError(ValueError):
    pass


class InstanceError(ValueError):
    pass


class Hire(NamedTuple):
    q: int
    i: int
    round: int
    local_rank: int
    global_rank: int = 0


@dataclass
class SessionState:
    spec: ProblemSpec
    table: ThresholdTable
    hired: int = 0
    step: int = 0
    hires: list[Hire] = field(default_factory=list)
    # per-queue sorted values seen so far (only used when values are supplied)
    seen: list[list[int]] = field(default_factory=list)

    @property
    def finished(self) -> bool:
        return self.step >= self.table.horizon or self.hired >= self.spec.J


def start_session(spec: ProblemSpec, table: ThresholdTable) -> SessionState:
    ts = table.spec
    if (ts.n, ts.Q, ts.J, ts.K) != (spec.n, spec.Q, spec.J, spec.K):
        raise ProtocolError(
            f"threshold table built for ({ts.describe()}), session spec is ({spec.describe()})")
    return SessionState(spec, table, seen=[[] for _ in range(spec.Q)])


def advance_step(state: SessionState, ranks: Sequence[int]) -> list[bool]:
    """Interview one candidate per queue; ``ranks[q-1]`` is its local rank (1 = best)."""
    spec = state.spec
    if state.step >= state.table.horizon:
        raise ProtocolError(f"session already consumed {state.table.horizon} steps")
    if len(ranks) != spec.Q:
        raise ProtocolError(f"expected {spec.Q} ranks, got {len(ranks)}")
    i = state.step + 1
    for q, r in enumerate(ranks, 1):
        if not 1 <= r <= i:
            raise ProtocolError(f"queue {q}: rank {r} outside 1..{i} at step {i}")
    thr = state.table.thresholds
    decisions = []
    for q, r in enumerate(ranks, 1):
        j = state.hired
        hire = j < spec.J and r <= spec.K and i >= thr[q - 1, j, r - 1]
        if hire:
            state.hired += 1
            state.hires.append(Hire(q, i, j + 1, r))
        decisions.append(bool(hire))
    state.step = i
    return decisions


def observe(state: SessionState, values: Sequence[int]) -> list[int]:
    """Insert one candidate value per queue and return their local ranks.

    Smaller value means better. Only relative order is used.
    """
    ranks = []
    for seen, v in zip(state.seen, values):
        r = bisect.bisect_left(seen, v)
        seen.insert(r, v)
        ranks.append(r + 1)
    return ranks


def check_permutation(arrival: Sequence[int], n: int) -> None:
    if len(arrival) != n:
        raise InstanceError(f"arrival has {len(arrival)} entries, expected {n}")
    seen = bytearray(n + 1)
    for idx, v in enumerate(arrival, 1):
        if not 1 <= v <= n or seen[v]:
            raise InstanceError(f"token {idx} ({v}) breaks the permutation of 1..{n}")
        seen[v] = 1


def run_instance(spec: ProblemSpec, table: ThresholdTable, arrival: Sequence[int],
                 *, check: bool = True) -> tuple[list[Hire], float]:
    """Run the protocol on one arrival order of global ranks (1 = best overall).

    Global position ``p`` (1-based) goes to queue ``(p-1) mod Q + 1`` at step
    ``ceil(p / Q)``. Returns the hires and the total weight they carry.
    """
    if check:
        check_permutation(arrival, spec.n)
    Q = spec.Q
    state = start_session(spec, table)
    w = spec.weights
    hires: list[Hire] = []
    payoff = 0.0
    for step in range(table.horizon):
        if state.hired >= spec.J:
            break
        values = arrival[step * Q:(step + 1) * Q]
        ranks = observe(state, values)
        decisions = advance_step(state, ranks)
        for q, took in enumerate(decisions):
            if took:
                h = state.hires[len(hires)]
                g = int(values[q])
                hires.append(h._replace(global_rank=g))
                if g <= spec.K:
                    payoff += w[g - 1]
    return hires, payoff


def run_instance_criteria(spec: ProblemSpec, table: ThresholdTable,
                          arrival: Sequence[int]) -> tuple[list[Hire], float]:
    """Alternative reading of the phase rule, kept for differential testing.

    In round ``j+1`` at step ``i`` with phase ``k`` (``i_{q,j+1,k-1} <= i <
    i_{q,j+1,k}``, ``i_{q,j,0} = 1``) the candidate is hired iff it beats the
    ``(k-1)``-th best among the queue's candidates ``1..i_{q,j+1,k-1}``
    (inclusive; when that prefix holds fewer than ``k-1`` others, any candidate
    passes). Phase 1 never hires.
    """
    check_permutation(arrival, spec.n)
    Q, J, K = spec.Q, spec.J, spec.K
    thr = table.thresholds
    m = table.horizon
    history: list[list[int]] = [[] for _ in range(Q)]
    hired = 0
    hires: list[Hire] = []
    payoff = 0.0
    for step in range(m):
        i = step + 1
        for q in range(Q):
            v = int(arrival[step * Q + q])
            hist = history[q]
            hist.append(v)
            if hired >= J:
                continue
            row = thr[q, hired]
            k = 1 + int(np.searchsorted(row, i, side="right"))  # phase number 1..K+1
            if k == 1:
                continue
            start = int(row[k - 2])
            prefix = sorted(hist[:start])
            take = len(prefix) < k - 1 or v < prefix[k - 2]
            if take:
                hired += 1
                r = 1 + sum(1 for u in hist[:-1] if u < v)
                hires.append(Hire(q + 1, i, hired, r, v))
                if v <= K:
                    payoff += spec.weights[v - 1]
    return hires, payoff


# --- instance files ---------------------------------------------------------

def parse_instance(text: str, n: int) -> list[int]:
    tokens = text.split()
    out = []
    for idx, tok in enumerate(tokens, 1):
        try:
            out.append(int(tok))
        except ValueError:
            raise InstanceError(f"token {idx} ({tok!r}) is not an integer") from None
    check_permutation(out, n)
    return out


def load_instance(path: str | Path, n: int) -> list[int]:
    return parse_instance(Path(path).read_text(), n)


def format_run(hires: list[Hire], payoff: float) -> str:
    lines = [f"q={h.q} i={h.i} global_rank={h.global_rank}" for h in hires]
    lines.append(f"payoff={payoff:.10g}")
    return "\n".join(lines) + "\n"
