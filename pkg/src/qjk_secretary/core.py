"""Problem definition for the shared Q-queue J-choice K-best secretary problem.

Holds the instance parameters, the index flattening between ``(queue, position)``
and global arrival order, and the rank-weight kernel ``b[i, k]``: the expected
weight of a candidate at within-queue position ``i`` who is ``k``-th best among
the ``i`` candidates seen so far in its queue, scaled by ``n / i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln


class SpecError(ValueError):
    """Raised when problem parameters violate an invariant."""


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    Q: int
    J: int
    K: int
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.weights:
            object.__setattr__(self, "weights", (1.0,) * self.K)
        else:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def m(self) -> int:
        """Candidates per queue."""
        return self.n // self.Q

    @property
    def W(self) -> float:
        return offline_optimum(self)

    def describe(self) -> str:
        w = ",".join(f"{x:g}" for x in self.weights)
        return f"n={self.n} Q={self.Q} J={self.J} K={self.K} weights={w}"


def validate_spec(spec: ProblemSpec) -> ProblemSpec:
    """Return ``spec`` unchanged if every invariant holds, else raise SpecError."""
    for name in ("n", "Q", "J", "K"):
        v = getattr(spec, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            raise SpecError(f"{name} must be a positive integer, got {v!r}")
    if spec.Q > spec.n:
        raise SpecError(f"Q={spec.Q} exceeds n={spec.n}")
    if spec.J > spec.n:
        raise SpecError(f"J={spec.J} exceeds n={spec.n}")
    if spec.K > spec.n:
        raise SpecError(f"K={spec.K} exceeds n={spec.n}")
    if spec.n % spec.Q != 0:
        raise SpecError(f"n not multiple of Q (n={spec.n}, Q={spec.Q})")
    w = spec.weights
    if len(w) != spec.K:
        raise SpecError(f"expected {spec.K} weights, got {len(w)}")
    for k in range(spec.K):
        if not np.isfinite(w[k]) or w[k] <= 0:
            raise SpecError(f"weight w_{k + 1}={w[k]} must be positive and finite")
        if k and w[k] > w[k - 1]:
            raise SpecError(f"weights increasing at w_{k}={w[k - 1]} < w_{k + 1}={w[k]}")
    return spec


def offline_optimum(spec: ProblemSpec) -> float:
    """Best achievable hired weight with full information: the top min(J, K) weights."""
    return float(sum(spec.weights[: min(spec.J, spec.K)]))


# --- index flattening -------------------------------------------------------
# Global order visits c(1,1), c(2,1), ..., c(Q,1), c(1,2), ...; t = (i-1)Q + q.

def flatten(q: int, i: int, Q: int) -> int:
    return (i - 1) * Q + q


def unflatten(t: int, Q: int) -> tuple[int, int]:
    """Map global order ``t`` (1-based) to ``(q, i)``."""
    return (t - 1) % Q + 1, (t - 1) // Q + 1


def position_of(t: np.ndarray | int, Q: int):
    """Within-queue position of global order ``t``: floor((t-1)/Q) + 1."""
    return (np.asarray(t) - 1) // Q + 1


# --- rank-weight kernel -----------------------------------------------------

def _log_binom(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return gammaln(a + 1.0) - gammaln(b + 1.0) - gammaln(a - b + 1.0)


def b_table(spec: ProblemSpec, m: int | None = None) -> np.ndarray:
    """Return ``B`` of shape ``(m, K)`` with ``B[i-1, k-1] = b_i^k``.

    ``b_i^k = sum_{l=k}^K w_l C(i-1, k-1) C(n-i, l-k) / C(n-1, l-1)``, with the
    binomial ratio evaluated in log space. ``m`` defaults to ``n``.
    """
    n, K = spec.n, spec.K
    if m is None:
        m = n
    if not 1 <= m <= n:
        raise SpecError(f"table length {m} outside 1..{n}")
    i = np.arange(1, m + 1, dtype=float)[:, None, None]
    k = np.arange(1, K + 1, dtype=float)[None, :, None]
    l = np.arange(1, K + 1, dtype=float)[None, None, :]
    valid = (l >= k) & (k <= i) & (l - k <= n - i)
    with np.errstate(invalid="ignore"):
        logt = (_log_binom(i - 1, np.minimum(k - 1, i - 1))
                + _log_binom(n - i, np.clip(l - k, 0, None))
                - _log_binom(np.full_like(l, n - 1), l - 1))
    terms = np.where(valid, np.exp(np.where(valid, logt, 0.0)), 0.0)
    w = np.asarray(spec.weights, dtype=float)[None, None, :]
    return (terms * w).sum(axis=2)


def b_value(spec: ProblemSpec, i: int, k: int) -> float:
    """Single entry ``b_i^k`` for ``1 <= i <= n``, ``1 <= k <= K``."""
    if not 1 <= i <= spec.n:
        raise IndexError(f"position i={i} outside 1..{spec.n}")
    if not 1 <= k <= spec.K:
        raise IndexError(f"rank k={k} outside 1..{spec.K}")
    n = spec.n
    total = 0.0
    for l in range(k, spec.K + 1):
        if k > i or l - k > n - i:
            continue
        lt = (_log_binom(np.float64(i - 1), np.float64(k - 1))
              + _log_binom(np.float64(n - i), np.float64(l - k))
              - _log_binom(np.float64(n - 1), np.float64(l - 1)))
        total += spec.weights[l - 1] * float(np.exp(lt))
    return total


# --- spec files -------------------------------------------------------------

def parse_spec_text(text: str) -> ProblemSpec:
    """Parse ``key=value`` lines (n, Q, J, K, weights). ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in ("n", "Q", "J", "K", "weights"):
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        values[key] = val
    missing = [key for key in ("n", "Q", "J", "K") if key not in values]
    if missing:
        raise SpecError(f"missing keys: {', '.join(missing)}")
    try:
        ints = {key: int(values[key]) for key in ("n", "Q", "J", "K")}
    except ValueError as exc:
        raise SpecError(f"non-integer parameter: {exc}") from None
    weights: tuple[float, ...] = ()
    if values.get("weights"):
        try:
            weights = tuple(float(x) for x in values["weights"].split(","))
        except ValueError as exc:
            raise SpecError(f"bad weights: {exc}") from None
    return validate_spec(ProblemSpec(weights=weights, **ints))


def load_spec(path: str | Path) -> ProblemSpec:
    return parse_spec_text(Path(path).read_text())


def format_spec(spec: ProblemSpec) -> str:
    w = ",".join(repr(x) for x in spec.weights)
    return f"n={spec.n}\nQ={spec.Q}\nJ={spec.J}\nK={spec.K}\nweights={w}\n"
