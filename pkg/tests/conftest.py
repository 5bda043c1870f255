import itertools
from fractions import Fraction
from math import comb

import pytest

from qjk_secretary.core import ProblemSpec
from qjk_secretary.dual import solve_dual

GEOMETRIC = (1.0, 0.5, 0.25)


def weights_for(kind, K):
    return () if kind == "equal" else GEOMETRIC[:K]


# n in {20, 60, 100}, Q in {1, 2, 4}, J, K in {1, 2, 3}, equal and geometric weights
SWEEP = [ProblemSpec(n, Q, J, K, weights_for(kind, K))
         for n, Q, J, K, kind in itertools.product(
             (20, 60, 100), (1, 2, 4), (1, 2, 3), (1, 2, 3), ("equal", "geometric"))]


def sweep_id(spec):
    w = "eq" if len(set(spec.weights)) == 1 else "geo"
    return f"n{spec.n}-Q{spec.Q}-J{spec.J}-K{spec.K}-{w}"


def exact_b(n, K, weights, i, k):
    """b_i^k as an exact rational."""
    w = [Fraction(x) for x in weights]
    return sum(w[l - 1] * Fraction(comb(i - 1, k - 1) * comb(n - i, l - k), comb(n - 1, l - 1))
               for l in range(k, K + 1))


_cache = {}


def solved(spec):
    if spec not in _cache:
        _cache[spec] = solve_dual(spec)
    return _cache[spec]


@pytest.fixture
def spec_file(tmp_path):
    def make(text, name="spec.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make
