import numpy as np
import pytest

from conftest import SWEEP, solved, sweep_id
from qjk_secretary.core import ProblemSpec, SpecError
from qjk_secretary.dual import (DualSolution, ThresholdTable, crucial_positions, dual_objective,
                                exclusive_specs, parse_exclusive, solve_dual, thresholds_from_csv,
                                thresholds_to_csv)
from qjk_secretary.primal import primal_from_thresholds
from qjk_secretary.verify import brute_force_expected_ratio, dual_slack


def test_classical_threshold_and_value():
    # [PAPER] published alpha(1,1,1) = 0.3679 at n = 10000; the 1/e law
    dual, table = solve_dual(ProblemSpec(10000, 1, 1, 1))
    assert 0.367 <= table[1, 1, 1] / 10000 <= 0.369
    assert dual.objective == pytest.approx(0.3679, abs=5e-4)


@pytest.mark.parametrize("K, want", [(2, 0.5736), (3, 0.7083)])
def test_table1_entries(K, want):
    # [PAPER] published alpha(1,1,K) at n = 10000
    dual, _ = solve_dual(ProblemSpec(10000, 1, 1, K))
    assert dual_objective(dual) == pytest.approx(want, abs=5e-4)


def test_two_queue_thresholds():
    # [PAPER] limiting thresholds gamma_{j,k} of the (2,2,2) case
    _, table = solve_dual(ProblemSpec(10000, 2, 2, 2))
    gamma = {(1, 1): 0.1765, (1, 2): 0.3658, (2, 1): 0.2398, (2, 2): 0.4379}
    for q in (1, 2):
        for (j, k), g in gamma.items():
            assert abs(table[q, j, k] / 10000 - g) <= 0.01


def test_small_dual_matches_brute_force():
    spec = ProblemSpec(6, 1, 1, 1)
    dual, table = solve_dual(spec)
    assert dual.objective == pytest.approx(brute_force_expected_ratio(spec, table), abs=1e-9)


def test_zero_dual_objective():
    spec = ProblemSpec(4, 1, 1, 1)
    assert dual_objective(DualSolution(spec, np.zeros((1, 4, 2, 1)), 4)) == 0.0


def test_dummy_layer_is_zero():
    dual, _ = solved(ProblemSpec(60, 2, 3, 2))
    assert not dual.y[:, :, -1, :].any()


def test_deterministic():
    spec = ProblemSpec(100, 4, 3, 3, (1, 0.5, 0.25))
    a, ta = solve_dual(spec)
    b, tb = solve_dual(spec)
    assert np.array_equal(a.y, b.y) and np.array_equal(ta.thresholds, tb.thresholds)


def test_single_candidate_always_hired():
    dual, table = solve_dual(ProblemSpec(1, 1, 1, 1))
    assert table[1, 1, 1] == 1
    assert dual.objective == pytest.approx(1.0)


def test_crucial_positions_conventions():
    y = np.zeros((1, 4, 1, 3))
    y[0, 2:, 0, 0] = 1.0   # zero at 1..2, positive from 3
    y[0, :, 0, 1] = 1.0    # never zero: stays 1
    # column k=3 all zero: never active
    assert crucial_positions(y)[0, 0].tolist() == [3, 1, 5]


@pytest.mark.parametrize("spec", SWEEP, ids=sweep_id)
def test_structure_across_sweep(spec):
    dual, table = solved(spec)
    thr = table.thresholds
    J = spec.J
    y = dual.y[:, :, :J, :]
    assert (y >= 0).all()
    # threshold monotonicity in q, j, k
    assert (thr[1:] <= thr[:-1]).all()
    assert (thr[:, :-1] <= thr[:, 1:]).all()
    assert (thr[:, :, :-1] <= thr[:, :, 1:]).all()
    # y monotone in k and j (the dummy layer J+1 is zero, so j runs through it);
    # equal entries at the last position differ only by rounding
    tol = 1e-12 * dual.y.max()
    assert (dual.y[..., :-1] >= dual.y[..., 1:] - tol).all()
    assert (dual.y[:, :, :-1, :] >= dual.y[:, :, 1:, :] - tol).all()
    # (0,1) structure: zero strictly before the crucial position, positive and tight from it on
    slack = dual_slack(spec, dual)
    scale = np.abs(slack).max() + dual.y.max()
    pos = np.arange(1, dual.horizon + 1)[None, :, None, None]
    before = pos < thr[:, None, :, :]
    assert not y[before].any()
    assert (y[~before] > 0).all()
    assert (np.abs(slack[~before]) <= 1e-9 * scale).all()


def test_horizon_truncates_thresholds():
    spec = ProblemSpec(20, 1, 2, 2)
    dual, table = solve_dual(spec, horizon=5)
    assert dual.y.shape == (1, 5, 3, 2)
    assert table.horizon == 5
    assert (1 <= table.thresholds).all() and (table.thresholds <= 6).all()


@pytest.mark.parametrize("horizon", [0, 21])
def test_bad_horizon(horizon):
    with pytest.raises(SpecError, match="horizon"):
        solve_dual(ProblemSpec(20, 1, 1, 1), horizon)


def test_full_horizon_equals_default():
    spec = ProblemSpec(30, 3, 2, 2)
    a, _ = solve_dual(spec)
    b, _ = solve_dual(spec, 10)
    assert np.array_equal(a.y, b.y)


def test_threshold_table_validation():
    spec = ProblemSpec(10, 1, 1, 2)
    with pytest.raises(SpecError, match="shape"):
        ThresholdTable(spec, np.ones((1, 1, 3)), 10)
    with pytest.raises(SpecError, match="thresholds must lie"):
        ThresholdTable(spec, np.array([[[1, 12]]]), 10)
    table = ThresholdTable(spec, np.array([[[3, 7]]]), 10)
    assert table.thresholds.flags.writeable is False


def test_threshold_csv_round_trip():
    spec = ProblemSpec(60, 2, 3, 2, (1, 0.5))
    _, table = solve_dual(spec)
    text = thresholds_to_csv(table)
    assert text.splitlines()[0] == "q,j,k,threshold"
    assert len(text.splitlines()) == 1 + 2 * 3 * 2
    back = thresholds_from_csv(text, spec)
    assert np.array_equal(back.thresholds, table.thresholds)


@pytest.mark.parametrize("text, message", [
    ("a,b,c,d\n1,1,1,2\n", "header"),
    ("q,j,k,threshold\n", "missing"),
    ("q,j,k,threshold\n1,1,1,2\n1,1,1,3\n", "duplicate"),
    ("q,j,k,threshold\n2,1,1,2\n", "range"),
    ("q,j,k,threshold\n1,1,1,99\n", "1..11"),
])
def test_threshold_csv_errors(text, message):
    with pytest.raises((SpecError, ValueError), match=message):
        thresholds_from_csv(text, ProblemSpec(10, 1, 1, 1))


def test_exclusive_parsing():
    assert parse_exclusive("1:12, 2:8") == [(1, 12), (2, 8)]
    with pytest.raises(SpecError):
        parse_exclusive("1-12")
    spec = ProblemSpec(20, 1, 2, 2)
    parts = exclusive_specs(spec, [(1, 12), (1, 8)])
    assert [(s.n, s.Q, s.J, nq) for s, nq in parts] == [(20, 1, 1, 12), (20, 1, 1, 8)]
    with pytest.raises(SpecError, match="sum"):
        exclusive_specs(spec, [(1, 12), (1, 7)])


def test_exclusive_queue_is_fractional_solve():
    # a single exclusive queue of size n_q is the fractional problem on the first n_q arrivals;
    # with n_q = n it is the ordinary single-queue problem
    spec = ProblemSpec(20, 1, 2, 2)
    (sq, nq), = exclusive_specs(spec, [(2, 20)])
    direct, _ = solve_dual(spec)
    via, _ = solve_dual(sq, nq)
    assert np.array_equal(direct.y, via.y)


def test_fractional_value_matches_brute_force():
    # only the first m arrivals are interviewed; brute force sees the same horizon
    spec = ProblemSpec(7, 1, 1, 2)
    dual, table = solve_dual(spec, horizon=4)
    primal = primal_from_thresholds(spec, table)
    assert dual.objective == pytest.approx(primal.objective, abs=1e-12)
    assert primal.objective == pytest.approx(brute_force_expected_ratio(spec, table), abs=1e-9)
