import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_rational_matrix, scipy_lp2
from transversal_bounds.errors import NumericalFailure, ValidationError
from transversal_bounds.lp import (
    LogWeights,
    build_log_weights,
    check_complementary_slackness,
    is_half_integral,
    simplex_max,
    solve,
    solve_lp2,
    solve_lp2_dual,
)
from transversal_bounds.model import DensityMatrix, validate_densities


def test_log_weights():
    d = validate_densities([[0, 0.5, 1], [0.5, 0, 0], [1, 0, 0]])
    w = build_log_weights(d)
    assert w.p[0, 1] == pytest.approx(math.log(2))
    assert w.p[1, 2] == 0.0
    assert w.infinite_pairs == {(0, 2)}


def test_uniform_triangle():
    w = build_log_weights(DensityMatrix.uniform(3, 0.75))
    pr, du = solve(w)
    assert pr.b == pytest.approx((math.log(2),) * 3)
    assert pr.a == pytest.approx((0.5, 0.5, 0.5))
    assert du.x[0, 1] == du.x[0, 2] == du.x[1, 2] == pytest.approx(0.5)
    assert du.objective == pytest.approx(3 * math.log(2))


def test_k2_double_edge():
    pr = solve_lp2(build_log_weights(DensityMatrix.uniform(2, 0.5)))
    assert pr.objective == pytest.approx(math.log(2))
    assert pr.a[0] * pr.a[1] == pytest.approx(0.5)


def test_zero_weights():
    pr, du = solve(build_log_weights(DensityMatrix.uniform(4, 0.0)))
    assert pr.objective == 0.0
    assert du.objective == 0.0


def test_uniform_k4_is_perfect_matching():
    du = solve_lp2_dual(build_log_weights(DensityMatrix.uniform(4, 0.75)))
    assert du.objective == pytest.approx(2 * math.log(4))
    assert is_half_integral(du)


def test_simplex_small_program():
    # max 3x + 2y, x + y <= 4, x + 3y <= 6 -> (4, 0), value 12
    a = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 3.0, 0.0, 1.0]])
    res = simplex_max(np.array([3.0, 2.0, 0.0, 0.0]), a, np.array([4.0, 6.0]), [2, 3])
    assert res.objective == pytest.approx(12.0)
    assert res.x[:2] == pytest.approx([4.0, 0.0])
    assert res.duals == pytest.approx([3.0, 0.0])


def test_simplex_iteration_guard():
    a = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 3.0, 0.0, 1.0]])
    with pytest.raises(NumericalFailure):
        simplex_max(np.array([3.0, 2.0, 0.0, 0.0]), a, np.array([4.0, 6.0]), [2, 3], max_iter=0)


def test_complementary_slackness_detects_bad_pair():
    w = build_log_weights(DensityMatrix.uniform(3, 0.75))
    pr, du = solve(w)
    assert check_complementary_slackness(pr, du, w).passed
    bad = type(pr).from_b([2.0, 2.0, 2.0])
    report = check_complementary_slackness(bad, du, w)
    assert not report.passed and report.failures


def test_infinite_weights_rejected():
    w = build_log_weights(validate_densities([[0, 1], [1, 0]]))
    with pytest.raises(ValidationError):
        solve(w)


@settings(max_examples=120, deadline=None)
@given(k=st.integers(2, 9), seed=st.integers(0, 2**32 - 1))
def test_matches_scipy_and_certifies(k, seed):
    d = random_rational_matrix(np.random.default_rng(seed), k, zero_prob=0.15)
    w = build_log_weights(d)
    if w.infinite_pairs:
        return
    pr, du = solve(w)
    cover, pack = scipy_lp2(w.p)
    assert pr.objective == pytest.approx(cover, rel=1e-7, abs=1e-9)
    assert du.objective == pytest.approx(pack, rel=1e-7, abs=1e-9)
    assert abs(pr.objective - du.objective) <= 1e-9 * (1 + abs(du.objective))
    assert pr.is_feasible(w) and du.is_feasible()
    assert check_complementary_slackness(pr, du, w).passed
    # basic optimum of the packing LP is half-integral
    assert is_half_integral(du)


def test_large_instance_solves():
    rng = np.random.default_rng(5)
    p = rng.random((30, 30))
    p = np.triu(p, 1)
    p = p + p.T
    pr, du = solve(LogWeights(p))
    cover, _ = scipy_lp2(p)
    assert pr.objective == pytest.approx(cover, rel=1e-8)
