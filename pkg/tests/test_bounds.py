import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import partition_min, random_rational_matrix
from transversal_bounds.bounds import (
    TriangleProgram,
    cycle_bound,
    fhl_baseline,
    k3_decomposition_minimum,
    main_bound,
    triangle_bound,
    triangle_grid_ceiling,
    triangle_grid_oracle,
)
from transversal_bounds.errors import BadCycle, TooLarge, ValidationError
from transversal_bounds.model import DensityMatrix, validate_densities


def test_main_bound_examples():
    r = main_bound(DensityMatrix.uniform(3, 0.75), crosscheck=True)
    assert r.bound_coefficient == pytest.approx(0.125)
    assert r.witness.key == ((0, 1, 2),)
    assert r.primal.a == pytest.approx((0.5, 0.5, 0.5))
    assert r.crosscheck == pytest.approx(0.125)

    r = main_bound(DensityMatrix.uniform(2, 0.5))
    assert r.bound_coefficient == pytest.approx(0.5)
    assert r.witness.key == ((0, 1),)

    r = main_bound(DensityMatrix.uniform(5, 0.0), method="lp")
    assert r.bound_coefficient == 1.0


def test_saturated_pair():
    d = validate_densities([[0, 0.2, 0.3], [0.2, 0, 1], [0.3, 1, 0]])
    r = main_bound(d)
    assert r.bound_coefficient == 0.0
    assert r.witness.double_edges() == [(1, 2)]
    assert r.primal is None


def test_methods_agree_on_uniform_k5():
    d = DensityMatrix.uniform(5, 0.75)
    lp = main_bound(d, method="lp")
    en = main_bound(d, method="enumeration")
    assert lp.bound_coefficient == pytest.approx(en.bound_coefficient, rel=1e-9)
    # matching of two double edges and one isolated vertex: 0.25^2 vs triangle + edge 0.125 * 0.25
    assert en.bound_coefficient == pytest.approx(0.125 * 0.25)


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        main_bound(DensityMatrix.uniform(11, 0.5), method="enumeration")


def test_large_k_lp_route():
    rng = np.random.default_rng(2)
    r = main_bound(random_rational_matrix(rng, 14, zero_prob=0.0))
    assert r.method == "lp"
    assert r.bound_coefficient <= r.baseline + 1e-9
    assert math.exp(-r.lp_objective) == pytest.approx(r.bound_coefficient, rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_both_routes_match_partition_oracle(k, seed):
    d = random_rational_matrix(np.random.default_rng(seed), k)
    ref = partition_min(d)
    for method in ("lp", "enumeration"):
        got = main_bound(d, method=method).bound_coefficient
        assert math.isclose(got, ref, rel_tol=1e-7, abs_tol=1e-300)
    assert main_bound(d).bound_coefficient <= fhl_baseline(d) + 1e-9


def test_fhl_baseline_examples():
    assert fhl_baseline(DensityMatrix.uniform(3, 0.75)) == pytest.approx(0.25)
    assert fhl_baseline(DensityMatrix.uniform(2, 0.5)) == pytest.approx(0.5)
    # k=4 uniform: (1-d)^(2 * 6 / 6)
    assert fhl_baseline(DensityMatrix.uniform(4, 0.5)) == pytest.approx(0.25)


def test_triangle_bound():
    assert triangle_bound(0.5, 0.5, 0.5) == pytest.approx(0.5**1.5)
    assert triangle_bound(0.1, 0.9, 0.9) == pytest.approx(0.1)
    assert triangle_bound(0.9, 0.1, 0.9) == triangle_bound(0.1, 0.9, 0.9)


def test_cycle_bound():
    d = DensityMatrix.uniform(5, 0.64)
    assert cycle_bound(d, [0, 1, 2, 3, 4]) == pytest.approx(0.8**5)
    assert cycle_bound(d, [0, 1, 2]) == triangle_bound(0.64, 0.64, 0.64)
    with pytest.raises(BadCycle):
        cycle_bound(d, [0, 1])
    with pytest.raises(BadCycle):
        cycle_bound(d, [0, 1, 1])


def test_k3_minimum_agrees_with_main_bound():
    rng = np.random.default_rng(3)
    for _ in range(40):
        d = random_rational_matrix(rng, 3)
        assert k3_decomposition_minimum(d) == pytest.approx(main_bound(d).bound_coefficient, rel=1e-12)


def test_triangle_program_validation():
    with pytest.raises(ValidationError):
        TriangleProgram(3, 0.5, 0.4, 0.6)
    with pytest.raises(TooLarge):
        triangle_grid_oracle(TriangleProgram(5, 0.1, 0.2, 0.3))


def test_grid_oracle_small_cases():
    # all densities 1: every a_i = b_i = 1, min(1, 1) summed over n1
    assert triangle_grid_oracle(TriangleProgram(2, 1.0, 1.0, 1.0, g=4)) == pytest.approx(2.0)
    assert triangle_grid_oracle(TriangleProgram(3, 0.0, 0.5, 0.5)) == 0.0
    # n1 = 1: max min(a b, d23) with a <= d12, b <= d13 on the 1/g grid
    assert triangle_grid_oracle(TriangleProgram(1, 0.5, 0.5, 1.0, g=2)) == pytest.approx(0.25)
    tp = TriangleProgram(3, 0.3, 0.6, 0.9)
    assert triangle_grid_oracle(tp) <= triangle_grid_ceiling(tp)
