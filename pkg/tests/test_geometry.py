from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypoheat.geometry import (
    build_model,
    curvature_bounds,
    is_skew,
    mat_add,
    mat_mul,
    mat_scale,
    metric,
    parse_model,
    tensor_set,
    yang_mills_check,
)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)
positive = st.fractions(min_value=F(1, 12), max_value=20, max_denominator=12)


def test_standard_models_named():
    assert build_model(0).name == "heisenberg"
    assert build_model(1).name == "su2"
    assert build_model(-1).name == "sl2"
    assert parse_model("grho:5/2").rho == F(5, 2)
    with pytest.raises(ValueError):
        parse_model("torus")


@given(rationals)
def test_brackets_of_g_rho(rho):
    m = build_model(rho)
    c = m.structure_constants()
    # [X,Y]=Z, [X,Z]=-rho Y, [Y,Z]=rho X
    assert tuple(c[0][1]) == (0, 0, 1)
    assert tuple(c[0][2]) == (0, -rho, 0)
    assert tuple(c[1][2]) == (rho, 0, 0)
    for a in range(3):
        for b in range(3):
            assert all(c[a][b][k] == -c[b][a][k] for k in range(3))
    assert all(v == 0 for v in m.jacobi_residual())
    assert yang_mills_check(m)


@given(rationals, positive)
def test_twists_skew_in_two_eps_metric(rho, eps):
    ts = tensor_set(build_model(rho), eps)
    g = metric(2 * eps)
    for t in ts.twists:
        assert is_skew(t, g)


@given(rationals, positive)
def test_curvature_matrix(rho, eps):
    ts = tensor_set(build_model(rho), eps)
    assert ts.ric == ((rho, 0, 0), (0, rho, 0), (0, 0, 0))
    assert ts.jj == ((1, 0, 0), (0, 1, 0), (0, 0, 0))
    expected = mat_add(mat_scale(ts.jj, 1 / (2 * eps)), ts.ric, scale=-1)
    assert ts.c == expected


def test_twist_entries_frozen():
    ts = tensor_set(build_model(0), F(1, 4))
    assert ts.t_x == ((0, 0, 0), (0, 0, 1), (0, -2, 0))
    assert ts.t_y == ((0, 0, -1), (0, 0, 0), (2, 0, 0))


@pytest.mark.parametrize("eps", [0, -1, F(-1, 3)])
def test_nonpositive_eps_rejected(eps):
    with pytest.raises(ValueError):
        tensor_set(build_model(0), eps)


def test_su2_constants():
    b = curvature_bounds(build_model(1))
    assert (b.kappa, b.rho2, b.rho1, b.k) == (1, F(1, 2), 1, 0)
    assert b.optimal_epsilon() == F(3, 2)
    assert b.decay_rate() == F(1, 3)
    assert b.rate(1) == F(1, 2)


@given(st.fractions(min_value=0, max_value=5, max_denominator=8))
def test_k_zero_for_nonnegative_rho(rho):
    assert curvature_bounds(build_model(rho)).k == 0


@given(st.fractions(min_value=-5, max_value=F(-1, 8), max_denominator=8))
def test_k_is_minus_rho_for_negative_rho(rho):
    assert curvature_bounds(build_model(rho)).k == -rho


def test_sum_of_twist_squares_plus_c_matches_display():
    # sum T_i^2 + c is the zeroth-order part of the one-form sub-Laplacian
    rho, eps = F(5, 2), F(1, 10)
    ts = tensor_set(build_model(rho), eps)
    zeroth = mat_add(mat_add(mat_mul(ts.t_x, ts.t_x), mat_mul(ts.t_y, ts.t_y)), ts.c)
    assert zeroth == ((-rho, 0, 0), (0, -rho, 0), (0, 0, -1 / eps))


def test_arrays_match_exact():
    ts = tensor_set(build_model(F(1, 3)), F(2, 3))
    arr = ts.arrays()
    assert np.allclose(arr["t_x"], np.array([[float(v) for v in r] for r in ts.t_x]))
