from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from hypoheat.pbw import (
    OpMatrix,
    PBWAlgebra,
    box_infinity,
    box_matrix,
    jacobi_residuals,
    verify_commutation,
)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)
positive = st.fractions(min_value=F(1, 6), max_value=10, max_denominator=6)
words = st.lists(st.integers(0, 2), min_size=0, max_size=7)


def test_zyx_normal_form_at_rho_one():
    alg = PBWAlgebra(1)
    nf = alg.normal_form("ZYX")
    X, Y, Z = alg.X, alg.Y, alg.Z
    assert nf == X * Y * Z - Z * Z + Y * Y - X * X
    assert str(nf) == "X*Y*Z - X^2 + Y^2 - Z^2"


def test_basic_rewrites():
    for rho in (0, 1, -1, F(5, 2)):
        alg = PBWAlgebra(rho)
        X, Y, Z = alg.X, alg.Y, alg.Z
        assert alg.normal_form("YX") == X * Y - Z
        assert alg.normal_form("ZX") == X * Z + Y * rho
        assert alg.normal_form("ZY") == Y * Z - X * rho


@given(rationals, words)
def test_confluence_leftmost_vs_rightmost(rho, word):
    left = PBWAlgebra(rho, "leftmost").normal_form(word) if word else None
    right = PBWAlgebra(rho, "rightmost").normal_form(word) if word else None
    if word:
        assert left.terms == right.terms


@given(rationals, words)
def test_normal_form_degree_bound(rho, word):
    if word:
        nf = PBWAlgebra(rho).normal_form(word)
        assert nf.degree() <= len(word)
        # the top-degree part is the sorted word itself
        top = {m: v for m, v in nf.terms.items() if sum(m) == len(word)}
        assert top == {(word.count(0), word.count(1), word.count(2)): 1}


@given(rationals, words, words)
def test_product_associative(rho, a, b):
    alg = PBWAlgebra(rho)
    u, v = alg.normal_form(a or [0]), alg.normal_form(b or [1])
    w = alg.Z + alg.X * 2
    assert (u * v) * w == u * (v * w)


@given(rationals)
def test_jacobi_in_enveloping_algebra(rho):
    alg = PBWAlgebra(rho)
    els = [alg.X, alg.Y, alg.Z, alg.X * alg.Y]
    assert all(r.is_zero() for r in jacobi_residuals(alg, els))


@given(rationals)
def test_casimir_like_commutators(rho):
    alg = PBWAlgebra(rho)
    X, Y, Z, L = alg.X, alg.Y, alg.Z, alg.L
    # [Z, L] = 0 in every G(rho); [X, L] = 2YZ - X (equivalently ZY + YZ)
    assert alg.commutator(Z, L).is_zero()
    assert alg.commutator(X, L) == Y * Z + Z * Y


@pytest.mark.parametrize("rho", [0, 1, -1, F(5, 2)])
@pytest.mark.parametrize("eps", [F(1, 10), 1, 10])
def test_commutation_grid(rho, eps):
    rep = verify_commutation(rho, eps)
    assert rep.passed, rep.to_dict()


@given(rationals, positive)
def test_commutation_random_parameters(rho, eps):
    assert verify_commutation(rho, eps).passed


@given(rationals)
def test_commutation_at_infinity(rho):
    assert verify_commutation(rho, 1, infinity=True).passed


def test_box_display():
    rho, eps = F(5, 2), F(1, 10)
    alg = PBWAlgebra(rho)
    X, Y, L = alg.X, alg.Y, alg.L
    b = box_matrix(alg, eps)
    zero = alg.scalar(0)
    expected = [[L - rho, zero, Y * 2], [zero, L - rho, X * -2], [Y * (-1 / eps), X * (1 / eps), L - 1 / eps]]
    for i in range(3):
        for j in range(3):
            assert b[i, j] == expected[i][j], (i, j)
    binf = box_infinity(alg)
    expected_inf = [[L - rho, zero, Y * 2], [zero, L - rho, X * -2], [zero, zero, L]]
    for i in range(3):
        for j in range(3):
            assert binf[i, j] == expected_inf[i][j], (i, j)


def test_corrupted_box_fails():
    alg = PBWAlgebra(1)
    b = box_matrix(alg, 1)
    rows = [list(r) for r in b.entries]
    rows[0][2] = rows[0][2] + alg.X
    rep = verify_commutation(1, 1, box=OpMatrix(tuple(tuple(r) for r in rows)))
    assert not rep.passed


def test_residual_terms_serialize():
    rep = verify_commutation(F(5, 2), F(1, 10))
    d = rep.to_dict()
    assert d["rho"] == "5/2" and d["eps"] == "1/10" and d["pass"] is True
