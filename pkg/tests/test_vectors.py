from fractions import Fraction
from functools import reduce
from math import factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ramif.integrals import eisenstein_vector, holomorphic_vector
from ramif.lattice import eval_Ers
from ramif.numeric import IDENTITY, S, T, StencilConfig, fd_dz
from ramif.point import SAMPLE_POINTS
from ramif.vectors import (BiPolynomial, GaussQ, closed_form_mismatches, delta_closed_form,
                           delta_projector, equivariant_to_monomial_array, from_equivariant_basis,
                           monomial, poly_mul, slash_array, slash_poly, slash_tensor, tensor,
                           to_equivariant_basis)

X = monomial(1, 0)
Y = monomial(0, 1)
Z0 = GaussQ(Fraction(1, 3), Fraction(7, 5))

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def polys(draw, degree=None):
    d = draw(st.integers(0, 6)) if degree is None else degree
    cs = draw(st.lists(fractions, min_size=d + 1, max_size=d + 1))
    return BiPolynomial(d, {(d - j, j): c for j, c in enumerate(cs) if c}).clean()


words = st.lists(st.sampled_from([S, T, S.inverse(), T.inverse()]), min_size=1, max_size=5)


def test_slash_identity():
    P = BiPolynomial(3, {(3, 0): 2, (1, 2): Fraction(-1, 3)})
    assert slash_poly(P, IDENTITY) == P


def test_slash_T_square():
    assert slash_poly(monomial(2, 0), T) == BiPolynomial(2, {(2, 0): 1, (1, 1): 2, (0, 2): 1})


@given(polys(degree=4), words, words)
def test_slash_composition(P, w1, w2):
    g1 = reduce(lambda a, b: a @ b, w1)
    g2 = reduce(lambda a, b: a @ b, w2)
    assert slash_poly(slash_poly(P, g1), g2) == slash_poly(P, g1 @ g2)


@given(polys())
def test_equivariant_round_trip(P):
    assert from_equivariant_basis(to_equivariant_basis(P, Z0)) == P


def test_u_is_unit_vector():
    u = BiPolynomial(1, {(1, 0): 1, (0, 1): -Z0})
    assert to_equivariant_basis(u, Z0).coeffs == {(1, 0): 1}


def test_mixed_coefficients_rejected():
    with pytest.raises(TypeError):
        BiPolynomial(1, {(1, 0): Fraction(1, 2), (0, 1): 0.5 + 1j})
    with pytest.raises(ValueError):
        BiPolynomial(2, {(1, 0): 1})


def test_delta_k0_is_product():
    P = BiPolynomial(2, {(2, 0): 1, (1, 1): 3})
    Q = BiPolynomial(1, {(0, 1): Fraction(1, 2)})
    assert delta_projector(tensor(P, Q), 0) == poly_mul(P, Q)


def test_delta_one_on_linear():
    assert delta_projector(tensor(X, Y), 1).coeffs == {(0, 0): 1}
    assert delta_projector(tensor(Y, X), 1).coeffs == {(0, 0): -1}


@given(polys(degree=2), st.integers(1, 4))
def test_delta_cubed_vanishes(P, n):
    Q = BiPolynomial(2 * n, {(2 * n - j, j): j + 1 for j in range(2 * n + 1)})
    assert delta_projector(tensor(P, Q), 3).coeffs == {}


def test_closed_form_k0():
    D = {(2, 0): 5, (1, 1): 7}
    out = delta_closed_form(3, 1, D, 0)
    assert out == {(4, 0): 15, (3, 1): 21}


def test_closed_form_k1_factor():
    # m = 1, s = 1: binom(2,1) binom(2,1) = 4 times D_{r-1,2}
    D = {(0, 2): 1}
    out = delta_closed_form(1, 1, D, 1)
    assert out == {(1, 1): 4}


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_closed_form_matches_projector(m, n, data):
    k = data.draw(st.integers(0, min(2 * m, 2 * n)))
    assert closed_form_mismatches(2 * m, 2 * n, k, Z0) == []


@given(polys(degree=2), polys(degree=4), words, st.integers(0, 2))
def test_delta_equivariance(P, Q, w, k):
    g = reduce(lambda a, b: a @ b, w)
    t = tensor(P, Q)
    lhs = delta_projector(slash_tensor(t, g), k)
    rhs = slash_poly(delta_projector(t, k), g)
    assert lhs == rhs


def test_slash_array_matches_exact():
    P = BiPolynomial(3, {(3, 0): 1, (1, 2): -2})
    arr = P.as_array()
    assert np.allclose(slash_array(arr, S @ T), slash_poly(P, S @ T).as_array())


def test_equivariant_array_matches_exact():
    arr = equivariant_to_monomial_array({(2, 1): 1.5}, complex(Z0))
    exact = from_equivariant_basis(BiPolynomial(3, {(2, 1): Fraction(3, 2)}, "equivariant", Z0))
    assert np.allclose(arr, exact.as_array())


@pytest.mark.parametrize("two_a", [2, 4, 6])
def test_derivative_of_eisenstein_vector(two_a):
    z = 0.3 + 1.1j
    d = fd_dz(eisenstein_vector(two_a), z, StencilConfig(rel_h=2e-3))
    target = 0.5 * holomorphic_vector(two_a + 2)(z)
    assert np.max(np.abs(d - target)) < 1e-9


def test_lattice_vector_equivariant():
    # assemble sum E_{r,s} u^r v^s from lattice sums and slash by S
    def vec(z):
        return equivariant_to_monomial_array({(r, 4 - r): eval_Ers(r, 4 - r, z).value for r in range(5)}, z)
    for z in SAMPLE_POINTS[:3]:
        lhs = slash_array(vec(S.act(z)), S)
        assert np.max(np.abs(lhs - vec(z))) < 1e-10
