import json
import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from ramif import expansion as ex
from ramif import solver as so
from ramif.expansion import QExpansion, WeightMismatch, coeff_distance
from ramif.lattice import eval_Ers, eval_G, holomorphic_G

from strategies import expansions

TOL = 1e-25


def G4(N=6):
    return holomorphic_G(4, N)


def test_add_identity_and_inverse():
    e = G4()
    assert coeff_distance(e + QExpansion.zero((4, 0), 6), e) == 0
    assert (e + ex.scale(e, -1)).is_zero()


def test_add_G4_constant_term():
    s = G4() + G4()
    with mpmath.workprec(128):
        assert abs(s[(0, 0, 0)] - mpmath.mpf(1) / 120) < 1e-35


def test_add_weight_mismatch_names_both():
    with pytest.raises(WeightMismatch, match=r"\(4, 0\).*\(0, 4\)"):
        G4() + ex.conjugate(G4())


def test_add_keeps_min_truncation():
    assert (holomorphic_G(4, 3) + holomorphic_G(4, 7)).q_order == 3


def test_mul_unit():
    e = G4()
    one = QExpansion.constant(1, q_order=6)
    assert coeff_distance(e * one, e) == 0


def test_mul_weights_add():
    p = ex.mul(G4(), ex.conjugate(holomorphic_G(6, 6)))
    assert tuple(p.weights) == (4, 6)


def test_G4_squared_is_G8_multiple():
    # weight 8 is one-dimensional, so G4^2 is a multiple of G8
    sq = ex.mul(G4(8), G4(8))
    G8 = holomorphic_G(8, 8)
    with mpmath.workprec(128):
        ratio = sq[(0, 0, 0)] / G8[(0, 0, 0)]
    assert coeff_distance(sq, ex.scale(G8, ratio)) < TOL


def test_half_E20_squared_is_F0_top():
    E20 = so.E(2, 0, 12)
    half_sq = ex.scale(ex.mul(E20, E20), mpmath.mpf(1) / 2)
    F0 = so.length2_family(1, 1, 0, 12)
    assert coeff_distance(half_sq, F0[(4, 0)]) < 1e-25


def test_mul_L_examples():
    e = G4()
    assert coeff_distance(ex.mul_L(e, 0), e) == 0
    assert coeff_distance(ex.mul_L(ex.mul_L(e, 1), -1), e) < 1e-35
    unit = QExpansion.constant(1, weights=(1, 1))
    L = ex.mul_L(unit, 1)
    assert tuple(L.weights) == (0, 0)
    assert abs(ex.evaluate(L, 1j).value + 2 * math.pi) < 1e-14


def test_partial_examples():
    assert ex.partial(QExpansion.constant(1)).is_zero()
    q = QExpansion.monomial(0, 1, 0, (2, 0), 2)
    d = ex.partial(q)
    assert tuple(d.weights) == (3, -1)
    with mpmath.workprec(128):
        assert abs(d[(1, 1, 0)] + 4 * mpmath.pi) < 1e-35
    assert abs(d[(0, 1, 0)] - 2) < 1e-35


def test_partial_bar_examples():
    assert ex.partial_bar(QExpansion.constant(1)).is_zero()
    qb = QExpansion.monomial(0, 0, 1, (0, 2), 2)
    d = ex.partial_bar(qb)
    with mpmath.workprec(128):
        assert abs(d[(1, 0, 1)] + 4 * mpmath.pi) < 1e-35
    assert abs(d[(0, 0, 1)] - 2) < 1e-35


def test_partial_E_top_is_L_G():
    for w in (2, 4, 6):
        lhs = ex.partial(so.E(w, 0))
        rhs = ex.mul_L(so.G(w + 2), 1)
        assert coeff_distance(lhs, rhs) < TOL
        lhs = ex.partial_bar(so.E(0, w))
        rhs = ex.mul_L(so.Gbar(w + 2), 1)
        assert coeff_distance(lhs, rhs) < TOL


def test_laplacian_constant_and_eisenstein():
    assert ex.laplacian(QExpansion.constant(3)).is_zero()
    for r, s in [(2, 0), (1, 1), (3, 1), (2, 4)]:
        e = so.E(r, s)
        assert coeff_distance(ex.laplacian(e), ex.scale(e, -(r + s))) < TOL


def test_conjugate_examples():
    g = G4()
    gb = ex.conjugate(g)
    assert tuple(gb.weights) == (0, 4)
    assert gb[(0, 0, 2)] == g[(0, 2, 0)]
    assert coeff_distance(ex.conjugate(so.E(2, 0)), so.E(0, 2)) < TOL
    z = 0.3 + 1.1j
    assert abs(ex.evaluate(so.E(0, 2), z).value - eval_Ers(0, 2, z).value) < 1e-10


def test_evaluate_examples():
    assert ex.evaluate(QExpansion.zero((0, 0), 4), 0.1 + 1j).value == 0
    v = ex.evaluate(holomorphic_G(4, 30), 1j).value
    assert abs(v - eval_G(4, 1j)) / abs(v) < 1e-12
    e11 = ex.evaluate(so.E(1, 1), 1j)
    lat = eval_Ers(1, 1, 1j)
    assert abs(e11.value - lat.value) <= e11.tail + lat.error + 1e-15


def test_evaluate_tail_bounds_truncation():
    full = so.E(2, 2, 12)
    for N in (3, 5, 8):
        part = full.truncate(N)
        for z in (0.2 + 0.9j, 0.1 + 1.4j):
            ev = ex.evaluate(part, z)
            assert abs(ev.value - ex.evaluate(full, z).value) <= ev.tail


def test_evaluate_flags_large_tail():
    assert not ex.evaluate(so.E(2, 0, 2), 0.2j, tol=1e-12).ok


def test_json_round_trip():
    e = so.E(3, 1, 6)
    back = QExpansion.from_json(e.to_json())
    assert coeff_distance(back, e, relative=False) == 0
    doc = json.loads(e.to_json())
    assert doc["weights"] == [3, 1] and doc["q_order"] == 6


def test_prune_threshold():
    assert ex.prune_threshold(128) == 2.0 ** -112


# -- properties ---------------------------------------------------------------------------

@given(expansions(), expansions())
def test_leibniz(f, g):
    fg = ex.mul(f, g)
    assert coeff_distance(ex.partial(fg), ex.partial(f) * g + f * ex.partial(g)) < TOL
    assert coeff_distance(ex.partial_bar(fg), ex.partial_bar(f) * g + f * ex.partial_bar(g)) < TOL


@given(expansions())
def test_laplacian_factorizations_agree(f):
    assert coeff_distance(ex.laplacian(f), ex.laplacian_alt(f)) < TOL


@given(expansions())
def test_conjugation_commutes_with_partial(f):
    assert coeff_distance(ex.conjugate(ex.partial(f)), ex.partial_bar(ex.conjugate(f))) < TOL


@given(expansions())
def test_conjugate_involution(f):
    assert coeff_distance(ex.conjugate(ex.conjugate(f)), f) == 0


@given(expansions())
def test_laplacian_of_L_multiple(f):
    p, q = f.weights.r - 1, f.weights.s - 1
    lhs = ex.laplacian(ex.mul_L(f, 1))
    rhs = ex.mul_L(ex.laplacian(f), 1) - ex.scale(ex.mul_L(f, 1), p + q)
    assert coeff_distance(lhs, rhs) < TOL


@given(expansions(), st.integers(-3, 3))
def test_mul_L_weights(f, k):
    g = ex.mul_L(f, k)
    assert tuple(g.weights) == (f.weights.r - k, f.weights.s - k)


@given(expansions(q_order=2), expansions(q_order=2), st.sampled_from([0.1 + 1.2j, -0.3 + 0.9j]))
def test_evaluate_is_multiplicative(f, g, z):
    a, b = ex.evaluate(f, z), ex.evaluate(g, z)
    ab = ex.evaluate(ex.mul(f, g), z)
    # the product drops modes above the truncation; their size is bounded by the tails
    bound = ab.tail + a.tail * abs(b.value) + b.tail * abs(a.value) + a.tail * b.tail
    dropped = sum(abs(complex(c1 * c2)) * z.imag ** (k1[0] + k2[0]) *
                  math.exp(-2 * math.pi * z.imag * (k1[1] + k2[1] + k1[2] + k2[2]))
                  for k1, c1 in f.items() for k2, c2 in g.items()
                  if max(k1[1] + k2[1], k1[2] + k2[2]) > 2)
    assert abs(ab.value - a.value * b.value) <= bound + dropped + 1e-12


@given(expansions(), expansions())
def test_add_commutes(f, g):
    g = QExpansion(f.weights, g.q_order, g.coeffs, 128)
    assert coeff_distance(f + g, g + f) == 0
