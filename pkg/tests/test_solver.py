import json

import mpmath
import pytest

from ramif import expansion as ex
from ramif import solver as so
from ramif.expansion import coeff_distance, evaluate, mul, scale
from ramif.lattice import eval_Ers, zeta_value

TOL = 1e-25
# length three runs at q_order 8, where the modular kernel fit is good to about 1e-16
TOL3 = 1e-12


def frac(p, q):
    with mpmath.workprec(128):
        return mpmath.mpf(p) / q


def L(e, k=1):
    return ex.mul_L(e, k)


def test_length1_rows():
    spec = so.build_system(1, w=2)
    G4 = so.G(4)
    assert coeff_distance(spec.d_rhs[(2, 0)], L(G4)) < TOL
    assert spec.d_rhs[(1, 1)].is_zero() and spec.d_rhs[(0, 2)].is_zero()
    assert coeff_distance(spec.dbar_rhs[(0, 2)], L(so.Gbar(4))) < TOL
    assert spec.components() == [(2, 0), (1, 1), (0, 2)]


def test_length2_k1_top_row():
    spec = so.build_system(2, 1, 1, k=1)
    want = scale(mul(L(so.G(4), 2), so.E(1, 1)), 2)
    assert coeff_distance(spec.d_rhs[(2, 0)], want) < TOL


def test_length3_top_row():
    spec = so.build_system(3, 2, 1, 1)
    N = spec.q_order
    want = scale(mul(L(so.G(6, N)), mul(so.E(2, 0, N), so.E(2, 0, N))), mpmath.mpf(1) / 2)
    assert coeff_distance(spec.d_rhs[(8, 0)], want) < TOL3


@pytest.mark.parametrize("args, match", [
    (dict(length=2, a=2, b=3, k=0), "cusp form"),
    (dict(length=2, a=1, b=1, k=3), "k must lie"),
    (dict(length=3, a=1, b=1, c=1, k=1), "not known in closed form"),
    (dict(length=3, a=2, b=2, c=1), "<= 8"),
    (dict(length=4, a=1, b=1), "length must be"),
    (dict(length=1, w=0), "w >= 1"),
])
def test_scope_rejections(args, match):
    with pytest.raises(so.OutOfScope, match=match):
        so.check_scope(**args)


def test_weight_12_override():
    with pytest.raises(so.OutOfScope):
        so.check_scope(2, 3, 3, k=0)
    so.check_scope(2, 3, 3, k=0, allow_weight_12=True)


def test_E11_matches_lattice():
    z = 0.3 + 1.1j
    v = evaluate(so.E(1, 1), z)
    lat = eval_Ers(1, 1, z)
    assert abs(v.value - lat.value) <= v.tail + lat.error + 1e-12


def test_F0_44_is_product():
    f = so.length2_family(1, 1, 0)
    E = lambda r, s: so.E(r, s)
    half = mpmath.mpf(1) / 2
    want = {
        (4, 0): scale(mul(E(2, 0), E(2, 0)), half),
        (3, 1): mul(E(2, 0), E(1, 1)),
        (2, 2): mul(E(2, 0), E(0, 2)) + scale(mul(E(1, 1), E(1, 1)), half),
        (1, 3): mul(E(1, 1), E(0, 2)),
        (0, 4): scale(mul(E(0, 2), E(0, 2)), half),
    }
    for rs, e in want.items():
        assert coeff_distance(f[rs], e) < 1e-20, rs


def test_F2_44_00():
    f = so.length2_family(1, 1, 2)
    E = lambda r, s: so.E(r, s)
    want = L(mul(E(2, 0), E(0, 2)), 2) - scale(L(mul(E(1, 1), E(1, 1)), 2), mpmath.mpf(1) / 4)
    assert coeff_distance(f[(0, 0)], want) < 1e-20


def test_G444_components():
    g = so.length3_family(1, 1, 1)
    N = g.spec.q_order
    E = lambda r, s: so.E(r, s, N)
    sixth = frac(1, 6)
    assert coeff_distance(g[(6, 0)], scale(ex.product(E(2, 0), E(2, 0), E(2, 0)), sixth)) < TOL3
    want = ex.product(E(2, 0), E(0, 2), E(1, 1)) + scale(ex.product(E(1, 1), E(1, 1), E(1, 1)), sixth)
    assert coeff_distance(g[(3, 3)], want) < TOL3


def test_laplace_rhs_F1_44():
    f = so.length2_family(1, 1, 1)
    sys_side, direct = so.laplace_rhs(f, 2, 0)
    want = scale(mul(L(so.G(4), 2), so.E(0, 2)), -4)
    assert coeff_distance(sys_side, want) < TOL
    assert coeff_distance(direct, want) < 1e-20


def test_laplace_rhs_G644():
    g = so.length3_family(2, 1, 1)
    N = g.spec.q_order
    sys_side, direct = so.laplace_rhs(g, 7, 1)
    LG6 = L(so.G(6, N))
    want = scale(ex.product(LG6, so.E(1, 1, N), so.E(1, 1, N)), -1) \
        - scale(ex.product(LG6, so.E(2, 0, N), so.E(0, 2, N)), 2)
    assert coeff_distance(sys_side, want) < TOL3
    assert coeff_distance(direct, want) < 1e-10


def test_laplace_rhs_length1_is_eigen_relation():
    e = so.eisenstein_family(3)
    for r in range(4):
        sys_side, direct = so.laplace_rhs(e, r, 3 - r)
        assert sys_side.is_zero()
        assert direct.is_zero()


def test_product_family_components():
    E2, E4 = so.eisenstein_family(2), so.eisenstein_family(4)
    p = so.product_family(E2, E4)
    assert coeff_distance(p[(6, 0)], mul(so.E(4, 0), so.E(2, 0))) < 1e-20
    assert coeff_distance(p[(5, 1)], mul(so.E(4, 0), so.E(1, 1)) + mul(so.E(2, 0), so.E(3, 1))) < 1e-20
    assert not p.flagged


def test_product_family_halving():
    E2 = so.eisenstein_family(2)
    p = so.product_family(E2, E2)
    f = so.length2_family(1, 1, 0)
    for rs in f.components:
        assert coeff_distance(ex.partial(f[rs]), scale(ex.partial(p[rs]), mpmath.mpf(1) / 2)) < 1e-20


def test_residuals_below_threshold():
    for fam in [so.eisenstein_family(4), so.length2_family(1, 1, 1), so.length3_family(1, 1, 1)]:
        assert fam.residual < 10.0 ** (-fam.spec.precision_bits / 4)
        assert not fam.flagged


def test_laplace_cross_check():
    f = so.length2_family(1, 2, 1)
    for rs in f.components:
        sys_side, direct = so.laplace_rhs(f, *rs)
        assert coeff_distance(sys_side, direct) < 1e-15, rs


def test_conjugation_symmetry():
    for fam in [so.eisenstein_family(4), so.length2_family(1, 1, 1), so.length3_family(1, 2, 1)]:
        for (r, s), e in fam.components.items():
            assert coeff_distance(ex.conjugate(e), fam[(s, r)]) < 1e-20


def test_F2_46_flagged_without_constant():
    f = so.length2_family(1, 2, 2)
    # the default constant 0 leaves the constant mode unsolvable
    assert f.flagged


def test_solvability_constant():
    spec = so.build_system(2, 1, 2, k=2)
    C, defect = so.solvability_constant(spec)
    # 5 zeta(3)/7 from an independent evaluation
    assert abs(complex(C) - 0.858612073685424) < 1e-12
    with mpmath.workprec(128):
        assert abs(C - 5 * zeta_value(3) / 7) < 1e-25
    assert defect < 1e-30


def test_missing_component_rejected():
    with pytest.raises(KeyError):
        so.laplace_rhs(so.eisenstein_family(2), 3, 0)


def test_json_round_trip():
    f = so.length2_family(1, 1, 1)
    doc = json.loads(json.dumps(f.to_json_dict()))
    g = so.family_from_json_dict(doc)
    assert g.spec.label == f.spec.label
    for rs in f.components:
        assert coeff_distance(f[rs], g[rs]) < 1e-30
    res, _ = so.verify_family(g)
    assert res == f.residual


def test_json_round_trip_with_constant():
    C = 5 * zeta_value(3) / 7
    f = so.length2_family(1, 2, 2, constants={so.constant_name(4, 6, k=2): C})
    g = so.family_from_json_dict(json.loads(json.dumps(f.to_json_dict())))
    assert so.verify_family(g)[0] == f.residual


def test_newness():
    res_new, _ = so.product_basis_residual(so.length2_family(1, 2, 1))
    res_old, _ = so.product_basis_residual(so.length2_family(1, 1, 0))
    assert res_new > so.NEWNESS_THRESHOLD
    assert res_old < 1e-8


def test_unknown_normalization():
    with pytest.raises(ValueError):
        so.solve(so.build_system(1, w=2), "bogus")
