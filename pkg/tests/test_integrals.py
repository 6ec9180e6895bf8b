import numpy as np
import pytest

from ramif import solver as so
from ramif.expansion import coeff_distance, mul, mul_L, scale
from ramif.integrals import (OneForm, build_D2, build_D3, closure_check, equivariance_check,
                             path_integral, primitive_derivative_check, regenerated_rhs,
                             verify_K_derivatives)
from ramif.numeric import S, T, StencilConfig, closure_residual, fd_dz
from ramif.point import SAMPLE_POINTS


@pytest.fixture(scope="module")
def D44():
    return build_D2(2, 2)


def test_D44_shape(D44):
    z = 0.3 + 1.1j
    assert D44.shape == (3, 3)
    assert D44.u1(z).shape == (3, 3) and D44.u2(z).shape == (3, 3)


def test_D2_rejects_small_indices():
    with pytest.raises(ValueError):
        build_D2(1, 2)


def test_D44_closed(D44):
    assert closure_residual(D44.u1, D44.u2, 0.3 + 1.1j) < 1e-6
    assert closure_check(D44).passed


def test_D444_closed():
    rep = closure_check(build_D3(1, 1, 1))
    assert rep.passed, rep.summary()


def test_D644_closed():
    assert closure_check(build_D3(2, 1, 1)).passed


def test_non_closed_form_detected():
    # swap the two halves of D44: no longer closed
    D = build_D2(2, 2)
    bad = OneForm(D.u2, D.u1, D.shape, "swapped")
    assert not closure_check(bad).passed


@pytest.mark.parametrize("gamma", [S, T], ids=["S", "T"])
def test_D44_equivariant(D44, gamma):
    assert equivariance_check(D44, gamma).passed


def test_D444_equivariant_T():
    assert equivariance_check(build_D3(1, 1, 1), T).passed


def test_D3_missing_family():
    with pytest.raises(KeyError, match="missing prerequisite"):
        build_D3(2, 1, 1, families={(1, 1): so.length2_family(1, 1, 0, 8)})


def test_D3_out_of_scope():
    with pytest.raises(so.OutOfScope):
        build_D3(2, 2, 1)


def test_path_reversal(D44):
    z0, z1 = 1.2j, 0.4 + 1.5j
    fwd = path_integral(D44, z0, z1)
    back = path_integral(D44, z1, z0)
    assert np.max(np.abs(fwd.value + back.value)) < 1e-12


def test_path_independence(D44):
    z0, z1 = 1.2j, 0.4 + 1.5j
    a = path_integral(D44, z0, z1)
    b = path_integral(D44, z0, z1, path=[0.5 + 1.0j])
    c = path_integral(D44, z0, z1, path=[-0.3 + 2.0j, 0.6 + 2.2j])
    assert not a.flagged and not b.flagged
    assert np.max(np.abs(a.value - b.value)) < 1e-8
    assert np.max(np.abs(a.value - c.value)) < 1e-8


def test_path_outside_half_plane(D44):
    with pytest.raises(ValueError):
        path_integral(D44, 1j, 0.5 - 0.1j)


def test_endpoint_derivative(D44):
    # d/dz of the integral from a base point is u1 = 2 pi i G4 (X - zY)^2 (x) E_2
    z = 0.3 + 1.1j
    f = lambda w: path_integral(D44, 1.2j, w).value
    d = fd_dz(f, z, StencilConfig(rel_h=1e-2))
    assert np.max(np.abs(d - D44.u1(z))) < 1e-7


def test_primitive_derivatives():
    dz, dzb = primitive_derivative_check(2, 2, 0.3 + 1.1j)
    assert dz < 1e-7 and dzb < 1e-7


@pytest.mark.parametrize("args", [(1, 1, None, 0), (1, 1, None, 1), (1, 2, None, 2), (1, 1, 1, 0),
                                  (2, 1, 1, 0)])
def test_K_derivatives_match_systems(args):
    a, b, c, k = args
    rep = verify_K_derivatives(a, b, c, k)
    assert rep.passed, rep.summary()


def test_regenerated_k1_binomials():
    # (2 choose 1)(1 + s choose 1) in the k = 1 table: row (1,1) carries 4 L^2 G4 E_{0,2}
    d_rhs, _ = regenerated_rhs(2, 1, 1, k=1)
    spec = so.build_system(2, 1, 1, k=1)
    want = scale(mul(mul_L(so.G(4), 2), so.E(0, 2)), 4)
    assert coeff_distance(d_rhs[(1, 1)], want) < 1e-30
    assert coeff_distance(spec.d_rhs[(1, 1)], want) < 1e-30


def test_regenerated_bad_length():
    with pytest.raises(ValueError):
        regenerated_rhs(1, 1, 1)
