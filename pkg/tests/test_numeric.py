import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ramif.lattice import eval_Ers
from ramif.numeric import (IDENTITY, S, T, ModularMatrix, StencilConfig, closure_residual,
                           fd_dz, fd_dzbar, fd_error, fd_laplacian, fd_partial, modularity_residual,
                           slash, slash_residuals)
from ramif.point import SAMPLE_POINTS


def test_fd_dz_polynomial():
    f = lambda z: z * z
    assert abs(fd_dz(f, 1j) - 2j) < 1e-10
    assert abs(fd_dzbar(f, 1j)) < 1e-10


def test_fd_dz_antiholomorphic():
    f = lambda z: np.conj(z) ** 3
    z = 0.3 + 1.1j
    assert abs(fd_dzbar(f, z) - 3 * np.conj(z) ** 2) < 1e-9
    assert abs(fd_dz(f, z)) < 1e-9


def test_stencil_leaving_half_plane():
    with pytest.raises(ValueError, match="upper half plane"):
        fd_dz(lambda z: z, 0.01j, StencilConfig(h=0.1))
    with pytest.raises(ValueError):
        StencilConfig(order=3)
    with pytest.raises(ValueError):
        StencilConfig(h=-1.0)


def test_laplacian_of_constant():
    for z in SAMPLE_POINTS:
        assert abs(fd_laplacian(lambda w: 3.0 + 0j, (0, 0), z)) < 1e-9


def test_laplacian_eigenvalue_lattice():
    z = 0.05 + 2.0j
    f = lambda w: eval_Ers(1, 1, w).value
    lap = fd_laplacian(f, (1, 1), z, StencilConfig(rel_h=2e-3))
    assert abs(lap + 2 * f(z)) / abs(f(z)) < 1e-6


def test_laplacian_matches_operator_composition():
    # -dbar_{s-1} d_r + r(s-1) built from nested stencils
    r, s = 2, 1
    f = lambda z: z ** 2 * np.conj(z) + 1j * z.imag ** 2
    z = 0.4 + 1.3j
    cfg = StencilConfig(rel_h=1e-3)
    inner = lambda w: fd_partial(f, r, w, cfg)
    nested = -(-2j * z.imag * fd_dzbar(inner, z, cfg) + (s - 1) * inner(z)) + r * (s - 1) * f(z)
    assert abs(fd_laplacian(f, (r, s), z, cfg) - nested) < 1e-6


@pytest.mark.parametrize("order", [2, 4])
def test_stencil_order_halving(order):
    # a polynomial of degree order+1 has a truncation error at exactly the stencil order
    f = lambda z: np.exp(z)
    z = 0.3 + 1.1j
    exact = np.exp(z)
    errs = [abs(fd_dz(f, z, StencilConfig(h=h, order=order)) - exact) for h in (0.08, 0.04)]
    assert errs[0] / errs[1] >= 2 ** order / 1.5


def test_fd_error_estimate():
    f = lambda z: np.exp(z)
    z = 0.3 + 1.1j
    est = fd_error(fd_dz, f, z, StencilConfig(h=0.05))
    actual = abs(fd_dz(f, z, StencilConfig(h=0.05)) - np.exp(z))
    assert actual / 3 < est < actual * 3


def test_modular_matrix():
    with pytest.raises(ValueError):
        ModularMatrix(1, 1, 1, 1)
    assert S @ S.inverse() == IDENTITY
    assert S @ S == ModularMatrix(-1, 0, 0, -1)
    assert T.act(0.3 + 1j) == 1.3 + 1j


def test_modularity_residual_constant():
    assert modularity_residual(lambda z: 2.0 + 0j, (0, 0), S) == 0.0


def test_non_modular_witness():
    # Im(-1/z) = y/|z|^2, so at 2i the residual is |1/2 - 2|
    y = lambda z: complex(z).imag
    assert slash_residuals(y, (0, 0), S, [2j]) == [pytest.approx(1.5)]


def test_ers_T_invariant():
    f = lambda z: eval_Ers(2, 0, z).value
    z = SAMPLE_POINTS[0]
    assert modularity_residual(f, (2, 0), T) <= 2 * eval_Ers(2, 0, z).error + 1e-12


@given(st.sampled_from([(0, 0), (2, 0), (1, 3), (-1, -1)]))
def test_slash_cocycle(weights):
    # f||(g1 g2) = (f||g1)||g2 for an arbitrary function
    f = lambda z: np.exp(1j * z) * np.conj(z) ** 2 + z.imag
    for z in SAMPLE_POINTS:
        lhs = slash(f, weights, S @ T)(z)
        rhs = slash(slash(f, weights, S), weights, T)(z)
        assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))


def test_modularity_residual_ST_bounded():
    # the residual at ST is bounded by the residuals at S and T on transported points
    f = lambda z: eval_Ers(1, 1, z).value
    w = (1, 1)
    st_res = modularity_residual(f, w, S @ T)
    t_pts = [T.act(z) for z in SAMPLE_POINTS]
    bound = modularity_residual(f, w, S, t_pts) + modularity_residual(f, w, T)
    assert st_res <= bound + 1e-14


def test_closure_exact_form():
    # d(z zbar) = zbar dz + z dzbar
    for z in SAMPLE_POINTS:
        assert closure_residual(lambda w: np.conj(w), lambda w: w, z) < 1e-9


def test_closure_detects_non_closed():
    # zbar dz - z dzbar is not closed: dzbar(zbar) + dz(z) = 2
    res = closure_residual(lambda w: np.conj(w), lambda w: -w, 0.3 + 1.1j)
    assert res == pytest.approx(2.0, rel=1e-8)
