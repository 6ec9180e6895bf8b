"""Vector-valued one-forms built from Eisenstein series and their primitives.

Vectors live in V_{d} (homogeneous polynomials of degree d in X, Y) and are
stored as coefficient arrays over powers of Y.  Tensor-valued forms of the
length-two construction are 2-d arrays (one axis per factor).  A family
F = {F_{r,s}} of total weight W becomes the vector sum F_{r,s} u^r v^s with
u = X - zY and v = X - zbar Y.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss

from . import expansion as ex
from . import solver as so
from .numeric import DEFAULT_STENCIL, StencilConfig, closure_residual, fd_dz, fd_dzbar
from .point import SAMPLE_POINTS
from .report import Timer, VerificationReport
from .vectors import (_slash_matrix, delta_closed_form, delta_uv_power,
                      equivariant_to_monomial_array)

DEFAULT_QUAD_ORDER = 32
MAX_SEGMENT = 0.5  # hyperbolic length


@dataclass(frozen=True)
class OneForm:
    """u1 dz + u2 dzbar with u1, u2 returning arrays in the monomial basis."""

    u1: Callable
    u2: Callable
    shape: Tuple[int, ...]
    label: str = ""

    def __call__(self, z):
        return self.u1(z), self.u2(z)


def _u_power(z, n):
    # (X - zY)^n as an array over powers of Y
    return equivariant_to_monomial_array({(n, 0): 1.0}, z)


def _v_power(z, n):
    return equivariant_to_monomial_array({(0, n): 1.0}, z)


def _holo(k: int, N: int):
    return ex.as_function(so.G(k, N))


def family_vector(family: so.SolvedFamily) -> Callable:
    """z -> sum F_{r,s}(z) u^r v^s as a monomial-basis array."""
    fns = {rs: ex.as_function(e) for rs, e in family.components.items()}

    def vec(z):
        return equivariant_to_monomial_array({rs: f(z) for rs, f in fns.items()}, z)
    return vec


def eisenstein_vector(w: int, q_order: int = 12) -> Callable:
    """The vector E_w = sum E_{r,s} u^r v^s, r + s = w (w = 0 gives 1)."""
    if w == 0:
        return lambda z: np.ones(1, dtype=complex)
    return family_vector(so.eisenstein_family(w, q_order))


def holomorphic_vector(k: int, q_order: int = 12) -> Callable:
    """2 pi i G_k(z) (X - zY)^(k-2)."""
    g = _holo(k, q_order)
    return lambda z: 2j * np.pi * g(z) * _u_power(z, k - 2)


def antiholomorphic_vector(k: int, q_order: int = 12) -> Callable:
    """The complex conjugate of holomorphic_vector: -2 pi i conj(G_k) (X - zbar Y)^(k-2)."""
    g = _holo(k, q_order)
    return lambda z: -2j * np.pi * np.conj(g(z)) * _v_power(z, k - 2)


def build_D2(a: int, b: int, q_order: int = 12) -> OneForm:
    """E_{2a} (x) E_{2b-2} dz + E_{2a-2} (x) conj(E_{2b}) dzbar as tensors."""
    if a < 2 or b < 2:
        raise ValueError("build_D2 needs a, b >= 2")
    Ea = holomorphic_vector(2 * a, q_order)
    Eb = antiholomorphic_vector(2 * b, q_order)
    va = eisenstein_vector(2 * a - 2, q_order)
    vb = eisenstein_vector(2 * b - 2, q_order)
    return OneForm(lambda z: np.multiply.outer(Ea(z), vb(z)),
                   lambda z: np.multiply.outer(va(z), Eb(z)),
                   (2 * a - 1, 2 * b - 1), f"D[{2 * a},{2 * b}]")


def build_D3(a: int, b: int, c: int, families: Optional[dict] = None,
             q_order: int = 8) -> OneForm:
    """E_{2a+2} F_{bc} dz + (F_{ab} conj(E_{2c+2}) - 2 pi i C E_{2a} conj(G) v^{2b+2c}) dzbar.

    F_{bc} and F_{ab} are the k = 0 length-two families; ``families`` may
    supply them keyed by (b, c) and (a, b), otherwise they are solved here.
    The last term is present only when the inner constant C is nonzero.
    """
    if 2 * (a + b + c) > 8:
        raise so.OutOfScope("length three is supported for 2a + 2b + 2c <= 8 only")
    fams = dict(families or {})
    for key in ((b, c), (a, b)):
        if key not in fams:
            if families is not None:
                raise KeyError(f"missing prerequisite family F^(0) for {key}")
            fams[key] = so.length2_family(key[0], key[1], 0, q_order)
    inner, left = fams[(b, c)], fams[(a, b)]
    Ea = holomorphic_vector(2 * a + 2, q_order)
    Ec = antiholomorphic_vector(2 * c + 2, q_order)
    Fbc, Fab = family_vector(inner), family_vector(left)
    C = complex(inner.spec.constants.get(so.constant_name(2 * b + 2, 2 * c + 2, k=0), 0))
    va = eisenstein_vector(2 * a, q_order)
    gbar = _holo(2 * b + 2 * c + 2, q_order)

    def u2(z):
        out = np.convolve(Fab(z), Ec(z))
        if C:
            out = out - 2j * np.pi * C * np.conj(gbar(z)) * np.convolve(va(z), _v_power(z, 2 * b + 2 * c))
        return out
    W = 2 * (a + b + c)
    return OneForm(lambda z: np.convolve(Ea(z), Fbc(z)), u2, (W + 1,),
                   f"D[{2 * a + 2},{2 * b + 2},{2 * c + 2}]")


def closure_check(form: OneForm, points: Sequence[complex] = SAMPLE_POINTS,
                  tol: float = 1e-6, cfg: StencilConfig = DEFAULT_STENCIL) -> VerificationReport:
    rep = VerificationReport(f"closure {form.label}", tolerance=tol, params={"form": form.label})
    with Timer(rep):
        for z in points:
            rep.add(z, closure_residual(form.u1, form.u2, z, cfg))
    return rep


def _slash_any(arr: np.ndarray, gamma) -> np.ndarray:
    out = arr
    for axis in range(arr.ndim):
        M = _slash_matrix(arr.shape[axis] - 1, gamma)
        out = np.moveaxis(np.tensordot(M, np.moveaxis(out, axis, 0), axes=1), 0, axis)
    return out


def equivariance_check(form: OneForm, gamma, points: Sequence[complex] = SAMPLE_POINTS,
                       tol: float = 1e-6) -> VerificationReport:
    """The pulled-back form D(gamma z)|gamma against D(z), both dz and dzbar parts."""
    rep = VerificationReport(f"equivariance {form.label} {gamma}", tolerance=tol,
                             params={"form": form.label})
    with Timer(rep):
        for z in points:
            gz = gamma.act(z)
            j = gamma.c * z + gamma.d
            r1 = _slash_any(form.u1(gz), gamma) / j ** 2 - form.u1(z)
            r2 = _slash_any(form.u2(gz), gamma) / np.conj(j) ** 2 - form.u2(z)
            rep.add(z, max(np.max(np.abs(r1)), np.max(np.abs(r2))))
    return rep


# -- path integrals -------------------------------------------------------------------------

@dataclass(frozen=True)
class PathIntegral:
    value: np.ndarray
    error: float
    flagged: bool


def _subdivide(z0: complex, z1: complex):
    ymin = min(z0.imag, z1.imag)
    hyp = abs(z1 - z0) / ymin
    n = max(1, int(np.ceil(hyp / MAX_SEGMENT)))
    return [z0 + (z1 - z0) * t for t in np.linspace(0, 1, n + 1)]


def _segment(form: OneForm, za: complex, zb: complex, order: int):
    t, w = leggauss(order)
    mid, half = (za + zb) / 2, (zb - za) / 2
    total = 0
    for ti, wi in zip(t, w):
        z = mid + half * ti
        u1, u2 = form(z)
        total = total + wi * (u1 * half + u2 * np.conj(half))
    return total


def path_integral(form: OneForm, z0, z1, path: Sequence[complex] = (),
                  quad_order: int = DEFAULT_QUAD_ORDER, tol: float = 1e-10) -> PathIntegral:
    """Integral of u1 dz + u2 dzbar along the polyline z0 -> path... -> z1.

    The error estimate compares against a half-order rule; the result is
    flagged when it exceeds ``tol`` times the size of the integral.
    """
    verts = [complex(z0), *map(complex, path), complex(z1)]
    if any(v.imag <= 0 for v in verts):
        raise ValueError("path leaves the upper half plane")
    total = 0
    coarse = 0
    for za, zb in zip(verts, verts[1:]):
        pts = _subdivide(za, zb)
        for p, q in zip(pts, pts[1:]):
            total = total + _segment(form, p, q, quad_order)
            coarse = coarse + _segment(form, p, q, max(quad_order // 2, 2))
    total = np.asarray(total)
    err = float(np.max(np.abs(total - coarse)))
    scale = max(float(np.max(np.abs(total))), 1e-300)
    return PathIntegral(total, err, err > tol * max(scale, 1.0))


def primitive(form: OneForm, base: complex, quad_order: int = DEFAULT_QUAD_ORDER) -> Callable:
    """K(z) = (1/2) * integral from base to z, i.e. -(1/2) of the integral from z to base.

    Defined up to the additive constant fixed by the base point; only its
    derivatives are meaningful here.
    """
    def K(z):
        return 0.5 * path_integral(form, base, z, quad_order=quad_order).value
    return K


def primitive_derivative_check(a: int, b: int, z: complex, base: complex = 1.2j,
                               cfg: StencilConfig = StencilConfig(rel_h=1e-2)) -> Tuple[float, float]:
    """|dK/dz - pi i G_{2a} u^{2a-2} (x) E_{2b-2}| and the same for dK/dzbar.

    The second target is pi i E_{2a-2} (x) conj(G_{2b}) v^{2b-2} with the
    sign of the conjugate vector, i.e. half of u2.
    """
    form = build_D2(a, b)
    K = primitive(form, base)
    d = np.asarray(fd_dz(K, z, cfg))
    db = np.asarray(fd_dzbar(K, z, cfg))
    target = 0.5 * form.u1(z)
    target_b = 0.5 * form.u2(z)
    return float(np.max(np.abs(d - target))), float(np.max(np.abs(db - target_b)))


# -- derivative systems of the primitives ---------------------------------------------------

def regenerated_rhs(length: int, a: int, b: int, c: Optional[int] = None, k: int = 0,
                    q_order: Optional[int] = None, precision_bits: int = 128,
                    constants: Optional[dict] = None):
    """Rebuild the d and dbar right-hand sides from the vector derivatives of K.

    Length two uses the closed form of the projector delta^k on
    G u^{2a} (x) E_{2b}; length three multiplies G u^{2a} into the inner
    family vector.  Returns (d_rhs, dbar_rhs) keyed like SystemSpec.
    """
    N = q_order if q_order is not None else so.DEFAULT_Q_ORDER[length]
    P = precision_bits
    consts = dict(constants or {})
    if length == 2:
        W = 2 * a + 2 * b - 2 * k
        Ga = ex.mul_L(so.G(2 * a + 2, N, P), k + 1)
        Gb = ex.mul_L(so.Gbar(2 * b + 2, N, P), k + 1)
        Eb = {(r, 2 * b - r): so.E(r, 2 * b - r, N, P) for r in range(2 * b + 1)}
        # the dbar side is the mirror image: swap the roles of u and v
        Ea_sw = {(2 * a - r, r): so.E(r, 2 * a - r, N, P) for r in range(2 * a + 1)}
        d = delta_closed_form(Ga, a, Eb, k)
        db_sw = delta_closed_form(Gb, b, Ea_sw, k)
        d_rhs = {}
        dbar_rhs = {}
        for s in range(W + 1):
            r = W - s
            d_rhs[(r, s)] = d.get((r, s), ex.QExpansion.zero((r + 1, s - 1), N, P))
            dbar_rhs[(r, s)] = db_sw.get((s, r), ex.QExpansion.zero((r - 1, s + 1), N, P))
        C = consts.get(so.constant_name(2 * a + 2, 2 * b + 2, k=k), 0)
        if C:
            dbar_rhs[(0, W)] = dbar_rhs[(0, W)] + ex.scale(ex.mul_L(so.Gbar(W + 2, N, P), 1), C)
        return d_rhs, dbar_rhs
    if length == 3:
        W = 2 * (a + b + c)
        inner_name = so.constant_name(2 * b + 2, 2 * c + 2, k=0)
        left_name = so.constant_name(2 * a + 2, 2 * b + 2, k=0)
        own_name = so.constant_name(2 * a + 2, 2 * b + 2, 2 * c + 2)
        C_inner = consts.get(inner_name, 0)
        inner = so.length2_family(b, c, 0, N, P, {inner_name: C_inner})
        left = so.length2_family(a, b, 0, N, P, {left_name: consts.get(left_name, 0)})
        d = delta_uv_power({(2 * a, 0): ex.mul_L(so.G(2 * a + 2, N, P), 1)}, inner.components, 0)
        db = delta_uv_power(left.components, {(0, 2 * c): ex.mul_L(so.Gbar(2 * c + 2, N, P), 1)}, 0)
        if C_inner:
            gb = ex.scale(ex.mul_L(so.Gbar(2 * b + 2 * c + 2, N, P), 1), C_inner)
            Ea = {(r, 2 * a - r): so.E(r, 2 * a - r, N, P) for r in range(2 * a + 1)}
            extra = delta_uv_power(Ea, {(0, 2 * b + 2 * c): gb}, 0)
            for key, v in extra.items():
                db[key] = db[key] + v if key in db else v
        d_rhs, dbar_rhs = {}, {}
        for s in range(W + 1):
            r = W - s
            d_rhs[(r, s)] = d.get((r, s), ex.QExpansion.zero((r + 1, s - 1), N, P))
            dbar_rhs[(r, s)] = db.get((r, s), ex.QExpansion.zero((r - 1, s + 1), N, P))
        C_own = consts.get(own_name, 0)
        if C_own:
            dbar_rhs[(0, W)] = dbar_rhs[(0, W)] + ex.scale(ex.mul_L(so.Gbar(W + 2, N, P), 1), C_own)
        return d_rhs, dbar_rhs
    raise ValueError("length must be 2 or 3")


def verify_K_derivatives(a: int, b: int, c: Optional[int] = None, k: int = 0,
                         q_order: Optional[int] = None, constants: Optional[dict] = None,
                         tol: float = 1e-30) -> VerificationReport:
    """Compare the regenerated right-hand sides with the ones the solver uses."""
    length = 2 if c is None else 3
    params = {"length": length, "a": a, "b": b, "k": k}
    if c is not None:
        params["c"] = c
    rep = VerificationReport(f"K derivatives {params}", tolerance=tol, params=params)
    with Timer(rep):
        spec = so.build_system(length, a, b, c, k=k, q_order=q_order, constants=constants)
        d_rhs, dbar_rhs = regenerated_rhs(length, a, b, c, k, spec.q_order, spec.precision_bits,
                                          spec.constants)
        for rs in spec.components():
            rep.add(f"d{rs}", ex.coeff_distance(d_rhs[rs], spec.d_rhs[rs]))
            rep.add(f"dbar{rs}", ex.coeff_distance(dbar_rhs[rs], spec.dbar_rhs[rs]))
    return rep
