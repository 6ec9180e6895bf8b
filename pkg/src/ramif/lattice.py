"""Brute-force lattice sums: Eisenstein series and multi-banana graph sums.

All sums run over the square box max(|m|, |n|) <= R in double precision with
numpy.  The part of the sum outside the box is estimated by the continuum
integral of the (homogeneous) summand and added back; what remains of the
tail after that correction is reported as the error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss

from .expansion import QExpansion
from .point import DEFAULT_PRECISION, HalfPlanePoint

__all__ = [
    "HalfPlanePoint", "LatticeTruncation", "LatticeValue", "bernoulli", "zeta_value",
    "divisor_sigma", "holomorphic_G", "eval_G", "eval_Ers", "eval_mgf",
    "DEFAULT_RADIUS_ERS", "DEFAULT_RADII_MGF",
]

DEFAULT_RADIUS_ERS = 200
DEFAULT_RADII_MGF = {2: 200, 3: 60, 4: 24}
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LatticeTruncation:
    radius: int
    tail_bound: float = math.inf


class LatticeValue(NamedTuple):
    value: complex
    error: float
    truncation: LatticeTruncation


# -- special numbers ----------------------------------------------------------

def bernoulli(r: int) -> Fraction:
    if r < 0 or (r > 1 and r % 2):
        raise ValueError(f"Bernoulli number requested for odd index {r}")
    p, q = mpmath.bernfrac(r)
    return Fraction(int(p), int(q))


def zeta_value(n: int, precision_bits: int = DEFAULT_PRECISION) -> mpmath.mpf:
    if n < 2:
        raise ValueError("zeta_value needs n >= 2")
    with mpmath.workprec(precision_bits):
        return +mpmath.zeta(n)


def divisor_sigma(n: int, k: int) -> int:
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            if d * d != n:
                total += (n // d) ** k
        d += 1
    return total


def holomorphic_G(k: int, q_order: int, precision_bits: int = DEFAULT_PRECISION) -> QExpansion:
    """-B_k/(2k) + sum sigma_{k-1}(n) q^n, weights (k, 0)."""
    if k < 4 or k % 2:
        raise ValueError(f"holomorphic Eisenstein series needs even k >= 4, got {k}")
    B = bernoulli(k)
    with mpmath.workprec(precision_bits):
        coeffs = {(0, 0, 0): mpmath.mpf(-B.numerator) / (2 * k * B.denominator)}
        for n in range(1, q_order + 1):
            coeffs[(0, n, 0)] = divisor_sigma(n, k - 1)
    return QExpansion((k, 0), q_order, coeffs, precision_bits)


def eval_G(k: int, z, terms: int = 200) -> complex:
    """Direct q-series value of the holomorphic Eisenstein series."""
    z = HalfPlanePoint.coerce(z).z
    q = np.exp(2j * np.pi * z)
    B = bernoulli(k)
    total = -float(B) / (2 * k)
    n = np.arange(1, terms + 1)
    sig = np.array([divisor_sigma(int(i), k - 1) for i in n], dtype=float)
    return complex(total + np.sum(sig * q ** n))


# -- grids and tails ------------------------------------------------------------

@lru_cache(maxsize=8)
def _grid(R: int):
    ax = np.arange(-R, R + 1, dtype=float)
    m, n = np.meshgrid(ax, ax, indexing="ij")
    return m, n


@lru_cache(maxsize=4)
def _box_nodes(order: int = 64):
    # points and weights for the boundary of the unit box, arclength measure
    t, w = leggauss(order)
    one = np.ones_like(t)
    ms = np.concatenate([one, -one, t, t])
    ns = np.concatenate([t, t, one, -one])
    ws = np.concatenate([w, w, w, w])
    return ms, ns, ws


def _shell_tail(func, degree: int, R: int) -> complex:
    """Continuum estimate of the sum of func outside the box of radius R.

    func must be homogeneous of degree -degree (degree > 2) in (m, n).
    """
    rho = R + 0.5
    ms, ns, ws = _box_nodes()
    boundary = np.sum(ws * func(ms, ns))
    return complex(boundary * rho ** (2 - degree) / (degree - 2))


def _forms(z: complex, m, n):
    return m * z + n, m * z.conjugate() + n


def _tail_error(correction: complex, degree: int, R: int, terms_abs: float) -> float:
    # the continuum estimate is good to relative O(R^-2); the rest is roundoff
    return abs(correction) * 8.0 / (R + 0.5) ** 2 + 64 * EPS * terms_abs


# -- real analytic Eisenstein series ----------------------------------------------

def _ers_prefactor(r: int, s: int, y: float) -> complex:
    w = r + s
    L = -2 * math.pi * y
    return math.factorial(w) / (2 * (2j * math.pi) ** (w + 2)) * L


def eval_Ers(r: int, s: int, z, radius: int = DEFAULT_RADIUS_ERS,
             tail_correction: bool = True) -> LatticeValue:
    if r < 0 or s < 0:
        raise ValueError("eval_Ers needs r, s >= 0")
    if r + s < 1:
        raise ValueError("eval_Ers needs r + s >= 1 (the weight-zero sum diverges)")
    zc = HalfPlanePoint.coerce(z).z
    R = int(radius)

    def summand(m, n):
        a, b = _forms(zc, m, n)
        return 1.0 / (a ** (r + 1) * b ** (s + 1))

    m, n = _grid(R)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = summand(m, n)
    terms[R, R] = 0
    S = complex(np.sum(terms))
    mag = float(np.sum(np.abs(terms)))
    deg = r + s + 2
    corr = _shell_tail(summand, deg, R)
    if (r + s) % 2:
        corr = 0j
    pref = _ers_prefactor(r, s, zc.imag)
    if tail_correction:
        S += corr
        err = _tail_error(corr, deg, R, mag)
    else:
        err = abs(corr) * 2 + 64 * EPS * mag
    value = pref * S
    err *= abs(pref)
    return LatticeValue(value, err, LatticeTruncation(R, err))


# -- modular graph functions --------------------------------------------------------

def _propagator(z: complex, a: int, m, n):
    y = z.imag
    with np.errstate(divide="ignore"):
        return (y / (math.pi * np.abs(m * z + n) ** 2)) ** a


def _fft_conv(f, g):
    # full linear convolution of two square grids
    from numpy.fft import irfft2, rfft2
    shape = (f.shape[0] + g.shape[0] - 1, f.shape[1] + g.shape[1] - 1)
    out = irfft2(rfft2(f, shape) * rfft2(g, shape), shape)
    return out


def _center_crop(arr, R_full: int, R: int):
    c = R_full
    return arr[c - R:c + R + 1, c - R:c + R + 1]


def eval_mgf(indices: Sequence[int], z, radius: int | None = None,
             tail_correction: bool = True) -> LatticeValue:
    """The multi-banana sum C_{a1,...,ap} for p = 2, 3, 4.

    Momenta run over the box; the last one is fixed by momentum conservation
    and must also lie in the box and be nonzero.
    """
    idx = [int(a) for a in indices]
    p = len(idx)
    if p < 2 or p > 4:
        raise ValueError(f"eval_mgf supports 2 to 4 propagators, got {p}")
    if any(a < 1 for a in idx):
        raise ValueError(f"propagator exponents must be >= 1, got {idx}")
    if sum(idx) < p:
        raise ValueError("sum does not converge")
    zc = HalfPlanePoint.coerce(z).z
    R = int(radius or DEFAULT_RADII_MGF[p])
    m, n = _grid(R)
    props = []
    for a in idx:
        f = _propagator(zc, a, m, n)
        f[R, R] = 0
        props.append(f)

    def prop_fn(a):
        return lambda mm, nn: _propagator(zc, a, mm, nn)

    if p == 2:
        # second momentum is minus the first; propagators are even
        terms = props[0] * props[1]
        S = float(np.sum(terms))
        mag = S
        deg = 2 * sum(idx)
        corr = _shell_tail(lambda mm, nn: prop_fn(idx[0])(mm, nn) * prop_fn(idx[1])(mm, nn), deg, R).real
    else:
        conv = props[0]
        for f in props[1:-1]:
            conv = _fft_conv(conv, f)
        Rc = (conv.shape[0] - 1) // 2
        inner = _center_crop(conv, Rc, R)
        # sum_{k in box} f_last(k) * conv(-k); propagators are even in k
        S = float(np.sum(props[-1] * inner[::-1, ::-1]))
        mag = S
        ones = [float(np.sum(f)) for f in props]
        corr = 0.0
        # leading tail: two momenta large and back to back, the rest bounded
        for i in range(p):
            for j in range(i + 1, p):
                deg = 2 * (idx[i] + idx[j])
                fi, fj = prop_fn(idx[i]), prop_fn(idx[j])
                t = _shell_tail(lambda mm, nn: fi(mm, nn) * fj(mm, nn), deg, R).real
                rest = 1.0
                for l in range(p):
                    if l not in (i, j):
                        rest *= ones[l]
                corr += t * rest
    if tail_correction:
        S += corr
        err = _tail_error(corr, 0, R, mag) + (abs(corr) * 4.0 / R if p > 2 else 0.0)
    else:
        err = abs(corr) * 2 + 64 * EPS * mag
    return LatticeValue(complex(S, 0.0), err, LatticeTruncation(R, err))
