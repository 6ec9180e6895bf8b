"""Polynomial representations V_{2n} of SL(2, Z) and the cross-derivative projector.

A BiPolynomial is a homogeneous polynomial in two variables.  In the
monomial basis the variables are X, Y; in the equivariant basis at a point z
they are u = X - zY and v = X - zbar Y.  Coefficients are either exact
(ints, Fractions, GaussQ) or complex floats, and the two are never mixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

Exp = Tuple[int, int]


class GaussQ:
    """Gaussian rational a + bi with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(x):
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussQ(x, 0)
        return NotImplemented

    def __add__(self, o):
        o = self._lift(o)
        if o is NotImplemented:
            return o
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, o):
        o = self._lift(o)
        if o is NotImplemented:
            return o
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._lift(o)
        if o is NotImplemented:
            return o
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        if o is NotImplemented:
            return o
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("GaussQ division by zero")
        return self * GaussQ(o.re / den, -o.im / den)

    def __rtruediv__(self, o):
        return GaussQ._lift(o) / self

    def __pow__(self, k: int):
        out = GaussQ(1)
        for _ in range(k):
            out = out * self
        return out

    def conjugate(self):
        return GaussQ(self.re, -self.im)

    def __eq__(self, o):
        o = self._lift(o) if not isinstance(o, GaussQ) else o
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re or self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, GaussQ)) and not isinstance(c, bool)


def _conj(c):
    if isinstance(c, GaussQ):
        return c.conjugate()
    if isinstance(c, (int, Fraction)):
        return c
    return np.conj(c)


@dataclass(frozen=True)
class BiPolynomial:
    degree: int
    coeffs: Mapping[Exp, object]
    basis: str = "monomial"          # or "equivariant"
    z: object = None                 # base point of the equivariant basis

    def __post_init__(self):
        for (i, j) in self.coeffs:
            if i + j != self.degree or i < 0 or j < 0:
                raise ValueError(f"exponent ({i},{j}) does not have degree {self.degree}")
        if self.basis not in ("monomial", "equivariant"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.basis == "equivariant" and self.z is None:
            raise ValueError("equivariant basis needs its base point z")
        kinds = {_is_exact(c) for c in self.coeffs.values()}
        if len(kinds) > 1:
            raise TypeError("exact and floating coefficients cannot be mixed")

    @property
    def exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs.values())

    def clean(self) -> "BiPolynomial":
        return BiPolynomial(self.degree, {e: c for e, c in self.coeffs.items() if c != 0},
                            self.basis, self.z)

    def __add__(self, other: "BiPolynomial") -> "BiPolynomial":
        if (self.degree, self.basis) != (other.degree, other.basis):
            raise ValueError("degree or basis mismatch")
        if self.coeffs and other.coeffs and self.exact != other.exact:
            raise TypeError("exact and floating coefficients cannot be mixed")
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return BiPolynomial(self.degree, out, self.basis, self.z).clean()

    def scale(self, c) -> "BiPolynomial":
        return BiPolynomial(self.degree, {e: c * v for e, v in self.coeffs.items()},
                            self.basis, self.z)

    def __eq__(self, other):
        if not isinstance(other, BiPolynomial):
            return NotImplemented
        a, b = self.clean(), other.clean()
        return (a.degree, a.basis, dict(a.coeffs)) == (b.degree, b.basis, dict(b.coeffs))

    def __hash__(self):
        return hash((self.degree, self.basis, tuple(sorted(self.clean().coeffs))))

    def as_array(self) -> np.ndarray:
        """Coefficients indexed by the power of the second variable."""
        out = np.zeros(self.degree + 1, dtype=complex)
        for (i, j), c in self.coeffs.items():
            out[j] = complex(c)
        return out

    @classmethod
    def from_array(cls, arr, basis="monomial", z=None) -> "BiPolynomial":
        d = len(arr) - 1
        return cls(d, {(d - j, j): complex(arr[j]) for j in range(d + 1) if arr[j] != 0}, basis, z)


def monomial(i: int, j: int, coeff=1) -> BiPolynomial:
    return BiPolynomial(i + j, {(i, j): coeff})


def poly_mul(P: BiPolynomial, Q: BiPolynomial) -> BiPolynomial:
    if P.basis != Q.basis:
        raise ValueError("basis mismatch")
    out: Dict[Exp, object] = {}
    for (i1, j1), c1 in P.coeffs.items():
        for (i2, j2), c2 in Q.coeffs.items():
            e = (i1 + i2, j1 + j2)
            out[e] = out[e] + c1 * c2 if e in out else c1 * c2
    return BiPolynomial(P.degree + Q.degree, out, P.basis, P.z).clean()


def _linear_powers(a, b, n):
    """Coefficients of (a X + b Y)^n as a list indexed by the power of Y."""
    return [comb(n, j) * a ** (n - j) * b ** j for j in range(n + 1)]


def linear_substitute(P: BiPolynomial, first, second, basis="monomial", z=None) -> BiPolynomial:
    """Replace the two variables by first = (a, b) and second = (c, d).

    Variable one becomes a X' + b Y', variable two becomes c X' + d Y'.
    """
    a, b = first
    c, d = second
    n = P.degree
    out: Dict[Exp, object] = {}
    for (i, j), coef in P.coeffs.items():
        A = _linear_powers(a, b, i)
        B = _linear_powers(c, d, j)
        for p, x in enumerate(A):
            for q, y in enumerate(B):
                e = (n - p - q, p + q)
                v = coef * x * y
                out[e] = out[e] + v if e in out else v
    return BiPolynomial(n, out, basis, z).clean()


def slash_poly(P: BiPolynomial, gamma) -> BiPolynomial:
    """(X, Y) -> (aX + bY, cX + dY)."""
    if P.basis != "monomial":
        raise ValueError("slash_poly works in the monomial basis")
    return linear_substitute(P, (gamma.a, gamma.b), (gamma.c, gamma.d))


def to_equivariant_basis(P: BiPolynomial, z) -> BiPolynomial:
    """Rewrite in powers of u = X - zY and v = X - zbar Y."""
    if P.basis != "monomial":
        raise ValueError("expected the monomial basis")
    zb = _conj(z)
    den = zb - z
    # X = (zbar u - z v)/(zbar - z),  Y = (u - v)/(zbar - z)
    return linear_substitute(P, (zb / den, -z / den), (1 / den, -1 / den),
                             basis="equivariant", z=z)


def from_equivariant_basis(P: BiPolynomial) -> BiPolynomial:
    if P.basis != "equivariant":
        raise ValueError("expected the equivariant basis")
    z = P.z
    return linear_substitute(P, (1, -z), (1, -_conj(z)))


# -- tensors and the projector ------------------------------------------------------

@dataclass(frozen=True)
class TensorBiPolynomial:
    degrees: Tuple[int, int]
    coeffs: Mapping[Tuple[Exp, Exp], object]
    basis: str = "monomial"
    z: object = None


def tensor(P: BiPolynomial, Q: BiPolynomial) -> TensorBiPolynomial:
    if P.basis != Q.basis:
        raise ValueError("basis mismatch")
    out = {}
    for e1, c1 in P.coeffs.items():
        for e2, c2 in Q.coeffs.items():
            out[(e1, e2)] = c1 * c2
    return TensorBiPolynomial((P.degree, Q.degree), out, P.basis, P.z)


def slash_tensor(t: TensorBiPolynomial, gamma) -> TensorBiPolynomial:
    out: dict = {}
    for (e1, e2), c in t.coeffs.items():
        p1 = slash_poly(BiPolynomial(t.degrees[0], {e1: 1}), gamma)
        p2 = slash_poly(BiPolynomial(t.degrees[1], {e2: 1}), gamma)
        for f1, c1 in p1.coeffs.items():
            for f2, c2 in p2.coeffs.items():
                key = (f1, f2)
                v = c * c1 * c2
                out[key] = out[key] + v if key in out else v
    return TensorBiPolynomial(t.degrees, out, t.basis, t.z)


def _falling(n: int, k: int) -> int:
    if k > n:
        return 0
    return factorial(n) // factorial(n - k)


def cross_derivative_scalar(e1: Exp, e2: Exp, k: int) -> int:
    """m((d1 x d2 - d2 x d1)^k) on a pure monomial tensor, as a scalar.

    The image of x^i1 y^j1 (x) x^i2 y^j2 is always this scalar times
    x^(i1+i2-k) y^(j1+j2-k).
    """
    (i1, j1), (i2, j2) = e1, e2
    total = 0
    for i in range(k + 1):
        term = _falling(i1, k - i) * _falling(j1, i) * _falling(j2, k - i) * _falling(i2, i)
        if term:
            total += (-1) ** i * comb(k, i) * term
    return total


def delta_projector(t: TensorBiPolynomial, k: int) -> BiPolynomial:
    """delta^k = m o (d/dX x d/dY - d/dY x d/dX)^k on V_{d1} x V_{d2}."""
    d1, d2 = t.degrees
    deg = d1 + d2 - 2 * k
    if k > d1 or k > d2:
        return BiPolynomial(max(deg, 0), {}, t.basis, t.z)
    out: Dict[Exp, object] = {}
    for (e1, e2), c in t.coeffs.items():
        s = cross_derivative_scalar(e1, e2, k)
        if s:
            e = (e1[0] + e2[0] - k, e1[1] + e2[1] - k)
            out[e] = out[e] + s * c if e in out else s * c
    return BiPolynomial(deg, out, t.basis, t.z).clean()


def delta_uv_power(A: Mapping[Exp, object], B: Mapping[Exp, object], k: int) -> dict:
    """The same projector on component maps, for any coefficient ring.

    In the (u, v) coordinates the projector is (z - zbar)^k times this map.
    """
    out: dict = {}
    for e1, a in A.items():
        for e2, b in B.items():
            s = cross_derivative_scalar(e1, e2, k)
            if not s:
                continue
            e = (e1[0] + e2[0] - k, e1[1] + e2[1] - k)
            v = (a * b) * s
            out[e] = out[e] + v if e in out else v
    return out


def delta_closed_form(G_coeff, m: int, D_components: Mapping[Exp, object], k: int,
                      z=None) -> Dict[Exp, object]:
    """Components of delta^k(G (X - zY)^{2m} x D) / (k!)^2 in the (u, v) basis.

    F_{r,s} = (z - zbar)^k G binom(2m, k) binom(s + k, k) D_{r-2m+k, s+k}.
    Without z the factor (z - zbar)^k is left out.
    """
    if not D_components:
        return {}
    two_n = sum(next(iter(D_components)))
    two_m = 2 * m
    if k > two_m or k > two_n:
        return {}
    factor = 1 if z is None else (z - _conj(z)) ** k
    out = {}
    deg = two_m + two_n - 2 * k
    for s in range(deg + 1):
        r = deg - s
        D = D_components.get((r - two_m + k, s + k), 0)
        if D:
            out[(r, s)] = factor * G_coeff * comb(two_m, k) * comb(s + k, k) * D
    return out


# -- numeric vectors ------------------------------------------------------------------

def equivariant_to_monomial_array(components: Mapping[Exp, complex], z: complex) -> np.ndarray:
    """sum c_{r,s} (X - zY)^r (X - zbar Y)^s as an array over powers of Y."""
    if not components:
        return np.zeros(1, dtype=complex)
    deg = sum(next(iter(components)))
    out = np.zeros(deg + 1, dtype=complex)
    u = np.array([1.0, -z])
    v = np.array([1.0, -np.conj(z)])
    upow = [np.array([1.0 + 0j])]
    vpow = [np.array([1.0 + 0j])]
    for _ in range(deg):
        upow.append(np.convolve(upow[-1], u))
        vpow.append(np.convolve(vpow[-1], v))
    for (r, s), c in components.items():
        out += c * np.convolve(upow[r], vpow[s])
    return out


def slash_array(arr: np.ndarray, gamma) -> np.ndarray:
    """slash_poly on a coefficient array (powers of Y), complex coefficients."""
    P = BiPolynomial.from_array(arr)
    return slash_poly(P, gamma).as_array() if P.coeffs else np.zeros_like(arr)


def slash_tensor_array(arr: np.ndarray, gamma) -> np.ndarray:
    """Slash on V_{d1} x V_{d2} stored as a (d1+1, d2+1) array."""
    M1 = _slash_matrix(arr.shape[0] - 1, gamma)
    M2 = _slash_matrix(arr.shape[1] - 1, gamma)
    return M1 @ arr @ M2.T


def _slash_matrix(d: int, gamma) -> np.ndarray:
    M = np.zeros((d + 1, d + 1), dtype=complex)
    for j in range(d + 1):
        col = slash_poly(BiPolynomial(d, {(d - j, j): 1}), gamma)
        for (_, jj), c in col.coeffs.items():
            M[jj, j] = complex(c)
    return M


def _equivariant_monomial(p: int, q: int, z) -> BiPolynomial:
    return from_equivariant_basis(BiPolynomial(p + q, {(p, q): 1}, "equivariant", z))


def closed_form_mismatches(two_m: int, two_n: int, k: int, z) -> list:
    """Basis tensors u^{2m} (x) u^p v^q where delta_closed_form and the direct
    projector (divided by (k!)^2) disagree; empty when they agree exactly.

    Pass an exact z (GaussQ) to compare in rational arithmetic.
    """
    bad = []
    head = _equivariant_monomial(two_m, 0, z)
    for p in range(two_n + 1):
        q = two_n - p
        t = tensor(head, _equivariant_monomial(p, q, z))
        proj = to_equivariant_basis(delta_projector(t, k), z)
        got = {e: c * Fraction(1, factorial(k) ** 2) for e, c in proj.coeffs.items() if c != 0}
        want = {e: c for e, c in delta_closed_form(1, two_m // 2, {(p, q): 1}, k, z).items() if c != 0}
        if got != want:
            bad.append((p, q))
    return bad
