"""Truncated bigraded Fourier expansions of real analytic modular forms.

An expansion is a finite sum

    sum_{j, m, n} a[j, m, n] * y^j * q^m * qbar^n,   q = exp(2 pi i z),

carrying a pair of modular weights (r, s).  The Laurent variable is y; powers
of L = -2 pi y are exposed through :func:`mul_L`.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from typing import Dict, Iterable, NamedTuple, Tuple

import mpmath
from mpmath import mpc, mpf

from .point import DEFAULT_PRECISION, HalfPlanePoint

Key = Tuple[int, int, int]

SCHEMA_VERSION = 1


class WeightPair(NamedTuple):
    r: int
    s: int

    def __add__(self, other):  # componentwise, not tuple concatenation
        return WeightPair(self.r + other[0], self.s + other[1])


class WeightMismatch(ValueError):
    pass


class Evaluation(NamedTuple):
    value: complex
    tail: float
    ok: bool


def prune_threshold(precision_bits: int) -> float:
    return 2.0 ** -(precision_bits - 16)


def _prune(data: Dict[Key, mpc], precision_bits: int, reference=None) -> Dict[Key, mpc]:
    # relative to the largest coefficient of the same Fourier mode, or of the
    # operands that produced it when a reference scale is given
    if not data:
        return data
    scale: Dict[Tuple[int, int], float] = dict(reference or {})
    for (j, m, n), c in data.items():
        a = abs(c)
        if a > scale.get((m, n), 0):
            scale[(m, n)] = a
    eps = prune_threshold(precision_bits)
    return {k: c for k, c in data.items() if abs(c) > eps * scale[(k[1], k[2])]}


class QExpansion:
    """Immutable truncated expansion with weights (r, s).

    Coefficients are mpmath complex numbers; modes with m or n above
    ``q_order`` are dropped on construction.
    """

    __slots__ = ("weights", "q_order", "precision_bits", "_c")

    def __init__(self, weights, q_order: int, coeffs=None,
                 precision_bits: int = DEFAULT_PRECISION, prune: bool = True,
                 reference=None):
        self.weights = WeightPair(int(weights[0]), int(weights[1]))
        if q_order < 0:
            raise ValueError("q_order must be non-negative")
        self.q_order = int(q_order)
        self.precision_bits = int(precision_bits)
        data: Dict[Key, mpc] = {}
        if coeffs:
            with mpmath.workprec(self.precision_bits):
                for (j, m, n), c in coeffs.items():
                    if m < 0 or n < 0:
                        raise ValueError(f"negative Fourier index ({m}, {n})")
                    if m > q_order or n > q_order:
                        continue
                    if not isinstance(c, mpc):
                        c = mpc(c)
                    if c:
                        data[(int(j), int(m), int(n))] = c
        if prune:
            data = _prune(data, self.precision_bits, reference)
        self._c = data

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, weights, q_order, precision_bits=DEFAULT_PRECISION):
        return cls(weights, q_order, None, precision_bits)

    @classmethod
    def constant(cls, value, weights=(0, 0), q_order=0, precision_bits=DEFAULT_PRECISION):
        return cls(weights, q_order, {(0, 0, 0): value}, precision_bits)

    @classmethod
    def monomial(cls, j, m, n, weights, q_order, value=1, precision_bits=DEFAULT_PRECISION):
        return cls(weights, q_order, {(j, m, n): value}, precision_bits)

    # -- inspection -------------------------------------------------------
    @property
    def coeffs(self) -> Dict[Key, mpc]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def __getitem__(self, key: Key) -> mpc:
        return self._c.get(key, mpc(0))

    def __len__(self):
        return len(self._c)

    @property
    def y_range(self) -> Tuple[int, int]:
        if not self._c:
            return (0, 0)
        js = [k[0] for k in self._c]
        return (min(js), max(js))

    def modes(self):
        return sorted({(m, n) for (_, m, n) in self._c})

    def mode(self, m: int, n: int) -> Dict[int, mpc]:
        return {j: c for (j, mm, nn), c in self._c.items() if mm == m and nn == n}

    def is_zero(self) -> bool:
        return not self._c

    def max_abs(self) -> float:
        return max((float(abs(c)) for c in self._c.values()), default=0.0)

    def __repr__(self):
        lo, hi = self.y_range
        return (f"QExpansion(weights={tuple(self.weights)}, q_order={self.q_order}, "
                f"y_range=[{lo}, {hi}], terms={len(self._c)})")

    # -- arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, QExpansion):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def truncate(self, q_order: int) -> "QExpansion":
        return QExpansion(self.weights, min(q_order, self.q_order), self._c,
                          self.precision_bits, prune=False)

    def with_weights(self, weights) -> "QExpansion":
        return QExpansion(weights, self.q_order, self._c, self.precision_bits, prune=False)

    # -- serialization ----------------------------------------------------
    def to_json_dict(self) -> dict:
        ndig = int(self.precision_bits * math.log10(2)) + 3
        rows = []
        for (j, m, n) in sorted(self._c):
            c = self._c[(j, m, n)]
            rows.append([j, m, n, _mpf_str(c.real, ndig), _mpf_str(c.imag, ndig)])
        return {
            "schema": SCHEMA_VERSION,
            "weights": list(self.weights),
            "q_order": self.q_order,
            "y_range": list(self.y_range),
            "precision_bits": self.precision_bits,
            "coeffs": rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "QExpansion":
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported expansion schema {doc.get('schema')!r}")
        bits = int(doc["precision_bits"])
        coeffs = {}
        with mpmath.workprec(bits):
            for j, m, n, re, im in doc["coeffs"]:
                coeffs[(j, m, n)] = mpc(mpf(re), mpf(im))
        return cls(doc["weights"], doc["q_order"], coeffs, bits, prune=False)

    @classmethod
    def from_json(cls, text: str) -> "QExpansion":
        return cls.from_json_dict(json.loads(text))


def _mpf_str(x: mpf, ndig: int) -> str:
    return mpmath.libmp.to_str(x._mpf_, ndig)


def _bits(*exps) -> int:
    return max(e.precision_bits for e in exps)


# -- ring operations ---------------------------------------------------------

def add(a: QExpansion, b: QExpansion) -> QExpansion:
    if tuple(a.weights) != tuple(b.weights):
        raise WeightMismatch(f"cannot add weights {tuple(a.weights)} and {tuple(b.weights)}")
    N = min(a.q_order, b.q_order)
    bits = _bits(a, b)
    out = dict(a._c)
    with mpmath.workprec(bits):
        for k, c in b._c.items():
            out[k] = out[k] + c if k in out else c
    ref = mode_scales(a)
    for mn, v in mode_scales(b).items():
        ref[mn] = max(ref[mn], v)
    return QExpansion(a.weights, N, out, bits, reference=ref)


def scale(a: QExpansion, factor) -> QExpansion:
    with mpmath.workprec(a.precision_bits):
        f = mpmath.mpmathify(factor)
        out = {k: c * f for k, c in a._c.items()}
    return QExpansion(a.weights, a.q_order, out, a.precision_bits, prune=False)


def linear_combination(terms: Iterable[Tuple[object, QExpansion]]) -> QExpansion:
    terms = list(terms)
    if not terms:
        raise ValueError("empty combination")
    w = tuple(terms[0][1].weights)
    N = min(t.q_order for _, t in terms)
    bits = _bits(*(t for _, t in terms))
    out: Dict[Key, mpc] = defaultdict(lambda: mpc(0))
    ref: Dict[Tuple[int, int], float] = defaultdict(float)
    with mpmath.workprec(bits):
        for f, t in terms:
            if tuple(t.weights) != w:
                raise WeightMismatch(f"cannot add weights {w} and {tuple(t.weights)}")
            f = mpmath.mpmathify(f)
            af = float(abs(f))
            for mn, v in mode_scales(t).items():
                ref[mn] = max(ref[mn], af * v)
            for k, c in t._c.items():
                out[k] += f * c
    return QExpansion(w, N, out, bits, reference=ref)


def _by_mode(a: QExpansion, N: int):
    modes = defaultdict(list)
    for (j, m, n), c in a._c.items():
        if m <= N and n <= N:
            modes[(m, n)].append((j, c))
    return modes


def mul(a: QExpansion, b: QExpansion) -> QExpansion:
    """Cauchy product, truncated at the smaller q_order."""
    N = min(a.q_order, b.q_order)
    bits = _bits(a, b)
    A = _by_mode(a, N)
    B = _by_mode(b, N)
    out: Dict[Key, mpc] = {}
    with mpmath.workprec(bits):
        for (m1, n1), ta in A.items():
            for (m2, n2), tb in B.items():
                m, n = m1 + m2, n1 + n2
                if m > N or n > N:
                    continue
                for j1, c1 in ta:
                    for j2, c2 in tb:
                        k = (j1 + j2, m, n)
                        p = c1 * c2
                        out[k] = out[k] + p if k in out else p
    return QExpansion(a.weights + b.weights, N, out, bits)


def product(*factors: QExpansion) -> QExpansion:
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f)
    return out


def mul_L(a: QExpansion, k: int) -> QExpansion:
    """Multiply by L^k = (-2 pi y)^k; weights shift by (-k, -k)."""
    with mpmath.workprec(a.precision_bits):
        f = (-2 * mpmath.pi) ** k
        out = {(j + k, m, n): c * f for (j, m, n), c in a._c.items()}
    return QExpansion((a.weights.r - k, a.weights.s - k), a.q_order, out,
                      a.precision_bits, prune=False)


def multiply_y(a: QExpansion, k: int) -> QExpansion:
    """Multiply by y^k without touching the weights."""
    out = {(j + k, m, n): c for (j, m, n), c in a._c.items()}
    return QExpansion(a.weights, a.q_order, out, a.precision_bits, prune=False)


# -- differential operators ----------------------------------------------------

def partial(a: QExpansion) -> QExpansion:
    """The weight-raising operator 2iy d/dz + r."""
    r = a.weights.r
    out: Dict[Key, mpc] = {}
    with mpmath.workprec(a.precision_bits):
        four_pi = 4 * mpmath.pi
        for (j, m, n), c in a._c.items():
            if m:
                k = (j + 1, m, n)
                v = -four_pi * m * c
                out[k] = out[k] + v if k in out else v
            if j + r:
                k = (j, m, n)
                v = (j + r) * c
                out[k] = out[k] + v if k in out else v
    return QExpansion((r + 1, a.weights.s - 1), a.q_order, out, a.precision_bits)


def partial_bar(a: QExpansion) -> QExpansion:
    """The operator -2iy d/dzbar + s."""
    s = a.weights.s
    out: Dict[Key, mpc] = {}
    with mpmath.workprec(a.precision_bits):
        four_pi = 4 * mpmath.pi
        for (j, m, n), c in a._c.items():
            if n:
                k = (j + 1, m, n)
                v = -four_pi * n * c
                out[k] = out[k] + v if k in out else v
            if j + s:
                k = (j, m, n)
                v = (j + s) * c
                out[k] = out[k] + v if k in out else v
    return QExpansion((a.weights.r - 1, s + 1), a.q_order, out, a.precision_bits)


def laplacian(a: QExpansion) -> QExpansion:
    """-dbar_{s-1} d_r + r(s-1), weights preserved."""
    r, s = a.weights
    return add(scale(partial_bar(partial(a)), -1), scale(a, r * (s - 1)))


def laplacian_alt(a: QExpansion) -> QExpansion:
    """The second factorization -d_{r-1} dbar_s + s(r-1)."""
    r, s = a.weights
    return add(scale(partial(partial_bar(a)), -1), scale(a, s * (r - 1)))


def conjugate(a: QExpansion) -> QExpansion:
    with mpmath.workprec(a.precision_bits):
        out = {(j, n, m): mpmath.conj(c) for (j, m, n), c in a._c.items()}
    return QExpansion((a.weights.s, a.weights.r), a.q_order, out, a.precision_bits,
                      prune=False)


# -- evaluation --------------------------------------------------------------------

def evaluate(a: QExpansion, z, tol: float | None = None) -> Evaluation:
    """Value at z with a geometric estimate of the truncation tail."""
    pt = HalfPlanePoint.coerce(z, a.precision_bits)
    bits = max(a.precision_bits, pt.precision_bits)
    with mpmath.workprec(bits):
        zz = mpc(pt.x, pt.y)
        y = zz.imag
        q = mpmath.exp(2j * mpmath.pi * zz)
        qb = mpmath.conj(q)
        qa = abs(q)
        qpow, qbpow, ypow = {}, {}, {}
        total = mpc(0)
        edge = mpf(0)
        N = a.q_order
        for (j, m, n), c in a._c.items():
            if m not in qpow:
                qpow[m] = q ** m
            if n not in qbpow:
                qbpow[n] = qb ** n
            if j not in ypow:
                ypow[j] = y ** j
            t = c * ypow[j] * qpow[m] * qbpow[n]
            total += t
            if max(m, n) == N:
                edge += abs(t)
        tail = _tail_from_edge(float(edge), float(qa), N, a) if N > 0 else 0.0
    ok = tol is None or tail <= tol
    return Evaluation(complex(total), tail, ok)


def _tail_from_edge(edge: float, qa: float, N: int, a: QExpansion) -> float:
    # shell t beyond the edge is smaller by |q|^t but coefficients of weight-k
    # forms grow like n^(k-1); allow polynomial growth of degree D
    js = [abs(j) for (j, _, _) in a._c] or [0]
    D = abs(a.weights.r) + abs(a.weights.s) + max(js) + 2
    total, t = 0.0, 1
    while t < 10_000:
        term = qa ** t * ((N + t) / N) ** D
        total += term
        if term < 1e-6 * total:
            break
        t += 1
    return edge * total


def as_function(a: QExpansion):
    """A vectorized double-precision evaluator z -> value (scalar or array z)."""
    import numpy as np
    keys = list(a._c)
    if not keys:
        return lambda z: np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
    J = np.array([k[0] for k in keys], dtype=float)
    M = np.array([k[1] for k in keys], dtype=float)
    Nn = np.array([k[2] for k in keys], dtype=float)
    C = np.array([complex(c) for c in a._c.values()])

    def f(z):
        z = np.asarray(z, dtype=complex)
        zz = z[..., None]
        y = zz.imag
        phase = np.exp(2j * np.pi * (M - Nn) * zz.real) * np.exp(-2 * np.pi * (M + Nn) * y)
        out = np.sum(C * y ** J * phase, axis=-1)
        return out if out.ndim else complex(out)
    return f


def evaluate_mp(a: QExpansion, z) -> mpc:
    """Value at z kept at working precision (no tail estimate)."""
    bits = a.precision_bits
    with mpmath.workprec(bits):
        zz = z if isinstance(z, mpc) else mpmath.mpmathify(complex(z) if not isinstance(z, HalfPlanePoint) else z.z)
        y = zz.imag
        q = mpmath.exp(2j * mpmath.pi * zz)
        qb = mpmath.conj(q)
        qpow, qbpow, ypow = {}, {}, {}
        total = mpc(0)
        for (j, m, n), c in a._c.items():
            if m not in qpow:
                qpow[m] = q ** m
            if n not in qbpow:
                qbpow[n] = qb ** n
            if j not in ypow:
                ypow[j] = y ** j
            total += c * ypow[j] * qpow[m] * qbpow[n]
        return total


# -- comparisons -----------------------------------------------------------------

def coeff_distance(a: QExpansion, b: QExpansion, relative: bool = True) -> float:
    """Largest coefficient difference on the common truncation.

    With ``relative`` each difference is divided by max(1, |a_k|, |b_k|), so
    large coefficients are compared relatively and small ones absolutely.
    """
    N = min(a.q_order, b.q_order)
    worst = 0.0
    bits = _bits(a, b)
    with mpmath.workprec(bits):
        for k in set(a._c) | set(b._c):
            if k[1] > N or k[2] > N:
                continue
            ca, cb = a[k], b[k]
            d = abs(ca - cb)
            if relative:
                d = d / max(1, abs(ca), abs(cb))
            worst = max(worst, float(d))
    return worst


def mode_scales(*exps: QExpansion) -> Dict[Tuple[int, int], float]:
    """Largest coefficient magnitude in each Fourier mode across the inputs."""
    out: Dict[Tuple[int, int], float] = defaultdict(float)
    for e in exps:
        for (j, m, n), c in e._c.items():
            out[(m, n)] = max(out[(m, n)], float(abs(c)))
    return out


def mode_distance(a: QExpansion, b: QExpansion, scales: Dict[Tuple[int, int], float]) -> float:
    """Largest |a_k - b_k| relative to the scale of the mode containing k.

    This matches the pruning rule, which also measures coefficients against
    the largest one in their mode, so it does not blow up at powers of y where
    the operands cancel.
    """
    N = min(a.q_order, b.q_order)
    worst = 0.0
    with mpmath.workprec(_bits(a, b)):
        for k in set(a._c) | set(b._c):
            if k[1] > N or k[2] > N:
                continue
            d = float(abs(a[k] - b[k]))
            if d:
                sc = scales.get((k[1], k[2]), 0.0)
                worst = max(worst, d / sc if sc else math.inf)
    return worst
