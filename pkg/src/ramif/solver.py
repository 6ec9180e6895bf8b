"""Families of modular iterated integrals solved mode by mode.

A family of total weight W is a vector of expansions F_{r,s}, r + s = W, tied
together by two first-order systems

    d F_{r,s}    - (r+1) F_{r+1,s-1} = A_{r,s}     (s >= 1),   d F_{W,0}    = A_{W,0}
    dbar F_{r,s} - (s+1) F_{r-1,s+1} = B_{r,s}     (r >= 1),   dbar F_{0,W} = B_{0,W}

The right-hand sides are built from holomorphic Eisenstein series and
previously solved families.  In a Fourier mode with m > 0 the operator d is
invertible on Laurent polynomials in y, so the d system alone fixes every
component from the top down; the dbar rows are then checks.  Modes with
m = 0 < n are handled by the mirrored dbar recursion.  The constant mode is a
small linear system per power of y with a one-dimensional kernel at y^-W.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Optional, Tuple

import mpmath
import numpy as np
from mpmath import mpc

from . import expansion as ex
from .expansion import QExpansion, coeff_distance
from .lattice import eval_Ers, holomorphic_G
from .point import DEFAULT_PRECISION, SAMPLE_POINTS

log = logging.getLogger(__name__)

Component = Tuple[int, int]

DEFAULT_Q_ORDER = {1: 12, 2: 12, 3: 8}
NORMALIZATIONS = ("modular", "zero", "lattice")

# points where both z and -1/z sit comfortably high in the half plane
FIT_POINTS = (complex(0.3, 1.1), complex(-0.42, 0.9), complex(0.51, 0.87))


class SystemError_(ValueError):
    """Parameters outside the supported range or an unsolvable system."""


OutOfScope = SystemError_


def constant_name(*weights, k=None) -> str:
    if k is None:
        return "C_" + "_".join(str(w) for w in weights)
    return f"C{k}_" + "_".join(str(w) for w in weights)


@dataclass(frozen=True)
class SystemSpec:
    length: int
    params: dict
    total_weight: int
    d_rhs: Dict[Component, QExpansion]
    dbar_rhs: Dict[Component, QExpansion]
    constants: dict
    q_order: int
    precision_bits: int = DEFAULT_PRECISION

    def components(self):
        W = self.total_weight
        return [(W - s, s) for s in range(W + 1)]

    @property
    def label(self) -> str:
        p = self.params
        if self.length == 1:
            return f"E[{self.total_weight}]"
        if self.length == 2:
            return f"F({p['k']})[{2 * p['a'] + 2},{2 * p['b'] + 2}]"
        return f"G[{2 * p['a'] + 2},{2 * p['b'] + 2},{2 * p['c'] + 2}]"


@dataclass(frozen=True)
class SolvedFamily:
    spec: SystemSpec
    components: Dict[Component, QExpansion]
    normalization: dict
    residual: float
    worst: str = ""
    flagged: bool = False

    def __getitem__(self, rs: Component) -> QExpansion:
        r, s = rs
        if r < 0 or s < 0 or r + s != self.spec.total_weight:
            return QExpansion.zero((r, s), self.spec.q_order, self.spec.precision_bits)
        return self.components[(r, s)]

    @property
    def total_weight(self) -> int:
        return self.spec.total_weight

    def to_json_dict(self) -> dict:
        return {
            "family": {"length": self.spec.length, **self.spec.params,
                       "constants": {k: _const_str(v) for k, v in self.spec.constants.items()}},
            "q_order": self.spec.q_order,
            "precision_bits": self.spec.precision_bits,
            "normalization": self.normalization,
            "components": {f"{r},{s}": c.to_json_dict() for (r, s), c in self.components.items()},
            "residual": self.residual,
        }


def _const_str(v):
    v = mpmath.mpmathify(v)
    return [mpmath.nstr(mpmath.re(v), 45), mpmath.nstr(mpmath.im(v), 45)]


def family_from_json_dict(doc: dict) -> "SolvedFamily":
    """Rebuild a cached family; the system is rebuilt from its parameters."""
    fam = doc["family"]
    P = int(doc["precision_bits"])
    with mpmath.workprec(P):
        consts = {k: mpc(mpmath.mpf(re), mpmath.mpf(im)) for k, (re, im) in fam.get("constants", {}).items()}
    # a real constant enters the systems as a real number
    consts = {k: (v.real if not v.imag else v) for k, v in consts.items()}
    spec = build_system(fam["length"], fam.get("a", fam.get("w")), fam.get("b"), fam.get("c"),
                        k=fam.get("k", 0), q_order=int(doc["q_order"]), precision_bits=P,
                        constants=consts)
    comps = {}
    for key, e in doc["components"].items():
        r, s = (int(t) for t in key.split(","))
        comps[(r, s)] = QExpansion.from_json_dict(e)
    residual = float(doc["residual"])
    return SolvedFamily(spec, comps, doc.get("normalization", {}), residual,
                        flagged=residual > 10.0 ** (-P / 4))


def verify_family(family: "SolvedFamily") -> Tuple[float, str]:
    """Recompute the system residual of a (possibly reloaded) family."""
    return system_residual(family.spec, family.components)


# -- building blocks ------------------------------------------------------------

def _zero(weights, N, P):
    return QExpansion.zero(weights, N, P)


@lru_cache(maxsize=64)
def _G(k: int, N: int, P: int) -> QExpansion:
    if k % 2:
        return _zero((k, 0), N, P)
    return holomorphic_G(k, N, P)


@lru_cache(maxsize=64)
def _Gbar(k: int, N: int, P: int) -> QExpansion:
    return ex.conjugate(_G(k, N, P))


def eisenstein_family(w: int, q_order: int = 12, precision_bits: int = DEFAULT_PRECISION,
                      normalization: str = "modular") -> SolvedFamily:
    """The solved length-one family {E_{r,s} : r + s = w}."""
    return _eisenstein_family(w, q_order, precision_bits, normalization)


@lru_cache(maxsize=64)
def _eisenstein_family(w, N, P, normalization):
    return solve(build_system(1, w=w, q_order=N, precision_bits=P), normalization)


def E(r: int, s: int, q_order: int = 12, precision_bits: int = DEFAULT_PRECISION) -> QExpansion:
    """Real analytic Eisenstein series as an expansion (zero outside r, s >= 0)."""
    if r < 0 or s < 0 or r + s == 0:
        return _zero((r, s), q_order, precision_bits)
    return eisenstein_family(r + s, q_order, precision_bits)[(r, s)]


def G(k: int, q_order: int = 12, precision_bits: int = DEFAULT_PRECISION) -> QExpansion:
    return _G(k, q_order, precision_bits)


def Gbar(k: int, q_order: int = 12, precision_bits: int = DEFAULT_PRECISION) -> QExpansion:
    return _Gbar(k, q_order, precision_bits)


# -- system construction ------------------------------------------------------------

def _check_weight(W: int, allow_weight_12: bool):
    if W == 10 or W >= 14:
        raise OutOfScope(f"total weight {W} carries a nonvanishing cusp form; not supported")
    if W == 12 and not allow_weight_12:
        raise OutOfScope("total weight 12 needs allow_weight_12=True")


def check_scope(length: int, a=None, b=None, c=None, k: int = 0, w=None,
                allow_weight_12: bool = False):
    """Raise OutOfScope with an explanation when no system can be built."""
    if length == 1:
        w = w if w is not None else a
        if w is None or w < 1:
            raise OutOfScope("length one needs total weight w >= 1")
        return
    if length == 2:
        if a is None or b is None or a < 1 or b < 1:
            raise OutOfScope("length two needs a, b >= 1")
        if not 0 <= k <= min(2 * a, 2 * b):
            raise OutOfScope(f"k must lie in [0, {min(2 * a, 2 * b)}]")
        _check_weight(2 * a + 2 * b - 2 * k, allow_weight_12)
        return
    if length == 3:
        if k:
            raise OutOfScope("length-three families with k >= 1 need correction terms "
                             "that are not known in closed form")
        if None in (a, b, c) or min(a, b, c) < 1:
            raise OutOfScope("length three needs a, b, c >= 1")
        if 2 * (a + b + c) > 8:
            raise OutOfScope("length three is supported for 2a + 2b + 2c <= 8 only")
        return
    raise OutOfScope(f"length must be 1, 2 or 3, got {length}")


def build_system(length: int, a: Optional[int] = None, b: Optional[int] = None,
                 c: Optional[int] = None, k: int = 0, q_order: Optional[int] = None,
                 precision_bits: int = DEFAULT_PRECISION, constants: Optional[dict] = None,
                 w: Optional[int] = None, allow_weight_12: bool = False) -> SystemSpec:
    check_scope(length, a, b, c, k, w, allow_weight_12)
    N = q_order if q_order is not None else DEFAULT_Q_ORDER.get(length, 12)
    P = precision_bits
    consts = dict(constants or {})
    if length == 1:
        return _system_length1(w if w is not None else a, N, P)
    if length == 2:
        return _system_length2(a, b, k, N, P, consts)
    return _system_length3(a, b, c, N, P, consts)


def _system_length1(w, N, P):
    d_rhs, dbar_rhs = {}, {}
    for s in range(w + 1):
        r = w - s
        d_rhs[(r, s)] = _zero((r + 1, s - 1), N, P)
        dbar_rhs[(r, s)] = _zero((r - 1, s + 1), N, P)
    d_rhs[(w, 0)] = ex.mul_L(_G(w + 2, N, P), 1)
    dbar_rhs[(0, w)] = ex.mul_L(_Gbar(w + 2, N, P), 1)
    return SystemSpec(1, {"w": w}, w, d_rhs, dbar_rhs, {}, N, P)


def _system_length2(a, b, k, N, P, consts):
    W = 2 * a + 2 * b - 2 * k
    cname = constant_name(2 * a + 2, 2 * b + 2, k=k)
    C = consts.setdefault(cname, 0)
    Ga = ex.mul_L(_G(2 * a + 2, N, P), k + 1)
    Gb = ex.mul_L(_Gbar(2 * b + 2, N, P), k + 1)
    d_rhs, dbar_rhs = {}, {}
    for s in range(W + 1):
        r = W - s
        coef = comb(2 * a, k) * comb(k + s, k)
        d_rhs[(r, s)] = ex.scale(ex.mul(Ga, E(2 * b - k - s, k + s, N, P)), coef)
        coef = comb(2 * b, k) * comb(k + r, k)
        dbar_rhs[(r, s)] = ex.scale(ex.mul(Gb, E(k + r, 2 * a - k - r, N, P)), coef)
    if C:
        dbar_rhs[(0, W)] = dbar_rhs[(0, W)] + ex.scale(ex.mul_L(_Gbar(W + 2, N, P), 1), C)
    return SystemSpec(2, {"a": a, "b": b, "k": k}, W, d_rhs, dbar_rhs, consts, N, P)


def length2_family(a, b, k=0, q_order=12, precision_bits=DEFAULT_PRECISION, constants=None,
                   normalization="modular") -> SolvedFamily:
    key = tuple(sorted((constants or {}).items()))
    return _length2_family(a, b, k, q_order, precision_bits, key, normalization)


@lru_cache(maxsize=64)
def _length2_family(a, b, k, N, P, const_items, normalization):
    spec = build_system(2, a, b, k=k, q_order=N, precision_bits=P, constants=dict(const_items))
    return solve(spec, normalization)


def _system_length3(a, b, c, N, P, consts):
    W = 2 * (a + b + c)
    inner_name = constant_name(2 * b + 2, 2 * c + 2, k=0)
    left_name = constant_name(2 * a + 2, 2 * b + 2, k=0)
    own_name = constant_name(2 * a + 2, 2 * b + 2, 2 * c + 2)
    C_inner = consts.setdefault(inner_name, 0)
    C_left = consts.setdefault(left_name, 0)
    C_own = consts.setdefault(own_name, 0)
    inner = length2_family(b, c, 0, N, P, {inner_name: C_inner})
    left = length2_family(a, b, 0, N, P, {left_name: C_left})
    Ga = ex.mul_L(_G(2 * a + 2, N, P), 1)
    Gc = ex.mul_L(_Gbar(2 * c + 2, N, P), 1)
    d_rhs, dbar_rhs = {}, {}
    for s in range(W + 1):
        r = W - s
        d_rhs[(r, s)] = ex.mul(Ga, inner[(r - 2 * a, s)])
        rhs = ex.mul(Gc, left[(r, s - 2 * c)])
        if C_inner:
            extra = ex.mul(ex.mul_L(_Gbar(2 * b + 2 * c + 2, N, P), 1),
                           E(r, s - 2 * b - 2 * c, N, P))
            rhs = rhs + ex.scale(extra, C_inner)
        dbar_rhs[(r, s)] = rhs
    if C_own:
        dbar_rhs[(0, W)] = dbar_rhs[(0, W)] + ex.scale(ex.mul_L(_Gbar(W + 2, N, P), 1), C_own)
    return SystemSpec(3, {"a": a, "b": b, "c": c}, W, d_rhs, dbar_rhs, consts, N, P)


def length3_family(a, b, c, q_order=8, precision_bits=DEFAULT_PRECISION, constants=None,
                   normalization="modular") -> SolvedFamily:
    key = tuple(sorted((constants or {}).items()))
    return _length3_family(a, b, c, q_order, precision_bits, key, normalization)


@lru_cache(maxsize=32)
def _length3_family(a, b, c, N, P, const_items, normalization):
    spec = build_system(3, a, b, c, q_order=N, precision_bits=P, constants=dict(const_items))
    return solve(spec, normalization)


# -- the solver ----------------------------------------------------------------------

def _mode_table(exps: Dict[Component, QExpansion]):
    """(m, n) -> {component: {j: coeff}}."""
    table: dict = {}
    for comp, e in exps.items():
        for (j, m, n), c in e.items():
            table.setdefault((m, n), {}).setdefault(comp, {})[j] = c
    return table


def _invert_first_order(g: Dict[int, mpc], weight: int, freq: int, four_pi) -> Dict[int, mpc]:
    """Solve (-4 pi freq) f_{j-1} + (j + weight) f_j = g_j for a Laurent polynomial f.

    freq > 0, so the recursion runs from the top power down; the lowest power
    of the solution is min(lowest power of g, -weight).
    """
    if not g:
        return {}
    hi, lo = max(g), min(min(g), -weight)
    f: Dict[int, mpc] = {}
    scale = four_pi * freq
    fj = mpc(0)
    for j in range(hi, lo, -1):
        fj = ((j + weight) * fj - g.get(j, 0)) / scale
        f[j - 1] = fj
    return f


def _kernel(W: int) -> Dict[Component, int]:
    return {(W - s, s): (-1) ** (W - s) * comb(W, W - s) for s in range(W + 1)}


def solve(spec: SystemSpec, normalization: str = "modular") -> SolvedFamily:
    """Solve both first-order systems exactly in every Fourier mode.

    normalization picks the multiple of the homogeneous solution (the y^-W
    constant-mode kernel): "modular" fits it so the family transforms
    correctly under z -> -1/z, "zero" leaves it out, "lattice" matches the
    length-one family against brute-force lattice sums.  For W = 0 the kernel
    is a constant, which is modular, so "modular" falls back to "zero".
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    W, N, P = spec.total_weight, spec.q_order, spec.precision_bits
    comps = spec.components()
    dtab = _mode_table(spec.d_rhs)
    btab = _mode_table(spec.dbar_rhs)
    coeffs: Dict[Component, dict] = {rs: {} for rs in comps}
    ls_defect = 0.0
    with mpmath.workprec(P):
        four_pi = 4 * mpmath.pi
        for mode in sorted(set(dtab) | set(btab)):
            m, n = mode
            drow = dtab.get(mode, {})
            brow = btab.get(mode, {})
            if m > 0:
                above: Dict[int, mpc] = {}
                for s in range(W + 1):
                    r = W - s
                    g = dict(drow.get((r, s), {}))
                    for j, v in above.items():
                        g[j] = g.get(j, 0) + (r + 1) * v
                    f = _invert_first_order(g, r, m, four_pi)
                    for j, v in f.items():
                        coeffs[(r, s)][(j, m, n)] = v
                    above = f
            elif n > 0:
                below: Dict[int, mpc] = {}
                for r in range(W + 1):
                    s = W - r
                    g = dict(brow.get((r, s), {}))
                    for j, v in below.items():
                        g[j] = g.get(j, 0) + (s + 1) * v
                    f = _invert_first_order(g, s, n, four_pi)
                    for j, v in f.items():
                        coeffs[(r, s)][(j, m, n)] = v
                    below = f
            else:
                ls_defect = max(ls_defect, _solve_constant_mode(W, drow, brow, coeffs))
    components = {rs: QExpansion(rs, N, coeffs[rs], P) for rs in comps}

    t = mpc(0)
    method = normalization
    if normalization == "modular" and W == 0:
        method = "zero"
    if method == "modular" and any(not e.is_zero() for e in components.values()):
        t = _fit_kernel_modular(components, W, P)
    elif method == "lattice":
        if spec.length != 1:
            raise ValueError("lattice normalization is only available for length one")
        t = _fit_kernel_lattice(components, W, P)
    if t:
        ker = _kernel(W)
        with mpmath.workprec(P):
            components = {rs: e + QExpansion.monomial(-W, 0, 0, rs, N, ker[rs] * t, P)
                          for rs, e in components.items()}
    residual, worst = system_residual(spec, components)
    flagged = residual > 10.0 ** (-P / 4)
    if flagged:
        log.warning("%s: system residual %.3g (%s)", spec.label, residual, worst)
    norm = {"method": method, "kernel_modes": {"0,0": 1}, "kernel_power": -W,
            "kernel_coefficient": [float(t.real), float(t.imag)],
            "constant_mode_defect": ls_defect}
    return SolvedFamily(spec, components, norm, residual, worst, flagged)


def _constant_mode_rows(W, drow, brow, j):
    """Matrix rows and right-hand side of both systems at y^j in the constant mode."""
    cols = [s for s in range(W + 1) if not (j == -W and s == W)]
    col_index = {s: i for i, s in enumerate(cols)}
    rows, rhs = [], []

    def add_row(entries, value):
        row = [0] * len(cols)
        for s, coef in entries:
            if s in col_index:
                row[col_index[s]] += coef
        rows.append(row)
        rhs.append(value)

    for s in range(W + 1):
        r = W - s
        val = drow.get((r, s), {}).get(j, 0)
        add_row([(s, j + r)] + ([(s - 1, -(r + 1))] if s >= 1 else []), val)
    for r in range(W + 1):
        s = W - r
        val = brow.get((r, s), {}).get(j, 0)
        add_row([(s, j + s)] + ([(s + 1, -(s + 1))] if r >= 1 else []), val)
    return rows, rhs, col_index


def _solve_constant_mode(W, drow, brow, coeffs) -> float:
    js = {-W}
    for tab in (drow, brow):
        for row in tab.values():
            js.update(row)
    worst = 0.0
    for j in sorted(js):
        rows, rhs, col_index = _constant_mode_rows(W, drow, brow, j)
        if not col_index or all(v == 0 for v in rhs):
            continue
        x, res = mpmath.qr_solve(mpmath.matrix(rows), mpmath.matrix([mpc(v) for v in rhs]))
        scale = max(float(abs(v)) for v in rhs)
        worst = max(worst, float(res) / max(scale, 1.0))
        for s, i in col_index.items():
            if x[i]:
                coeffs[(W - s, s)][(j, 0, 0)] = mpc(x[i])
    return worst


def solvability_constant(spec: SystemSpec) -> Tuple[mpc, float]:
    """The coefficient C of L * conj(G_{W+2}) in the bottom dbar row that makes
    the constant mode solvable, with the remaining least-squares defect.

    This is a diagnostic: build_system never inserts it on its own.  The
    term only reaches the constant mode at y^1, so only that power is refit.
    """
    W, P = spec.total_weight, spec.precision_bits
    drow = _mode_table(spec.d_rhs).get((0, 0), {})
    brow = _mode_table(spec.dbar_rhs).get((0, 0), {})
    if W + 2 < 4:
        raise OutOfScope("no weight-2 Eisenstein term is available at total weight 0")
    with mpmath.workprec(P):
        kappa = ex.mul_L(_Gbar(W + 2, 0, P), 1)[(1, 0, 0)]
        rows, rhs, col_index = _constant_mode_rows(W, drow, brow, 1)
        bottom = (W + 1) + 0  # the dbar row of component (0, W)
        for i, row in enumerate(rows):
            row.append(-kappa if i == bottom else 0)
        x, res = mpmath.qr_solve(mpmath.matrix(rows), mpmath.matrix([mpc(v) for v in rhs]))
        return mpc(x[len(col_index)]), float(res)


def _slash_S(value, z, weights):
    r, s = weights
    return z ** (-r) * mpmath.conj(z) ** (-s) * value


def _fit_kernel_modular(components, W, P):
    num = mpc(0)
    den = mpmath.mpf(0)
    ker = _kernel(W)
    with mpmath.workprec(P):
        for z0 in FIT_POINTS:
            z = mpc(z0.real, z0.imag)
            sz = -1 / z
            for rs, e in components.items():
                res0 = _slash_S(ex.evaluate_mp(e, sz), z, rs) - ex.evaluate_mp(e, z)
                k_at = lambda w: ker[rs] * w.imag ** (-W)
                resk = _slash_S(k_at(sz), z, rs) - k_at(z)
                num += mpmath.conj(resk) * res0
                den += abs(resk) ** 2
        return -num / den if den else mpc(0)


def _fit_kernel_lattice(components, W, P):
    # least squares over two sample points and all components, in double precision
    ker = _kernel(W)
    num, den = 0j, 0.0
    for z in SAMPLE_POINTS[:2]:
        for rs, e in components.items():
            target = eval_Ers(rs[0], rs[1], z).value
            got = ex.evaluate(e, z).value
            kv = ker[rs] * z.imag ** (-W)
            num += np.conj(kv) * (target - got)
            den += abs(kv) ** 2
    return mpc(num / den)


def system_residual(spec: SystemSpec, components) -> Tuple[float, str]:
    """Worst residual over every row of both systems.

    Each coefficient of a row is measured against the largest magnitude in
    its Fourier mode among the operands of that row (the derivative term
    weighted by the mode frequency, the neighbour term and the right-hand
    side).
    """
    W = spec.total_weight
    four_pi = 4 * np.pi
    worst, where = 0.0, ""

    def weighted(F):
        return {mn: v * (1 + four_pi * max(mn) + W) for mn, v in ex.mode_scales(F).items()}

    for s in range(W + 1):
        r = W - s
        F = components[(r, s)]
        for kind in ("d", "dbar"):
            if kind == "d":
                lhs, nb, mult, rhs = ex.partial(F), (r + 1, s - 1), r + 1, spec.d_rhs[(r, s)]
                has_nb = s >= 1
            else:
                lhs, nb, mult, rhs = ex.partial_bar(F), (r - 1, s + 1), s + 1, spec.dbar_rhs[(r, s)]
                has_nb = r >= 1
            scales = weighted(F)
            if has_nb:
                term = ex.scale(components[nb], mult)
                lhs = lhs - term
                for mn, v in ex.mode_scales(term).items():
                    scales[mn] = max(scales.get(mn, 0.0), v)
            for mn, v in ex.mode_scales(rhs, lhs).items():
                scales[mn] = max(scales.get(mn, 0.0), v)
            d = ex.mode_distance(lhs, rhs, scales)
            if d > worst:
                worst, where = d, f"{kind} row ({r},{s})"
    return worst, where


# -- Laplace equations ------------------------------------------------------------------

def laplace_rhs(family: SolvedFamily, r: int, s: int) -> Tuple[QExpansion, QExpansion]:
    """(Delta + W) F_{r,s} from the systems alone, plus the brute-force value.

    Composing the rows gives (Delta + W) F_{r,s} = -dbar A_{r,s} - (r+1) B_{r+1,s-1},
    the second term being absent for the top component.
    """
    spec = family.spec
    W = spec.total_weight
    if (r, s) not in family.components:
        raise KeyError(f"component ({r},{s}) not in a family of weight {W}")
    out = ex.scale(ex.partial_bar(spec.d_rhs[(r, s)]), -1)
    if s >= 1:
        out = out - ex.scale(spec.dbar_rhs[(r + 1, s - 1)], r + 1)
    F = family.components[(r, s)]
    direct = ex.laplacian(F) + ex.scale(F, W)
    return out, direct


def laplace_shift(expr: QExpansion, shift) -> QExpansion:
    """(Delta + shift) applied in the expansion algebra."""
    return ex.laplacian(expr) + ex.scale(expr, shift)


# -- product families ----------------------------------------------------------------------

def _poly_from_components(family: SolvedFamily, N, P):
    W = family.total_weight
    return {(W - s, s): family[(W - s, s)].truncate(N) for s in range(W + 1)}


def _delta_power(A: dict, B: dict, k: int) -> dict:
    """(d/du x d/dv - d/dv x d/du)^k on polynomials in u, v, then multiplied out.

    A and B map exponent pairs (p, q) of u^p v^q to coefficients (any ring
    supporting + and * with ints).
    """
    from .vectors import delta_uv_power
    return delta_uv_power(A, B, k)


def product_family(first: SolvedFamily, second: SolvedFamily, k: int = 0) -> SolvedFamily:
    """The family L^k/(k!)^2 delta^k(E_{2a} x E_{2b}) of two length-one families.

    Its d system has two summands on the right, one from each factor.
    """
    if first.spec.length != 1 or second.spec.length != 1:
        raise ValueError("product_family takes length-one families")
    wa, wb = first.total_weight, second.total_weight
    N = min(first.spec.q_order, second.spec.q_order)
    P = max(first.spec.precision_bits, second.spec.precision_bits)
    if not 0 <= k <= min(wa, wb):
        raise ValueError("k out of range")
    W = wa + wb - 2 * k
    A = _poly_from_components(first, N, P)
    B = _poly_from_components(second, N, P)
    raw = _delta_power(A, B, k)
    with mpmath.workprec(P):
        norm = mpmath.mpf(1) / factorial(k) ** 2
    comps = {}
    for s in range(W + 1):
        r = W - s
        e = raw.get((r, s))
        if e is None:
            e = QExpansion.zero((r + k, s + k), N, P)
        comps[(r, s)] = ex.scale(ex.mul_L(e, k), norm)
    # d rows: one summand per factor
    a, b = wa // 2, wb // 2
    d_rhs, dbar_rhs = {}, {}
    Ga = ex.mul_L(_G(wa + 2, N, P), k + 1)
    Gb = ex.mul_L(_G(wb + 2, N, P), k + 1)
    Gab = ex.mul_L(_Gbar(wa + 2, N, P), k + 1)
    Gbb = ex.mul_L(_Gbar(wb + 2, N, P), k + 1)
    for s in range(W + 1):
        r = W - s
        d_rhs[(r, s)] = (ex.scale(ex.mul(Ga, E(wb - k - s, k + s, N, P)), comb(wa, k) * comb(k + s, k))
                         + ex.scale(ex.mul(Gb, E(wa - k - s, k + s, N, P)), (-1) ** k * comb(wb, k) * comb(k + s, k)))
        dbar_rhs[(r, s)] = (ex.scale(ex.mul(Gbb, E(k + r, wa - k - r, N, P)), comb(wb, k) * comb(k + r, k))
                            + ex.scale(ex.mul(Gab, E(k + r, wb - k - r, N, P)), (-1) ** k * comb(wa, k) * comb(k + r, k)))
    spec = SystemSpec(2, {"a": a, "b": b, "k": k, "product": True}, W, d_rhs, dbar_rhs,
                      {}, N, P)
    residual, worst = system_residual(spec, comps)
    return SolvedFamily(spec, comps, {"method": "product"}, residual, worst,
                        residual > 10.0 ** (-P / 4))


# -- product-basis fits ----------------------------------------------------------------------

NEWNESS_THRESHOLD = 1e-3


def _fit_points(count: int = 120, seed: int = 7):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-0.5, 0.5, count)
    ys = rng.uniform(0.8, 3.0, count)
    return xs + 1j * ys


def _partitions_even(total: int, parts: int, smallest: int = 2):
    # nondecreasing tuples of even weights >= smallest summing to total
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for w in range(smallest, total + 1, 2):
        for rest in _partitions_even(total - w, parts - 1, w):
            out.append((w,) + rest)
    return out


def product_basis(weights, eisenstein_weight: int, max_factors: int):
    """Labels (j, factors) of L^j * prod E_{p,q} with the given modular weights
    whose Eisenstein weights p + q add up to ``eisenstein_weight``."""
    from itertools import product as cartesian
    r, s = weights
    basis = set()
    for nf in range(1, max_factors + 1):
        for ws in _partitions_even(eisenstein_weight, nf):
            for ps in cartesian(*[range(w + 1) for w in ws]):
                fac = tuple(sorted((p, w - p) for p, w in zip(ps, ws)))
                j = sum(f[0] for f in fac) - r
                if j == sum(f[1] for f in fac) - s and j >= 0:
                    basis.add((j, fac))
    return sorted(basis)


def _eisenstein_weight(spec: SystemSpec) -> int:
    p = spec.params
    if spec.length == 1:
        return spec.total_weight
    if spec.length == 2:
        return 2 * p["a"] + 2 * p["b"]
    return 2 * (p["a"] + p["b"] + p["c"])


def product_basis_residual(family: SolvedFamily, max_factors: Optional[int] = None,
                           points=None) -> Tuple[float, dict]:
    """Relative least-squares residual of fitting each component by products of
    real analytic Eisenstein series of the same total Eisenstein weight (times
    powers of L), worst over components.

    Values are compared at random points of the half plane in double
    precision; a residual near roundoff means the family is expressible in
    products, anything above NEWNESS_THRESHOLD witnesses a new function.
    """
    spec = family.spec
    if max_factors is None:
        max_factors = max(spec.length, 2)
    ew = _eisenstein_weight(spec)
    zs = np.asarray(points if points is not None else _fit_points())
    N = spec.q_order
    cache: dict = {}

    def E_val(p, q):
        if (p, q) not in cache:
            cache[(p, q)] = ex.as_function(E(p, q, N))(zs)
        return cache[(p, q)]

    Lz = -2 * np.pi * zs.imag
    per = {}
    for rs, comp in family.components.items():
        target = ex.as_function(comp)(zs)
        tnorm = np.linalg.norm(target)
        if tnorm == 0:
            per[rs] = 0.0
            continue
        cols = []
        for j, fac in product_basis(rs, ew, max_factors):
            v = Lz ** j
            for p, q in fac:
                v = v * E_val(p, q)
            cols.append(v)
        if not cols:
            per[rs] = 1.0
            continue
        A = np.stack(cols, axis=1)
        scale = np.linalg.norm(A, axis=0)
        scale[scale == 0] = 1
        x, *_ = np.linalg.lstsq(A / scale, target, rcond=None)
        per[rs] = float(np.linalg.norm(A / scale @ x - target) / tnorm)
    return max(per.values()), per
