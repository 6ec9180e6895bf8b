"""The desk-scale acceptance suite: one report per criterion.

Shared by ``ramif verify --suite desk`` and the acceptance tests.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

import mpmath
import numpy as np

from . import expansion as ex
from . import identities as ids
from . import integrals as it
from . import solver as so
from .expansion import QExpansion, coeff_distance
from .lattice import eval_Ers
from .numeric import S, T, StencilConfig, fd_laplacian
from .point import SAMPLE_POINTS
from .report import Timer, VerificationReport
from .vectors import GaussQ, closed_form_mismatches

log = logging.getLogger(__name__)

# exact point for the rational delta^k comparison
EXACT_Z = GaussQ(Fraction(1, 3), Fraction(7, 5))


def random_expansion(rng: np.random.Generator, weights=None, q_order: int = 3,
                     precision_bits: int = 128, terms: int = 12) -> QExpansion:
    """A random expansion with y-powers in [-3, 3] and O(1) coefficients."""
    if weights is None:
        weights = tuple(int(w) for w in rng.integers(-3, 4, size=2))
    coeffs = {}
    with mpmath.workprec(precision_bits):
        for _ in range(terms):
            j = int(rng.integers(-3, 4))
            m, n = (int(t) for t in rng.integers(0, q_order + 1, size=2))
            re, im = rng.standard_normal(2)
            coeffs[(j, m, n)] = mpmath.mpc(re, im)
    return QExpansion(weights, q_order, coeffs, precision_bits)


def _relative(a: complex, b: complex, floor: float = 0.0) -> float:
    return abs(a - b) / max(abs(b), floor)


def criterion_1(radius: int = 200) -> VerificationReport:
    """Solved E_{r,s} against lattice sums, 1 <= r+s <= 6, relative 1e-8."""
    rep = VerificationReport("1 length-one bootstrap", tolerance=1e-8, params={"radius": radius})
    with Timer(rep):
        for w in range(1, 7):
            for r in range(w + 1):
                e = so.E(r, w - r)
                for z in SAMPLE_POINTS:
                    lat = eval_Ers(r, w - r, z, radius)
                    val = ex.evaluate(e, z).value
                    if w % 2:
                        # odd weight: both vanish, compare against the lattice error bound
                        rep.add(f"E{r}{w - r} {z} / bound", abs(val - lat.value) / max(lat.error, 1e-300),
                                tolerance=1.0)
                    else:
                        rep.add(f"E{r}{w - r} {z}", _relative(val, lat.value))
    return rep


def criterion_2(count: int = 50, seed: int = 2024) -> VerificationReport:
    """Leibniz rules, the two factorizations of the Laplacian and Delta L f, on random expansions."""
    rng = np.random.default_rng(seed)
    rep = VerificationReport("2 operator identities", tolerance=1e-25,
                             params={"count": count, "seed": seed})
    with Timer(rep):
        for i in range(count):
            f = random_expansion(rng)
            g = random_expansion(rng)
            fg = ex.mul(f, g)
            rep.add(f"leibniz d #{i}", coeff_distance(ex.partial(fg), ex.partial(f) * g + f * ex.partial(g)))
            rep.add(f"leibniz dbar #{i}",
                    coeff_distance(ex.partial_bar(fg), ex.partial_bar(f) * g + f * ex.partial_bar(g)))
            rep.add(f"factorization #{i}", coeff_distance(ex.laplacian(f), ex.laplacian_alt(f)))
            p, q = f.weights.r - 1, f.weights.s - 1
            lhs = ex.laplacian(ex.mul_L(f, 1))
            rhs = ex.mul_L(ex.laplacian(f), 1) - ex.scale(ex.mul_L(f, 1), p + q)
            rep.add(f"Delta L f #{i}", coeff_distance(lhs, rhs))
    return rep


def criterion_3(radius: int = 200) -> VerificationReport:
    """Delta E_{r,s} = -(r+s) E_{r,s}: coefficientwise, and by FD on lattice values (rel 1e-6)."""
    rep = VerificationReport("3 eigenvalue", tolerance=1e-25, params={"radius": radius})
    cfg = StencilConfig(rel_h=2e-3)
    with Timer(rep):
        for w in range(1, 7):
            for r in range(w + 1):
                e = so.E(r, w - r)
                rep.add(f"algebra E{r}{w - r}", coeff_distance(ex.laplacian(e), ex.scale(e, -w)))
        for w in range(2, 7, 2):
            for r in range(w + 1):
                s = w - r
                f = lambda z, r=r, s=s: eval_Ers(r, s, z, radius).value
                for z in SAMPLE_POINTS:
                    val = f(z)
                    lap = fd_laplacian(f, (r, s), z, cfg)
                    rep.add(f"FD E{r}{s} {z}", _relative(lap, -w * val), tolerance=1e-6)
    return rep


def criterion_4() -> VerificationReport:
    rep = VerificationReport("4 length-two closed forms", tolerance=1e-10)
    with Timer(rep):
        rep.merge(ids.length2_closed_forms())
        rep.merge(ids.check_newness(2, (1, 1, 1), expect_new=True), prefix="F(1)[4,4] ")
    return rep


def criterion_5() -> VerificationReport:
    rep = VerificationReport("5 length-two Laplace tables", tolerance=1e-10)
    with Timer(rep):
        rep.merge(ids.check_laplace_tables(1), prefix="ex1 ")
        rep.merge(ids.check_laplace_tables(2), prefix="ex2 ")
    rep.params["equations"] = len(rep.points)
    return rep


def criterion_6() -> VerificationReport:
    rep = VerificationReport("6 one-loop", tolerance=1e-6, params={"radius": 200})
    with Timer(rep):
        for a in range(2, 6):
            for a1 in range(1, a):
                rep.merge(ids.check_oneloop(a1, a - a1), prefix=f"C{a1}{a - a1} ")
    return rep


def criterion_7() -> VerificationReport:
    rep = ids.check_c221()
    rep.name = "7 " + rep.name
    return rep


def criterion_8() -> VerificationReport:
    rep = VerificationReport("8 c211 match and c311", tolerance=1e-4)
    with Timer(rep):
        rep.merge(ids.check_c211_match(), prefix="c211 ")
        rep.merge(ids.check_c311(), prefix="c311 ")
    return rep


def criterion_9(max_weight: int = 8) -> VerificationReport:
    """Closed form of delta^k against the direct projector in exact arithmetic."""
    rep = VerificationReport("9 delta^k exact", tolerance=0, params={"max_weight": max_weight})
    cases = 0
    with Timer(rep):
        for two_m in range(2, max_weight + 1, 2):
            for two_n in range(2, max_weight + 1, 2):
                for k in range(min(two_m, two_n) + 1):
                    bad = closed_form_mismatches(two_m, two_n, k, EXACT_Z)
                    cases += two_n + 1
                    rep.add(f"({two_m},{two_n},k={k})", len(bad))
    rep.params["basis_tensors"] = cases
    return rep


FORMS = {
    "D44": lambda: it.build_D2(2, 2),
    "D46": lambda: it.build_D2(2, 3),
    "D64": lambda: it.build_D2(3, 2),
    "D444": lambda: it.build_D3(1, 1, 1),
    "D644": lambda: it.build_D3(2, 1, 1),
    "D464": lambda: it.build_D3(1, 2, 1),
    "D446": lambda: it.build_D3(1, 1, 2),
}


def criterion_10() -> VerificationReport:
    rep = VerificationReport("10 closure", tolerance=1e-6)
    with Timer(rep):
        for name, build in FORMS.items():
            rep.merge(it.closure_check(build()), prefix=f"{name} ")
    return rep


def criterion_11() -> VerificationReport:
    rep = VerificationReport("11 length three", tolerance=1e-10)
    with Timer(rep):
        rep.merge(ids.cubic_closed_form())
        for abc in [(2, 1, 1), (1, 2, 1)]:
            rep.merge(ids.check_length3_tables(abc))
        rep.merge(ids.check_newness(3, (2, 1, 1), expect_new=True), prefix="G[6,4,4] ")
    return rep


def modular_families() -> List[so.SolvedFamily]:
    fams = [so.eisenstein_family(w) for w in range(2, 7, 2)]
    for a, b in [(1, 1), (1, 2), (2, 1)]:
        for k in range(3):
            fams.append(ids.consistent_family(a, b, k, 12))
    fams += [so.length3_family(*abc) for abc in [(1, 1, 1), (2, 1, 1), (1, 2, 1)]]
    return fams


def criterion_12() -> VerificationReport:
    rep = VerificationReport("12 modularity", tolerance=1.0)
    with Timer(rep):
        for fam in modular_families():
            rep.merge(ids.family_modularity(fam), prefix=f"{fam.spec.label} ")
        rep.merge(ids.lattice_modularity(), prefix="lattice ")
    return rep


def criterion_13() -> VerificationReport:
    rep = ids.check_Fpm_relations()
    rep.name = "13 " + rep.name
    return rep


CRITERIA: Dict[int, Callable[[], VerificationReport]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13,
}


def run_desk_suite(echo: Callable[[str], None] = print) -> List[VerificationReport]:
    out = []
    for n, fn in CRITERIA.items():
        rep = fn()
        echo(rep.summary())
        out.append(rep)
    return out
