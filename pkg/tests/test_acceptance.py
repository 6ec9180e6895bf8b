"""The desk-scale acceptance criteria, one test each.

Every test prints a PASS/FAIL line for its criterion (visible without -s)
before asserting, so a failing run still reports all thirteen lines.
"""

import pytest

from ramif.suite import CRITERIA

DESCRIPTIONS = {
    1: "length-one expansions vs lattice sums, relative 1e-8",
    2: "Leibniz, Laplacian factorizations and Delta L f on 50 random expansions, 1e-25",
    3: "Delta E_rs = -(r+s) E_rs, coefficientwise and by FD (relative 1e-6)",
    4: "F0_44 and F2_44 product closed forms 1e-10; F1_44 has no product fit",
    5: "13 + 17 length-two Laplace equations, 1e-10",
    6: "one-loop closed form and eigenvalue, a1 + a2 <= 5, relative 1e-6",
    7: "C221 closed form 1e-5 and its Laplace equation 1e-4",
    8: "c211 match (1e-10 / 1e-4) and c311 combination (1e-10 / 1e-3)",
    9: "delta^k closed form equals the projector exactly, 2m, 2n <= 8",
    10: "closure of the seven D forms below 1e-6",
    11: "G444 cubic table 1e-10, G644/G464 Laplace tables 1e-8, G644 is new",
    12: "modularity under S and T within combined error bounds",
    13: "the four F+- re-expressions, 1e-10",
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    rep = CRITERIA[number]()
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {rep.summary()}  -- {DESCRIPTIONS[number]}")
    assert rep.passed, rep.summary()
