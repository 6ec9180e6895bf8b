"""Hypothesis strategies for random truncated expansions."""

import mpmath
from hypothesis import strategies as st

from ramif.expansion import QExpansion

coef = st.floats(-4, 4, allow_nan=False, allow_infinity=False)
keys = st.tuples(st.integers(-3, 3), st.integers(0, 3), st.integers(0, 3))
weights = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


@st.composite
def expansions(draw, w=None, q_order=3):
    wt = draw(weights) if w is None else w
    raw = draw(st.dictionaries(keys, st.tuples(coef, coef), min_size=1, max_size=10))
    with mpmath.workprec(128):
        coeffs = {k: mpmath.mpc(re, im) for k, (re, im) in raw.items()}
    return QExpansion(wt, q_order, coeffs, 128)
