from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taufay.formal_core import (
    LaurentSeries, Series, SeriesError, align, correlator, insertion, insertion_via_shift, miwa_jimbo,
    residue, sato_shift, taylor_shift, times_ring,
)

R4 = times_ring(4)
coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=5)
monomials = st.sampled_from([(a, b, c, d) for a in range(5) for b in range(3) for c in range(2) for d in range(2)
                             if a + 2 * b + 3 * c + 4 * d <= 4])


@st.composite
def series(draw, const=None):
    terms = draw(st.dictionaries(monomials, coeffs, max_size=6))
    if const is not None:
        terms[(0, 0, 0, 0)] = Fraction(const)
    return Series(R4, terms)


@given(series(), series())
def test_product_commutes(a, b):
    assert (a * b).equals(b * a)


@given(series(), series(), series())
def test_product_associates_and_distributes(a, b, c):
    assert ((a * b) * c).equals(a * (b * c))
    assert (a * (b + c)).equals(a * b + a * c)


@given(series(const=1))
def test_exp_log_round_trip(a):
    assert a.log().exp().equals(a)
    assert (a * a.inverse()).equals(Series.const(R4, 1))


@given(series(), series())
def test_leibniz(a, b):
    # mixing truncation orders is refused, so the undifferentiated factors are cut to order 3
    a3, b3 = a.truncate(3), b.truncate(3)
    lhs, rhs = align((a * b).diff("t1"), a.diff("t1") * b3 + a3 * b.diff("t1"))
    assert lhs.equals(rhs)


def test_truncation_tracks_derivatives():
    s = Series.var(R4, "t1", 4)
    assert s.order == 4
    d = s.diff("t1")
    assert d.order == 3 and d.coefficient({"t1": 3}) == 4
    assert Series.var(R4, "t1", 5).is_zero()      # beyond the truncation order


def test_ring_mismatch_raises():
    with pytest.raises(SeriesError):
        Series.var(R4, "t1") + Series.var(times_ring(3), "t1")


@given(series())
def test_sato_shift_matches_taylor_shift(a):
    s1, s2 = sato_shift(a, Fraction(1, 2)), taylor_shift(a, Fraction(1, 2))
    assert s1.series.equals(s2.series)


@given(series())
def test_insertion_two_routes(a):
    """Delta from the t-derivatives vs the alpha-linear part of the shift."""
    assert insertion(a).series.equals(insertion_via_shift(a).series)


def test_insertion_residue_of_t_k():
    """Res xi^-k Delta t_k = k."""
    for k in range(1, 5):
        L = insertion(Series.var(R4, f"t{k}"))
        got = residue(LaurentSeries(L.series.mul_monomial({"xi": -k}), L.variables, L.differentials))
        assert got.constant_term() == k


@given(series(const=1), st.integers(1, 3))
def test_miwa_jimbo_inverts_insertion(T, k):
    """(1/k) Res xi^-k Delta ln T = d ln T / d t_k."""
    got = miwa_jimbo(correlator(T, 1, counterterms=False), [k])
    want = T.log().diff(f"t{k}")
    got, want = align(got.embed(want.ring) if got.ring.names != want.ring.names else got, want)
    assert got.equals(want)
