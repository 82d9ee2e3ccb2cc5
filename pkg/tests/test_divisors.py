from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from taufay.divisors import (
    Divisor, DivisorError, interleaved, permutation_sign, prime_weight, sato_vector, screen, split_supersymmetric,
)

points = st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False)


@st.composite
def divisors(draw, n_min=2, n_max=5, neutral=False):
    n = draw(st.integers(n_min, n_max))
    pts = draw(st.lists(points, min_size=n, max_size=n, unique=True))
    assume(min(abs(a - b) for i, a in enumerate(pts) for b in pts[:i]) > 1e-3)
    ws = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    if neutral:
        ws[-1] = -sum(ws[:-1])
    return Divisor(tuple(pts), tuple(ws))


def test_coincident_points_rejected():
    with pytest.raises(DivisorError):
        Divisor.of([(1, 1), (1, -1)])


@given(divisors())
def test_json_round_trip(D):
    assert Divisor.from_json(D.to_json()) == D


@given(divisors(), divisors())
def test_sato_vector_is_additive(D1, D2):
    assume(not set(D1.points) & set(D2.points))
    v, v1, v2 = sato_vector(D1.concat(D2), 4), sato_vector(D1, 4), sato_vector(D2, 4)
    for k in v:
        assert abs(v[k] - v1[k] - v2[k]) < 1e-9 * (1 + abs(v[k]))


@given(divisors())
def test_screen_is_neutral(D):
    assume(0 not in D.support())
    assert screen(D).degree() == 0


@given(divisors(), st.randoms())
def test_permutation_sign_matches_prime_weight(D, rnd):
    """prod E^(a_i a_j) with E antisymmetric picks up exactly the permutation sign."""
    sigma = list(range(len(D)))
    rnd.shuffle(sigma)
    perm = D.permute(sigma)
    lhs = prime_weight(perm)
    rhs = permutation_sign(D, sigma) * prime_weight(D)
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_prime_weight_exact_rationals():
    D = Divisor.of([(2, 1), (3, 1), (0, -1), (1, -1)])
    assert prime_weight(D) == Fraction(1, 12)


def test_interleaved_split_round_trip():
    D = interleaved([1j, 2j], [3, 4])
    assert D.weights == (1, -1, 1, -1)
    assert split_supersymmetric(D) == ((1j, 2j), (3, 4))
    with pytest.raises(DivisorError):
        split_supersymmetric(Divisor.of([(1, 2), (2, -2)]))
