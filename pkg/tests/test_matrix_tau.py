import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from taufay import matrix_tau as mt
from taufay.divisors import Divisor, DivisorError, interleaved
from taufay.hirota_fay import TauContext, hirota_residual

QUARTIC = mt.PotentialSpec({2: 1.0, 4: 1.0})


def test_gaussian_moments_against_exact():
    ctx = mt.MatrixTauContext(1)
    m = ctx.moment_cache[:9] / math.sqrt(2 * math.pi)
    assert np.allclose(m, mt.gaussian_exact_moments(8), atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("V", [mt.PotentialSpec.gaussian(), QUARTIC])
def test_heine_vs_eigenvalue_integral(N, V):
    ctx = mt.MatrixTauContext(N, V)
    assert abs(ctx.tau_n() - ctx.eigenvalue_integral()) < 1e-9 * abs(ctx.tau_n())


def test_gaussian_t2_is_4pi():
    ctx = mt.MatrixTauContext(2)
    assert abs(ctx.tau_n() - 4 * math.pi) < 1e-9
    assert abs(ctx.eigenvalue_integral() - 4 * math.pi) < 1e-9


def test_shifted_tau_vs_quadrature():
    """det insertions through the moments and through the eigenvalue integral."""
    ctx = mt.MatrixTauContext(2, QUARTIC)
    D = interleaved([0.4 + 0.9j], [-1.3 + 0.5j])
    assert abs(ctx.shifted_tau(D) - ctx.eigenvalue_integral(D=D)) < 1e-9 * abs(ctx.shifted_tau(D))


@given(st.integers(0, 3), st.integers(0, 3))
def test_orthogonality(n, m):
    ctx = mt.MatrixTauContext(3)
    val = ctx.orthogonality_pairing(n, m)
    if n == m:
        assert abs(val) > 1e-3
    else:
        assert abs(val) < 1e-9


nonreal = st.builds(complex, st.floats(-1.5, 1.5), st.floats(0.3, 1.5))
anywhere = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


@given(st.lists(nonreal, min_size=2, max_size=2, unique=True), st.lists(anywhere, min_size=2, max_size=2, unique=True))
def test_matrix_fay_random(zs, ws):
    pts = zs + ws
    if min(abs(a - b) for i, a in enumerate(pts) for b in pts[:i]) < 0.2:
        return
    ctx = mt.MatrixTauContext(2)
    assert mt.fay_matrix_residual(ctx, zs, ws) < 1e-6


def test_fay_needs_nonreal_fermions():
    with pytest.raises(DivisorError):
        mt.fay_matrix_residual(mt.MatrixTauContext(2), [0.5, 1j], [2j, 3j])


def test_kernel_n1_against_faddeeva():
    ctx = mt.MatrixTauContext(1)
    x, xp = -0.4 + 0.3j, 0.7 + 0.8j
    D = Divisor.of([(xp, 1), (x, -1)])
    # ratio carries the prime weight 1/(x' - x) in x-coordinates
    assert abs(ctx.tau_ratio(D) - mt.kernel_gaussian_n1(x, xp)) < 1e-9


def test_tau_series_is_a_tau_function():
    ctx = TauContext(mt.MatrixTauContext(1, QUARTIC).tau_series(7))
    for mu in [(0, 0, 1), (1, 1), (3,)]:
        assert hirota_residual(ctx, mu).max_abs() < 1e-9


def test_potential_json_round_trip():
    assert mt.PotentialSpec.from_json(QUARTIC.to_json()) == QUARTIC
