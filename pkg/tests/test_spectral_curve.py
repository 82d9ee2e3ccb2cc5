import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taufay import spectral_curve as sc
from taufay.divisors import Divisor

D1 = Divisor.of([(1.0, 1)])
R1 = sc.convergence_radius(1.0)


def test_u_zero_is_airy():
    sol = sc.solve_shift(D1, 0)
    assert sol.zetas[0] == 1.0 and sol.residual == 0.0


@settings(max_examples=10)
@given(st.floats(0.05, 0.45), st.floats(0, 2 * np.pi))
def test_curve_equation_corrected(frac, angle):
    u = frac * R1 * np.exp(1j * angle)
    sol = sc.solve_shift(D1, u)
    zs = np.linspace(-2, 2, 9) + 0.7j
    assert np.max(np.abs(sc.curve_equation_residual(sol, zs))) < 1e-10


def test_printed_sign_leaves_u_squared_remainder():
    """With -u/(4 zeta^2) the remainder is exactly u^2/(2 zeta^2)."""
    for u in (0.01, 0.1):
        sol = sc.solve_shift(D1, u)
        r = sc.curve_equation_residual(sol, np.array([0.3 + 0.7j]), "printed")[0]
        assert abs(r - u * u / (2 * sol.zetas[0] ** 2)) < 1e-12


def test_series_matches_cauchy_oracle():
    oracle = sc.taylor_from_solver(D1, 0, 10, 0.5 * R1)
    closed = sc.zeta_series(1.0, 10)
    assert max(abs(a - b) / abs(b) for a, b in zip(oracle, closed)) < 1e-10


def test_series_growth_brackets_radius():
    assert sc.series_growth(1.0, 0.9 * R1) < 1 < sc.series_growth(1.0, 1.1 * R1)


def test_branch_point_detected():
    with pytest.raises(sc.ShiftError):
        sc.solve_shift(D1, R1, path_steps=40)


@pytest.mark.parametrize("D", [D1, Divisor.of([(1.0, 1), (0.2 + 1.5j, 1)]), Divisor.of([(1.0, 2), (-0.5 + 1j, -1)])])
def test_shifted_times(D):
    sol = sc.solve_shift(D, 0.01)
    got, exp = sc.shifted_times(sol), sc.expected_times(sol)
    for k in exp["finite"]:
        assert abs(got["finite"][k] - exp["finite"][k]) < 1e-8
    for k in exp["infinity"]:
        assert abs(got["infinity"][k] - exp["infinity"][k]) < 1e-8


def test_du_y_is_third_kind_form():
    assert sc.du_y_residual(Divisor.of([(1.0, 1), (0.2 + 1.5j, 1)]), 0.01, 0.3 + 0.4j) < 1e-8


def test_homotopy_and_direct_newton_agree():
    u = 0.5 * R1
    a = sc.solve_shift(D1, u).zetas
    b = sc.solve_shift(D1, u, seed=np.array([1.0, 1.0])).zetas
    assert np.max(np.abs(a - b)) < 1e-12


def test_origin_rejected():
    from taufay.divisors import DivisorError
    with pytest.raises(DivisorError):
        sc.solve_shift(Divisor.of([(0.0, 1)]), 0.1)
