import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from taufay import riemann_geometry as rg

TAUS = [1j, 0.3 + 0.8j]
unit = st.floats(-0.4, 0.4)


@pytest.fixture(params=TAUS, ids=["i", "skew"])
def surface(request):
    return rg.SurfaceContext(genus=1, tau=request.param)


@given(unit, unit, st.sampled_from(TAUS))
def test_theta_parity_and_periods(a, b, tau):
    u = a + b * tau
    assert abs(rg.theta(-u, tau) - rg.theta(u, tau)) < 1e-13
    assert abs(rg.quasi_periodicity_residual(u, 1, 0, tau, 1e-13)) < 1e-12
    assert abs(rg.quasi_periodicity_residual(u, 0, 1, tau, 1e-13)) < 1e-12


@given(unit, unit, st.sampled_from(TAUS))
def test_theta_against_direct_sum(a, b, tau):
    u = a + b * tau
    assert abs(rg.theta(u, tau) - rg.theta_oracle_direct(u, tau, 20)) < 1e-13


def test_tail_bound_radius_grows_as_bound_shrinks():
    assert rg.theta_radius(1j, 1e-6) <= rg.theta_radius(1j, 1e-12) <= rg.theta_radius(1j, 1e-15)


def test_theta_gradient_vs_difference():
    tau, u, h = 0.3 + 0.8j, 0.2 + 0.1j, 1e-6
    fd = (rg.theta(u + h, tau) - rg.theta(u - h, tau)) / (2 * h)
    assert abs(complex(np.ravel(rg.theta_gradient(u, tau))[0]) - fd) < 1e-7


def test_odd_characteristic_zero(surface):
    assert abs(surface.theta(surface.chi_point())) < 1e-13


def test_prime_form(surface):
    z0, z1 = 0.3 + 0.4 * surface.tau, 0.7 + 0.1 * surface.tau
    assert abs(surface.prime_form(z0, z1) + surface.prime_form(z1, z0)) < 1e-13
    h = 1e-5
    assert abs(surface.prime_form(z0 + h, z0) / h - 1) < 1e-8


def test_surface_json_round_trip(surface):
    assert rg.SurfaceContext.from_json(surface.to_json()) == surface


def test_pole_on_marked_loop_rejected(surface):
    with pytest.raises(rg.GeometryError):
        rg.MeromorphicForm.third(surface, 0.0, 0.5 + 0.5 * surface.tau)


def test_a_normalization_and_residues(surface):
    t = surface.tau
    p, q = 0.3 + 0.35 * t, 0.7 + 0.6 * t
    for form in (rg.MeromorphicForm.third(surface, p, q), rg.MeromorphicForm.second(surface, p, 2)):
        assert abs(rg.a_period(form)) < 1e-12
    third = rg.MeromorphicForm.third(surface, p, q)
    assert abs(rg.local_coefficient(third, p, 0) - 1) < 1e-12
    assert abs(rg.local_coefficient(third, q, 0) + 1) < 1e-12


def test_first_kind_periods(surface):
    w = rg.MeromorphicForm.first(surface)
    assert abs(rg.a_period(w) - 1) < 1e-12
    assert abs(rg.b_period(w) - surface.tau) < 1e-12


def test_reciprocity_b_period_of_third_kind(surface):
    """B-period of w'''_{p,q} is 2 pi i (a(p) - a(q))."""
    t = surface.tau
    p, q = 0.3 + 0.35 * t, 0.7 + 0.6 * t
    assert abs(rg.b_period(rg.MeromorphicForm.third(surface, p, q)) - 2j * math.pi * (p - q)) < 1e-10


def test_path_integral_additive(surface):
    t = surface.tau
    form = rg.MeromorphicForm.third(surface, 0.3 + 0.35 * t, 0.7 + 0.6 * t)
    a, b, c = 0.15 + 0.15 * t, 0.55 + 0.2 * t, 0.45 + 0.8 * t
    lhs = rg.path_integral(form, a, c)
    rhs = rg.path_integral(form, a, b) + rg.path_integral(form, b, c)
    assert abs(cmath.exp(lhs - rhs) - 1) < 1e-10      # equal up to 2 pi i (homotopy class)


def test_regularized_integral_genus0():
    """lim_{z->p} int_o^z (1/(x-p) - 1/(x-q)) dx - log(z - p) = -log(o - p) + log(o - q) - log(p - q)."""
    S = rg.SurfaceContext(genus=0)
    p, q, o = 1 + 1j, -1 + 0.5j, 0.2 - 0.3j
    form = rg.MeromorphicForm.third(S, p, q)
    want = -cmath.log(o - p) + cmath.log(o - q) - cmath.log(p - q)
    got = rg.regularized_integral(form, o, p)
    assert abs(cmath.exp(got - want) - 1) < 1e-10


@given(st.integers(0, 10_000))
def test_decomposition_round_trip_random(seed):
    from taufay.cli_report import random_form
    rng = np.random.default_rng(seed)
    S = rg.SurfaceContext(genus=1, tau=TAUS[seed % 2])
    form = random_form(S, rng, 4, 0.1)
    rec = rg.reconstruct(S, rg.extract_times(form, k_max=5), tol=1e-11)
    z = np.array([0.05 + 0.05 * S.tau, 0.95 + 0.5 * S.tau, 0.5 + 0.97 * S.tau])
    assert np.max(np.abs(rec(z) - form(z))) < 1e-9 * (1 + np.max(np.abs(form(z))))


def test_zeta_of_third_kind(surface):
    t = surface.tau
    p, q = 0.3 + 0.35 * t, 0.7 + 0.6 * t
    assert abs(rg.zeta_vector(rg.MeromorphicForm.third(surface, p, q)) - (p - q)) < 1e-10


def test_szego_fay_n2(surface):
    from taufay.divisors import interleaved
    from taufay.hirota_fay import fay_det_residual
    from taufay.theta_tau import ThetaTauContext
    t = surface.tau
    form = rg.MeromorphicForm.third(surface, 0.3 + 0.35 * t, 0.7 + 0.6 * t)
    D = interleaved([0.15 + 0.2 * t, 0.6 + 0.8 * t], [0.85 + 0.3 * t, 0.4 + 0.55 * t])
    assert abs(fay_det_residual(ThetaTauContext(surface, form), D, relative=True)) < 1e-10
