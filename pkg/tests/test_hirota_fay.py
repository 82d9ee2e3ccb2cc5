from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from taufay import hirota_fay as hf
from taufay.cli_report import DMU_GOLDENS, _partitions_upto
from taufay.divisors import Divisor, interleaved
from taufay.formal_core import Series, times_ring


@pytest.mark.parametrize("mu,golden", list(DMU_GOLDENS.items()))
def test_dmu_goldens(mu, golden):
    assert str(hf.dmu(mu)) == golden


@pytest.mark.parametrize("mu", _partitions_upto(5))
def test_dmu_two_routes_agree(mu):
    """Schur-polynomial expansion vs residue of the shifted product."""
    assert hf.dmu(mu) == hf.dmu_residue(mu)


@given(st.sampled_from(list(DMU_GOLDENS)))
def test_operator_text_round_trip(mu):
    op = hf.dmu(mu)
    assert hf.BilinearOperator.parse(str(op)) == op


def test_kp_printed_f_form_discrepancy():
    d = hf.kp_derivation()
    assert d["bilinear_matches"]
    assert d["kp_matches_corrected"] and not d["kp_matches_printed"]


@pytest.mark.parametrize("mu", [(0,), (1,), (0, 1), (2,), (0, 0, 1), (2, 1), (1, 1, 1)])
def test_hirota_on_matrix_tau(t1_ctx, mu):
    assert hf.hirota_residual(t1_ctx, mu).max_abs() < 1e-10


def test_hirota_routes_agree(t1_ctx):
    mu = (0, 0, 1)
    diff = hf.hirota_residual(t1_ctx, mu) - hf.hirota_residual(t1_ctx, mu, "bilinear")
    assert diff.max_abs() < 1e-10


def test_kp_on_ln_t1(t1_ctx):
    assert hf.kp_residual(t1_ctx.hatT.log()).max_abs() < 1e-10


def _control():
    R = times_ring(4)
    return hf.TauContext(Series.const(R, 1) + Series.var(R, "t2") + Series.var(R, "t1", 2, 3))


def test_non_tau_control_is_detected():
    ctx = _control()
    assert hf.hirota_residual(ctx, (0, 0, 1)).max_abs() > 1e-3
    assert hf.fay_det_formal(ctx, ["z1", "z2"], ["w1", "w2"]).max_abs() > 1e-3


def test_fay_formal_t2(t2_ctx):
    assert hf.fay_det_formal(t2_ctx, ["z1", "z2"], ["w1", "w2"]).max_abs() < 1e-9


def test_reproducing_formal_both_insertions(t2_ctx):
    assert hf.reproducing_formal(t2_ctx).max_abs() < 1e-10
    assert hf.reproducing_formal(t2_ctx, via_shift=True).max_abs() < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_wn_determinantal(t2_ctx, n):
    assert hf.wn_determinantal_residual(t2_ctx, n).max_abs() < 1e-10


def test_w1_formal(t2_ctx):
    assert hf.w1_formal_residual(t2_ctx).max_abs() < 1e-10


def test_genus0_hand_case_exact():
    g = hf.Genus0Context()
    D = Divisor.of([(2, 1), (3, 1), (0, -1), (1, -1)])
    assert g.tau_ratio(D) == Fraction(1, 12)
    assert g.tau_ratio(interleaved([2, 3], [0, 1])) == Fraction(-1, 12)
    assert hf.fay_det_residual(g, D) == 0


pts = st.lists(st.integers(-20, 20), min_size=6, max_size=6, unique=True)


@given(pts)
def test_cauchy_determinant(p):
    """Integer points: the ratios are exact rationals, the 3x3 determinant is taken in floats,
    so clustered points lose cond(M) * eps to LU."""
    g = hf.Genus0Context()
    M = np.array([[1.0 / (w - z) for z in p[:3]] for w in p[3:]])
    bound = max(1e-12, 8 * np.finfo(float).eps * np.linalg.cond(M))
    assert abs(hf.fay_det_residual(g, interleaved(p[:3], p[3:]), relative=True)) < bound


def test_insertion_oracle_on_genus0():
    g = hf.Genus0Context()
    D = interleaved([0.3 + 0.2j], [1.1 - 0.4j])
    xi = -0.7 + 0.9j
    assert abs(g.insertion_ratio(D, xi) - hf.insertion_numeric(g, D, xi)) < 1e-6
