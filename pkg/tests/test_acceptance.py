"""Acceptance criteria, one pass/fail line each.

The lines are collected in conftest.CRITERIA_LINES and printed in the
pytest terminal summary; ``python3 tests/test_acceptance.py`` prints them
directly.  Two criteria ask for printed formulas that do not hold as
printed (the F-form of KP, the sign of the u^2 term of the shifted Airy
curve).  Their lines read FAIL; the tests assert the exact discrepancy
so the suite stays green while the report stays honest.
"""

import math
import time
from fractions import Fraction

import numpy as np
import sympy as sp

from taufay import cli_report as cr
from taufay import divisors as dv
from taufay import hirota_fay as hf
from taufay import matrix_tau as mt
from taufay import riemann_geometry as rg
from taufay import spectral_curve as sc
from taufay import theta_tau as tt

try:
    from conftest import CRITERIA_LINES
except ImportError:  # run as a script
    CRITERIA_LINES = {}


def report(n: int, ok: bool, detail: str, seconds: float, limit: float) -> bool:
    ok_all = ok and seconds < limit
    CRITERIA_LINES[n] = f"criterion {n:2d}: {'PASS' if ok_all else 'FAIL'}  {detail}  [{seconds:.2f}s < {limit:g}s]"
    print(CRITERIA_LINES[n])
    return ok_all


def test_c01_dmu_goldens():
    t0 = time.perf_counter()
    got = {mu: str(hf.dmu(mu)) for mu in cr.DMU_GOLDENS}
    bad = [mu for mu, g in cr.DMU_GOLDENS.items() if got[mu] != g]
    ok = report(1, not bad, f"6 operators, mismatches={bad}", time.perf_counter() - t0, 1.0)
    assert ok


def test_c02_kp_derivation():
    t0 = time.perf_counter()
    d = hf.kp_derivation()
    dt = time.perf_counter() - t0
    ok = d["bilinear_matches"] and d["kp_matches_printed"]
    report(2, ok, f"bilinear form matches={d['bilinear_matches']}; F-form printed (F_1)^2 term matches="
                  f"{d['kp_matches_printed']}, derived (F_11)^2 matches={d['kp_matches_corrected']}", dt, 1.0)
    # the printed F-form carries (F_1)^2 where the expansion gives (F_11)^2
    F = sp.Function("F")(*sp.symbols("t1:5"))
    t1 = sp.Symbol("t1")
    expected_gap = (sp.diff(F, t1, 2) ** 2 - sp.diff(F, t1) ** 2) / 2
    assert d["bilinear_matches"] and d["kp_matches_corrected"] and not d["kp_matches_printed"]
    assert sp.simplify(d["kp_difference"] - expected_gap) == 0
    assert dt < 1.0


def _partitions(max_weight):
    return cr._partitions_upto(max_weight)


def test_c03_formal_hirota(t1_ctx):
    t0 = time.perf_counter()
    worst = 0.0
    mus = _partitions(6)          # 1 + sum j mu_j <= 7
    for mu in mus:
        worst = max(worst, hf.hirota_residual(t1_ctx, mu).max_abs())
    kp = hf.kp_residual(t1_ctx.hatT.log()).max_abs()
    ok = report(3, worst < 1e-10 and kp < 1e-10, f"{len(mus)} mu, max hirota={worst:.2e}, kp={kp:.2e}",
                time.perf_counter() - t0, 30.0)
    assert ok


def test_c04_fay_n2_formal(t2_ctx):
    t0 = time.perf_counter()
    r = hf.fay_det_formal(t2_ctx, ["z1", "z2"], ["w1", "w2"]).max_abs()
    ok = report(4, r < 1e-9, f"T_2 joint degree 4, max coeff={r:.2e}", time.perf_counter() - t0, 60.0)
    assert ok


def test_c05_genus0_cauchy():
    t0 = time.perf_counter()
    cfg = cr.effective_config({}, seed=0)["fay_genus0"]
    tasks, _ = cr.suite_fay_genus0(cfg, 0)
    recs = [cr._run_task(t) for t in tasks]
    worst = max(r.residual for r in recs)
    g = hf.Genus0Context()
    hand = (g.tau_ratio(dv.Divisor.of([(2, 1), (3, 1), (0, -1), (1, -1)])),
            g.tau_ratio(dv.interleaved([2, 3], [0, 1])))
    ok = all(r.passed for r in recs) and hand == (Fraction(1, 12), Fraction(-1, 12))
    ok = report(5, ok, f"{len(recs)} configs (20 per n=2,3,4 + hand case), max={worst:.2e}, hand=({hand[0]}, {hand[1]})",
                time.perf_counter() - t0, 5.0)
    assert ok


def _form_pair(S):
    tau = S.tau
    return {"zero": rg.MeromorphicForm.zero(S),
            "third": rg.MeromorphicForm.third(S, 0.27 + 0.33 * tau, 0.71 + 0.62 * tau)}


def test_c06_genus1_fay():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst, count = 0.0, 0
    for tau in (1j, 0.3 + 0.8j):
        S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=1e-12)
        for name, form in _form_pair(S).items():
            for n in (2, 3):
                for _ in range(3):
                    pts = cr._torus_points(rng, tau, 2 * n, 0.1, avoid=(0.27 + 0.33 * tau, 0.71 + 0.62 * tau))
                    worst = max(worst, tt.fay_surface_residual(form, dv.interleaved(pts[:n], pts[n:])))
                    count += 1
    ok = report(6, worst < 1e-8, f"{count} cases, max relative residual={worst:.2e}", time.perf_counter() - t0, 30.0)
    assert ok


def test_c07_theta_properties():
    t0 = time.perf_counter()
    tb = 1e-13      # residuals are certified to 2 * tail_bound, so this keeps them below 1e-12
    rng = np.random.default_rng(7)
    worst, rel = 0.0, 0.0
    for tau in (1j, 0.3 + 0.8j):
        S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=tb)
        for _ in range(20):
            # centred fundamental domain shrunk by 0.1; off-centre cells hit the rounding floor
            a, b = rng.uniform(-0.4, 0.4, 2)
            u = complex(a + b * tau)
            q = abs(rg.quasi_periodicity_residual(u, 0, 1, tau, tb))
            worst = max(worst, abs(S.theta(-u) - S.theta(u)),
                        abs(rg.quasi_periodicity_residual(u, 1, 0, tau, tb)), q)
            rel = max(rel, q / abs(rg.theta(u + tau, tau, tb)))
        worst = max(worst, abs(S.theta(S.chi_point())))
    oracle = abs(rg.theta(0.0, 1j, tb) - rg.theta_oracle_direct(0.0, 1j, 10))
    ok = report(7, worst < 1e-12 and oracle < 1e-12,
                f"parity/periodicity/quasi/odd max={worst:.2e} (quasi relative {rel:.1e}), "
                f"Theta(0;i) vs direct={oracle:.2e}", time.perf_counter() - t0, 5.0)
    assert ok


def test_c08_monodromy():
    t0 = time.perf_counter()
    worst, control = 0.0, []
    for tau in (1j, 0.3 + 0.8j):
        S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=1e-12)
        p, q = 0.27 + 0.33 * tau, 0.71 + 0.62 * tau
        D = dv.interleaved([0.5 + 0.45 * tau], [0.55 + 0.15 * tau])
        ci = tt.ThetaTauContext(S, rg.MeromorphicForm.third(S, p, q))
        cc = tt.ThetaTauContext(S, rg.MeromorphicForm.third(S, p, q, 0.5))
        for shift in (1, tau):
            worst = max(worst, ci.monodromy_residual(D, 0, shift))
            control.append(cc.monodromy_residual(D, 0, shift))
    ok = report(8, worst < 1e-8 and min(control) > 1e-3,
                f"integer residues max={worst:.2e}; residue 1/2 control min={min(control):.3f}",
                time.perf_counter() - t0, 10.0)
    assert ok


def test_c09_decomposition():
    t0 = time.perf_counter()
    cfg = cr.effective_config({}, seed=9)["decomposition"]
    tasks, _ = cr.suite_decomposition(cfg, 9)
    recs = [cr._run_task(t) for t in tasks if t.id.startswith("roundtrip_t")]
    worst = max(r.residual for r in recs)
    ok = report(9, all(r.passed for r in recs) and worst < 1e-9,
                f"6-component forms at 2 tau, 100 samples each, max error={worst:.2e}",
                time.perf_counter() - t0, 10.0)
    assert ok


def test_c10_airy_shift():
    t0 = time.perf_counter()
    z1 = 1.0
    R = sc.convergence_radius(z1)
    D = dv.Divisor.of([(z1, 1)])
    oracle = sc.taylor_from_solver(D, 0, 10, 0.5 * R)
    closed = sc.zeta_series(z1, 10)
    series = max(abs(a - b) / abs(b) for a, b in zip(oracle, closed))
    zs = np.linspace(-2, 2, 20) + 0.7j
    curve_fixed, curve_printed = 0.0, 0.0
    for u in np.linspace(0.05, 0.5, 4) * R:
        sol = sc.solve_shift(D, u)
        curve_fixed = max(curve_fixed, np.max(np.abs(sc.curve_equation_residual(sol, zs))))
        curve_printed = max(curve_printed, np.max(np.abs(sc.curve_equation_residual(sol, zs, "printed"))))
    times = 0.0
    for Dx in (D, dv.Divisor.of([(z1, 1), (0.2 + 1.5j, 1)])):
        sol = sc.solve_shift(Dx, 0.01)
        got, exp = sc.shifted_times(sol), sc.expected_times(sol)
        times = max([times] + [abs(got["finite"][k] - exp["finite"][k]) for k in exp["finite"]]
                    + [abs(got["infinity"][k] - exp["infinity"][k]) for k in exp["infinity"]])
    inside, beyond = sc.series_growth(z1, 0.9 * R), sc.series_growth(z1, 1.1 * R)
    dt = time.perf_counter() - t0
    rest = series < 1e-10 and times < 1e-8 and inside < 1 < beyond
    report(10, rest and curve_printed < 1e-10,
           f"series={series:.2e}, curve as printed={curve_printed:.2e} (with +u/(4 zeta^2): {curve_fixed:.2e}), "
           f"times={times:.2e}, growth 0.9R={inside:.1e} 1.1R={beyond:.1e}", dt, 20.0)
    assert rest and curve_fixed < 1e-10 and curve_printed > 1e-6 and dt < 20.0


def test_c11_matrix_fay():
    t0 = time.perf_counter()
    zs, ws = [0.3 + 0.7j, -0.5 + 1.1j], [1.2 - 0.4j, -0.8 + 0.2j]
    fay, heine = 0.0, 0.0
    for V in (mt.PotentialSpec.gaussian(), mt.PotentialSpec({2: 1.0, 4: 1.0})):
        for N in (2, 3):
            ctx = mt.MatrixTauContext(N, V)
            fay = max(fay, mt.fay_matrix_residual(ctx, zs, ws))
            heine = max(heine, abs(ctx.tau_n() - ctx.eigenvalue_integral()) / abs(ctx.tau_n()))
    g2 = mt.MatrixTauContext(2)
    four_pi = max(abs(g2.eigenvalue_integral() - 4 * math.pi), abs(g2.tau_n() - 4 * math.pi))
    ok = report(11, fay < 1e-6 and heine < 1e-9 and four_pi < 1e-9,
                f"fay={fay:.2e}, heine={heine:.2e}, gaussian T_2 - 4pi={four_pi:.2e}", time.perf_counter() - t0, 120.0)
    assert ok


def test_c12_reproducing_and_wn(t2_ctx):
    t0 = time.perf_counter()
    formal = max(hf.reproducing_formal(t2_ctx).max_abs(), hf.reproducing_formal(t2_ctx, via_shift=True).max_abs())
    numeric = 0.0
    for tau in (1j, 0.3 + 0.8j):
        S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=1e-12)
        ctx = tt.ThetaTauContext(S, _form_pair(S)["third"])
        numeric = max(numeric, abs(hf.reproducing_residual(ctx, 0.45 + 0.3 * tau, 0.15 + 0.6 * tau, 0.8 + 0.85 * tau)))
    wn = max(hf.wn_determinantal_residual(t2_ctx, n).max_abs() for n in (2, 3))
    ok = report(12, formal < 1e-10 and numeric < 1e-8 and wn < 1e-10,
                f"formal={formal:.2e}, genus-1 numeric={numeric:.2e}, W_2/W_3={wn:.2e}", time.perf_counter() - t0, 60.0)
    assert ok


if __name__ == "__main__":
    from taufay.hirota_fay import TauContext
    t1 = TauContext(mt.MatrixTauContext(1).tau_series(13))
    t2 = TauContext(mt.MatrixTauContext(2).tau_series(4))
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            args = {"t1_ctx": t1, "t2_ctx": t2}
            params = fn.__code__.co_varnames[:fn.__code__.co_argcount]
            try:
                fn(*[args[p] for p in params])
            except AssertionError:
                pass
