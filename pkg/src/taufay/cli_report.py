"""Suite runner: JSON config in, JSON/CSV reports and plot data out.

    taufay run --suite <name> [--config <path>] --out <dir> [--seed <int>] [--jobs <int>]
    taufay plot --report <dir>/report.json --suite <name>

Every check produces a record {id, anchor, inputs, residual, tolerance,
expect, kind, passed}.  kind "check" records decide the exit status;
kind "info" records document printed formulas that disagree with the
computation and never fail a run.  Runtimes go to timings.json so that
report.json is identical across reruns with the same config and seed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import divisors as dv
from . import hirota_fay as hf
from . import matrix_tau as mt
from . import riemann_geometry as rg
from . import spectral_curve as sc
from . import theta_tau as tt

SCHEMA_VERSION = "taufay-report/1"
SUITES = ("hirota_ops", "hirota_formal", "fay_genus0", "fay_genus1", "theta_props",
          "airy_shift", "matrix_fay", "decomposition")

# the six operators of the worked example, keyed by mu
DMU_GOLDENS = {
    (0,): "D1",
    (1,): "-2*D2",
    (0, 1): "-1/6*D1^3 - D3",
    (2,): "-1/6*D1^3 + 2*D3",
    (0, 0, 1): "-1/36*D1^4 - 1/3*D1^2*D2 + 1/3*D1*D3 - 1/3*D2^2 - 2/3*D4",
    (2, 1): "-1/60*D1^5 + 1/2*D1^2*D3 - 2*D5",
}


def _c(re, im=0.0) -> dict:
    return {"re": float(re), "im": float(im)}


DEFAULTS = {
    "hirota_ops": {"tolerance": 0.0},
    "hirota_formal": {"t1_order": 13, "max_weight": 6, "tolerance": 1e-10, "route_check_mus": [[0, 0, 1], [2, 1], [1, 1, 1]],
                      "t2_order": 4, "fay_tolerance": 1e-9, "reproducing_tolerance": 1e-10, "wn_tolerance": 1e-10,
                      "control_threshold": 1e-3},
    "fay_genus0": {"samples": 20, "n_values": [2, 3, 4], "box": 2.0, "min_separation": 0.2, "tolerance": 1e-12},
    "fay_genus1": {"taus": [_c(0, 1), _c(0.3, 0.8)], "n_values": [2, 3], "samples": 2, "margin": 0.1,
                   "tail_bound": 1e-12, "tolerance": 1e-8, "poles": [[0.27, 0.33], [0.71, 0.62]],
                   "control_residue": 0.5, "control_threshold": 1e-3, "insertion_fd_tolerance": 1e-5},
    "theta_props": {"taus": [_c(0, 1), _c(0.3, 0.8)], "tail_bound": 1e-13, "tolerance": 1e-12, "samples": 5,
                    "prime_separation": 1e-4, "prime_tolerance": 1e-6},
    "airy_shift": {"z1": _c(1.0), "second_point": _c(0.2, 1.5), "k_max": 10, "series_tolerance": 1e-10,
                   "curve_tolerance": 1e-10, "times_tolerance": 1e-8, "du_tolerance": 1e-8, "branch_tolerance": 1e-12,
                   "samples": 20, "path_steps": 8, "u_small": 0.01, "u_fraction": 0.5},
    "matrix_fay": {"N_values": [2, 3], "potentials": [[{"k": 2, "re": 1.0, "im": 0.0}],
                                                      [{"k": 2, "re": 1.0, "im": 0.0}, {"k": 4, "re": 1.0, "im": 0.0}]],
                   "zs": [_c(0.3, 0.7), _c(-0.5, 1.1)], "ws": [_c(1.2, -0.4), _c(-0.8, 0.2)],
                   "tolerance": 1e-6, "heine_tolerance": 1e-9, "gaussian_tolerance": 1e-9},
    "decomposition": {"taus": [_c(0, 1), _c(0.3, 0.8)], "components": 6, "samples": 100, "margin": 0.1,
                      "tolerance": 1e-9, "o_tolerance": 1e-10},
}

_complex = {"type": "object", "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
            "required": ["re"], "additionalProperties": False}
_tol = {"type": "number", "minimum": 0}
_posint = {"type": "integer", "minimum": 1}


def _suite_schema(props: dict) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False}


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"type": "string"},
        "seed": {"type": "integer"},
        "hirota_ops": _suite_schema({"tolerance": _tol}),
        "hirota_formal": _suite_schema({
            "t1_order": _posint, "max_weight": _posint, "tolerance": _tol, "t2_order": _posint,
            "route_check_mus": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
            "fay_tolerance": _tol, "reproducing_tolerance": _tol, "wn_tolerance": _tol, "control_threshold": _tol}),
        "fay_genus0": _suite_schema({
            "samples": _posint, "n_values": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 6}},
            "box": {"type": "number", "exclusiveMinimum": 0}, "min_separation": _tol, "tolerance": _tol}),
        "fay_genus1": _suite_schema({
            "taus": {"type": "array", "items": _complex, "minItems": 1},
            "n_values": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 4}},
            "samples": _posint, "margin": _tol, "tail_bound": _tol, "tolerance": _tol,
            "poles": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                      "minItems": 2, "maxItems": 2},
            "control_residue": {"type": "number"}, "control_threshold": _tol, "insertion_fd_tolerance": _tol}),
        "theta_props": _suite_schema({
            "taus": {"type": "array", "items": _complex, "minItems": 1}, "tail_bound": _tol, "tolerance": _tol,
            "samples": _posint, "prime_separation": _tol, "prime_tolerance": _tol}),
        "airy_shift": _suite_schema({
            "z1": _complex, "second_point": _complex, "k_max": _posint, "series_tolerance": _tol, "curve_tolerance": _tol,
            "times_tolerance": _tol, "du_tolerance": _tol, "branch_tolerance": _tol, "samples": _posint,
            "path_steps": _posint, "u_small": {"type": "number"}, "u_fraction": {"type": "number", "exclusiveMinimum": 0}}),
        "matrix_fay": _suite_schema({
            "N_values": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 3}},
            "potentials": {"type": "array", "items": {"type": "array", "items": {
                "type": "object", "properties": {"k": _posint, "re": {"type": "number"}, "im": {"type": "number"}},
                "required": ["k", "re"], "additionalProperties": False}}},
            "zs": {"type": "array", "items": _complex}, "ws": {"type": "array", "items": _complex},
            "tolerance": _tol, "heine_tolerance": _tol, "gaussian_tolerance": _tol}),
        "decomposition": _suite_schema({
            "taus": {"type": "array", "items": _complex, "minItems": 1}, "components": {"type": "integer", "minimum": 3},
            "samples": _posint, "margin": _tol, "tolerance": _tol, "o_tolerance": _tol}),
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


def validate_config(cfg: dict) -> list:
    """Schema errors as 'JSON-pointer: message' strings (empty when valid)."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    out = []
    for err in sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path))):
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        out.append(f"{pointer}: {err.message}")
    return out


def effective_config(cfg: dict | None, seed: int | None = None) -> dict:
    """Validated config with every default expanded."""
    cfg = copy.deepcopy(cfg or {})
    errors = validate_config(cfg)
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    out = {"schema_version": SCHEMA_VERSION, "seed": int(cfg.get("seed", 0) if seed is None else seed)}
    for name in SUITES:
        merged = copy.deepcopy(DEFAULTS[name])
        merged.update(cfg.get(name, {}))
        out[name] = merged
    return out


# ---------------------------------------------------------------------------
# records


@dataclass
class Task:
    id: str
    anchor: str
    inputs: dict
    fn: Callable[[], float]
    tolerance: float
    expect: str = "small"        # "small": residual <= tol passes; "large": residual > tol passes
    kind: str = "check"


@dataclass
class Record:
    id: str
    anchor: str
    inputs: dict
    residual: float
    tolerance: float
    expect: str
    kind: str
    passed: bool
    error: str | None = None
    runtime: float = field(default=0.0, repr=False)

    def to_json(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "inputs": self.inputs, "residual": self.residual,
                "tolerance": self.tolerance, "expect": self.expect, "kind": self.kind, "passed": self.passed,
                "error": self.error}


def _run_task(t: Task) -> Record:
    t0 = time.perf_counter()
    try:
        r = float(t.fn())
        err = None
        if math.isnan(r):
            passed = False
        else:
            passed = r <= t.tolerance if t.expect == "small" else r > t.tolerance
    except Exception as e:  # a failing check is reported, not raised
        r, passed, err = float("nan"), False, f"{type(e).__name__}: {e}"
    return Record(t.id, t.anchor, t.inputs, r, t.tolerance, t.expect, t.kind, passed, err, time.perf_counter() - t0)


def _cx(d: dict) -> complex:
    return complex(d["re"], d.get("im", 0.0))


def _enc(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng([seed, SUITES.index(suite)])


# ---------------------------------------------------------------------------
# suites: each returns (tasks, plot) with plot = (header, rows)


def suite_hirota_ops(cfg: dict, seed: int):
    tol = cfg["tolerance"]
    tasks = []
    for mu, golden in DMU_GOLDENS.items():
        def f(mu=mu, golden=golden):
            direct, via_res = hf.dmu(mu), hf.dmu_residue(mu)
            return 0.0 if (str(direct) == golden and via_res == direct) else 1.0
        tasks.append(Task(f"dmu_golden_{''.join(map(str, mu))}", "Hirota operators D_mu, worked example",
                          {"mu": list(mu), "golden": golden}, f, tol))
    deriv = {}

    def kp():
        if not deriv:
            deriv.update(hf.kp_derivation())
        return deriv

    tasks.append(Task("kp_bilinear_printed", "KP from D_(0,0,1): bilinear form", {},
                      lambda: 0.0 if kp()["bilinear_matches"] else 1.0, tol))
    tasks.append(Task("kp_F_form_corrected", "KP from D_(0,0,1): F-form with (F_11)^2", {},
                      lambda: 0.0 if kp()["kp_matches_corrected"] else 1.0, tol))
    tasks.append(Task("kp_F_form_printed", "KP from D_(0,0,1): F-form as printed, (F_1)^2 term", {},
                      lambda: 0.0 if kp()["kp_matches_printed"] else 1.0, tol, kind="info"))
    return tasks, (["id"], [])


def _partitions_upto(w: int):
    out = []

    def rec(n, maxpart, acc):
        if n == 0:
            mu = [0] * (max(acc) if acc else 0)
            for p in acc:
                mu[p - 1] += 1
            out.append(tuple(mu))
            return
        for p in range(min(n, maxpart), 0, -1):
            rec(n - p, p, acc + [p])

    for n in range(0, w + 1):
        rec(n, n, [])
    return [mu if mu else (0,) for mu in out]


def suite_hirota_formal(cfg: dict, seed: int):
    from .formal_core import Series, times_ring
    shared = {}

    def T1():
        if "t1" not in shared:
            shared["t1"] = hf.TauContext(mt.MatrixTauContext(1).tau_series(cfg["t1_order"]))
        return shared["t1"]

    def T2():
        if "t2" not in shared:
            shared["t2"] = hf.TauContext(mt.MatrixTauContext(2).tau_series(cfg["t2_order"]))
        return shared["t2"]

    tasks = []
    for mu in _partitions_upto(cfg["max_weight"]):
        tag = "".join(map(str, mu))
        tasks.append(Task(f"hirota_T1_{tag}", "Hirota equations via residue of shifted products",
                          {"mu": list(mu), "order": cfg["t1_order"]},
                          lambda mu=mu: hf.hirota_residual(T1(), mu).max_abs(), cfg["tolerance"]))
    for mu in cfg["route_check_mus"]:
        mu = tuple(mu)
        tasks.append(Task(f"hirota_routes_{''.join(map(str, mu))}", "residue route vs bilinear D_mu route",
                          {"mu": list(mu)},
                          lambda mu=mu: (hf.hirota_residual(T1(), mu) - hf.hirota_residual(T1(), mu, "bilinear")).max_abs(),
                          cfg["tolerance"]))
    tasks.append(Task("kp_lnT1", "KP equation on F = ln T1", {"order": cfg["t1_order"]},
                      lambda: hf.kp_residual(T1().hatT.log()).max_abs(), cfg["tolerance"]))
    tasks.append(Task("fay2_T2", "Fay n=2 three-term identity, formal", {"order": cfg["t2_order"]},
                      lambda: hf.fay_det_formal(T2(), ["z1", "z2"], ["w1", "w2"]).max_abs(), cfg["fay_tolerance"]))
    tasks.append(Task("reproducing_T2", "reproducing kernel, formal", {"order": cfg["t2_order"]},
                      lambda: hf.reproducing_formal(T2()).max_abs(), cfg["reproducing_tolerance"]))
    tasks.append(Task("reproducing_T2_shift", "reproducing kernel, alpha-shift insertion", {"order": cfg["t2_order"]},
                      lambda: hf.reproducing_formal(T2(), via_shift=True).max_abs(), cfg["reproducing_tolerance"]))
    for n in (2, 3):
        tasks.append(Task(f"wn_T2_{n}", "W_n determinantal formula vs correlator", {"n": n, "order": cfg["t2_order"]},
                          lambda n=n: hf.wn_determinantal_residual(T2(), n).max_abs(), cfg["wn_tolerance"]))

    def control():
        R = times_ring(4)
        return hf.TauContext(Series.const(R, 1) + Series.var(R, "t2") + Series.var(R, "t1", 2, 3))

    th = cfg["control_threshold"]
    tasks.append(Task("control_fay2", "non-Tau control must violate Fay", {}, lambda: control_fay(control()), th, "large"))
    tasks.append(Task("control_hirota", "non-Tau control must violate Hirota", {},
                      lambda: hf.hirota_residual(control(), (0, 0, 1)).max_abs(), th, "large"))
    return tasks, (["id"], [])


def control_fay(ctx) -> float:
    return hf.fay_det_formal(ctx, ["z1", "z2"], ["w1", "w2"]).max_abs()


def _sample_points(rng, n, box, min_sep, tries=10_000):
    pts = []
    for _ in range(tries):
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(z - w) >= min_sep for w in pts):
            pts.append(z)
            if len(pts) == n:
                return pts
    raise RuntimeError("could not place points")


def suite_fay_genus0(cfg: dict, seed: int):
    rng = _rng(seed, "fay_genus0")
    S0 = rg.SurfaceContext(genus=0)
    zero = rg.MeromorphicForm.zero(S0)
    tasks = []
    for n in cfg["n_values"]:
        for s in range(cfg["samples"]):
            pts = _sample_points(rng, 2 * n, cfg["box"], cfg["min_separation"])
            D = dv.interleaved(pts[:n], pts[n:])
            tasks.append(Task(f"cauchy_n{n}_{s:02d}", "Fay determinant at genus 0 (Cauchy determinant)",
                              {"n": n, "zs": [_enc(z) for z in pts[:n]], "ws": [_enc(w) for w in pts[n:]]},
                              lambda D=D: tt.fay_surface_residual(zero, D), cfg["tolerance"]))

    def hand():
        D = dv.Divisor.of([(2, 1), (3, 1), (0, -1), (1, -1)])
        g = hf.Genus0Context()
        lhs = g.tau_ratio(D)
        inter = g.tau_ratio(dv.interleaved([2, 3], [0, 1]))
        ok = lhs == Fraction(1, 12) and inter == Fraction(-1, 12)
        return abs(complex(hf.fay_det_residual(g, D))) + (0.0 if ok else 1.0)

    tasks.append(Task("cauchy_hand_2301", "D = [2]+[3]-[0]-[1]: +1/12 as given, -1/12 interleaved",
                      {"D": [[2, 1], [3, 1], [0, -1], [1, -1]]}, hand, cfg["tolerance"]))
    return tasks, (["id"], [])


def _torus_points(rng, tau, n, margin, avoid=(), min_sep=0.12, tries=10_000):
    pts = []
    for _ in range(tries):
        s, t = rng.uniform(margin, 1 - margin, 2)
        z = s + t * tau
        if all(abs(z - w) >= min_sep for w in list(pts) + list(avoid)):
            pts.append(complex(z))
            if len(pts) == n:
                return pts
    raise RuntimeError("could not place points")


def suite_fay_genus1(cfg: dict, seed: int):
    rng = _rng(seed, "fay_genus1")
    tasks = []
    for ti, tj in enumerate(cfg["taus"]):
        tasks += _genus1_tasks(cfg, rng, ti, _cx(tj))
    return tasks, (["id"], [])


def _genus1_tasks(cfg: dict, rng, ti: int, tau: complex) -> list:
    # one scope per tau so the check closures bind this surface
    tasks = []
    S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=cfg["tail_bound"])
    (ps, pt), (qs, qt) = cfg["poles"]
    p, q = ps + pt * tau, qs + qt * tau
    forms = {"zero": rg.MeromorphicForm.zero(S), "third": rg.MeromorphicForm.third(S, p, q)}
    for fname, form in forms.items():
        for n in cfg["n_values"]:
            for s in range(cfg["samples"]):
                pts = _torus_points(rng, tau, 2 * n, cfg["margin"], avoid=(p, q))
                D = dv.interleaved(pts[:n], pts[n:])
                tasks.append(Task(f"fay_t{ti}_{fname}_n{n}_{s}", "Fay identity for the Szego kernel",
                                  {"tau": _enc(tau), "form": fname, "zs": [_enc(z) for z in pts[:n]],
                                   "ws": [_enc(w) for w in pts[n:]]},
                                  lambda form=form, D=D: tt.fay_surface_residual(form, D), cfg["tolerance"]))
    # monodromy: the moved point sits between the poles, so each translated loop encloses one of them
    z1, w1 = 0.2 + 0.8 * tau, 0.55 + 0.15 * tau
    D = dv.interleaved([z1], [w1])
    Dm = dv.interleaved([0.5 + 0.45 * tau], [w1])
    integer = forms["third"]
    control = rg.MeromorphicForm.third(S, p, q, cfg["control_residue"])
    for shift, tag in ((1, "A"), (tau, "B")):
        tasks.append(Task(f"monodromy_t{ti}_{tag}", "Szego kernel has no monodromy (integer residues)",
                          {"tau": _enc(tau), "shift": tag},
                          lambda shift=shift: tt.ThetaTauContext(S, integer).monodromy_residual(Dm, 0, shift),
                          cfg["tolerance"]))
        tasks.append(Task(f"monodromy_control_t{ti}_{tag}", "non-integer residue breaks the monodromy invariance",
                          {"tau": _enc(tau), "shift": tag, "residue": cfg["control_residue"]},
                          lambda shift=shift: tt.ThetaTauContext(S, control).monodromy_residual(Dm, 0, shift),
                          cfg["control_threshold"], "large"))
    x, xp, xpp = 0.45 + 0.3 * tau, 0.15 + 0.6 * tau, 0.8 + 0.85 * tau
    tasks.append(Task(f"reproducing_t{ti}", "reproducing kernel, genus 1 numeric", {"tau": _enc(tau)},
                      lambda: abs(hf.reproducing_residual(tt.ThetaTauContext(S, integer), x, xp, xpp)),
                      cfg["tolerance"]))
    Dh = dv.Divisor.of([(z1, 1), (w1, -1), (xp, 0.5), (xpp, -0.5)])
    tasks.append(Task(f"insertion_fd_t{ti}", "closed-form insertion vs alpha-shift limit",
                      {"tau": _enc(tau)},
                      lambda: (lambda c: abs(c.insertion_ratio(Dh, x) - hf.insertion_numeric(c, Dh, x)))(
                          tt.ThetaTauContext(S, integer)),
                      cfg["insertion_fd_tolerance"]))
    tasks.append(Task(f"theta_ratio_t{ti}", "T(Omega + w_D)/T(Omega) = psi(D) up to a phase with square (-1)^s",
                      {"tau": _enc(tau)},
                      lambda: tt.ThetaTauContext(S, integer).theta_ratio_phase(D)["phase_residual"],
                      cfg["tolerance"]))
    tasks.append(Task(f"cocycle_t{ti}", "shift by D1 then D2 equals shift by D1 + D2", {"tau": _enc(tau)},
                      lambda: tt.cocycle_residual(tt.ThetaTauContext(S, integer), D,
                                                  dv.interleaved([xp], [xpp])), cfg["tolerance"]))
    tasks.append(Task(f"pauli_t{ti}", "reordering sign of the Szego kernel", {"tau": _enc(tau)},
                      lambda: tt.pauli_residual(tt.ThetaTauContext(S, integer), dv.interleaved([z1, xp], [w1, xpp]),
                                                [2, 0, 3, 1]), cfg["tolerance"]))
    return tasks


def suite_theta_props(cfg: dict, seed: int):
    rng = _rng(seed, "theta_props")
    tb, tol = cfg["tail_bound"], cfg["tolerance"]
    tasks = []
    rows = []
    for ti, tj in enumerate(cfg["taus"]):
        tau = _cx(tj)
        S = rg.SurfaceContext(genus=1, tau=tau, tail_bound=tb)
        for s in range(cfg["samples"]):
            a, b = rng.uniform(-0.4, 0.4, 2)       # centred fundamental domain shrunk by 0.1
            u = complex(a + b * tau)
            tasks.append(Task(f"parity_t{ti}_{s}", "Theta(-u) = Theta(u)", {"tau": _enc(tau), "u": _enc(u)},
                              lambda u=u, S=S: abs(S.theta(-u) - S.theta(u)), tol))
            tasks.append(Task(f"periodic_t{ti}_{s}", "Theta(u + 1) = Theta(u)", {"tau": _enc(tau), "u": _enc(u)},
                              lambda u=u, tau=tau: abs(rg.quasi_periodicity_residual(u, 1, 0, tau, tb)), tol))
            tasks.append(Task(f"quasi_t{ti}_{s}", "Theta(u + tau) quasi-periodicity", {"tau": _enc(tau), "u": _enc(u)},
                              lambda u=u, tau=tau: abs(rg.quasi_periodicity_residual(u, 0, 1, tau, tb)), tol))
            tasks.append(Task(f"tail_t{ti}_{s}", "tail bound: doubling the radius changes Theta by < tail_bound",
                              {"tau": _enc(tau), "u": _enc(u)},
                              lambda u=u, tau=tau, S=S: abs(S.theta(u) - rg.theta_oracle_direct(
                                  u, tau, 2 * rg.theta_radius(tau, tb, abs(u.imag)))), 10 * tb))
        tasks.append(Task(f"odd_char_t{ti}", "Theta vanishes at the odd characteristic", {"tau": _enc(tau)},
                          lambda S=S: abs(S.theta(S.chi_point())), tol))
        z0 = 0.3 + 0.4 * tau
        h = cfg["prime_separation"]
        tasks.append(Task(f"prime_diag_t{ti}", "E(z1, z2)/(z1 - z2) -> 1", {"tau": _enc(tau), "separation": h},
                          lambda S=S, z0=z0: abs(S.prime_form(z0 + h, z0) / h - 1), cfg["prime_tolerance"]))
        tasks.append(Task(f"prime_antisym_t{ti}", "E(z1, z2) = -E(z2, z1)", {"tau": _enc(tau)},
                          lambda S=S, z0=z0: abs(S.prime_form(z0, 0.7 + 0.1 * tau) + S.prime_form(0.7 + 0.1 * tau, z0)),
                          tol))
        ref = rg.theta_oracle_direct(0.1 + 0.05j, tau, 40)
        for r in range(0, 7):
            rows.append([ti, r, float(abs(rg.theta_oracle_direct(0.1 + 0.05j, tau, r) - ref))])
    tasks.append(Task("theta0_i", "Theta(0; i) against the direct sum", {"tau": _enc(1j)},
                      lambda: abs(rg.theta(0.0, 1j, tb) - rg.theta_oracle_direct(0.0, 1j, 10)), tol))
    return tasks, (["tau_index", "radius", "abs_delta_theta"], rows)


def suite_airy_shift(cfg: dict, seed: int):
    z1 = _cx(cfg["z1"])
    R = sc.convergence_radius(z1)
    scfg = sc.ShiftConfig(path_steps=cfg["path_steps"])
    D = dv.Divisor.of([(z1, 1)])
    D2 = dv.Divisor.of([(z1, 1), (_cx(cfg["second_point"]), 1)])
    k_max = cfg["k_max"]
    tasks = []

    def series_vs_oracle():
        oracle = sc.taylor_from_solver(D, 0, k_max, 0.5 * R, cfg=scfg)
        closed = sc.zeta_series(z1, k_max)
        return max(abs(a - b) / abs(b) for a, b in zip(oracle, closed))

    tasks.append(Task("series_coefficients", "zeta_u series coefficients, k <= k_max",
                      {"z1": _enc(z1), "k_max": k_max}, series_vs_oracle, cfg["series_tolerance"]))
    zs = np.linspace(-2, 2, cfg["samples"]) + 0.7j
    for tag, u in (("small", cfg["u_small"]), ("half_radius", cfg["u_fraction"] * R)):
        tasks.append(Task(f"curve_equation_{tag}", "algebraic equation of the shifted curve (sign of u/(4 zeta^2) corrected)",
                          {"u": u}, lambda u=u: float(np.max(np.abs(
                              sc.curve_equation_residual(sc.solve_shift(D, u, cfg=scfg), zs)))), cfg["curve_tolerance"]))
        tasks.append(Task(f"curve_equation_printed_{tag}", "algebraic equation of the shifted curve as printed",
                          {"u": u}, lambda u=u: float(np.max(np.abs(
                              sc.curve_equation_residual(sc.solve_shift(D, u, cfg=scfg), zs, "printed")))),
                          cfg["curve_tolerance"], kind="info"))

    def times_err(Dx, u):
        sol = sc.solve_shift(Dx, u, cfg=scfg)
        got, exp = sc.shifted_times(sol), sc.expected_times(sol)
        errs = [abs(got["finite"][k] - exp["finite"][k]) for k in exp["finite"]]
        errs += [abs(got["infinity"][k] - exp["infinity"][k]) for k in exp["infinity"]]
        return max(errs)

    for tag, Dx in (("single", D), ("two_point", D2)):
        tasks.append(Task(f"shifted_times_{tag}", "times of S + uD by contour quadrature",
                          {"u": cfg["u_small"], "points": len(Dx)}, lambda Dx=Dx: times_err(Dx, cfg["u_small"]),
                          cfg["times_tolerance"]))
    tasks.append(Task("du_y_third_kind", "d/du y_u at fixed x equals the third-kind form of D_u",
                      {"u": cfg["u_small"]}, lambda: sc.du_y_residual(D2, cfg["u_small"], 0.3 + 0.4j, cfg=scfg),
                      cfg["du_tolerance"]))
    uh = cfg["u_fraction"] * R
    tasks.append(Task("branch_consistency", "homotopy vs direct Newton from the u = 0 seed", {"u": uh},
                      lambda: float(np.max(np.abs(sc.solve_shift(D, uh, cfg=scfg).zetas - sc.solve_shift(
                          D, uh, cfg=scfg, seed=np.array([z1, 1 / z1])).zetas))), cfg["branch_tolerance"]))
    tasks.append(Task("series_inside_radius", "series terms decay inside the radius", {"u_over_R": 0.9},
                      lambda: sc.series_growth(z1, 0.9 * R), 1.0))
    tasks.append(Task("series_beyond_radius", "series terms grow beyond the radius", {"u_over_R": 1.1},
                      lambda: sc.series_growth(z1, 1.1 * R), 1.0, "large"))
    rows = []
    direction = 1j * z1 ** 3 / abs(z1) ** 3        # away from the branch points u = +-R z1^3/|z1|^3
    for frac in np.linspace(0.1, 1.4, 14):
        u = frac * R * direction
        newton = sc.solve_shift(D, u, cfg=scfg).zetas[0]
        rows.append([round(float(frac), 6), float(abs(sc.zeta_series_sum(z1, u, 60) - newton))])
    return tasks, (["u_over_radius", "abs_series_minus_newton"], rows)


def suite_matrix_fay(cfg: dict, seed: int):
    zs = [_cx(z) for z in cfg["zs"]]
    ws = [_cx(w) for w in cfg["ws"]]
    tasks = []
    for pi, pj in enumerate(cfg["potentials"]):
        V = mt.PotentialSpec.from_json(pj)
        for N in cfg["N_values"]:
            ctx = mt.MatrixTauContext(N, V)
            tasks.append(Task(f"matrix_fay_V{pi}_N{N}", "supersymmetric Fay identity for the matrix integral",
                              {"N": N, "potential": pj, "zs": cfg["zs"], "ws": cfg["ws"]},
                              lambda ctx=ctx: mt.fay_matrix_residual(ctx, zs, ws), cfg["tolerance"]))
            tasks.append(Task(f"heine_V{pi}_N{N}", "Hankel determinant vs eigenvalue integral",
                              {"N": N, "potential": pj},
                              lambda ctx=ctx: abs(ctx.tau_n() - ctx.eigenvalue_integral()) / abs(ctx.tau_n()),
                              cfg["heine_tolerance"]))
    g2 = mt.MatrixTauContext(2)
    tasks.append(Task("gaussian_tau2_4pi", "Gaussian T_2 = 4 pi (2D quadrature oracle)", {},
                      lambda: max(abs(g2.eigenvalue_integral() - 4 * math.pi), abs(g2.tau_n() - 4 * math.pi)),
                      cfg["gaussian_tolerance"]))
    return tasks, (["id"], [])


def random_form(S: rg.SurfaceContext, rng, components: int, margin: float) -> rg.MeromorphicForm:
    """1 first-kind, then alternating third-kind pairs and second-kind poles of order 2..4."""
    tau = complex(S.tau)
    comps = [rg.FormComponent("1st", complex(*rng.normal(size=2)))]
    poles = _torus_points(rng, tau, 2 * components, margin, min_sep=0.15)
    i = 0
    for c in range(components - 1):
        coeff = complex(*rng.normal(size=2))
        if c % 2 == 0:
            comps.append(rg.FormComponent("3rd", coeff, poles[i], poles[i + 1]))
            i += 2
        else:
            comps.append(rg.FormComponent("2nd", coeff, poles[i], 0.0, 1 + (c // 2) % 3))
            i += 1
    return rg.MeromorphicForm(S, tuple(comps))


def suite_decomposition(cfg: dict, seed: int):
    rng = _rng(seed, "decomposition")
    tasks = []
    for ti, tj in enumerate(cfg["taus"]):
        tau = _cx(tj)
        S = rg.SurfaceContext(genus=1, tau=tau)
        form = random_form(S, rng, cfg["components"], cfg["margin"])
        samples = []
        while len(samples) < cfg["samples"]:
            s, t = rng.uniform(0, 1, 2)
            z = complex(s + t * tau)
            if all(abs(z - img) > 0.1 for p in form.poles() for img in S.lattice_images(p, 1)):
                samples.append(z)
        samples = np.array(samples)

        def roundtrip(form=form, samples=samples, S=S):
            data = rg.extract_times(form, k_max=5)
            rec = rg.reconstruct(S, data, tol=1e-11)
            return float(np.max(np.abs(rec(samples) - form(samples))))

        tasks.append(Task(f"roundtrip_t{ti}", "canonical decomposition round trip",
                          {"tau": _enc(tau), "form": tt.form_to_json(form), "samples": cfg["samples"]},
                          roundtrip, cfg["tolerance"]))
        p, q = 0.3 + 0.35 * tau, 0.7 + 0.6 * tau
        tasks.append(Task(f"zeta_third_t{ti}", "zeta(w'''_{p,q}) = a(p) - a(q)", {"tau": _enc(tau)},
                          lambda S=S, p=p, q=q: abs(rg.zeta_vector(rg.MeromorphicForm.third(S, p, q)) - (p - q)),
                          cfg["o_tolerance"]))
        D = dv.Divisor.of([(p, 1), (q, -2), (0.5 + 0.5 * tau, 1)])
        zz = samples[:10]
        tasks.append(Task(f"third_D_o_independent_t{ti}", "w'''_D independent of the auxiliary point",
                          {"tau": _enc(tau)},
                          lambda S=S, D=D, zz=zz: float(np.max(np.abs(
                              rg.MeromorphicForm.third_divisor(S, D, o=0.2 + 0.2 * tau)(zz)
                              - rg.MeromorphicForm.third_divisor(S, D, o=0.8 + 0.3 * tau)(zz)))), cfg["o_tolerance"]))
    S0 = rg.SurfaceContext(genus=0)
    f0 = rg.MeromorphicForm(S0, (rg.FormComponent("3rd", 1.5, 1 + 1j, -1 + 0.5j),
                                 rg.FormComponent("2nd", 0.3 - 0.2j, 2j, 0.0, 2)))
    zs0 = np.array([0.3, -1.2 + 0.4j, 2.5 - 1j])
    tasks.append(Task("roundtrip_g0", "canonical decomposition round trip, genus 0", {},
                      lambda: float(np.max(np.abs(rg.reconstruct(S0, rg.extract_times(f0, k_max=4), tol=1e-11)(zs0)
                                                  - f0(zs0)))), cfg["tolerance"]))
    return tasks, (["id"], [])


SUITE_FUNCS = {
    "hirota_ops": suite_hirota_ops, "hirota_formal": suite_hirota_formal, "fay_genus0": suite_fay_genus0,
    "fay_genus1": suite_fay_genus1, "theta_props": suite_theta_props, "airy_shift": suite_airy_shift,
    "matrix_fay": suite_matrix_fay, "decomposition": suite_decomposition,
}


# ---------------------------------------------------------------------------
# running and reporting


def run(config: dict | None, suite: str, seed: int | None = None, jobs: int = 1) -> tuple:
    """Returns (report dict, timings dict)."""
    if not suite:
        raise ConfigError("empty suite name")
    names = list(SUITES) if suite == "all" else [suite]
    for n in names:
        if n not in SUITE_FUNCS:
            raise ConfigError(f"unknown suite {n!r}; choose from {', '.join(SUITES + ('all',))}")
    cfg = effective_config(config, seed)
    records, plots = [], {}
    for n in names:
        tasks, (header, rows) = SUITE_FUNCS[n](cfg[n], cfg["seed"])
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                recs = list(ex.map(_run_task, tasks))
        else:
            recs = [_run_task(t) for t in tasks]
        for r in recs:
            r.id = f"{n}/{r.id}"
        records += recs
        plots[n] = {"header": header, "rows": rows}
    records.sort(key=lambda r: r.id)
    checks = [r for r in records if r.kind == "check"]
    report = {
        "schema_version": SCHEMA_VERSION,
        "suite": suite,
        "config": {k: cfg[k] for k in ["schema_version", "seed"] + names},
        "passed": all(r.passed for r in checks),
        "n_checks": len(checks),
        "n_failed": sum(not r.passed for r in checks),
        "records": [r.to_json() for r in records],
        "plot_data": plots,
    }
    timings = {r.id: r.runtime for r in records}
    return report, timings


def plot_data(report: dict, suite: str) -> str:
    """CSV text of a suite's plot series, header row first."""
    plots = report.get("plot_data", {})
    if not report.get("records") and not plots:
        return "id\n"
    if suite not in plots:
        raise KeyError(f"report has no suite {suite!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(plots[suite]["header"])
    for row in plots[suite]["rows"]:
        w.writerow([x if isinstance(x, (int, str)) and not isinstance(x, bool) else repr(float(x)) for x in row])
    return buf.getvalue()


def records_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "kind", "residual", "tolerance", "expect", "passed", "anchor"])
    for r in report["records"]:
        w.writerow([r["id"], r["kind"], repr(r["residual"]), repr(r["tolerance"]), r["expect"], r["passed"], r["anchor"]])
    return buf.getvalue()


def write_outputs(report: dict, timings: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "report.csv").write_text(records_csv(report))
    (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    for name in report["plot_data"]:
        (out / f"plot_{name}.csv").write_text(plot_data(report, name))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="taufay", description="Tau function identity checks")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a verification suite")
    r.add_argument("--suite", required=True, help="one of " + ", ".join(SUITES + ("all",)))
    r.add_argument("--config", type=Path, help="JSON config (defaults are used for missing keys)")
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--jobs", type=int, default=1)
    pl = sub.add_parser("plot", help="print a suite's plot data as CSV")
    pl.add_argument("--report", type=Path, required=True)
    pl.add_argument("--suite", required=True)
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command == "plot":
        report = json.loads(args.report.read_text())
        try:
            sys.stdout.write(plot_data(report, args.suite))
        except KeyError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        return 0
    if not args.suite:
        parser.print_usage(sys.stderr)
        print("error: empty suite name", file=sys.stderr)
        return 2
    config = None
    if args.config is not None:
        try:
            config = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return 2
    try:
        report, timings = run(config, args.suite, args.seed, args.jobs)
    except ConfigError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 2
    write_outputs(report, timings, args.out)
    for r in report["records"]:
        flag = "PASS" if r["passed"] else ("INFO" if r["kind"] == "info" else "FAIL")
        print(f"{flag} {r['id']} residual={r['residual']:.3e} tol={r['tolerance']:.1e}")
    print(f"{report['n_checks'] - report['n_failed']}/{report['n_checks']} checks passed")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
