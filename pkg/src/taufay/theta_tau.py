"""Theta Tau function on meromorphic forms of a genus-0/1 surface.

T(Omega) = Theta[c](zeta) exp(Q/2) exp(-2 pi i eps zeta) exp(-pi i eps tau eps),
with Q the quadratic form built from times, local coefficients, integrals
o -> p for the third-kind poles and the B-period; c is the odd
characteristic (Theta[c](zeta) is Theta(zeta + chi) up to a factor
exponential-linear in zeta, see tau_theta).  Identities are checked
on ratios; the ratio T(Omega + w'''_D)/T(Omega) equals the Szego kernel up
to a phase whose square is (-1)^s, s = sum_{i<j} a_i a_j: the regularized
integrals pair log(z_i - z_j) with log(z_j - z_i) and exp(Q/2) halves the
branch ambiguity.  The phase is reported rather than absorbed.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field
from typing import Sequence

from .divisors import Divisor, permutation_sign, split_supersymmetric
from .hirota_fay import fay_det_residual
from .riemann_geometry import (
    EVEN, TWO_PI_I, FormComponent, GeometryError, MeromorphicForm, SurfaceContext, SzegoData,
    b_period, epsilon, local_coefficient, path_integral, regularized_integral, segment_integral,
    szego, zeta_vector,
)


def form_from_json(surface: SurfaceContext, spec: Sequence[dict] | str) -> MeromorphicForm:
    """[{kind: "1st"|"2nd"|"3rd", coeff: {re, im}, p: {re, im}, q: {...}, k: int}, ...]"""
    if isinstance(spec, str):
        spec = json.loads(spec)
    comps = []
    for c in spec:
        cf = c.get("coeff", {"re": 1.0, "im": 0.0})
        pt = lambda key: complex(c[key]["re"], c[key].get("im", 0.0)) if key in c else 0j
        comps.append(FormComponent(c["kind"], complex(cf["re"], cf.get("im", 0.0)), pt("p"), pt("q"), int(c.get("k", 0))))
    return MeromorphicForm(surface, tuple(comps))


def form_to_json(form: MeromorphicForm) -> list:
    out = []
    for c in form.components:
        co, p, q = complex(c.coeff), complex(c.p), complex(c.q)
        out.append({"kind": c.kind, "coeff": {"re": co.real, "im": co.imag},
                    "p": {"re": p.real, "im": p.imag}, "q": {"re": q.real, "im": q.imag}, "k": c.k})
    return out


def q_form(form: MeromorphicForm) -> complex:
    """Q(Omega, Omega); integrals o -> p at simple poles are regularized in xi_p = z - p."""
    S = form.surface
    orders = form.pole_orders()
    total = 0j
    for p, d in orders.items():
        for k in range(1, d):
            t = local_coefficient(form, p, k)
            total += t * local_coefficient(form, p, -k) / k
        t0 = local_coefficient(form, p, 0)
        if abs(t0) > 1e-13:
            if d > 1:
                raise GeometryError("Q needs third-kind poles disjoint from higher-order poles")
            total += t0 * regularized_integral(form, S.origin, p)
    if S.genus == 1:
        total += epsilon(form) * b_period(form)
    return total


def q_tilde(form: MeromorphicForm) -> complex:
    """Q evaluated on Omega - 2 pi i eps omega'."""
    S = form.surface
    if S.genus == 0:
        return q_form(form)
    eps = epsilon(form)
    return q_form(form + MeromorphicForm.first(S, -TWO_PI_I * eps))


def tau_theta(form: MeromorphicForm, char=None, convention: str = "characteristic") -> complex:
    """Absolute Theta Tau.

    "characteristic": Theta[c](zeta) exp(Q/2 - 2 pi i eps zeta - pi i eps tau eps), c the odd
    characteristic unless given.  "shift": Theta(zeta + chi) in place of Theta[c](zeta), the
    literal form; it differs by a factor exponential-linear in zeta, so its ratios carry
    exp(-pi i a(D)) relative to the Szego kernel built on the antisymmetric prime form.
    Both vanish at zeta = 0 for the odd characteristic.
    """
    S = form.surface
    Q = q_form(form)
    if S.genus == 0:
        return cmath.exp(Q / 2)
    z, eps = zeta_vector(form), epsilon(form)
    if convention == "characteristic":
        th = complex(S.theta(z, S.char if char is None else char))
    elif convention == "shift":
        th = complex(S.theta(z + S.chi_point()))
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return th * cmath.exp(Q / 2 - TWO_PI_I * eps * z - cmath.pi * 1j * eps * S.tau * eps)


def continued_primitive(form: MeromorphicForm, z, shift) -> complex:
    """int_o^{z+shift} Omega continued along o -> z -> z + shift (straight pieces with detours)."""
    from .riemann_geometry import path_vertices
    base = path_integral(form, form.surface.origin, z)
    verts = path_vertices(form.surface, z, z + shift, form.poles())
    return base + sum(segment_integral(form, verts[i], verts[i + 1]) for i in range(len(verts) - 1))


@dataclass
class ThetaTauContext:
    """Numeric Tau backend on a surface: tau_ratio(D) is the Szego kernel psi(D; Omega)."""
    surface: SurfaceContext
    form: MeromorphicForm
    char: tuple | None = None
    tolerance: float = 1e-8
    backend: str = "theta"
    _data: SzegoData | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.form.surface != self.surface:
            raise GeometryError("form lives on another surface")
        self._data = SzegoData.of(self.form)
        if self.surface.genus == 1 and self.char is None:
            if abs(self.surface.theta(self._data.zeta, self.surface.char)) < 1e-10:
                raise GeometryError("Theta[odd](zeta(Omega)) vanishes; pass an even characteristic")

    @classmethod
    def ratio_mode(cls, surface, form, tolerance: float = 1e-8):
        """Odd characteristic when usable, otherwise the even characteristic (0, 0)."""
        try:
            return cls(surface, form, tolerance=tolerance)
        except GeometryError:
            return cls(surface, form, char=EVEN, tolerance=tolerance)

    @property
    def zeta(self):
        return self._data.zeta

    @property
    def eps(self):
        return self._data.eps

    def tau_ratio(self, D: Divisor) -> complex:
        return szego(D, self.form, self.char, self._data)

    def _lc(self, u):
        S = self.surface
        c = S.char if self.char is None else self.char
        return complex(S.theta(u, c, 1) / S.theta(u, c))

    def insertion_ratio(self, D: Divisor, xi) -> complex:
        """Delta_xi applied to the ratio, in closed form:
        psi(D) [L_c(zeta + a(D)) - L_c(zeta) - sum a_i L(z_i - xi)] at genus 1,
        psi(D) [- sum a_i / (z_i - xi)] at genus 0."""
        S = self.surface
        psi = self.tau_ratio(D)
        if S.genus == 0:
            return -sum(a / (z - xi) for z, a in D) * psi
        aD = S.abel_divisor(D)
        s = self._lc(self.zeta + aD) - self._lc(self.zeta)
        s -= sum(a * complex(S.log_deriv(z - xi)) for z, a in D)
        return s * psi

    def monodromy_residual(self, D: Divisor, index: int, shift) -> float:
        """|psi with z_index continued by shift (1 or tau) / psi - 1|."""
        z = D.points[index]
        cont = continued_primitive(self.form, z, shift)
        data = SzegoData(self.form, self._data.zeta, self._data.eps, dict(self._data._prim))
        data._prim[complex(z + shift)] = cont
        pts = list(D.points)
        pts[index] = z + shift
        moved = Divisor(tuple(pts), D.weights)
        return abs(szego(moved, self.form, self.char, data) / self.tau_ratio(D) - 1)

    def theta_ratio(self, D: Divisor, convention: str = "characteristic") -> complex:
        """T(Omega + w'''_D) / T(Omega) with both sides computed from scratch."""
        shifted = self.form + MeromorphicForm.third_divisor(self.surface, D)
        return tau_theta(shifted, self.char, convention) / tau_theta(self.form, self.char, convention)

    def theta_ratio_phase(self, D: Divisor) -> dict:
        """T ratio / psi.  Q holds logs of z_i - z_j continued along the integration paths, so
        exp(Q/2) fixes the ratio only up to a square root of (-1)^s, s = sum_{i<j} a_i a_j;
        which root depends on the path geometry.  The residual compares phase^2 with (-1)^s."""
        phase = self.theta_ratio(D) / self.tau_ratio(D)
        s = 0
        for i in range(len(D)):
            for j in range(i + 1, len(D)):
                s += D.weights[i] * D.weights[j]
        expected = cmath.exp(-1j * cmath.pi * s)
        return {"phase": phase, "expected_square": expected, "phase_residual": abs(phase * phase - expected), "s": s}


def fay_surface_residual(form: MeromorphicForm, D: Divisor, char=None, relative: bool = True) -> float:
    """|psi(D) - det psi([z_i] - [w_j])| for supersymmetric D (interleaved convention)."""
    split_supersymmetric(D)
    ctx = ThetaTauContext(form.surface, form, char) if char is not None else ThetaTauContext.ratio_mode(form.surface, form)
    return abs(fay_det_residual(ctx, D, relative=relative))


def cocycle_residual(ctx: ThetaTauContext, D1: Divisor, D2: Divisor) -> float:
    """psi(D1; Omega) psi(D2; Omega + w'''_{D1}) vs psi(D1 + D2; Omega), relative."""
    S = ctx.surface
    shifted = ctx.form + MeromorphicForm.third_divisor(S, D1)
    c2 = ThetaTauContext(S, shifted, ctx.char)
    lhs = ctx.tau_ratio(D1) * c2.tau_ratio(D2)
    rhs = ctx.tau_ratio(D1.concat(D2))
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def pauli_residual(ctx: ThetaTauContext, D: Divisor, sigma: Sequence[int]) -> float:
    lhs = ctx.tau_ratio(D.permute(sigma))
    rhs = permutation_sign(D, sigma) * ctx.tau_ratio(D)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def q_shift_residual(form: MeromorphicForm, D: Divisor) -> dict:
    """exp of both sides of the Q-tilde shift identity, with the integrals taken of Omega-tilde.

    Returns the ratio exp(lhs)/exp(rhs), which is a sign of the form
    (-1)^(sum_{i<j} a_i a_j) coming from log E(z_i, z_j) vs log E(z_j, z_i).
    """
    S = form.surface
    shifted = form + MeromorphicForm.third_divisor(S, D)
    lhs = q_tilde(shifted) - q_tilde(form)
    tilde = form if S.genus == 0 else form + MeromorphicForm.first(S, -TWO_PI_I * epsilon(form))
    rhs = 2 * sum(a * path_integral(tilde, S.origin, z) for z, a in D)
    lnE = 0j
    pts, ws = D.points, D.weights
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            lnE += -ws[i] * ws[j] * cmath.log(complex(S.prime_form(pts[i], pts[j])))
    rhs -= 2 * lnE
    return {"lhs": lhs, "rhs": rhs, "exp_ratio": cmath.exp(lhs - rhs)}
