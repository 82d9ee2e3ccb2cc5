"""Genus-0 and genus-1 surfaces: theta functions, prime form, canonical
differentials, times/periods by contour quadrature, and the Szego kernel.

Genus 1 is always the flat torus C/(Z + tau Z) in its flat coordinate z.
The A-cycle is the segment [0, 1], the B-cycle the segment [0, tau]; poles
of forms must lie strictly inside the fundamental parallelogram.

Theta with characteristics (a, b):
    Theta[a,b](u) = sum_n exp(pi i (n+a)^2 tau + 2 pi i (n+a)(u+b)).
The odd characteristic (1/2, 1/2) gives theta_o; the prime form is
E(z1, z2) = theta_o(z1 - z2) / theta_o'(0), antisymmetric and
E ~ z1 - z2 on the diagonal.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .divisors import Divisor, DivisorError

TWO_PI_I = 2j * math.pi


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Siegel matrices and theta


@dataclass(frozen=True)
class SiegelMatrix:
    tau: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.tau, dtype=complex))
        if t.shape[0] != t.shape[1]:
            raise GeometryError("tau must be square")
        if not np.allclose(t, t.T, atol=1e-14):
            raise GeometryError("tau must be symmetric")
        if t.size and np.linalg.eigvalsh(t.imag).min() <= 0:
            raise GeometryError("Im tau must be positive definite")
        object.__setattr__(self, "tau", t)

    @property
    def g(self) -> int:
        return self.tau.shape[0]

    @property
    def lam_min(self) -> float:
        return float(np.linalg.eigvalsh(self.tau.imag).min())


def _as_siegel(tau) -> SiegelMatrix:
    return tau if isinstance(tau, SiegelMatrix) else SiegelMatrix(tau)


def theta_radius(tau, tail_bound: float, y_max: float = 0.0, a_max: float = 0.0) -> int:
    """Smallest box radius R such that the lattice terms with max|n_i| > R sum to < tail_bound.

    Uses |term| <= exp(-pi lam (|n| - a)^2 + 2 pi |n + a| y), lam the smallest
    eigenvalue of Im tau, and counts at most 2g(2n+1)^(g-1) points per shell.
    """
    S = _as_siegel(tau)
    g, lam = S.g, S.lam_min
    y = y_max * math.sqrt(g)
    start = int(math.ceil(a_max + y / lam)) + 1

    def shell(n):
        r = max(n - a_max, 0.0)
        return 2 * g * (2 * n + 1) ** (g - 1) * math.exp(-math.pi * lam * r * r + 2 * math.pi * (n + a_max) * y)

    R = max(start, 1)
    while True:
        tail = 0.0
        n = R + 1
        while True:
            s = shell(n)
            tail += s
            if s < 1e-30 * max(tail, 1e-300) or n > R + 400:
                break
            n += 1
        if tail < tail_bound:
            return R
        R += 1
        if R > 10_000:
            raise GeometryError("theta radius did not converge")


def theta(u, tau, tail_bound: float = 1e-14, char=(0.0, 0.0), deriv: int = 0):
    """Riemann theta with characteristics; vectorized over u at genus 1.

    ``deriv`` (genus 1 only) returns the deriv-th u-derivative.
    """
    S = _as_siegel(tau)
    a, b = char
    if S.g == 1:
        t = S.tau[0, 0]
        u_arr = np.asarray(u, dtype=complex)
        y = float(np.max(np.abs(u_arr.imag))) if u_arr.size else 0.0
        R = theta_radius(S, tail_bound, y + abs(complex(b).imag), abs(a))
        n = np.arange(-R, R + 1, dtype=float) + a
        uu = u_arr.reshape(-1, 1) + b
        expo = np.pi * 1j * n * n * t + TWO_PI_I * n * uu
        terms = np.exp(expo)
        if deriv:
            terms = terms * (TWO_PI_I * n) ** deriv
        # sum outward-in for a deterministic, accurate reduction
        order = np.argsort(-np.abs(n))
        out = terms[:, order].sum(axis=1)
        return out.reshape(u_arr.shape) if u_arr.shape else complex(out[0])
    if deriv:
        raise GeometryError("theta derivatives implemented for genus 1 only")
    uvec = np.asarray(u, dtype=complex).reshape(S.g)
    av = np.broadcast_to(np.asarray(a, dtype=float), (S.g,))
    bv = np.broadcast_to(np.asarray(b, dtype=complex), (S.g,))
    R = theta_radius(S, tail_bound, float(np.max(np.abs((uvec + bv).imag))), float(np.max(np.abs(av))))
    rng = np.arange(-R, R + 1)
    grid = np.stack(np.meshgrid(*([rng] * S.g), indexing="ij"), -1).reshape(-1, S.g) + av
    quad = np.einsum("ni,ij,nj->n", grid, S.tau, grid)
    lin = grid @ (uvec + bv)
    return complex(np.sum(np.exp(np.pi * 1j * quad + TWO_PI_I * lin)))


def theta_gradient(u, tau, tail_bound: float = 1e-14, char=(0.0, 0.0)):
    return theta(u, tau, tail_bound, char, deriv=1)


def quasi_periodicity_residual(u, n, m, tau, tail_bound: float = 1e-14) -> complex:
    """Theta(u + n + tau m) - Theta(u) exp(-2 pi i (u, m) - pi i (m, tau m))."""
    S = _as_siegel(tau)
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    shift = u + n + S.tau @ m
    factor = np.exp(-TWO_PI_I * (u @ m) - np.pi * 1j * (m @ S.tau @ m))
    f = (lambda v, tb: theta(v[0], S, tb)) if S.g == 1 else (lambda v, tb: theta(v, S, tb))
    lhs = f(shift, tail_bound)
    # the factor scales the truncation error of Theta(u); tighten so each side stays within tail_bound
    rhs = f(u, tail_bound / max(1.0, abs(factor))) * factor
    return complex(lhs - rhs)


def theta_oracle_direct(u, tau, radius: int = 10) -> complex:
    """Plain symmetric partial sum of the genus-1 theta series (no tail logic)."""
    return complex(sum(cmath.exp(math.pi * 1j * k * k * tau + TWO_PI_I * k * u) for k in range(-radius, radius + 1)))


# ---------------------------------------------------------------------------
# quadrature


def trapezoid_closed(f: Callable, param: Callable, dparam: Callable, tol: float = 1e-12,
                     n0: int = 32, n_max: int = 1 << 16):
    """Periodic trapezoid rule for int_0^1 f(param(s)) param'(s) ds with node doubling."""
    def rule(n):
        s = np.arange(n) / n
        z = param(s)
        return np.sum(f(z) * dparam(s)) / n

    n = n0
    prev = rule(n)
    while True:
        n *= 2
        cur = rule(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur), n
        if n >= n_max:
            raise GeometryError(f"contour quadrature did not converge: {abs(cur - prev):.3e}")
        prev = cur


def circle_integral(f: Callable, center: complex, radius: float, tol: float = 1e-12):
    """Closed integral of f(z) dz over the circle |z - center| = radius."""
    return trapezoid_closed(
        f,
        lambda s: center + radius * np.exp(TWO_PI_I * s),
        lambda s: TWO_PI_I * radius * np.exp(TWO_PI_I * s),
        tol,
    )


def segment_loop_integral(f: Callable, start: complex, step: complex, tol: float = 1e-12):
    """int f dz along start -> start + step, for f periodic under that step (a closed cycle)."""
    return trapezoid_closed(f, lambda s: start + step * s, lambda s: step + 0 * s, tol)


_GL16 = np.polynomial.legendre.leggauss(16)
_GL32 = np.polynomial.legendre.leggauss(32)


def _gl(f, a, b, rule):
    x, w = rule
    mid, half = (a + b) / 2, (b - a) / 2
    return half * np.sum(w * f(mid + half * x))


def segment_integral(f: Callable, a: complex, b: complex, tol: float = 1e-13, depth: int = 0):
    """Adaptive Gauss-Legendre (16 vs 32 nodes) on the straight segment a -> b."""
    lo = _gl(f, a, b, _GL16)
    hi = _gl(f, a, b, _GL32)
    if abs(hi - lo) <= tol * max(1.0, abs(hi)) or depth > 40:
        if depth > 40:
            raise GeometryError("adaptive quadrature: maximum depth reached")
        return complex(hi)
    m = (a + b) / 2
    return segment_integral(f, a, m, tol / 2 ** 0.5, depth + 1) + segment_integral(f, m, b, tol / 2 ** 0.5, depth + 1)


# ---------------------------------------------------------------------------
# surfaces


@dataclass(frozen=True)
class SurfaceContext:
    """Genus 0 (Riemann sphere, affine coordinate) or genus 1 (flat torus)."""
    genus: int = 1
    tau: complex = 1j
    origin: complex = 0.0
    chi: tuple = (1, 1)              # characteristic as (n, m): chi = n/2 + tau m/2
    tail_bound: float = 1e-14
    margin: float = 1e-2
    quad_tol: float = 1e-12

    def __post_init__(self):
        if self.genus not in (0, 1):
            raise GeometryError("only genus 0 and 1 are supported")
        if self.genus == 1:
            SiegelMatrix(self.tau)
            n, m = self.chi
            if (n * m) % 2 != 1:
                raise GeometryError("chi must be an odd half-integer characteristic (n, m odd)")

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        t = complex(self.tau)
        o = complex(self.origin)
        return {"genus": self.genus, "tau": {"re": t.real, "im": t.imag},
                "chi": {"n": self.chi[0], "m": self.chi[1]}, "origin": {"re": o.real, "im": o.imag}}

    @classmethod
    def from_json(cls, d: dict) -> "SurfaceContext":
        t = d.get("tau", {"re": 0.0, "im": 1.0})
        o = d.get("origin", {"re": 0.0, "im": 0.0})
        if isinstance(o, (int, float)):
            o = {"re": float(o), "im": 0.0}
        chi = d.get("chi", {"n": 1, "m": 1})
        return cls(genus=int(d["genus"]), tau=complex(t["re"], t["im"]), origin=complex(o["re"], o["im"]),
                   chi=(int(chi["n"]), int(chi["m"])))

    # -- basic objects -------------------------------------------------------
    @property
    def char(self) -> tuple:
        """Theta characteristic (a, b) = (m/2, n/2) so that Theta[a,b] ~ Theta(. + chi)."""
        n, m = self.chi
        return (m / 2, n / 2)

    def chi_point(self) -> complex:
        n, m = self.chi
        return n / 2 + self.tau * m / 2

    def theta(self, u, char=(0.0, 0.0), deriv: int = 0):
        return theta(u, self.tau, self.tail_bound, char, deriv)

    def theta_odd(self, u, deriv: int = 0):
        return theta(u, self.tau, self.tail_bound, self.char, deriv)

    @cached_property
    def _theta_odd_prime0(self) -> complex:
        return complex(self.theta_odd(0.0, 1))

    def abel(self, z) -> np.ndarray:
        """a(z) = int_o^z omega' (empty vector at genus 0)."""
        if self.genus == 0:
            return np.zeros(0, dtype=complex)
        return np.array([complex(z) - complex(self.origin)])

    def abel_divisor(self, D: Divisor) -> complex:
        if self.genus == 0:
            return 0.0
        return sum(a * (complex(z) - complex(self.origin)) for z, a in D)

    def prime_form(self, z1, z2):
        if self.genus == 0:
            return z1 - z2
        return self.theta_odd(np.asarray(z1) - np.asarray(z2)) / self._theta_odd_prime0

    def prime_form_shift(self, z1, z2):
        """Theta(a(z1) - a(z2) + chi) / Theta'(chi): the non-characteristic form, for comparison."""
        chi = self.chi_point()
        return self.theta(z1 - z2 + chi) / self.theta(chi, deriv=1)

    def log_deriv(self, u, k: int = 0):
        """k-th derivative of L(u) = theta_o'(u) / theta_o(u)."""
        u = np.asarray(u, dtype=complex)
        th = self.theta_odd(u)
        ms = [None] + [self.theta_odd(u, d) / th for d in range(1, k + 2)]
        kap = [None] * (k + 2)
        for n in range(1, k + 2):
            kap[n] = ms[n] - sum(math.comb(n - 1, j - 1) * kap[j] * ms[n - j] for j in range(1, n))
        return kap[k + 1]

    def cell_index(self, p) -> int:
        return int(math.floor(complex(p).imag / complex(self.tau).imag))

    # -- singularity bookkeeping ---------------------------------------------
    def lattice_images(self, p, radius: int = 2) -> list:
        if self.genus == 0:
            return [complex(p)]
        t = complex(self.tau)
        return [complex(p) + i + j * t for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)]

    def check_pole(self, p):
        if self.genus == 0:
            return
        t = complex(self.tau)
        M = np.array([[1.0, t.real], [0.0, t.imag]])
        s, r = np.linalg.solve(M, [complex(p).real, complex(p).imag])
        if not (self.margin < s < 1 - self.margin and self.margin < r < 1 - self.margin):
            raise GeometryError(f"pole {p} on or too close to the marked loops")

    def residue_radius(self, p, others: Iterable) -> float:
        dists = []
        for q in others:
            for img in self.lattice_images(q):
                d = abs(img - complex(p))
                if d > 1e-14:
                    dists.append(d)
        for img in self.lattice_images(p):
            d = abs(img - complex(p))
            if d > 1e-14:
                dists.append(d)
        if not dists:
            return 0.5
        return min(dists) / 2


# ---------------------------------------------------------------------------
# meromorphic forms


@dataclass(frozen=True)
class FormComponent:
    kind: str          # "1st", "2nd", "3rd"
    coeff: complex
    p: complex = 0.0
    q: complex = 0.0
    k: int = 0


@dataclass(frozen=True)
class MeromorphicForm:
    """Linear combination of canonical forms on a surface, evaluated as f(z) in Omega = f(z) dz."""
    surface: SurfaceContext
    components: tuple = ()

    def __post_init__(self):
        for c in self.components:
            if c.kind not in ("1st", "2nd", "3rd"):
                raise GeometryError(f"unknown form kind {c.kind!r}")
            if c.kind == "1st" and self.surface.genus == 0:
                raise GeometryError("no holomorphic forms at genus 0")
            if c.kind == "2nd":
                if c.k < 1:
                    raise GeometryError("second-kind order k >= 1")
                self.surface.check_pole(c.p)
        for p in self.poles():
            self.surface.check_pole(p)

    # constructors
    @classmethod
    def zero(cls, surface) -> "MeromorphicForm":
        return cls(surface, ())

    @classmethod
    def first(cls, surface, coeff=1.0):
        return cls(surface, (FormComponent("1st", coeff),))

    @classmethod
    def third(cls, surface, p, q, coeff=1.0):
        return cls(surface, (FormComponent("3rd", coeff, p, q),))

    @classmethod
    def second(cls, surface, p, k, coeff=1.0):
        return cls(surface, (FormComponent("2nd", coeff, p, 0.0, k),))

    @classmethod
    def third_divisor(cls, surface, D: Divisor, o=None):
        """omega'''_D = sum a_i omega'''_{z_i, o}.

        For neutral D this does not depend on o, and the last point of D is
        used as the reference so that no cancelling pole sits at o.
        """
        D = D.drop_zero_weights()
        if o is None:
            if D.degree() != 0:
                o = surface.origin
            elif len(D) == 0:
                return cls(surface, ())
            else:
                o = D.points[-1]
        return cls(surface, tuple(FormComponent("3rd", a, z, o) for z, a in D if z != o))

    def __add__(self, other: "MeromorphicForm") -> "MeromorphicForm":
        if other.surface != self.surface:
            raise GeometryError("forms on different surfaces")
        return MeromorphicForm(self.surface, self.components + other.components)

    def scale(self, c) -> "MeromorphicForm":
        return MeromorphicForm(self.surface, tuple(FormComponent(x.kind, x.coeff * c, x.p, x.q, x.k)
                                                   for x in self.components))

    # evaluation
    def __call__(self, z):
        S = self.surface
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.components:
            out = out + c.coeff * _component_value(S, c, z)
        return out

    def pole_orders(self) -> dict:
        """Pole orders; third-kind poles whose residues cancel are not poles."""
        orders, res = {}, {}
        for c in self.components:
            if c.kind == "2nd":
                orders[complex(c.p)] = max(orders.get(complex(c.p), 0), c.k + 1)
            elif c.kind == "3rd":
                res[complex(c.p)] = res.get(complex(c.p), 0) + c.coeff
                res[complex(c.q)] = res.get(complex(c.q), 0) - c.coeff
        for p, r in res.items():
            if abs(r) > 1e-14:
                orders[p] = max(orders.get(p, 0), 1)
        return orders

    def poles(self) -> list:
        return list(self.pole_orders())


def _component_value(S: SurfaceContext, c: FormComponent, z):
    if c.kind == "1st":
        return np.ones_like(z)
    if S.genus == 0:
        if c.kind == "3rd":
            return 1 / (z - c.p) - 1 / (z - c.q)
        return (z - c.p) ** (-c.k - 1)
    if c.kind == "3rd":
        corr = TWO_PI_I * (S.cell_index(c.p) - S.cell_index(c.q))
        return S.log_deriv(z - c.p) - S.log_deriv(z - c.q) - corr
    return ((-1) ** c.k / math.factorial(c.k)) * S.log_deriv(z - c.p, c.k)


def canonical_form(surface: SurfaceContext, kind: str, **params) -> MeromorphicForm:
    """omega' ("1st"), omega''_{p,k} ("2nd", p=, k=), omega'''_{p,q} ("3rd", p=, q=)."""
    if kind == "1st":
        return MeromorphicForm.first(surface)
    if kind == "2nd":
        return MeromorphicForm.second(surface, params["p"], params["k"])
    if kind == "3rd":
        return MeromorphicForm.third(surface, params["p"], params["q"])
    raise GeometryError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# periods, times and paths


def a_period(form: MeromorphicForm) -> complex:
    S = form.surface
    if S.genus == 0:
        return 0.0
    return segment_loop_integral(form, 0.0, 1.0, S.quad_tol)[0]


def b_period(form: MeromorphicForm) -> complex:
    S = form.surface
    if S.genus == 0:
        return 0.0
    return segment_loop_integral(form, 0.0, complex(S.tau), S.quad_tol)[0]


def epsilon(form: MeromorphicForm) -> complex:
    """First-kind time: (1 / 2 pi i) times the A-period."""
    return a_period(form) / TWO_PI_I


def zeta_vector(form: MeromorphicForm) -> complex:
    """zeta = (1 / 2 pi i)(oint_B - tau oint_A); 0 at genus 0."""
    S = form.surface
    if S.genus == 0:
        return 0.0
    return (b_period(form) - complex(S.tau) * a_period(form)) / TWO_PI_I


def local_coefficient(form: MeromorphicForm, p, power: int) -> complex:
    """Res_p xi_p^power Omega with xi_p = z - p (power may be negative)."""
    S = form.surface
    others = [q for q in form.poles() if abs(q - complex(p)) > 1e-14]
    r = S.residue_radius(p, others)
    val, _ = circle_integral(lambda z: (z - p) ** power * form(z), complex(p), r, S.quad_tol)
    return val / TWO_PI_I


@dataclass
class TimesData:
    times: dict            # (p, k) -> t_{p,k}, k >= 1
    residues: dict         # p -> t_{p,0}
    eps: complex

    def nonzero(self, tol: float = 1e-10) -> dict:
        return {k: v for k, v in self.times.items() if abs(v) > tol}


def extract_times(form: MeromorphicForm, poles: Sequence | None = None, k_max: int | None = None) -> TimesData:
    poles = form.poles() if poles is None else [complex(p) for p in poles]
    orders = form.pole_orders()
    times, res = {}, {}
    for p in poles:
        res[p] = local_coefficient(form, p, 0)
        top = k_max if k_max is not None else max(orders.get(p, 1) - 1, 0) + 1
        for k in range(1, top + 1):
            times[(p, k)] = local_coefficient(form, p, k)
    eps = epsilon(form) if form.surface.genus == 1 else 0.0
    return TimesData(times, res, eps)


def reconstruct(surface: SurfaceContext, data: TimesData, o=None, tol: float = 0.0) -> MeromorphicForm:
    """sum t_{p,k} omega''_{p,k} + sum t_{p,0} omega'''_{p,o} + 2 pi i eps omega'."""
    comps = []
    for (p, k), t in data.times.items():
        if abs(t) > tol:
            comps.append(FormComponent("2nd", t, p, 0.0, k))
    res = {p: t for p, t in data.residues.items() if abs(t) > tol}
    if o is None and res:
        # residues sum to zero, so any residue pole serves as the reference point
        o = list(res)[-1]
    o = surface.origin if o is None else o
    for p, t in res.items():
        if p != o:
            comps.append(FormComponent("3rd", t, p, o))
    if surface.genus == 1 and abs(data.eps) > tol:
        comps.append(FormComponent("1st", TWO_PI_I * data.eps))
    return MeromorphicForm(surface, tuple(comps))


def path_vertices(surface: SurfaceContext, a: complex, b: complex, poles: Sequence, detour: float = 0.05) -> list:
    """Straight segment a -> b with a detour vertex next to every pole (or lattice image) it passes near."""
    a, b = complex(a), complex(b)
    d = b - a
    if abs(d) == 0:
        return [a]
    near = []
    for p in poles:
        for img in surface.lattice_images(p, 3):
            s = ((img - a) * d.conjugate()).real / abs(d) ** 2
            if 0 < s < 1:
                closest = a + s * d
                if abs(closest - img) < detour:
                    if abs(img - b) < 1e-14:
                        continue
                    near.append((s, img, closest))
    near.sort()
    verts = [a]
    normal = 1j * d / abs(d)
    for s, img, closest in near:
        side = normal if ((closest - img) * normal.conjugate()).real >= 0 else -normal
        verts.append(img + 2 * detour * side)
    verts.append(b)
    return verts


def path_integral(form: MeromorphicForm, a, b, tol: float = 1e-13) -> complex:
    """int_a^b Omega along the documented straight-segment path (with detours around poles)."""
    S = form.surface
    verts = path_vertices(S, a, b, form.poles())
    return sum(segment_integral(form, verts[i], verts[i + 1], tol) for i in range(len(verts) - 1))


def regularized_integral(form: MeromorphicForm, o, p, tol: float = 1e-13) -> complex:
    """int_o^p Omega for a simple pole of Omega at p, with t log(z - p) removed at p.

    reg = int_o^p (Omega - t/(z-p)) + t [sum over path segments of Log((v_{j+1}-p)/(v_j-p))
    up to the last vertex - Log(v_{last}-p)], i.e. minus the continuous branch of
    t log(o - p) along the path.  Higher-order poles at p are rejected.
    """
    p = complex(p)
    order = form.pole_orders().get(p, 0)
    if order > 1:
        raise GeometryError("regularized integral only for simple poles")
    if order == 0:
        return path_integral(form, o, p, tol)
    t = local_coefficient(form, p, 0)
    others = [q for q in form.poles() if abs(q - p) > 1e-14]
    verts = path_vertices(form.surface, o, p, others)
    g = lambda z: form(z) - t / (z - p)
    # quadrature up to a point at distance rho/2 from p, Taylor series of g on the rest
    rho = form.surface.residue_radius(p, others)
    last = verts[-2]
    a = p + (rho / 2) * (last - p) / abs(last - p) if abs(last - p) > rho / 2 else last
    pts = verts[:-1] + ([a] if a != last else [])
    smooth = sum(segment_integral(g, pts[i], pts[i + 1], tol) for i in range(len(pts) - 1))
    nodes = 256
    ring = p + rho * np.exp(TWO_PI_I * np.arange(nodes) / nodes)
    scaled = np.fft.fft(g(ring))[: nodes // 2] / nodes      # c_n rho^n
    r = (a - p) / rho
    n = np.arange(nodes // 2)
    smooth += -rho * np.sum(scaled * r ** (n + 1) / (n + 1))
    logs = 0j
    for i in range(len(verts) - 2):
        logs += cmath.log((verts[i + 1] - p) / (verts[i] - p))
    logs -= cmath.log(verts[-2] - p)
    return smooth + t * logs


# ---------------------------------------------------------------------------
# Szego kernel


ODD = (0.5, 0.5)
EVEN = (0.0, 0.0)


@dataclass
class SzegoData:
    """Cached Omega-dependent pieces of the Szego kernel."""
    form: MeromorphicForm
    zeta: complex
    eps: complex
    _prim: dict = field(default_factory=dict)

    @classmethod
    def of(cls, form: MeromorphicForm) -> "SzegoData":
        if form.surface.genus == 0:
            return cls(form, 0.0, 0.0)
        return cls(form, zeta_vector(form), epsilon(form))

    def primitive(self, z) -> complex:
        key = complex(z)
        if key not in self._prim:
            S = self.form.surface
            self._prim[key] = path_integral(self.form, S.origin, key) if self.form.components else 0j
        return self._prim[key]


def szego(D: Divisor, form: MeromorphicForm, char=None, data: SzegoData | None = None) -> complex:
    """psi(D; Omega) for a neutral divisor.

    Genus 1: Theta[c](zeta + a(D)) / Theta[c](zeta) * prod E(z_i,z_j)^(a_i a_j)
             * exp(sum a_i int_o^{z_i} Omega) * exp(-2 pi i eps a(D)),
    with c the odd characteristic unless given.  Genus 0 drops the theta
    and epsilon factors.
    """
    S = form.surface
    if D.degree() != 0:
        raise DivisorError("Szego kernel needs a neutral divisor")
    data = data or SzegoData.of(form)
    for z, _ in D:
        for p in form.poles():
            for img in S.lattice_images(p, 2):
                if abs(complex(z) - img) < 1e-12:
                    raise GeometryError(f"divisor point {z} on a pole of Omega")
    pw = 1.0 + 0j
    pts, ws = D.points, D.weights
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            e = ws[i] * ws[j]
            if e:
                pw *= complex(S.prime_form(pts[i], pts[j])) ** e
    expo = sum(a * data.primitive(z) for z, a in D) if form.components else 0j
    if S.genus == 0:
        return pw * cmath.exp(expo)
    c = S.char if char is None else char
    aD = S.abel_divisor(D)
    den = complex(S.theta(data.zeta, c))
    if abs(den) < 1e-10:
        raise GeometryError(f"|Theta[c](zeta)| = {abs(den):.2e} < 1e-10: choose another characteristic")
    num = complex(S.theta(data.zeta + aD, c))
    return num / den * pw * cmath.exp(expo - TWO_PI_I * data.eps * aD)


def szego_literal(D: Divisor, form: MeromorphicForm, data: SzegoData | None = None) -> complex:
    """The shift-form expression Theta(zeta + a(D) + chi) / (E(D) Theta(zeta + chi)) ... with the
    non-characteristic prime form; equal to :func:`szego` on interleaved unitary divisors."""
    S = form.surface
    if S.genus == 0:
        return szego(D, form, data=data)
    data = data or SzegoData.of(form)
    chi = S.chi_point()
    pw = 1.0 + 0j
    pts, ws = D.points, D.weights
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            e = ws[i] * ws[j]
            if e:
                pw *= complex(S.prime_form_shift(pts[i], pts[j])) ** e
    aD = S.abel_divisor(D)
    expo = sum(a * data.primitive(z) for z, a in D) if form.components else 0j
    num = complex(S.theta(data.zeta + aD + chi))
    den = complex(S.theta(data.zeta + chi))
    if abs(den) < 1e-10:
        raise GeometryError("theta zero in the denominator")
    return num / den * pw * cmath.exp(expo - TWO_PI_I * data.eps * aD)
