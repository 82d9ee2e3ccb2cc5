"""Hirota operators, bilinear residuals and Fay-type identities.

Two kinds of context are supported.

* :class:`TauContext` holds a graded formal series ``hatT`` (the regular
  part of a Tau function).  Identities are checked as exact polynomial
  identities in the times and in symbolic point variables, after the
  exponential and prime-form factors of the shift rule have been cleared
  by hand (they are the same on both sides).
* Numeric backends are any object with ``tau_ratio(D)`` returning the full
  ratio T(t+[D])/T(t) for a neutral :class:`~taufay.divisors.Divisor`.
  :class:`Genus0Context` is the trivial one (hatT = 1, t = 0); theta and
  matrix backends live in their own modules.

Ordering convention for Fay determinants: the divisor of ``n`` positive
points ``z`` and ``n`` negative points ``w`` is ordered
``z1, w1, z2, w2, ...`` and the determinant is over row ``i`` = ``w_i``,
column ``j`` = ``z_j`` of ``K(w_i, z_j)`` with
``K(x, x') = T(t+[x']-[x]) / T(t)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .divisors import Divisor, DivisorError, interleaved, permutation_sign, prime_weight, split_supersymmetric
from .formal_core import (Ring, Series, SeriesError, binomial_factor, correlator, insertion,
                          insertion_via_shift, times_in)


class IdentityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# bilinear operators


def _strip(key: tuple) -> tuple:
    key = tuple(key)
    while key and key[-1] == 0:
        key = key[:-1]
    return key


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True, eq=False)
class BilinearOperator:
    """Polynomial in the Hirota symbols D1, D2, ... with exact coefficients.

    ``terms`` maps an exponent tuple (index j-1 holds the power of Dj,
    trailing zeros stripped) to a Fraction.
    """
    terms: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, c in self.terms.items():
            k = _strip(k)
            c = Fraction(c)
            if c:
                clean[k] = clean.get(k, 0) + c
        object.__setattr__(self, "terms", {k: c for k, c in clean.items() if c})

    def __eq__(self, other):
        return isinstance(other, BilinearOperator) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BilinearOperator(out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BilinearOperator":
        return BilinearOperator({k: v * Fraction(c) for k, v in self.terms.items()})

    @staticmethod
    def _deg(key) -> int:
        return sum((j + 1) * e for j, e in enumerate(key))

    def degrees(self) -> set:
        return {self._deg(k) for k in self.terms}

    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise IdentityError(f"operator is not homogeneous: degrees {sorted(ds)}")
        return ds.pop() if ds else 0

    def part(self, parity: int) -> "BilinearOperator":
        """Terms with total D-count of the given parity (0 even, 1 odd)."""
        return BilinearOperator({k: c for k, c in self.terms.items() if sum(k) % 2 == parity})

    def even_part(self) -> "BilinearOperator":
        return self.part(0)

    def odd_part(self) -> "BilinearOperator":
        return self.part(1)

    def sorted_terms(self) -> list:
        width = max((len(k) for k in self.terms), default=0)
        padded = lambda k: k + (0,) * (width - len(k))
        return sorted(self.terms.items(), key=lambda kc: (self._deg(kc[0]), tuple(-e for e in padded(kc[0]))))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for i, (k, c) in enumerate(self.sorted_terms()):
            mon = "*".join(f"D{j + 1}" if e == 1 else f"D{j + 1}^{e}" for j, e in enumerate(k) if e)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mon:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mon
            else:
                body = f"{_fmt_coeff(a)}*{mon}"
            if i == 0:
                out.append(("-" if sign == "-" else "") + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> "BilinearOperator":
        """Inverse of ``str``: sums of ``[c*]D1^a*D3...`` with rational c."""
        s = text.replace(" ", "")
        if s in ("", "0"):
            return cls({})
        if s[0] not in "+-":
            s = "+" + s
        terms: dict = {}
        for sign, body in _split_terms(s):
            coeff = Fraction(1)
            exps: dict = {}
            for factor in body.split("*"):
                if factor.startswith("D"):
                    name, _, p = factor[1:].partition("^")
                    j = int(name)
                    exps[j] = exps.get(j, 0) + (int(p) if p else 1)
                else:
                    coeff *= Fraction(factor)
            width = max(exps, default=0)
            key = tuple(exps.get(j, 0) for j in range(1, width + 1))
            terms[_strip(key)] = terms.get(_strip(key), 0) + sign * coeff
        return cls(terms)


def _split_terms(s: str):
    i = 0
    while i < len(s):
        sign = -1 if s[i] == "-" else 1
        j = i + 1
        while j < len(s) and s[j] not in "+-":
            j += 1
        yield sign, s[i + 1:j]
        i = j


def _elementary_schur(n: int) -> dict:
    """S_n(D) = sum over sum_i i m_i = n of prod D_i^m_i / m_i!, as exponent -> Fraction."""
    out = {}
    for part in _partitions_as_multiplicities(n):
        c = Fraction(1)
        for m in part:
            c /= math.factorial(m)
        out[_strip(part)] = c
    return out


@lru_cache(maxsize=None)
def _partitions_as_multiplicities(n: int) -> tuple:
    """All (m_1, ..., m_n) with sum_i i m_i = n."""
    res = []

    def rec(i, rest, acc):
        if i > n:
            if rest == 0:
                res.append(tuple(acc))
            return
        for m in range(rest // i + 1):
            rec(i + 1, rest - i * m, acc + [m])

    rec(1, n, [])
    return tuple(res)


def _add_keys(a: tuple, b: tuple) -> tuple:
    w = max(len(a), len(b))
    a = a + (0,) * (w - len(a))
    b = b + (0,) * (w - len(b))
    return tuple(x + y for x, y in zip(a, b))


def dmu(mu: Sequence[int], even: bool = False) -> BilinearOperator:
    """The operator D_mu, expanded in closed form.

    Each factor (D_j - (2/j) xi^-j)^mu_j / mu_j! is expanded binomially; the
    residue against dxi/xi^2 e^{sum xi^k D_k} then picks the complete
    homogeneous part S_{1+s} of the exponential, where s is the xi-degree
    removed by the chosen negative powers.
    """
    mu = tuple(int(m) for m in mu)
    if any(m < 0 for m in mu):
        raise IdentityError("multi-index entries must be >= 0")
    terms: dict = {}
    for alpha in itertools.product(*(range(m + 1) for m in mu)):
        c = Fraction(1)
        s = 0
        for j, (m, a) in enumerate(zip(mu, alpha), start=1):
            c *= Fraction(math.comb(m, a), math.factorial(m)) * Fraction(-2, j) ** (m - a)
            s += j * (m - a)
        base = _strip(alpha)
        for key, v in _elementary_schur(1 + s).items():
            k = _add_keys(base, key)
            terms[k] = terms.get(k, 0) + c * v
    B = BilinearOperator(terms)
    return B.even_part() if even else B


def dmu_residue(mu: Sequence[int], even: bool = False) -> BilinearOperator:
    """Same operator, computed as an honest residue in a series ring (D_k weight k, xi weight 0)."""
    mu = tuple(int(m) for m in mu)
    deg = 1 + sum(j * m for j, m in enumerate(mu, start=1))
    names = tuple(f"D{k}" for k in range(1, deg + 1)) + ("xi",)
    ring = Ring(names, tuple(range(1, deg + 1)) + (0,), deg)
    xi = Series.var(ring, "xi")
    expo = Series(ring)
    for k in range(1, deg + 1):
        expo = expo + Series.var(ring, f"D{k}") * xi ** k
    prod = expo.exp()
    for j, m in enumerate(mu, start=1):
        if m == 0:
            continue
        fac = Series.var(ring, f"D{j}") - Series.var(ring, "xi", -j, Fraction(2, j))
        prod = prod * (fac ** m).scale(Fraction(1, math.factorial(m)))
    res = prod.coeff("xi", 1)
    terms = {}
    for key, c in res.terms.items():
        terms[_strip(key)] = c
    B = BilinearOperator(terms)
    return B.even_part() if even else B


def apply_bilinear(B: BilinearOperator, f: Series, g: Series) -> Series:
    """f B g, where D_k acts as d/dt_k on f minus d/dt_k on g."""
    if f.ring != g.ring:
        raise SeriesError(f"truncation mismatch: {f.order} vs {g.order}")
    if not B.terms:
        return Series(f.ring.with_order(f.order))
    deg = max(B.degrees())
    if f.order - deg < 0:
        raise SeriesError(f"truncation {f.order} too low for an operator of degree {deg}")
    ks = times_in(f.ring)
    cache_f: dict = {}
    cache_g: dict = {}

    def deriv(h, cache, key):
        if key in cache:
            return cache[key]
        if not any(key):
            out = h
        else:
            j = max(i for i, e in enumerate(key) if e)
            prev = list(key)
            prev[j] -= 1
            name = f"t{j + 1}"
            if j + 1 not in ks:
                out = Series(h.ring.with_order(h.order - _weight(key)))
            else:
                out = deriv(h, cache, tuple(prev)).diff(name)
        cache[key] = out
        return out

    target = f.ring.with_order(f.order - deg)
    total = Series(target)
    for key, c in B.terms.items():
        for a in itertools.product(*(range(e + 1) for e in key)):
            coef = Fraction(c)
            for e, ai in zip(key, a):
                coef *= math.comb(e, ai) * (-1) ** (e - ai)
            b = tuple(e - ai for e, ai in zip(key, a))
            lo = deriv(f, cache_f, _strip(a)).truncate(target.order)
            hi = deriv(g, cache_g, _strip(b)).truncate(target.order)
            total = total + (lo * hi).scale(coef)
    return total


def _weight(key) -> int:
    return sum((j + 1) * e for j, e in enumerate(key))


# ---------------------------------------------------------------------------
# KP


def kp_residual(F: Series, form: str = "derived") -> Series:
    """F_22 + (1/12)(F_1111 + 6 X^2) - F_13.

    ``form="derived"`` uses X = F_11 (what the bilinear identity gives);
    ``form="printed"`` uses X = F_1, kept for comparison only.
    """
    if F.order < 4:
        raise SeriesError("kp_residual needs truncation >= 4")
    F22 = F.diff("t2", 2)
    F1111 = F.diff("t1", 4)
    F13 = F.diff("t1").diff("t3")
    if form == "derived":
        X = F.diff("t1", 2)
    elif form == "printed":
        X = F.diff("t1")
    else:
        raise ValueError(f"unknown form {form!r}")
    n = F.order - 4
    parts = [F22, F1111, F13, X]
    F22, F1111, F13, X = (p.truncate(n) for p in parts)
    return F22 + (F1111 + (X * X).scale(6)).scale(Fraction(1, 12)) - F13


def kp_derivation(nvars: int = 4) -> dict:
    """Symbolic expansion of hatT D_(0,0,1) hatT with hatT = exp(F).

    Returns sympy expressions: ``bilinear`` (the PDE in hatT, normalized so
    the coefficient of hatT*hatT_22 is 1), ``kp`` (the same divided by
    hatT^2 and written in F) and the two printed forms for comparison.
    """
    import sympy as sp

    ts = sp.symbols(f"t1:{nvars + 1}")
    Tf = sp.Function("T")(*ts)
    Ff = sp.Function("F")(*ts)
    B = dmu((0, 0, 1)).even_part()

    def bil(h):
        expr = 0
        for key, c in B.terms.items():
            for a in itertools.product(*(range(e + 1) for e in key)):
                coef = sp.Rational(c.numerator, c.denominator)
                for e, ai in zip(key, a):
                    coef *= math.comb(e, ai) * (-1) ** (e - ai)
                left, right = h, h
                for j, ai in enumerate(a):
                    if ai:
                        left = sp.diff(left, ts[j], ai)
                for j, (e, ai) in enumerate(zip(key, a)):
                    if e - ai:
                        right = sp.diff(right, ts[j], e - ai)
                expr += coef * left * right
        return sp.expand(expr)

    bT = bil(Tf)
    norm = bT.coeff(Tf * sp.diff(Tf, ts[1], 2))
    bT = sp.expand(bT / norm)
    d = sp.diff
    t1, t2, t3 = ts[:3]
    printed_bilinear = sp.expand(
        Tf * d(Tf, t2, 2) - d(Tf, t2) ** 2
        + sp.Rational(1, 12) * (Tf * d(Tf, t1, 4) - 4 * d(Tf, t1) * d(Tf, t1, 3) + 3 * d(Tf, t1, 2) ** 2)
        - Tf * d(Tf, t1, t3) + d(Tf, t1) * d(Tf, t3))
    expF = sp.exp(Ff)
    kp = sp.expand(sp.simplify(bil(expF) / norm / expF ** 2))
    printed_kp = d(Ff, t2, 2) + sp.Rational(1, 12) * (d(Ff, t1, 4) + 6 * d(Ff, t1) ** 2) - d(Ff, t3, t1)
    corrected_kp = d(Ff, t2, 2) + sp.Rational(1, 12) * (d(Ff, t1, 4) + 6 * d(Ff, t1, 2) ** 2) - d(Ff, t3, t1)
    return {
        "operator": B,
        "bilinear": bT,
        "printed_bilinear": printed_bilinear,
        "kp": kp,
        "printed_kp": sp.expand(printed_kp),
        "corrected_kp": sp.expand(corrected_kp),
        "bilinear_matches": sp.expand(bT - printed_bilinear) == 0,
        "kp_matches_printed": sp.expand(kp - printed_kp) == 0,
        "kp_matches_corrected": sp.expand(kp - corrected_kp) == 0,
        "kp_difference": sp.expand(kp - printed_kp),
    }


# ---------------------------------------------------------------------------
# formal Tau context


@dataclass(frozen=True)
class TauContext:
    """Formal Tau function: hatT in t1..tn truncated at order N.

    The full Tau function is T = exp(F) hatT; F only enters through the
    shift rule, whose exponential and prime-form factors are cleared
    analytically in each identity below.
    """
    hatT: Series

    def __post_init__(self):
        if self.hatT.constant_term() == 0:
            raise SeriesError("hatT must have a nonzero constant term")

    @property
    def order(self) -> int:
        return self.hatT.order

    @property
    def times(self) -> list:
        return times_in(self.hatT.ring)

    def ring_with(self, names: Sequence[str], order: int | None = None, weights=None, caps=None) -> Ring:
        names = tuple(names)
        weights = tuple(weights) if weights is not None else (1,) * len(names)
        r = self.hatT.ring.extend(names, weights, caps)
        return r if order is None else r.with_order(order)

    def shifted(self, ring: Ring, points: Sequence = (), vectors: Sequence = ()) -> Series:
        """hatT(t + sum c [x] + sum c' u) in ``ring``.

        ``points``: (name, c) pairs adding c*x^k to t_k.
        ``vectors``: (prefix, c) pairs adding c*prefix_k to t_k.
        """
        hat = self.hatT if self.hatT.order == ring.order else self.hatT.embed(self.hatT.ring.with_order(ring.order))
        mapping = {}
        for k in self.times:
            im = Series.var(ring, f"t{k}")
            for name, c in points:
                im = im + Series.var(ring, name, k, c)
            for prefix, c in vectors:
                if f"{prefix}{k}" in ring.names:
                    im = im + Series.var(ring, f"{prefix}{k}", 1, c)
            mapping[f"t{k}"] = im
        return hat.subs(mapping, ring)

    def ratio(self, ring: Ring, points: Sequence) -> Series:
        """hatT(t+[D]) / hatT(t) for a symbolic divisor given as (name, weight) pairs."""
        base = self.hatT.embed(ring) if self.hatT.ring != ring else self.hatT
        if self.hatT.order > ring.order:
            base = self.hatT.truncate(ring.order).embed(ring)
        return self.shifted(ring, points) * base.inverse()

    def kernel_hat(self, ring: Ring, x: str, xp: str) -> Series:
        """R(x, x') = hatT(t+[x']-[x]) / hatT(t); K = exp(-sum t_k (x'^-k - x^-k)/k) R / (x' - x)."""
        return self.ratio(ring, [(xp, 1), (x, -1)])


@dataclass(frozen=True)
class Genus0Context:
    """hatT = 1 at t = 0 on the sphere: every shifted ratio is the prime weight."""

    backend = "genus0"
    tolerance = 1e-12

    def tau_ratio(self, D: Divisor):
        if D.degree() != 0:
            raise DivisorError("tau ratios are defined for neutral divisors")
        return prime_weight(D)

    def insertion_ratio(self, D: Divisor, xi):
        """Delta_xi acting on the ratio: with hatT = 1 and t = 0 only the exponential factor moves."""
        s = 0
        for z, a in D:
            s += a / (z - xi)
        return -s * self.tau_ratio(D)


# ---------------------------------------------------------------------------
# Hirota residuals


def hirota_residual(ctx: TauContext, mu: Sequence[int], method: str = "residue") -> Series:
    """Coefficient of u^mu in Res dxi/xi^2 hatT(t+u+[xi]) hatT(t-u-[xi]) e^{-2 sum u_k xi^-k / k}.

    ``method="bilinear"`` evaluates hatT D_mu hatT instead; the two agree
    exactly.  The result has order N - 1 - sum_j j mu_j.
    """
    mu = tuple(int(m) for m in mu)
    deg = 1 + sum(j * m for j, m in enumerate(mu, start=1))
    if ctx.order - deg < 0:
        raise SeriesError(f"truncation {ctx.order} insufficient for mu={mu} (degree {deg})")
    if method == "bilinear":
        return apply_bilinear(dmu(mu), ctx.hatT, ctx.hatT)
    if method != "residue":
        raise ValueError(f"unknown method {method!r}")
    us = [j for j, m in enumerate(mu, start=1) if m]
    unames = [f"u{j}" for j in us]
    caps = (None,) * len(ctx.hatT.ring.names) + tuple(mu[j - 1] for j in us) + (None,)
    ring = Ring(ctx.hatT.ring.names + tuple(unames) + ("xi",),
                ctx.hatT.ring.weights + tuple(us) + (1,), ctx.order, caps)
    plus = ctx.shifted(ring, points=[("xi", 1)], vectors=[("u", 1)])
    minus = ctx.shifted(ring, points=[("xi", -1)], vectors=[("u", -1)])
    w = Series(ring)
    for j in us:
        w = w + Series.monomial(ring, {f"u{j}": 1, "xi": -j}, Fraction(-2, j))
    prod = plus * minus * w.exp()
    res = prod
    for j in us:
        res = res.coeff(f"u{j}", mu[j - 1])
    return res.coeff("xi", 1)


def hirota_divisor_residual(ctx: TauContext, D: Sequence) -> Series:
    """Res_xi T(t+[D]+[xi]) T(t-[D]-[xi]) for deg D = -1, cleared of the t-exponentials.

    D is a list of (name, weight) pairs.  Up to a constant the integrand is
    dxi/xi^2 prod_j (1 - z_j/xi)^{2 a_j} hatT(t+[D']) hatT(t-[D']) with
    D' = D + [xi]; the result is a series in t and the z_j, valid to order N-1.
    """
    deg = sum(Fraction(a) for _, a in D)
    if deg != -1:
        raise DivisorError(f"divisor degree must be -1, got {deg}")
    names = [n for n, _ in D] + ["xi"]
    ring = ctx.ring_with(names)
    pts = list(D) + [("xi", 1)]
    plus = ctx.shifted(ring, points=pts)
    minus = ctx.shifted(ring, points=[(n, -a) for n, a in pts])
    prod = plus * minus
    for n, a in D:
        prod = prod * binomial_factor(ring, n, "xi", 2 * Fraction(a), ring.order)
    return prod.coeff("xi", 1).truncate(ring.order - 1)


def _poly_prod(ring: Ring, factors) -> Series:
    """Product of (x_a - x_b) factors as a series of ``ring``; factors = [(a, b)]."""
    out = Series.const(ring, 1)
    for a, b in factors:
        out = out * (Series.var(ring, a) - Series.var(ring, b))
    return out


def fay_det_formal(ctx: TauContext, zs: Sequence[str], ws: Sequence[str]) -> Series:
    """Fay determinantal identity for D = sum [z_i] - [w_i], cleared of denominators.

    LHS: s' * prod_{same-sign pairs a<b}(x_a - x_b) * rho(D),
    RHS: sum_sigma sgn(sigma) prod_i rho_{i sigma(i)} prod_{j != sigma(i)} (z_j - w_i),
    with rho(D) = hatT(t+[D])/hatT and rho_ij = hatT(t+[z_j]-[w_i])/hatT.
    s' is the product of orientation signs of the opposite-sign pairs in
    the interleaved order.  Both sides are rho's (valid to order N) times
    homogeneous polynomials of degree n(n-1), so LHS - RHS is returned at
    order N + n(n-1).
    """
    n = len(zs)
    if len(ws) != n or n < 1:
        raise DivisorError("need n >= 1 positive and n negative points")
    order_pts = []
    for z, w in zip(zs, ws):
        order_pts += [(z, 1), (w, -1)]
    ring = ctx.ring_with([p for p, _ in order_pts])
    same, sprime = [], 1
    for a in range(2 * n):
        for b in range(a + 1, 2 * n):
            (xa, aa), (xb, ab) = order_pts[a], order_pts[b]
            if aa == ab:
                same.append((xa, xb))
            elif aa == -1:
                sprime = -sprime  # (w - z) written as -(z - w)
    lhs = _times_poly(ctx.ratio(ring, order_pts), same, sprime)
    rho = [[ctx.ratio(ring, [(zs[j], 1), (ws[i], -1)]) for j in range(n)] for i in range(n)]
    rhs = Series(lhs.ring)
    for perm in itertools.permutations(range(n)):
        term = Series.const(ring, _perm_sign(perm))
        for i in range(n):
            term = term * rho[i][perm[i]]
        cleared = [(zs[j], ws[i]) for i in range(n) for j in range(n) if j != perm[i]]
        rhs = rhs + _times_poly(term, cleared)
    return lhs - rhs


def _perm_sign(perm) -> int:
    s = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def fay_n2_residual(ctx, z1, z2, w1, w2):
    """n = 2 Fay identity; formal for a TauContext (names), numeric otherwise."""
    if isinstance(ctx, TauContext):
        return fay_det_formal(ctx, [z1, z2], [w1, w2])
    return fay_det_residual(ctx, interleaved([z1, z2], [w1, w2]))


def kernel(ctx, x, xp):
    """K(x, x') = T(t+[x']-[x]) / T(t) for a numeric backend."""
    if x == xp:
        raise DivisorError("kernel at coincident arguments")
    return ctx.tau_ratio(Divisor.of([(xp, 1), (x, -1)]))


def fay_det_residual(ctx, D: Divisor, relative: bool = False):
    """T(t+[D])/T - det_{ij} K(w_i, z_j) for a supersymmetric D (numeric backends).

    D must be given in interleaved order z1, w1, z2, w2, ...; other orders
    are reduced to it with the permutation sign.
    """
    zs, ws = split_supersymmetric(D)
    n = len(zs)
    target = interleaved(zs, ws)
    sigma = [target.points.index(p) for p in D.points]
    lhs = ctx.tau_ratio(D)
    lhs_interleaved = lhs * permutation_sign(D, sigma)
    M = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            M[i, j] = kernel(ctx, ws[i], zs[j])
    rhs = np.linalg.det(M)
    r = lhs_interleaved - rhs
    if relative:
        scale = max(abs(lhs_interleaved), abs(rhs), 1e-300)
        return abs(r) / scale
    return r


# ---------------------------------------------------------------------------
# reproducing kernel and correlators


def _times_poly(s: Series, p_factors, sign: int = 1) -> Series:
    """s times a homogeneous product of (x_a - x_b) factors; the valid order rises by its degree."""
    d = len(p_factors)
    ring = s.ring.with_order(s.order + d)
    return (s.embed(ring) * _poly_prod(ring, p_factors)).scale(sign)


def reproducing_formal(ctx: TauContext, x: str = "x", xp: str = "xp", xpp: str = "xpp",
                       via_shift: bool = False) -> Series:
    """(x''-x')[R(x',x'') - R(x',x)R(x,x'')] + (x'-x)(x''-x) Delta_x R(x',x'').

    This is (x''-x')(x''-x)(x'-x)/e times Delta_x K(x',x'') + K(x',x)K(x,x''),
    e the common exponential factor; it vanishes for a Tau function.
    Delta_x is the direct insertion operator or, with ``via_shift``, the
    alpha-shift limit.  Valid to order N+1.
    """
    ring = ctx.ring_with([x, xp, xpp])
    N = ring.order + 1
    R12 = ctx.kernel_hat(ring, xp, xpp)
    R10 = ctx.kernel_hat(ring, xp, x)
    R02 = ctx.kernel_hat(ring, x, xpp)
    # Delta_x acts on the times only; x is not yet a variable of R(x', x'')
    small = ctx.ring_with([xp, xpp])
    R12s = ctx.kernel_hat(small, xp, xpp)
    dR = insertion_via_shift(R12s, x).series if via_shift else insertion(R12s, x).series
    dR = dR.embed(ring.with_order(dR.order))
    first = _times_poly(R12 - R10 * R02, [(xpp, xp)])
    second = _times_poly(dR, [(xp, x), (xpp, x)])
    return first.truncate(N) + second.truncate(N)


def w1_formal_residual(ctx: TauContext) -> Series:
    """d/dx' R(x, x') at x' = x minus Delta_x ln hatT."""
    ring = ctx.ring_with(["xi1", "xp"])
    R = ctx.kernel_hat(ring, "xi1", "xp")
    dR = R.diff("xp")
    target = ctx.ring_with(["xi1"]).with_order(dR.order)
    on_diag = dR.subs({"xp": Series.var(target, "xi1")}, target)
    W = insertion(ctx.hatT.log(), "xi1").series
    n = min(W.order, on_diag.order)
    return on_diag.truncate(n) - W.embed(target).truncate(n)


def _cycle_cofactor(n: int, sigma) -> tuple:
    """prod_{i<j}(x_i-x_j)^2 / prod_i (x_i - x_sigma(i)) as (sign, factor list)."""
    exps = {(i, j): 2 for i in range(n) for j in range(i + 1, n)}
    sign = 1
    for i in range(n):
        j = sigma[i]
        a, b = (i, j) if i < j else (j, i)
        if i > j:
            sign = -sign
        exps[(a, b)] -= 1
    factors = []
    for (a, b), e in exps.items():
        if e < 0:
            raise IdentityError("internal: negative exponent in cofactor")
        factors += [(f"xi{a + 1}", f"xi{b + 1}")] * e
    return sign, factors


def _one_cycles(n: int):
    """Permutations of range(n) that are a single n-cycle."""
    for perm in itertools.permutations(range(n)):
        seen, i, length = set(), 0, 0
        while i not in seen:
            seen.add(i)
            i = perm[i]
            length += 1
        if length == n:
            yield perm


def wn_determinantal_residual(ctx: TauContext, n: int) -> Series:
    """W_n against the sum over one-cycle permutations of prod K(xi_sigma(i), xi_i).

    Cleared form: Q Delta^n ln hatT + [n=2] - sum_sigma (-1)^sigma prod R(xi_sigma(i), xi_i) c_sigma,
    Q = prod_{i<j}(xi_i - xi_j)^2 and c_sigma = Q / prod_i (xi_sigma(i) - xi_i) up to the
    orientation sign.  For n = 1 the W_1 limit formula is checked instead.
    """
    if n < 1:
        raise IdentityError("n >= 1 required")
    if n == 1:
        return w1_formal_residual(ctx)
    names = [f"xi{i}" for i in range(1, n + 1)]
    W = correlator(ctx.hatT, n, counterterms=False).series
    Qf = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)] * 2
    lhs = _times_poly(W, Qf)
    N = lhs.order
    ring = ctx.ring_with(names)
    if n == 2:
        lhs = lhs + Series.const(lhs.ring, 1)
    rhs = Series(ring.with_order(ctx.order + n * (n - 2)))
    for sigma in _one_cycles(n):
        sgn = _perm_sign(sigma)
        term = Series.const(ring, sgn)
        for i in range(n):
            term = term * ctx.kernel_hat(ring, names[sigma[i]], names[i])
        # K(xi_s(i), xi_i) has 1/(xi_i - xi_s(i)); Q / prod_i (xi_i - xi_s(i)):
        csign, cf = _cycle_cofactor(n, sigma)
        rhs = rhs + _times_poly(term, cf, csign)
    m = min(N, rhs.order)
    return lhs.truncate(m) - rhs.truncate(m)


def wn_numeric(ctx, points: Sequence) -> complex:
    """Sum over one-cycles of (-1)^sigma prod K(x_sigma(i), x_i) for a numeric backend."""
    n = len(points)
    total = 0
    for sigma in _one_cycles(n):
        term = _perm_sign(sigma)
        for i in range(n):
            term = term * kernel(ctx, points[sigma[i]], points[i])
        total += term
    return total


def insertion_numeric(ctx, D: Divisor, xi, h: float = 1e-4, alpha: float = 1e-4):
    """Delta_xi T(t+[D])/T by the alpha-shift limit: d/dxi of the alpha-linear part of
    ratio(D + alpha X) - ratio(D) ratio(alpha X), X = [xi] - [xi0], with central
    differences in alpha and xi.  The second term is Delta acting on T(t)."""
    xi0 = xi + 0.37 + 0.21j
    base = ctx.tau_ratio(D)

    def lin(x):
        def shifted(a):
            X = Divisor((x, xi0), (a, -a))
            return ctx.tau_ratio(D.concat(X)) - base * ctx.tau_ratio(X)
        return (shifted(alpha) - shifted(-alpha)) / (2 * alpha)

    return (lin(xi + h) - lin(xi - h)) / (2 * h)


def reproducing_residual(ctx, x=None, xp=None, xpp=None, **kw):
    """Delta_x K(x', x'') + K(x', x) K(x, x'').

    Formal for a TauContext (returns a Series), numeric otherwise.  Numeric
    backends may provide ``insertion_ratio(D, xi)``; otherwise the alpha-shift
    finite difference is used.
    """
    if isinstance(ctx, TauContext):
        return reproducing_formal(ctx, **kw)
    if len({x, xp, xpp}) < 3:
        raise DivisorError("reproducing kernel needs three distinct points")
    D = Divisor.of([(xpp, 1), (xp, -1)])
    if hasattr(ctx, "insertion_ratio"):
        dK = ctx.insertion_ratio(D, x)
    else:
        dK = insertion_numeric(ctx, D, x)
    return dK + kernel(ctx, xp, x) * kernel(ctx, x, xpp)
