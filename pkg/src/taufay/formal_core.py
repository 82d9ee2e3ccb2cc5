"""Truncated graded formal series, the insertion operator and correlators.

A :class:`Series` lives in a :class:`Ring`: an ordered tuple of variable
names with integer weights, a truncation order on the weighted degree and
optional per-variable exponent caps.  Times ``t1, t2, ...`` carry weight
``k``; local variables such as ``xi`` carry weight 1 and may appear with
negative exponents (Laurent variables).  Coefficients are plain Python
numbers, so integer/Fraction inputs stay exact and anything touching a
float or complex value degrades to floating point.

The truncation order of a ring is the largest weighted degree that is
*valid*.  Operations that lose accuracy (derivatives, insertion) return a
series in a ring of lower order, so the order always tells how far the
coefficients can be trusted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction, float, complex]
TimesVector = dict  # index k >= 1 -> value t_k; absent indices read as 0


class SeriesError(ValueError):
    pass


def _is_zero(c) -> bool:
    return c == 0


@dataclass(frozen=True)
class Ring:
    names: tuple
    weights: tuple
    order: int
    caps: tuple | None = None

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise SeriesError("names/weights length mismatch")
        if len(set(self.names)) != len(self.names):
            raise SeriesError(f"duplicate variable names {self.names}")
        if self.caps is not None and len(self.caps) != len(self.names):
            raise SeriesError("caps length mismatch")
        if self.caps is not None and all(c is None for c in self.caps):
            object.__setattr__(self, "caps", None)

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SeriesError(f"variable {name!r} not in ring {self.names}") from None

    def degree(self, key) -> int:
        return sum(w * e for w, e in zip(self.weights, key))

    def admits(self, key) -> bool:
        if self.degree(key) > self.order:
            return False
        if self.caps is not None:
            for e, c in zip(key, self.caps):
                if c is not None and e > c:
                    return False
        return True

    def with_order(self, order: int) -> "Ring":
        return Ring(self.names, self.weights, order, self.caps)

    def extend(self, names: Iterable[str], weights: Iterable[int], caps=None) -> "Ring":
        names, weights = tuple(names), tuple(weights)
        if caps is None and self.caps is None:
            new_caps = None
        else:
            own = self.caps if self.caps is not None else (None,) * self.nvars
            extra = tuple(caps) if caps is not None else (None,) * len(names)
            new_caps = own + extra
        return Ring(self.names + names, self.weights + weights, self.order, new_caps)

    def drop(self, name: str) -> "Ring":
        i = self.index(name)
        caps = None if self.caps is None else self.caps[:i] + self.caps[i + 1:]
        return Ring(self.names[:i] + self.names[i + 1:],
                    self.weights[:i] + self.weights[i + 1:], self.order, caps)

    def zero_key(self) -> tuple:
        return (0,) * self.nvars


def times_ring(n: int, order: int | None = None, extra: Iterable = ()) -> Ring:
    """Ring of times t1..tn (weight k), optionally followed by extra (name, weight) pairs."""
    names = tuple(f"t{k}" for k in range(1, n + 1))
    weights = tuple(range(1, n + 1))
    extra = list(extra)
    if extra:
        names += tuple(e[0] for e in extra)
        weights += tuple(e[1] for e in extra)
    return Ring(names, weights, n if order is None else order)


class Series:
    """Sparse truncated series; immutable by convention."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping | None = None, _trusted=False):
        self.ring = ring
        if _trusted:
            self.terms = dict(terms) if terms else {}
            return
        out = {}
        if terms:
            for k, c in terms.items():
                k = tuple(k)
                if len(k) != ring.nvars:
                    raise SeriesError("exponent length mismatch")
                if _is_zero(c) or not ring.admits(k):
                    continue
                out[k] = out.get(k, 0) + c
        self.terms = {k: c for k, c in out.items() if not _is_zero(c)}

    # -- construction -------------------------------------------------
    @classmethod
    def const(cls, ring: Ring, c: Number = 1) -> "Series":
        return cls(ring, {ring.zero_key(): c})

    @classmethod
    def var(cls, ring: Ring, name: str, power: int = 1, coeff: Number = 1) -> "Series":
        key = [0] * ring.nvars
        key[ring.index(name)] = power
        return cls(ring, {tuple(key): coeff})

    @classmethod
    def monomial(cls, ring: Ring, exps: Mapping[str, int], coeff: Number = 1) -> "Series":
        key = [0] * ring.nvars
        for n, e in exps.items():
            key[ring.index(n)] = e
        return cls(ring, {tuple(key): coeff})

    # -- inspection ---------------------------------------------------
    @property
    def order(self) -> int:
        return self.ring.order

    def constant_term(self):
        return self.terms.get(self.ring.zero_key(), 0)

    def coefficient(self, exps: Mapping[str, int]):
        key = [0] * self.ring.nvars
        for n, e in exps.items():
            key[self.ring.index(n)] = e
        return self.terms.get(tuple(key), 0)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"Series(0; order={self.order})"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kv: (self.ring.degree(kv[0]), kv[0])):
            mon = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(self.ring.names, k) if e)
            parts.append(f"{c}" + (f"*{mon}" if mon else ""))
        return " + ".join(parts) + f"  [order {self.order}]"

    # -- ring checks --------------------------------------------------
    def _check(self, other: "Series"):
        if self.ring != other.ring:
            if self.ring.names == other.ring.names and self.ring.order != other.ring.order:
                raise SeriesError(f"truncation mismatch: {self.ring.order} vs {other.ring.order}")
            raise SeriesError("series live in different rings")

    def _coerce(self, other):
        if isinstance(other, Series):
            self._check(other)
            return other
        return Series.const(self.ring, other)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if _is_zero(v):
                out.pop(k, None)
            else:
                out[k] = v
        return Series(self.ring, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.ring, {k: -c for k, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c: Number) -> "Series":
        if _is_zero(c):
            return Series(self.ring)
        return Series(self.ring, {k: v * c for k, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        self._check(other)
        return _mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        if isinstance(other, int):
            other = Fraction(other)
        return self.scale(1 / other)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = Series.const(self.ring, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _split_constant(self):
        z = self.ring.zero_key()
        c0 = self.terms.get(z, 0)
        rest = Series(self.ring, {k: c for k, c in self.terms.items() if k != z}, _trusted=True)
        return c0, rest

    def _nilpotent_powers(self, g: "Series"):
        """Yield g, g^2, ... until the product vanishes under truncation/caps."""
        for k, _ in g.terms.items():
            if self.ring.degree(k) <= 0 and not self._capped(k):
                raise SeriesError("power series of a term with non-positive degree does not terminate")
        p = g
        n = 1
        while p.terms:
            yield n, p
            p = p * g
            n += 1

    def _capped(self, key) -> bool:
        if self.ring.caps is None:
            return False
        return any(c is not None and e > 0 for e, c in zip(key, self.ring.caps))

    def exp(self) -> "Series":
        c0, g = self._split_constant()
        if _is_zero(c0):
            e0 = 1
        elif isinstance(c0, complex):
            e0 = cmath.exp(c0)
        else:
            e0 = math.exp(c0)
        out = Series.const(self.ring, 1)
        fact = 1
        for n, p in self._nilpotent_powers(g):
            fact *= n
            out = out + p.scale(Fraction(1, fact))
        return out.scale(e0)

    def log(self) -> "Series":
        c0, g = self._split_constant()
        if _is_zero(c0):
            raise SeriesError("logarithm of a series with zero constant term")
        h = g / c0 if not isinstance(c0, int) else g.scale(Fraction(1, c0))
        if c0 == 1:
            l0 = 0
        elif isinstance(c0, complex) or (isinstance(c0, (int, float, Fraction)) and c0 < 0):
            l0 = cmath.log(complex(c0))
        else:
            l0 = math.log(c0)
        out = Series.const(self.ring, l0) if not _is_zero(l0) else Series(self.ring)
        for n, p in self._nilpotent_powers(h):
            out = out + p.scale(Fraction((-1) ** (n + 1), n))
        return out

    def inverse(self) -> "Series":
        c0, g = self._split_constant()
        if _is_zero(c0):
            raise SeriesError("inverse of a series with zero constant term")
        inv0 = Fraction(1, c0) if isinstance(c0, int) else 1 / c0
        h = g.scale(inv0)
        out = Series.const(self.ring, 1)
        for n, p in self._nilpotent_powers(h):
            out = out + p.scale((-1) ** n)
        return out.scale(inv0)

    # -- calculus -----------------------------------------------------
    def diff(self, name: str, n: int = 1) -> "Series":
        """n-th partial derivative; the valid order drops by n*weight."""
        i = self.ring.index(name)
        w = self.ring.weights[i]
        ring = self.ring.with_order(self.ring.order - n * max(w, 0))
        out = {}
        for k, c in self.terms.items():
            e = k[i]
            f = 1
            for j in range(n):
                f *= e - j
            if f == 0:
                continue
            kk = list(k)
            kk[i] = e - n
            out[tuple(kk)] = c * f
        return Series(ring, out)

    def mul_monomial(self, exps: Mapping[str, int], coeff: Number = 1) -> "Series":
        """Multiply by coeff * prod name^e; the valid order shifts by the monomial degree."""
        ring = self.ring
        shift = [0] * ring.nvars
        for n, e in exps.items():
            shift[ring.index(n)] = e
        ring = ring.with_order(ring.order + ring.degree(shift))
        out = {}
        for k, c in self.terms.items():
            out[tuple(a + b for a, b in zip(k, shift))] = c * coeff
        return Series(ring, out)

    # -- ring changes -------------------------------------------------
    def truncate(self, order: int) -> "Series":
        if order > self.ring.order:
            raise SeriesError("cannot raise the truncation order by truncating")
        return Series(self.ring.with_order(order), self.terms)

    def embed(self, ring: Ring) -> "Series":
        """Re-express in a ring containing all variables that occur here.

        Raising the order is allowed (no new terms appear); callers take
        responsibility for what that means for validity.
        """
        idx = [ring.index(n) for n in self.ring.names]
        out = {}
        for k, c in self.terms.items():
            if not any(k):
                key = ring.zero_key()
            else:
                key = [0] * ring.nvars
                for j, e in zip(idx, k):
                    key[j] = e
                key = tuple(key)
            out[key] = c
        return Series(ring, out)

    def coeff(self, name: str, power: int) -> "Series":
        """Coefficient of name^power, as a series in the ring without name."""
        i = self.ring.index(name)
        w = self.ring.weights[i]
        ring = self.ring.drop(name).with_order(self.ring.order - w * power)
        out = {}
        for k, c in self.terms.items():
            if k[i] == power:
                out[k[:i] + k[i + 1:]] = c
        return Series(ring, out)

    def evaluate(self, values: Mapping[str, Number]):
        """Substitute numbers for some variables; returns a number if none remain."""
        ring = self.ring
        idx = {ring.index(n): v for n, v in values.items()}
        keep = [j for j in range(ring.nvars) if j not in idx]
        new_ring = Ring(tuple(ring.names[j] for j in keep), tuple(ring.weights[j] for j in keep),
                        ring.order, None if ring.caps is None else tuple(ring.caps[j] for j in keep))
        out = {}
        for k, c in self.terms.items():
            v = c
            for j, x in idx.items():
                if k[j]:
                    v = v * x ** k[j]
            kk = tuple(k[j] for j in keep)
            out[kk] = out.get(kk, 0) + v
        if not keep:
            return out.get((), 0)
        return Series(new_ring, out)

    def subs(self, mapping: Mapping[str, "Series | Number"], ring: Ring) -> "Series":
        """Compose: replace variables by series of the target ring.

        Variables absent from ``mapping`` are sent to the same-named
        variable of ``ring``.
        """
        images = []
        for n in self.ring.names:
            if n in mapping:
                v = mapping[n]
                images.append(v if isinstance(v, Series) else Series.const(ring, v))
            else:
                images.append(Series.var(ring, n))
        for im in images:
            if im.ring != ring:
                raise SeriesError("substitution images must live in the target ring")
        cache: list[dict] = [dict() for _ in images]

        def power(j, e):
            d = cache[j]
            if e not in d:
                if e == 0:
                    d[e] = Series.const(ring, 1)
                elif e == -1:
                    d[e] = images[j].inverse()
                elif e < 0:
                    d[e] = power(j, e + 1) * power(j, -1)
                else:
                    d[e] = power(j, e - 1) * images[j]
            return d[e]

        acc: dict = {}
        for k, c in self.terms.items():
            term = None
            for j, e in enumerate(k):
                if e:
                    p = power(j, e)
                    term = p if term is None else term * p
            if term is None:
                z = ring.zero_key()
                acc[z] = acc.get(z, 0) + c
                continue
            for kk, cc in term.terms.items():
                acc[kk] = acc.get(kk, 0) + c * cc
        return Series(ring, acc)

    def equals(self, other: "Series", tol: float = 0.0) -> bool:
        return (self - other).max_abs() <= tol


GradedSeries = Series  # a Series whose ring is times_ring(N)


def _mul(a: Series, b: Series) -> Series:
    ring = a.ring
    order = ring.order
    w = ring.weights
    if len(a.terms) > len(b.terms):
        a, b = b, a
    bl = sorted(((sum(x * y for x, y in zip(w, k)), k, c) for k, c in b.terms.items()),
                key=lambda t: t[0])
    caps = ring.caps
    out: dict = {}
    for ka, ca in a.terms.items():
        lim = order - sum(x * y for x, y in zip(w, ka))
        for db, kb, cb in bl:
            if db > lim:
                break
            k = tuple(x + y for x, y in zip(ka, kb))
            if caps is not None and any(c is not None and e > c for e, c in zip(k, caps)):
                continue
            out[k] = out.get(k, 0) + ca * cb
    return Series(ring, {k: c for k, c in out.items() if not _is_zero(c)}, _trusted=True)


def align(*series: Series) -> list:
    """Truncate all series to their common (minimal) order."""
    n = min(s.order for s in series)
    return [s if s.order == n else s.truncate(n) for s in series]


def times_in(ring: Ring) -> list:
    """Indices k for which t_k is a variable of the ring."""
    out = []
    for n in ring.names:
        if n.startswith("t") and n[1:].isdigit():
            out.append(int(n[1:]))
    return sorted(out)


# -- Laurent objects ------------------------------------------------------

@dataclass(frozen=True)
class LaurentSeries:
    """A series in a ring that contains local (Laurent) variables.

    ``differentials`` lists the local variables carrying an attached dxi.
    Coefficients of a fixed power are ordinary series in the remaining ring.
    """
    series: Series
    variables: tuple
    differentials: frozenset = frozenset()

    def coefficients(self, var: str) -> dict:
        i = self.series.ring.index(var)
        powers = sorted({k[i] for k in self.series.terms})
        return {p: self.series.coeff(var, p) for p in powers}

    def min_power(self, var: str) -> int:
        i = self.series.ring.index(var)
        return min((k[i] for k in self.series.terms), default=0)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.variables != other.variables or self.differentials != other.differentials:
            raise SeriesError("Laurent objects of different shape")
        a, b = align(self.series, other.series)
        return LaurentSeries(a + b, self.variables, self.differentials)


def residue(L: LaurentSeries, var: str | None = None):
    """Coefficient of var^-1 of a differential-carrying Laurent object."""
    var = var or L.variables[0]
    if var not in L.differentials:
        raise SeriesError(f"residue of a non-differential object in {var}")
    s = L.series
    i = s.ring.index(var)
    w = s.ring.weights[i]
    out = {}
    for k, c in s.terms.items():
        if k[i] == -1:
            out[k[:i] + k[i + 1:]] = c
    ring = s.ring.drop(var).with_order(s.ring.order + w)
    res = Series(ring, out)
    rest = tuple(v for v in L.variables if v != var)
    if rest:
        return LaurentSeries(res, rest, L.differentials - {var})
    return res


def geometric_factor(ring: Ring, z: str, xi: str, n: int = 0, terms: int | None = None) -> Series:
    """Expansion of (1 - z/xi)^(-n-1) in the region |z| < |xi|, up to z-degree ``terms``."""
    terms = ring.order if terms is None else terms
    out = {}
    iz, ix = ring.index(z), ring.index(xi)
    for m in range(terms + 1):
        key = [0] * ring.nvars
        key[iz], key[ix] = m, -m
        out[tuple(key)] = math.comb(m + n, n)
    return Series(ring, out)


def binomial_factor(ring: Ring, z: str, xi: str, a: Number, terms: int | None = None) -> Series:
    """Expansion of (1 - z/xi)^a for arbitrary exponent a, up to z-degree ``terms``."""
    terms = ring.order if terms is None else terms
    out = {}
    iz, ix = ring.index(z), ring.index(xi)
    c = Fraction(1) if not isinstance(a, (float, complex)) else 1.0
    for m in range(terms + 1):
        key = [0] * ring.nvars
        key[iz], key[ix] = m, -m
        out[tuple(key)] = c * (-1) ** m
        c = c * (a - m) / (m + 1)
    return Series(ring, out)


def sato_shift(f: Series, alpha: Number = 1, sign: int = 1, var: str = "xi") -> LaurentSeries:
    """f(t + sign*alpha*[xi]) with xi of weight 1; non-negative powers of xi only."""
    ks = times_in(f.ring)
    ring = f.ring.extend((var,), (1,))
    xi = Series.var(ring, var)
    mapping = {f"t{k}": Series.var(ring, f"t{k}") + (xi ** k).scale(sign * alpha) for k in ks}
    return LaurentSeries(f.subs(mapping, ring), (var,))


def taylor_shift(f: Series, alpha: Number = 1, var: str = "xi") -> LaurentSeries:
    """Same as sato_shift(+) but through the exponential of sum_k xi^k d/dt_k."""
    ks = times_in(f.ring)
    ring = f.ring.extend((var,), (1,))
    g = f.embed(ring)
    total = g
    term = g
    j = 1
    while True:
        nxt = Series(ring)
        for k in ks:
            nxt = nxt + term.diff(f"t{k}").mul_monomial({var: k}, alpha)
        term = nxt.scale(Fraction(1, j))
        if not term.terms:
            break
        total = total + term
        j += 1
    return LaurentSeries(total, (var,))


def insertion(f: Series | LaurentSeries, var: str = "xi") -> LaurentSeries:
    """Delta_var f = dvar * sum_k k var^(k-1) d f / d t_k."""
    if isinstance(f, LaurentSeries):
        base, variables, diffs = f.series, f.variables, f.differentials
    else:
        base, variables, diffs = f, (), frozenset()
    big = base.ring.extend((var,), (1,))
    g = base.embed(big)
    out: dict = {}
    for k in times_in(base.ring):
        for key, c in g.diff(f"t{k}").terms.items():
            kk = key[:-1] + (key[-1] + k - 1,)
            out[kk] = out.get(kk, 0) + k * c
    return LaurentSeries(Series(big.with_order(base.order - 1), out),
                         variables + (var,), diffs | {var})


def insertion_via_shift(f: Series, var: str = "xi") -> LaurentSeries:
    """Delta via the alpha-shift limit: d/dxi of the alpha-linear part of f(t + alpha([xi] - [v]))."""
    ks = times_in(f.ring)
    ring = f.ring.extend((var, "_v", "_a"), (1, 1, 0), caps=(None, None, 1))
    xi, v, a = (Series.var(ring, n) for n in (var, "_v", "_a"))
    mapping = {f"t{k}": Series.var(ring, f"t{k}") + a * (xi ** k - v ** k) for k in ks}
    shifted = f.subs(mapping, ring)
    lin = shifted.coeff("_a", 1)
    d = lin.diff(var)
    d = d.evaluate({"_v": 0}) if isinstance(d, Series) else d
    return LaurentSeries(d, (var,), frozenset({var}))


def potential_form(ring: Ring, var: str, sign: int = -1) -> Series:
    """sign * dV_t(var) = -sign * sum_k t_k var^(-k-1) (dvar implied); sign=-1 gives -dV."""
    ks = times_in(ring)
    out = Series(ring)
    for k in ks:
        out = out + Series.monomial(ring, {f"t{k}": 1, var: -k - 1}, -sign)
    return out


def double_pole(ring: Ring, v1: str, v2: str, terms: int | None = None) -> Series:
    """1/(v1 - v2)^2 expanded in |v2| < |v1|: sum_m m v2^(m-1) v1^(-m-1), m <= terms."""
    terms = ring.order + 1 if terms is None else terms
    out = {}
    i1, i2 = ring.index(v1), ring.index(v2)
    for m in range(1, terms + 1):
        key = [0] * ring.nvars
        key[i1], key[i2] = -m - 1, m - 1
        out[tuple(key)] = m
    return Series(ring, out)


def correlator(T: Series, n: int, counterterms: bool = True) -> LaurentSeries:
    """W_n in variables xi1..xin.

    With counterterms: W_1 = Delta ln T - dV, W_2 adds the double-pole
    expansion (window: powers of xi2 up to the truncation order).
    """
    if n < 1:
        raise SeriesError("n >= 1 required")
    W: Series | LaurentSeries = T.log()
    for i in range(1, n + 1):
        W = insertion(W, f"xi{i}")
    if counterterms and n == 1:
        ring = W.series.ring
        W = LaurentSeries(W.series + potential_form(ring, "xi1", -1), W.variables, W.differentials)
    elif counterterms and n == 2:
        ring = W.series.ring
        N = max(times_in(ring), default=0)
        W = LaurentSeries(W.series + double_pole(ring, "xi1", "xi2", N), W.variables, W.differentials)
    return W


def miwa_jimbo(W: LaurentSeries, ks: Iterable[int]) -> Series:
    """prod(1/k_i) Res ... Res prod xi_i^(-k_i) W_n."""
    ks = list(ks)
    s = W.series
    exps = {f"xi{i + 1}": -k for i, k in enumerate(ks)}
    coeff = Fraction(1)
    for k in ks:
        coeff /= k
    L = LaurentSeries(s.mul_monomial(exps, coeff), W.variables, W.differentials)
    out = L
    for i in range(len(ks)):
        out = residue(out, f"xi{i + 1}")
    return out
