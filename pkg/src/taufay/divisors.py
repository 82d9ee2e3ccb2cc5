"""Weighted point sets: degree, classification, Sato vectors, screening,
genus-0 prime-form weights and the Pauli phase of a reordering.

Points and weights are kept in the order given; every sign-sensitive
quantity refers to that order.  Exact inputs (int, Fraction) give exact
outputs wherever the weights are integers.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .formal_core import Number, TimesVector


class DivisorError(ValueError):
    pass


def _as_int(x) -> int | None:
    """Integer value of x if x is an integer (possibly complex with 0 imag)."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else None
    if isinstance(x, complex):
        if x.imag != 0:
            return None
        x = x.real
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return None


@dataclass(frozen=True)
class Divisor:
    points: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise DivisorError("points/weights length mismatch")
        for i in range(len(self.points)):
            for j in range(i):
                if self.points[i] == self.points[j]:
                    raise DivisorError(f"coincident points at positions {j} and {i}: {self.points[i]}")

    @classmethod
    def of(cls, pairs: Sequence) -> "Divisor":
        pairs = list(pairs)
        return cls(tuple(p for p, _ in pairs), tuple(a for _, a in pairs))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.weights))

    def degree(self) -> Number:
        return sum(self.weights, 0)

    def support(self) -> tuple:
        return tuple(p for p, a in self if a != 0)

    def classify(self) -> dict:
        ws = self.weights
        ints = [_as_int(a) for a in ws]
        integer = all(i is not None for i in ints)
        unitary = integer and all(i in (1, -1) for i in ints)
        neutral = self.degree() == 0
        return {
            "neutral": neutral,
            "integer": integer,
            "unitary": unitary,
            "positive": integer and all(i > 0 for i in ints),
            "negative": integer and all(i < 0 for i in ints),
            "supersymmetric": unitary and neutral,
        }

    def scale(self, c: Number) -> "Divisor":
        return Divisor(self.points, tuple(c * a for a in self.weights))

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other: "Divisor") -> "Divisor":
        pts, wts = list(self.points), list(self.weights)
        for p, a in other:
            if p in pts:
                wts[pts.index(p)] += a
            else:
                pts.append(p)
                wts.append(a)
        return Divisor(tuple(pts), tuple(wts))

    def concat(self, other: "Divisor") -> "Divisor":
        """Ordered union; coincident points are an error."""
        return Divisor(self.points + other.points, self.weights + other.weights)

    def permute(self, sigma: Sequence[int]) -> "Divisor":
        """Point i moves to position sigma[i]."""
        n = len(self)
        if sorted(sigma) != list(range(n)):
            raise DivisorError("not a permutation")
        pts, wts = [None] * n, [None] * n
        for i, s in enumerate(sigma):
            pts[s], wts[s] = self.points[i], self.weights[i]
        return Divisor(tuple(pts), tuple(wts))

    def drop_zero_weights(self) -> "Divisor":
        return Divisor.of((p, a) for p, a in self if a != 0)

    # -- serialization ---------------------------------------------------
    def to_records(self) -> list:
        out = []
        for p, a in self:
            p, a = complex(p), complex(a)
            out.append({"re": p.real, "im": p.imag, "alpha_re": a.real, "alpha_im": a.imag})
        return out

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "Divisor":
        pairs = []
        for r in records:
            z = _simplify(complex(r["re"], r.get("im", 0.0)))
            a = _simplify(complex(r.get("alpha_re", 0.0), r.get("alpha_im", 0.0)))
            pairs.append((z, a))
        return cls.of(pairs)

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_json(cls, text: str) -> "Divisor":
        return cls.from_records(json.loads(text))


def _simplify(z: complex):
    """Real integers come back as int, real numbers as float."""
    if z.imag == 0:
        r = z.real
        return int(r) if r.is_integer() else r
    return z


def sato_vector(D: Divisor, k_max: int) -> TimesVector:
    """D_k = sum_i alpha_i z_i^k for 1 <= k <= k_max."""
    if k_max < 1:
        raise DivisorError("k_max >= 1 required")
    return {k: sum((a * p ** k for p, a in D), 0) for k in range(1, k_max + 1)}


def screen(D: Divisor) -> Divisor:
    """Append the origin with weight -deg D (the screening charge)."""
    if 0 in D.support():
        raise DivisorError("origin already in the support")
    D = D.drop_zero_weights()
    if D.degree() == 0:
        return D
    return D.concat(Divisor((0,), (-D.degree(),)))


def power(base: Number, e: Number):
    """base**e, exact for integer e, principal branch otherwise (cut on the negative axis)."""
    n = _as_int(e)
    if n is not None:
        if n < 0 and isinstance(base, int):
            return Fraction(1, base ** (-n))
        return base ** n
    return cmath.exp(e * cmath.log(base))


def prime_weight(D: Divisor, E: Callable | None = None) -> Number:
    """prod_{i<j} E(z_i, z_j)^(alpha_i alpha_j); genus 0: E = z_i - z_j."""
    E = E or (lambda a, b: a - b)
    out: Number = 1
    pts, ws = D.points, D.weights
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            e = ws[i] * ws[j]
            if e == 0:
                continue
            d = E(pts[i], pts[j])
            if d == 0:
                raise DivisorError("coincident points in prime weight")
            out = out * power(d, e)
    return out


def permutation_sign(D: Divisor, sigma: Sequence[int]) -> Number:
    """exp(i pi sum_{i<j, sigma(i)>sigma(j)} alpha_i alpha_j)."""
    s = 0
    ws = D.weights
    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            if sigma[i] > sigma[j]:
                s += ws[i] * ws[j]
    n = _as_int(s)
    if n is not None:
        return -1 if n % 2 else 1
    return cmath.exp(1j * cmath.pi * s)


def interleaved(zs: Sequence, ws: Sequence) -> Divisor:
    """[z1] - [w1] + [z2] - [w2] + ... in that order."""
    if len(zs) != len(ws):
        raise DivisorError("need as many positive as negative points")
    pairs = []
    for z, w in zip(zs, ws):
        pairs += [(z, 1), (w, -1)]
    return Divisor.of(pairs)


def split_supersymmetric(D: Divisor) -> tuple:
    """Positive points (in order) and negative points (in order) of a supersymmetric divisor."""
    if not D.classify()["supersymmetric"]:
        raise DivisorError("divisor is not supersymmetric")
    zs = tuple(p for p, a in D if _as_int(a) == 1)
    ws = tuple(p for p, a in D if _as_int(a) == -1)
    return zs, ws
