"""Hermitian one-matrix model at small N through eigenvalue moments.

The matrix integral is reduced to N! det(m_{i+j}) (Heine); the Sato shift
t -> t+[D] becomes the weight factor prod_i (x - z_i)^(-alpha_i).  All
integrals are one-dimensional and done by adaptive quadrature on a
truncated real interval, with a Gauss-Legendre rule as an independent
cross-check.

The unitary-group volume between dM and the eigenvalue measure is not
tracked; every identity checked here is a ratio in which it cancels.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate, special

from .divisors import Divisor, DivisorError, prime_weight
from .formal_core import Series, times_ring


class MatrixModelError(ValueError):
    pass


@dataclass(frozen=True)
class QuadConfig:
    epsabs: float = 1e-13
    epsrel: float = 1e-14
    limit: int = 400
    cutoff: float = 1e-18      # |weight| below this is treated as 0
    gl_nodes: int = 600        # Gauss-Legendre cross-check


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = sum_k t_k x^k / k; ``times`` maps k -> t_k."""
    times: Mapping

    def __post_init__(self):
        ts = {int(k): v for k, v in dict(self.times).items() if v != 0}
        object.__setattr__(self, "times", ts)
        if not ts:
            raise MatrixModelError("empty potential is not integrable")
        d = max(ts)
        lead = complex(ts[d])
        if d % 2 or lead.imag != 0 or lead.real <= 0:
            raise MatrixModelError(f"e^-V not integrable on R: leading term t_{d} = {ts[d]}")

    @classmethod
    def gaussian(cls) -> "PotentialSpec":
        return cls({2: 1})

    @property
    def degree(self) -> int:
        return max(self.times)

    @property
    def is_real(self) -> bool:
        return all(complex(v).imag == 0 for v in self.times.values())

    @property
    def is_even(self) -> bool:
        return all(k % 2 == 0 for k in self.times)

    def __call__(self, x):
        x = np.asarray(x)
        out = np.zeros_like(x, dtype=complex if not self.is_real else float)
        for k, t in self.times.items():
            out = out + (t / k) * x ** k
        return out

    def to_json(self) -> list:
        return [{"k": k, "re": complex(t).real, "im": complex(t).imag} for k, t in sorted(self.times.items())]

    @classmethod
    def from_json(cls, data: Sequence) -> "PotentialSpec":
        ts = {}
        for r in data:
            v = complex(r["re"], r.get("im", 0.0))
            ts[int(r["k"])] = v.real if v.imag == 0 else v
        return cls(ts)


def _cutoff(V: PotentialSpec, j_max: int, tol: float) -> float:
    """L such that |x|^j e^{-Re V(x)} < tol for |x| > L and j <= j_max."""
    def f(x):
        return j_max * math.log(max(x, 1.0)) - float(np.real(V(np.array([x]))[0])) - math.log(tol)

    def g(x):
        return j_max * math.log(max(x, 1.0)) - float(np.real(V(np.array([-x]))[0])) - math.log(tol)

    L = 1.0
    while f(L) > 0 or g(L) > 0:
        L *= 1.25
        if L > 1e4:
            raise MatrixModelError("could not bound the integration domain")
    return L


def _quad_complex(f: Callable, a: float, b: float, cfg: QuadConfig, points=None) -> tuple:
    kw = dict(epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
    if points:
        kw["points"] = points
    re, e1, info1 = integrate.quad(lambda x: f(x).real, a, b, full_output=1, **kw)[:3]
    im, e2, info2 = integrate.quad(lambda x: f(x).imag, a, b, full_output=1, **kw)[:3]
    neval = info1["neval"] + info2["neval"]
    return complex(re, im), math.hypot(e1, e2), neval


def _insertion_factor(x, D: Divisor | None):
    if D is None or len(D) == 0:
        return 1.0
    out = 1.0 + 0j
    for z, a in D:
        out = out * (x - z) ** (-int(a))
    return out


def _check_insertions(D: Divisor | None):
    if D is None:
        return
    for z, a in D:
        ai = complex(a)
        if ai.imag != 0 or ai.real != int(ai.real):
            raise DivisorError("matrix insertions need integer weights")
        if ai.real > 0 and complex(z).imag == 0:
            raise DivisorError(f"insertion point {z} with positive weight lies on the integration contour")


def moments(V: PotentialSpec, j_max: int, D: Divisor | None = None, cfg: QuadConfig = QuadConfig(),
            method: str = "quad") -> tuple:
    """m_j = int x^j e^{-V(x)} prod (x - z_i)^(-a_i) dx for 0 <= j <= j_max.

    Returns (moments array, metadata dict).  ``method`` is ``"quad"``
    (adaptive) or ``"gl"`` (fixed Gauss-Legendre on the same interval).
    """
    _check_insertions(D)
    extra = 0 if D is None else sum(max(0, -int(complex(a).real)) for _, a in D)
    L = _cutoff(V, j_max + extra, cfg.cutoff)
    brk = None
    if D is not None:
        brk = sorted({float(complex(z).real) for z, _ in D if -L < complex(z).real < L}) or None

    def w(x):
        return np.exp(-V(x)) * _insertion_factor(x, D)

    meta = {"method": method, "interval": [-L, L], "epsabs": cfg.epsabs, "epsrel": cfg.epsrel}
    if method == "gl":
        xs, ws = np.polynomial.legendre.leggauss(cfg.gl_nodes)
        xs, ws = xs * L, ws * L
        wx = w(xs) * ws
        out = np.array([np.sum(wx * xs ** j) for j in range(j_max + 1)], dtype=complex)
        meta["nodes"] = cfg.gl_nodes
        return out, meta
    out, nev, err = [], 0, 0.0
    for j in range(j_max + 1):
        val, e, n = _quad_complex(lambda x, j=j: x ** j * w(x), -L, L, cfg, brk)
        out.append(val)
        nev += n
        err = max(err, e)
    meta.update(neval=nev, max_error_estimate=err)
    return np.array(out, dtype=complex), meta


def gaussian_moment(j: int) -> float:
    """Closed form of int x^j e^{-x^2/2} dx."""
    if j % 2:
        return 0.0
    return float(special.factorial2(j - 1, exact=True) if j else 1) * math.sqrt(2 * math.pi)


def _det(M):
    return complex(np.linalg.det(np.asarray(M, dtype=complex))) if len(M) else 1.0


@dataclass(frozen=True)
class MatrixTauContext:
    N: int
    potential: PotentialSpec = field(default_factory=PotentialSpec.gaussian)
    cfg: QuadConfig = QuadConfig()

    backend = "matrix"
    tolerance = 1e-9

    @cached_property
    def _moments(self):
        m, meta = moments(self.potential, 2 * self.N + 8, None, self.cfg)
        return m, meta

    @property
    def moment_cache(self) -> np.ndarray:
        return self._moments[0]

    def hankel(self, n: int | None = None, D: Divisor | None = None) -> np.ndarray:
        n = self.N if n is None else n
        if D is None or len(D) == 0:
            m = self.moment_cache
        else:
            m, _ = moments(self.potential, 2 * n, D, self.cfg)
        return np.array([[m[i + j] for j in range(n)] for i in range(n)], dtype=complex)

    def tau_n(self, n: int | None = None) -> complex:
        n = self.N if n is None else n
        return math.factorial(n) * _det(self.hankel(n))

    def shifted_tau(self, D: Divisor, n: int | None = None) -> complex:
        """T_N(t+[D]) as N! det of the modified-weight moments."""
        n = self.N if n is None else n
        D = D.drop_zero_weights()
        return math.factorial(n) * _det(self.hankel(n, D))

    def expectation(self, D: Divisor, n: int | None = None) -> complex:
        """< prod det(M - z_i)^(-a_i) >_N."""
        return self.shifted_tau(D, n) / self.tau_n(n)

    def tau_ratio(self, D: Divisor) -> complex:
        """Full shifted ratio: prime weight in the x coordinate times the expectation."""
        if D.degree() != 0:
            raise DivisorError("tau ratios are defined for neutral divisors")
        return prime_weight(D) * self.expectation(D)

    # -- wavefunctions -----------------------------------------------------
    def psi(self, x, n: int | None = None) -> complex:
        """psi_n(x) = <det(x - M)>_n; the [infinity] screening only fixes the k=0 sector."""
        n = self.N if n is None else n
        if n == 0:
            return 1.0
        return (-1) ** n * self.expectation(Divisor((x,), (-1,)), n)

    def phi(self, x, n: int | None = None) -> complex:
        """phi_n(x) = <1/det(x - M)>_n for non-real x."""
        n = self.N if n is None else n
        if n == 0:
            return 1.0
        return (-1) ** n * self.expectation(Divisor((x,), (1,)), n)

    def monic_op(self, n: int) -> np.ndarray:
        """Coefficients (low to high) of the monic orthogonal polynomial p_n by Gram-Schmidt on moments."""
        m = self.moment_cache
        if n == 0:
            return np.array([1.0 + 0j])
        H = np.array([[m[i + j] for j in range(n)] for i in range(n)], dtype=complex)
        rhs = -np.array([m[i + n] for i in range(n)], dtype=complex)
        c = np.linalg.solve(H, rhs)
        return np.concatenate([c, [1.0]])

    def jump_density(self, x, s: int) -> complex:
        """(phi_s(x - i0) - phi_s(x + i0)) / (2 pi i) on the real axis.

        phi_s is s! det(C0 v v^T - R) / T_s with C0 the Cauchy transform of
        the weight, v_i = x^i and R_ij = sum_{k < i+j} x^{i+j-1-k} m_k; it is
        affine in C0, whose jump is 2 pi i w(x).
        """
        if s < 1:
            raise MatrixModelError("jump density needs s >= 1")
        m = self.moment_cache
        R = np.zeros((s, s), dtype=complex)
        for i in range(s):
            for j in range(s):
                R[i, j] = sum(x ** (i + j - 1 - k) * m[k] for k in range(i + j))
        v = np.array([x ** i for i in range(s)], dtype=complex)
        if s == 1:
            adj = np.array([[1.0]])
        else:
            adj = np.array([[(-1) ** (i + j) * _det(np.delete(np.delete(R, j, 0), i, 1)) for j in range(s)]
                            for i in range(s)])
        wx = complex(np.exp(-self.potential(np.array([x]))[0]))
        return (-1) ** (s + 1) * (v @ adj @ v) * wx / _det(self.hankel(s))

    def orthogonality_pairing(self, n: int, m: int) -> complex:
        """int psi_n(x) rho_{m+1}(x) dx, rho the jump density of phi."""
        p = self.monic_op(n)
        L = _cutoff(self.potential, 2 * max(n, m) + 2, self.cfg.cutoff)

        def f(x):
            return np.polyval(p[::-1], x) * self.jump_density(x, m + 1)

        val, _, _ = _quad_complex(f, -L, L, self.cfg)
        return val

    # -- eigenvalue-integral oracle ----------------------------------------
    def eigenvalue_integral(self, n: int | None = None, nodes: int = 160, D: Divisor | None = None) -> complex:
        """Direct tensor-product Gauss-Legendre integral of prod w(l_i) Vandermonde^2 (n <= 3)."""
        n = self.N if n is None else n
        if n > 3:
            raise MatrixModelError("eigenvalue quadrature limited to n <= 3")
        L = _cutoff(self.potential, 2 * n, self.cfg.cutoff)
        xs, ws = np.polynomial.legendre.leggauss(nodes)
        xs, ws = xs * L, ws * L
        wx = ws * np.exp(-self.potential(xs)) * _insertion_factor(xs, D)
        grids = np.meshgrid(*([xs] * n), indexing="ij")
        wgrid = np.ones_like(grids[0], dtype=complex)
        for g, idx in zip(grids, range(n)):
            shape = [1] * n
            shape[idx] = nodes
            wgrid = wgrid * wx.reshape(shape)
        vdm = np.ones_like(grids[0], dtype=float)
        for i in range(n):
            for j in range(i + 1, n):
                vdm = vdm * (grids[i] - grids[j]) ** 2
        return complex(np.sum(wgrid * vdm))

    # -- formal expansion ----------------------------------------------------
    def tau_series(self, order: int, nvars: int | None = None, moment_values=None) -> Series:
        """hatT_N(t) = N! det m_{i+j}(t) with m_j(t) = int x^j e^{-V0(x)} e^{+sum_k t_k x^k / k} dx.

        V0 is the context potential; the perturbation sign makes
        hatT(t+[xi]) carry the weight 1/(1 - xi x), i.e. a det^-1 insertion
        at x = 1/xi, matching the Sato-shift rule.
        """
        nvars = order if nvars is None else nvars
        ring = times_ring(nvars, order)
        need = 2 * self.N - 2 + order
        if moment_values is None:
            m, _ = moments(self.potential, need, None, self.cfg)
        else:
            m = np.asarray(moment_values, dtype=complex)
            if len(m) <= need:
                raise MatrixModelError(f"need moments up to {need}")
        mvals = [_clean(v) for v in m]
        # generic expansion of exp(sum t_k x^k / k) as polynomial in t with x-degree bookkeeping
        expo = {}
        for mult in _monomials(nvars, order):
            c = Fraction(1)
            xdeg = 0
            for k, e in enumerate(mult, start=1):
                c *= Fraction(1, k ** e * math.factorial(e))
                xdeg += k * e
            expo[mult] = (c, xdeg)
        entries = {}
        for s in range(2 * self.N - 1):
            terms = {}
            for mult, (c, xdeg) in expo.items():
                v = mvals[s + xdeg]
                if v != 0:
                    terms[mult] = c * v if isinstance(v, (int, Fraction)) else float(c) * v
            entries[s] = Series(ring, terms)
        N = self.N
        total = Series(ring)
        for perm in itertools.permutations(range(N)):
            sgn = _sign(perm)
            term = Series.const(ring, sgn * math.factorial(N))
            for i in range(N):
                term = term * entries[i + perm[i]]
            total = total + term
        return total


def _clean(v: complex):
    v = complex(v)
    return v.real if v.imag == 0 else v


def _sign(perm) -> int:
    s = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


def _monomials(nvars: int, order: int):
    def rec(k, rest):
        if k > nvars:
            yield ()
            return
        for e in range(rest // k + 1):
            for tail in rec(k + 1, rest - k * e):
                yield (e,) + tail

    yield from rec(1, order)


def gaussian_exact_moments(j_max: int, normalized: bool = True) -> list:
    """Gaussian moments as exact rationals, divided by sqrt(2 pi) when ``normalized``."""
    out = []
    for j in range(j_max + 1):
        if j % 2:
            out.append(0)
        else:
            out.append(special.factorial2(j - 1, exact=True) if j else 1)
    if not normalized:
        return [v * math.sqrt(2 * math.pi) for v in out]
    return out


def cauchy_gaussian(z: complex) -> complex:
    """int e^{-x^2/2} / (z - x) dx for Im z > 0, via the Faddeeva function."""
    z = complex(z)
    if z.imag > 0:
        return -1j * math.pi * special.wofz(z / math.sqrt(2))
    if z.imag < 0:
        return 1j * math.pi * special.wofz(-z / math.sqrt(2))
    raise MatrixModelError("Cauchy transform on the real axis")


def kernel_gaussian_n1(x: complex, xp: complex) -> complex:
    """K(x, x') = T_1(t+[x']-[x]) / T_1 for the N = 1 Gaussian model, from the Faddeeva oracle.

    <(l - x)/(l - x')> = 1 + (x' - x) <1/(l - x')> and the prime weight is 1/(x' - x).
    """
    avg = -cauchy_gaussian(xp) / math.sqrt(2 * math.pi)
    return 1.0 / (xp - x) + avg


def fay_matrix_residual(ctx: MatrixTauContext, zs: Sequence, ws: Sequence, relative: bool = True):
    """T(t+sum [z_i]-[w_i])/T - det T(t+[z_j]-[w_i])/T with prime weights in x (interleaved order)."""
    from .hirota_fay import fay_det_residual
    from .divisors import interleaved

    for z in zs:
        if complex(z).imag == 0:
            raise DivisorError("positive-weight insertion points must be non-real")
    return fay_det_residual(ctx, interleaved(zs, ws), relative=relative)
