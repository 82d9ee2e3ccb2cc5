"""The Airy spectral curve x = z^2, y = 2 z^2 dz and its Sato-shift family.

For D = sum a'_i [z_i] the shifted curve S + uD is
    x_u(z) = z^2 + u C_u,
    y_u(z) = (z + (u/2) sum a'_i / (zeta_i (z - zeta_i))) 2z dz,
with zeta_i = zeta_u(z_i) and C_u solving
    zeta_i^2 = z_i^2 - u C_u,   C_u = sum a'_i / zeta_i,   zeta_i -> z_i as u -> 0.
The solve continues from u = 0 along the ray [0, u] (Newton at each step).
Times at infinity use the local coordinate xi = x_u^(-1/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .divisors import Divisor, DivisorError
from .riemann_geometry import TWO_PI_I, trapezoid_closed


class ShiftError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShiftConfig:
    path_steps: int = 8
    newton_tol: float = 1e-13
    max_iter: int = 50
    singular_tol: float = 1e-10
    max_condition: float = 1e8      # converged Jacobian above this: sitting on a branch point


@dataclass
class ShiftSolution:
    u: complex
    points: tuple            # z_i
    weights: tuple           # a'_i
    zetas: np.ndarray        # zeta_u(z_i)
    c: complex               # C_u
    residuals: list = field(default_factory=list)   # final residual norm per continuation step

    @property
    def residual(self) -> float:
        return self.residuals[-1] if self.residuals else 0.0

    # the shifted curve
    def x(self, z):
        return np.asarray(z) ** 2 + self.u * self.c

    def y(self, z):
        """Scalar part: y_u = y dx_u."""
        z = np.asarray(z, dtype=complex)
        s = sum(a / (zt * (z - zt)) for a, zt in zip(self.weights, self.zetas))
        return z + 0.5 * self.u * s

    def y_form(self, z):
        """Coefficient of dz in y_u."""
        return self.y(z) * 2 * np.asarray(z)


def _system(zs, ws, u, v):
    zeta, c = v[:-1], v[-1]
    F = np.empty(len(v), dtype=complex)
    F[:-1] = zeta ** 2 - zs ** 2 + u * c
    F[-1] = c - np.sum(ws / zeta)
    J = np.zeros((len(v), len(v)), dtype=complex)
    J[np.arange(len(zs)), np.arange(len(zs))] = 2 * zeta
    J[:-1, -1] = u
    J[-1, :-1] = ws / zeta ** 2
    J[-1, -1] = 1
    return F, J


def solve_shift(D: Divisor, u: complex, path_steps: int | None = None, cfg: ShiftConfig = ShiftConfig(),
                seed: np.ndarray | None = None) -> ShiftSolution:
    """Solve for zeta_u(z_i), C_u by Newton continuation along the ray from 0 to u.

    With ``seed`` (a vector [zeta..., C]) a single Newton solve at u is done
    from it instead (no continuation).
    """
    zs = np.array([complex(z) for z in D.points])
    ws = np.array([complex(a) for a in D.weights])
    if np.any(zs == 0):
        raise DivisorError("shift points must differ from 0")
    steps = cfg.path_steps if path_steps is None else path_steps
    if seed is None:
        v = np.concatenate([zs, [np.sum(ws / zs)]])
        us = [u * (k + 1) / steps for k in range(steps)] if u != 0 else []
    else:
        v = np.asarray(seed, dtype=complex).copy()
        us = [u]
    residuals = []
    for uk in us:
        for it in range(cfg.max_iter):
            F, J = _system(zs, ws, uk, v)
            if abs(np.linalg.det(J)) < cfg.singular_tol * max(1.0, np.max(np.abs(J))) ** len(v):
                raise ShiftError(f"Jacobian singular at u={uk}: branch point reached")
            dv = np.linalg.solve(J, -F)
            v = v + dv
            if np.max(np.abs(dv)) < cfg.newton_tol * max(1.0, np.max(np.abs(v))):
                break
        else:
            raise ShiftError(f"Newton did not converge at u={uk}, last residual {np.max(np.abs(F)):.3e}")
        F, J = _system(zs, ws, uk, v)
        if np.linalg.cond(J) > cfg.max_condition:
            raise ShiftError(f"converged onto a branch point at u={uk} (Jacobian condition {np.linalg.cond(J):.1e})")
        residuals.append(float(np.max(np.abs(F))))
    if u == 0:
        residuals.append(0.0)
    return ShiftSolution(complex(u), tuple(D.points), tuple(D.weights), v[:-1].copy(), complex(v[-1]), residuals)


def zeta_series(z1: complex, k_max: int) -> list:
    """Coefficients c_1..c_k_max of zeta_u(z1) = z1 + sum c_k u^k (unit weight),
    c_k = -(1/2) Gamma(3(k-1)/2 + 1) / (k! Gamma((k-1)/2 + 1)) z1^(1-3k)."""
    if z1 == 0:
        raise DivisorError("z1 != 0 required")
    return [-0.5 * gamma(1.5 * (k - 1) + 1) / (math.factorial(k) * gamma(0.5 * (k - 1) + 1)) * z1 ** (1 - 3 * k)
            for k in range(1, k_max + 1)]


def convergence_radius(z1: complex) -> float:
    return 2 * abs(z1) ** 3 / (3 * math.sqrt(3))


def zeta_series_sum(z1: complex, u: complex, k_max: int) -> complex:
    return z1 + sum(c * u ** k for k, c in enumerate(zeta_series(z1, k_max), start=1))


def taylor_from_solver(D: Divisor, index: int, k_max: int, radius: float, nodes: int = 64,
                       cfg: ShiftConfig = ShiftConfig()) -> list:
    """Taylor coefficients of u -> zeta_u(z_index) by the Cauchy integral on |u| = radius,
    each node solved by continuation from u = 0."""
    us = radius * np.exp(TWO_PI_I * np.arange(nodes) / nodes)
    vals = np.array([solve_shift(D, u, cfg=cfg).zetas[index] for u in us])
    coef = np.fft.fft(vals) / nodes
    return [complex(coef[k] / radius ** k) for k in range(1, k_max + 1)]


def series_growth(z1: complex, u: complex, k_lo: int = 40, k_hi: int = 80) -> float:
    """|c_k_hi u^k_hi| / |c_k_lo u^k_lo|: << 1 inside the radius, >> 1 outside."""
    cs = zeta_series(z1, k_hi)
    return abs(cs[k_hi - 1] * u ** k_hi) / abs(cs[k_lo - 1] * u ** k_lo)


def curve_equation_residual(sol: ShiftSolution, z, form: str = "corrected") -> complex:
    """(y^2 - x)(x - X1) - u (y + zeta + s u/(4 zeta^2)) for a single-point shift.

    form="corrected" uses s = +1, which is what the parametrization satisfies
    identically; form="printed" uses s = -1 and leaves an O(u^2) remainder.
    """
    if len(sol.points) != 1 or sol.weights[0] != 1:
        raise DivisorError("curve equation is stated for D = 1.[z1]")
    sign = {"corrected": 1, "printed": -1}[form]
    z = np.asarray(z, dtype=complex)
    zt = sol.zetas[0]
    if np.any(np.abs(z - zt) < 1e-12):
        raise DivisorError("sample at a pole of y_u")
    x, y = sol.x(z), sol.y(z)
    X1 = sol.points[0] ** 2
    return (y * y - x) * (x - X1) - sol.u * (y + zt + sign * sol.u / (4 * zt ** 2))


def _residue(f, center, radius, tol=1e-12):
    val, _ = trapezoid_closed(f, lambda s: center + radius * np.exp(TWO_PI_I * s),
                              lambda s: TWO_PI_I * radius * np.exp(TWO_PI_I * s), tol)
    return val / TWO_PI_I


def shifted_times(sol: ShiftSolution, k_max: int = 4) -> dict:
    """Residue times of y_u by contour quadrature.

    finite: {zeta_i: Res_{zeta_i} y_u}; infinity: {k: Res_inf xi^k y_u} with xi = x_u^(-1/2).
    """
    zetas = list(sol.zetas)
    finite = {}
    for i, zt in enumerate(zetas):
        others = [abs(zt - w) for j, w in enumerate(zetas) if j != i] + [abs(zt)]
        r = min(others) / 2
        finite[complex(zt)] = _residue(sol.y_form, zt, r)
    R = 4 * max([abs(z) for z in zetas] + [abs(sol.u * sol.c) ** 0.5, 1.0])

    def xi(z):
        return 1 / (z * np.sqrt(1 + sol.u * sol.c / z ** 2))

    infinity = {}
    for k in range(0, k_max + 1):
        infinity[k] = -_residue(lambda z: xi(z) ** k * sol.y_form(z), 0.0, R)
    return {"finite": finite, "infinity": infinity}


def expected_times(sol: ShiftSolution, k_max: int = 4) -> dict:
    """t_{p,k}(S + uD) = t_{p,k}(S) + u delta_{k,0} sum a'_i (delta_{p, zeta_i} - delta_{p, inf})."""
    finite = {complex(zt): sol.u * a for zt, a in zip(sol.zetas, sol.weights)}
    infinity = {k: 0j for k in range(0, k_max + 1)}
    if k_max >= 3:
        infinity[3] = -2
    infinity[0] = -sol.u * sum(sol.weights)
    return {"finite": finite, "infinity": infinity}


def du_y_residual(D: Divisor, u: complex, z: complex, h: float = 1e-5, cfg: ShiftConfig = ShiftConfig()) -> float:
    """|d/du y_u at fixed x (as a form in z) - omega'''_{D_u}(z)|, omega''' = sum a'_i dz / (z - zeta_i)."""
    sol = solve_shift(D, u, cfg=cfg)
    x = complex(sol.x(z))

    def y_at(uu):
        s = solve_shift(D, uu, cfg=cfg)
        zz = cmath.sqrt(x - uu * s.c)
        if abs(zz - z) > abs(zz + z):
            zz = -zz
        return complex(s.y(zz))

    dy = (y_at(u + h) - y_at(u - h)) / (2 * h)
    lhs = dy * 2 * z
    rhs = sum(a / (z - zt) for a, zt in zip(sol.weights, sol.zetas))
    return abs(lhs - rhs)


@dataclass
class SpectralCurve:
    """Genus-0 spectral curve: Airy base, optionally Sato-shifted."""
    shift: ShiftSolution | None = None

    @classmethod
    def airy(cls) -> "SpectralCurve":
        return cls(None)

    @classmethod
    def shifted(cls, D: Divisor, u: complex, cfg: ShiftConfig = ShiftConfig()) -> "SpectralCurve":
        return cls(solve_shift(D, u, cfg=cfg))

    def x(self, z):
        return np.asarray(z) ** 2 if self.shift is None else self.shift.x(z)

    def y(self, z):
        return np.asarray(z, dtype=complex) if self.shift is None else self.shift.y(z)

    def punctures(self) -> dict:
        """Pole -> degree of y_u."""
        out = {"inf": 4}
        if self.shift is not None and self.shift.u != 0:
            for zt in self.shift.zetas:
                out[complex(zt)] = 1
        return out

    def times(self, k_max: int = 4) -> dict:
        sol = self.shift or ShiftSolution(0j, (), (), np.zeros(0, dtype=complex), 0j)
        return shifted_times(sol, k_max)
