"""Reduction of the 2x2 system to a scalar fourth-order equation.

Given a regular Riccati solution alpha, the substitution
Phi(t) = exp(int alpha/p) V(beta(t)) with

    beta(t) = int_t0^t exp(-int_t0^tau (2 alpha + q)/p) dtau / p(tau)

turns (p Phi')' + q Phi' + R Phi = 0 with r = 0 part removed into
beta'(gamma(s))^2 V''(s) + S(gamma(s)) V(s) = 0, S = [[0, r1], [-r2, 0]],
where gamma is the inverse of beta.  Eliminating one component gives

    [A(s) v''(s)]'' + C(s) v(s) = 0.

For the second component v2: A = beta'^2 / r2, C = r1 / beta'^2.
For the first component v1 the roles of r1 and r2 swap.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import calculus, ode
from .calculus import CumulativeGrid, IntegralVerdict, ProbeConfig

Func = Callable[[np.ndarray], np.ndarray]


class SignViolation(ValueError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class Coefficients:
    """The plain callables a reduction needs; a SystemSpec provides them."""

    t0: float
    p: Func
    q: Func
    r1: Func
    r2: Func


def _coeffs(spec) -> Coefficients:
    return Coefficients(spec.t0, spec.p, spec.q, spec.r1, spec.r2)


@dataclass
class BetaMap:
    t0: float
    T: float
    grid: CumulativeGrid
    phase: CumulativeGrid  # int_t0^t alpha/p
    label: str = "extremal-estimate-based"

    @property
    def s_max(self) -> float:
        return float(self.grid.values[-1])

    def beta(self, t):
        return self.grid(t)

    def beta_prime(self, t):
        return self.grid.integrand(t)

    def gamma(self, s):
        """Inverse of beta by bracketed root finding on the knot table."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        knots, vals = self.grid.knots, self.grid.values
        if np.any(s_arr < -1e-12) or np.any(s_arr > vals[-1] * (1 + 1e-12) + 1e-12):
            raise ValueError("s outside the image of beta")
        out = np.empty_like(s_arr)
        for i, si in enumerate(s_arr):
            k = int(np.clip(np.searchsorted(vals, si, side="right") - 1, 0, len(knots) - 2))
            lo, hi = knots[k], knots[k + 1]
            g = lambda t: float(self.grid(t)) - si
            glo, ghi = g(lo), g(hi)
            if glo >= 0:
                out[i] = lo
            elif ghi <= 0:
                out[i] = hi
            else:
                out[i] = brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        return out if np.ndim(s) else float(out[0])

    def factor(self, t):
        """exp(int_t0^t alpha/p), the positive multiplier of the substitution."""
        return np.exp(self.phase(t))


def build_beta(spec, alpha: Func, T: float, rtol: float = 1e-12,
               label: str = "extremal-estimate-based") -> BetaMap:
    c = _coeffs(spec)
    rate = lambda t: -(2.0 * alpha(t) + c.q(t)) / c.p(t)
    sol = calculus.solve_panels(c.t0, T, outer=lambda t: 1.0 / c.p(t), rate=rate, rtol=rtol)
    if sol.status != "complete":
        raise calculus.IntegrationError(f"beta quadrature stopped: {sol.diagnostic}")
    phase = calculus.cumulative(lambda t: alpha(t) / c.p(t), c.t0, T, rtol=rtol)
    return BetaMap(c.t0, T, CumulativeGrid(sol), phase, label)


def omega(spec, alpha: Func, cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """The length of the image of beta, as a probe verdict."""
    c = _coeffs(spec)
    return calculus.probe_exp_weighted(lambda t: 1.0 / c.p(t),
                                       lambda t: -(2.0 * alpha(t) + c.q(t)) / c.p(t), c.t0, cfg)


@dataclass
class FourthOrderCoefficients:
    A: Func
    C: Func
    s_max: float
    component: int = 2

    def to_csv(self, n: int = 101) -> str:
        s = np.linspace(0.0, self.s_max, n)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "A", "C"])
        for si, a, cc in zip(s, self.A(s), self.C(s)):
            w.writerow([repr(float(si)), repr(float(a)), repr(float(cc))])
        return buf.getvalue()


def check_sign(spec, T: float, n: int = 2048) -> None:
    c = _coeffs(spec)
    ts = np.linspace(c.t0, T, n)
    prod = np.asarray(c.r1(ts)) * np.asarray(c.r2(ts))
    bad = np.flatnonzero(prod <= 0)
    if len(bad):
        raise SignViolation(f"r1*r2 <= 0 at t={ts[bad[0]]:.6g}", float(ts[bad[0]]))


def fourth_order(spec, beta: BetaMap, component: int = 2) -> FourthOrderCoefficients:
    """Coefficients of [A v'']'' + C v = 0 for one component of V.

    ``component=2`` gives A = beta'^2/r2, C = r1/beta'^2 (the v2 equation);
    ``component=1`` swaps r1 and r2.
    """
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    check_sign(spec, beta.T)
    c = _coeffs(spec)
    ra, rc = (c.r2, c.r1) if component == 2 else (c.r1, c.r2)

    def A(s):
        t = beta.gamma(s)
        return beta.beta_prime(t) ** 2 / ra(t)

    def C(s):
        t = beta.gamma(s)
        return rc(t) / beta.beta_prime(t) ** 2

    return FourthOrderCoefficients(A, C, beta.s_max, component)


def fourth_order_rhs(coeffs: FourthOrderCoefficients):
    """First-order form with state (v, v', A v'', (A v'')')."""

    def rhs(s, y):
        a = float(coeffs.A(s))
        cc = float(coeffs.C(s))
        return np.array([y[1], y[2] / a, y[3], -cc * y[0]])

    return rhs


def initial_state(spec, beta: BetaMap, alpha: Func, phi0: Sequence[float], dphi0: Sequence[float],
                  component: int = 1) -> np.ndarray:
    """Fourth-order state at s = 0 matching Phi(t0) = phi0, Phi'(t0) = dphi0."""
    c = _coeffs(spec)
    t0 = c.t0
    p0, a0 = float(c.p(t0)), float(alpha(t0))
    # U = V at t0; V'(0) = U'(t0)/beta'(t0) = p (Phi' - alpha Phi / p)
    v = np.asarray(phi0, float)
    dv = p0 * (np.asarray(dphi0, float) - a0 * v / p0)
    k = component - 1
    other = 1 - k
    # beta'^2 v1'' = -r1 v2 and beta'^2 v2'' = r2 v1 give A v_k'' = -v_other or +v_other
    sign = -1.0 if component == 1 else 1.0
    return np.array([v[k], dv[k], sign * v[other], sign * dv[other]])


def solve_fourth_order(coeffs: FourthOrderCoefficients, y0: Sequence[float], s_end: float,
                       cfg: ode.SolverConfig = ode.SolverConfig(blowup_norm=math.inf)) -> ode.Trajectory:
    return ode.solve(fourth_order_rhs(coeffs), 0.0, y0, s_end, cfg)


def map_back(v_traj: ode.Trajectory, beta: BetaMap, component: int = 1) -> ode.Trajectory:
    """Phi(t) = exp(int alpha/p) V(beta(t)) from a fourth-order trajectory.

    The other component of V is recovered from the state: v_other = -+ A v_k''.
    """
    sign = -1.0 if component == 1 else 1.0
    k = component - 1

    def dense(t):
        t = np.asarray(t, dtype=float)
        s = beta.beta(t)
        y = v_traj(s)
        f = beta.factor(t)
        out = np.empty((2,) + np.shape(t))
        out[k] = f * y[0]
        out[1 - k] = f * sign * y[2]
        return out

    s_knots = v_traj.knots
    s_knots = s_knots[s_knots <= beta.s_max]
    t_knots = np.unique(np.concatenate([[beta.t0], beta.gamma(s_knots)]))
    return ode.Trajectory(dense, t_knots, ode.ReachedHorizon(float(t_knots[-1])), 2)
