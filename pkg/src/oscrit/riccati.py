"""The scalar Riccati equation a' + a^2/p + (q/p) a + r = 0.

A solution is regular on [t0, T] if it does not escape to -infinity there.
The regular initial values at t0 form a half line [alpha_*(t0), oo); the lower
end alpha_* is estimated by bisection on a finite horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import calculus, ode
from .calculus import IntegralVerdict, ProbeConfig
from .expr import DomainFault, ScalarField

Func = Callable[[np.ndarray], np.ndarray]


class NoRegularSolutionFound(RuntimeError):
    pass


class DivergentNu(RuntimeError):
    pass


def _field(f) -> Func:
    if isinstance(f, (int, float)):
        v = float(f)
        return lambda t: np.full(np.shape(t), v) if np.ndim(t) else v
    return f


@dataclass(frozen=True)
class RiccatiCoefficients:
    p: Func
    q: Func
    r: Func

    @classmethod
    def of(cls, p=1.0, q=0.0, r=0.0) -> "RiccatiCoefficients":
        return cls(_field(p), _field(q), _field(r))

    @classmethod
    def from_general(cls, a, b, c) -> "RiccatiCoefficients":
        """Coefficients of y' + a y^2 + b y + c = 0 with a > 0."""
        a, b, c = _field(a), _field(b), _field(c)
        return cls(lambda t: 1.0 / a(t), lambda t: b(t) / a(t), c)

    def check_positive_p(self, t0: float, span: float = 100.0, n: int = 4001) -> None:
        ts = np.linspace(t0, t0 + span, n)
        if np.any(np.asarray(self.p(ts)) <= 0):
            raise ValueError("p must be positive")

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        p, q, r = float(self.p(t)), float(self.q(t)), float(self.r(t))
        return -(y * y) / p - (q / p) * y - r

    def lower_root(self, t: float) -> Optional[float]:
        """Smaller root of a^2 + q a + p r = 0 at t, or None when complex."""
        p, q, r = float(self.p(t)), float(self.q(t)), float(self.r(t))
        disc = q * q - 4 * p * r
        if disc < -1e-12 * max(1.0, q * q):
            return None
        return 0.5 * (-q - math.sqrt(max(disc, 0.0)))


@dataclass(frozen=True)
class RegularToHorizon:
    t: float


@dataclass(frozen=True)
class Escape:
    t_esc: float
    direction: int = -1


@dataclass
class RiccatiPath:
    trajectory: ode.Trajectory
    status: Union[RegularToHorizon, Escape]

    @property
    def regular(self) -> bool:
        return isinstance(self.status, RegularToHorizon)

    @property
    def t0(self) -> float:
        return self.trajectory.t_start

    @property
    def t_end(self) -> float:
        return self.trajectory.t_end

    def __call__(self, t):
        """Vectorized alpha(t); raises DomainFault outside the computed span."""
        arr = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.t_end))
        if np.any(arr > self.t_end + tol):
            bad = float(arr[arr > self.t_end + tol].min()) if arr.ndim else float(arr)
            raise DomainFault("Riccati path does not reach this point", bad)
        return self.trajectory(arr)[0]

    def to_csv(self) -> str:
        return self.trajectory.to_csv(["alpha"])


DEFAULT_SOLVER = ode.SolverConfig(rtol=1e-10, atol=1e-12)


def solve(coeffs: RiccatiCoefficients, alpha0: float, t0: float, T: float,
          cfg: ode.SolverConfig = DEFAULT_SOLVER) -> RiccatiPath:
    if not T > t0:
        raise ValueError("need T > t0")
    tr = ode.solve(coeffs.rhs, t0, [alpha0], T, cfg)
    term = tr.termination
    if isinstance(term, ode.Blowup):
        end = tr(tr.t_end)[0]
        return RiccatiPath(tr, Escape(term.t_esc, -1 if not end > 0 else 1))
    return RiccatiPath(tr, RegularToHorizon(tr.t_end))


def _regular(coeffs, alpha0, t0, horizon, cfg, predict) -> tuple[bool, RiccatiPath]:
    path = solve(coeffs, alpha0, t0, horizon, cfg)
    if not path.regular:
        return False, path
    if predict:
        # below the smaller equilibrium of the frozen equation the solution
        # decreases without bound, so it is counted as escaping
        root = coeffs.lower_root(horizon)
        if root is not None and path(horizon) < root:
            return False, path
    return True, path


@dataclass
class ExtremalEstimate:
    alpha_star: float
    bracket: tuple[float, float]
    horizon: float
    path: RiccatiPath
    t0: float = 0.0

    def to_json(self) -> dict:
        return {"alpha_star": self.alpha_star, "bracket": list(self.bracket),
                "horizon": self.horizon, "t0": self.t0}


SEED_LIMIT = 2**20


def find_alpha_star(coeffs: RiccatiCoefficients, t0: float, horizon: float, tol: float = 1e-6,
                    cfg: ode.SolverConfig = DEFAULT_SOLVER, predict: bool = True,
                    max_iter: int = 200) -> ExtremalEstimate:
    """Bisection estimate of the lower extremal initial value at t0.

    With ``predict`` a solution still finite at the horizon but lying below the
    smaller root of the frozen-coefficient quadratic there is treated as
    escaping.  Without it only escapes before the horizon count.
    """
    seeds = [0.0] + [float(2**k) for k in range(21)]
    hi = hi_path = lo = None
    prev = None
    for s in seeds:
        ok, path = _regular(coeffs, s, t0, horizon, cfg, predict)
        if ok:
            hi, hi_path = s, path
            lo = prev
            break
        prev = s
    if hi is None:
        raise NoRegularSolutionFound(
            f"no initial value up to {SEED_LIMIT} stays regular on [{t0}, {horizon}]")
    if lo is None:
        for s in [-float(2**k) for k in range(21)]:
            ok, path = _regular(coeffs, s, t0, horizon, cfg, predict)
            if not ok:
                lo = s
                break
            hi, hi_path = s, path
        else:
            raise NoRegularSolutionFound(f"every initial value down to -{SEED_LIMIT} is regular")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        ok, path = _regular(coeffs, mid, t0, horizon, cfg, predict)
        if ok:
            hi, hi_path = mid, path
        else:
            lo = mid
    return ExtremalEstimate(hi, (lo, hi), horizon, hi_path, t0)


def nu(coeffs: RiccatiCoefficients, u: Func, t: float, cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """Probe nu_u(t) = int_t^oo exp(-int_t^tau (2u+q)/p) dtau / p."""
    p, q = coeffs.p, coeffs.q
    rate = lambda s: -(2.0 * u(s) + q(s)) / p(s)
    return calculus.probe_exp_weighted(lambda s: 1.0 / p(s), rate, t, cfg)


def alpha_star_via_normal(coeffs: RiccatiCoefficients, alpha_n: Union[RiccatiPath, Func],
                          t_grid: Sequence[float], cfg: ProbeConfig = ProbeConfig()) -> np.ndarray:
    """alpha_* = alpha_N - 1/nu_{alpha_N} at each grid point."""
    out = []
    for t in t_grid:
        v = nu(coeffs, alpha_n, float(t), cfg)
        if not v.convergent:
            raise DivergentNu(f"nu at t={t} is {v.kind.value}: {v.diagnostic}")
        out.append(float(alpha_n(np.array([t]))[0]) - 1.0 / v.limit)
    return np.array(out)


def initial_value_integral(coeffs: RiccatiCoefficients, t: float, cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """I(t) = int_t^oo exp(-int_t^tau q/p) dtau / p, the value of nu at u = 0."""
    return nu(coeffs, lambda s: np.zeros_like(np.asarray(s, dtype=float)), t, cfg)


def weighted_r_integral(coeffs: RiccatiCoefficients, t0: float, cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """I0 = int_t0^oo exp(int_t0^t q/p) r dt."""
    return calculus.probe_exp_weighted(coeffs.r, lambda s: coeffs.q(s) / coeffs.p(s), t0, cfg)


def path_to_horizon(coeffs: RiccatiCoefficients, alpha0: float, t0: float, cfg: ProbeConfig,
                    solver: ode.SolverConfig = DEFAULT_SOLVER) -> RiccatiPath:
    """Riccati solution extended to the largest probe horizon of ``cfg``."""
    return solve(coeffs, alpha0, t0, float(cfg.horizons(t0)[-1]), solver)
