"""Numerical trajectories with dense output, blowup detection and zero finding.

The stepping itself is scipy's DOP853 (an adaptive explicit Runge-Kutta 8(5,3)
pair with dense output).  This module adds the bookkeeping the rest of the
package needs: termination reasons, sign-change location, CSV dumps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from .expr import DomainFault


class StiffnessError(RuntimeError):
    """The step size collapsed although the solution stayed bounded."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class ReachedHorizon:
    t: float


@dataclass(frozen=True)
class Blowup:
    t_esc: float


@dataclass(frozen=True)
class EventStop:
    t: float
    name: str


Termination = Union[ReachedHorizon, Blowup, EventStop]


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    blowup_norm: float = 1e12
    max_step: float = math.inf
    method: str = "DOP853"


@dataclass(frozen=True)
class Zero:
    t: float
    tangential: bool = False


@dataclass(frozen=True)
class ZeroList:
    component: int
    zeros: list[Zero]

    @property
    def sign_changes(self) -> np.ndarray:
        return np.array([z.t for z in self.zeros if not z.tangential])

    @property
    def tangential(self) -> np.ndarray:
        return np.array([z.t for z in self.zeros if z.tangential])

    def __len__(self) -> int:
        return len(self.sign_changes)


class Trajectory:
    """Dense solution on [t_start, t_end] with the reason integration stopped."""

    def __init__(self, dense: Callable[[np.ndarray], np.ndarray], knots: np.ndarray,
                 termination: Termination, dim: int):
        self._dense = dense
        self.knots = np.asarray(knots, dtype=float)
        self.termination = termination
        self.dim = dim

    @property
    def t_start(self) -> float:
        return float(self.knots[0])

    @property
    def t_end(self) -> float:
        return float(self.knots[-1])

    def __call__(self, t):
        """State at t; shape (dim,) for scalar t, (dim, n) for arrays."""
        arr = np.asarray(t, dtype=float)
        lo, hi = self.t_start, self.t_end
        tol = 1e-12 * max(1.0, abs(hi))
        if np.any(arr < lo - tol) or np.any(arr > hi + tol):
            raise ValueError(f"t outside trajectory range [{lo}, {hi}]")
        return self._dense(np.clip(arr, lo, hi))

    def component(self, i: int, t):
        return self(t)[i]

    def sample(self, per_step: int = 8) -> np.ndarray:
        k = self.knots
        if len(k) < 2:
            return k.copy()
        frac = np.arange(per_step) / per_step
        pts = (k[:-1, None] + np.diff(k)[:, None] * frac[None, :]).ravel()
        return np.concatenate([pts, k[-1:]])

    def find_zeros(self, component: int = 0, interval: Optional[tuple[float, float]] = None,
                   zero_atol: float = 1e-12, xtol: float = 1e-10, per_step: int = 8) -> "ZeroList":
        """Sign changes of one component, plus tangential touches tagged as such.

        An exact zero at the left end of the interval is not reported.
        """
        c, d = interval if interval is not None else (self.t_start, self.t_end)
        if c < self.t_start - 1e-12 or d > self.t_end + 1e-12 or not c < d:
            raise ValueError("interval must lie inside the trajectory span")
        ts = self.sample(per_step)
        ts = np.unique(np.concatenate([[c], ts[(ts > c) & (ts < d)], [d]]))
        ys = self(ts)[component]
        sg = np.sign(ys)
        f = lambda s: float(self(s)[component])
        out: list[Zero] = []
        n = len(ts)
        for i in range(n):
            a, ya = ts[i], ys[i]
            if ya == 0.0:
                if i == 0:
                    continue
                crossing = i == n - 1 or sg[i - 1] * sg[i + 1] < 0
                out.append(Zero(float(a), tangential=not crossing))
                continue
            if i + 1 < n and sg[i] * sg[i + 1] < 0:
                out.append(Zero(brentq(f, a, ts[i + 1], xtol=xtol)))
            elif 0 < i < n - 1 and sg[i - 1] == sg[i] == sg[i + 1] \
                    and abs(ya) <= abs(ys[i - 1]) and abs(ya) < abs(ys[i + 1]):
                res = minimize_scalar(lambda s: abs(f(s)), bounds=(ts[i - 1], ts[i + 1]),
                                      method="bounded", options={"xatol": xtol})
                if abs(res.fun) <= zero_atol:
                    out.append(Zero(float(res.x), tangential=True))
        return ZeroList(component, out)

    def to_csv(self, names: Optional[Sequence[str]] = None, per_step: int = 1) -> str:
        names = list(names) if names else [f"y{i}" for i in range(self.dim)]
        ts = self.sample(per_step)
        ys = self(ts)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *names])
        for j, t in enumerate(ts):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in ys[:, j])])
        return buf.getvalue()


def solve(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_end: float,
    cfg: SolverConfig = SolverConfig(),
    events: Sequence[tuple[str, Callable[[float, np.ndarray], float]]] = (),
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from t0 toward t_end.

    Integration stops at t_end, at the first time ``|y|_inf`` reaches
    ``cfg.blowup_norm`` (reported as ``Blowup``), or at the first zero of a
    named event function.  A domain fault in the right-hand side ends the
    trajectory as a blowup at the fault location.
    """
    y0 = np.asarray(y0, dtype=float)
    fault: list[float] = []

    def f(t, y):
        try:
            return rhs(t, y)
        except DomainFault as exc:
            fault.append(t if exc.t is None else float(exc.t))
            return np.full_like(y, np.nan)

    ev_funcs = []
    if math.isfinite(cfg.blowup_norm):
        blow = lambda t, y: cfg.blowup_norm - np.max(np.abs(y))
        blow.terminal = True
        ev_funcs.append(blow)
    for _, g in events:
        e = lambda t, y, g=g: g(t, y)
        e.terminal = True
        ev_funcs.append(e)

    with np.errstate(all="ignore"):
        sol = solve_ivp(f, (t0, t_end), y0, method=cfg.method, rtol=cfg.rtol, atol=cfg.atol,
                        dense_output=True, events=ev_funcs or None, max_step=cfg.max_step)
    knots = sol.t
    if sol.status == -1:
        t_fail = float(knots[-1])
        finite = np.all(np.isfinite(sol.y[:, -1]))
        big = finite and np.max(np.abs(sol.y[:, -1])) > math.sqrt(cfg.blowup_norm)
        if fault or not finite or big:
            term: Termination = Blowup(fault[0] if fault else t_fail)
        else:
            raise StiffnessError(sol.message, t_fail)
    elif sol.status == 1:
        t_stop = float(knots[-1])
        which = [i for i, te in enumerate(sol.t_events) if len(te)]
        idx = which[0] if which else 0
        if math.isfinite(cfg.blowup_norm) and idx == 0:
            term = Blowup(t_stop)
        else:
            shift = 1 if math.isfinite(cfg.blowup_norm) else 0
            term = EventStop(t_stop, events[idx - shift][0])
    else:
        term = ReachedHorizon(float(knots[-1]))
    if len(knots) < 2:
        return Trajectory(lambda t: np.broadcast_to(y0[:, None] if np.ndim(t) else y0,
                                                    (len(y0),) + np.shape(t)).copy(),
                          np.array([t0, t0]), term, len(y0))
    dense = sol.sol
    return Trajectory(dense, knots, term, len(y0))


def linear_system(matrix: Callable[[float], np.ndarray]) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side for y' = M(t) y."""
    return lambda t, y: matrix(t) @ y
