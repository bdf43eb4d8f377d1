"""Direct numerical evidence for or against oscillation.

The system is integrated in first-order form Phi' = Psi/p,
Psi' = -R Phi - (q/p) Psi for several initial conditions, and the zeros of both
components are counted on growing windows.  The outcome is evidence from a
finite window, never a proof.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from . import ode
from .criteria import SystemSpec


class Evidence(str, Enum):
    CONSISTENT = "ConsistentWithOscillation"
    COUNTEREXAMPLE = "CounterexampleFound"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EvidenceConfig:
    window_base: float = 10.0
    window_count: int = 4
    n_random: int = 4
    seed: int = 0
    tol: float = 1e-9
    lengths: Optional[tuple[float, ...]] = None  # explicit window lengths, overriding the doubling schedule

    def windows(self, t0: float) -> np.ndarray:
        if self.lengths is not None:
            return t0 + np.asarray(self.lengths, dtype=float)
        return t0 + self.window_base * 2.0 ** np.arange(self.window_count)


def system_rhs(spec: SystemSpec):
    p, q, r, r1, r2 = spec.p, spec.q, spec.r, spec.r1, spec.r2

    def rhs(t, y):
        pt, qt, rt, a, b = float(p(t)), float(q(t)), float(r(t)), float(r1(t)), float(r2(t))
        f1, f2, s1, s2 = y
        return np.array([
            s1 / pt,
            s2 / pt,
            -(rt * f1 + a * f2) - qt / pt * s1,
            -(-b * f1 + rt * f2) - qt / pt * s2,
        ])

    return rhs


def simulate(spec: SystemSpec, ic: Sequence[float], T: float, tol: float = 1e-9) -> ode.Trajectory:
    """State (phi1, phi2, psi1, psi2) with psi = p Phi'."""
    ic = np.asarray(ic, dtype=float)
    if ic.shape != (4,):
        raise ValueError("initial condition needs 4 entries (phi1, phi2, psi1, psi2)")
    if not T > spec.t0:
        raise ValueError("need T > t0")
    cfg = ode.SolverConfig(rtol=tol, atol=tol * 1e-3, blowup_norm=1e300)
    return ode.solve(system_rhs(spec), spec.t0, ic, T, cfg)


def initial_conditions(cfg: EvidenceConfig) -> list[np.ndarray]:
    basis = [np.eye(4)[i] for i in range(4)]
    rng = np.random.default_rng(cfg.seed)
    return basis + [rng.standard_normal(4) for _ in range(cfg.n_random)]


@dataclass
class SolutionRecord:
    index: int
    ic: list[float]
    counts: list[list[int]]  # counts[component][window]
    bracket: float  # r1(t0) [phi1 phi2' - phi2 phi1'](t0)
    gaps: list[float] = field(default_factory=list)
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {"index": self.index, "ic": self.ic, "zero_counts": {"phi1": self.counts[0], "phi2": self.counts[1]},
                "bracket": self.bracket, "bracket_nonnegative": bool(self.bracket >= 0),
                "diagnostic": self.diagnostic}


@dataclass
class EvidenceReport:
    verdict: Evidence
    windows: list[float]
    solutions: list[SolutionRecord]
    seed: int
    counterexample: Optional[tuple[int, int]] = None
    diagnostic: str = ""

    @property
    def gaps(self) -> np.ndarray:
        return np.array([g for s in self.solutions for g in s.gaps])

    @property
    def mean_gap(self) -> Optional[float]:
        g = self.gaps
        return float(g.mean()) if len(g) else None

    def to_json(self) -> dict:
        g = self.gaps
        out = {
            "verdict": self.verdict.value,
            "windows": self.windows,
            "seed": self.seed,
            "solutions": [s.to_json() for s in self.solutions],
            "gap_stats": {"count": int(len(g)),
                          "mean": float(g.mean()) if len(g) else None,
                          "min": float(g.min()) if len(g) else None,
                          "max": float(g.max()) if len(g) else None},
            "diagnostic": self.diagnostic,
        }
        if self.counterexample is not None:
            out["counterexample"] = {"solution": self.counterexample[0], "component": self.counterexample[1] + 1}
        return out

    def counts_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["solution", "component", *[f"T={t!r}" for t in self.windows]])
        for s in self.solutions:
            for k in range(2):
                w.writerow([s.index, k + 1, *s.counts[k]])
        return buf.getvalue()


def _bracket(spec: SystemSpec, ic: np.ndarray) -> float:
    t0 = spec.t0
    p0 = float(spec.p(t0))
    f1, f2, s1, s2 = ic
    return float(spec.r1(t0)) * (f1 * s2 / p0 - f2 * s1 / p0)


def oscillation_evidence(spec: SystemSpec, cfg: EvidenceConfig = EvidenceConfig()) -> EvidenceReport:
    windows = cfg.windows(spec.t0)
    records: list[SolutionRecord] = []
    problems: list[str] = []
    for i, ic in enumerate(initial_conditions(cfg)):
        rec = SolutionRecord(i, [float(x) for x in ic], [[], []], _bracket(spec, ic))
        try:
            tr = simulate(spec, ic, float(windows[-1]), cfg.tol)
        except ode.StiffnessError as exc:
            rec.diagnostic = f"step size collapsed at t={exc.t:.6g}"
            problems.append(f"solution {i}: {rec.diagnostic}")
            records.append(rec)
            continue
        if not isinstance(tr.termination, ode.ReachedHorizon):
            rec.diagnostic = f"integration stopped at t={tr.t_end:.6g} ({type(tr.termination).__name__})"
            problems.append(f"solution {i}: {rec.diagnostic}")
        for k in range(2):
            zs = tr.find_zeros(k).sign_changes
            rec.counts[k] = [int(np.sum(zs <= T)) for T in windows if T <= tr.t_end + 1e-9]
            if k == 0:
                rec.gaps = [float(g) for g in np.diff(zs)]
        records.append(rec)

    complete = [r for r in records if len(r.counts[0]) == len(windows) and not r.diagnostic]
    for r in complete:
        for k in range(2):
            c = r.counts[k]
            if len(c) >= 3 and c[-1] == c[-2] == c[-3]:
                return EvidenceReport(Evidence.COUNTEREXAMPLE, [float(w) for w in windows], records,
                                      cfg.seed, (r.index, k), "; ".join(problems))
    if problems:
        return EvidenceReport(Evidence.INCONCLUSIVE, [float(w) for w in windows], records, cfg.seed,
                              diagnostic="; ".join(problems))

    def gains(c):
        return c[0] >= 1 and all(b > a for a, b in zip(c, c[1:]))

    if all(gains(r.counts[k]) for r in records for k in range(2)):
        return EvidenceReport(Evidence.CONSISTENT, [float(w) for w in windows], records, cfg.seed)
    return EvidenceReport(Evidence.INCONCLUSIVE, [float(w) for w in windows], records, cfg.seed,
                          diagnostic="some component did not gain a zero in every window")


def zero_gap_property(A: Callable[[float], float], C: Callable[[float], float], n_solutions: int,
                      interval: tuple[float, float], seed: int = 0, tol: float = 1e-10):
    """Max pairwise difference of sign-change counts for [A v'']'' + C v = 0.

    Returns (max difference, list of counts).
    """
    c, d = interval
    rng = np.random.default_rng(seed)

    def rhs(s, y):
        return np.array([y[1], y[2] / float(A(s)), y[3], -float(C(s)) * y[0]])

    cfg = ode.SolverConfig(rtol=tol, atol=tol * 1e-3, blowup_norm=math.inf)
    counts = []
    for _ in range(n_solutions):
        y0 = rng.standard_normal(4)
        tr = ode.solve(rhs, c, y0, d, cfg)
        counts.append(len(tr.find_zeros(0)))
    return (max(counts) - min(counts) if counts else 0), counts
