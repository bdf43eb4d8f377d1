"""Hypothesis checkers for oscillation criteria of (p Phi')' + q Phi' + R Phi = 0.

Each checker returns a CriterionReport: one ConditionVerdict per hypothesis and
an overall verdict.  Pointwise inequalities are sampled on a fixed grid, so a
Satisfied inequality means "no violation found on the grid".  Integral
conditions are decided by the improper-integral probe and may be Inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from . import calculus, riccati
from .calculus import IntegralVerdict, ProbeConfig, VerdictKind
from .expr import DomainFault, NonDifferentiable, ScalarField

Func = Callable[[np.ndarray], np.ndarray]

GRID_POINTS = 2048
INEQ_TOL = 1e-12
ACTIVITY_FLOOR = 1e-12


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


class Overall(str, Enum):
    APPLIES = "CriterionApplies"
    FAILS = "CriterionFails"
    INCONCLUSIVE = "Inconclusive"


class AssumptionViolation(ValueError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class SystemSpec:
    t0: float
    p: ScalarField
    q: ScalarField
    r: ScalarField
    r1: ScalarField
    r2: ScalarField
    gamma: Optional[ScalarField] = None

    @classmethod
    def from_sources(cls, t0: float, p="1", q="0", r="0", r1="1", r2="1",
                     gamma: Optional[str] = None) -> "SystemSpec":
        mk = lambda s: ScalarField.from_source(str(s), t0)
        return cls(float(t0), mk(p), mk(q), mk(r), mk(r1), mk(r2), mk(gamma) if gamma else None)

    def with_gamma(self, gamma: Optional[str]) -> "SystemSpec":
        g = ScalarField.from_source(gamma, self.t0) if gamma else None
        return SystemSpec(self.t0, self.p, self.q, self.r, self.r1, self.r2, g)

    def riccati(self) -> riccati.RiccatiCoefficients:
        return riccati.RiccatiCoefficients(self.p, self.q, self.r)

    def check_assumptions(self, span: float) -> None:
        """p > 0 and r1 r2 > 0 on the sample grid; raises with a witness."""
        ts, vals = sample(lambda t: self.p(t), self.t0, span)
        bad = np.flatnonzero(vals <= 0)
        if len(bad):
            raise AssumptionViolation(f"p <= 0 at t={ts[bad[0]]:.6g}", float(ts[bad[0]]))
        bad = product_sign_violation(self.r1, self.r2, self.t0, span)
        if bad is not None:
            raise AssumptionViolation(f"r1*r2 <= 0 at t={bad[0]:.6g}", bad[0])

    def to_json(self) -> dict:
        out = {"t0": self.t0, "p": str(self.p), "q": str(self.q), "r": str(self.r),
               "r1": str(self.r1), "r2": str(self.r2)}
        if self.gamma is not None:
            out["gamma"] = str(self.gamma)
        return out


def sample_grid(t0: float, span: float, n: int = GRID_POINTS) -> np.ndarray:
    """Half the points uniform on the first 100 units, the rest geometric."""
    near = min(span, 100.0)
    half = n // 2
    uni = t0 + np.linspace(0.0, near, half)
    if span <= near:
        return t0 + np.linspace(0.0, span, n)
    geo = t0 + np.geomspace(near, span, n - half + 1)[1:]
    return np.concatenate([uni, geo])


def sample(f: Func, t0: float, span: float, n: int = GRID_POINTS):
    """Evaluate f on the grid, dropping the tail from the first domain fault on."""
    ts = sample_grid(t0, span, n)
    while len(ts):
        try:
            with np.errstate(all="ignore"):
                vals = np.asarray(f(ts), dtype=float)
            vals = np.broadcast_to(vals, ts.shape)
            finite = np.isfinite(vals)
            if not finite.all():
                raise DomainFault("non-finite sample", float(ts[~finite][0]))
            return ts, vals
        except DomainFault as exc:
            cut = exc.t if exc.t is not None else ts[0]
            ts = ts[ts < cut]
    return ts, np.zeros(0)


UNDERFLOW = 1e-250


def _underflowed(vals: np.ndarray) -> np.ndarray:
    """Mask of zeros reached by decay: every later sample is zero and the last
    nonzero sample before them is already below UNDERFLOW in magnitude."""
    mask = np.zeros(vals.shape, bool)
    nz = np.flatnonzero(vals != 0)
    last = nz[-1] if len(nz) else -1
    if last >= 0 and abs(vals[last]) < UNDERFLOW:
        mask[last + 1:] = True
    return mask


def product_sign_violation(f: Func, g: Func, t0: float, span: float) -> Optional[tuple[float, float]]:
    """First sample with f g <= 0, ignoring factors that decayed into float underflow."""
    ts, fv = sample(f, t0, span)
    ts2, gv = sample(g, t0, span)
    n = min(len(ts), len(ts2))
    ts, fv, gv = ts[:n], fv[:n], gv[:n]
    prod = np.sign(fv) * np.sign(gv)
    ok = (prod > 0) | ((fv == 0) & _underflowed(fv)) | ((gv == 0) & _underflowed(gv))
    ok &= ~((fv * gv) < 0)
    bad = np.flatnonzero(~ok)
    if len(bad):
        return float(ts[bad[0]]), float(fv[bad[0]] * gv[bad[0]])
    return None


@dataclass
class ConditionVerdict:
    id: str
    status: Status
    description: str = ""
    witness: Optional[tuple[float, float]] = None
    evidence: Optional[IntegralVerdict] = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"id": self.id, "status": self.status.value, "description": self.description}
        if self.witness is not None:
            out["witness"] = {"t": calculus._jnum(self.witness[0]), "value": calculus._jnum(self.witness[1])}
        if self.evidence is not None:
            ev = self.evidence.to_json()
            out["verdict"] = ev["kind"]
            out["probes"] = ev["probes"]
            if ev["limit"] is not None:
                out["limit"] = ev["limit"]
            if ev["diagnostic"]:
                out["diagnostic"] = ev["diagnostic"]
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CriterionReport:
    theorem: str
    conditions: list[ConditionVerdict]
    notes: list[str] = field(default_factory=list)
    forced: Optional[Overall] = None

    @property
    def overall(self) -> Overall:
        if self.forced is not None:
            return self.forced
        if any(c.status is Status.VIOLATED for c in self.conditions):
            return Overall.FAILS
        if self.conditions and all(c.status is Status.SATISFIED for c in self.conditions):
            return Overall.APPLIES
        return Overall.INCONCLUSIVE

    def condition(self, cid: str) -> ConditionVerdict:
        return next(c for c in self.conditions if c.id == cid)

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "overall": self.overall.value,
                "conditions": [c.to_json() for c in self.conditions], "notes": list(self.notes)}

    def summary(self) -> str:
        return f"{self.theorem}: {self.overall.value}"


# --------------------------------------------------------------------------
# Building blocks


def inequality(cid: str, desc: str, f: Func, t0: float, cfg: ProbeConfig, sign: int = 1) -> ConditionVerdict:
    """Condition ``sign * f(t) >= 0`` on the sample grid."""
    ts, vals = sample(f, t0, cfg.span())
    if len(ts) == 0:
        return ConditionVerdict(cid, Status.INCONCLUSIVE, desc, note="no evaluable sample points")
    bad = np.flatnonzero(sign * vals < -INEQ_TOL)
    if len(bad):
        i = bad[0]
        return ConditionVerdict(cid, Status.VIOLATED, desc, witness=(float(ts[i]), float(vals[i])))
    note = ""
    if ts[-1] < t0 + cfg.span():
        note = f"sampled up to t={ts[-1]:.6g} only (evaluation fault beyond)"
    return ConditionVerdict(cid, Status.SATISFIED, desc, note=note)


def integral_condition(cid: str, desc: str, verdict: IntegralVerdict, want: str) -> ConditionVerdict:
    """Map a probe verdict to a condition that asks for divergence to +oo or convergence."""
    kind = verdict.kind
    last = verdict.probes[-1] if verdict.probes else None
    if want == "divergent":
        if kind is VerdictKind.DIVERGENT_POS:
            return ConditionVerdict(cid, Status.SATISFIED, desc, evidence=verdict)
        if kind in (VerdictKind.CONVERGENT, VerdictKind.DIVERGENT_NEG):
            return ConditionVerdict(cid, Status.VIOLATED, desc, witness=last, evidence=verdict)
    else:
        if kind is VerdictKind.CONVERGENT:
            return ConditionVerdict(cid, Status.SATISFIED, desc, evidence=verdict)
        if kind in (VerdictKind.DIVERGENT_POS, VerdictKind.DIVERGENT_NEG):
            return ConditionVerdict(cid, Status.VIOLATED, desc, witness=last, evidence=verdict)
    return ConditionVerdict(cid, Status.INCONCLUSIVE, desc, evidence=verdict)


def _gamma_derivative(spec: SystemSpec) -> Optional[ScalarField]:
    return spec.gamma.derivative() if spec.gamma is not None else None


def i_integral(spec: SystemSpec, cfg: ProbeConfig) -> IntegralVerdict:
    """I(t0) = int exp(-int q/p) / p."""
    return riccati.initial_value_integral(spec.riccati(), spec.t0, cfg)


def i0_integral(spec: SystemSpec, cfg: ProbeConfig) -> IntegralVerdict:
    """I0 = int exp(int q/p) r."""
    return riccati.weighted_r_integral(spec.riccati(), spec.t0, cfg)


def kernel_condition(spec: SystemSpec, cid: str, desc: str, outer: Func, w: Func,
                     cfg: ProbeConfig, want: str) -> ConditionVerdict:
    v = calculus.weighted_double(outer, w, spec.p, spec.t0, cfg)
    return integral_condition(cid, desc, v, want)


def _both(conds: list[ConditionVerdict], cid: str, desc: str) -> ConditionVerdict:
    """Combine the k = 1, 2 versions of one condition into a single verdict."""
    if any(c.status is Status.VIOLATED for c in conds):
        worst = next(c for c in conds if c.status is Status.VIOLATED)
        return ConditionVerdict(cid, Status.VIOLATED, desc, worst.witness, worst.evidence,
                                note=worst.note or worst.id)
    if all(c.status is Status.SATISFIED for c in conds):
        return ConditionVerdict(cid, Status.SATISFIED, desc, evidence=conds[0].evidence)
    bad = next(c for c in conds if c.status is not Status.SATISFIED)
    return ConditionVerdict(cid, Status.INCONCLUSIVE, desc, evidence=bad.evidence, note=bad.id)


def _per_component(spec: SystemSpec, make: Callable[[ScalarField, str], ConditionVerdict]) -> list[ConditionVerdict]:
    if str(spec.r1) == str(spec.r2):
        c = make(spec.r1, "1")
        return [c]
    return [make(spec.r1, "1"), make(spec.r2, "2")]


# --------------------------------------------------------------------------
# Theorems


def positivity(spec: SystemSpec, cfg: ProbeConfig) -> ConditionVerdict:
    bad = product_sign_violation(spec.r1, spec.r2, spec.t0, cfg.span())
    if bad is None:
        return ConditionVerdict("r1r2_pos", Status.SATISFIED, "r1 r2 > 0")
    return ConditionVerdict("r1r2_pos", Status.VIOLATED, "r1 r2 > 0", witness=bad)


def check_whyburn(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    t0 = spec.t0
    conds = [
        inequality("form_p", "p == 1", lambda t: -np.abs(spec.p(t) - 1.0), t0, cfg),
        inequality("form_q", "q == 0", lambda t: -np.abs(spec.q(t)), t0, cfg),
        inequality("r_zero", "r == 0", lambda t: -np.abs(spec.r(t)), t0, cfg),
        positivity(spec, cfg),
    ]
    weighted = [
        integral_condition(f"int_t_r{k}", f"int t r{k} dt = +oo",
                           calculus.probe_improper(lambda t, f=f: t * f(t), t0, cfg), "divergent")
        for k, f in (("1", spec.r1), ("2", spec.r2))
    ]
    conds.extend(weighted)
    report = CriterionReport("whyburn", conds)
    if any(c.status is not Status.SATISFIED for c in conds[:4]):
        report.notes.append("structural conditions (p == 1, q == 0, r == 0, r1 r2 > 0) not met")
    elif all(c.status is Status.SATISFIED for c in weighted):
        report.notes.append("variant: weighted integrals int t r_k diverge; every solution with "
                            "r1(t0)[phi psi' - psi phi'](t0) >= 0 oscillates")
    else:
        plain = [calculus.probe_improper(f, t0, cfg) for f in (spec.r1, spec.r2)]
        if all(v.divergent_pos for v in plain):
            report.notes.append("variant: only unweighted integrals int r_k diverge; solutions "
                                "oscillate or decay monotonically (not an oscillation criterion)")
    return report


@dataclass(frozen=True)
class AbdullahSystem:
    """phi'' = p1 phi + q1 psi,  psi'' = p2 phi + q2 psi."""

    t0: float
    p1: Func
    q1: Func
    p2: Func
    q2: Func

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "AbdullahSystem":
        """Adapter for p == 1, q == 0: Phi'' = -R Phi."""
        return cls(spec.t0, lambda t: -spec.r(t), lambda t: -spec.r1(t), spec.r2, lambda t: -spec.r(t))


def check_abdullah(system: AbdullahSystem, cfg: ProbeConfig = ProbeConfig(), n_check: int = 200) -> CriterionReport:
    t0 = system.t0
    f = lambda g, t: float(np.asarray(g(np.array([t])))[0])
    a, b, c = f(system.q1, t0), f(system.q2, t0) - f(system.p1, t0), -f(system.p2, t0)
    report = CriterionReport("abdullah", [])
    if a == 0:
        report.conditions.append(ConditionVerdict("q1_nonzero", Status.VIOLATED, "q1 != 0", (t0, 0.0)))
        return report
    disc = b * b - 4 * a * c
    if disc < 0:
        report.conditions.append(ConditionVerdict("real_K", Status.VIOLATED,
                                                  "real root K of q1 K^2 + (q2 - p1) K - p2 = 0",
                                                  (t0, disc)))
        report.notes.append("quadratic has complex roots")
        return report
    roots = sorted({(-b - math.sqrt(disc)) / (2 * a) + 0.0, (-b + math.sqrt(disc)) / (2 * a) + 0.0})
    ts = sample_grid(t0, cfg.span(), n_check)
    best: Optional[list[ConditionVerdict]] = None
    for K in roots:
        q1, q2, p1, p2 = (np.asarray(g(ts), float) for g in (system.q1, system.q2, system.p1, system.p2))
        res = q1 * K * K + (q2 - p1) * K - p2
        scale = np.abs(q1) * K * K + (np.abs(q2) + np.abs(p1)) * abs(K) + np.abs(p2) + 1.0
        bad = np.flatnonzero(np.abs(res) > 1e-9 * scale)
        ident = ConditionVerdict(f"identity_K={K:.12g}", Status.SATISFIED,
                                 "q1 K^2 + (q2 - p1) K - p2 == 0 on the grid")
        if len(bad):
            ident.status = Status.VIOLATED
            ident.witness = (float(ts[bad[0]]), float(res[bad[0]]))
            conds = [ident]
        else:
            v1 = calculus.probe_improper(lambda t: K * system.q1(t) + system.q2(t), t0, cfg)
            v2 = calculus.probe_improper(lambda t: K * system.p1(t) + system.p2(t), t0, cfg)
            same = (v1.kind is v2.kind) and v1.kind in (VerdictKind.DIVERGENT_POS, VerdictKind.DIVERGENT_NEG)
            if same:
                st = Status.SATISFIED
            elif VerdictKind.INCONCLUSIVE in (v1.kind, v2.kind):
                st = Status.INCONCLUSIVE
            else:
                st = Status.VIOLATED
            div = ConditionVerdict(f"divergence_K={K:.12g}", st,
                                   "int (K q1 + q2) and int (K p1 + p2) diverge with a common sign",
                                   witness=v1.probes[-1] if st is Status.VIOLATED and v1.probes else None,
                                   evidence=v1 if not v1.divergent_pos else v2)
            conds = [ident, div]
        if all(c.status is Status.SATISFIED for c in conds):
            best = conds
            break
        if best is None or (any(c.status is Status.INCONCLUSIVE for c in conds)
                            and not any(c.status is Status.VIOLATED for c in conds)):
            best = conds
    report.conditions.extend(best or [])
    report.notes.append("roots K: " + ", ".join(f"{k:.12g}" for k in roots))
    return report


def check_thm31(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    t0 = spec.t0
    a1 = inequality("A1", "r >= 0", spec.r, t0, cfg)
    b1 = integral_condition("B1", "I(t0) = +oo", i_integral(spec, cfg), "divergent")
    c1 = _both(_per_component(spec, lambda rk, k: kernel_condition(
        spec, f"C1[k={k}]", "", lambda t: spec.p(t) * np.abs(rk(t)), spec.q, cfg, "divergent")),
        "C1", "int p|r_k| (int_t0^t exp(int_tau^t q/p) dtau/p) dt = +oo")
    return CriterionReport("thm31", [a1, b1, c1])


def support_activity(r: Func, t0: float, cfg: ProbeConfig, per_window: int = 64) -> ConditionVerdict:
    """|r| exceeds the floor somewhere in the last dyadic window.

    Inactive earlier windows are listed in the note.
    """
    edges = cfg.horizons(t0)
    lows = np.concatenate([[t0], edges[:-1]])
    inactive = []
    peak = 0.0
    for lo, hi in zip(lows, edges):
        ts = np.linspace(lo, hi, per_window)
        try:
            with np.errstate(all="ignore"):
                vals = np.abs(np.asarray(r(ts), float))
        except DomainFault as exc:
            return ConditionVerdict("support", Status.INCONCLUSIVE, "r has unbounded support",
                                    note=f"evaluation fault at t={exc.t}")
        if not np.all(np.isfinite(vals)):
            return ConditionVerdict("support", Status.INCONCLUSIVE, "r has unbounded support",
                                    note=f"non-finite r on [{lo:.6g}, {hi:.6g}]")
        peak = float(np.max(vals))
        if not peak > ACTIVITY_FLOOR:
            inactive.append(f"[{lo:.6g}, {hi:.6g}]")
    note = ("inactive windows: " + ", ".join(inactive)) if inactive else ""
    if not peak > ACTIVITY_FLOOR:
        return ConditionVerdict("support", Status.VIOLATED, "r has unbounded support",
                                witness=(float(edges[-1]), peak),
                                note=f"max |r| <= {ACTIVITY_FLOOR:g} on the last window; " + note)
    return ConditionVerdict("support", Status.SATISFIED, "r has unbounded support", note=note)


def check_thm32(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    t0 = spec.t0
    a1 = inequality("A1", "r >= 0", spec.r, t0, cfg)
    support = support_activity(spec.r, t0, cfg)
    i0 = integral_condition("I0", "I0 < +oo", i0_integral(spec, cfg), "convergent")
    if support.status is Status.VIOLATED or i0.status is Status.VIOLATED:
        st = Status.VIOLATED
    elif support.status is Status.SATISFIED and i0.status is Status.SATISFIED:
        st = Status.SATISFIED
    else:
        st = Status.INCONCLUSIVE
    parts = (support, i0)
    bad = next((c for c in parts if c.status is Status.VIOLATED), None) \
        or next((c for c in parts if c.status is not Status.SATISFIED), i0)
    a2 = ConditionVerdict("A2", st, "r has unbounded support and I0 < +oo",
                          witness=bad.witness if st is Status.VIOLATED else None,
                          evidence=i0.evidence, note=bad.note or ("" if st is Status.SATISFIED else bad.id))
    b2 = integral_condition("B2", "I(t0) < +oo", i_integral(spec, cfg), "convergent")
    rate = lambda t: spec.q(t) / spec.p(t)
    c2 = _both(_per_component(spec, lambda rk, k: integral_condition(
        f"C2[k={k}]", "", calculus.probe_exp_weighted(lambda t: spec.p(t) * np.abs(rk(t)), rate, t0, cfg),
        "divergent")), "C2", "int p|r_k| exp(int q/p) dt = +oo")
    return CriterionReport("thm32", [a1, a2, b2, c2])


def _needs_gamma(theorem: str, spec: SystemSpec) -> Optional[CriterionReport]:
    if spec.gamma is None:
        rep = CriterionReport(theorem, [ConditionVerdict("gamma", Status.INCONCLUSIVE, "gamma required")],
                              notes=["gamma required"])
        return rep
    try:
        spec.gamma.derivative()
    except NonDifferentiable as exc:
        return CriterionReport(theorem, [ConditionVerdict("gamma", Status.INCONCLUSIVE,
                                                          "gamma must be differentiable", note=str(exc))],
                               notes=["gamma not differentiable"])
    return None


def check_thm33(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    missing = _needs_gamma("thm33", spec)
    if missing:
        return missing
    t0, p, q, r, g = spec.t0, spec.p, spec.q, spec.r, spec.gamma
    dg = g.derivative()
    lower = lambda t: dg(t) + q(t) / p(t) * g(t) - g(t) ** 2 / p(t)
    a3_low = inequality("A3", "", lambda t: r(t) - lower(t), t0, cfg)
    a3_up = inequality("A3", "", lambda t: -r(t), t0, cfg)
    a3 = _both([a3_low, a3_up], "A3", "gamma' + (q/p) gamma - gamma^2/p <= r <= 0")
    a30_ineq = inequality("A3^0", "", lambda t: dg(t) + q(t) / p(t) * g(t), t0, cfg)
    g0 = float(g(t0))
    a30_init = ConditionVerdict("A3^0", Status.SATISFIED if g0 >= -INEQ_TOL else Status.VIOLATED, "",
                                witness=None if g0 >= -INEQ_TOL else (t0, g0))
    a30 = _both([a30_ineq, a30_init], "A3^0", "gamma' + (q/p) gamma >= 0 and gamma(t0) >= 0")
    a31 = integral_condition("A3^1", "int gamma/p = +oo",
                             calculus.probe_improper(lambda t: g(t) / p(t), t0, cfg), "divergent")
    w = lambda t: q(t) - 4.0 * g(t)
    b3 = _both(_per_component(spec, lambda rk, k: kernel_condition(
        spec, f"B3[k={k}]", "", lambda t: p(t) * np.abs(rk(t)), w, cfg, "divergent")),
        "B3", "int p|r_k| (int_t0^t exp(int_tau^t (q - 4 gamma)/p) dtau/p) dt = +oo")
    return CriterionReport("thm33", [a3, a30, a31, b3])


D4_NOTE = ("D4 is evaluated as divergence (= +oo): the proof derives divergence from D4, "
           "while the typeset statement ends with < +oo")


def r_gamma(spec: SystemSpec) -> Func:
    p, q, r, g = spec.p, spec.q, spec.r, spec.gamma
    dg = g.derivative()
    return lambda t: dg(t) + g(t) ** 2 / p(t) + q(t) / p(t) * g(t) + r(t)


def check_thm34(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    missing = _needs_gamma("thm34", spec)
    if missing:
        return missing
    t0, p, q, g = spec.t0, spec.p, spec.q, spec.gamma
    rg = r_gamma(spec)
    a4 = inequality("A4", "r_gamma = gamma' + gamma^2/p + (q/p) gamma + r <= 0", rg, t0, cfg, sign=-1)
    w = lambda t: 2.0 * g(t) + q(t)
    b4 = kernel_condition(spec, "B4", "int |r_gamma| (int_t0^t exp(int_tau^t (2 gamma + q)/p) dtau/p) dt < +oo",
                          lambda t: np.abs(rg(t)), w, cfg, "convergent")
    c4 = integral_condition("C4", "nu_gamma(t0) = +oo", riccati.nu(spec.riccati(), g, t0, cfg), "divergent")
    d4 = _both(_per_component(spec, lambda rk, k: kernel_condition(
        spec, f"D4[k={k}]", "", lambda t: p(t) * np.abs(rk(t)), w, cfg, "divergent")),
        "D4", "int p|r_k| (int_t0^t exp(int_tau^t (2 gamma + q)/p) dtau/p) dt = +oo")
    report = CriterionReport("thm34", [a4, b4, c4, d4], notes=[D4_NOTE])
    if a4.status is Status.VIOLATED:
        t, v = a4.witness
        report.notes.append(f"r_gamma = {v:.6g} > 0 at t = {t:.6g}")
    return report


CHECKERS = {
    "whyburn": check_whyburn,
    "abdullah": lambda spec, cfg: _abdullah_from_spec(spec, cfg),
    "thm31": check_thm31,
    "thm32": check_thm32,
    "thm33": check_thm33,
    "thm34": check_thm34,
}
THEOREMS = tuple(CHECKERS)


def _abdullah_from_spec(spec: SystemSpec, cfg: ProbeConfig) -> CriterionReport:
    t0 = spec.t0
    form = [inequality("form_p", "p == 1", lambda t: -np.abs(spec.p(t) - 1.0), t0, cfg),
            inequality("form_q", "q == 0", lambda t: -np.abs(spec.q(t)), t0, cfg)]
    if any(c.status is not Status.SATISFIED for c in form):
        return CriterionReport("abdullah", form, notes=["the adapter needs p == 1 and q == 0"])
    return check_abdullah(AbdullahSystem.from_spec(spec), cfg)


def run(theorem: str, spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> CriterionReport:
    try:
        return CHECKERS[theorem](spec, cfg)
    except (DomainFault, calculus.IntegrationError, ArithmeticError, ValueError) as exc:
        return CriterionReport(theorem, [], notes=[f"evaluation failed: {exc}"], forced=Overall.INCONCLUSIVE)


def run_all(spec: SystemSpec, cfg: ProbeConfig = ProbeConfig()) -> list[CriterionReport]:
    return [run(name, spec, cfg) for name in THEOREMS]


def exit_code(reports: Sequence[CriterionReport]) -> int:
    overall = [r.overall for r in reports]
    if any(o is Overall.APPLIES for o in overall):
        return 0
    if all(o is Overall.INCONCLUSIVE for o in overall):
        return 2
    return 1
