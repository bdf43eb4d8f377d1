"""Quadrature, cumulative antiderivatives and improper-integral probes.

Everything here runs on one panel engine.  The engine integrates

    F(t) = int_a^t outer(tau) * y(tau) dtau,    y' = rate * y + source,  y(a) = y0 >= 0

over a set of panels.  Special cases:

* plain quadrature: ``rate = source = 0``, ``y0 = 1``;
* exponentially weighted integrals ``int g exp(int rate)``: ``source = 0``;
* the nested kernels ``int_a^t exp(int_tau^t w/p) dtau/p``: ``rate = w/p``,
  ``source = 1/p``, ``y0 = 0``.

On every panel the homogeneous factor ``exp(int rate)`` is computed exactly from
a high-order cumulative quadrature of ``rate`` and kept in log form, and the
particular part is obtained by Radau IIA collocation.  Radau IIA is L-stable, so
kernels with a strongly negative ``rate`` (boundary layers of width 1/|rate|)
are tracked on their slow manifold without resolving the layer.  Panel values
are stored as ``exp(scale) * mantissa`` so that neither huge nor tiny
exponentials overflow.

Panel acceptance compares the main rule (``S_MAIN`` stages) with a half-order
rule on the same panel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre as L

from .expr import DomainFault

Func = Callable[[np.ndarray], np.ndarray]

S_MAIN = 12
S_CHECK = 6


class IntegrationError(RuntimeError):
    pass


class BudgetExhausted(IntegrationError):
    def __init__(self, message: str, partial: float):
        super().__init__(message)
        self.partial = partial


# --------------------------------------------------------------------------
# Rules on [-1, 1]: left endpoint plus right Radau points


@dataclass(frozen=True)
class _Rule:
    z: np.ndarray  # nodes, z[0] = -1, z[-1] = 1
    w: np.ndarray  # quadrature weights over [-1, 1]
    cum: np.ndarray  # cum[i] . f = int_{-1}^{z_i} interpolant(f)
    dmat: np.ndarray  # differentiation matrix
    bary: np.ndarray  # barycentric weights


def _make_rule(s: int) -> _Rule:
    c = np.zeros(s + 1)
    c[s], c[s - 1] = 1.0, -1.0  # P_s - P_{s-1}: right Radau points
    radau = np.sort(np.real(L.legroots(c)))
    radau[-1] = 1.0
    z = np.concatenate([[-1.0], radau])
    n = len(z)
    vander = L.legvander(z, n - 1)
    inv = np.linalg.inv(vander)
    vint = np.empty((n, n))
    vder = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        vint[:, j] = L.legval(z, L.legint(e, lbnd=-1.0))
        vder[:, j] = L.legval(z, L.legder(e))
    cum = vint @ inv
    dmat = vder @ inv
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    return _Rule(z, cum[-1].copy(), cum, dmat, bary)


RULE = _make_rule(S_MAIN)
RULE_CHECK = _make_rule(S_CHECK)


def _interp(rule: _Rule, values: np.ndarray, zq: np.ndarray) -> np.ndarray:
    """Barycentric interpolation; values (k, n), zq (k,) -> (k,)."""
    d = zq[:, None] - rule.z[None, :]
    exact = d == 0.0
    d = np.where(exact, 1.0, d)
    q = rule.bary[None, :] / d
    out = np.sum(q * values, axis=1) / np.sum(q, axis=1)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = values[hit][exact[hit]]
    return out


def _log(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.where(x > 0, x, 0.0))


def _lae(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


# --------------------------------------------------------------------------
# Configuration and verdicts


@dataclass(frozen=True)
class ProbeConfig:
    horizon_base: float = 1.0
    horizon_count: int = 20
    div_threshold: float = 1e6
    conv_tol: float = 1e-6
    rtol: float = 1e-10
    max_panels: int = 200_000
    # slow divergence: dyadic increments bounded below and not shrinking
    slow_div_floor: float = 1e-3
    slow_div_ratio: float = 0.98

    def horizons(self, a: float) -> np.ndarray:
        return a + self.horizon_base * 2.0 ** np.arange(self.horizon_count + 1)

    def span(self) -> float:
        return self.horizon_base * 2.0**self.horizon_count


class VerdictKind(str, Enum):
    DIVERGENT_POS = "Divergent(+inf)"
    DIVERGENT_NEG = "Divergent(-inf)"
    CONVERGENT = "Convergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class IntegralVerdict:
    kind: VerdictKind
    probes: list[tuple[float, float]]
    oscillation_flag: bool = False
    limit: Optional[float] = None
    tail_bound: Optional[float] = None
    diagnostic: str = ""

    @property
    def divergent_pos(self) -> bool:
        return self.kind is VerdictKind.DIVERGENT_POS

    @property
    def convergent(self) -> bool:
        return self.kind is VerdictKind.CONVERGENT

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "limit": _jnum(self.limit),
            "tail_bound": _jnum(self.tail_bound),
            "oscillation_flag": self.oscillation_flag,
            "diagnostic": self.diagnostic,
            "probes": [[_jnum(t), _jnum(v)] for t, v in self.probes],
        }


def _jnum(x):
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


# --------------------------------------------------------------------------
# Panel engine


@dataclass
class PanelSolution:
    """Accepted panels with node values; valid on [a, valid_to]."""

    edges: np.ndarray
    scale: np.ndarray  # (k,) log scale of y on each panel
    mant: np.ndarray  # (k, n) y = exp(scale) * mant at nodes
    g_mant: np.ndarray  # (k, n) outer * mant
    cum_nodes: np.ndarray  # (k, n) F at nodes
    valid_to: float
    status: str = "complete"  # complete | budget | fault | overflow
    diagnostic: str = ""
    err: float = 0.0

    @property
    def a(self) -> float:
        return float(self.edges[0])

    @property
    def values_at_edges(self) -> np.ndarray:
        if len(self.cum_nodes) == 0:
            return np.zeros(1)
        return np.concatenate([[0.0], self.cum_nodes[:, -1]])

    def _locate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < self.edges[0] - 1e-12 * max(1, abs(self.edges[0]))) or np.any(
            t > self.edges[-1] * (1 + 1e-15) + 1e-12
        ):
            raise ValueError("point outside the cumulative grid")
        k = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.edges) - 2)
        x, h = self.edges[k], self.edges[k + 1] - self.edges[k]
        z = np.clip(2.0 * (t - x) / h - 1.0, -1.0, 1.0)
        return t, k, z

    def cumulative(self, t):
        t_arr, k, z = self._locate(t)
        out = _interp(RULE, self.cum_nodes[k], z)
        return out if np.ndim(t) else float(out[0])

    def integrand(self, t):
        t_arr, k, z = self._locate(t)
        with np.errstate(over="ignore"):
            out = _scaled(self.scale[k], _interp(RULE, self.g_mant[k], z))
        return out if np.ndim(t) else float(out[0])

    def log_y(self, t):
        t_arr, k, z = self._locate(t)
        m = _interp(RULE, self.mant[k], z)
        out = self.scale[k] + _log(m)
        return out if np.ndim(t) else float(out[0])


def _scaled(lam, m):
    """exp(lam) * m, with an exactly zero mantissa contributing zero."""
    return np.where(m == 0, 0.0, np.exp(lam) * m)


def _eval(fn: Optional[Func], pts: np.ndarray, default: float) -> np.ndarray:
    if fn is None:
        return np.full(pts.shape, default)
    vals = np.asarray(fn(pts.ravel()), dtype=float)
    vals = np.broadcast_to(vals, (pts.size,)).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        bad = np.flatnonzero(~np.isfinite(vals.ravel()))[0]
        raise DomainFault("non-finite integrand", float(pts.ravel()[bad]))
    return vals


def _rule_stats(rule: _Rule, x, h, outer, rate, source):
    """Homogeneous log-factor, scaled particular solution and outer values."""
    hh = 0.5 * h
    pts = x[:, None] + hh[:, None] * (rule.z[None, :] + 1.0)
    pts[:, -1] = x + h
    a = _eval(rate, pts, 0.0)
    dq = hh[:, None] * (a @ rule.cum.T)  # int_x^node rate
    qmax = np.maximum(dq.max(axis=1), 0.0)
    hs = np.exp(dq - qmax[:, None])
    if source is None:
        ps = np.zeros_like(hs)
    else:
        # Collocate the homogeneous part too: y(x) * H + P is then the collocation
        # solution of the full problem, so boundary layers of H and P cancel.
        b = _eval(source, pts, 0.0)
        m = rule.dmat[None, 1:, 1:] - hh[:, None, None] * _diag(a[:, 1:])
        eq = np.exp(-qmax)[:, None]
        rhs = np.stack([-rule.dmat[1:, 0][None, :] * eq, hh[:, None] * b[:, 1:] * eq], axis=-1)
        with np.errstate(all="ignore"):
            sol = np.linalg.solve(m, rhs)
        first = np.zeros((len(x), 1))
        hs_col = np.concatenate([eq, sol[..., 0]], axis=1)
        ps = np.concatenate([first, sol[..., 1]], axis=1)
        # exact factor kept only at the left node and for the log recurrence
        hs = hs_col
    o = _eval(outer, pts, 1.0)
    return dq, qmax, hs, ps, o


def _diag(v):
    k, n = v.shape
    out = np.zeros((k, n, n))
    idx = np.arange(n)
    out[:, idx, idx] = v
    return out


class _Panels:
    """Growable per-panel storage for the refinement loop."""

    fields = ("x", "h", "dq_end", "dq_err", "qmax", "lp_end", "hs_end", "ps_end", "hs_err",
              "ps_err", "ih", "ip", "ah", "ap", "ih2", "ip2")

    def __init__(self, x, h):
        self.x = np.asarray(x, float)
        self.h = np.asarray(h, float)
        n = len(self.x)
        for f in self.fields[2:]:
            setattr(self, f, np.full(n, np.nan))
        self.done = np.zeros(n, bool)

    def take(self, keep):
        out = _Panels(self.x[keep], self.h[keep])
        for f in self.fields[2:]:
            setattr(out, f, getattr(self, f)[keep])
        out.done = self.done[keep]
        return out

    @staticmethod
    def concat(a, b):
        out = _Panels(np.concatenate([a.x, b.x]), np.concatenate([a.h, b.h]))
        for f in _Panels.fields[2:]:
            setattr(out, f, np.concatenate([getattr(a, f), getattr(b, f)]))
        out.done = np.concatenate([a.done, b.done])
        order = np.argsort(out.x, kind="stable")
        return out.take(order)


def _fill(p: _Panels, idx, outer, rate, source):
    with np.errstate(all="ignore"):
        _fill_unguarded(p, idx, outer, rate, source)


def _fill_unguarded(p: _Panels, idx, outer, rate, source):
    x, h = p.x[idx], p.h[idx]
    dq, qmax, hs, ps, o = _rule_stats(RULE, x, h, outer, rate, source)
    dq2, qmax2, hs2, ps2, o2 = _rule_stats(RULE_CHECK, x, h, outer, rate, source)
    # express the check rule on the main rule's scale
    rescale = np.exp(qmax2 - qmax)[:, None]
    hs2, ps2 = hs2 * rescale, ps2 * rescale
    hh = 0.5 * h
    p.dq_end[idx] = dq[:, -1]
    p.dq_err[idx] = np.abs(dq[:, -1] - dq2[:, -1])
    p.qmax[idx] = qmax
    p.hs_end[idx] = hs[:, -1]
    p.ps_end[idx] = ps[:, -1]
    p.lp_end[idx] = _log(ps[:, -1]) + qmax
    p.hs_err[idx] = hs[:, -1] - hs2[:, -1]
    p.ps_err[idx] = ps[:, -1] - ps2[:, -1]
    p.ih[idx] = hh * ((o * hs) @ RULE.w)
    p.ip[idx] = hh * ((o * ps) @ RULE.w)
    p.ah[idx] = hh * (np.abs(o * hs) @ RULE.w)
    p.ap[idx] = hh * (np.abs(o * ps) @ RULE.w)
    p.ih2[idx] = hh * ((o2 * hs2) @ RULE_CHECK.w)
    p.ip2[idx] = hh * ((o2 * ps2) @ RULE_CHECK.w)


def _approx_log_y(p: _Panels, ly0: float) -> np.ndarray:
    """ln y at left edges via a vectorized log-sum-exp recurrence."""
    lcum = np.concatenate([[0.0], np.cumsum(p.dq_end)])
    terms = np.concatenate([[ly0], p.lp_end - lcum[1:]])
    z = np.logaddexp.accumulate(terms)
    return (lcum + z)[:-1]


def _exact_log_y(p: _Panels, ly0: float) -> np.ndarray:
    """Sequential recurrence y_{k+1} = y_k H_k + P_k with the collocated H_k.

    H_k may be slightly negative on very stiff panels; the sum stays positive
    for accepted panels and is clamped at zero otherwise.
    """
    out = np.empty(len(p.x))
    ly = ly0
    lh = _log(np.abs(p.hs_end)).tolist()
    neg = (p.hs_end < 0).tolist()
    q = p.qmax.tolist()
    lp = p.lp_end.tolist()
    for k in range(len(out)):
        out[k] = ly
        a = ly + q[k] + lh[k]
        if not neg[k]:
            ly = _lae(a, lp[k])
        elif lp[k] > a:
            ly = lp[k] + math.log1p(-math.exp(a - lp[k]))
        else:
            ly = -math.inf
    return out


def solve_panels(
    a: float,
    b: float,
    *,
    outer: Optional[Func] = None,
    rate: Optional[Func] = None,
    source: Optional[Func] = None,
    y0: float = 1.0,
    breakpoints: Sequence[float] = (),
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_panels: int = 200_000,
    initial_split: int = 4,
    ytol: Optional[float] = None,
) -> PanelSolution:
    """Run the panel engine on [a, b]; ``breakpoints`` are kept as panel edges."""
    if not b > a:
        raise ValueError("need a < b")
    bps = np.unique(np.concatenate([[a], [x for x in breakpoints if a < x < b], [b]]))
    xs, hs = [], []
    for lo, hi in zip(bps[:-1], bps[1:]):
        step = (hi - lo) / initial_split
        for i in range(initial_split):
            xs.append(lo + i * step)
            hs.append(step if i < initial_split - 1 else hi - (lo + i * step))
    panels = _Panels(xs, hs)
    ly0 = math.log(y0) if y0 > 0 else -math.inf
    ytol = 100.0 * rtol if ytol is None else ytol
    status, diagnostic = "complete", ""
    cut = b

    def truncate(limit):
        nonlocal cut
        allowed = bps[bps <= limit]
        cut = float(allowed[-1]) if len(allowed) else a
        return panels.take(panels.x < cut - 1e-300)

    while True:
        todo = np.flatnonzero(~panels.done)
        if len(todo) == 0:
            break
        try:
            _fill(panels, todo, outer, rate, source)
        except DomainFault as exc:
            fault_t = exc.t if exc.t is not None else a
            status, diagnostic = "fault", str(exc)
            panels = truncate(fault_t)
            if len(panels.x) == 0:
                break
            continue
        ly = _approx_log_y(panels, ly0)
        c = np.maximum(ly, 0.0)
        with np.errstate(all="ignore"):
            eh = np.exp(ly - c)
            ep = np.exp(-c)
            lam = panels.qmax + c
            i_m = eh * panels.ih + ep * panels.ip
            contrib = _scaled(lam, i_m)
            fcum = np.concatenate([[0.0], np.cumsum(contrib)])[:-1]
            lnf = _log(np.abs(fcum))
            a_m = eh * panels.ah + ep * panels.ap
            err_int = np.abs(eh * (panels.ih - panels.ih2) + ep * (panels.ip - panels.ip2))
            tol_int = rtol * (a_m + np.exp(lnf - lam)) + atol * panels.h / (b - a) * np.exp(-lam)
            y_end = np.abs(eh * panels.hs_end + ep * panels.ps_end)
            ok = (err_int <= tol_int) | (a_m == 0) & (err_int == 0)
            y_err = np.abs(eh * panels.hs_err + ep * panels.ps_err)
            ok &= y_err <= ytol * y_end + 1e-300
            ok &= panels.dq_err <= rtol * (1.0 + np.abs(panels.dq_end))
        tiny = panels.h <= 1e-13 * np.maximum(1.0, np.abs(panels.x))
        ok |= tiny
        bad = todo[~ok[todo]]
        panels.done[todo[ok[todo]]] = True
        if len(bad) == 0:
            continue
        if len(panels.x) + len(bad) > max_panels:
            status = "budget"
            diagnostic = f"panel budget {max_panels} exhausted near t={panels.x[bad[0]]:.6g}"
            panels = truncate(float(panels.x[bad].min()))
            panels = panels.take(panels.done)
            break
        half = panels.h[bad] / 2
        kids = _Panels(np.concatenate([panels.x[bad], panels.x[bad] + half]),
                       np.concatenate([half, panels.h[bad] - half]))
        keep = np.ones(len(panels.x), bool)
        keep[bad] = False
        panels = _Panels.concat(panels.take(keep), kids)

    if len(panels.x) == 0:
        empty = np.zeros((0, len(RULE.z)))
        return PanelSolution(np.array([a]), np.zeros(0), empty, empty, empty, a, status, diagnostic)
    return _finish(panels, ly0, outer, rate, source, status, diagnostic, rtol)


def _finish(panels, ly0, outer, rate, source, status, diagnostic, rtol):
    # recompute node values on the accepted panels
    with np.errstate(all="ignore"):
        dq, qmax, hs, ps, o = _rule_stats(RULE, panels.x, panels.h, outer, rate, source)
    ly = _exact_log_y(panels, ly0)
    c = np.maximum(ly, 0.0)
    with np.errstate(all="ignore"):
        mant = np.exp(ly - c)[:, None] * hs + np.exp(-c)[:, None] * ps
        scale = qmax + c
        g = o * mant
        hh = 0.5 * panels.h
        local = hh[:, None] * (g @ RULE.cum.T)
        contrib = _scaled(scale, local[:, -1])
        fstart = np.concatenate([[0.0], np.cumsum(contrib)])[:-1]
        cum_nodes = fstart[:, None] + _scaled(scale[:, None], local)
    edges = np.concatenate([panels.x, [panels.x[-1] + panels.h[-1]]])
    finite = np.all(np.isfinite(cum_nodes), axis=1) & np.all(np.isfinite(mant), axis=1)
    if not finite.all():
        first = int(np.flatnonzero(~finite)[0])
        status, diagnostic = "overflow", f"overflow near t={panels.x[first]:.6g}"
        keep = slice(0, first)
        panels_edges = edges[: first + 1]
        return PanelSolution(panels_edges, scale[keep], mant[keep], g[keep], cum_nodes[keep],
                             float(panels_edges[-1]), status, diagnostic)
    err = float(np.sum(np.abs(contrib))) * rtol
    return PanelSolution(edges, scale, mant, g, cum_nodes, float(edges[-1]), status, diagnostic, err)


# --------------------------------------------------------------------------
# Public operations


def integrate(f: Func, a: float, b: float, tol: float = 1e-10, max_panels: int = 20_000):
    """Adaptive quadrature of ``f`` over [a, b]; returns (value, error estimate)."""
    if not a < b:
        raise ValueError("integrate requires a < b")
    sol = solve_panels(a, b, outer=f, rtol=1e-14, atol=tol, max_panels=max_panels)
    if sol.status == "fault":
        raise DomainFault(sol.diagnostic)
    value = float(sol.values_at_edges[-1])
    if sol.status != "complete":
        raise BudgetExhausted(f"quadrature budget exhausted: {sol.diagnostic}", value)
    return value, max(sol.err, 1e-16 * abs(value))


@dataclass
class CumulativeGrid:
    """F(x) = int_a^x of an integrand, with knots at panel edges."""

    solution: PanelSolution

    @property
    def knots(self) -> np.ndarray:
        return self.solution.edges

    @property
    def values(self) -> np.ndarray:
        return self.solution.values_at_edges

    @property
    def end(self) -> float:
        return self.solution.valid_to

    def __call__(self, t):
        return self.solution.cumulative(t)

    def integrand(self, t):
        return self.solution.integrand(t)


def cumulative(f: Func, a: float, b: float, rtol: float = 1e-12, breakpoints=()) -> CumulativeGrid:
    return CumulativeGrid(solve_panels(a, b, outer=f, rtol=rtol, breakpoints=breakpoints))


def _probe_solution(sol: PanelSolution, a: float, cfg: ProbeConfig) -> IntegralVerdict:
    horizons = cfg.horizons(a)
    horizons = horizons[horizons <= sol.valid_to * (1 + 1e-14) + 1e-300]
    if len(horizons) == 0:
        return IntegralVerdict(VerdictKind.INCONCLUSIVE, [], diagnostic=sol.diagnostic or "no probes")
    values = sol.cumulative(horizons) if len(sol.edges) > 1 else np.zeros(len(horizons))
    probes = [(float(t), float(v)) for t, v in zip(horizons, values)]
    edge_vals = sol.values_at_edges
    return classify(probes, sol.edges, edge_vals, cfg, sol.status, sol.diagnostic)


def classify(probes, edge_t, edge_vals, cfg: ProbeConfig, status="complete", diagnostic=""):
    """Three-valued verdict from a probe table and the dense cumulative values."""
    n = len(probes)
    if n < 4:
        return IntegralVerdict(VerdictKind.INCONCLUSIVE, probes,
                               diagnostic=diagnostic or "too few probe horizons")
    T = np.array([p[0] for p in probes])
    F = np.array([p[1] for p in probes])
    d = np.diff(F)
    a = T[0] - (T[1] - T[0])
    last_t = T[-1]
    decade = edge_t >= a + (last_t - a) / 16.0
    decade &= edge_t <= last_t * (1 + 1e-14) + 1e-300
    window = edge_vals[decade[: len(edge_vals)]]
    steps = np.diff(edge_vals[edge_t <= last_t * (1 + 1e-14) + 1e-300])
    scale = max(np.max(np.abs(edge_vals)), 1e-300)
    noise = 1e-12 * scale
    non_monotone = bool(np.any(steps > noise) and np.any(steps < -noise))
    bounded = bool(np.max(np.abs(window)) < cfg.div_threshold)
    osc = non_monotone and bounded

    last3 = d[-3:]
    for sign, kind in ((1.0, VerdictKind.DIVERGENT_POS), (-1.0, VerdictKind.DIVERGENT_NEG)):
        s_last = sign * last3
        grows = np.all(s_last > 0) and (
            np.all(np.diff(s_last) >= 0) or np.min(s_last) >= cfg.slow_div_floor
        )
        if non_monotone:
            fast = np.min(sign * window) > cfg.div_threshold
        else:
            fast = sign * F[-1] > cfg.div_threshold and grows
        ratios = s_last[1:] / s_last[:-1] if np.all(s_last > 0) else np.zeros(2)
        slow = (
            np.all(s_last >= cfg.slow_div_floor)
            and np.all(ratios >= cfg.slow_div_ratio)
            and (not non_monotone or np.min(sign * window) > sign * F[-4])
        )
        if fast or slow:
            why = "threshold exceeded" if fast else "dyadic increments bounded below"
            return IntegralVerdict(kind, probes, osc, diagnostic=_join(diagnostic, why))

    dj, dprev = abs(d[-1]), abs(d[-2])
    if dj == 0.0:
        tail = 0.0
    elif dprev > 0 and dj < dprev:
        rho = dj / dprev
        tail = dj * rho / (1.0 - rho)
    else:
        tail = math.inf
    half = F[-1] - F[(n - 1) // 2]
    amplitude = float(np.max(window) - np.min(window)) if len(window) else 0.0
    ok = tail < cfg.conv_tol
    if non_monotone:
        ok = ok and amplitude < cfg.conv_tol
    else:
        ok = ok and abs(half) <= cfg.conv_tol
    if ok and status in ("complete",):
        limit = F[-1] + math.copysign(tail, d[-1]) if tail else F[-1]
        return IntegralVerdict(VerdictKind.CONVERGENT, probes, osc, limit, tail, diagnostic)
    why = "oscillating cumulative values" if osc else "no divergence or convergence evidence"
    return IntegralVerdict(VerdictKind.INCONCLUSIVE, probes, osc, diagnostic=_join(diagnostic, why))


def _join(*parts):
    return "; ".join(p for p in parts if p)


def _probe(a, cfg, **kw) -> IntegralVerdict:
    horizons = cfg.horizons(a)
    sol = solve_panels(a, float(horizons[-1]), breakpoints=horizons[:-1], rtol=cfg.rtol,
                       max_panels=cfg.max_panels, **kw)
    return _probe_solution(sol, a, cfg)


def probe_improper(f: Func, a: float, cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """Classify int_a^oo f as divergent, convergent or inconclusive."""
    return _probe(a, cfg, outer=f)


def probe_exp_weighted(g: Optional[Func], rate: Func, a: float,
                       cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """Probe int_a^oo g(t) exp(int_a^t rate) dt with the exponent kept in log form."""
    return _probe(a, cfg, outer=g, rate=rate)


def weighted_double(outer_weight: Func, w: Func, p: Func, a: float,
                    cfg: ProbeConfig = ProbeConfig()) -> IntegralVerdict:
    """Probe int_a^oo outer(t) (int_a^t exp(int_tau^t w/p ds) dtau/p(tau)) dt."""
    rate = lambda t: w(t) / p(t)
    source = lambda t: 1.0 / p(t)
    return _probe(a, cfg, outer=outer_weight, rate=rate, source=source, y0=0.0)


def inner_kernel(w: Func, p: Func, a: float, b: float, rtol: float = 1e-10) -> PanelSolution:
    """Panel solution whose ``log_y`` is ln int_a^t exp(int_tau^t w/p) dtau/p."""
    return solve_panels(a, b, rate=lambda t: w(t) / p(t), source=lambda t: 1.0 / p(t),
                        y0=0.0, rtol=rtol)


def with_overrides(cfg: ProbeConfig, **kw) -> ProbeConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
