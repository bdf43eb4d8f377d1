"""Command line entry point: check, simulate, riccati, reduce.

Configuration files are INI-style with quoted expression strings::

    [problem]
    t0 = 1
    p  = "1"
    q  = "0"
    r  = "-t^2"
    r1 = "1"
    r2 = "1"

    [gamma]
    gamma = "2*t"

Exit codes: 0, 1, 2 as documented per command; 64 for usage errors and 65
for invalid configuration files.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import calculus, criteria, empirical, ode, riccati, transforms
from .calculus import ProbeConfig
from .criteria import AssumptionViolation, SystemSpec
from .empirical import EvidenceConfig
from .expr import DomainFault, ParseError, ScalarField

EX_USAGE = 64
EX_DATAERR = 65

PROBLEM_KEYS = ("t0", "p", "q", "r", "r1", "r2")
PROBE_KEYS = {f.name: f.type for f in fields(ProbeConfig)}
SIMULATE_KEYS = ("tol", "windows", "seed", "n_random")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    spec: SystemSpec
    probe: ProbeConfig
    evidence: EvidenceConfig
    path: str = ""
    warnings: tuple[str, ...] = ()


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def _number(section: str, key: str, raw: str, kind=float):
    try:
        val = kind(_unquote(raw))
    except ValueError:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from None
    if kind is float and not math.isfinite(val):
        raise ConfigError(f"[{section}] {key}: must be finite")
    return val


def _field(name: str, source: str, t0: float) -> ScalarField:
    try:
        return ScalarField.from_source(source, t0)
    except ParseError as exc:
        raise ConfigError(f"{name}: parse error in {source!r}: {exc}") from None


def load_config(path: str | Path, probe_overrides: Optional[dict] = None,
                strict: bool = True) -> ProblemConfig:
    """Parse and validate a config file.

    With ``strict=False`` a violated standing assumption is recorded in
    ``warnings`` instead of raising; direct simulation does not need it.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not parser.has_section("problem"):
        raise ConfigError("missing section [problem]")
    prob = parser["problem"]
    for key in PROBLEM_KEYS:
        if key not in prob:
            raise ConfigError(f"missing key '{key}' in [problem]")
    t0 = _number("problem", "t0", prob["t0"])
    coeffs = {k: _field(k, _unquote(prob[k]), t0) for k in PROBLEM_KEYS[1:]}
    gamma = None
    if parser.has_section("gamma"):
        if "gamma" not in parser["gamma"]:
            raise ConfigError("missing key 'gamma' in [gamma]")
        gamma = _field("gamma", _unquote(parser["gamma"]["gamma"]), t0)
    spec = SystemSpec(t0, gamma=gamma, **coeffs)

    probe = ProbeConfig()
    if parser.has_section("probe"):
        kw = {}
        for key, raw in parser["probe"].items():
            if key not in PROBE_KEYS:
                raise ConfigError(f"[probe] unknown key '{key}'")
            kind = int if key in ("horizon_count", "max_panels") else float
            kw[key] = _number("probe", key, raw, kind)
        probe = replace(probe, **kw)
    if probe_overrides:
        probe = calculus.with_overrides(probe, **probe_overrides)

    evidence = EvidenceConfig()
    if parser.has_section("simulate"):
        sim = parser["simulate"]
        for key in sim:
            if key not in SIMULATE_KEYS:
                raise ConfigError(f"[simulate] unknown key '{key}'")
        kw = {}
        if "tol" in sim:
            kw["tol"] = _number("simulate", "tol", sim["tol"])
        if "seed" in sim:
            kw["seed"] = _number("simulate", "seed", sim["seed"], int)
        if "n_random" in sim:
            kw["n_random"] = _number("simulate", "n_random", sim["n_random"], int)
        if "windows" in sim:
            parts = [x for x in _unquote(sim["windows"]).split(",") if x.strip()]
            lengths = tuple(_number("simulate", "windows", x) for x in parts)
            if not lengths or any(b <= a for a, b in zip((0.0,) + lengths, lengths)):
                raise ConfigError("[simulate] windows: need increasing positive lengths")
            kw["lengths"] = lengths
        evidence = replace(evidence, **kw)

    warnings: list[str] = []
    try:
        for name, f in [*coeffs.items(), *([("gamma", gamma)] if gamma else [])]:
            f.check_domain(min(probe.span(), 100.0))
        spec.check_assumptions(probe.span())
    except DomainFault as exc:
        raise ConfigError(f"coefficient {name} cannot be evaluated: {exc}") from None
    except AssumptionViolation as exc:
        msg = f"assumption violated: {exc} (witness t={exc.t!r})"
        if strict:
            raise ConfigError(msg) from None
        warnings.append(msg)
    return ProblemConfig(spec, probe, evidence, str(path), tuple(warnings))


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="problem configuration file")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    common.add_argument("--seed", type=int, help="seed for random initial conditions")
    common.add_argument("--output", "-o", help="write the JSON document here instead of stdout")
    g = common.add_argument_group("probe overrides")
    g.add_argument("--probe-horizon-base", type=float, dest="horizon_base")
    g.add_argument("--probe-horizon-count", type=int, dest="horizon_count")
    g.add_argument("--probe-div-threshold", type=float, dest="div_threshold")
    g.add_argument("--probe-conv-tol", type=float, dest="conv_tol")
    g.add_argument("--probe-rtol", type=float, dest="rtol")
    g.add_argument("--probe-max-panels", type=int, dest="max_panels")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oscrit", description="Oscillation criteria for (p Phi')' + q Phi' + R Phi = 0.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    c = sub.add_parser("check", parents=[common], help="evaluate oscillation criteria")
    c.add_argument("--theorem", default="all", choices=("all",) + criteria.THEOREMS)

    s = sub.add_parser("simulate", parents=[common], help="direct integration and zero counting")
    s.add_argument("--tmax", type=float, help="end of the CSV trajectory (default: last window)")
    s.add_argument("--ic", help="phi1,phi2,psi1,psi2 for the CSV trajectory (default 1,0,0,0)")
    s.add_argument("--csv", help="write the trajectory CSV here")
    s.add_argument("--counts-csv", help="write the per-window zero counts here")

    r = sub.add_parser("riccati", parents=[common], help="estimate the lower extremal initial value")
    r.add_argument("--horizon", type=float, default=50.0, help="search horizon beyond t0")
    r.add_argument("--tol", type=float, default=1e-6, help="bisection tolerance")
    r.add_argument("--csv", help="write the estimate path CSV here")

    d = sub.add_parser("reduce", parents=[common], help="coefficients of the fourth-order equation")
    d.add_argument("--horizon", type=float, default=10.0,
                   help="length of the reduced interval; the Riccati search uses twice this")
    d.add_argument("--grid", type=int, default=101, help="number of s-grid points")
    d.add_argument("--component", type=int, default=2, choices=(1, 2))
    d.add_argument("--csv", help="write the coefficient CSV here instead of stdout")
    return parser


def _envelope(command: str, args, cfg: ProblemConfig) -> dict:
    doc = {"tool": "oscrit", "command": command, "config": cfg.spec.to_json(),
           "probe": asdict(cfg.probe)}
    if cfg.warnings:
        doc["warnings"] = list(cfg.warnings)
    if not args.deterministic:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def _emit(doc: dict, args) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_check(args, cfg: ProblemConfig) -> int:
    names = criteria.THEOREMS if args.theorem == "all" else (args.theorem,)
    reports = [criteria.run(n, cfg.spec, cfg.probe) for n in names]
    code = criteria.exit_code(reports)
    doc = _envelope("check", args, cfg)
    doc["reports"] = [r.to_json() for r in reports]
    doc["summary"] = [r.summary() for r in reports]
    doc["exit_code"] = code
    _emit(doc, args)
    return code


def _parse_ic(text: Optional[str], parser) -> np.ndarray:
    if text is None:
        return np.array([1.0, 0.0, 0.0, 0.0])
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        parser.error(f"--ic: not a list of numbers: {text!r}")
    if len(vals) != 4:
        parser.error(f"--ic needs 4 comma-separated values, got {len(vals)}")
    return np.array(vals)


def cmd_simulate(args, cfg: ProblemConfig, parser) -> int:
    ic = _parse_ic(args.ic, parser)
    ev_cfg = cfg.evidence if args.seed is None else replace(cfg.evidence, seed=args.seed)
    report = empirical.oscillation_evidence(cfg.spec, ev_cfg)
    tmax = args.tmax if args.tmax is not None else float(ev_cfg.windows(cfg.spec.t0)[-1])
    if not tmax > cfg.spec.t0:
        parser.error("--tmax must exceed t0")
    doc = _envelope("simulate", args, cfg)
    doc["evidence"] = report.to_json()
    try:
        tr = empirical.simulate(cfg.spec, ic, tmax, ev_cfg.tol)
        doc["trajectory"] = {"ic": ic.tolist(), "t_end": tr.t_end, "termination": type(tr.termination).__name__}
        if args.csv:
            _write(args.csv, tr.to_csv(["phi1", "phi2", "psi1", "psi2"]))
    except ode.StiffnessError as exc:
        doc["trajectory"] = {"ic": ic.tolist(), "t_end": exc.t, "termination": "StiffnessError"}
    if args.counts_csv:
        _write(args.counts_csv, report.counts_csv())
    _emit(doc, args)
    return {empirical.Evidence.CONSISTENT: 0, empirical.Evidence.COUNTEREXAMPLE: 1}.get(report.verdict, 2)


def cmd_riccati(args, cfg: ProblemConfig) -> int:
    spec = cfg.spec
    doc = _envelope("riccati", args, cfg)
    try:
        est = riccati.find_alpha_star(spec.riccati(), spec.t0, spec.t0 + args.horizon, tol=args.tol)
    except riccati.NoRegularSolutionFound as exc:
        doc["error"] = {"kind": "NoRegularSolutionFound", "message": str(exc)}
        _emit(doc, args)
        return 1
    doc["estimate"] = est.to_json()
    if args.csv:
        _write(args.csv, est.path.to_csv())
    _emit(doc, args)
    return 0


def cmd_reduce(args, cfg: ProblemConfig) -> int:
    spec = cfg.spec
    doc = _envelope("reduce", args, cfg)
    if args.grid < 2:
        raise ConfigError("--grid needs at least 2 points")
    try:
        est = riccati.find_alpha_star(spec.riccati(), spec.t0, spec.t0 + 2.0 * args.horizon)
        beta = transforms.build_beta(spec, est.path, spec.t0 + args.horizon)
        coeffs = transforms.fourth_order(spec, beta, component=args.component)
    except (riccati.NoRegularSolutionFound, transforms.SignViolation, calculus.IntegrationError) as exc:
        doc["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        _emit(doc, args)
        return 1
    text = coeffs.to_csv(args.grid)
    if args.csv:
        _write(args.csv, text)
        doc["reduction"] = {"alpha_star": est.alpha_star, "s_max": coeffs.s_max, "component": args.component,
                            "label": beta.label, "t_end": spec.t0 + args.horizon}
        _emit(doc, args)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("horizon_base", "horizon_count", "div_threshold",
                                               "conv_tol", "rtol", "max_panels")}
    try:
        cfg = load_config(args.config, overrides, strict=args.command != "simulate")
        if args.command == "check":
            return cmd_check(args, cfg)
        if args.command == "simulate":
            return cmd_simulate(args, cfg, parser)
        if args.command == "riccati":
            return cmd_riccati(args, cfg)
        return cmd_reduce(args, cfg)
    except ConfigError as exc:
        print(f"oscrit: {exc}", file=sys.stderr)
        return EX_DATAERR


def schema() -> dict:
    return json.loads(resources.files("oscrit").joinpath("report.schema.json").read_text(encoding="utf-8"))


if __name__ == "__main__":
    sys.exit(main())
