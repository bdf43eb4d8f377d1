import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscrit import calculus, criteria as C
from oscrit.calculus import ProbeConfig, VerdictKind
from oscrit.criteria import AbdullahSystem, Overall, Status, SystemSpec

WHYBURN = SystemSpec.from_sources(0.0)
EX31 = SystemSpec.from_sources(1.0, r="-t^2", gamma="2*t")


def const(v):
    return lambda t: np.full(np.shape(t), float(v)) if np.ndim(t) else float(v)


def statuses(report):
    return {c.id: c.status for c in report.conditions}


# -- standing assumptions ---------------------------------------------------

def test_assumptions_accept_decaying_coefficients():
    SystemSpec.from_sources(0.0, r1="exp(-t)").check_assumptions(2.0**20)
    SystemSpec.from_sources(1.0, r1="1/t", r2="1/t").check_assumptions(2.0**20)


@pytest.mark.parametrize("kw, where", [({"r1": "-1"}, 0.0), ({"p": "t - 3"}, 0.0), ({"r2": "cos(t)"}, math.pi / 2)])
def test_assumption_violation_has_witness(kw, where):
    spec = SystemSpec.from_sources(0.0, **kw)
    with pytest.raises(C.AssumptionViolation) as exc:
        spec.check_assumptions(100.0)
    assert exc.value.t >= where - 0.1


# -- Whyburn ------------------------------------------------------------------

def test_whyburn_instance_applies():
    rep = C.check_whyburn(WHYBURN)
    assert rep.overall is Overall.APPLIES
    assert any("weighted" in n for n in rep.notes)


def test_whyburn_fails_on_example31():
    rep = C.check_whyburn(EX31)
    assert rep.overall is Overall.FAILS
    bad = rep.condition("r_zero")
    assert bad.status is Status.VIOLATED
    assert bad.witness == (1.0, -1.0)


def test_whyburn_convergent_weighted_integral():
    rep = C.check_whyburn(SystemSpec.from_sources(0.0, r1="exp(-t)"))
    assert rep.overall in (Overall.FAILS, Overall.INCONCLUSIVE)
    cond = rep.condition("int_t_r1")
    assert cond.status is Status.VIOLATED
    # int_0^oo t e^{-t} dt = 1
    assert cond.evidence.limit == pytest.approx(1.0, abs=1e-6)


# -- Abdullah -----------------------------------------------------------------

def test_abdullah_real_root_with_divergence():
    rep = C.check_abdullah(AbdullahSystem(0.0, const(0), const(1), const(4), const(0)))
    assert rep.overall is Overall.APPLIES
    assert "roots K: -2, 2" in rep.notes
    assert rep.conditions[0].id == "identity_K=2"


def test_abdullah_complex_roots():
    rep = C.check_abdullah(AbdullahSystem(0.0, const(0), const(1), const(-1), const(0)))
    assert rep.overall is Overall.FAILS
    assert rep.conditions[0].id == "real_K" and rep.conditions[0].witness is not None


def test_abdullah_frozen_root_fails_identity():
    rep = C.check_abdullah(AbdullahSystem(2.0, const(0), const(1), lambda t: t, const(0)))
    assert rep.overall is Overall.FAILS
    ident = [c for c in rep.conditions if c.id.startswith("identity")]
    assert ident and all(c.status is Status.VIOLATED for c in ident)


@settings(max_examples=25, deadline=None)
@given(r=st.floats(-2, 2), r1=st.floats(0.1, 3), r2=st.floats(0.1, 3), t0=st.floats(0, 5))
def test_abdullah_adapter_matches_hand_written(r, r1, r2, t0):
    spec = SystemSpec.from_sources(t0, r=repr(r), r1=repr(r1), r2=repr(r2))
    via = C.run("abdullah", spec)
    hand = C.check_abdullah(AbdullahSystem(t0, const(-r), const(-r1), const(r2), const(-r)))
    assert via.to_json() == hand.to_json()


# -- thm31 checker ----------------------------------------------------------

def test_thm31_whyburn_instance():
    rep = C.check_thm31(WHYBURN)
    assert rep.overall is Overall.APPLIES


def test_thm31_fails_on_negative_r():
    rep = C.check_thm31(EX31)
    assert rep.overall is Overall.FAILS
    assert rep.condition("A1").status is Status.VIOLATED
    t, v = rep.condition("A1").witness
    assert v == pytest.approx(-t * t)


def test_thm31_decaying_components():
    spec = SystemSpec.from_sources(1.0, r1="1/t", r2="1/t")
    rep = C.check_thm31(spec)
    assert rep.overall is Overall.APPLIES
    # oracle: the C1 integrand is (1/t)(t - 1), whose integral grows like t
    v = calculus.weighted_double(lambda t: 1.0 / t, const(0.0), const(1.0), 1.0, ProbeConfig())
    T, F = v.probes[-1]
    assert F == pytest.approx((T - 1.0) - math.log(T), rel=1e-8)


# -- thm32 checker ----------------------------------------------------------

THM32 = SystemSpec.from_sources(0.0, q="2", r="exp(-3*t)")


def test_thm32_integrals_match_closed_forms():
    cfg = ProbeConfig()
    i = C.i_integral(THM32, cfg)
    assert i.convergent and i.limit == pytest.approx(0.5, abs=1e-6)
    i0 = C.i0_integral(THM32, cfg)
    # int_0^oo e^{2t} e^{-3t} dt = 1
    assert i0.convergent and i0.limit == pytest.approx(1.0, abs=1e-6)
    rep = C.check_thm32(THM32)
    s = statuses(rep)
    assert s["A1"] is s["B2"] is s["C2"] is Status.SATISFIED


def test_thm32_support_heuristic_on_fast_decay():
    # e^{-3t} drops below the activity floor long before the last probe window,
    # so the dyadic-window heuristic cannot see unbounded support
    rep = C.check_thm32(THM32)
    a2 = rep.condition("A2")
    assert a2.status is Status.VIOLATED and a2.witness is not None
    slow = C.support_activity(lambda t: 1.0 / (1.0 + t), 0.0, ProbeConfig())
    assert slow.status is Status.SATISFIED


def test_thm32_zero_r():
    rep = C.check_thm32(WHYBURN)
    assert rep.condition("A2").status is Status.VIOLATED
    assert rep.condition("B2").status is Status.VIOLATED
    assert rep.overall is Overall.FAILS


def test_support_activity_looks_at_last_window():
    cfg = ProbeConfig(horizon_count=6)
    early = C.support_activity(lambda t: np.where(t < 5, 1.0, 0.0), 0.0, cfg)
    assert early.status is Status.VIOLATED
    gap = C.support_activity(lambda t: np.where((t > 3) & (t < 9), 0.0, 1.0), 0.0, cfg)
    assert gap.status is Status.SATISFIED and "inactive" in gap.note


# -- thm33 checker ----------------------------------------------------------

def test_thm33_example31_applies():
    rep = C.check_thm33(EX31)
    assert rep.overall is Overall.APPLIES


def test_thm33_early_start_violates_lower_bound():
    rep = C.check_thm33(SystemSpec.from_sources(0.1, r="-t^2", gamma="2*t"))
    a3 = rep.condition("A3")
    assert a3.status is Status.VIOLATED
    t, _ = a3.witness
    # 2 - 4t^2 > -t^2 exactly for t < sqrt(2/3)
    assert 0.1 <= t < math.sqrt(2 / 3)


def test_thm33_zero_gamma():
    rep = C.check_thm33(SystemSpec.from_sources(0.0, gamma="0"))
    s = statuses(rep)
    assert s["A3"] is Status.SATISFIED and s["A3^0"] is Status.SATISFIED
    assert s["A3^1"] is Status.VIOLATED


def test_thm33_needs_gamma():
    rep = C.check_thm33(WHYBURN)
    assert rep.overall is Overall.INCONCLUSIVE and "gamma required" in rep.notes


def test_thm33_rejects_nondifferentiable_gamma():
    rep = C.check_thm33(SystemSpec.from_sources(1.0, r="-t^2", gamma="abs(t - 2)"))
    assert rep.overall is Overall.INCONCLUSIVE


# -- thm34 checker ----------------------------------------------------------

def test_r_gamma_matches_hand_formula():
    spec = SystemSpec.from_sources(0.0, q="sin(t)", r="cos(t) + atan(t^2)/(1+abs(t^3))", gamma="-sin(t)")
    ts = np.linspace(0.0, 20.0, 201)
    # gamma = -q reduces r_gamma to -q' + r
    expect = np.arctan(ts**2) / (1 + np.abs(ts**3))
    np.testing.assert_allclose(C.r_gamma(spec)(ts), expect, atol=1e-14)


def test_thm34_example33_records_sign_discrepancy():
    spec = SystemSpec.from_sources(0.0, q="sin(t)", r="cos(t) + atan(t^2)/(1+abs(t^3))", gamma="-sin(t)")
    rep = C.check_thm34(spec, ProbeConfig(horizon_count=8))
    a4 = rep.condition("A4")
    assert a4.status is Status.VIOLATED
    t, v = a4.witness
    assert v == pytest.approx(math.atan(t * t) / (1 + t**3), rel=1e-12) and v > 0
    assert any("r_gamma" in n for n in rep.notes)
    assert rep.overall is Overall.FAILS


def test_thm34_example34_records_sign_discrepancy():
    spec = SystemSpec.from_sources(0.0, q="t", r="1 + sin(exp(t))/(1+abs(t)^1)", gamma="-t")
    rep = C.check_thm34(spec, ProbeConfig(horizon_count=8))
    t, v = rep.condition("A4").witness
    assert t == 0.0 and v == pytest.approx(math.sin(1.0))


def test_thm34_d4_is_divergence_and_noted():
    rep = C.check_thm34(EX31.with_gamma("-1"), ProbeConfig(horizon_count=8))
    assert C.D4_NOTE in rep.notes


# -- run_all and soundness ---------------------------------------------------

def test_run_all_whyburn():
    reps = {r.theorem: r.overall for r in C.run_all(WHYBURN)}
    assert reps["thm31"] is Overall.APPLIES and reps["whyburn"] is Overall.APPLIES
    assert reps["thm32"] is Overall.FAILS
    assert reps["thm33"] is reps["thm34"] is Overall.INCONCLUSIVE
    assert C.exit_code(C.run_all(WHYBURN)) == 0


def test_run_all_example31():
    reps = {r.theorem: r.overall for r in C.run_all(EX31, ProbeConfig(horizon_count=12))}
    assert reps["thm33"] is Overall.APPLIES and reps["whyburn"] is Overall.FAILS
    assert list(reps) == list(C.THEOREMS)


def test_exit_codes():
    ok = C.CriterionReport("a", [C.ConditionVerdict("x", Status.SATISFIED)])
    bad = C.CriterionReport("b", [C.ConditionVerdict("x", Status.VIOLATED, witness=(0.0, -1.0))])
    unk = C.CriterionReport("c", [C.ConditionVerdict("x", Status.INCONCLUSIVE)])
    assert C.exit_code([ok, bad, unk]) == 0
    assert C.exit_code([bad, unk]) == 1
    assert C.exit_code([unk, unk]) == 2


def test_evaluator_failure_becomes_inconclusive():
    spec = SystemSpec.from_sources(0.0, gamma="ln(t - 1)")
    rep = C.run("thm34", spec)
    assert rep.overall is Overall.INCONCLUSIVE


def _violations_have_witnesses(report):
    return all(c.witness is not None for c in report.conditions if c.status is Status.VIOLATED)


@pytest.mark.parametrize("spec", [WHYBURN, EX31, THM32, SystemSpec.from_sources(0.0, r1="exp(-t)")])
def test_violated_conditions_carry_witnesses(spec):
    for rep in C.run_all(spec, ProbeConfig(horizon_count=10)):
        assert _violations_have_witnesses(rep), rep.to_json()


@settings(max_examples=20, deadline=None)
@given(c=st.floats(0.0, 60.0), eps=st.floats(1e-6, 1.0), width=st.floats(0.2, 3.0))
def test_single_violation_flips_to_fails(c, eps, width):
    # a negative bump in r breaks r == 0 (Whyburn) and r >= 0 (A1)
    r = f"-{eps!r}*exp(-((t - {c!r})/{width!r})^2)"
    spec = SystemSpec.from_sources(0.0, r=r)
    cfg = ProbeConfig(horizon_count=8)
    for name, cid in (("whyburn", "r_zero"), ("thm31", "A1")):
        assert C.run(name, WHYBURN, cfg).overall is Overall.APPLIES
        rep = C.run(name, spec, cfg)
        if rep.condition(cid).status is Status.VIOLATED:
            assert rep.overall is Overall.FAILS
            t, v = rep.condition(cid).witness
            assert v < -1e-12
    peak = C.run("thm31", SystemSpec.from_sources(0.0, r=f"-{eps!r}"), cfg)
    assert peak.overall is Overall.FAILS


@settings(max_examples=8, deadline=None)
@given(c=st.floats(1.5, 50.0), eps=st.floats(1.01, 5.0))
def test_positive_bump_breaks_thm33(c, eps):
    spec = SystemSpec.from_sources(1.0, r=f"-t^2 + {eps!r}*(1 + t^2)*exp(-(t - {c!r})^2)", gamma="2*t")
    rep = C.check_thm33(spec, ProbeConfig(horizon_count=8))
    assert rep.condition("A3").status is Status.VIOLATED
    assert rep.overall is Overall.FAILS


def test_report_json_round_trip():
    import json
    rep = C.check_whyburn(EX31)
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["overall"] == "CriterionFails"
    assert doc["conditions"][2]["witness"] == {"t": 1.0, "value": -1.0}
