import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import expm

from oscrit import empirical as E
from oscrit.criteria import SystemSpec

WHYBURN = SystemSpec.from_sources(0.0)
FREE = SystemSpec.from_sources(0.0, r1="0", r2="0")


def test_simulate_matches_matrix_exponential():
    ic = np.array([1.0, 0.0, 0.0, 0.0])
    tr = E.simulate(WHYBURN, ic, 5.0, 1e-12)
    M = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [0, -1, 0, 0], [1, 0, 0, 0]], float)
    np.testing.assert_allclose(tr(5.0), expm(5.0 * M) @ ic, rtol=1e-9, atol=1e-9)
    # phi1 solves phi'''' + phi = 0 with phi(0) = 1 and zero derivatives
    u = 5.0 / math.sqrt(2)
    assert tr(5.0)[0] == pytest.approx(math.cos(u) * math.cosh(u), abs=1e-6)


def test_free_motion():
    tr = E.simulate(FREE, [1, 2, 3, 4], 7.0)
    ts = np.linspace(0, 7, 15)
    np.testing.assert_allclose(tr(ts)[:2], [1 + 3 * ts, 2 + 4 * ts], rtol=1e-10)


def test_nonsmooth_p():
    spec = SystemSpec.from_sources(0.0, p="1 + abs(sin(t))", r1="0", r2="0")
    tr = E.simulate(spec, [0, 0, 1, 1], 10.0, 1e-11)
    ts = np.linspace(0.5, 10, 20)
    oracle = [quad(lambda s: 1 / (1 + abs(math.sin(s))), 0, t, points=[math.pi, 2 * math.pi, 3 * math.pi],
                   epsabs=1e-13)[0] for t in ts]
    np.testing.assert_allclose(tr(ts)[0], oracle, rtol=1e-7)
    np.testing.assert_allclose(tr(ts)[1], oracle, rtol=1e-7)
    assert np.all(np.diff(tr(ts)[0]) > 0)


@pytest.mark.parametrize("ic, T", [([1, 2, 3], 5.0), ([1, 2, 3, 4], 0.0)])
def test_simulate_rejects_bad_input(ic, T):
    with pytest.raises(ValueError):
        E.simulate(WHYBURN, ic, T)


def test_whyburn_evidence_and_gap():
    rep = E.oscillation_evidence(WHYBURN)
    assert rep.verdict is E.Evidence.CONSISTENT
    # characteristic roots exp(i pi/4 + k i pi/2): zeros are pi sqrt(2) apart
    assert rep.mean_gap == pytest.approx(math.pi * math.sqrt(2), abs=0.05)
    assert len(rep.solutions) == 8 and rep.seed == 0
    doc = rep.to_json()
    assert doc["windows"] == [10.0, 20.0, 40.0, 80.0]
    assert [s["index"] for s in doc["solutions"]] == list(range(8))


def test_free_motion_gives_counterexample():
    rep = E.oscillation_evidence(FREE)
    assert rep.verdict is E.Evidence.COUNTEREXAMPLE
    sol, comp = rep.counterexample
    c = rep.solutions[sol].counts[comp]
    assert c[-1] == c[-2] == c[-3] and c[-1] <= 1


def test_example31_outcome():
    # solutions grow like exp(t^2/2) and leave double range before t0 + 40,
    # while their phase advances only like ln(t)/2
    spec = SystemSpec.from_sources(1.0, r="-t^2")
    rep = E.oscillation_evidence(spec)
    assert rep.verdict is E.Evidence.INCONCLUSIVE
    assert "stopped" in rep.diagnostic
    stops = [float(s.diagnostic.split("t=")[1].split(" ")[0]) for s in rep.solutions if s.diagnostic]
    assert stops and all(30 < t < 41 for t in stops)


def test_bracket_annotation():
    rep = E.oscillation_evidence(WHYBURN, E.EvidenceConfig(window_count=3, n_random=2))
    # basis vectors e1..e4 give brackets 0, 0, 0, 0 except the mixed ones
    br = [s.bracket for s in rep.solutions]
    assert br[:4] == [0.0, 0.0, 0.0, 0.0]
    for s in rep.solutions[4:]:
        f1, f2, s1, s2 = s.ic
        assert s.bracket == pytest.approx(f1 * s2 - f2 * s1)


def test_counts_csv_shape():
    rep = E.oscillation_evidence(WHYBURN, E.EvidenceConfig(window_count=3, n_random=1))
    lines = rep.counts_csv().splitlines()
    assert lines[0] == "solution,component,T=10.0,T=20.0,T=40.0"
    assert len(lines) == 1 + 2 * 5


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4).filter(lambda v: max(map(abs, v)) > 0.1))
def test_zero_sets_scale_invariant(ic):
    ic = np.array(ic)
    a = E.simulate(WHYBURN, ic, 30.0, 1e-12)
    b = E.simulate(WHYBURN, 2 * ic, 30.0, 1e-12)
    for k in range(2):
        za, zb = a.find_zeros(k).sign_changes, b.find_zeros(k).sign_changes
        assert len(za) == len(zb)
        np.testing.assert_allclose(za, zb, atol=1e-10)


def one(s):
    return np.ones_like(np.asarray(s, float)) if np.ndim(s) else 1.0


def test_zero_gap_bound():
    diff, counts = E.zero_gap_property(one, one, 10, (0.0, 50.0))
    assert diff <= 4 and len(counts) == 10
    assert min(counts) >= 10


def test_zero_gap_single_solution():
    diff, counts = E.zero_gap_property(one, one, 1, (0.0, 50.0))
    assert diff == 0


def test_zero_gap_denser_coefficient():
    four = lambda s: 4.0 * one(s)
    diff, counts = E.zero_gap_property(one, four, 10, (0.0, 50.0))
    assert diff <= 4
    # lambda^4 = -4 has roots +-1 +- i, so zeros come every pi
    assert all(abs(c - 50 / math.pi) <= 3 for c in counts)
