import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy.special import dawsn

from oscrit import calculus as C
from oscrit.calculus import ProbeConfig, VerdictKind


def one(t):
    return np.ones_like(t)


def zero(t):
    return np.zeros_like(t)


@pytest.mark.parametrize(
    "f, a, b, want",
    [
        (lambda t: t**2, 0.0, 1.0, 1.0 / 3.0),
        (np.sin, 0.0, math.pi, 2.0),
        (lambda t: 1.0 / t, 1.0, 2.0, math.log(2.0)),
        (np.exp, -3.0, 4.0, math.exp(4) - math.exp(-3)),
        (lambda t: np.sin(t**2), 0.0, 10.0, None),
    ],
)
def test_integrate_known_values(f, a, b, want):
    if want is None:
        want = sint.quad(f, a, b, limit=500, epsabs=1e-13, epsrel=1e-13)[0]
    value, err = C.integrate(f, a, b, tol=1e-12)
    assert abs(value - want) <= max(1e-10, err)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=6, max_size=6),
    st.floats(-5, 5),
    st.floats(0.01, 10),
)
def test_integrate_exact_on_quintics(coef, a, width):
    poly = np.polynomial.Polynomial(coef)
    b = a + width
    anti = poly.integ()
    want = anti(b) - anti(a)
    value, _ = C.integrate(poly, a, b)
    assert abs(value - want) <= 1e-12 * max(1.0, abs(want), np.abs(coef).sum() * max(1, abs(a), abs(b)) ** 6)


def test_integrate_rejects_empty_interval():
    with pytest.raises(ValueError):
        C.integrate(np.sin, 1.0, 1.0)


def test_constant_integrand_diverges():
    v = C.probe_improper(one, 0.0)
    assert v.kind is VerdictKind.DIVERGENT_POS


def test_negative_constant_diverges_down():
    v = C.probe_improper(lambda t: -np.ones_like(t), 0.0)
    assert v.kind is VerdictKind.DIVERGENT_NEG


def test_exponential_tail_converges():
    v = C.probe_improper(lambda t: np.exp(-t), 1.0)
    assert v.kind is VerdictKind.CONVERGENT
    assert v.limit == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_sine_is_inconclusive_and_flagged():
    v = C.probe_improper(np.sin, 0.0)
    assert v.kind is VerdictKind.INCONCLUSIVE
    assert v.oscillation_flag


def test_power_tail_converges_with_enough_horizons():
    # int_1^oo t^-3 = 1/2; the tail at 2^J is 2^(-2J-1)
    cfg = ProbeConfig(horizon_count=24)
    v = C.probe_improper(lambda t: t**-3.0, 1.0, cfg)
    assert v.kind is VerdictKind.CONVERGENT
    assert v.limit == pytest.approx(0.5, abs=1e-9)


def test_log_growth_counts_as_divergent():
    v = C.probe_improper(lambda t: 1.0 / t, 1.0)
    assert v.kind is VerdictKind.DIVERGENT_POS


def test_probes_are_dyadic_horizons():
    cfg = ProbeConfig(horizon_base=0.5, horizon_count=6)
    v = C.probe_improper(lambda t: np.exp(-t), 2.0, cfg)
    assert [p[0] for p in v.probes] == [2.0 + 0.5 * 2**j for j in range(7)]


def test_domain_fault_truncates_probes():
    # 1/(t-5) blows up at 5: only horizons before the pole survive
    v = C.probe_improper(lambda t: np.where(np.isclose(t, 5.0), np.inf, 1.0), 0.0,
                         ProbeConfig(horizon_count=6))
    assert all(t < 5.0 for t, _ in v.probes)
    assert v.kind is VerdictKind.INCONCLUSIVE


def test_exp_weighted_matches_closed_form():
    # int_0^oo exp(-2t) dt via rate -2
    v = C.probe_exp_weighted(None, lambda t: -2.0 * np.ones_like(t), 0.0)
    assert v.kind is VerdictKind.CONVERGENT
    assert v.limit == pytest.approx(0.5, abs=1e-9)


def test_exp_weighted_survives_huge_exponents():
    # int_0^t exp(-tau^2) e^{...}: exponent reaches -1e12 without underflow trouble
    v = C.probe_exp_weighted(None, lambda t: -2.0 * t, 0.0)
    assert v.kind is VerdictKind.CONVERGENT
    assert v.limit == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-9)


def _inner_w_minus_8t(t):
    # int_1^t exp(-4(t^2 - tau^2)) dtau via the Dawson function
    return 0.5 * (dawsn(2 * t) - np.exp(4 - 4 * t**2) * dawsn(2.0))


def test_weighted_double_stiff_kernel_against_dawson_oracle():
    cfg = ProbeConfig(horizon_count=10)
    v = C.weighted_double(one, lambda t: -8.0 * t, one, 1.0, cfg)
    for T, value in v.probes:
        want = sint.quad(_inner_w_minus_8t, 1.0, T, limit=2000, epsabs=1e-13, epsrel=1e-12)[0]
        assert value == pytest.approx(want, rel=1e-8, abs=1e-12)


def test_weighted_double_stiff_kernel_diverges_slowly():
    v = C.weighted_double(one, lambda t: -8.0 * t, one, 1.0)
    assert v.kind is VerdictKind.DIVERGENT_POS
    d = np.diff([p[1] for p in v.probes])
    assert d[-1] == pytest.approx(math.log(2) / 8, rel=1e-3)


def test_weighted_double_zero_weight_is_iterated_integral():
    # w = 0, p = 1: int_0^T exp(-t^2) (t - 0) dt = (1 - exp(-T^2)) / 2
    v = C.weighted_double(lambda t: np.exp(-t**2), zero, one, 0.0)
    assert v.kind is VerdictKind.CONVERGENT
    assert v.limit == pytest.approx(0.5, abs=1e-9)


def test_weighted_double_with_variable_p():
    # p = 1 + t, w = 0: inner = ln(1+t); outer exp(-t)
    p = lambda t: 1.0 + t
    cfg = ProbeConfig(horizon_count=8)
    v = C.weighted_double(lambda t: np.exp(-t), zero, p, 0.0, cfg)
    for T, value in v.probes:
        want = sint.quad(lambda s: np.exp(-s) * np.log1p(s), 0, T, epsabs=1e-14, epsrel=1e-13)[0]
        assert value == pytest.approx(want, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.0, 2.0))
def test_zero_weight_reproduces_direct_double_integral(lam, a):
    # with w = 0 the kernel is int_a^t dtau/p, compare with an explicit iterated integral
    p = lambda t: 1.0 + 0.5 * np.sin(t) ** 2
    outer = lambda t: np.exp(-lam * (t - a))
    cfg = ProbeConfig(horizon_count=5)
    v = C.weighted_double(outer, zero, p, a, cfg)
    for T, value in v.probes[:4]:
        inner = lambda t: sint.quad(lambda s: 1.0 / p(s), a, t, epsabs=1e-14, epsrel=1e-13)[0]
        want = sint.quad(lambda t: outer(t) * inner(t), a, T, epsabs=1e-14, epsrel=1e-12)[0]
        assert value == pytest.approx(want, rel=1e-8, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.1, 5.0))
def test_cumulative_grid_is_an_antiderivative(a, width):
    grid = C.cumulative(np.cos, a, a + width)
    ts = np.linspace(a, a + width, 9)
    np.testing.assert_allclose(grid(ts), np.sin(ts) - np.sin(a), atol=1e-12)
    np.testing.assert_allclose(grid.integrand(ts), np.cos(ts), atol=1e-11)


def test_verdict_json_encodes_infinities():
    v = C.IntegralVerdict(VerdictKind.INCONCLUSIVE, [(1.0, math.inf)], limit=None, tail_bound=math.inf)
    out = v.to_json()
    assert out["tail_bound"] == "inf" and out["probes"] == [[1.0, "inf"]]


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(-1.0, 3.0))
def test_zero_weight_matches_plain_probe_of_linear_kernel(lam, a):
    outer = lambda t: np.exp(-lam * (t - a))
    cfg = ProbeConfig(horizon_count=12)
    nested = C.weighted_double(outer, zero, one, a, cfg)
    plain = C.probe_improper(lambda t: outer(t) * (t - a), a, cfg)
    for (t1, v1), (t2, v2) in zip(nested.probes, plain.probes):
        assert t1 == t2
        assert v1 == pytest.approx(v2, rel=1e-8, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 5.0), st.integers(6, 16))
def test_nonnegative_integrand_not_convergent_when_half_horizon_gap_is_large(power, shift, j):
    cfg = ProbeConfig(horizon_count=j)
    f = lambda t: (1.0 + t - 1.0) ** -power * (1 + shift)
    v = C.probe_improper(f, 1.0, cfg)
    F = [p[1] for p in v.probes]
    if F[-1] - F[(len(F) - 1) // 2] > cfg.conv_tol:
        assert v.kind is not VerdictKind.CONVERGENT
