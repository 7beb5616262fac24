import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from esslab import numerics
from esslab.model import CetParams, ModelParams
from esslab.montecarlo import SimSpec, simulate_pipeline, simulate_power
from esslab.numerics import (
    Design, DomainError, PowerQuery, TostQuery, compute_power, compute_tost_power,
    noncentral_t_cdf, power_curve, t_isf, tost_power, tost_power_curve, ttest_power,
)

from conftest import LATTICE_D, LATTICE_S, load_json

REF = load_json("nct_reference.json")


# noncentral t CDF

def test_cdf_at_zero_is_half():
    assert noncentral_t_cdf(0.0, 10, 0.0) == pytest.approx(0.5, abs=1e-15)


def test_cdf_upper_limit():
    assert noncentral_t_cdf(math.inf, 5, 2.0) == 1.0
    assert noncentral_t_cdf(1e8, 5, 2.0) == pytest.approx(1.0, abs=1e-12)
    assert noncentral_t_cdf(-math.inf, 5, 2.0) == 0.0


def test_cdf_central_95th_percentile():
    assert noncentral_t_cdf(1.812, 10, 0.0) == pytest.approx(0.95, abs=1e-4)


@pytest.mark.parametrize("case", REF["nct_cdf"], ids=lambda c: f"t{c['t']}-df{c['df']}-ncp{c['ncp']:.3g}")
def test_cdf_matches_quadrature_reference(case):
    got = noncentral_t_cdf(case["t"], case["df"], case["ncp"])
    assert abs(got - case["cdf"]) <= 1e-8


@pytest.mark.parametrize("case", REF["t_isf"], ids=lambda c: f"p{c['p']}-df{c['df']}")
def test_t_quantile_matches_reference(case):
    assert t_isf(case["p"], case["df"]) == pytest.approx(case["crit"], abs=1e-10)


@settings(max_examples=300, deadline=None)
@given(t=st.floats(-50, 50), df=st.floats(0.5, 3000))
def test_central_case_matches_incomplete_beta_identity(t, df):
    # complementary form I_{t^2/(df+t^2)}(1/2, df/2) keeps precision near t = 0
    half = 0.5 * special.betainc(0.5, df / 2, t * t / (df + t * t))
    expected = 0.5 + math.copysign(half, t)
    assert abs(noncentral_t_cdf(t, df, 0.0) - expected) <= 1e-8


@settings(max_examples=300, deadline=None)
@given(t=st.floats(-40, 60), df=st.floats(1, 2000), ncp=st.floats(-10, 40))
def test_cdf_agrees_with_scipy(t, df, ncp):
    ref = stats.nct.cdf(t, df, ncp)
    if not np.isfinite(ref):
        return
    assert abs(noncentral_t_cdf(t, df, ncp) - ref) <= 1e-8


@settings(max_examples=200, deadline=None)
@given(t=st.floats(-20, 20), dt=st.floats(0, 5), df=st.floats(1, 500), ncp=st.floats(-5, 15))
def test_cdf_nondecreasing_in_t(t, dt, df, ncp):
    assert noncentral_t_cdf(t + dt, df, ncp) >= noncentral_t_cdf(t, df, ncp) - 1e-12


@pytest.mark.parametrize("args", [(0.0, 0, 1.0), (0.0, -1, 1.0), (0.0, math.inf, 1.0),
                                  (0.0, 5, math.nan), (math.nan, 5, 1.0), (0.0, 5, math.inf)])
def test_cdf_domain_errors(args):
    with pytest.raises(DomainError):
        noncentral_t_cdf(*args)


# t-test power

@pytest.mark.parametrize("alpha", [0.005, 0.05, 0.2])
@pytest.mark.parametrize("s", [2, 4, 50, 998])
def test_power_at_zero_effect_is_alpha(s, alpha):
    assert abs(ttest_power(0.0, s, alpha) - alpha) <= 1e-8


def test_power_saturates():
    assert ttest_power(0.5, 10_000) == pytest.approx(1.0, abs=1e-6)


def test_power_d05_s64_is_about_080(power_lattice):
    est = power_lattice[(0.5, 64)]
    assert abs(ttest_power(0.5, 64) - est.rate) <= 0.005
    assert ttest_power(0.5, 64) == pytest.approx(0.80, abs=0.01)


@pytest.mark.parametrize("d", [0.05, 0.2, 0.5, 1.0, 1.5])
def test_power_nondecreasing_in_s(d):
    p = power_curve(d, np.arange(4, 1001))
    assert np.all(np.diff(p) >= -1e-12)


@pytest.mark.parametrize("s", [4, 20, 200])
def test_power_nondecreasing_in_d(s):
    ds = np.linspace(0, 2, 201)
    p = [ttest_power(d, s) for d in ds]
    assert np.all(np.diff(p) >= -1e-12)


def test_power_curve_matches_scalar_path():
    grid = np.arange(4, 200, 2)
    curve = power_curve(0.37, grid, 0.01)
    assert np.allclose(curve, [ttest_power(0.37, int(s), 0.01) for s in grid], atol=1e-14)


def test_power_matches_scipy_formula():
    for d, s in [(0.2, 30), (0.5, 64), (0.8, 10), (1.2, 4)]:
        df, nc = 2 * s - 2, d * math.sqrt(s / 2)
        c = stats.t.isf(0.025, df)
        ref = stats.nct.sf(c, df, nc) + stats.nct.cdf(-c, df, nc)
        assert ttest_power(d, s) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("d", [d for d in LATTICE_D if d > 0])
@pytest.mark.parametrize("s", LATTICE_S)
def test_power_lattice_within_0005_of_monte_carlo(power_lattice, d, s):
    assert abs(ttest_power(d, s) - power_lattice[(d, s)].rate) <= 0.005


def test_one_sample_design_against_monte_carlo():
    analytic = ttest_power(0.5, 34, design=Design.ONE_SAMPLE)
    est = simulate_power(0.5, 34, design=Design.ONE_SAMPLE, replicates=200_000, seed=3)
    assert est.agrees(analytic)
    # one-sample with n observations beats two-sample with n per group
    assert analytic > ttest_power(0.5, 34)


def test_power_query_validation():
    with pytest.raises(DomainError, match="d >= 0"):
        PowerQuery(-0.1, 10)
    with pytest.raises(DomainError, match="s must be an integer >= 2"):
        PowerQuery(0.5, 1)
    with pytest.raises(DomainError, match="s must be an integer >= 2"):
        PowerQuery(0.5, 10.5)
    with pytest.raises(DomainError, match="alpha"):
        PowerQuery(0.5, 10, alpha=1.0)
    with pytest.raises(DomainError):
        power_curve(0.5, [1, 2])
    assert compute_power(PowerQuery(0.5, 64)) == ttest_power(0.5, 64)


# TOST

def test_tost_vanishing_bound():
    assert tost_power(1e-6, 100) == pytest.approx(0.0, abs=1e-12)


def test_tost_saturates():
    assert tost_power(0.5, 10_000) == pytest.approx(1.0, abs=1e-9)


def test_tost_matches_central_t_formula():
    for delta, s in [(0.5, 70), (0.25, 200), (1.0, 20)]:
        df = 2 * s - 2
        L = delta * math.sqrt(s / 2) - stats.t.isf(0.05, df)
        ref = max(0.0, 2 * stats.t.cdf(L, df) - 1)
        assert tost_power(delta, s) == pytest.approx(ref, abs=1e-10)


def test_tost_s70_against_monte_carlo():
    # b = 0 and delta_frac = 1: every replicate is a null study with bound 0.5
    spec = SimSpec(ModelParams(0.0, 0.5, 100.0, cet=CetParams(1.0, 0.05)), 1_000_000, seed=7)
    c = simulate_pipeline(spec, s=70).counts
    rate = (c["equivalent"] + c["tost_among_significant"]) / spec.replicates
    assert abs(tost_power(0.5, 70) - rate) <= 0.005


def test_tost_nondecreasing_in_s_and_delta():
    grid = np.arange(4, 1001)
    for delta in (0.1, 0.3, 0.5, 1.0):
        assert np.all(np.diff(tost_power_curve(delta, grid)) >= -1e-12)
    deltas = np.linspace(0.01, 2, 200)
    for s in (10, 70, 400):
        p = [tost_power(x, s) for x in deltas]
        assert np.all(np.diff(p) >= -1e-12)


def test_tost_query_validation():
    with pytest.raises(DomainError, match="delta > 0"):
        TostQuery(0.0, 10)
    with pytest.raises(DomainError, match="alpha_cet"):
        TostQuery(0.5, 10, alpha_cet=0.0)
    assert compute_tost_power(TostQuery(0.5, 70)) == tost_power(0.5, 70)


def test_equivalence_probability_reduces_to_tost_power():
    assert numerics.equivalence_probability(0.5, 70) == pytest.approx(tost_power(0.5, 70), abs=1e-12)
    # intersecting with a tighter non-significance region can only lower it
    assert numerics.equivalence_probability(0.5, 70, upper=0.5) < tost_power(0.5, 70)
