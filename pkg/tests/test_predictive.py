"""Predictive contours and the combination kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

import possim as ps
from possim.predictive import link_mass
from possim.rng import substream


# ---------------------------------------------------------------------------
# the combination kernel


def test_kernel_frozen_value():
    # K(1/e, 1/e) = e^-2 (1 + 2) = 3 e^-2
    assert ps.fisher_combine(math.exp(-1), math.exp(-1)) == pytest.approx(
        3.0 * math.exp(-2), abs=1e-15)


def test_kernel_zero_convention():
    assert ps.fisher_combine(0.0, 0.7) == 0.0
    assert ps.fisher_combine(0.3, 0.0) == 0.0
    assert ps.fisher_combine(0.0, 0.0) == 0.0
    assert ps.fisher_combine(1.0, 1.0) == 1.0


def test_kernel_is_chi_square_4_survival():
    # uv(1 - log uv) is the survival function of a chi-square_4 at -2 log uv
    u = np.linspace(1e-6, 1.0, 100)
    worst = 0.0
    for a in u:
        for b in u:
            x = -2.0 * math.log(a * b)
            worst = max(worst, abs(ps.fisher_combine(a, b)
                                   - float(stats.chi2.sf(x, 4))))
    assert worst < 1e-12


@given(st.floats(1e-12, 1.0), st.floats(1e-12, 1.0))
@settings(max_examples=300, deadline=None)
def test_kernel_symmetric_bounded_dominating(u, v):
    k = ps.fisher_combine(u, v)
    assert 0.0 <= k <= 1.0
    assert k == ps.fisher_combine(v, u)
    assert k >= u * v - 1e-15


@given(st.floats(1e-9, 1.0), st.floats(1e-9, 1.0), st.floats(1e-9, 1.0))
@settings(max_examples=200, deadline=None)
def test_kernel_monotone_in_each_argument(u, v, w):
    lo, hi = sorted((v, w))
    assert ps.fisher_combine(u, lo) <= ps.fisher_combine(u, hi) + 1e-15


# ---------------------------------------------------------------------------
# normal trio


def test_trio_option3_below_option2_analytic():
    plan = ps.MonteCarloPlan(np.linspace(-4, 4, 81), n_mc=500, seed=1)
    z = np.linspace(-4, 4, 81)
    trio = ps.normal_predictive_trio(0.0, 5, 1.0, z, plan)
    o2 = np.array([float(trio["option2"](v)) for v in z])
    o3 = np.array([float(trio["option3"](v)) for v in z])
    assert np.all(o3 <= o2 + 1e-12)
    assert float(trio["option2"](0.0)) == 1.0
    assert float(trio["option3"](0.0)) == 1.0


def test_trio_option1_tracks_option2():
    plan = ps.MonteCarloPlan(np.linspace(-4, 4, 81), n_mc=500, seed=1)
    z = np.linspace(-4, 4, 81)
    trio = ps.normal_predictive_trio(0.0, 5, 1.0, z, plan)
    o1 = trio["option1"].grid_values()
    o2 = np.array([float(trio["option2"](v)) for v in z])
    assert float(np.max(np.abs(o1 - o2))) <= 0.05


def test_trio_closed_forms_match_direct_formulas():
    plan = ps.MonteCarloPlan(np.linspace(-3, 3, 13), n_mc=100, seed=1)
    z = np.linspace(-3, 3, 13)
    trio = ps.normal_predictive_trio(0.4, 8, 1.3, z, plan)
    scale2 = 1.3 ** 2 * (1 + 1 / 8)
    for v in z:
        x = (v - 0.4) ** 2 / scale2
        assert float(trio["option2"](v)) == pytest.approx(
            float(stats.chi2.sf(x, 2)), abs=1e-12)
        assert float(trio["option3"](v)) == pytest.approx(
            float(stats.chi2.sf(x, 1)), abs=1e-12)


def test_combine_with_degenerate_parameter_contour():
    # a one-point parameter contour turns the combination into K(f_theta, 1)
    theta0 = 0.7
    link = ps.normal_link(1.0)
    model = ps.NormalKnownVariance(4, 1.0)
    z = np.linspace(-3, 4, 29)
    problem = ps.PredictionProblem(model, link, z, independent=True)
    degenerate = ps.PossibilityContour(
        ps.GridDomain("mean", np.array([theta0, theta0 + 50.0])),
        kind="grid", values=np.array([1.0, 0.0]))
    plan = ps.MonteCarloPlan(np.linspace(-3, 4, 29), n_mc=100, seed=2)
    c = ps.predict_combine(problem, np.zeros(4), degenerate, plan)
    for v in z:
        f = float(stats.chi2.sf((v - theta0) ** 2, 1))
        assert float(c(v)) == pytest.approx(ps.fisher_combine(f, 1.0),
                                            abs=1e-12)


def test_combine_requires_independence():
    link = ps.normal_link(1.0)
    model = ps.NormalKnownVariance(4, 1.0)
    problem = ps.PredictionProblem(model, link, np.linspace(-1, 1, 5),
                                   independent=False)
    degenerate = ps.PossibilityContour(
        ps.GridDomain("mean", np.array([0.0, 50.0])), kind="grid",
        values=np.array([1.0, 0.0]))
    with pytest.raises(ps.MissingIndependenceError):
        ps.predict_combine(problem, np.zeros(4), degenerate,
                           ps.MonteCarloPlan(np.linspace(-1, 1, 5)))


# ---------------------------------------------------------------------------
# max of k future draws


def test_max_of_k_distribution_is_cdf_power():
    base = ps.gamma_link()
    link3 = ps.max_of_k_link(base, 3)
    theta = (1.5, 2.0)
    z = np.linspace(0.05, 8, 40)
    assert np.allclose(link3.log_cdf(z, theta), 3 * base.log_cdf(z, theta),
                       atol=1e-14)
    # density integrates to one
    assert link_mass(link3, theta, 1e-9, 60.0) == pytest.approx(1.0, abs=1e-4)


def test_max_of_k_sampler_matches_distribution():
    base = ps.gamma_link()
    link3 = ps.max_of_k_link(base, 3)
    theta = (1.5, 2.0)
    draws = link3.sample(theta, 40000, substream(6, "maxk"))
    ks = stats.kstest(draws,
                      lambda z: np.exp(link3.log_cdf(z, theta))).statistic
    assert ks < 0.01


def test_max_of_one_is_the_base_link():
    base = ps.gamma_link()
    assert ps.max_of_k_link(base, 1) is base
    with pytest.raises(ps.InvalidParameterError):
        ps.max_of_k_link(base, 0)


# ---------------------------------------------------------------------------
# multinomial next draw


def test_multinomial_next_draw_ratio_against_direct_enumeration():
    y = np.array([25, 3, 4, 7])
    got = ps.multinomial_next_draw_log_ratio(y)

    def sup_loglik(counts):
        c = np.asarray(counts, dtype=float)
        p = c / c.sum()
        return float(np.sum(np.where(c > 0, c * np.log(p, where=c > 0), 0.0)))

    sup = np.array([sup_loglik(y + np.eye(4, dtype=int)[j]) for j in range(4)])
    want = sup - sup.max()
    assert np.allclose(got, want, atol=1e-10)
    assert got[0] == 0.0  # most plausible next category is the modal one


def test_multinomial_predictive_peak_is_modal_category():
    y = np.array([25, 3, 4, 7])
    model = ps.Multinomial(39, 4)
    problem = ps.PredictionProblem(model, None, np.arange(4))
    plan = ps.MonteCarloPlan(np.linspace(0, 3, 4), n_mc=800, seed=11)
    c = ps.predict_profile(problem, y, plan)
    vals = c.grid_values()
    assert int(np.argmax(vals)) == 0
    assert float(vals[0]) == 1.0


# ---------------------------------------------------------------------------
# strong predictive validity (closed forms, simulated data)


def test_predictive_validity_normal_closed_forms():
    n, sims = 5, 1500
    rng = substream(91, "predval")
    z_grid = np.linspace(-6, 6, 5)
    model = ps.NormalKnownVariance(n, 1.0)
    link = ps.normal_link(1.0)
    plan = ps.MonteCarloPlan(np.linspace(-6, 6, 5), n_mc=100, seed=3)
    problem = ps.PredictionProblem(model, link, z_grid, independent=True,
                                   pivot=True)
    hits2 = dict.fromkeys((0.05, 0.1, 0.2), 0)
    pis3 = []
    for _ in range(sims):
        y = rng.standard_normal(n)
        z_new = rng.standard_normal()
        p2 = float(ps.predict_joint_extend(problem, y, plan)(z_new))
        p3 = float(ps.predict_profile(problem, y, plan)(z_new))
        pis3.append(p3)
        for a in hits2:
            hits2[a] += (p2 <= a)
    for a, h in hits2.items():
        assert h / sims <= a + 3 * math.sqrt(a * (1 - a) / sims)
    # option 3 is exactly calibrated here: pi(Z) is uniform
    ks = stats.kstest(pis3, "uniform").statistic
    assert ks < 0.05


def test_prob_to_poss_matches_closed_form():
    rng = substream(44, "p2p")
    logf = lambda z: stats.norm.logpdf(np.asarray(z, float), 0.0, 1.0)
    sampler = lambda r, size: r.standard_normal(int(size))
    n_mc = 20000
    for z in (-1.5, 0.0, 0.8):
        got = ps.prob_to_poss(logf, sampler, z, n_mc, rng)
        want = float(stats.chi2.sf(z ** 2, 1))
        se = math.sqrt(max(want * (1 - want), 1e-4) / n_mc)
        assert abs(got - want) <= 4 * se
