"""Likelihood-free contours: EL, bootstrap, split, conformal, risk."""

import math

import numpy as np
import pytest
from scipy import stats

import possim as ps
from possim.nonparametric import el_mean_dual
from possim.rng import substream

from conftest import normal_scores


# ---------------------------------------------------------------------------
# empirical likelihood, mean


def test_el_mean_log_ratio_matches_primal_oracle(y12):
    # frozen: SLSQP primal optimization over the weight simplex
    assert ps.el_mean_log_ratio(y12, 0.3) == pytest.approx(
        -0.5342699942980967, abs=1e-10)
    assert ps.el_mean_log_ratio(y12, -0.55) == pytest.approx(
        -1.7642395324094098, abs=1e-10)


def test_el_mean_at_sample_mean_is_one(y12):
    assert ps.el_mean_log_ratio(y12, float(np.mean(y12))) == pytest.approx(
        0.0, abs=1e-12)


def test_el_dual_score_equation_residual(y12):
    worst = 0.0
    for phi in np.linspace(-0.9, 0.9, 25):
        t, _ = el_mean_dual(y12, phi)
        d = y12 - phi
        worst = max(worst, abs(float(np.sum(d / (1.0 + t * d)))))
    assert worst < 1e-10


def test_el_mean_outside_hull_is_impossible(y12):
    assert ps.el_mean_log_ratio(y12, float(np.max(y12)) + 0.5) == -np.inf
    assert ps.el_mean_log_ratio(y12, float(np.max(y12))) == -np.inf


def test_el_wilks_chi_square_calibration():
    # -2 log EL ratio at the true mean is asymptotically chi-square_1
    rng = substream(42, "wilks")
    stat = [-2.0 * ps.el_mean_log_ratio(rng.standard_normal(200), 0.0)
            for _ in range(2000)]
    assert stats.kstest(stat, "chi2", args=(1,)).statistic < 0.05


# ---------------------------------------------------------------------------
# empirical likelihood, quantile


def test_el_quantile_hand_example():
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    # sample median is y_(3); at phi = 2.5 two observations sit at or below
    want = (2.5 / 2.0) ** 2 * (2.5 / 3.0) ** 3
    assert ps.el_quantile_relative_likelihood(y, 0.5, 2.5) == pytest.approx(
        want, abs=1e-12)
    assert ps.el_quantile_relative_likelihood(y, 0.5, 3.0) == 1.0


def test_el_quantile_piecewise_constant_between_order_stats():
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    a = ps.el_quantile_relative_likelihood(y, 0.5, 2.2)
    b = ps.el_quantile_relative_likelihood(y, 0.5, 2.8)
    assert a == b


def test_el_quantile_level_validation():
    y = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ps.InvalidParameterError):
        ps.el_quantile_relative_likelihood(y, 0.0, 2.0)


# ---------------------------------------------------------------------------
# nonparametric multinomial contour


def test_np_multinomial_matches_binomial_within_mc_error():
    # two categories: the nonparametric engine against exact enumeration
    y = np.array([9, 16])
    n_mc = 4000
    npc = ps.np_multinomial_contour(y, n_mc=n_mc, seed=10, step=40)
    model = ps.Binomial(25)
    plan = ps.MonteCarloPlan(np.linspace(0.1, 0.7, 13))
    exact = ps.contour_vacuous(model, np.array([9]), plan)
    # query on the plan nodes: grid-valued contours interpolate off-node
    for p in np.linspace(0.15, 0.65, 11):
        e = float(exact(p))
        se = math.sqrt(max(e * (1 - e), 2.5e-4) / n_mc)
        assert abs(float(npc(np.array([p, 1 - p]))) - e) <= 3 * se


def test_np_multinomial_peak_at_observed_frequencies():
    y = np.array([25, 3, 4, 7])
    c = ps.np_multinomial_contour(y, n_mc=500, seed=4)
    assert float(c(y / y.sum())) == 1.0


def test_sup_along_curve_finds_known_maximum():
    y = np.array([25, 3, 4, 7])
    c = ps.np_multinomial_contour(y, n_mc=500, seed=4)
    curve = ps.datasets.linkage_curve
    sup, argmax = ps.sup_along_curve(c, curve, 0.0, 1.0)
    # the curve hits the observed frequencies nowhere, so the sup is < 1,
    # but it must dominate every scanned point
    ws = np.linspace(0, 1, 101)
    vals = [float(c(curve(w))) for w in ws]
    assert sup >= max(vals) - 1e-9
    assert 0.0 <= argmax <= 1.0


# ---------------------------------------------------------------------------
# bootstrap


def test_bootstrap_contour_is_seed_stable(y20):
    grid = np.linspace(-0.8, 0.8, 33)
    a = ps.el_mean_bootstrap_contour(y20, grid, B=400, seed=9)
    b = ps.el_mean_bootstrap_contour(y20, grid, B=400, seed=9)
    assert np.array_equal(a.grid_values(), b.grid_values())
    c = ps.el_mean_bootstrap_contour(y20, grid, B=400, seed=10)
    assert not np.array_equal(a.grid_values(), c.grid_values())


def test_bootstrap_contour_peaks_at_estimate(y20):
    grid = np.linspace(-0.8, 0.8, 33)
    c = ps.el_mean_bootstrap_contour(y20, grid, B=400, seed=9)
    assert float(np.max(c.grid_values())) == 1.0
    assert float(c(float(np.mean(y20)))) == 1.0


def test_quantile_bootstrap_contour_brackets_sample_median():
    rng = substream(17, "qboot")
    y = rng.gamma(3.0, 1.0, 60)
    med = float(np.median(y))
    grid = np.linspace(np.quantile(y, 0.05), np.quantile(y, 0.95), 61)
    c = ps.el_quantile_bootstrap_contour(y, 0.5, grid, B=500, seed=3)
    cut = ps.alpha_cut(c, 0.05)
    assert cut.contains(med)


# ---------------------------------------------------------------------------
# split likelihood


def test_split_contour_closed_form_oracle(y20):
    # normal with known unit variance: the truncated ratio has an explicit
    # form driven by the two half-sample means
    grid = np.linspace(-1.5, 1.5, 41)
    c = ps.split_contour(lambda n: ps.NormalKnownVariance(n, 1.0), y20, grid)
    n1 = 10
    y1, y2 = y20[:n1], y20[n1:]
    m1, m2 = float(np.mean(y1)), float(np.mean(y2))
    for phi in grid:
        gap = 0.5 * n1 * ((m1 - m2) ** 2 - (m1 - phi) ** 2)
        want = min(1.0, math.exp(gap))
        assert float(c(phi)) == pytest.approx(want, abs=1e-12)


def test_split_contour_validity():
    # mean-one e-value: P(pi(phi*) <= alpha) <= alpha, any alpha
    rng = substream(55, "splitval")
    sims, n = 2000, 20
    grid = np.array([0.0, 1.0])  # phi* = 0 is a node
    hits = dict.fromkeys((0.05, 0.1, 0.2), 0)
    for _ in range(sims):
        y = rng.standard_normal(n)
        pi0 = float(ps.split_contour(
            lambda m: ps.NormalKnownVariance(m, 1.0), y, grid)(0.0))
        for a in hits:
            hits[a] += (pi0 <= a)
    for a, h in hits.items():
        assert h / sims <= a + 3 * math.sqrt(a * (1 - a) / sims)


def test_split_contour_needs_enough_data():
    with pytest.raises(ps.DegenerateSplitError):
        ps.split_contour(lambda n: ps.NormalKnownVariance(n, 1.0),
                         np.array([0.1, -0.2, 0.4]), np.linspace(-1, 1, 5))


# ---------------------------------------------------------------------------
# conformal


def test_conformal_transducer_hand_examples():
    y = np.array([1.0, 2.0, 3.0])
    score = ps.mean_distance_score()
    assert ps.conformal_transducer(y, 2.0, score) == 1.0
    assert ps.conformal_transducer(y, 10.0, score) == 0.25


def test_conformal_contour_is_consonant_and_monotone(y20):
    z = np.linspace(-3, 3, 121)
    c = ps.conformal_contour(y20, z, ps.mean_distance_score())
    vals = c.grid_values()
    assert float(np.max(vals)) == 1.0
    peak = int(np.argmax(vals))
    assert np.all(np.diff(vals[:peak + 1]) >= -1e-12)
    assert np.all(np.diff(vals[peak:]) <= 1e-12)


def test_conformal_exchangeability_validity():
    rng = substream(77, "conformal")
    score = ps.mean_distance_score()
    sims, n = 2000, 20
    hits = dict.fromkeys((0.05, 0.1, 0.2), 0)
    for _ in range(sims):
        y = rng.standard_normal(n + 1)
        pi = ps.conformal_transducer(y[:n], y[n], score)
        for a in hits:
            hits[a] += (pi <= a)
    for a, h in hits.items():
        assert h / sims <= a + 3 * math.sqrt(a * (1 - a) / sims)


# ---------------------------------------------------------------------------
# risk contours


def test_risk_contour_check_loss_peaks_near_sample_quantile():
    rng = substream(23, "risk")
    y = rng.gamma(3.0, 1.0, 80)
    q30 = float(np.quantile(y, 0.3))
    grid = np.linspace(np.quantile(y, 0.05), np.quantile(y, 0.8), 151)
    c = ps.risk_contour(y, ps.check_loss(0.3), grid, B=400, seed=2)
    peak = c.domain.nodes[int(np.argmax(c.grid_values()))]
    spacing = grid[1] - grid[0]
    assert abs(peak - q30) <= 12 * spacing
    assert float(np.max(c.grid_values())) == 1.0


def test_squared_error_risk_peaks_at_mean(y20):
    grid = np.linspace(-0.6, 0.6, 121)
    c = ps.risk_contour(y20, ps.squared_error_loss(), grid, B=400, seed=5)
    peak = c.domain.nodes[int(np.argmax(c.grid_values()))]
    assert abs(peak - float(np.mean(y20))) <= 3 * (grid[1] - grid[0])
