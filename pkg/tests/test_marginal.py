"""Contour engines: reductions agree with closed forms and with each other."""

import math

import numpy as np
import pytest

import possim as ps

from conftest import normal_scores


def test_generic_pivot_engine_matches_student_t_closed_form(y20):
    # the same 20 grid points, Monte Carlo vs analytic, within 3 MC SEs
    model = ps.NormalIID(20, interest="mean")
    grid = np.linspace(-0.9, 0.9, 20)
    n_mc = 4000
    plan = ps.MonteCarloPlan(grid, n_mc=n_mc, seed=19)
    mc = ps.contour_vacuous(model, y20, plan)
    closed = ps.contour_closed_form(model, y20, "student-t", grid)
    for g in grid:
        p = float(closed(g))
        se = math.sqrt(max(p * (1 - p), 1e-4) / n_mc)
        assert abs(float(mc(g)) - p) <= 3 * se


def test_full_parameter_contour_peaks_at_spliced_mle(y10):
    model = ps.NormalIID(10, interest="mean")
    plan = ps.MonteCarloPlan(np.linspace(-1, 1, 7), n_mc=400, seed=5)
    axes = (("mean", np.linspace(-1, 1, 7)), ("sd", np.geomspace(0.6, 1.8, 7)))
    joint = ps.contour_full_parameter(model, y10, plan, axes)
    hat = (float(np.mean(y10)),
           float(np.sqrt(np.mean((y10 - y10.mean()) ** 2))))
    assert hat[0] in joint.domain.axes[0].nodes
    assert hat[1] in joint.domain.axes[1].nodes
    assert float(joint(hat)) == 1.0
    assert float(np.nanmax(joint.grid_values())) == 1.0


def test_monotone_transform_of_ordering_leaves_contour_unchanged():
    # squaring the relative likelihood doubles every log-ratio; ranks and
    # hence tail probabilities cannot move when the seed is shared
    model = ps.GammaMean(10)
    y = np.array([0.31, 0.55, 0.70, 0.84, 1.02, 1.21, 1.45, 1.76, 2.2, 3.1])
    base = ps.make_ordering(model, "profile")

    class Squared:
        strategy = "profile"

        def __init__(self, inner):
            self.inner = inner

        def log_ratio(self, y, phi):
            return 2.0 * self.inner.log_ratio(y, phi)

        def log_ratio_vec(self, y, phis):
            return 2.0 * self.inner.log_ratio_vec(y, phis)

        def log_ratio_batch(self, batch, phi):
            return 2.0 * self.inner.log_ratio_batch(batch, phi)

        def __getattr__(self, name):
            return getattr(self.inner, name)

    plan = ps.MonteCarloPlan(np.linspace(0.6, 2.6, 15), n_mc=500, seed=23,
                             nuisance_grid=np.geomspace(0.5, 8, 9))
    a = ps.contour_vacuous(model, y, plan, ordering=base)
    b = ps.contour_vacuous(model, y, plan, ordering=Squared(base))
    assert np.array_equal(a.grid_values(), b.grid_values())


def test_vacuous_engine_is_deterministic_given_plan():
    model = ps.BehrensFisher(5, 11)
    y = model.summary_from_stats(7.580, math.sqrt(2.237), 6.136,
                                 math.sqrt(0.073))
    plan = ps.MonteCarloPlan(np.linspace(-5, 2, 41), n_mc=800, seed=101,
                             nuisance_grid=np.geomspace(0.001, 100, 25),
                             threads=2)
    a = ps.contour_vacuous(model, y, plan)
    b = ps.contour_vacuous(model, y, plan)
    assert np.array_equal(a.grid_values(), b.grid_values())


def test_behrens_fisher_interval_tightens_with_wider_lambda_grid():
    # the nuisance sup can only grow when the grid gains nodes
    model = ps.BehrensFisher(5, 11)
    y = model.summary_from_stats(7.580, math.sqrt(2.237), 6.136,
                                 math.sqrt(0.073))
    grid = np.linspace(-5, 2, 81)
    coarse = ps.MonteCarloPlan(grid, n_mc=2000, seed=7,
                               nuisance_grid=np.geomspace(0.01, 10, 5))
    fine_nodes = np.unique(np.concatenate(
        [np.geomspace(0.01, 10, 5), np.geomspace(0.005, 50, 21)]))
    fine = ps.MonteCarloPlan(grid, n_mc=2000, seed=7,
                             nuisance_grid=fine_nodes)
    c1 = ps.contour_vacuous(model, y, coarse)
    c2 = ps.contour_vacuous(model, y, fine)
    assert np.all(c2.grid_values() >= c1.grid_values() - 1e-12)


def test_choquet_with_flat_prior_recovers_vacuous_contour():
    model = ps.FiellerCreasy()
    y = np.array([1.33, 0.33])
    grid = np.linspace(-2, 10, 21)
    n_mc = 4000
    plan = ps.MonteCarloPlan(grid, n_mc=n_mc, seed=77,
                             nuisance_grid=np.linspace(0.05, 2.0, 9))
    vac = ps.contour_vacuous(model, y, plan)
    cho = ps.contour_choquet(model, y, ps.PartialPrior.markov(1e12), plan)
    tol = 4 * math.sqrt(0.25 / n_mc) + 1e-9
    assert float(np.max(np.abs(cho.grid_values() - vac.grid_values()))) <= tol


def test_choquet_with_tight_prior_pulls_plausibility_down():
    model = ps.FiellerCreasy()
    y = np.array([1.33, 0.33])
    grid = np.linspace(-2, 10, 21)
    plan = ps.MonteCarloPlan(grid, n_mc=2000, seed=78,
                             nuisance_grid=np.linspace(0.05, 2.0, 7))
    loose = ps.contour_choquet(model, y, ps.PartialPrior.markov(1e12), plan)
    tight = ps.contour_choquet(model, y, ps.PartialPrior.markov(0.5), plan)
    far = [g for g in grid if abs(g) > 2.0]
    drop = [float(loose(g)) - float(tight(g)) for g in far]
    assert max(drop) > 0.05
    assert min(drop) >= -3 * math.sqrt(0.25 / 2000)


def test_conditional_contour_peaks_at_conditional_mle():
    model = ps.TwoBinomial(43, 39)
    plan = ps.MonteCarloPlan(np.linspace(-4, 6, 201))
    c = ps.contour_conditional(model, (1, 2), plan)
    hat = model.cond_mle(3, 2)
    assert float(c(hat)) == pytest.approx(1.0, abs=1e-12)
    assert float(np.max(c.grid_values())) == pytest.approx(1.0, abs=1e-12)


def test_conditional_contour_rejects_other_models():
    with pytest.raises(ps.ModelMismatchError):
        ps.contour_conditional(ps.NormalIID(5),
                               normal_scores(5),
                               ps.MonteCarloPlan(np.linspace(-1, 1, 11)))


def test_binomial_enumerable_contour_is_exact():
    model = ps.Binomial(25)
    plan = ps.MonteCarloPlan(np.linspace(0.05, 0.95, 37))
    c = ps.contour_vacuous(model, np.array([9]), plan)
    # exact enumeration: repeated calls match to the bit, no MC noise
    c2 = ps.contour_vacuous(model, np.array([9]), plan)
    assert np.array_equal(c.grid_values(), c2.grid_values())
    assert float(np.max(c.grid_values())) == 1.0

    # direct oracle at one point: sum binomial pmf over the rejection set
    p0 = 0.2
    lr = model.full_log_ratio_support(p0)
    r_obs = lr[9]
    pmf = np.exp(model.log_pmf(model.support(), p0))
    assert float(c(p0)) == pytest.approx(
        float(np.sum(pmf[lr <= r_obs + 1e-12])), abs=1e-10)


def test_interval_grows_with_level(y20):
    model = ps.NormalIID(20, interest="mean")
    grid = np.linspace(-1.2, 1.2, 401)
    c = ps.contour_closed_form(model, y20, "student-t", grid)
    i90 = ps.plausibility_interval(c, 0.90).intervals[0]
    i99 = ps.plausibility_interval(c, 0.99).intervals[0]
    assert i99.lo < i90.lo < i90.hi < i99.hi
