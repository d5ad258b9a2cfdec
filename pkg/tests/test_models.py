"""Model-level oracles.

Frozen constants below were computed with independent routines (SLSQP
primal optimization, direct conditional-likelihood maximization, textbook
formulas) before the corresponding package code was tested against them.
"""

import math

import numpy as np
import pytest
from scipy import optimize, stats

import possim as ps
from possim.rng import substream

from conftest import normal_scores


# ---------------------------------------------------------------------------
# student-t closed form vs the textbook interval


def test_student_t_cut_is_the_textbook_interval(y20):
    n = 20
    model = ps.NormalIID(n, interest="mean")
    grid = np.linspace(-1.5, 1.5, 1201)
    contour = ps.contour_closed_form(model, y20, "student-t", grid)
    iv = ps.plausibility_interval(contour, 0.95).intervals[0]

    m = float(np.mean(y20))
    se = float(np.std(y20, ddof=1)) / math.sqrt(n)
    half = float(stats.t.ppf(0.975, n - 1)) * se
    assert iv.lo == pytest.approx(m - half, abs=1e-6)
    assert iv.hi == pytest.approx(m + half, abs=1e-6)


def test_student_t_contour_value_is_two_sided_t_tail(y20):
    model = ps.NormalIID(20, interest="mean")
    grid = np.linspace(-1.0, 1.0, 41)
    contour = ps.contour_closed_form(model, y20, "student-t", grid)
    m = float(np.mean(y20))
    se = float(np.std(y20, ddof=1)) / math.sqrt(20)
    for mu in (-0.8, -0.2, 0.0, 0.35, 0.9):
        t = abs(m - mu) / se
        assert float(contour(mu)) == pytest.approx(
            2.0 * float(stats.t.sf(t, 19)), abs=1e-10)


# ---------------------------------------------------------------------------
# normal sd closed forms


def test_normal_sd_profile_peaks_at_ml_sd(y20):
    model = ps.NormalIID(20, interest="sd")
    sd_ml = float(np.sqrt(np.mean((y20 - y20.mean()) ** 2)))
    grid = np.unique(np.append(np.geomspace(0.4, 2.5, 201), sd_ml))
    c = ps.contour_closed_form(model, y20, "normal-sd-profile", grid)
    assert float(c(sd_ml)) == 1.0


def test_normal_sd_marginal_peaks_above_ml_sd(y20):
    n = 20
    model = ps.NormalIID(n, interest="sd")
    sd_ml = float(np.sqrt(np.mean((y20 - y20.mean()) ** 2)))
    peak = sd_ml * math.sqrt(n / (n - 1.0))
    grid = np.unique(np.append(np.geomspace(0.4, 2.5, 401), [sd_ml, peak]))
    c = ps.contour_closed_form(model, y20, "normal-sd-marginal", grid)
    vals = c.grid_values()
    assert c.domain.nodes[int(np.argmax(vals))] == pytest.approx(peak, abs=1e-9)
    assert float(c(peak)) == pytest.approx(1.0, abs=1e-12)


def test_normal_sd_closed_form_matches_chi_square_simulation(y20):
    # independent check of the profile form: simulate the chi-square pivot
    n = 20
    model = ps.NormalIID(n, interest="sd")
    sd_ml = float(np.sqrt(np.mean((y20 - y20.mean()) ** 2)))
    grid = np.array([0.7, 0.9, 1.1, 1.4])
    c = ps.contour_closed_form(model, y20, "normal-sd-profile", grid)

    def logratio(w):
        # profile log relative likelihood as a function of w = n*sd_ml^2/s^2
        return 0.5 * n * (np.log(w / n) + 1.0 - w / n)

    rng = substream(202, "sdcheck")
    w_ref = rng.chisquare(n - 1, 400000)
    for s in grid:
        w_obs = n * sd_ml ** 2 / s ** 2
        p = float(np.mean(logratio(w_ref) <= logratio(w_obs)))
        se = math.sqrt(p * (1 - p) / w_ref.size) + 1e-6
        assert float(c(s)) == pytest.approx(p, abs=4 * se)


# ---------------------------------------------------------------------------
# fieller-creasy


def test_fieller_tail_limit_value():
    y = np.array([1.33, 0.33])
    # as the ratio runs off to +-infinity the deviance tends to y2^2
    assert ps.fieller_tail_limit(y) == pytest.approx(
        float(stats.chi2.sf(y[1] ** 2, 1)), abs=1e-12)


def test_fieller_closed_form_limits_and_peak():
    y = np.array([1.33, 0.33])
    model = ps.FiellerCreasy()
    hat = y[0] / y[1]
    grid = np.unique(np.append(np.linspace(-200, 200, 2001), [hat, -2e6, 2e6]))
    c = ps.contour_closed_form(model, y, "fieller-creasy", grid)
    assert float(c(hat)) == pytest.approx(1.0, abs=1e-12)
    # the approach to the horizontal asymptote is O(1/ratio)
    lim = ps.fieller_tail_limit(y)
    assert float(c(-2e6)) == pytest.approx(lim, abs=1e-6)
    assert float(c(2e6)) == pytest.approx(lim, abs=1e-6)


# ---------------------------------------------------------------------------
# behrens-fisher: closed profile vs brute force


def brute_profile_log_ratio(model, y, phi, n_scan=4001):
    """Maximize the constrained likelihood by scan + local polish."""
    m1, v1, m2, v2 = y

    def neg(mu1):
        theta = (mu1, mu1 + phi,
                 v1 + (m1 - mu1) ** 2, v2 + (m2 - mu1 - phi) ** 2)
        return -model.log_density(y, theta)

    lo = min(m1, m2 - phi) - 5.0
    hi = max(m1, m2 - phi) + 5.0
    xs = np.linspace(lo, hi, n_scan)
    vals = np.array([neg(x) for x in xs])
    j = int(np.argmin(vals))
    res = optimize.minimize_scalar(neg, bounds=(xs[max(j - 1, 0)],
                                                xs[min(j + 1, n_scan - 1)]),
                                   method="bounded", options={"xatol": 1e-12})
    return -float(res.fun) - model.max_log_density(y)


@pytest.mark.parametrize("phi", [-3.0, -1.0, 0.0, 0.9])
def test_behrens_fisher_cubic_profile_matches_brute_force(phi):
    model = ps.BehrensFisher(5, 11)
    y = model.summary_from_stats(7.580, math.sqrt(2.237), 6.136,
                                 math.sqrt(0.073))
    got = model.profile_log_ratio(y, phi)
    want = brute_profile_log_ratio(model, y, phi)
    assert got == pytest.approx(want, abs=1e-8)


def test_behrens_fisher_cubic_profile_random_summaries():
    model = ps.BehrensFisher(4, 7)
    rng = substream(31, "bfrand")
    for _ in range(20):
        y = np.array([rng.normal(), 0.2 + rng.random() * 3,
                      rng.normal(), 0.2 + rng.random() * 3])
        phi = rng.normal() * 2
        got = model.profile_log_ratio(y, phi)
        want = brute_profile_log_ratio(model, y, phi)
        assert got == pytest.approx(want, abs=1e-7)


def test_behrens_fisher_reference_scale_convention():
    # reference tables draw ddof-1 chi-square scale summaries, while the
    # physical sampler stays with maximum-likelihood variances
    model = ps.BehrensFisher(5, 11)
    theta = (0.0, 0.0, 1.0, 1.0)
    ref = model.reference_sample(theta, 200000, substream(3, "a"))
    phys = model.sample(theta, 200000, substream(3, "b"))
    assert float(np.mean(ref[:, 1])) == pytest.approx(1.0, abs=0.01)
    assert float(np.mean(phys[:, 1])) == pytest.approx(4.0 / 5.0, abs=0.01)


# ---------------------------------------------------------------------------
# gamma mean


def test_gamma_profile_fit_satisfies_score_equation():
    model = ps.GammaMean(10)
    y = np.array([0.31, 0.55, 0.70, 0.84, 1.02, 1.21, 1.45, 1.76, 2.2, 3.1])
    for phi in (0.9, 1.3, 2.0):
        shape = model.fit_profile_mle(y, phi)
        assert abs(model.shape_score(y, shape, phi)) < 1e-8


def test_gamma_profile_log_ratio_nonpositive_and_peaked():
    model = ps.GammaMean(10)
    y = np.array([0.31, 0.55, 0.70, 0.84, 1.02, 1.21, 1.45, 1.76, 2.2, 3.1])
    hat = model.interest_mle(y)
    assert hat == pytest.approx(float(np.mean(y)), abs=1e-12)
    assert model.profile_log_ratio(y, hat) == pytest.approx(0.0, abs=1e-10)
    for phi in (0.7, 1.0, 1.9):
        assert model.profile_log_ratio(y, phi) <= 1e-12


# ---------------------------------------------------------------------------
# two binomials, conditional reduction


def test_conditional_mle_matches_independent_oracle():
    # frozen: direct maximization of the noncentral-hypergeometric likelihood
    m1 = ps.TwoBinomial(43, 39)
    assert m1.cond_mle(3, 2) == pytest.approx(0.810162458031625, abs=1e-6)
    m6 = ps.TwoBinomial(146, 154)
    assert m6.cond_mle(15, 11) == pytest.approx(1.0014636187465986, abs=1e-6)


def test_conditional_pmf_normalizes():
    m = ps.TwoBinomial(43, 39)
    for psi in (-1.0, 0.0, 0.81, 2.3):
        logp = m.cond_log_pmf(3, np.array([psi]))
        assert float(np.exp(logp).sum()) == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# neyman-scott pairs


def test_neyman_scott_marginal_fixes_the_ml_bias():
    model = ps.NeymanScott(400)
    truth = (1.5, np.zeros(400))
    y = model.sample(truth, 1, substream(8, "ns"))[0]
    # ML variance estimate converges to half the truth; the within-pair
    # difference reduction stays on target and is exactly twice the ML fit
    assert model.marginal_interest_mle(y) == pytest.approx(
        2.0 * model.interest_mle(y), rel=1e-12)
    assert model.interest_mle(y) == pytest.approx(0.75, abs=0.12)
    assert model.marginal_interest_mle(y) == pytest.approx(1.5, abs=0.25)


def test_neyman_scott_marginal_log_ratio_is_chi_square_deviance():
    model = ps.NeymanScott(6)
    y = model.sample((0.8, np.zeros(6)), 1, substream(9, "ns2"))[0]
    hat = model.marginal_interest_mle(y)
    n = 6

    def oracle(v):
        # relative likelihood of n iid N(0, 2v) differences
        return 0.5 * n * (np.log(hat / v) + 1.0 - hat / v)

    for v in (0.4, 0.8, 1.7):
        assert model.marginal_log_ratio(y, v) == pytest.approx(
            oracle(v), abs=1e-10)


# ---------------------------------------------------------------------------
# configuration round trip


def test_model_from_config_round_trip():
    m = ps.model_from_config({"name": "behrens-fisher", "n1": 5, "n2": 11})
    assert isinstance(m, ps.BehrensFisher) and m.n1 == 5 and m.n2 == 11
    with pytest.raises(ps.InvalidParameterError):
        ps.model_from_config({"name": "no-such-family"})
    with pytest.raises(ps.InvalidParameterError):
        ps.model_from_config({"name": "behrens-fisher", "n1": 5})


def test_invalid_model_arguments_raise():
    with pytest.raises(ps.InvalidParameterError):
        ps.NormalIID(0)
    with pytest.raises(ps.InvalidParameterError):
        ps.NormalIID(5, interest="median")
    with pytest.raises(ps.InvalidParameterError):
        ps.BehrensFisher(1, 5)
