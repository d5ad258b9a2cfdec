"""Contours that work without a trusted parametric likelihood.

Empirical likelihood supplies exact orderings for the mean and quantiles;
the multinomial contour handles fully discrete data; everything else gets
one of the generic surrogates the theory endorses: bootstrap calibration,
a split-sample likelihood ratio, a risk-gap ordering, or the conformal
transducer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .contours import GridDomain, LatticeDomain, PossibilityContour
from .errors import (DegenerateDataError, DegenerateSplitError,
                     InvalidParameterError, PossimError)
from .rng import substream


# ---------------------------------------------------------------------------
# empirical likelihood: mean


def el_mean_dual(y, phi):
    """(multiplier, log-ratio) of the empirical likelihood at a candidate mean.

    Solves the dual score equation sum d_i / (1 + t d_i) = 0 for the
    multiplier t inside its feasibility bracket (d_i = y_i - phi); the
    score is strictly decreasing there, so a bracketed root plus Newton
    polish is safe.  Outside the open hull of the data the ratio is 0.
    """
    y = np.asarray(y, dtype=float).ravel()
    phi = float(phi)
    d = y - phi
    if phi <= y.min() or phi >= y.max():
        return math.nan, -math.inf
    if abs(d.sum()) < 1e-14 * max(1.0, np.abs(d).max()):
        return 0.0, 0.0

    score = lambda t: float(np.sum(d / (1.0 + t * d)))
    lo0, hi0 = -1.0 / d.max(), -1.0 / d.min()   # d.min() < 0 < d.max()
    width = hi0 - lo0
    lo = hi = None
    for k in range(2, 40):
        delta = width * 10.0 ** (-k)
        a, b = lo0 + delta, hi0 - delta
        if a < b and score(a) > 0.0 > score(b):
            lo, hi = a, b
            break
    if lo is None:
        raise DegenerateDataError("no feasible multiplier bracket")
    t = optimize.brentq(score, lo, hi, xtol=1e-14, rtol=8.9e-16)
    for _ in range(2):
        g = np.sum(d / (1.0 + t * d))
        h = -np.sum(d * d / (1.0 + t * d) ** 2)
        if h < 0 and np.isfinite(g):
            step = g / h
            cand = t - step
            if lo0 < cand < hi0:
                t = cand
    log_ratio = float(-np.sum(np.log1p(t * d)))
    return float(t), min(0.0, log_ratio)


def el_mean_log_ratio(y, phi) -> float:
    return el_mean_dual(y, phi)[1]


# ---------------------------------------------------------------------------
# empirical likelihood: quantile


def sample_quantile(y, r) -> float:
    """Inverse-ECDF sample quantile (the smallest order statistic with
    ECDF at or above r)."""
    y = np.sort(np.asarray(y, dtype=float).ravel())
    k = max(int(math.ceil(len(y) * r)), 1)
    return float(y[k - 1])


def el_quantile_relative_likelihood(y, r, phi) -> float:
    """Ratio in [0, 1] for a candidate r-th quantile.

    At the sample quantile the count is pinned to n*r, making the ratio
    exactly one; elsewhere the count of observations at or below (strictly
    below, to the right of the sample quantile) drives a two-cell
    multinomial ratio, with the 0^0 = 1 convention at the edges.  The
    ratio is piecewise constant between order statistics.
    """
    if not 0.0 < r < 1.0:
        raise InvalidParameterError("quantile level must lie in (0, 1)")
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    phi_hat = sample_quantile(y, r)
    phi = float(phi)
    if phi < phi_hat:
        u = float(np.sum(y <= phi))
    elif phi > phi_hat:
        u = float(np.sum(y < phi))
    else:
        u = n * r

    out = 0.0
    if u > 0:
        out += u * math.log(n * r / u)
    if n - u > 0:
        out += (n - u) * math.log(n * (1.0 - r) / (n - u))
    return float(min(1.0, math.exp(min(out, 0.0))))


def el_quantile_log_ratio(y, r, phi) -> float:
    val = el_quantile_relative_likelihood(y, r, phi)
    return -math.inf if val == 0.0 else min(0.0, math.log(val))


# ---------------------------------------------------------------------------
# fully discrete data: multinomial contour


def _np_mult_log_ratio(counts, theta, n):
    """log of prod (n theta_k / c_k)^{c_k}, rows of counts; 0^0 = 1."""
    c = np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = c * (np.log(n * theta)[None, :] - np.log(np.maximum(c, 1.0)))
    term = np.where(c > 0, term, 0.0)
    return np.minimum(term.sum(axis=1), 0.0)


def np_multinomial_contour(y, n_mc: int = 2000, seed: int = 0,
                           step: int = 60) -> PossibilityContour:
    """Monte Carlo contour for the category-probability vector.

    The ordering is the closed-form relative likelihood of the counts; the
    tail probability at each candidate is estimated from one shared block
    of uniforms (thresholded against the candidate's cumulative
    probabilities), so evaluations at nearby candidates are positively
    coupled and curve maximization stays smooth.  The returned contour is
    evaluator-backed; the attached lattice is only a default tabulation.
    """
    y = np.asarray(y, dtype=float).ravel()
    if np.any(y < 0) or y.sum() <= 0:
        raise InvalidParameterError("counts must be nonnegative with n > 0")
    n = int(y.sum())
    k = y.size
    u_block = substream(seed, "np-mult").random((int(n_mc), n))

    def evaluator(theta):
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != k:
            raise InvalidParameterError("candidate has the wrong length")
        if abs(theta.sum() - 1.0) > 1e-8 or np.any(theta < -1e-12):
            raise InvalidParameterError("candidate must lie on the simplex")
        zero = theta <= 0.0
        if np.any(zero):
            if np.any(y[zero] > 0):
                return 0.0
            keep = ~zero
            return _reduced(theta[keep], y[keep])
        return _reduced(theta, y)

    def _reduced(theta, counts_obs):
        r_obs = _np_mult_log_ratio(counts_obs[None, :], theta, n)[0]
        cum = np.cumsum(theta)[:-1]
        idx = np.searchsorted(cum, u_block, side="right")
        counts = np.stack([(idx == j).sum(axis=1) for j in range(theta.size)],
                          axis=1)
        r_sim = _np_mult_log_ratio(counts, theta, n)
        return float(np.mean(r_sim <= r_obs + 1e-12))

    from .models.counts import simplex_lattice

    lattice = simplex_lattice(k, step) if k <= 4 else simplex_lattice(k, 10)
    lattice = np.vstack([lattice, (y / n)[None, :]])
    dom = LatticeDomain("theta", lattice)
    return PossibilityContour(dom, kind="monte-carlo", evaluator=evaluator,
                              meta={"engine": "np-multinomial",
                                    "n_mc": int(n_mc), "seed": int(seed)})


def sup_along_curve(contour: PossibilityContour, curve, lo: float, hi: float,
                    n_scan: int = 201):
    """(sup, argmax) of the contour along a one-parameter curve."""
    ws = np.linspace(lo, hi, int(n_scan))
    fn = lambda w: float(contour(curve(w)))
    vals = np.array([fn(w) for w in ws])
    j = int(np.argmax(vals))
    best_w, best_v = float(ws[j]), float(vals[j])
    a, b = ws[max(j - 1, 0)], ws[min(j + 1, len(ws) - 1)]
    if b > a:
        res = optimize.minimize_scalar(lambda w: -fn(w), bounds=(a, b),
                                       method="bounded",
                                       options={"xatol": 1e-6 * (hi - lo)})
        if -float(res.fun) > best_v:
            best_v, best_w = -float(res.fun), float(res.x)
    return min(1.0, best_v), best_w


# ---------------------------------------------------------------------------
# bootstrap calibration


def bootstrap_contour(y, phi_hat, log_ratio, phi_grid, B: int = 1000,
                      seed: int = 0, name: str = "phi") -> PossibilityContour:
    """Calibrate an ordering by resampling: the contour at phi is the
    fraction of resamples whose ordering at the original feature estimate
    falls at or below the observed ordering at phi.

    log_ratio(dataset, phi) -> value <= 0; phi_hat stays fixed across
    resamples.  The contour equals 1 at phi_hat exactly.
    """
    if B < 100:
        raise InvalidParameterError("too few resamples to calibrate with")
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    grid = np.unique(np.asarray(phi_grid, dtype=float))
    if grid[0] <= phi_hat <= grid[-1]:
        grid = np.unique(np.append(grid, float(phi_hat)))

    idx = substream(seed, "bootstrap").integers(0, n, size=(int(B), n))
    boot = np.sort([float(log_ratio(y[row], phi_hat)) for row in idx])
    obs = np.array([float(log_ratio(y, p)) for p in grid])
    pi = np.searchsorted(boot, obs + 1e-12, side="right") / float(B)
    return PossibilityContour(
        GridDomain(name, grid), kind="grid", values=pi,
        mc_se=np.sqrt(pi * (1.0 - pi) / B),
        meta={"engine": "bootstrap", "B": int(B), "seed": int(seed),
              "phi_hat": float(phi_hat)})


def el_mean_bootstrap_contour(y, phi_grid, B: int = 1000,
                              seed: int = 0) -> PossibilityContour:
    y = np.asarray(y, dtype=float).ravel()
    return bootstrap_contour(y, float(y.mean()),
                             lambda d, p: el_mean_log_ratio(d, p),
                             phi_grid, B=B, seed=seed, name="mean")


def el_quantile_bootstrap_contour(y, r, phi_grid, B: int = 1000,
                                  seed: int = 0) -> PossibilityContour:
    y = np.asarray(y, dtype=float).ravel()
    return bootstrap_contour(y, sample_quantile(y, r),
                             lambda d, p: el_quantile_log_ratio(d, r, p),
                             phi_grid, B=B, seed=seed, name="quantile")


# ---------------------------------------------------------------------------
# split-sample likelihood ratio


def split_contour(model_factory, y, phi_grid) -> PossibilityContour:
    """Truncated split likelihood ratio contour.

    The first ceil(n/2) observations carry the constrained fit; the rest
    supply an unconstrained plug-in.  model_factory(n) builds the
    parametric family for a chunk of size n.  Values are min(1, ratio), so
    validity comes from a mean-one bound rather than exact calibration.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if n < 4:
        raise DegenerateSplitError("need at least 4 observations to split")
    n1 = (n + 1) // 2
    y1, y2 = y[:n1], y[n1:]
    m1 = model_factory(n1)
    m2 = model_factory(n - n1)
    try:
        theta2 = m2.fit_mle(y2)
        den = m1.log_density(y1, theta2)
    except (DegenerateDataError, InvalidParameterError) as err:
        raise DegenerateSplitError(f"holdout fit failed: {err}")

    grid = np.unique(np.asarray(phi_grid, dtype=float))
    vals = np.empty(grid.size)
    for i, phi in enumerate(grid):
        try:
            lam = m1.fit_profile_mle(y1, phi)
            num = m1.log_density(y1, m1.theta_from(phi, lam))
        except (DegenerateDataError, InvalidParameterError) as err:
            raise DegenerateSplitError(f"constrained fit failed: {err}")
        gap = num - den
        vals[i] = 1.0 if gap >= 0 else math.exp(gap)
    return PossibilityContour(GridDomain(m1.interest_name, grid), kind="grid",
                              values=vals,
                              meta={"engine": "split", "n1": int(n1)})


# ---------------------------------------------------------------------------
# risk-gap ordering


@dataclass(frozen=True)
class LossFunction:
    """Pointwise loss; fn(observations, phi) -> per-observation losses."""

    name: str
    fn: object


def squared_error_loss() -> LossFunction:
    return LossFunction("squared-error", lambda v, p: (np.asarray(v) - p) ** 2)


def absolute_loss() -> LossFunction:
    return LossFunction("absolute", lambda v, p: np.abs(np.asarray(v) - p))


def check_loss(r: float) -> LossFunction:
    if not 0.0 < r < 1.0:
        raise InvalidParameterError("check-loss level must lie in (0, 1)")

    def fn(v, p):
        d = np.asarray(v, dtype=float) - p
        return d * (r - (d < 0))

    return LossFunction(f"check-{r}", fn)


def empirical_risk(y, loss: LossFunction, phi_grid) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    return np.array([float(np.mean(loss.fn(y, p))) for p in phi_grid])


def risk_minimizer(y, loss: LossFunction, phi_grid) -> float:
    grid = np.asarray(phi_grid, dtype=float)
    risks = empirical_risk(y, loss, grid)
    j = int(np.argmin(risks))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    best_p, best_r = float(grid[j]), float(risks[j])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda p: float(np.mean(loss.fn(y, p))), bounds=(lo, hi),
            method="bounded", options={"xatol": 1e-10})
        if float(res.fun) < best_r:
            best_p = float(res.x)
    return best_p


def risk_contour(y, loss: LossFunction, phi_grid, B: int = 1000,
                 seed: int = 0) -> PossibilityContour:
    """Bootstrap-calibrated contour from the empirical risk gap.

    The ordering exp{-(risk(phi) - risk at the minimizer)} mimics a
    relative likelihood without one; the grid carries the minimization.
    """
    y = np.asarray(y, dtype=float).ravel()
    grid = np.unique(np.asarray(phi_grid, dtype=float))
    phi_hat = risk_minimizer(y, loss, grid)

    def log_ratio(dataset, phi):
        base = float(np.mean(loss.fn(dataset, risk_minimizer(dataset, loss, grid))))
        return min(0.0, -(float(np.mean(loss.fn(dataset, phi))) - base))

    out = bootstrap_contour(y, phi_hat, log_ratio, grid, B=B, seed=seed,
                            name=loss.name)
    out.meta["engine"] = "risk-bootstrap"
    return out


# ---------------------------------------------------------------------------
# conformal transducer


@dataclass(frozen=True)
class NonconformityScore:
    """Conformity of one item to a bag; symmetric in the bag's order."""

    name: str
    fn: object  # (bag: 1-D array, item: float) -> float


def mean_distance_score() -> NonconformityScore:
    return NonconformityScore(
        "mean-distance", lambda bag, x: -abs(float(x) - float(np.mean(bag))))


def conformal_transducer(y, z, score: NonconformityScore) -> float:
    """Exact leave-one-out plausibility of the candidate next value.

    Ranks the candidate's conformity within the augmented bag; output
    lives on the lattice {1/(n+1), ..., 1} and ties count in the
    candidate's favor.
    """
    y = np.asarray(y, dtype=float).ravel()
    aug = np.append(y, float(z))
    m = aug.size
    scores = np.empty(m)
    for i in range(m):
        # sorting canonicalizes the bag so the score's permutation
        # invariance holds to the last bit, keeping ties exact
        rest = np.sort(np.delete(aug, i))
        scores[i] = float(score.fn(rest, aug[i]))
    return float(np.mean(scores <= scores[-1]))


def conformal_contour(y, z_grid, score: NonconformityScore) -> PossibilityContour:
    z_grid = np.unique(np.asarray(z_grid, dtype=float))
    vals = np.array([conformal_transducer(y, z, score) for z in z_grid])
    return PossibilityContour(GridDomain("z", z_grid), kind="grid",
                              values=vals, meta={"engine": "conformal",
                                                 "score": score.name})
