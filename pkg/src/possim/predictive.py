"""Predictive contours for a future observable Z sharing the parameter with Y.

Three constructions, in increasing order of how much they profile out:

  predict_combine       combine the parameter contour with the plausibility
                        of z under each candidate parameter (needs Z
                        independent of Y given the parameter)
  predict_joint_extend  contour for (parameter, z) jointly, then collapse
                        the parameter axis by the extension principle
  predict_profile       profile the joint relative likelihood down to z
                        directly and calibrate its tail probability

The normal known-variance problem admits closed forms for all three; the
multinomial next-draw problem has a closed-form ordering with an exact
peak; everything else runs through Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .contours import (FiniteDomain, GridDomain, PossibilityContour,
                       fisher_combine, prob_to_poss)
from .errors import (InvalidParameterError, MissingIndependenceError,
                     ModelMismatchError)
from .models.counts import Multinomial, simplex_lattice
from .models.normal import NormalKnownVariance
from .rng import substream


# ---------------------------------------------------------------------------
# links: the conditional law of Z given the parameter


@dataclass
class PredictiveLink:
    """Distribution of the future observable given the parameter.

    log_density and log_cdf vectorize over z; sample returns a 1-D array
    of draws.  poss, when set, is a closed-form plausibility-of-z map
    (z, theta) -> [0, 1] that replaces the Monte Carlo ranking step.
    """

    name: str
    log_density: object
    sample: object
    log_cdf: object = None
    poss: object = None

    def sup_log_density(self, theta, rng, pilot: int = 512) -> float:
        """sup_z log density, located from a pilot sample plus a polish."""
        draws = self.sample(theta, pilot, rng)
        ld = np.asarray(self.log_density(draws, theta), dtype=float)
        best = float(draws[int(np.argmax(ld))])
        lo, hi = float(np.min(draws)), float(np.max(draws))
        res = optimize.minimize_scalar(
            lambda z: -float(self.log_density(np.array([z]), theta)[0]),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        return max(float(np.max(ld)), -float(res.fun))


def normal_link(sigma: float) -> PredictiveLink:
    """Single future draw from N(theta, sigma^2)."""
    if sigma <= 0:
        raise InvalidParameterError("sigma must be positive")

    def logpdf(z, theta):
        z = np.asarray(z, dtype=float)
        return stats.norm.logpdf(z, loc=float(theta), scale=sigma)

    def logcdf(z, theta):
        return stats.norm.logcdf(np.asarray(z, dtype=float), loc=float(theta),
                                 scale=sigma)

    def sampler(theta, size, rng):
        return float(theta) + sigma * rng.standard_normal(int(size))

    def poss(z, theta):
        z = np.asarray(z, dtype=float)
        return stats.chi2.sf((z - float(theta)) ** 2 / sigma**2, 1)

    return PredictiveLink("normal", logpdf, sampler, log_cdf=logcdf, poss=poss)


def gamma_link() -> PredictiveLink:
    """Single future draw from the gamma model; theta = (mean, shape)."""

    def _ms(theta):
        mean, shape = float(theta[0]), float(theta[1])
        if mean <= 0 or shape <= 0:
            raise InvalidParameterError("gamma mean and shape must be positive")
        return shape, mean / shape

    def logpdf(z, theta):
        a, scale = _ms(theta)
        return stats.gamma.logpdf(np.asarray(z, dtype=float), a=a, scale=scale)

    def logcdf(z, theta):
        a, scale = _ms(theta)
        return stats.gamma.logcdf(np.asarray(z, dtype=float), a=a, scale=scale)

    def sampler(theta, size, rng):
        a, scale = _ms(theta)
        return rng.gamma(shape=a, scale=scale, size=int(size))

    return PredictiveLink("gamma", logpdf, sampler, log_cdf=logcdf)


def max_of_k_link(base: PredictiveLink, k: int) -> PredictiveLink:
    """Maximum of k independent draws from the base link.

    Density k p(z) P(z)^{k-1} and distribution P(z)^k; the sampler takes
    the max of k base draws, so the two stay consistent by construction.
    """
    k = int(k)
    if k < 1:
        raise InvalidParameterError("k must be a positive integer")
    if base.log_cdf is None:
        raise InvalidParameterError("max-of-k needs the base log_cdf")
    if k == 1:
        return base

    def logpdf(z, theta):
        return (math.log(k) + np.asarray(base.log_density(z, theta), float)
                + (k - 1) * np.asarray(base.log_cdf(z, theta), float))

    def logcdf(z, theta):
        return k * np.asarray(base.log_cdf(z, theta), float)

    def sampler(theta, size, rng):
        draws = base.sample(theta, int(size) * k, rng)
        return np.reshape(draws, (int(size), k)).max(axis=1)

    return PredictiveLink(f"max{k}-{base.name}", logpdf, sampler, log_cdf=logcdf)


def link_mass(link: PredictiveLink, theta, lo: float, hi: float,
              n: int = 20001) -> float:
    """Trapezoid integral of the link density over [lo, hi] (sanity check)."""
    z = np.linspace(lo, hi, int(n))
    return float(np.trapezoid(np.exp(link.log_density(z, theta)), z))


@dataclass
class PredictionProblem:
    """A future observable tied to the data through a shared parameter."""

    model: object
    link: PredictiveLink
    z_grid: np.ndarray
    independent: bool = True
    theta_grid: object = None  # candidate parameter values for the sups
    pivot: bool = False        # joint ordering's law is parameter-free

    def __post_init__(self):
        self.z_grid = np.asarray(self.z_grid, dtype=float)

    def thetas(self):
        if self.theta_grid is None:
            raise InvalidParameterError("this construction needs theta_grid")
        return np.asarray(self.theta_grid, dtype=float)


def _z_contour(values, z_grid, se, meta):
    return PossibilityContour(GridDomain("z", z_grid), kind="grid",
                              values=values, mc_se=se, meta=meta)


# ---------------------------------------------------------------------------
# Option 1: combine the parameter contour with the law of Z


def predict_combine(problem: PredictionProblem, y, contour_theta,
                    plan) -> PossibilityContour:
    """sup over the parameter grid of K(poss of z given theta, pi_y(theta)).

    The combiner t -> t(1 - log t) is increasing, so the sup moves inside
    and only the product needs maximizing.  Parameter points come from the
    theta contour's own domain; requires Z independent of Y given the
    parameter.
    """
    if not problem.independent:
        raise MissingIndependenceError(
            "combination needs Z independent of Y given the parameter")
    link = problem.link
    z_grid = problem.z_grid
    dom = contour_theta.domain
    if isinstance(dom, GridDomain):
        points = dom.nodes.reshape(-1, 1)
    else:
        points = dom.mesh()
    pi_theta = np.asarray(contour_theta.grid_values(), dtype=float).ravel()
    keep = ~np.isnan(pi_theta) & (pi_theta > 0.0)
    points, pi_theta = points[keep], pi_theta[keep]

    fz = np.empty((points.shape[0], z_grid.size))
    for i, pt in enumerate(points):
        theta = pt[0] if pt.size == 1 else pt
        if link.poss is not None:
            fz[i] = link.poss(z_grid, theta)
        else:
            rng = substream(plan.seed, "combine")  # CRN across parameter points
            draws = link.sample(theta, plan.n_mc, rng)
            ld = np.sort(np.asarray(link.log_density(draws, theta), float))
            ld_z = np.asarray(link.log_density(z_grid, theta), float)
            fz[i] = np.searchsorted(ld, ld_z, side="right") / plan.n_mc

    prod = fz * pi_theta[:, None]
    best = prod.max(axis=0)

    # polish the scalar-parameter sup between grid nodes when closed forms
    # make off-grid evaluation exact
    if (points.shape[1] == 1 and link.poss is not None
            and contour_theta.kind == "closed-form"):
        nodes = points[:, 0]
        for j, z in enumerate(z_grid):
            i = int(np.argmax(prod[:, j]))
            lo, hi = nodes[max(i - 1, 0)], nodes[min(i + 1, nodes.size - 1)]
            if hi > lo:
                neg = lambda t: -(float(link.poss(np.array([z]), t)[0])
                                  * float(contour_theta(t)))
                res = optimize.minimize_scalar(neg, bounds=(lo, hi),
                                               method="bounded",
                                               options={"xatol": 1e-10})
                best[j] = max(best[j], -float(res.fun))

    pi = np.array([fisher_combine(min(t, 1.0), 1.0) for t in best])
    se = None if link.poss is not None else np.sqrt(pi * (1 - pi) / plan.n_mc)
    return _z_contour(pi, z_grid, se,
                      {"engine": "predict-combine", "link": link.name,
                       "seed": int(plan.seed)})


# ---------------------------------------------------------------------------
# Options 2 and 3: closed forms for the normal problem


def _normal_setup(problem, y):
    model = problem.model
    if not isinstance(model, NormalKnownVariance):
        return None
    if not problem.link.name == "normal":
        return None
    y = np.asarray(y, dtype=float).ravel()
    ybar = float(np.mean(y))
    scale2 = model.sigma**2 * (1.0 + 1.0 / model.n)
    return ybar, scale2


def predict_joint_extend(problem: PredictionProblem, y, plan) -> PossibilityContour:
    """Joint contour over (parameter, z), collapsed over the parameter.

    Normal known variance: 1 - chi-square-2 CDF of (z - ybar)^2 / (sigma^2
    (1 + 1/n)).  Otherwise Monte Carlo per parameter node with the joint
    relative likelihood, taking the node-wise max afterwards.
    """
    closed = _normal_setup(problem, y)
    if closed is not None:
        ybar, scale2 = closed

        def ev(z):
            z = np.asarray(z, dtype=float)
            out = stats.chi2.sf((z - ybar) ** 2 / scale2, 2)
            return float(out) if out.ndim == 0 else out

        return PossibilityContour(GridDomain("z", problem.z_grid),
                                  kind="closed-form", evaluator=ev,
                                  meta={"engine": "predict-joint-extend",
                                        "form": "normal"})
    return _mc_joint(problem, y, plan, profile_z=False)


def predict_profile(problem: PredictionProblem, y, plan) -> PossibilityContour:
    """Profile the joint relative likelihood down to z, then calibrate.

    Normal known variance: as predict_joint_extend but with one degree of
    freedom.  Multinomial next draw: closed-form ordering, exact peak,
    Monte Carlo tail per candidate parameter.  Otherwise generic MC.
    """
    closed = _normal_setup(problem, y)
    if closed is not None:
        ybar, scale2 = closed

        def ev(z):
            z = np.asarray(z, dtype=float)
            out = stats.chi2.sf((z - ybar) ** 2 / scale2, 1)
            return float(out) if out.ndim == 0 else out

        return PossibilityContour(GridDomain("z", problem.z_grid),
                                  kind="closed-form", evaluator=ev,
                                  meta={"engine": "predict-profile",
                                        "form": "normal"})
    if isinstance(problem.model, Multinomial):
        return _multinomial_next_draw(problem, y, plan)
    return _mc_joint(problem, y, plan, profile_z=True)


def _log_density_rows(model, batch, theta):
    fn = getattr(model, "log_density_batch", None)
    if fn is not None:
        return np.asarray(fn(batch, theta), dtype=float)
    return np.array([float(model.log_density(model.batch_item(batch, b), theta))
                     for b in range(model.batch_size(batch))])


def _mc_joint(problem, y, plan, *, profile_z):
    """Monte Carlo engine shared by Options 2 and 3.

    The likelihood of the augmented parameter (t, z) given the data is
    f_t(data) g_t(z); its normalizer maximizes over the grid of t and, for
    each t, over z via the link's density sup.  Option 3 profiles t out of
    the observed ordering before calibrating; Option 2 keeps (t, z) cells
    and collapses t after calibration.  A pivot declaration reuses one
    reference sample for every cell.
    """
    model, link = problem.model, problem.link
    thetas = problem.thetas()
    z_grid = problem.z_grid
    n_mc = plan.n_mc

    th_list = list(thetas if thetas.ndim > 1 else thetas.reshape(-1, 1))
    unpack = lambda th: th[0] if th.size == 1 else th
    sup_g = np.array([link.sup_log_density(unpack(th), substream(plan.seed, "supg", i))
                      for i, th in enumerate(th_list)])

    lf_y = np.array([float(model.log_density(y, unpack(th))) for th in th_list])
    lg_y = np.stack([np.asarray(link.log_density(z_grid, unpack(th)), float)
                     for th in th_list])                     # (T, Z)
    norm_obs = np.max(lf_y + sup_g)
    cells_obs = np.minimum(lf_y[:, None] + lg_y - norm_obs, 0.0)   # (T, Z)

    def simulate(i):
        theta = unpack(th_list[i])
        rng = substream(plan.seed, "joint-pred", i)
        data = model.reference_sample(theta, n_mc, rng)
        zs = link.sample(theta, n_mc, rng)
        lf = np.stack([_log_density_rows(model, data, unpack(t2))
                       for t2 in th_list], axis=1)           # (B, T)
        lg = np.stack([np.asarray(link.log_density(zs, unpack(t2)), float)
                       for t2 in th_list], axis=1)           # (B, T)
        norm = (lf + sup_g[None, :]).max(axis=1)             # (B,)
        return lf, lg, norm

    pi = np.zeros(z_grid.size)
    if profile_z:
        t_obs = cells_obs.max(axis=0)                        # (Z,)
        nodes = range(1) if problem.pivot else range(len(th_list))
        for i in nodes:
            lf, lg, norm = simulate(i)
            t_sim = np.sort((lf + lg).max(axis=1) - norm)
            frac = np.searchsorted(t_sim, t_obs + 1e-12, side="right") / n_mc
            pi = np.maximum(pi, frac)
    else:
        if problem.pivot:
            lf, lg, norm = simulate(0)
            t_sim = np.sort(lf[:, 0] + lg[:, 0] - norm)
            for i in range(len(th_list)):
                frac = np.searchsorted(t_sim, cells_obs[i] + 1e-12,
                                       side="right") / n_mc
                pi = np.maximum(pi, frac)
        else:
            for i in range(len(th_list)):
                lf, lg, norm = simulate(i)
                t_sim = np.sort(lf[:, i] + lg[:, i] - norm)
                frac = np.searchsorted(t_sim, cells_obs[i] + 1e-12,
                                       side="right") / n_mc
                pi = np.maximum(pi, frac)

    name = "predict-profile" if profile_z else "predict-joint-extend"
    return _z_contour(pi, z_grid, np.sqrt(pi * (1 - pi) / n_mc),
                      {"engine": name, "link": link.name, "seed": int(plan.seed)})


# ---------------------------------------------------------------------------
# multinomial next draw (discrete Z)


def _shifted_loglik(counts, base):
    """log sup-likelihood of counts + one extra observation per category.

    counts: (B, K); returns (B, K) of H(counts + e_j) with H(c) = sum c log c
    (the constant -(n+1) log(n+1) cancels in every ratio).
    """
    c = np.asarray(counts, dtype=float)
    term = np.where(c > 0, c * np.log(np.maximum(c, 1.0)), 0.0)
    base_h = term.sum(axis=1, keepdims=True)
    cp = c + 1.0
    return base_h - term + cp * np.log(cp)


def multinomial_next_draw_log_ratio(y):
    """Closed-form log R(y, z) over categories for the next-draw problem."""
    h = _shifted_loglik(np.asarray(y, dtype=float)[None, :], None)[0]
    return h - h.max()


def _multinomial_next_draw(problem, y, plan):
    model = problem.model
    y = np.asarray(y, dtype=float)
    k = model.k
    log_r_obs = multinomial_next_draw_log_ratio(y)

    if problem.theta_grid is not None:
        thetas = np.asarray(problem.theta_grid, dtype=float)
    else:
        thetas = simplex_lattice(k, 10)
    extra = [y / y.sum()]
    extra += [(y + np.eye(k)[j]) / (y.sum() + 1.0) for j in range(k)]
    thetas = np.vstack([thetas, np.array(extra)])

    pi = np.zeros(k)
    for i, theta in enumerate(thetas):
        if np.any(theta <= 0):
            theta = np.clip(theta, 1e-9, None)
            theta = theta / theta.sum()
        rng = substream(plan.seed, "mult-pred")  # CRN across parameter nodes
        counts = rng.multinomial(model.n, theta, size=plan.n_mc)
        zs = rng.choice(k, size=plan.n_mc, p=theta)
        h = _shifted_loglik(counts, None)
        log_r = h[np.arange(plan.n_mc), zs] - h.max(axis=1)
        sorted_r = np.sort(log_r)
        frac = np.searchsorted(sorted_r, log_r_obs + 1e-12, side="right") / plan.n_mc
        pi = np.maximum(pi, frac)

    dom = FiniteDomain("category", tuple(range(1, k + 1)))
    return PossibilityContour(dom, kind="grid", values=pi,
                              mc_se=np.sqrt(pi * (1 - pi) / plan.n_mc),
                              meta={"engine": "predict-profile",
                                    "form": "multinomial", "seed": int(plan.seed)})


# ---------------------------------------------------------------------------
# the normal trio in one call (shared by docs, CLI, and tests)


def normal_predictive_trio(ybar: float, n: int, sigma: float, z_grid,
                           plan) -> dict:
    """All three predictive contours for the normal known-variance problem.

    Options 2 and 3 are closed forms; Option 1 maximizes the closed-form
    product over the parameter axis (grid + bounded polish), so the only
    approximation anywhere is the parameter-sup refinement tolerance.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    model = NormalKnownVariance(n, sigma)
    link = normal_link(sigma)
    problem = PredictionProblem(model, link, z_grid, independent=True, pivot=True)
    y = np.full(n, float(ybar))

    sd = sigma / math.sqrt(n)

    def theta_contour_ev(t):
        t = np.asarray(t, dtype=float)
        out = stats.chi2.sf((t - ybar) ** 2 / sd**2, 1)
        return float(out) if out.ndim == 0 else out

    span = max(abs(z_grid[0] - ybar), abs(z_grid[-1] - ybar)) + 6 * sigma
    theta_nodes = np.linspace(ybar - span, ybar + span, 2001)
    contour_theta = PossibilityContour(GridDomain("mean", theta_nodes),
                                       kind="closed-form",
                                       evaluator=theta_contour_ev,
                                       meta={"engine": "closed-form"})
    option1 = predict_combine(problem, y, contour_theta, plan)
    option2 = predict_joint_extend(problem, y, plan)
    option3 = predict_profile(problem, y, plan)
    return {"option1": option1, "option2": option2, "option3": option3}
