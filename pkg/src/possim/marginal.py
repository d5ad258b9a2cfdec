"""Contour engines for a scalar interest parameter.

Four routes to a plausibility contour:

  contour_vacuous      Monte Carlo tail probabilities of an ordering,
                       maximized over a nuisance grid (vacuous prior)
  contour_choquet      partial-prior version: level-set averaged sup of
                       the regularized ordering's tail probabilities
  contour_conditional  exact enumeration after conditioning (two-binomial)
  contour_closed_form  textbook special cases, no Monte Carlo

All engines insert the interest estimate into the evaluation grid and pin
the contour to exactly one there.  Monte Carlo is substream-seeded: cells
share common random numbers across the interest grid, so curves are smooth
and results do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .contours import GridDomain, PossibilityContour, ProductDomain, Region, alpha_cut
from .errors import InvalidParameterError, ModelMismatchError, UnsupportedStrategyError
from .likelihood import PartialPrior, RegularizedOrdering, make_ordering
from .models.counts import TwoBinomial
from .models.normal import NormalIID, FiellerCreasy
from .rng import substream


def linear_grid(lo: float, hi: float, count: int = 401) -> np.ndarray:
    if not (hi > lo and count >= 2):
        raise InvalidParameterError("grid needs hi > lo and count >= 2")
    return np.linspace(lo, hi, int(count))


def log_grid(lo: float, hi: float, count: int = 75) -> np.ndarray:
    if not (0 < lo < hi and count >= 1):
        raise InvalidParameterError("log grid needs 0 < lo < hi")
    return np.geomspace(lo, hi, int(count))


def default_variance_ratio_grid() -> np.ndarray:
    return log_grid(1e-3, 1e2, 75)


@dataclass
class MonteCarloPlan:
    """Evaluation plan shared by the simulation engines."""

    interest_grid: np.ndarray
    n_mc: int = 2000
    nuisance_grid: np.ndarray | None = None
    choquet_s_nodes: int = 100
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        self.interest_grid = np.unique(np.asarray(self.interest_grid, dtype=float))
        if self.interest_grid.size < 2:
            raise InvalidParameterError("interest grid needs >= 2 nodes")
        if self.n_mc < 100:
            raise InvalidParameterError("n_mc below 100 is too noisy to rank with")
        if self.choquet_s_nodes < 10:
            raise InvalidParameterError("need at least 10 level-set nodes")
        if self.nuisance_grid is not None:
            self.nuisance_grid = np.asarray(self.nuisance_grid, dtype=float)
            if self.nuisance_grid.size == 0:
                raise InvalidParameterError("nuisance grid must be nonempty")

    def grid_with(self, phi_hat: float) -> np.ndarray:
        g = self.interest_grid
        if np.isfinite(phi_hat) and g[0] <= phi_hat <= g[-1]:
            g = np.unique(np.append(g, phi_hat))
        return g


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _se_of(p, n):
    return np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / n)


# ---------------------------------------------------------------------------
# vacuous-prior engine


def contour_vacuous(model, y, plan: MonteCarloPlan, strategy: str = "profile",
                    ordering=None) -> PossibilityContour:
    """Tail probability of the ordering, maximized over the nuisance grid.

    The law of the ordering under the model decides the work: a pivot needs
    one reference sample, a reduced nuisance one per nuisance value (reused
    across the whole interest grid), and otherwise cells are simulated per
    grid node.
    """
    ordering = ordering or make_ordering(model, strategy)
    phi_hat = ordering.phi_hat(y)
    grid = plan.grid_with(phi_hat)
    r_obs = np.minimum(ordering.log_ratio_vec(y, grid), 0.0)
    hat_idx = np.searchsorted(grid, phi_hat)
    if hat_idx < grid.size and grid[hat_idx] == phi_hat:
        r_obs[hat_idx] = 0.0
    law = ordering.reference()

    # exact enumeration replaces simulation when the sample space is tiny
    if getattr(model, "enumerable", False) and hasattr(model, "exact_contour_values"):
        vals = model.exact_contour_values(y, grid)
        return _finish(grid, model, vals, np.zeros_like(vals), "vacuous-exact",
                       strategy, plan)

    n_mc = plan.n_mc
    if law.kind in ("pivot", "nuisance-only"):
        if law.kind == "pivot":
            cells = [((), law.theta_at())]
        else:
            if plan.nuisance_grid is None:
                raise InvalidParameterError(
                    f"{model.name} needs a nuisance grid for the vacuous engine")
            cells = [((j,), law.theta_at(lam))
                     for j, lam in enumerate(plan.nuisance_grid)]

        def cell_probs(cell):
            key, theta = cell
            # common random numbers across cells: the max over the nuisance
            # grid stays free of independent-noise bias
            rng = substream(plan.seed, "vacuous-cell")
            sims = model.reference_sample(theta, n_mc, rng)
            r = np.sort(np.minimum(ordering.log_ratio_batch(sims, law.phi_ref), 0.0))
            return np.searchsorted(r, r_obs, side="right") / n_mc

        probs = np.stack(_pmap(cell_probs, cells, plan.threads))  # (cells, grid)
        pi = probs.max(axis=0)
    elif law.kind == "phi-only":
        def node_prob(i):
            rng = substream(plan.seed, "vacuous-cell")  # common random numbers
            sims = model.reference_sample(law.theta_at(grid[i]), n_mc, rng)
            r = np.minimum(ordering.log_ratio_batch(sims, grid[i]), 0.0)
            return float(np.mean(r <= r_obs[i]))

        pi = np.array(_pmap(node_prob, range(grid.size), plan.threads))
    else:  # full: cells over (interest node, nuisance value)
        if plan.nuisance_grid is None:
            raise InvalidParameterError(
                f"{model.name} needs a nuisance grid for the vacuous engine")

        def lam_probs(j):
            lam = plan.nuisance_grid[j]
            out = np.empty(grid.size)
            for i, phi in enumerate(grid):
                rng = substream(plan.seed, "vacuous-cell")  # CRN across cells
                sims = model.reference_sample(law.theta_at(phi, lam), n_mc, rng)
                r = np.minimum(ordering.log_ratio_batch(sims, phi), 0.0)
                out[i] = np.mean(r <= r_obs[i])
            return out

        probs = np.stack(_pmap(lam_probs, range(plan.nuisance_grid.size), plan.threads))
        pi = probs.max(axis=0)

    return _finish(grid, model, pi, _se_of(pi, n_mc), "vacuous", strategy, plan)


def _finish(grid, model, values, se, engine, strategy, plan):
    dom = GridDomain(getattr(model, "interest_name", "phi"), grid)
    meta = {"engine": engine, "strategy": strategy, "model": model.name,
            "n_mc": int(plan.n_mc), "seed": int(plan.seed)}
    kind = "grid"
    return PossibilityContour(dom, kind=kind, values=np.clip(values, 0.0, 1.0),
                              mc_se=se, meta=meta)


# ---------------------------------------------------------------------------
# partial-prior (Choquet) engine


def _level_average(cell_probs, q_cells, s_nodes):
    """Average over level sets: mean_j sup{cell_probs : q > s_j}.

    cell_probs has shape (cells, targets).  Cells are ranked by prior
    weight; prefix maxima turn each level set's sup into a table lookup.
    An empty level set falls back to the highest-weight cell.
    """
    order = np.argsort(-q_cells, kind="stable")
    ranked = cell_probs[order]
    prefix = np.maximum.accumulate(ranked, axis=0)
    q_sorted = q_cells[order]
    s_mid = (np.arange(s_nodes) + 0.5) / s_nodes
    counts = np.searchsorted(-q_sorted, -s_mid, side="left")  # cells with q > s
    counts = np.clip(counts, 1, len(q_cells))
    return prefix[counts - 1].mean(axis=0)


def contour_choquet(model, y, prior: PartialPrior, plan: MonteCarloPlan,
                    strategy: str = "profile") -> PossibilityContour:
    """Partial-prior contour via the level-set (Choquet) average.

    Simulation cells are (interest node, nuisance value); each cell's
    replicates are drawn once and reused for every target threshold.  The
    regularized ordering renormalizes per replicate over the candidate
    grid, so each cell costs one (replicates x grid) table.
    """
    base = make_ordering(model, strategy)
    phi_hat = base.phi_hat(y)
    grid = plan.grid_with(phi_hat)
    reg = RegularizedOrdering(base, prior, grid)
    t_obs = reg.log_ratio_vec(y, grid)

    lams = plan.nuisance_grid
    law = base.reference()
    if lams is None:
        if law.kind in ("pivot", "nuisance-only"):
            raise InvalidParameterError(
                f"{model.name} needs a nuisance grid for the Choquet engine")
        lams = np.array([np.nan])  # no nuisance: cell truth from the law

    def cell_probs(args):
        i, j = args
        phi_p = grid[i]
        if np.isnan(lams[j]):
            theta = law.theta_at(phi_p)
        else:
            theta = model.theta_from(phi_p, lams[j])
        rng = substream(plan.seed, "choquet")  # CRN across every cell
        sims = model.reference_sample(theta, plan.n_mc, rng)
        thr = np.sort(reg.log_ratio_batch(sims, phi_p))
        return np.searchsorted(thr, t_obs, side="right") / plan.n_mc

    pairs = [(i, j) for i in range(grid.size) for j in range(len(lams))]
    tables = _pmap(cell_probs, pairs, plan.threads)
    per_cell = np.stack(tables)  # (nodes*lams, targets)
    # collapse the nuisance axis first: sup over lambda at each interest node
    per_node = per_cell.reshape(grid.size, len(lams), grid.size).max(axis=1)

    q_cells = prior.q(grid)
    pi = _level_average(per_node, q_cells, plan.choquet_s_nodes)
    pi = np.minimum(pi, 1.0)
    se = _se_of(pi, plan.n_mc)
    out = _finish(grid, model, pi, se, "choquet", strategy, plan)
    out.meta["prior"] = prior.kind
    return out


# ---------------------------------------------------------------------------
# conditional engine (two-binomial; exact)


def contour_conditional(model, y, plan: MonteCarloPlan,
                        prior: PartialPrior | None = None) -> PossibilityContour:
    """Exact conditional contour given the total of the two counts."""
    if not isinstance(model, TwoBinomial):
        raise ModelMismatchError("conditional engine covers the two-binomial model")
    y = np.asarray(y)
    u, v = int(y[0] + y[1]), int(y[1])
    support = model.support_given(u)
    phi_hat = model.cond_mle(u, v)
    grid = plan.interest_grid
    if np.isfinite(phi_hat):
        grid = plan.grid_with(phi_hat)

    base_tab = model.cond_log_ratio_table(u, grid)        # (support, grid)
    pmf_tab = np.exp(model.cond_log_pmf(u, grid))         # (support, grid)
    v_idx = int(v - support[0])

    if prior is None or prior.kind == "vacuous":
        t_obs = base_tab[v_idx]
        ind = base_tab <= t_obs[None, :] + 1e-12
        pi = np.sum(pmf_tab * ind, axis=0)
        out = _finish(grid, model, pi, np.zeros_like(pi), "conditional-exact",
                      "conditional", plan)
        return out

    # partial prior: regularize with per-point normalizers, then level-average
    logq = prior.log_q(grid)
    weighted = base_tab + logq[None, :]
    norm = weighted.max(axis=1)
    for s_i, v_p in enumerate(support):  # polish each row's normalizer
        j = int(np.argmax(weighted[s_i]))
        lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
        if hi > lo:
            tab = lambda p: (model.cond_log_ratio_table(u, [p])[s_i, 0]
                             + float(prior.log_q(np.array(p))))
            res = optimize.minimize_scalar(lambda p: -tab(p), bounds=(lo, hi),
                                           method="bounded", options={"xatol": 1e-9})
            norm[s_i] = max(norm[s_i], -float(res.fun))
    rq_tab = np.minimum(0.0, weighted - norm[:, None])
    t_obs = rq_tab[v_idx]

    ind = rq_tab[:, :, None] <= t_obs[None, None, :] + 1e-12
    cells = np.einsum("sp,spt->pt", pmf_tab, ind)         # (cells, targets)
    pi = _level_average(cells, prior.q(grid), plan.choquet_s_nodes)
    out = _finish(grid, model, np.minimum(pi, 1.0), np.zeros(grid.size),
                  "conditional-choquet", "conditional", plan)
    out.meta["prior"] = prior.kind
    return out


# ---------------------------------------------------------------------------
# closed forms


def _chisq_two_sided(w, df, power):
    """P{ g(W) <= g(w) } for W ~ chi2(df) and g(t) = power*log t - t/2."""
    mode = 2.0 * power
    if w <= 0:
        return 0.0
    g = lambda t: power * math.log(t) - 0.5 * t
    target = g(w)
    if abs(w - mode) < 1e-12:
        return 1.0
    if w < mode:
        hi = mode * 2.0
        while g(hi) > target:
            hi *= 2.0
        other = optimize.brentq(lambda t: g(t) - target, mode, hi, xtol=1e-13)
        a, b = w, other
    else:
        lo = mode / 2.0
        while g(lo) > target:
            lo /= 2.0
        other = optimize.brentq(lambda t: g(t) - target, lo, mode, xtol=1e-13)
        a, b = other, w
    return float(stats.chi2.cdf(a, df) + stats.chi2.sf(b, df))


def contour_closed_form(model, y, form: str, grid: np.ndarray) -> PossibilityContour:
    """Analytic contours: no Monte Carlo anywhere.

    forms: "student-t" (normal mean), "normal-sd-profile",
    "normal-sd-marginal", "fieller-creasy".
    """
    grid = np.asarray(grid, dtype=float)

    if form == "student-t":
        if not (isinstance(model, NormalIID) and model.interest == "mean"):
            raise ModelMismatchError("student-t form needs the normal mean model")
        n = model.n
        mu_hat, sd_hat = model.fit_mle(y)
        grid = np.unique(np.append(grid, mu_hat)) if grid[0] <= mu_hat <= grid[-1] else grid

        def ev(phi):
            t = math.sqrt(n - 1.0) * abs(phi - mu_hat) / sd_hat
            return float(2.0 * stats.t.sf(t, n - 1))

        name = "mean"
    elif form in ("normal-sd-profile", "normal-sd-marginal"):
        if not (isinstance(model, NormalIID) and model.interest == "sd"):
            raise ModelMismatchError(f"{form} needs the normal sd model")
        n = model.n
        _, sd_hat = model.fit_mle(y)
        power = 0.5 * n if form.endswith("profile") else 0.5 * (n - 1.0)

        def ev(phi):
            if phi <= 0:
                return 0.0
            w = n * sd_hat**2 / phi**2
            return _chisq_two_sided(w, n - 1, power)

        name = "sd"
    elif form == "fieller-creasy":
        if not isinstance(model, FiellerCreasy):
            raise ModelMismatchError("fieller-creasy form needs that model")
        y = np.asarray(y, dtype=float)
        y1, y2 = float(y[0]), float(y[1])
        if y2 != 0:
            hat = y1 / y2
            grid = np.unique(np.append(grid, hat)) if grid[0] <= hat <= grid[-1] else grid

        def ev(phi):
            return float(stats.chi2.sf((y1 - phi * y2) ** 2 / (1.0 + phi**2), 1))

        name = "ratio"
    else:
        raise UnsupportedStrategyError(f"unknown closed form {form!r}")

    dom = GridDomain(name, grid)
    return PossibilityContour(dom, kind="closed-form", evaluator=ev,
                              meta={"engine": "closed-form", "form": form,
                                    "model": model.name})


def fieller_tail_limit(y) -> float:
    """Common limit of the ratio contour as |ratio| grows."""
    y2 = float(np.asarray(y, dtype=float)[1])
    return float(stats.chi2.sf(y2**2, 1))


# ---------------------------------------------------------------------------
# joint (full-parameter) contour


def contour_full_parameter(model, y, plan: MonteCarloPlan, axes,
                           point_to_theta=None) -> PossibilityContour:
    """Relative-likelihood contour of the full parameter on a product grid.

    axes: sequence of (name, nodes); the joint MLE's coordinates are
    spliced into the axes so the peak is on the grid and exactly one.
    """
    theta_hat = model.fit_mle(y)
    to_theta = point_to_theta or (lambda p: tuple(p))
    hat_point = np.asarray(theta_hat, dtype=float)

    gds = []
    for k, (name, nodes) in enumerate(axes):
        gd = GridDomain(name, np.asarray(nodes, dtype=float))
        gd = gd.with_extra_nodes([hat_point[k]])
        gds.append(gd)
    dom = ProductDomain(tuple(gds))
    points = dom.mesh()

    n_mc = plan.n_mc
    vals = np.empty(points.shape[0])
    for idx, pt in enumerate(points):
        theta = to_theta(pt)
        r_obs = model.full_log_ratio(y, theta)
        rng = substream(plan.seed, "joint")  # CRN across the grid
        sims = model.reference_sample(theta, n_mc, rng)
        r = model.full_log_ratio_batch(sims, theta)
        vals[idx] = np.mean(r <= r_obs + 1e-12)
    vals = vals.reshape(dom.shape)
    return PossibilityContour(dom, kind="grid", values=vals,
                              mc_se=_se_of(vals, n_mc),
                              meta={"engine": "joint", "model": model.name,
                                    "n_mc": int(n_mc), "seed": int(plan.seed)})


# ---------------------------------------------------------------------------


def plausibility_interval(contour: PossibilityContour, level: float) -> Region:
    """100*level % plausibility region: the cut at alpha = 1 - level."""
    if not 0.0 < level < 1.0:
        raise InvalidParameterError("level must lie in (0, 1)")
    return alpha_cut(contour, 1.0 - level)
