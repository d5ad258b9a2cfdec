"""Simulation diagnostics for contour engines.

Three questions about an engine, all answered by simulating data at a
known truth:

  estimate_validity_cdf   distribution of the contour at the true value;
                          calibration demands it sits at or below the
                          diagonal
  estimate_coverage       how often the level cut captures the truth
  pvalue_bin_table        tail counts of the directional p-value, the
                          shape confidence-interval tables are built from

Each takes either a per-dataset engine closure (generic, slow) or goes
through the batch path that shares the reference tables across all
simulations, which is what makes nested Monte Carlo affordable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, PossimError
from .likelihood import make_ordering
from .rng import substream

TABLE_BIN_EDGES = (0.0, 0.005, 0.0125, 0.025, 0.975, 0.9875, 0.995, 1.0)


@dataclass
class ValidityReport:
    alpha_grid: np.ndarray
    cdf_hat: np.ndarray
    se: np.ndarray
    n_sims: int
    truth: dict
    coverage: dict | None = None
    bins: np.ndarray | None = None
    bin_edges: tuple | None = None
    failures: int = 0

    def __post_init__(self):
        self.alpha_grid = np.asarray(self.alpha_grid, dtype=float)
        self.cdf_hat = np.asarray(self.cdf_hat, dtype=float)
        self.se = np.asarray(self.se, dtype=float)
        if np.any(np.diff(self.cdf_hat) < -1e-12):
            raise PossimError("estimated CDF must be nondecreasing")

    def dominates_diagonal(self, slack: float = 3.0) -> bool:
        """True when the CDF sits below alpha + slack * SE everywhere."""
        return bool(np.max(self.cdf_hat - self.alpha_grid - slack * self.se) <= 0)

    def to_csv(self) -> str:
        lines = ["alpha,cdf_hat,se"]
        for a, c, s in zip(self.alpha_grid, self.cdf_hat, self.se):
            lines.append(f"{a!r},{c!r},{s!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        body = {
            "alpha": [repr(float(a)) for a in self.alpha_grid],
            "cdf_hat": [repr(float(c)) for c in self.cdf_hat],
            "se": [repr(float(s)) for s in self.se],
            "n_sims": self.n_sims,
            "truth": {k: (repr(float(v)) if isinstance(v, float) else v)
                      for k, v in self.truth.items()},
            "failures": self.failures,
        }
        if self.coverage is not None:
            body["coverage"] = {repr(float(k)): repr(float(v))
                                for k, v in self.coverage.items()}
        if self.bins is not None:
            body["bins"] = [repr(float(b)) for b in self.bins]
            body["bin_edges"] = [repr(float(e)) for e in self.bin_edges]
        return json.dumps(body, sort_keys=True, indent=1)


def _binom_se(p, n):
    return np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / n)


# ---------------------------------------------------------------------------
# batch path: contour at the truth for every simulated dataset at once


def contour_at_truth_batch(model, truth_theta, phi_star, n_sims, plan,
                           strategy: str = "profile"):
    """(pi values, interest MLEs) across n_sims datasets drawn at the truth.

    Reference tables are built once per cell and shared by every
    simulation; each dataset then costs one ordering evaluation at
    phi_star plus a binary search per cell.
    """
    ordering = make_ordering(model, strategy)
    law = ordering.reference()
    phi_star = float(phi_star)

    sims = model.sample(truth_theta, int(n_sims), substream(plan.seed, "outer"))
    r_obs = np.minimum(ordering.log_ratio_batch(sims, phi_star), 0.0)
    phi_hats = ordering.phi_hat_batch(sims)

    if law.kind == "pivot":
        cells = [(law.theta_at(), law.phi_ref)]
    elif law.kind == "nuisance-only":
        if plan.nuisance_grid is None:
            raise InvalidParameterError(
                f"{model.name} needs a nuisance grid for validity runs")
        cells = [(law.theta_at(lam), law.phi_ref) for lam in plan.nuisance_grid]
    elif law.kind == "phi-only":
        cells = [(law.theta_at(phi_star), phi_star)]
    else:
        if plan.nuisance_grid is None:
            raise InvalidParameterError(
                f"{model.name} needs a nuisance grid for validity runs")
        cells = [(law.theta_at(phi_star, lam), phi_star)
                 for lam in plan.nuisance_grid]

    pis = np.zeros(int(n_sims))
    for j, (theta, phi_ref) in enumerate(cells):
        rng = substream(plan.seed, "ref")  # CRN across reference cells
        ref = model.reference_sample(theta, plan.n_mc, rng)
        table = np.sort(np.minimum(ordering.log_ratio_batch(ref, phi_ref), 0.0))
        pis = np.maximum(pis, np.searchsorted(table, r_obs, side="right") / plan.n_mc)
    return pis, phi_hats


# ---------------------------------------------------------------------------
# reports


def _cdf_report(pis, alpha_grid, n_sims, truth, failures=0):
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    cdf = np.array([np.mean(pis <= a) for a in alpha_grid])
    return ValidityReport(alpha_grid, cdf, _binom_se(cdf, len(pis)),
                          n_sims=int(n_sims), truth=truth, failures=failures)


def estimate_validity_cdf(engine, model, truth, alpha_grid, n_sims, seed,
                          phi_star=None) -> ValidityReport:
    """Generic path: one engine call per simulated dataset.

    engine maps a dataset to a PossibilityContour; failures are counted
    and excluded from the denominator rather than silently dropped.
    """
    if phi_star is None:
        phi_star = model.phi_of(truth)
    pis, failures = [], 0
    for i in range(int(n_sims)):
        y = model.sample(truth, 1, substream(seed, "sim", i))[0]
        try:
            contour = engine(y)
            pis.append(float(contour(phi_star)))
        except PossimError:
            failures += 1
    pis = np.asarray(pis)
    report = _cdf_report(pis, alpha_grid, n_sims,
                         {"phi_star": float(phi_star)}, failures=failures)
    return report


def validity_cdf_batch(model, truth_theta, phi_star, alpha_grid, n_sims, plan,
                       strategy: str = "profile") -> ValidityReport:
    pis, _ = contour_at_truth_batch(model, truth_theta, phi_star, n_sims,
                                    plan, strategy)
    return _cdf_report(pis, alpha_grid, n_sims, {"phi_star": float(phi_star)})


def coverage_from_pis(pis, level: float) -> float:
    """Fraction of sims whose level cut {pi > 1 - level} holds the truth.

    level 0 keeps the whole support by convention, so coverage is 1.
    """
    if not 0.0 <= level < 1.0:
        raise InvalidParameterError("level must lie in [0, 1)")
    if level == 0.0:
        return 1.0
    return float(np.mean(np.asarray(pis) > 1.0 - level))


def estimate_coverage(engine, model, truth, level, n_sims, seed,
                      phi_star=None) -> float:
    if phi_star is None:
        phi_star = model.phi_of(truth)
    pis, failures = [], 0
    for i in range(int(n_sims)):
        y = model.sample(truth, 1, substream(seed, "sim", i))[0]
        try:
            contour = engine(y)
            pis.append(float(contour(phi_star)))
        except PossimError:
            failures += 1
    return coverage_from_pis(np.asarray(pis), level)


def coverage_batch(model, truth_theta, phi_star, level, n_sims, plan,
                   strategy: str = "profile") -> float:
    pis, _ = contour_at_truth_batch(model, truth_theta, phi_star, n_sims,
                                    plan, strategy)
    return coverage_from_pis(pis, level)


# ---------------------------------------------------------------------------
# directional p-values and tail bins


def directional_pvalues(pis, phi_hats, phi_star) -> np.ndarray:
    """Signed p-value: half the contour, folded by the side the MLE fell on.

    Underestimates land near 0, overestimates near 1; an exactly uniform
    contour at the truth gives a uniform p.
    """
    pis = np.asarray(pis, dtype=float)
    below = np.asarray(phi_hats, dtype=float) < float(phi_star)
    return np.where(below, 0.5 * pis, 1.0 - 0.5 * pis)


def pvalue_bin_table(pvalues, bin_edges=TABLE_BIN_EDGES) -> np.ndarray:
    """Percentage of p-values in each disjoint [e_j, e_{j+1}) bin."""
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidParameterError("bin edges must be increasing")
    p = np.asarray(pvalues, dtype=float)
    counts, _ = np.histogram(p, bins=edges)
    # histogram's last bin is closed on the right, matching p <= 1
    return 100.0 * counts / p.size


def tail_bins(pvalues) -> np.ndarray:
    """The six cumulative tail percentages of the standard table layout.

    Lower tails below 0.5%, 1.25%, 2.5%; upper tails above 97.5%, 98.75%,
    99.5%.
    """
    p = np.asarray(pvalues, dtype=float)
    lo = [100.0 * np.mean(p < c) for c in (0.005, 0.0125, 0.025)]
    hi = [100.0 * np.mean(p > c) for c in (0.975, 0.9875, 0.995)]
    return np.array(lo + hi)


def tail_bins_batch(model, truth_theta, phi_star, n_sims, plan,
                    strategy: str = "profile") -> np.ndarray:
    pis, phi_hats = contour_at_truth_batch(model, truth_theta, phi_star,
                                           n_sims, plan, strategy)
    return tail_bins(directional_pvalues(pis, phi_hats, phi_star))


def markdown_table(headers, rows) -> str:
    out = ["| " + " | ".join(str(h) for h in headers) + " |",
           "|" + "|".join(" --- " for _ in headers) + "|"]
    for row in rows:
        out.append("| " + " | ".join(str(c) for c in row) + " |")
    return "\n".join(out) + "\n"
