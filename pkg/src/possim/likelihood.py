"""Relative likelihoods, partial priors, and the orderings the engines rank by.

An ordering assigns every (dataset, interest value) pair a number in [0, 1]
(stored as a log) that says how well the interest value explains the data;
contours are tail probabilities of these orderings under the model.  The
profile ordering maximizes over the nuisance, the marginal and conditional
orderings first reduce the data, and the regularized ordering folds in a
partial prior and renormalizes per dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateNormalizerError,
    InvalidParameterError,
    UnsupportedStrategyError,
)

# ---------------------------------------------------------------------------
# plain relative likelihood helpers


def relative_likelihood(model, y, theta) -> float:
    """p(y | theta) / p(y | theta_hat) in [0, 1]."""
    return math.exp(model.full_log_ratio(y, theta))


def profile_relative_likelihood(model, y, phi) -> float:
    return math.exp(model.profile_log_ratio(y, phi))


def marginal_or_conditional_relative_likelihood(model, y, phi, strategy) -> float:
    """Reduced relative likelihood: 'marginal' or 'conditional'."""
    if strategy == "marginal":
        return math.exp(model.marginal_log_ratio(y, phi))
    if strategy == "conditional":
        u, v = int(np.asarray(y)[0] + np.asarray(y)[1]), int(np.asarray(y)[1])
        sup = model.support_given(u)
        tab = model.cond_log_ratio_table(u, [phi])
        return math.exp(float(tab[int(v - sup[0]), 0]))
    raise UnsupportedStrategyError(f"unknown strategy {strategy!r}")


def regularized_relative_likelihood(model, y, phi, prior, candidate_grid) -> float:
    """Prior-weighted relative likelihood, renormalized to sup one."""
    ordering = RegularizedOrdering(ProfileOrdering(model), prior, candidate_grid)
    return math.exp(ordering.log_ratio(y, phi))


# ---------------------------------------------------------------------------
# partial priors


class PartialPrior:
    """Possibility-style prior weight q on the interest axis, sup q = 1.

    kinds: "vacuous" (q = 1), "markov" (q = min(1, c/|phi|)), "grid"
    (tabulated weights, linearly interpolated, zero outside).
    """

    def __init__(self, kind, *, c=None, nodes=None, weights=None):
        if kind not in ("vacuous", "markov", "grid"):
            raise InvalidParameterError(f"unknown prior kind {kind!r}")
        self.kind = kind
        self.c = None if c is None else float(c)
        self.nodes = None if nodes is None else np.asarray(nodes, dtype=float)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        if kind == "markov" and (self.c is None or self.c <= 0):
            raise InvalidParameterError("markov prior needs a positive scale c")
        if kind == "grid":
            if self.nodes is None or self.weights is None:
                raise InvalidParameterError("grid prior needs nodes and weights")
            top = self.weights.max()
            if top <= 0:
                raise DegenerateNormalizerError("grid prior has zero supremum")
            self.weights = self.weights / top

    @classmethod
    def vacuous(cls):
        return cls("vacuous")

    @classmethod
    def markov(cls, c):
        return cls("markov", c=c)

    @classmethod
    def from_grid(cls, nodes, weights):
        return cls("grid", nodes=nodes, weights=weights)

    def q(self, phi):
        phi = np.asarray(phi, dtype=float)
        if self.kind == "vacuous":
            return np.ones_like(phi)
        if self.kind == "markov":
            with np.errstate(divide="ignore"):
                return np.minimum(1.0, self.c / np.abs(phi))
        return np.interp(phi, self.nodes, self.weights, left=0.0, right=0.0)

    def log_q(self, phi):
        with np.errstate(divide="ignore"):
            return np.log(self.q(phi))

    def level_set(self, s):
        """{phi : q(phi) > s} as (lo, hi) for the analytic kinds."""
        if not 0.0 <= s < 1.0:
            raise InvalidParameterError("level must lie in [0, 1)")
        if self.kind == "vacuous":
            return (-np.inf, np.inf)
        if self.kind == "markov":
            if s == 0.0:
                return (-np.inf, np.inf)
            return (-self.c / s, self.c / s)
        raise UnsupportedStrategyError("grid priors have no closed-form level set")


# ---------------------------------------------------------------------------
# orderings


class ProfileOrdering:
    strategy = "profile"

    def __init__(self, model):
        self.model = model

    def log_ratio(self, y, phi):
        return self.model.profile_log_ratio(y, phi)

    def log_ratio_vec(self, y, phis):
        return self.model.profile_log_ratio_vec(y, phis)

    def log_ratio_batch(self, batch, phi):
        return self.model.profile_log_ratio_batch(batch, phi)

    def log_ratio_matrix(self, batch, phis):
        return self.model.profile_log_ratio_matrix(batch, phis)

    def phi_hat(self, y):
        return self.model.interest_mle(y)

    def phi_hat_batch(self, batch):
        return self.model.interest_mle_batch(batch)

    def reference(self):
        return self.model.reference_law("profile")


class MarginalOrdering:
    strategy = "marginal"

    def __init__(self, model):
        self.model = model
        if not hasattr(model, "marginal_log_ratio"):
            raise UnsupportedStrategyError(f"{model.name} has no marginal reduction")

    def log_ratio(self, y, phi):
        return self.model.marginal_log_ratio(y, phi)

    def log_ratio_vec(self, y, phis):
        return self.model.marginal_log_ratio_vec(y, phis)

    def log_ratio_batch(self, batch, phi):
        return self.model.marginal_log_ratio_batch(batch, phi)

    def log_ratio_matrix(self, batch, phis):
        return np.stack([self.log_ratio_batch(batch, p) for p in np.asarray(phis, float)],
                        axis=1)

    def phi_hat(self, y):
        return self.model.marginal_interest_mle(y)

    def phi_hat_batch(self, batch):
        if hasattr(self.model, "marginal_interest_mle_batch"):
            return self.model.marginal_interest_mle_batch(batch)
        n = self.model.batch_size(batch)
        return np.array([self.phi_hat(self.model.batch_item(batch, i)) for i in range(n)])

    def reference(self):
        return self.model.reference_law("marginal")


class FullOrdering:
    """Relative likelihood of the whole parameter; no reduction."""

    strategy = "full"

    def __init__(self, model):
        self.model = model

    def log_ratio(self, y, theta):
        return self.model.full_log_ratio(y, theta)

    def log_ratio_batch(self, batch, theta):
        return self.model.full_log_ratio_batch(batch, theta)


class RegularizedOrdering:
    """Base ordering times prior weight, renormalized per dataset.

    The normalizer is the max of base * q over the candidate grid plus the
    dataset's own interest estimate (where the base ordering is exactly 1),
    polished by a local scalar search around the grid argmax.
    """

    strategy = "regularized"

    def __init__(self, base, prior, candidates, refine=True):
        self.base = base
        self.prior = prior
        self.candidates = np.asarray(candidates, dtype=float)
        if self.candidates.size < 2:
            raise InvalidParameterError("need a candidate grid for the normalizer")
        self.refine = refine

    def _log_norm(self, y):
        cand = self.candidates
        vals = self.base.log_ratio_vec(y, cand) + self.prior.log_q(cand)
        try:
            phi_hat = self.base.phi_hat(y)
            at_hat = float(self.prior.log_q(np.array(phi_hat)))
        except Exception:
            phi_hat, at_hat = None, -np.inf
        best = float(np.max(vals))
        j = int(np.argmax(vals))
        if self.refine:
            lo = cand[max(j - 1, 0)]
            hi = cand[min(j + 1, cand.size - 1)]
            if hi > lo:
                res = optimize.minimize_scalar(
                    lambda p: -(self.base.log_ratio(y, p) + float(self.prior.log_q(np.array(p)))),
                    bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
                best = max(best, -float(res.fun))
        best = max(best, at_hat)
        if not np.isfinite(best):
            raise DegenerateNormalizerError("prior annihilates the likelihood")
        return best

    def log_ratio(self, y, phi):
        val = self.base.log_ratio(y, phi) + float(self.prior.log_q(np.array(phi)))
        return min(0.0, val - self._log_norm(y))

    def log_ratio_vec(self, y, phis):
        phis = np.asarray(phis, dtype=float)
        vals = self.base.log_ratio_vec(y, phis) + self.prior.log_q(phis)
        return np.minimum(0.0, vals - self._log_norm(y))

    def _log_norm_batch(self, batch):
        cand = self.candidates
        mat = self.base.log_ratio_matrix(batch, cand) + self.prior.log_q(cand)[None, :]
        norm = mat.max(axis=1)
        try:
            at_hat = self.prior.log_q(self.base.phi_hat_batch(batch))
            norm = np.maximum(norm, at_hat)  # base ordering is 1 at its own peak
        except Exception:
            pass
        if np.any(~np.isfinite(norm)):
            raise DegenerateNormalizerError("prior annihilates the likelihood for a replicate")
        return norm

    def log_ratio_batch(self, batch, phi):
        vals = self.base.log_ratio_batch(batch, phi) + float(self.prior.log_q(np.array(phi)))
        return np.minimum(0.0, vals - self._log_norm_batch(batch))

    def log_ratio_matrix(self, batch, phis):
        phis = np.asarray(phis, dtype=float)
        mat = self.base.log_ratio_matrix(batch, phis) + self.prior.log_q(phis)[None, :]
        return np.minimum(0.0, mat - self._log_norm_batch(batch)[:, None])

    def phi_hat(self, y):
        return self.base.phi_hat(y)

    def phi_hat_batch(self, batch):
        return self.base.phi_hat_batch(batch)

    def reference(self):
        # regularization destroys pivotality: the engines must grid
        law = self.base.reference()
        return law


def make_ordering(model, strategy):
    if strategy == "profile":
        return ProfileOrdering(model)
    if strategy == "marginal":
        return MarginalOrdering(model)
    if strategy == "full":
        return FullOrdering(model)
    raise UnsupportedStrategyError(f"unknown strategy {strategy!r}")
