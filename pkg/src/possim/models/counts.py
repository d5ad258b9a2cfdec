"""Count models: binomial, multinomial, and the two-binomial log-odds setup.

The two-binomial model carries the exact conditional machinery: given the
total U = Y1 + Y2, the second count follows a one-parameter exponential
family in the log odds ratio, so conditional contours enumerate exactly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, special

from ..errors import (
    DegenerateDataError,
    InvalidParameterError,
    ShapeMismatchError,
    UnsupportedStrategyError,
)
from .base import ParametricModel, ReferenceLaw


def _log_comb(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


class Binomial(ParametricModel):
    """Single Y ~ binomial(n, theta); small discrete space, enumerable."""

    name = "binomial"
    interest_name = "prob"
    enumerable = True

    def __init__(self, n: int):
        if n < 1:
            raise InvalidParameterError("need n >= 1 trials")
        self.n = int(n)

    def support(self):
        return np.arange(self.n + 1)

    def log_pmf(self, y, theta):
        y = np.asarray(y, dtype=float)
        if not 0 <= theta <= 1:
            raise InvalidParameterError("theta must lie in [0, 1]")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (_log_comb(self.n, y)
                   + np.where(y > 0, y * np.log(theta), 0.0)
                   + np.where(y < self.n, (self.n - y) * np.log1p(-theta), 0.0))
        return out

    def log_density(self, y, theta):
        return float(np.asarray(self.log_pmf(np.asarray(y), theta)).reshape(-1)[0])

    def sample(self, theta, size, rng):
        return rng.binomial(self.n, theta, size=int(size))

    def fit_mle(self, y):
        return float(np.asarray(y, dtype=float).reshape(-1)[0]) / self.n

    def fit_profile_mle(self, y, phi):
        return None  # no nuisance: profiling is a no-op

    def phi_of(self, theta):
        return float(theta)

    def theta_from(self, phi, lam=None):
        return float(phi)

    def full_log_ratio(self, y, theta):
        return float(min(0.0, self.log_pmf(y, theta) - self.log_pmf(y, self.fit_mle(y))))

    def full_log_ratio_support(self, theta):
        """log R(y', theta) for every point of the sample space."""
        ys = self.support()
        hats = ys / self.n
        best = np.array([self.log_pmf(y, p) for y, p in zip(ys, hats)])
        return np.minimum(0.0, self.log_pmf(ys, theta) - best)

    def exact_contour_values(self, y, thetas):
        """P{R(Y, theta) <= R(y, theta)} by summing the pmf; no Monte Carlo."""
        y = int(np.asarray(y).reshape(-1)[0])
        ys = self.support()
        out = np.empty(len(thetas))
        for j, th in enumerate(np.asarray(thetas, dtype=float)):
            logr = self.full_log_ratio_support(th)
            pmf = np.exp(self.log_pmf(ys, th))
            # normalize away the summation rounding so a full rejection set
            # gives exactly one
            out[j] = float(pmf[logr <= logr[y] + 1e-12].sum() / pmf.sum())
        return np.clip(out, 0.0, 1.0)


class Multinomial(ParametricModel):
    """Counts over K categories from n trials; theta on the simplex."""

    name = "multinomial"
    interest_name = "theta"

    def __init__(self, n: int, k: int):
        if n < 1 or k < 2:
            raise InvalidParameterError("need n >= 1 trials and k >= 2 categories")
        self.n, self.k = int(n), int(k)

    def _check_theta(self, theta):
        t = np.asarray(theta, dtype=float)
        if t.shape != (self.k,) or np.any(t < -1e-12) or abs(t.sum() - 1.0) > 1e-9:
            raise InvalidParameterError("theta must be a probability vector of length k")
        return np.clip(t, 0.0, 1.0)

    def log_density(self, y, theta):
        y = np.asarray(y, dtype=float)
        t = self._check_theta(theta)
        if y.sum() != self.n:
            raise ShapeMismatchError("counts must sum to n")
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(y > 0, y * np.log(t), 0.0)
        base = special.gammaln(self.n + 1) - special.gammaln(y + 1).sum()
        return float(base + terms.sum())

    def sample(self, theta, size, rng):
        return rng.multinomial(self.n, self._check_theta(theta), size=int(size))

    def fit_mle(self, y):
        return np.asarray(y, dtype=float) / self.n

    def full_log_ratio(self, y, theta):
        return float(self.full_log_ratio_batch(np.atleast_2d(y), theta)[0])

    def full_log_ratio_batch(self, batch, theta):
        """log prod (n theta_k / y_k)^{y_k}, with empty cells contributing 1."""
        y = np.atleast_2d(np.asarray(batch, dtype=float))
        t = self._check_theta(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(y > 0, y * (np.log(self.n * t) - np.log(y)), 0.0)
        out = terms.sum(axis=1)
        return np.minimum(out, 0.0)


class TwoBinomial(ParametricModel):
    """Independent Y1 ~ bin(n1, p1), Y2 ~ bin(n2, p2); interest is the
    log odds ratio phi = logit(p2) - logit(p1)."""

    name = "two-binomial"
    interest_name = "log-odds-ratio"
    enumerable = True

    def __init__(self, n1: int, n2: int):
        if n1 < 1 or n2 < 1:
            raise InvalidParameterError("both trial counts must be >= 1")
        self.n1, self.n2 = int(n1), int(n2)

    def log_density(self, y, theta):
        y = np.asarray(y)
        p1, p2 = theta
        for p in (p1, p2):
            if not 0 <= p <= 1:
                raise InvalidParameterError("probabilities must lie in [0, 1]")
        def one(yv, n, p):
            if p in (0.0, 1.0) and not (yv == 0 or yv == n):
                return -np.inf
            t = _log_comb(n, yv)
            if yv > 0:
                t += yv * math.log(p) if p > 0 else -np.inf
            if yv < n:
                t += (n - yv) * math.log1p(-p) if p < 1 else -np.inf
            return t
        return float(one(int(y[0]), self.n1, p1) + one(int(y[1]), self.n2, p2))

    def sample(self, theta, size, rng):
        p1, p2 = theta
        y1 = rng.binomial(self.n1, p1, size=int(size))
        y2 = rng.binomial(self.n2, p2, size=int(size))
        return np.stack([y1, y2], axis=1)

    def fit_mle(self, y):
        y = np.asarray(y)
        return (float(y[0]) / self.n1, float(y[1]) / self.n2)

    def phi_of(self, theta):
        p1, p2 = theta
        if min(p1, p2) <= 0 or max(p1, p2) >= 1:
            raise DegenerateDataError("log odds ratio undefined at boundary probabilities")
        return math.log(p2 / (1 - p2)) - math.log(p1 / (1 - p1))

    def theta_from(self, phi, lam):
        """lam is the log odds of group 1."""
        p1 = 1.0 / (1.0 + math.exp(-lam))
        p2 = 1.0 / (1.0 + math.exp(-(lam + phi)))
        return (p1, p2)

    # -- conditional reduction given U = Y1 + Y2 --

    def support_given(self, u: int):
        lo = max(u - self.n1, 0)
        hi = min(self.n2, u)
        if lo > hi:
            raise DegenerateDataError(f"total {u} impossible for these trial counts")
        return np.arange(lo, hi + 1)

    def cond_log_pmf(self, u: int, phis) -> np.ndarray:
        """log p(v | u, phi) over the support, for each phi: (support, phis)."""
        v = self.support_given(u)
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        base = _log_comb(self.n2, v) + _log_comb(self.n1, u - v)
        logw = base[:, None] + v[:, None] * phis[None, :]
        logw -= special.logsumexp(logw, axis=0, keepdims=True)
        return logw

    def cond_mean(self, u: int, phi: float) -> float:
        logp = self.cond_log_pmf(u, [phi])[:, 0]
        return float(np.sum(self.support_given(u) * np.exp(logp)))

    def cond_mle(self, u: int, v: int, bound: float = 50.0):
        """phi maximizing p(v | u, phi); +-inf at the support edges."""
        sup = self.support_given(u)
        if v < sup[0] or v > sup[-1]:
            raise DegenerateDataError("v outside the conditional support")
        if len(sup) == 1:
            return 0.0
        if v == sup[0]:
            return -np.inf
        if v == sup[-1]:
            return np.inf
        f = lambda p: self.cond_mean(u, p) - v
        return float(optimize.brentq(f, -bound, bound, xtol=1e-12))

    def cond_log_sup(self, u: int, v: int) -> float:
        """sup_phi log p(v | u, phi); the limit mass is 1 at support edges."""
        sup = self.support_given(u)
        if len(sup) == 1:
            return 0.0
        if v == sup[0] or v == sup[-1]:
            return 0.0
        phi_hat = self.cond_mle(u, v)
        return float(self.cond_log_pmf(u, [phi_hat])[int(v - sup[0]), 0])

    def cond_log_ratio_table(self, u: int, phis) -> np.ndarray:
        """log R(v, phi | u) for the whole support: (support, phis)."""
        logp = self.cond_log_pmf(u, phis)
        sups = np.array([self.cond_log_sup(u, int(v)) for v in self.support_given(u)])
        return np.minimum(0.0, logp - sups[:, None])

    def interest_mle(self, y):
        y = np.asarray(y)
        return self.cond_mle(int(y[0] + y[1]), int(y[1]))

    def reference_law(self, strategy="profile"):
        raise UnsupportedStrategyError(
            "two-binomial inference goes through the conditional engine"
        )


def simplex_lattice(k: int, step: int) -> np.ndarray:
    """All probability vectors with entries that are multiples of 1/step."""
    if k < 2 or step < 1:
        raise InvalidParameterError("need k >= 2 and step >= 1")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c, slots - 1)

    rec([], step, k)
    return np.array(out, dtype=float) / step
