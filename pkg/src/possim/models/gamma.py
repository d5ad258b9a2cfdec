"""Gamma samples parametrized by mean (interest) and shape (nuisance).

Both the full and the profile shape fit reduce to inverting the strictly
decreasing map h(lam) = log(lam) - digamma(lam), which a vectorized
safeguarded Newton handles for whole batches at once.  The law of the
profile relative likelihood at the true mean depends only on the shape
(datasets rescale), so engines grid over the shape alone.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..errors import DegenerateDataError, InvalidParameterError, ShapeMismatchError, UnsupportedStrategyError
from .base import ParametricModel, ReferenceLaw

DEFAULT_SHAPE_GRID = np.array([0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0])


def h_of(lam):
    lam = np.asarray(lam, dtype=float)
    return np.log(lam) - special.digamma(lam)


def h_inverse(c, tol=1e-13, max_iter=60):
    """Solve log(lam) - digamma(lam) = c for lam > 0, elementwise.

    Newton in log-space; h is strictly decreasing so the iteration is
    monotone once bracketed.  Residuals land well under 1e-10.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise DegenerateDataError("h_inverse needs positive arguments")
    lam = (3.0 - c + np.sqrt((c - 3.0) ** 2 + 24.0 * c)) / (12.0 * c)
    u = np.log(lam)
    for _ in range(max_iter):
        lam = np.exp(u)
        f = u - special.digamma(lam) - c
        fp = 1.0 - lam * special.polygamma(1, lam)  # strictly negative
        step = f / fp
        u = u - step
        if np.max(np.abs(f)) < tol:
            break
    return np.exp(u) if c.ndim else float(np.exp(u))


class GammaMean(ParametricModel):
    """n iid gamma(shape lam, scale phi/lam); phi is the mean."""

    name = "gamma-mean"
    interest_name = "mean"
    nuisance_name = "shape"

    def __init__(self, n: int):
        if n < 2:
            raise InvalidParameterError("need n >= 2 observations")
        self.n = int(n)

    def _suff(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[None, :]
        if y.shape[-1] != self.n:
            raise ShapeMismatchError(f"expected datasets of size {self.n}")
        if np.any(y <= 0):
            raise DegenerateDataError("gamma data must be positive")
        return y.mean(axis=1), np.mean(np.log(y), axis=1)

    def log_density(self, y, theta):
        phi, lam = theta
        if phi <= 0 or lam <= 0:
            raise InvalidParameterError("mean and shape must be positive")
        m, ml = self._suff(y)
        return float(self._loglik(m[0], ml[0], phi, lam))

    def _loglik(self, m, ml, phi, lam):
        """Per-dataset log likelihood from the sufficient pair (m, ml)."""
        return self.n * ((lam - 1.0) * ml - lam * m / phi
                         - lam * np.log(phi / lam) - special.gammaln(lam))

    def sample(self, theta, size, rng):
        phi, lam = theta
        return rng.gamma(lam, phi / lam, size=(int(size), self.n))

    def fit_mle(self, y):
        m, ml = self._suff(y)
        c = np.log(m) - ml
        if np.any(c <= 0):
            raise DegenerateDataError("constant sample: shape fit diverges")
        lam = h_inverse(c)
        return (float(m[0]), float(np.asarray(lam).ravel()[0]))

    def phi_of(self, theta):
        return float(theta[0])

    def theta_from(self, phi, lam):
        return (float(phi), float(lam))

    def fit_profile_mle(self, y, phi):
        m, ml = self._suff(y)
        c = m / phi + np.log(phi) - ml - 1.0
        return float(np.asarray(h_inverse(c)).ravel()[0])

    def shape_score(self, y, lam, phi=None):
        """d/d lam of the log likelihood at the (profile) optimum; ~0 there."""
        m, ml = self._suff(y)
        if phi is None:
            phi = m[0]
        return float(self.n * (ml[0] - m[0] / phi - np.log(phi / lam)
                               + 1.0 - special.digamma(lam)))

    # -- profile relative likelihood, vectorized over batches and grids --

    def _log_ratio_core(self, m, ml, phis):
        if np.any(phis <= 0):
            raise InvalidParameterError("mean values must be positive")
        c_hat = np.log(m) - ml
        if np.any(c_hat <= 0):
            raise DegenerateDataError("constant sample inside a batch")
        lam_hat = h_inverse(c_hat)
        c_prof = m[:, None] / phis[None, :] + np.log(phis)[None, :] - ml[:, None] - 1.0
        lam_prof = h_inverse(c_prof)
        top = self._loglik(m[:, None], ml[:, None], phis[None, :], lam_prof)
        ref = self._loglik(m, ml, m, lam_hat)[:, None]
        return np.minimum(top - ref, 0.0)

    def profile_log_ratio(self, y, phi):
        m, ml = self._suff(y)
        return float(self._log_ratio_core(m, ml, np.array([float(phi)]))[0, 0])

    def profile_log_ratio_vec(self, y, phis):
        m, ml = self._suff(y)
        return self._log_ratio_core(m, ml, np.asarray(phis, dtype=float))[0]

    def profile_log_ratio_batch(self, batch, phi):
        m, ml = self._suff(batch)
        return self._log_ratio_core(m, ml, np.array([float(phi)]))[:, 0]

    def profile_log_ratio_matrix(self, batch, phis):
        m, ml = self._suff(batch)
        return self._log_ratio_core(m, ml, np.asarray(phis, dtype=float))

    def interest_mle(self, y):
        m, _ = self._suff(y)
        return float(m[0])

    def interest_mle_batch(self, batch):
        m, _ = self._suff(batch)
        return m

    def full_log_ratio_batch(self, batch, theta):
        phi, lam = float(theta[0]), float(theta[1])
        if phi <= 0 or lam <= 0:
            raise InvalidParameterError("mean and shape must be positive")
        m, ml = self._suff(batch)
        c_hat = np.log(m) - ml
        if np.any(c_hat <= 0):
            raise DegenerateDataError("constant sample inside a batch")
        ref = self._loglik(m, ml, m, h_inverse(c_hat))
        return np.minimum(self._loglik(m, ml, phi, lam) - ref, 0.0)

    def reference_law(self, strategy="profile"):
        if strategy != "profile":
            raise UnsupportedStrategyError("gamma-mean supports the profile reduction")
        # rescaling Y -> Y/phi sends the problem to mean 1 at the same shape
        return ReferenceLaw("nuisance-only", lambda lam: (1.0, float(lam)), phi_ref=1.0)
