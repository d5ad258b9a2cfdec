"""Normal-family models: iid samples, ratios of means, two-sample problems,
mean-vector length, and the many-nuisance paired layout.

Profile fits are closed form (or reduce to a cubic stationarity equation in
the two-sample case), and each model declares how the sampling law of its
relative likelihood reduces, so the engines can share reference samples.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, special, stats

from ..errors import DegenerateDataError, InvalidParameterError, ShapeMismatchError, UnsupportedStrategyError
from .base import ParametricModel, ReferenceLaw

LOG_2PI = math.log(2.0 * math.pi)


def _as_batch(y, width):
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[None, :]
    if y.shape[-1] != width:
        raise ShapeMismatchError(f"expected datasets of width {width}, got {y.shape}")
    return y


class NormalIID(ParametricModel):
    """n iid N(mu, sigma^2) observations; interest is the mean or the sd."""

    def __init__(self, n: int, interest: str = "mean"):
        if n < 2:
            raise InvalidParameterError("need n >= 2 for a two-parameter normal fit")
        if interest not in ("mean", "sd"):
            raise InvalidParameterError(f"interest must be 'mean' or 'sd', got {interest!r}")
        self.n = int(n)
        self.interest = interest
        self.name = f"normal-{interest}"
        self.interest_name = "mean" if interest == "mean" else "sd"

    # -- core --

    def log_density(self, y, theta):
        mu, sigma = theta
        if sigma <= 0:
            raise InvalidParameterError("sigma must be positive")
        y = np.asarray(y, dtype=float)
        return float(-0.5 * self.n * LOG_2PI - self.n * math.log(sigma)
                     - 0.5 * np.sum((y - mu) ** 2) / sigma**2)

    def sample(self, theta, size, rng):
        mu, sigma = theta
        return rng.normal(mu, sigma, size=(int(size), self.n))

    def _suff(self, y):
        y = _as_batch(y, self.n)
        m = y.mean(axis=1)
        v = y.var(axis=1)  # ML variance (divisor n)
        return m, v

    def fit_mle(self, y):
        m, v = self._suff(y)
        if np.any(v <= 0):
            raise DegenerateDataError("constant sample: ML sd is zero")
        return (float(m[0]), float(math.sqrt(v[0])))

    def phi_of(self, theta):
        return float(theta[0] if self.interest == "mean" else theta[1])

    def theta_from(self, phi, lam):
        if self.interest == "mean":
            return (float(phi), float(lam))
        return (float(lam), float(phi))

    def fit_profile_mle(self, y, phi):
        m, v = self._suff(y)
        if self.interest == "mean":
            return float(math.sqrt(v[0] + (m[0] - phi) ** 2))
        return float(m[0])  # mean unrestricted when sd is the interest

    # -- profile relative likelihood --

    def profile_log_ratio(self, y, phi):
        return float(self.profile_log_ratio_matrix(np.atleast_2d(y), [phi])[0, 0])

    def profile_log_ratio_vec(self, y, phis):
        return self.profile_log_ratio_matrix(np.atleast_2d(y), phis)[0]

    def profile_log_ratio_batch(self, batch, phi):
        return self.profile_log_ratio_matrix(batch, [phi])[:, 0]

    def profile_log_ratio_matrix(self, batch, phis):
        m, v = self._suff(batch)
        phis = np.asarray(phis, dtype=float)
        if self.interest == "mean":
            out = 0.5 * self.n * (np.log(v[:, None])
                                  - np.log(v[:, None] + (m[:, None] - phis[None, :]) ** 2))
        else:
            if np.any(phis <= 0):
                raise InvalidParameterError("sd values must be positive")
            w = self.n * v[:, None] / phis[None, :] ** 2  # chi2(n-1) pivot
            out = 0.5 * (self.n * np.log(w / self.n) - w + self.n)
        return np.minimum(out, 0.0)

    def interest_mle(self, y):
        m, v = self._suff(y)
        return float(m[0]) if self.interest == "mean" else float(math.sqrt(v[0]))

    def full_log_ratio_batch(self, batch, theta):
        mu, sigma = float(theta[0]), float(theta[1])
        if sigma <= 0:
            raise InvalidParameterError("sigma must be positive")
        m, v = self._suff(batch)
        if np.any(v <= 0):
            raise DegenerateDataError("constant sample inside a batch")
        val = (0.5 * self.n * (np.log(v) - 2.0 * math.log(sigma) + 1.0)
               - 0.5 * self.n * (v + (m - mu) ** 2) / sigma**2)
        return np.minimum(val, 0.0)

    def interest_mle_batch(self, batch):
        m, v = self._suff(batch)
        return m if self.interest == "mean" else np.sqrt(v)

    # -- marginal relative likelihood for the sd (based on the ML sd alone) --

    def _marginal_check(self):
        if self.interest != "sd":
            raise UnsupportedStrategyError("marginal reduction applies to the sd interest")

    def marginal_log_ratio(self, y, phi):
        return float(self.marginal_log_ratio_matrix(np.atleast_2d(y), [phi])[0, 0])

    def marginal_log_ratio_vec(self, y, phis):
        return self.marginal_log_ratio_matrix(np.atleast_2d(y), phis)[0]

    def marginal_log_ratio_batch(self, batch, phi):
        return self.marginal_log_ratio_matrix(batch, [phi])[:, 0]

    def marginal_log_ratio_matrix(self, batch, phis):
        """n * sdhat^2 / phi^2 is chi2(n-1); mode n-1 rather than n."""
        self._marginal_check()
        _, v = self._suff(batch)
        phis = np.asarray(phis, dtype=float)
        if np.any(phis <= 0):
            raise InvalidParameterError("sd values must be positive")
        w = self.n * v[:, None] / phis[None, :] ** 2
        k = self.n - 1.0
        out = 0.5 * (k * np.log(w / k) - w + k)
        return np.minimum(out, 0.0)

    def marginal_interest_mle(self, y):
        self._marginal_check()
        _, v = self._suff(np.atleast_2d(y))
        return float(math.sqrt(self.n * v[0] / (self.n - 1.0)))

    def marginal_interest_mle_batch(self, batch):
        self._marginal_check()
        _, v = self._suff(batch)
        return np.sqrt(self.n * v / (self.n - 1.0))

    def reference_law(self, strategy="profile"):
        if strategy == "marginal":
            self._marginal_check()
        elif strategy != "profile":
            raise UnsupportedStrategyError(f"{self.name} has no {strategy} reduction")
        phi_ref = 0.0 if self.interest == "mean" else 1.0
        return ReferenceLaw("pivot", lambda: (0.0, 1.0), phi_ref=phi_ref)


class NormalKnownVariance(ParametricModel):
    """n iid N(theta, sigma^2) with sigma known; no nuisance parameter."""

    name = "normal-known-var"
    interest_name = "mean"

    def __init__(self, n: int, sigma: float = 1.0):
        if sigma <= 0:
            raise InvalidParameterError("sigma must be positive")
        self.n = int(n)
        self.sigma = float(sigma)

    def log_density(self, y, theta):
        y = np.asarray(y, dtype=float)
        return float(-0.5 * self.n * LOG_2PI - self.n * math.log(self.sigma)
                     - 0.5 * np.sum((y - theta) ** 2) / self.sigma**2)

    def log_density_batch(self, batch, theta):
        b = _as_batch(batch, self.n)
        return (-0.5 * self.n * LOG_2PI - self.n * math.log(self.sigma)
                - 0.5 * np.sum((b - theta) ** 2, axis=1) / self.sigma**2)

    def sample(self, theta, size, rng):
        return rng.normal(theta, self.sigma, size=(int(size), self.n))

    def fit_mle(self, y):
        return float(np.mean(np.asarray(y, dtype=float)))

    def phi_of(self, theta):
        return float(theta)

    def theta_from(self, phi, lam=None):
        return float(phi)

    def fit_profile_mle(self, y, phi):
        return None

    def profile_log_ratio(self, y, phi):
        m = float(np.mean(np.asarray(y, dtype=float)))
        return min(0.0, -0.5 * self.n * (m - phi) ** 2 / self.sigma**2)

    def profile_log_ratio_vec(self, y, phis):
        m = float(np.mean(np.asarray(y, dtype=float)))
        phis = np.asarray(phis, dtype=float)
        return np.minimum(0.0, -0.5 * self.n * (m - phis) ** 2 / self.sigma**2)

    def profile_log_ratio_batch(self, batch, phi):
        m = _as_batch(batch, self.n).mean(axis=1)
        return np.minimum(0.0, -0.5 * self.n * (m - phi) ** 2 / self.sigma**2)

    def interest_mle_batch(self, batch):
        return _as_batch(batch, self.n).mean(axis=1)

    def reference_law(self, strategy="profile"):
        if strategy != "profile":
            raise UnsupportedStrategyError("only the profile (here: full) reduction")
        return ReferenceLaw("pivot", lambda: 0.0, phi_ref=0.0)


class FiellerCreasy(ParametricModel):
    """Y1 ~ N(theta1, 1), Y2 ~ N(theta2, 1) independent; interest theta1/theta2."""

    name = "fieller-creasy"
    interest_name = "ratio"

    def log_density(self, y, theta):
        y = np.asarray(y, dtype=float)
        t = np.asarray(theta, dtype=float)
        return float(-LOG_2PI - 0.5 * np.sum((y - t) ** 2))

    def sample(self, theta, size, rng):
        t = np.asarray(theta, dtype=float)
        return rng.normal(t, 1.0, size=(int(size), 2))

    def fit_mle(self, y):
        y = np.asarray(y, dtype=float)
        return (float(y[0]), float(y[1]))

    def phi_of(self, theta):
        if theta[1] == 0:
            raise DegenerateDataError("ratio undefined at theta2 = 0")
        return float(theta[0] / theta[1])

    def theta_from(self, phi, lam):
        return (float(phi) * float(lam), float(lam))

    def fit_profile_mle(self, y, phi):
        y = np.asarray(y, dtype=float)
        return float((y[0] + phi * y[1]) / (1.0 + phi**2))

    def profile_log_ratio(self, y, phi):
        y = np.asarray(y, dtype=float)
        return min(0.0, -0.5 * (y[0] - phi * y[1]) ** 2 / (1.0 + phi**2))

    def profile_log_ratio_vec(self, y, phis):
        y = np.asarray(y, dtype=float)
        phis = np.asarray(phis, dtype=float)
        return np.minimum(0.0, -0.5 * (y[0] - phis * y[1]) ** 2 / (1.0 + phis**2))

    def profile_log_ratio_batch(self, batch, phi):
        b = _as_batch(batch, 2)
        return np.minimum(0.0, -0.5 * (b[:, 0] - phi * b[:, 1]) ** 2 / (1.0 + phi**2))

    def profile_log_ratio_matrix(self, batch, phis):
        b = _as_batch(batch, 2)
        phis = np.asarray(phis, dtype=float)
        num = (b[:, 0, None] - phis[None, :] * b[:, 1, None]) ** 2
        return np.minimum(0.0, -0.5 * num / (1.0 + phis[None, :] ** 2))

    def interest_mle(self, y):
        y = np.asarray(y, dtype=float)
        if y[1] == 0:
            raise DegenerateDataError("ratio estimate undefined at y2 = 0")
        return float(y[0] / y[1])

    def interest_mle_batch(self, batch):
        b = _as_batch(batch, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return b[:, 0] / b[:, 1]

    def reference_law(self, strategy="profile"):
        if strategy != "profile":
            raise UnsupportedStrategyError("fieller-creasy supports the profile reduction")
        # -2 log R(Y, phi) is exactly chi-square(1) at the true ratio
        return ReferenceLaw("pivot", lambda: (0.0, 1.0), phi_ref=0.0)


class BehrensFisher(ParametricModel):
    """Two independent normal samples; interest is the difference of means.

    Datasets are carried as sufficient summaries [mean1, mlvar1, mean2,
    mlvar2] with group sizes fixed at construction.  The law of the
    profile relative likelihood at the true difference depends on the
    parameters only through the variance ratio, which is the reduced
    nuisance the engines grid over.

    Calibration convention: reference replicates draw the scale summary
    as a ddof-1 sample variance (chi-square over n-1) while observed data
    enter as maximum-likelihood variances.  This asymmetry is what the
    standard published benchmark intervals and coverages for this problem
    are calibrated against; simulating the reference tables with
    ML-scaled chi-squares instead reproduces the (wider) classical
    two-sample intervals.
    """

    name = "behrens-fisher"
    interest_name = "mean-difference"
    nuisance_name = "variance-ratio"

    def __init__(self, n1: int, n2: int):
        if n1 < 2 or n2 < 2:
            raise InvalidParameterError("both groups need n >= 2")
        self.n1, self.n2 = int(n1), int(n2)

    # -- dataset construction --

    def summary_from_groups(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        if y1.size != self.n1 or y2.size != self.n2:
            raise ShapeMismatchError("group sizes disagree with the model")
        return np.array([y1.mean(), y1.var(), y2.mean(), y2.var()])

    def summary_from_stats(self, mean1, sd1, mean2, sd2, ddof=1):
        """Summaries from reported means and standard deviations.

        ddof=1 treats sd as the usual sample standard deviation.
        """
        a1 = sd1**2 * (self.n1 - ddof) / self.n1
        a2 = sd2**2 * (self.n2 - ddof) / self.n2
        return np.array([float(mean1), float(a1), float(mean2), float(a2)])

    # -- core --

    def log_density(self, y, theta):
        m1, a1, m2, a2 = np.asarray(y, dtype=float)
        mu1, mu2, v1, v2 = theta
        if v1 <= 0 or v2 <= 0:
            raise InvalidParameterError("variances must be positive")
        ll1 = -0.5 * self.n1 * (LOG_2PI + math.log(v1)) \
            - 0.5 * self.n1 * (a1 + (m1 - mu1) ** 2) / v1
        ll2 = -0.5 * self.n2 * (LOG_2PI + math.log(v2)) \
            - 0.5 * self.n2 * (a2 + (m2 - mu2) ** 2) / v2
        return float(ll1 + ll2)

    def sample(self, theta, size, rng):
        mu1, mu2, v1, v2 = theta
        size = int(size)
        m1 = rng.normal(mu1, math.sqrt(v1 / self.n1), size)
        m2 = rng.normal(mu2, math.sqrt(v2 / self.n2), size)
        a1 = v1 * rng.chisquare(self.n1 - 1, size) / self.n1
        a2 = v2 * rng.chisquare(self.n2 - 1, size) / self.n2
        return np.stack([m1, a1, m2, a2], axis=1)

    def reference_sample(self, theta, size, rng):
        # scale summaries as ddof-1 sample variances; see the class docstring
        mu1, mu2, v1, v2 = theta
        size = int(size)
        m1 = rng.normal(mu1, math.sqrt(v1 / self.n1), size)
        m2 = rng.normal(mu2, math.sqrt(v2 / self.n2), size)
        a1 = v1 * rng.chisquare(self.n1 - 1, size) / (self.n1 - 1)
        a2 = v2 * rng.chisquare(self.n2 - 1, size) / (self.n2 - 1)
        return np.stack([m1, a1, m2, a2], axis=1)

    def fit_mle(self, y):
        m1, a1, m2, a2 = np.asarray(y, dtype=float)
        if a1 <= 0 or a2 <= 0:
            raise DegenerateDataError("a group has zero variance")
        return (float(m1), float(m2), float(a1), float(a2))

    def phi_of(self, theta):
        return float(theta[1] - theta[0])

    def theta_from(self, phi, lam):
        """lam may be a scalar variance ratio or a (mu1, v1, v2) triple."""
        if np.isscalar(lam):
            return (0.0, float(phi), float(lam), 1.0)
        mu1, v1, v2 = lam
        return (float(mu1), float(mu1 + phi), float(v1), float(v2))

    # -- profile fit: stationarity in the common location is a cubic --

    @staticmethod
    def _cubic_roots(p, q, r):
        """Real roots of m^3 + p m^2 + q m + r, vectorized; NaN pads."""
        p, q, r = np.broadcast_arrays(p, q, r)
        P = q - p**2 / 3.0
        Q = 2.0 * p**3 / 27.0 - p * q / 3.0 + r
        disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
        roots = np.full(p.shape + (3,), np.nan)

        one = disc > 0
        if np.any(one):
            s = np.sqrt(disc[one])
            t = np.cbrt(-Q[one] / 2.0 + s) + np.cbrt(-Q[one] / 2.0 - s)
            roots[one, 0] = t

        tri = ~one
        if np.any(tri):
            Pm = np.minimum(P[tri], -1e-300)
            rho = np.sqrt(-(Pm / 3.0) ** 3)
            ang = np.arccos(np.clip(-Q[tri] / (2.0 * rho), -1.0, 1.0))
            amp = 2.0 * np.sqrt(-Pm / 3.0)
            for k in range(3):
                roots[tri, k] = amp * np.cos((ang - 2.0 * math.pi * k) / 3.0)

        return roots - p[..., None] / 3.0

    def _profile_objective(self, m, b, c, a1, a2):
        return (-0.5 * self.n1 * np.log(a1 + (b - m) ** 2)
                - 0.5 * self.n2 * np.log(a2 + (c - m) ** 2))

    def _profile_location(self, b, c, a1, a2):
        """argmax over the common location at fixed mean difference."""
        n1, n2 = self.n1, self.n2
        A3 = -(n1 + n2)
        A2 = n1 * (b + 2.0 * c) + n2 * (2.0 * b + c)
        A1 = -(2.0 * (n1 + n2) * b * c + n1 * (a2 + c**2) + n2 * (a1 + b**2))
        A0 = b * c * (n1 * c + n2 * b) + n1 * a2 * b + n2 * a1 * c
        roots = self._cubic_roots(A2 / A3, A1 / A3, A0 / A3)

        obj = np.where(np.isnan(roots), -np.inf,
                       self._profile_objective(np.nan_to_num(roots),
                                               np.asarray(b)[..., None],
                                               np.asarray(c)[..., None],
                                               np.asarray(a1)[..., None],
                                               np.asarray(a2)[..., None]))
        best = np.argmax(obj, axis=-1)
        m = np.take_along_axis(roots, best[..., None], axis=-1)[..., 0]
        # one Newton polish on the stationarity equation
        u, w = b - m, c - m
        v = n1 * u / (a1 + u**2) + n2 * w / (a2 + w**2)
        vp = n1 * (u**2 - a1) / (a1 + u**2) ** 2 + n2 * (w**2 - a2) / (a2 + w**2) ** 2
        step = np.where(np.abs(vp) > 1e-300, v / vp, 0.0)
        m2 = m - step
        better = (self._profile_objective(m2, b, c, a1, a2)
                  >= self._profile_objective(m, b, c, a1, a2))
        return np.where(better, m2, m)

    def fit_profile_mle(self, y, phi):
        m1, a1, m2, a2 = np.asarray(y, dtype=float)
        mu1 = float(self._profile_location(np.array(m1), np.array(m2 - phi),
                                           np.array(a1), np.array(a2)))
        v1 = a1 + (m1 - mu1) ** 2
        v2 = a2 + (m2 - phi - mu1) ** 2
        return (mu1, float(v1), float(v2))

    def _log_ratio_core(self, b, c, a1, a2):
        m = self._profile_location(b, c, a1, a2)
        out = (-0.5 * self.n1 * np.log1p((b - m) ** 2 / a1)
               - 0.5 * self.n2 * np.log1p((c - m) ** 2 / a2))
        return np.minimum(out, 0.0)

    def profile_log_ratio(self, y, phi):
        m1, a1, m2, a2 = np.asarray(y, dtype=float)
        return float(self._log_ratio_core(np.array(m1), np.array(m2 - phi),
                                          np.array(a1), np.array(a2)))

    def profile_log_ratio_vec(self, y, phis):
        m1, a1, m2, a2 = np.asarray(y, dtype=float)
        phis = np.asarray(phis, dtype=float)
        return self._log_ratio_core(np.full_like(phis, m1), m2 - phis,
                                    np.full_like(phis, a1), np.full_like(phis, a2))

    def profile_log_ratio_batch(self, batch, phi):
        b = _as_batch(batch, 4)
        return self._log_ratio_core(b[:, 0], b[:, 2] - phi, b[:, 1], b[:, 3])

    def profile_log_ratio_matrix(self, batch, phis):
        b = _as_batch(batch, 4)
        phis = np.asarray(phis, dtype=float)
        return self._log_ratio_core(b[:, 0, None], b[:, 2, None] - phis[None, :],
                                    b[:, 1, None], b[:, 3, None])

    def interest_mle(self, y):
        y = np.asarray(y, dtype=float)
        return float(y[2] - y[0])

    def interest_mle_batch(self, batch):
        b = _as_batch(batch, 4)
        return b[:, 2] - b[:, 0]

    def reference_law(self, strategy="profile"):
        if strategy != "profile":
            raise UnsupportedStrategyError("behrens-fisher supports the profile reduction")
        return ReferenceLaw("nuisance-only",
                            lambda lam: (0.0, 0.0, float(lam), 1.0), phi_ref=0.0)


class MeanVectorLength(ParametricModel):
    """Single draw Y ~ N_n(theta, I); interest is the length of theta."""

    name = "mean-length"
    interest_name = "length"

    def __init__(self, n: int):
        if n < 2:
            raise InvalidParameterError("need dimension n >= 2")
        self.n = int(n)

    def log_density(self, y, theta):
        y = np.asarray(y, dtype=float)
        t = np.asarray(theta, dtype=float)
        return float(-0.5 * self.n * LOG_2PI - 0.5 * np.sum((y - t) ** 2))

    def sample(self, theta, size, rng):
        t = np.asarray(theta, dtype=float)
        return rng.normal(t, 1.0, size=(int(size), self.n))

    def fit_mle(self, y):
        return np.asarray(y, dtype=float).copy()

    def phi_of(self, theta):
        return float(np.linalg.norm(np.asarray(theta, dtype=float)))

    def theta_from(self, phi, lam=None):
        if phi < 0:
            raise InvalidParameterError("length must be nonnegative")
        t = np.zeros(self.n)
        t[0] = phi
        return t

    def fit_profile_mle(self, y, phi):
        y = np.asarray(y, dtype=float)
        u = np.linalg.norm(y)
        if u == 0:
            return self.theta_from(phi)
        return phi * y / u

    def profile_log_ratio(self, y, phi):
        u = float(np.linalg.norm(np.asarray(y, dtype=float)))
        return min(0.0, -0.5 * (u - phi) ** 2)

    def profile_log_ratio_vec(self, y, phis):
        u = float(np.linalg.norm(np.asarray(y, dtype=float)))
        return np.minimum(0.0, -0.5 * (u - np.asarray(phis, float)) ** 2)

    def profile_log_ratio_batch(self, batch, phi):
        u = np.linalg.norm(_as_batch(batch, self.n), axis=1)
        return np.minimum(0.0, -0.5 * (u - phi) ** 2)

    def interest_mle(self, y):
        return float(np.linalg.norm(np.asarray(y, dtype=float)))

    def interest_mle_batch(self, batch):
        return np.linalg.norm(_as_batch(batch, self.n), axis=1)

    # -- marginal reduction through U = |Y| (noncentral chi) --

    def _marg_logpdf(self, u, phi):
        if phi < 0:
            raise InvalidParameterError("length must be nonnegative")
        return float(self._marg_logpdf_rows(np.asarray(u, dtype=float), phi))

    def marginal_interest_mle(self, y):
        u = float(np.linalg.norm(np.asarray(y, dtype=float)))
        res = optimize.minimize_scalar(lambda p: -self._marg_logpdf(u, p),
                                       bounds=(0.0, u + 6.0), method="bounded",
                                       options={"xatol": 1e-10})
        border = self._marg_logpdf(u, 0.0)
        if border >= -res.fun:
            return 0.0
        return float(res.x)

    def marginal_log_ratio(self, y, phi):
        u = float(np.linalg.norm(np.asarray(y, dtype=float)))
        top = self._marg_logpdf(u, phi)
        ref = self._marg_logpdf(u, self.marginal_interest_mle(y))
        return float(min(0.0, top - ref))

    def marginal_log_ratio_vec(self, y, phis):
        u = float(np.linalg.norm(np.asarray(y, dtype=float)))
        ref = self._marg_logpdf(u, self.marginal_interest_mle(y))
        vals = np.array([self._marg_logpdf(u, p) for p in np.asarray(phis, float)])
        return np.minimum(0.0, vals - ref)

    def _marg_logpdf_rows(self, us, phis):
        """Elementwise marginal log-density; us, phis broadcastable arrays.

        Below phi = 1e-6 the noncentral density is within ~1e-12 of the
        central one but scipy's ncx2 is numerically fragile there, so the
        central branch takes over.
        """
        us = np.asarray(us, dtype=float)
        phis = np.asarray(phis, dtype=float)
        x = us**2
        noncentral = stats.ncx2.logpdf(x, self.n, np.maximum(phis, 1e-6) ** 2)
        central = stats.chi2.logpdf(x, self.n)
        return np.where(phis > 1e-6, noncentral, central) + np.log(2.0 * us)

    def _marg_mle_rows(self, us):
        """Per-row maximizer of phi -> marginal logpdf, by ternary search."""
        a = np.zeros_like(us)
        b = us + 6.0
        for _ in range(60):
            c = a + (b - a) / 3.0
            d = b - (b - a) / 3.0
            left_wins = self._marg_logpdf_rows(us, c) >= self._marg_logpdf_rows(us, d)
            b = np.where(left_wins, d, b)
            a = np.where(left_wins, a, c)
        mid = 0.5 * (a + b)
        # an interior stationary point can still lose to the boundary
        at_zero = self._marg_logpdf_rows(us, np.zeros_like(us))
        return np.where(at_zero >= self._marg_logpdf_rows(us, mid), 0.0, mid)

    def marginal_log_ratio_batch(self, batch, phi):
        us = np.linalg.norm(_as_batch(batch, self.n), axis=1)
        top = self._marg_logpdf_rows(us, float(phi))
        ref = self._marg_logpdf_rows(us, self._marg_mle_rows(us))
        return np.minimum(0.0, top - ref)

    def marginal_interest_mle_batch(self, batch):
        us = np.linalg.norm(_as_batch(batch, self.n), axis=1)
        return self._marg_mle_rows(us)

    def reference_law(self, strategy="profile"):
        if strategy not in ("profile", "marginal"):
            raise UnsupportedStrategyError(f"no {strategy} reduction")
        return ReferenceLaw("phi-only", self.theta_from)


class NeymanScott(ParametricModel):
    """Pairs Y_i ~ N_2(mu_i, phi I): one variance, n mean nuisances.

    The full MLE of phi converges to phi/2, so the profile relative
    likelihood concentrates in the wrong place; the marginal reduction
    through the within-pair differences repairs this.
    """

    name = "neyman-scott"
    interest_name = "variance"

    def __init__(self, n: int):
        if n < 2:
            raise InvalidParameterError("need n >= 2 pairs")
        self.n = int(n)

    def _as_pairs(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 2:
            y = y[None, :, :]
        if y.shape[-2:] != (self.n, 2):
            raise ShapeMismatchError(f"expected (n, 2) pairs, got {y.shape}")
        return y

    def log_density(self, y, theta):
        phi, mus = theta
        if phi <= 0:
            raise InvalidParameterError("variance must be positive")
        y = self._as_pairs(y)[0]
        resid = y - np.asarray(mus, dtype=float)[:, None]
        return float(-self.n * (LOG_2PI + math.log(phi)) - 0.5 * np.sum(resid**2) / phi)

    def sample(self, theta, size, rng):
        phi, mus = theta
        mus = np.asarray(mus, dtype=float)
        eps = rng.normal(0.0, math.sqrt(phi), size=(int(size), self.n, 2))
        return mus[None, :, None] + eps

    def batch_size(self, batch):
        return self._as_pairs(batch).shape[0]

    def batch_item(self, batch, i):
        return self._as_pairs(batch)[i]

    def fit_mle(self, y):
        y = self._as_pairs(y)[0]
        mus = y.mean(axis=1)
        d = y[:, 0] - y[:, 1]
        phi = float(np.sum(d**2) / (4.0 * self.n))
        if phi <= 0:
            raise DegenerateDataError("all pairs identical")
        return (phi, mus)

    def phi_of(self, theta):
        return float(theta[0])

    def theta_from(self, phi, lam=None):
        mus = np.zeros(self.n) if lam is None else np.asarray(lam, dtype=float)
        return (float(phi), mus)

    def fit_profile_mle(self, y, phi):
        return self._as_pairs(y)[0].mean(axis=1)

    def _u_sq_mean(self, batch):
        y = self._as_pairs(batch)
        d = y[:, :, 0] - y[:, :, 1]
        return np.mean(d**2 / 2.0, axis=1)  # mean of U_i^2

    def profile_log_ratio(self, y, phi):
        return float(self.profile_log_ratio_batch(y, phi)[0])

    def profile_log_ratio_vec(self, y, phis):
        phis = np.asarray(phis, dtype=float)
        phihat = self._u_sq_mean(y) / 2.0
        r = phihat[0] / phis
        return np.minimum(0.0, self.n * (np.log(r) - r + 1.0))

    def profile_log_ratio_batch(self, batch, phi):
        phihat = self._u_sq_mean(batch) / 2.0
        r = phihat / phi
        return np.minimum(0.0, self.n * (np.log(r) - r + 1.0))

    def interest_mle(self, y):
        return float(self._u_sq_mean(y)[0] / 2.0)

    def interest_mle_batch(self, batch):
        return self._u_sq_mean(batch) / 2.0

    # -- marginal reduction through the within-pair differences --

    def marginal_log_ratio(self, y, phi):
        return float(self.marginal_log_ratio_batch(y, phi)[0])

    def marginal_log_ratio_vec(self, y, phis):
        phis = np.asarray(phis, dtype=float)
        m = self._u_sq_mean(y)[0]
        r = m / phis
        return np.minimum(0.0, 0.5 * self.n * (np.log(r) - r + 1.0))

    def marginal_log_ratio_batch(self, batch, phi):
        m = self._u_sq_mean(batch)
        r = m / phi
        return np.minimum(0.0, 0.5 * self.n * (np.log(r) - r + 1.0))

    def marginal_interest_mle(self, y):
        return float(self._u_sq_mean(y)[0])

    def marginal_interest_mle_batch(self, batch):
        return self._u_sq_mean(batch)

    def reference_law(self, strategy="profile"):
        if strategy not in ("profile", "marginal"):
            raise UnsupportedStrategyError(f"no {strategy} reduction")
        return ReferenceLaw("pivot", lambda: (1.0, np.zeros(self.n)), phi_ref=1.0)
