"""Model protocol used by the contour engines.

A model knows its sampling density, how to simulate batches of datasets,
and how to fit full and interest-constrained (profile) maximum likelihood.
Models also declare how the sampling law of their relative likelihood
depends on the true parameter, which lets the engines reuse reference
samples across the interest grid:

  "pivot"          law is free of both interest and nuisance
  "nuisance-only"  law depends on a reduced nuisance (e.g. a variance ratio)
  "phi-only"       no nuisance, but the law depends on the interest value
  "full"           no reduction declared
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedStrategyError

LAW_KINDS = ("pivot", "nuisance-only", "phi-only", "full")


@dataclass(frozen=True)
class ReferenceLaw:
    """How the law of R(Y, phi) under P_{Y|phi,lam} reduces.

    theta_at builds the simulation truth: for "pivot" it takes no
    arguments, for "nuisance-only" the reduced nuisance value, for
    "phi-only" the interest value, for "full" the pair (phi, lam).
    phi_ref is the interest value at which reference replicates of
    R(Y, phi) may be computed when the law is free of phi.
    """

    kind: str
    theta_at: object
    phi_ref: float | None = None

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown reference-law kind {self.kind!r}")


class ParametricModel:
    """Shared fallbacks; concrete models override the hot paths."""

    name = "abstract"
    interest_name = "phi"
    nuisance_name = "lambda"
    enumerable = False   # True when the sample space is small and discrete

    # -- core ---------------------------------------------------------------

    def log_density(self, y, theta) -> float:
        raise NotImplementedError

    def sample(self, theta, size, rng) -> np.ndarray:
        """Batch of datasets, leading axis indexes the replicate."""
        raise NotImplementedError

    def reference_sample(self, theta, size, rng) -> np.ndarray:
        """Replicates used to tabulate the reference law of the ordering.

        Defaults to the data-generating sampler; a model may override it
        when its calibration convention for the reference tables differs
        from the physical sampling model.
        """
        return self.sample(theta, size, rng)

    def fit_mle(self, y):
        raise NotImplementedError

    def fit_profile_mle(self, y, phi):
        """Nuisance value maximizing likelihood at fixed interest."""
        raise UnsupportedStrategyError(f"{self.name} has no profile fit")

    def theta_from(self, phi, lam):
        raise UnsupportedStrategyError(f"{self.name} has no (phi, lam) split")

    def phi_of(self, theta) -> float:
        raise UnsupportedStrategyError(f"{self.name} has no interest map")

    def interest_mle(self, y) -> float:
        return self.phi_of(self.fit_mle(y))

    # -- batch plumbing -------------------------------------------------------

    def batch_size(self, batch) -> int:
        return int(np.asarray(batch).shape[0])

    def batch_item(self, batch, i):
        return np.asarray(batch)[i]

    # -- profile relative likelihood ------------------------------------------

    def max_log_density(self, y) -> float:
        return float(self.log_density(y, self.fit_mle(y)))

    def profile_log_ratio(self, y, phi) -> float:
        lam = self.fit_profile_mle(y, phi)
        val = self.log_density(y, self.theta_from(phi, lam)) - self.max_log_density(y)
        return float(min(val, 0.0))

    def profile_log_ratio_vec(self, y, phis) -> np.ndarray:
        return np.array([self.profile_log_ratio(y, p) for p in np.asarray(phis, float)])

    def profile_log_ratio_batch(self, batch, phi) -> np.ndarray:
        n = self.batch_size(batch)
        return np.array([self.profile_log_ratio(self.batch_item(batch, i), phi)
                         for i in range(n)])

    def profile_log_ratio_matrix(self, batch, phis) -> np.ndarray:
        """(batch, grid) table of profile log relative likelihoods."""
        return np.stack([self.profile_log_ratio_batch(batch, p)
                         for p in np.asarray(phis, float)], axis=1)

    def interest_mle_batch(self, batch) -> np.ndarray:
        n = self.batch_size(batch)
        return np.array([self.interest_mle(self.batch_item(batch, i)) for i in range(n)])

    def reference_law(self, strategy="profile") -> ReferenceLaw:
        if strategy != "profile":
            raise UnsupportedStrategyError(f"{self.name} has no {strategy} reduction")
        return ReferenceLaw("full", self.theta_from)

    # -- full-parameter relative likelihood -----------------------------------

    def full_log_ratio(self, y, theta) -> float:
        return float(min(self.log_density(y, theta) - self.max_log_density(y), 0.0))

    def full_log_ratio_batch(self, batch, theta) -> np.ndarray:
        n = self.batch_size(batch)
        return np.array([self.full_log_ratio(self.batch_item(batch, i), theta)
                         for i in range(n)])
