"""Small classic datasets used in the examples, docs, and regression targets.

Everything here is a plain numpy array or dict of floats -- no I/O, no
downloads.  The values are transcribed from the standard published sources
for each study and are frozen: tests pin summary statistics against them.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "rat_survival_times",
    "cavendish_density",
    "lehmann_travel_times",
    "mortality_trial",
    "psychiatric_diagnoses",
    "linkage_counts",
    "linkage_curve",
]


def rat_survival_times() -> np.ndarray:
    """Survival times (days) of 20 rats exposed to radiation.

    A standard illustration for gamma-model inference on the mean
    survival time.
    """
    return np.array(
        [
            152.0, 152.0, 115.0, 109.0, 137.0, 88.0, 94.0, 77.0, 160.0, 165.0,
            125.0, 40.0, 128.0, 123.0, 136.0, 101.0, 62.0, 153.0, 83.0, 69.0,
        ]
    )


def cavendish_density() -> np.ndarray:
    """Cavendish's 29 measurements of the earth's mean density (g/cm^3).

    The value 4.88 in the original table is a known transcription error and
    appears here in its corrected form 5.88.  The modern accepted value of
    the density is about 5.517.
    """
    return np.array(
        [
            5.50, 5.61, 5.88, 5.07, 5.26, 5.55, 5.36, 5.29, 5.58, 5.65,
            5.57, 5.53, 5.62, 5.29, 5.44, 5.34, 5.79, 5.10, 5.27, 5.39,
            5.42, 5.47, 5.63, 5.34, 5.46, 5.30, 5.75, 5.68, 5.85,
        ]
    )


def lehmann_travel_times() -> dict:
    """Summary statistics for two small samples of travel times (minutes).

    Reported as per-group sample sizes, means, and sample variances
    (ddof=1).  The classic textbook interval estimates for this example
    (Hsu--Scheffe and friends) all derive from 2.237 and 0.073 being the
    sample *variances*; secondary sources sometimes mislabel them as
    standard deviations.  The orders-of-magnitude gap between the group
    variances is what makes the mean difference a classic unequal-variance
    (Behrens--Fisher) problem.
    """
    return {
        "n1": 5,
        "mean1": 7.580,
        "var1": 2.237,
        "n2": 11,
        "mean2": 6.136,
        "var2": 0.073,
    }


def mortality_trial(which: int) -> dict:
    """Event counts from two mortality trials comparing control vs treatment.

    ``which`` selects trial 1 (small) or trial 6 (larger).  Returns a dict
    with ``y = (events_control, events_treatment)`` and matching group sizes
    ``n``.  The interest parameter in the examples is the log odds ratio of
    treatment vs control.
    """
    if which == 1:
        return {"y": (1, 2), "n": (43, 39)}
    if which == 6:
        return {"y": (4, 11), "n": (146, 154)}
    raise ValueError("only trials 1 and 6 are bundled")


def psychiatric_diagnoses() -> np.ndarray:
    """Counts of 220 psychiatric patients classified into four diagnoses."""
    return np.array([91, 49, 37, 43])


def linkage_counts() -> np.ndarray:
    """Genetic linkage phenotype counts (n = 39) over four categories."""
    return np.array([25, 3, 4, 7])


def linkage_curve(w):
    """Cell-probability curve for the linkage model.

    Maps a recombination parameter ``w`` in [0, 1] to the four multinomial
    cell probabilities

        (1/2 + w/4, (1 - w)/4, (1 - w)/4, w/4).

    Accepts scalars or arrays; vectorized output has shape ``w.shape + (4,)``.
    """
    w = np.asarray(w, dtype=float)
    out = np.stack(
        [0.5 + w / 4.0, (1.0 - w) / 4.0, (1.0 - w) / 4.0, w / 4.0],
        axis=-1,
    )
    return out
