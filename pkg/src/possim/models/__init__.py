"""Model catalog and config-driven construction."""

from __future__ import annotations

from ..errors import InvalidParameterError
from .base import ParametricModel, ReferenceLaw
from .counts import Binomial, Multinomial, TwoBinomial, simplex_lattice
from .gamma import DEFAULT_SHAPE_GRID, GammaMean, h_inverse, h_of
from .normal import (
    BehrensFisher,
    FiellerCreasy,
    MeanVectorLength,
    NeymanScott,
    NormalIID,
    NormalKnownVariance,
)

__all__ = [
    "ParametricModel", "ReferenceLaw",
    "Binomial", "Multinomial", "TwoBinomial", "simplex_lattice",
    "GammaMean", "DEFAULT_SHAPE_GRID", "h_inverse", "h_of",
    "NormalIID", "NormalKnownVariance", "FiellerCreasy", "BehrensFisher",
    "MeanVectorLength", "NeymanScott",
    "model_from_config",
]


def model_from_config(cfg: dict) -> ParametricModel:
    """Build a catalog model from a plain dict (e.g. parsed JSON config)."""
    cfg = dict(cfg)
    name = cfg.pop("name", None)
    try:
        if name in ("normal-mean", "normal-sd"):
            return NormalIID(int(cfg["n"]), interest=name.split("-")[1])
        if name == "normal-known-var":
            return NormalKnownVariance(int(cfg["n"]), float(cfg.get("sigma", 1.0)))
        if name == "binomial":
            return Binomial(int(cfg["n"]))
        if name == "multinomial":
            return Multinomial(int(cfg["n"]), int(cfg["k"]))
        if name == "two-binomial":
            return TwoBinomial(int(cfg["n1"]), int(cfg["n2"]))
        if name == "fieller-creasy":
            return FiellerCreasy()
        if name == "behrens-fisher":
            return BehrensFisher(int(cfg["n1"]), int(cfg["n2"]))
        if name == "gamma-mean":
            return GammaMean(int(cfg["n"]))
        if name == "mean-length":
            return MeanVectorLength(int(cfg["n"]))
        if name == "neyman-scott":
            return NeymanScott(int(cfg["n"]))
    except KeyError as missing:
        raise InvalidParameterError(f"model {name!r} needs field {missing}") from None
    raise InvalidParameterError(f"unknown model name {name!r}")
