"""Deterministic random-stream derivation.

Every Monte Carlo routine takes an integer seed and derives independent
substreams from (seed, key) pairs, so results are reproducible regardless
of evaluation order or thread count.
"""

import hashlib

import numpy as np

_MASK = (1 << 63) - 1


def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf8")).digest()
        return int.from_bytes(digest[:8], "big") & _MASK
    raise TypeError(f"substream key parts must be int or str, got {type(part)!r}")


def substream(seed: int, *key) -> np.random.Generator:
    """Generator for a named work item; distinct keys give independent streams."""
    spawn_key = tuple(_key_part(p) for p in key)
    seq = np.random.SeedSequence(entropy=int(seed) & _MASK, spawn_key=spawn_key)
    return np.random.default_rng(seq)
