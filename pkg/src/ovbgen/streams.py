"""Reproducible random streams for simulation and resampling.

Streams are counter-based Philox generators keyed by a root seed plus an
integer path, via numpy's ``SeedSequence`` spawn keys.  Any (seed, path)
pair always yields the same stream, independent of how many other streams
exist or which thread or process asks for it, which is what makes the
Monte Carlo drivers deterministic under any worker count.  Normal variates
come from the generator's standard ziggurat transform of the Philox bits.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "derive_seed"]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the sub-stream identified by (seed, *path)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Well-mixed integer seed for the sub-stream identified by (seed, *path).

    Used where an API takes a plain integer seed (e.g. per-rep data and
    bootstrap seeds) rather than a generator.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in path))
    return int(ss.generate_state(1, np.uint64)[0])
