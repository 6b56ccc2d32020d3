"""Deterministic random-number streams.

Every stochastic stage derives its generator from a root seed plus an
integer path, so results do not depend on evaluation order: point k of a
sweep always sees the stream ``derive_rng(root_seed, k)`` no matter how
the points are scheduled.

Splitting rule: ``SeedSequence(entropy=root_seed, spawn_key=path)``.
"""

from __future__ import annotations

import numpy as np


def derive_rng(root_seed: int, *path: int) -> np.random.Generator:
    """Child generator for the given root seed and integer path.

    Identical (root_seed, path) pairs always produce identical streams;
    distinct paths give statistically independent streams.
    """
    seq = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(seq)


def child_seed(root_seed: int, *path: int) -> int:
    """Deterministic integer seed for the given path.

    For stages that take a root seed rather than a generator (e.g. one
    noise draw per sweep point), pass ``child_seed(seed, point_index)``.
    """
    return int(derive_rng(root_seed, *path).integers(2**63))
