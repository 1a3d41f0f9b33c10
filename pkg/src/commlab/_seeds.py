"""Seed derivation shared by every randomized routine."""

from __future__ import annotations

import os

import numpy as np

WORKERS_ENV = "COMMLAB_WORKERS"


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit child seed that depends only on ``seed`` and ``keys``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *keys)))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)
