"""Deterministic per-sample random sources.

Every stochastic step (mask sampling, image simulation, evaluation
resampling) derives its generator from a stable key, so results do not
depend on iteration order or worker scheduling.
"""

from __future__ import annotations

import numpy as np


def rng_for(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in keys]))
