"""Deterministic derivation of independent random streams.

Every random draw in a run comes from a stream addressed by a fixed tuple
``(seed, domain, *path)``:

* ``DOMAIN_INIT`` — population initialization (no path),
* ``DOMAIN_TURNOVER`` — one generation's clustering and variation
  (path = generation index),
* ``DOMAIN_EVAL`` — one fitness evaluation
  (path = generation index, individual index).

The tuple is fed to :class:`numpy.random.SeedSequence`, which hashes it
into an independent stream, so results never depend on evaluation order,
worker count, or scheduling.
"""

from __future__ import annotations

import numpy as np

DOMAIN_INIT = 0
DOMAIN_TURNOVER = 1
DOMAIN_EVAL = 2


def rng_for(seed: int, domain: int, *path: int) -> np.random.Generator:
    """Return the generator for one (seed, domain, *path) address."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    entropy = (int(seed), int(domain)) + tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))
