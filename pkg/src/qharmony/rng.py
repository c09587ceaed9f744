"""Counter-based, splittable random streams.

A stream is keyed by ``(seed, *stream_id)``; each component is an int or a
string (hashed with CRC-32 so the key is stable across processes and
platforms).  The bit generator is Philox, so a stream's output is a pure
function of its key.
"""
from __future__ import annotations

import logging
import os
import zlib

import numpy as np

log = logging.getLogger(__name__)

SEED_ENV = "QHARMONY_SEED"


def _component(x) -> int:
    if isinstance(x, str):
        return zlib.crc32(x.encode("utf-8"))
    x = int(x)
    if x < 0:
        raise ValueError("stream components must be non-negative")
    return x


def make_rng(seed: int, *stream) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_component(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def fresh_seed() -> int:
    """An entropy-drawn seed, logged so the run can be replayed."""
    seed = int(np.random.SeedSequence().entropy % (1 << 63))
    log.info("drew unseeded trial seed %d", seed)
    return seed


def resolve_seed(seed: int | None) -> int:
    """Explicit seed, else $QHARMONY_SEED, else fresh entropy."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return fresh_seed()
