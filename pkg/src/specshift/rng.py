"""Deterministic, platform-portable random streams.

Every stochastic component draws from a counter-based Philox generator
keyed by ``(seed, stream)``. Philox output is identical across platforms
and numpy releases for a fixed key, which is what makes masks, synthetic
datasets, and training runs reproducible from their recorded seeds.

Stream ids partition one user-facing seed into independent substreams
(e.g. one per mask channel, one for shuffling, one for augmentation)
without any risk of overlap.
"""

import numpy as np

# Reserved stream ids. Channel substreams use STREAM_MASK_CHANNEL + c.
STREAM_MASK_CHANNEL = 0x100
STREAM_SYNTH = 0x200
STREAM_INIT = 0x300
STREAM_SHUFFLE = 0x400
STREAM_AUGMENT = 0x500


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Generator for substream `stream` of `seed`. Same args, same bits."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    key = np.array([seed % (1 << 64), stream % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
