"""Reproducible random streams.

All randomness in the package is drawn from Philox4x64-10, a counter-based
generator.  A stream is identified by the run seed plus a *path* of
identifiers (``"gap-reference", 17`` for bootstrap replicate 17, say); the
path is hashed into the 128-bit Philox key, so any stream can be
regenerated on its own, independent of how many other streams were used
before it or in which order they were evaluated.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def _path_word(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("stream path parts must be int or str")
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF_FFFFFFFF
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"stream path parts must be int or str, not {type(part).__name__}")


def normalize_seed(seed) -> int:
    """Map any Python int onto the 64-bit seed space."""
    if seed is None:
        raise TypeError("a seed is required; pass an explicit integer")
    return int(seed) & MASK64


def stream_key(seed, *path) -> np.ndarray:
    """The 2-word Philox key for ``(seed, *path)``."""
    # SeedSequence only accepts 32-bit words in spawn_key.
    words = []
    for part in path:
        w = _path_word(part)
        words.extend((w & 0xFFFFFFFF, w >> 32))
    ss = np.random.SeedSequence(entropy=normalize_seed(seed), spawn_key=tuple(words))
    return ss.generate_state(2, dtype=np.uint64)


def substream(seed, *path) -> np.random.Generator:
    """Independent generator for the stream named by ``path`` under ``seed``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *path)))
