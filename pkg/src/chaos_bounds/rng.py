"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox generator whose
key is derived by hashing ``(seed, *tags)``.  Streams are therefore
independent of call order and of how work is split across threads: the same
``(seed, tags)`` always yields the same draws, which is what makes parallel
runs bit-reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "derive_seed"]


def _digest(seed: int, tags: tuple) -> bytes:
    text = repr(int(seed)) + "".join("|" + str(t) for t in tags)
    return hashlib.sha256(text.encode("utf-8")).digest()


def stream(seed: int, *tags) -> np.random.Generator:
    """Return a Generator keyed by ``(seed, *tags)``."""
    key = int.from_bytes(_digest(seed, tags)[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *tags) -> int:
    """Collapse ``(seed, *tags)`` into a new 63-bit seed."""
    return int.from_bytes(_digest(seed, tags)[:8], "little") >> 1
