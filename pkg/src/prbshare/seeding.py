"""Fixed derivation of sub-seeds from one root seed."""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(root: int, *tags) -> int:
    """Deterministic 63-bit seed for ``root`` and a path of string/int tags."""
    words = [int(root) & 0xFFFFFFFFFFFFFFFF]
    for t in tags:
        words.append(zlib.crc32(str(t).encode("utf-8")))
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
