"""Per-path random streams.

Each path gets its own Philox4x64-10 counter-based generator whose 128-bit
key is the pair ``(master_seed, path_index)``. Streams are therefore a pure
function of that pair: no state is shared between paths, so the order or
thread in which paths run cannot change what they draw.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def path_key(master_seed: int, path_index: int) -> np.ndarray:
    if path_index < 0:
        raise ValueError(f"path_index must be non-negative, got {path_index}")
    return np.array([master_seed & MASK64, path_index & MASK64], dtype=np.uint64)


def derive_path_rng(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent generator for path ``path_index`` of an ensemble seeded by
    ``master_seed`` (reduced modulo 2**64)."""
    return np.random.Generator(np.random.Philox(key=path_key(master_seed, path_index)))
