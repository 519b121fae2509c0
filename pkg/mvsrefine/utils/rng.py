"""Counter-based random streams.

Every random number in the pipeline is a pure function of
(seed, level, round, y, x, slot), so results never depend on how work is
scheduled across threads.
"""
import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def stream_key(seed: int, level: int, round_index: int) -> int:
    """Generates a stable 64-bit stream key from a (seed, level, round) triple using SHA-256."""
    digest = hashlib.sha256(f"{seed}:{level}:{round_index}".encode()).digest()
    return int.from_bytes(digest[:8], byteorder="big")


def _splitmix64(values: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = values + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def pixel_uniforms(key: int, height: int, width: int, slots: int = 1) -> np.ndarray:
    """Uniform samples in [0, 1) of shape (height, width, slots) for one stream key."""
    ys, xs, ss = np.indices((height, width, slots), dtype=np.uint64)
    h = _splitmix64(np.uint64(key) ^ ys)
    h = _splitmix64(h ^ xs)
    h = _splitmix64(h ^ ss)
    return _unit_interval(h)


def lattice_uniforms(key: int, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    """Uniform samples in [0, 1) at integer lattice points; negative coordinates are fine."""
    ux = np.ascontiguousarray(ix, dtype=np.int64).view(np.uint64)
    uy = np.ascontiguousarray(iy, dtype=np.int64).view(np.uint64)
    h = _splitmix64(np.uint64(key) ^ uy)
    return _unit_interval(_splitmix64(h ^ ux))


def _unit_interval(h: np.ndarray) -> np.ndarray:
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
