"""Portable Float Map reader and writer (grayscale "Pf" variant only).

Rows are stored bottom-up. Files are written little-endian (negative scale);
both byte orders are read.
"""
import re
from pathlib import Path
from typing import Dict, Union

import numpy as np
import structlog

from ..exceptions import MalformedHeader, UnexpectedEof
from ..models.depth import BIMODAL_FIELDS, BimodalDepthMap

logger = structlog.get_logger()

PathLike = Union[str, Path]
_TOKEN = re.compile(rb"\S+")


def _header_tokens(data: bytes, count: int):
    """The first `count` whitespace-separated tokens and the offset of the payload."""
    tokens, position = [], 0
    for _ in range(count):
        match = _TOKEN.search(data, position)
        if match is None:
            raise MalformedHeader("PFM header is truncated")
        tokens.append(match.group())
        position = match.end()
    # exactly one whitespace byte separates the header from the payload
    if position >= len(data) or not data[position:position + 1].isspace():
        raise MalformedHeader("PFM header is not terminated")
    return tokens, position + 1


def decode_pfm(data: bytes) -> np.ndarray:
    (magic, width, height, scale), offset = _header_tokens(data, 4)
    if magic == b"PF":
        raise MalformedHeader("color PFM ('PF') is not supported; expected 'Pf'")
    if magic != b"Pf":
        raise MalformedHeader(f"not a PFM file (magic {magic!r})")
    try:
        w, h, s = int(width), int(height), float(scale)
    except ValueError as e:
        raise MalformedHeader(f"unreadable PFM header: {e}") from e
    if w <= 0 or h <= 0 or s == 0.0:
        raise MalformedHeader(f"invalid PFM dimensions {w}x{h} or scale {s}")

    dtype = np.dtype("<f4") if s < 0 else np.dtype(">f4")
    expected = w * h * dtype.itemsize
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise UnexpectedEof(f"PFM payload has {len(payload)} bytes, expected {expected}")
    rows = np.frombuffer(payload, dtype=dtype).reshape(h, w)
    return np.flipud(rows).astype(np.float32)


def encode_pfm(grid: np.ndarray) -> bytes:
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ValueError(f"PFM grids are 2-D, got shape {grid.shape}")
    h, w = grid.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    return header + np.flipud(grid).astype("<f4").tobytes()


def read_pfm(path: PathLike) -> np.ndarray:
    """Reads a Pf file as a float32 grid, top row first."""
    return decode_pfm(Path(path).read_bytes())


def write_pfm(path: PathLike, grid: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pfm(grid))
    logger.debug("Wrote PFM.", path=str(path), shape=np.shape(grid))


def write_bimodal(directory: PathLike, stem: str, bimodal: BimodalDepthMap) -> Dict[str, Path]:
    """One PFM per mixture parameter, named <stem>.<parameter>.pfm."""
    directory = Path(directory)
    paths = {}
    for name in BIMODAL_FIELDS:
        paths[name] = directory / f"{stem}.{name}.pfm"
        write_pfm(paths[name], getattr(bimodal, name))
    return paths


def read_bimodal(directory: PathLike, stem: str) -> BimodalDepthMap:
    directory = Path(directory)
    planes = {name: read_pfm(directory / f"{stem}.{name}.pfm").astype(np.float64) for name in BIMODAL_FIELDS}
    return BimodalDepthMap(**planes)
