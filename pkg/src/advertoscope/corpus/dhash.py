"""Difference-hash (dHash) perceptual image fingerprints.

dHash is gradient-based: resize to 9x8, then compare each pixel to its right
neighbour, yielding 64 bits. Comparisons are relative, so the hash is
invariant to uniform brightness shifts. Small Hamming distance between two
hashes indicates near-identical images.

The numeric core takes raw grayscale matrices (and PGM files); PNG/JPEG
decoding lives in an optional Pillow-backed adapter to keep this module
dependency-light.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

ALGORITHM_ID = "dhash-9x8"
DEFAULT_THRESHOLD = 10


@dataclass(frozen=True)
class ImageHash:
    bits: int  # 64-bit value; bit (row*8+col) set iff p[row,col] > p[row,col+1]
    algorithm: str = ALGORITHM_ID
    source: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.bits < (1 << 64):
            raise ValueError("hash must fit in 64 bits")


def bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Plain bilinear sampling at output-pixel centres, edge-clamped."""
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("pixels must be a non-empty 2-D grayscale matrix")
    in_h, in_w = img.shape
    ys = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1.0 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1.0 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1.0 - wy) + bot * wy


def dhash(pixels, source: str = "") -> ImageHash:
    """64-bit difference hash of a grayscale matrix (any size >= 1x1)."""
    grid = bilinear_resize(pixels, 8, 9)
    bits = 0
    for row in range(8):
        for col in range(8):
            if grid[row, col] > grid[row, col + 1]:
                bits |= 1 << (row * 8 + col)
    return ImageHash(bits=bits, source=source)


def hamming_distance(a: ImageHash, b: ImageHash) -> int:
    return bin(a.bits ^ b.bits).count("1")


def hamming_near_duplicates(
    hashes: list[ImageHash], threshold: int = DEFAULT_THRESHOLD
) -> list[tuple[int, int, int]]:
    """All unordered index pairs within the Hamming threshold, i < j."""
    if not 0 <= threshold <= 64:
        raise ValueError("threshold must be in [0, 64]")
    pairs = []
    for i in range(len(hashes)):
        for j in range(i + 1, len(hashes)):
            d = hamming_distance(hashes[i], hashes[j])
            if d <= threshold:
                pairs.append((i, j, d))
    return pairs


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a P2 (ascii) or P5 (binary) PGM file into a float matrix."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    i = 0
    # Header: magic, width, height, maxval; '#' comments run to end of line.
    while len(tokens) < 4 and i < len(data):
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 4 or tokens[0] not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if width < 1 or height < 1 or maxval < 1:
        raise ValueError(f"{path}: bad PGM dimensions")
    if tokens[0] == b"P5":
        i += 1  # single whitespace byte after maxval
        bytes_per = 2 if maxval > 255 else 1
        raw = data[i:i + width * height * bytes_per]
        dtype = ">u2" if bytes_per == 2 else np.uint8
        arr = np.frombuffer(raw, dtype=dtype, count=width * height)
    else:
        values = data[i:].split()
        arr = np.array([int(v) for v in values[: width * height]])
    if arr.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return arr.reshape(height, width).astype(np.float64)


def load_grayscale(path: str | Path) -> np.ndarray:
    """Load PGM directly, or PNG/JPEG via the optional Pillow adapter."""
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return read_pgm(p)
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - environment-dependent
        raise RuntimeError(
            f"decoding {p.suffix} needs the optional 'images' extra (Pillow)"
        ) from exc
    with Image.open(p) as im:
        return np.asarray(im.convert("L"), dtype=np.float64)
