"""Grayscale image <-> n-bit word stream conversion, plus binary PGM I/O.

The cipher operates on words built from the image's bit stream: pixels are
taken in raster order (row-major, left to right, top to bottom), each pixel
contributes its 8 bits LSB-first, and consecutive groups of n bits form one
word with bit j at weight 2**j.  When n does not divide the total bit count
the tail is padded with zero bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_WORD_BITS = 2
MAX_WORD_BITS = 64  # keep every word in a native 64-bit lane


@dataclass
class BlockStream:
    """An image rendered as a sequence of n-bit words."""

    n: int
    words: np.ndarray  # uint64, every entry < 2**n
    pad_bits: int
    source_dims: tuple[int, int]  # (width, height)

    @property
    def block_count(self) -> int:
        return len(self.words)

    def validate(self) -> None:
        w, h = self.source_dims
        total_bits = 8 * w * h
        if not MIN_WORD_BITS <= self.n <= MAX_WORD_BITS:
            raise ValueError(f"word size must be in [{MIN_WORD_BITS}, {MAX_WORD_BITS}], got {self.n}")
        if w <= 0 or h <= 0:
            raise ValueError(f"invalid source dimensions {self.source_dims}")
        expected = -(-total_bits // self.n)
        if len(self.words) != expected:
            raise ValueError(f"expected {expected} words for {w}x{h} at n={self.n}, got {len(self.words)}")
        if self.pad_bits != self.n * len(self.words) - total_bits:
            raise ValueError(f"pad_bits={self.pad_bits} inconsistent with dimensions")
        if self.n < 64 and np.any(self.words >> np.uint64(self.n)):
            raise ValueError(f"word exceeds {self.n} bits")


def _word_weights(n: int) -> np.ndarray:
    return np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))


def image_to_blocks(image: np.ndarray, n: int) -> BlockStream:
    """Pack an 8-bit grayscale image into n-bit words (zero-padded at the tail)."""
    image = np.asarray(image)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if image.dtype != np.uint8:
        if np.any((image < 0) | (image > 255)):
            raise ValueError("pixel values must lie in [0, 255]")
        image = image.astype(np.uint8)
    if not MIN_WORD_BITS <= n <= MAX_WORD_BITS:
        raise ValueError(f"word size must be in [{MIN_WORD_BITS}, {MAX_WORD_BITS}], got {n}")

    height, width = image.shape
    bits = np.unpackbits(image.reshape(-1), bitorder="little")
    pad_bits = (-len(bits)) % n
    if pad_bits:
        bits = np.concatenate([bits, np.zeros(pad_bits, dtype=np.uint8)])
    groups = bits.reshape(-1, n).astype(np.uint64)
    words = (groups * _word_weights(n)).sum(axis=1, dtype=np.uint64)
    return BlockStream(n=n, words=words, pad_bits=pad_bits, source_dims=(width, height))


def blocks_to_image(blocks: BlockStream) -> np.ndarray:
    """Unpack a word stream back into the original image; padding bits are discarded."""
    blocks.validate()
    width, height = blocks.source_dims
    total_bits = 8 * width * height
    n = blocks.n
    shifts = np.arange(n, dtype=np.uint64)
    bits = ((blocks.words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    bits = bits.reshape(-1)[:total_bits]
    pixels = np.packbits(bits, bitorder="little")
    return pixels.reshape(height, width)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit grayscale PGM file."""
    with open(path, "rb") as fh:
        data = fh.read()

    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ValueError(f"{path}: unsupported format {magic!r}, expected binary PGM (P5)")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    if width <= 0 or height <= 0:
        raise ValueError(f"{path}: invalid dimensions {width}x{height}")
    pos += 1  # single whitespace byte after the header
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: raster truncated ({len(raster)} of {width * height} bytes)")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit grayscale image as binary (P5) PGM."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(image.tobytes())
