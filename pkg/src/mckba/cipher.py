"""MCKBA block and image encryption/decryption.

Each n-bit word J is combined with one of the two subkeys according to the
per-block selector B:

    B=3: (J + key1) ^ key1        B=2: XNOR((J + key1), key1)
    B=1: (J + key2) ^ key2        B=0: XNOR((J + key2), key2)

with addition mod 2**n and XNOR taken within n bits.  Decryption inverts the
XOR/XNOR first and then subtracts mod 2**n.
"""

from __future__ import annotations

import numpy as np

from mckba.block_codec import BlockStream, blocks_to_image, image_to_blocks
from mckba.keystream import LogisticBitGenerator, SecretKey, selector_sequence


def _check_block_args(j: int, n: int, b: int) -> None:
    if not 0 <= j < (1 << n):
        raise ValueError(f"block value must be an {n}-bit word")
    if b not in (0, 1, 2, 3):
        raise ValueError(f"selector must be in {{0,1,2,3}}, got {b}")


def encrypt_block(j: int, key: SecretKey, b: int) -> int:
    """Encrypt one n-bit word under selector b."""
    _check_block_args(j, key.n, b)
    mask = (1 << key.n) - 1
    sub = key.key1 if b >= 2 else key.key2
    out = ((j + sub) & mask) ^ sub
    if b in (0, 2):  # XNOR branch
        out ^= mask
    return out


def decrypt_block(j_enc: int, key: SecretKey, b: int) -> int:
    """Invert encrypt_block."""
    _check_block_args(j_enc, key.n, b)
    mask = (1 << key.n) - 1
    sub = key.key1 if b >= 2 else key.key2
    tmp = j_enc ^ sub
    if b in (0, 2):
        tmp ^= mask
    return (tmp - sub) & mask


def encrypt_blocks(words: np.ndarray, key: SecretKey, selectors: np.ndarray) -> np.ndarray:
    """Vectorised per-block encryption of a word stream."""
    mask = np.uint64((1 << key.n) - 1)
    out = np.empty_like(words)
    for b in range(4):
        pick = selectors == b
        if not np.any(pick):
            continue
        sub = np.uint64(key.key1 if b >= 2 else key.key2)
        enc = ((words[pick] + sub) & mask) ^ sub
        if b in (0, 2):
            enc ^= mask
        out[pick] = enc
    return out


def decrypt_blocks(words: np.ndarray, key: SecretKey, selectors: np.ndarray) -> np.ndarray:
    """Vectorised inverse of encrypt_blocks."""
    mask = np.uint64((1 << key.n) - 1)
    out = np.empty_like(words)
    for b in range(4):
        pick = selectors == b
        if not np.any(pick):
            continue
        sub = np.uint64(key.key1 if b >= 2 else key.key2)
        tmp = words[pick] ^ sub
        if b in (0, 2):
            tmp ^= mask
        out[pick] = (tmp - sub) & mask
    return out


def _selectors_for(key: SecretKey, block_count: int, generator=None) -> np.ndarray:
    gen = generator if generator is not None else LogisticBitGenerator(key.x0)
    return selector_sequence(gen.bits(2 * block_count), block_count)


def _check_divisibility(image: np.ndarray, n: int) -> None:
    height, width = image.shape
    if (8 * width * height) % n:
        raise ValueError(
            f"word size {n} must divide the image bit count 8*{width}*{height}; "
            "the cipher image cannot carry padding bits"
        )


def encrypt_image(image: np.ndarray, key: SecretKey, generator=None) -> np.ndarray:
    """Encrypt a grayscale image; dimensions are preserved."""
    image = np.asarray(image)
    _check_divisibility(image, key.n)
    blocks = image_to_blocks(image, key.n)
    selectors = _selectors_for(key, blocks.block_count, generator)
    enc = encrypt_blocks(blocks.words, key, selectors)
    return blocks_to_image(BlockStream(key.n, enc, blocks.pad_bits, blocks.source_dims))


def decrypt_image(image: np.ndarray, key: SecretKey, generator=None) -> np.ndarray:
    """Invert encrypt_image."""
    image = np.asarray(image)
    _check_divisibility(image, key.n)
    blocks = image_to_blocks(image, key.n)
    selectors = _selectors_for(key, blocks.block_count, generator)
    dec = decrypt_blocks(blocks.words, key, selectors)
    return blocks_to_image(BlockStream(key.n, dec, blocks.pad_bits, blocks.source_dims))
