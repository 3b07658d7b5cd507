import numpy as np
import pytest

from mckba.cipher import (
    decrypt_block,
    decrypt_blocks,
    decrypt_image,
    encrypt_block,
    encrypt_blocks,
    encrypt_image,
)
from mckba.cli import keygen
from mckba.keystream import SecretKey

from conftest import random_image


def make_key(n=8, key1=0xB5, key2=0x2E, x0=0.5):
    return SecretKey(key1=key1, key2=key2, x0=x0, n=n)


def test_zero_block_xor_mode_is_zero():
    key = make_key()
    assert encrypt_block(0, key, 3) == 0
    assert encrypt_block(0, key, 1) == 0


def test_zero_block_xnor_mode_is_all_ones():
    key = make_key()
    assert encrypt_block(0, key, 2) == 255
    assert encrypt_block(0, key, 0) == 255


def test_zero_subkey_is_identity_in_xor_mode():
    key = SecretKey(key1=5, key2=0, x0=0.5, n=8)
    for j in (0, 1, 77, 200, 255):
        assert encrypt_block(j, key, 1) == j


def test_decrypt_examples():
    key = make_key()
    assert decrypt_block(0, key, 3) == 0
    assert decrypt_block(255, key, 2) == 0


def test_block_round_trip_exhaustive_small():
    key = SecretKey(key1=0b1011, key2=0b0110, x0=0.3, n=4)
    for b in range(4):
        for j in range(16):
            assert decrypt_block(encrypt_block(j, key, b), key, b) == j


def test_block_round_trip_random(rng):
    key = keygen(32, seed=3)
    for _ in range(200):
        j = int(rng.integers(0, 1 << 32))
        b = int(rng.integers(0, 4))
        assert decrypt_block(encrypt_block(j, key, b), key, b) == j


def test_vector_blocks_match_scalar(rng):
    key = keygen(16, seed=4)
    words = rng.integers(0, 1 << 16, 500, dtype=np.uint64)
    selectors = rng.integers(0, 4, 500).astype(np.int8)
    enc = encrypt_blocks(words, key, selectors)
    for k in range(500):
        assert int(enc[k]) == encrypt_block(int(words[k]), key, int(selectors[k]))
    dec = decrypt_blocks(enc, key, selectors)
    assert np.array_equal(dec, words)


def test_key_swap_selector_shift_equivalence(rng):
    # (key1, key2, B) and (key2, key1, (B+2) mod 4) encrypt identically
    key = keygen(12, seed=9)
    swapped = SecretKey(key1=key.key2, key2=key.key1, x0=key.x0, n=key.n)
    for _ in range(300):
        j = int(rng.integers(0, 1 << 12))
        b = int(rng.integers(0, 4))
        assert encrypt_block(j, key, b) == encrypt_block(j, swapped, (b + 2) % 4)


def test_msb_flip_invariance_exhaustive_n8():
    # flipping bit n-1 of the subkey leaves decryption unchanged, both modes
    n, top = 8, 1 << 7
    for a in range(256):
        for x in range(256):
            key = SecretKey(key1=x, key2=(x + 1) % 256, x0=0.5, n=n)
            flipped = SecretKey(key1=x ^ top, key2=(x + 1) % 256, x0=0.5, n=n)
            assert decrypt_block(a, key, 3) == decrypt_block(a, flipped, 3)
            assert decrypt_block(a, key, 2) == decrypt_block(a, flipped, 2)


def test_parity_law_exhaustive_n8():
    # XOR modes preserve the plaintext's parity, XNOR modes flip it
    key_template = [(3, 0), (1, 0), (2, 1), (0, 1)]
    for x in range(256):
        key = SecretKey(key1=x, key2=x ^ 0xFF, x0=0.5, n=8)
        for j in range(0, 256, 17):
            for b, flip in key_template:
                assert (encrypt_block(j, key, b) ^ j) & 1 == flip


def test_all_zero_image_pixels_binary():
    key = keygen(8, seed=2)
    img = np.zeros((8, 8), dtype=np.uint8)
    enc = encrypt_image(img, key)
    assert set(np.unique(enc)) <= {0, 255}


def test_image_round_trip(rng):
    for n in (8, 16, 32):
        key = keygen(n, seed=n)
        img = random_image(rng, 16, 16)
        assert np.array_equal(decrypt_image(encrypt_image(img, key), key), img)


def test_nondivisible_word_size_rejected(rng):
    key = keygen(24, seed=1)
    img = random_image(rng, 5, 5)  # 200 bits, not a multiple of 24
    with pytest.raises(ValueError):
        encrypt_image(img, key)


def test_paper_configuration_cipher_looks_noisy():
    from conftest import photo_like

    key = SecretKey(key1=3835288501, key2=1437224678, x0=319684607 / 2**32, n=32)
    img = photo_like(42, 128, 128)
    enc = encrypt_image(img, key)
    assert enc.shape == img.shape
    assert not np.array_equal(enc, img)
    assert enc.std() > 40  # spread over the full range, unlike the plain image
    assert len(np.unique(enc)) > 200
    assert np.array_equal(decrypt_image(enc, key), img)


def test_custom_generator_round_trip(rng):
    class CountingBits:
        def __init__(self):
            self.state = np.uint64(0x9E3779B97F4A7C15)

        def bits(self, count):
            out = np.empty(count, dtype=np.uint8)
            s = int(self.state)
            for i in range(count):
                s = (s * 6364136223846793005 + 1442695040888963407) % (1 << 64)
                out[i] = (s >> 63) & 1
            self.state = np.uint64(s)
            return out

    key = keygen(16, seed=6)
    img = random_image(rng, 8, 8)
    enc = encrypt_image(img, key, generator=CountingBits())
    dec = decrypt_image(enc, key, generator=CountingBits())
    assert np.array_equal(dec, img)
