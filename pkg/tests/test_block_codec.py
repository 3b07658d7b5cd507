import numpy as np
import pytest

from mckba.block_codec import BlockStream, blocks_to_image, image_to_blocks, read_pgm, write_pgm

from conftest import random_image


def test_single_zero_pixel():
    blocks = image_to_blocks(np.array([[0]], dtype=np.uint8), 8)
    assert list(blocks.words) == [0]
    assert blocks.pad_bits == 0


def test_single_full_pixel():
    blocks = image_to_blocks(np.array([[255]], dtype=np.uint8), 8)
    assert list(blocks.words) == [255]


def test_two_pixel_packing():
    # derived bit by bit: pixel bits are taken LSB-first, word bit j has weight 2^j,
    # so pixels (0x12, 0x34) at n=16 give 0x12 | (0x34 << 8)
    blocks = image_to_blocks(np.array([[0x12, 0x34]], dtype=np.uint8), 16)
    assert list(blocks.words) == [0x3412]


def test_unpacking_inverse_of_example():
    blocks = BlockStream(n=16, words=np.array([0x3412], dtype=np.uint64), pad_bits=0, source_dims=(2, 1))
    assert blocks_to_image(blocks).tolist() == [[0x12, 0x34]]

    zero = BlockStream(n=8, words=np.array([0], dtype=np.uint64), pad_bits=0, source_dims=(1, 1))
    assert blocks_to_image(zero).tolist() == [[0]]


@pytest.mark.parametrize("n", [2, 3, 5, 7, 8, 11, 16, 24, 32, 63, 64])
def test_round_trip_all_word_sizes(n, rng):
    img = random_image(rng, 5, 7)
    blocks = image_to_blocks(img, n)
    total_bits = 8 * 5 * 7
    assert blocks.block_count == -(-total_bits // n)
    assert 0 <= blocks.pad_bits < n
    assert blocks.pad_bits == n * blocks.block_count - total_bits
    if n < 64:
        assert np.all(blocks.words < np.uint64(1 << n))
    assert np.array_equal(blocks_to_image(blocks), img)


def test_n8_words_equal_pixels(rng):
    img = random_image(rng, 4, 4)
    blocks = image_to_blocks(img, 8)
    assert np.array_equal(blocks.words.astype(np.uint8), img.reshape(-1))


def test_raster_order_row_major():
    img = np.array([[1, 2], [3, 4]], dtype=np.uint8)
    assert list(image_to_blocks(img, 8).words) == [1, 2, 3, 4]


def test_zero_sized_image_rejected():
    with pytest.raises(ValueError):
        image_to_blocks(np.zeros((0, 4), dtype=np.uint8), 8)


def test_bad_word_size_rejected():
    img = np.zeros((2, 2), dtype=np.uint8)
    for n in (0, 1, 65):
        with pytest.raises(ValueError):
            image_to_blocks(img, n)


def test_inconsistent_stream_rejected():
    good = image_to_blocks(np.zeros((2, 2), dtype=np.uint8), 5)
    bad_pad = BlockStream(good.n, good.words, good.pad_bits + 1, good.source_dims)
    with pytest.raises(ValueError):
        blocks_to_image(bad_pad)
    bad_count = BlockStream(good.n, good.words[:-1], good.pad_bits, good.source_dims)
    with pytest.raises(ValueError):
        blocks_to_image(bad_count)
    big = good.words.copy()
    big[0] = 1 << 5
    with pytest.raises(ValueError):
        blocks_to_image(BlockStream(good.n, big, good.pad_bits, good.source_dims))


def test_pgm_round_trip(tmp_path, rng):
    img = random_image(rng, 9, 13)
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    assert np.array_equal(read_pgm(path), img)


def test_pgm_header_with_comments(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n2 1\n# another\n255\n\x07\x09")
    assert read_pgm(path).tolist() == [[7, 9]]


def test_pgm_rejects_other_formats(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P2\n2 1\n255\n1 2\n")
    with pytest.raises(ValueError):
        read_pgm(path)
    path.write_bytes(b"P5\n2 1\n65535\n\x00\x00\x00\x00")
    with pytest.raises(ValueError):
        read_pgm(path)
    path.write_bytes(b"P5\n4 4\n255\nxx")
    with pytest.raises(ValueError):
        read_pgm(path)
