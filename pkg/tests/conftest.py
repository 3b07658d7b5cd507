import numpy as np
import pytest

from mckba.cli import keygen


def random_image(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    return rng.integers(0, 256, size=(height, width), dtype=np.uint8)


def photo_like(seed: int, height: int = 512, width: int = 512) -> np.ndarray:
    """Photographic-content substitute: smooth blobs with fine texture everywhere."""
    rng = np.random.default_rng(seed)
    coarse = rng.normal(size=(height // 8 + 2, width // 8 + 2))
    blown = np.kron(coarse, np.ones((8, 8)))[:height, :width]
    textured = blown + rng.normal(scale=0.35, size=(height, width))
    span = textured.max() - textured.min()
    normed = (textured - textured.min()) / span
    return (10 + normed * 235).astype(np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def key32():
    return keygen(32, seed=7)
