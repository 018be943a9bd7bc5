import numpy as np
import pytest

from _naturaldata import natural_images, natural_images_small


@pytest.fixture(scope="session")
def suite96():
    """120 natural 96x96 crops (blockwise-compatible dimensions)."""
    return natural_images(120, 96)


@pytest.fixture(scope="session")
def suite32():
    """260 natural 32x32 images downsampled from 96x96 crops."""
    return natural_images_small(260, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_image(rng, height, width):
    return rng.integers(0, 256, (height, width, 3), dtype=np.uint8)
