"""PPM codec, planar binary loader, dataset splitting."""

import hashlib

import numpy as np
import pytest

from _naturaldata import natural_images
from conftest import random_image
from coabench.errors import BadMagic, EmptyDataset, Truncated, UnsupportedMaxval
from coabench.images import (
    Dataset,
    load_ppm,
    load_stl10,
    save_ppm,
    save_stl10,
    split_halves,
)

# pins the deterministic stand-in corpus written in the planar binary layout
STL10_FIXTURE_SHA256 = "d6bd054c0b0a148fd79600f8fdce20fa74af4f540c72407eb35546d0b6b05bb4"


def test_load_minimal_ppm():
    img = load_ppm(b"P6 1 1 255 " + bytes([0, 0, 0]))
    assert img.shape == (1, 1, 3)
    assert img.tolist() == [[[0, 0, 0]]]


def test_save_white_pixel():
    img = np.full((1, 1, 3), 255, dtype=np.uint8)
    assert save_ppm(img) == b"P6\n1 1\n255\n" + bytes([255, 255, 255])


def test_save_row_major_payload():
    img = np.array([[[1, 2, 3], [4, 5, 6]]], dtype=np.uint8)  # 2x1
    data = save_ppm(img)
    assert data.endswith(bytes([1, 2, 3, 4, 5, 6]))
    assert data.startswith(b"P6\n2 1\n255\n")


def test_round_trip_random_images(rng):
    for _ in range(25):
        img = random_image(rng, int(rng.integers(1, 40)), int(rng.integers(1, 40)))
        assert np.array_equal(load_ppm(save_ppm(img)), img)


def test_canonical_file_round_trips_bytes(rng):
    img = random_image(rng, 9, 13)
    data = save_ppm(img)
    assert save_ppm(load_ppm(data)) == data


def test_ppm_comments_accepted():
    img = load_ppm(b"P6 # comment\n2 1 # another\n255\n" + bytes(6))
    assert img.shape == (1, 2, 3)


def test_ppm_errors():
    with pytest.raises(BadMagic):
        load_ppm(b"P5 1 1 255 \x00")
    with pytest.raises(UnsupportedMaxval):
        load_ppm(b"P6 1 1 65535 " + bytes(6))
    with pytest.raises(Truncated):
        load_ppm(b"P6 2 2 255 " + bytes(11))


def test_stl10_zero_record():
    imgs = load_stl10(bytes(27648), 1)
    assert len(imgs) == 1
    assert imgs[0].shape == (96, 96, 3)
    assert not imgs[0].any()


def test_stl10_plane_separation():
    rec = bytes([255] * 9216) + bytes(9216 * 2)
    img = load_stl10(rec, 1)[0]
    assert np.all(img[:, :, 0] == 255)
    assert not img[:, :, 1:].any()


def test_stl10_column_major():
    # byte x*96+y holds column x, row y of the plane
    plane = bytearray(9216)
    plane[5 * 96 + 2] = 77  # column 5, row 2
    img = load_stl10(bytes(plane) + bytes(9216 * 2), 1)[0]
    assert img[2, 5, 0] == 77
    assert img.sum() == 77


def test_stl10_truncated():
    with pytest.raises(Truncated):
        load_stl10(bytes(27647), 1)


def test_stl10_round_trip_and_fixture_checksum():
    imgs = natural_images(4, 96)
    data = save_stl10(imgs)
    assert hashlib.sha256(data).hexdigest() == STL10_FIXTURE_SHA256
    back = load_stl10(data, 4)
    for a, b in zip(imgs, back):
        assert np.array_equal(a, b)


def test_stl10_loader_determinism():
    imgs = natural_images(2, 96)
    data = save_stl10(imgs)
    first = load_stl10(data, 2)
    second = load_stl10(data, 2)
    for a, b in zip(first, second):
        assert np.array_equal(a, b)


def _dataset(rng, n):
    return Dataset.of([random_image(rng, 8, 8) for _ in range(n)])


def test_split_even_odd(rng):
    t1, t2 = split_halves(_dataset(rng, 4), seed=1)
    assert len(t1) == len(t2) == 2
    t1, t2 = split_halves(_dataset(rng, 5), seed=1)
    assert (len(t1), len(t2)) == (3, 2)


def test_split_deterministic(rng):
    ds = _dataset(rng, 9)
    a1, a2 = split_halves(ds, seed=77)
    b1, b2 = split_halves(ds, seed=77)
    assert a1.indices == b1.indices and a2.indices == b2.indices


def test_split_partition_many_seeds(rng):
    ds = _dataset(rng, 7)
    for seed in range(1000):
        t1, t2 = split_halves(ds, seed)
        got = sorted(t1.indices + t2.indices)
        assert got == list(range(7))
        assert not set(t1.indices) & set(t2.indices)


def test_split_too_small(rng):
    with pytest.raises(EmptyDataset):
        split_halves(_dataset(rng, 1), seed=0)


def test_dataset_rejects_mixed_dims(rng):
    with pytest.raises(ValueError):
        Dataset.of([random_image(rng, 8, 8), random_image(rng, 8, 9)])
