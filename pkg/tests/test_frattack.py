"""Feature reconstruction attack semantics and invariants."""

import numpy as np
import pytest

from conftest import random_image
from coabench.errors import InvalidParams
from coabench.frattack import FRParams, fr_attack, fr_attack_sweep


def _one_px(v):
    return np.array([[[v, v, v]]], dtype=np.uint8)


def test_decided_semantics_l8():
    # leading bit of 200 is 1: untouched under b=1
    assert fr_attack(_one_px(200), FRParams(8, 1))[0, 0, 0] == 200
    # leading bit of 50 is 0: complemented under b=1
    assert fr_attack(_one_px(50), FRParams(8, 1))[0, 0, 0] == 205
    # untouched under b=0
    assert fr_attack(_one_px(50), FRParams(8, 0))[0, 0, 0] == 50


def test_low_bit_variant():
    # L=4: test bit is bit 3, mask flips the low nibble only
    # 0x17 = 0b0001_0111, bit 3 = 0
    assert fr_attack(_one_px(0x17), FRParams(4, 0))[0, 0, 0] == 0x17
    assert fr_attack(_one_px(0x17), FRParams(4, 1))[0, 0, 0] == 0x18  # 0x17 ^ 0x0F


def test_param_validation():
    with pytest.raises(InvalidParams):
        FRParams(0, 1)
    with pytest.raises(InvalidParams):
        FRParams(9, 1)
    with pytest.raises(InvalidParams):
        FRParams(8, 2)


def test_sweep_outputs_are_complements(rng):
    img = random_image(rng, 9, 9)
    b0, b1 = fr_attack_sweep(img, 8)
    assert np.array_equal(b0 ^ 255, b1)


def test_idempotence(rng):
    for b in (0, 1):
        for bits in (3, 8):
            p = FRParams(bits, b)
            img = random_image(rng, 7, 11)
            once = fr_attack(img, p)
            assert np.array_equal(fr_attack(once, p), once)


def test_leading_bit_postcondition(rng):
    for b in (0, 1):
        for bits in (1, 4, 8):
            img = random_image(rng, 6, 6)
            out = fr_attack(img, FRParams(bits, b))
            assert np.all(((out >> (bits - 1)) & 1) == b)
