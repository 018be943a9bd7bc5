"""Images, lossless PPM I/O, planar binary dataset records, splitting.

An image is a NumPy uint8 array of shape (height, width, 3) in RGB order;
uint8 enforces the [0,255] component range by construction.  Images are
treated as immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, EmptyDataset, Truncated, UnsupportedMaxval
from .prng import KeyStream

STL10_SIZE = 96
STL10_RECORD_BYTES = 3 * STL10_SIZE * STL10_SIZE


def check_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8:
        raise TypeError("image must be a uint8 ndarray")
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must have shape (V>=1, U>=1, 3), got {img.shape}")
    return img


def _read_header_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comment lines, then read one token
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise Truncated("PPM header ended before all fields were read")
    return data[start:pos], pos


def load_ppm(data: bytes) -> np.ndarray:
    """Parse a binary PPM (P6) file into an image array."""
    if data[:2] != b"P6":
        raise BadMagic(f"expected P6 magic, got {data[:2]!r}")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_header_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise Truncated(f"non-numeric PPM header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedMaxval(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise Truncated(f"bad dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos : pos + 3 * width * height]
    if len(payload) < 3 * width * height:
        raise Truncated(
            f"payload has {len(payload)} bytes, needs {3 * width * height}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def save_ppm(img: np.ndarray) -> bytes:
    """Canonical P6 encoding; exact inverse of load_ppm."""
    check_image(img)
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def load_stl10(data: bytes, count: int) -> list[np.ndarray]:
    """Read `count` 96x96 RGB images from a planar binary file.

    Each record is 27648 bytes: the full red plane, then green, then blue,
    each plane stored column-major (byte x*96+y holds column x, row y).
    """
    if len(data) < count * STL10_RECORD_BYTES:
        raise Truncated(
            f"need {count * STL10_RECORD_BYTES} bytes for {count} records, "
            f"got {len(data)}"
        )
    raw = np.frombuffer(data, dtype=np.uint8, count=count * STL10_RECORD_BYTES)
    planes = raw.reshape(count, 3, STL10_SIZE, STL10_SIZE)  # (n, ch, x, y)
    return [np.ascontiguousarray(planes[i].transpose(2, 1, 0)) for i in range(count)]


def save_stl10(images: list[np.ndarray]) -> bytes:
    """Inverse of load_stl10; used to build loader fixtures."""
    out = bytearray()
    for img in images:
        check_image(img)
        if img.shape[:2] != (STL10_SIZE, STL10_SIZE):
            raise ValueError(f"records must be 96x96, got {img.shape}")
        out += np.ascontiguousarray(img.transpose(2, 1, 0)).tobytes()
    return bytes(out)


@dataclass
class Dataset:
    """Ordered list of same-sized images with a train/test role tag each.

    Ordering is stable so the i-th image can be addressed by index for
    per-image key derivation.  `indices` records each image's position in
    the dataset it was drawn from, so derived subsets (halves, encrypted
    copies) stay traceable to their origin.
    """

    images: list[np.ndarray]
    roles: list[str] = field(default_factory=list)
    indices: list[int] | None = None

    def __post_init__(self):
        if not self.roles:
            self.roles = ["train"] * len(self.images)
        if len(self.roles) != len(self.images):
            raise ValueError("one role per image required")
        if self.indices is not None and len(self.indices) != len(self.images):
            raise ValueError("one index per image required")
        for img in self.images:
            check_image(img)
        dims = {img.shape for img in self.images}
        if len(dims) > 1:
            raise ValueError(f"images must share dimensions, got {sorted(dims)}")

    @classmethod
    def of(cls, images, role="train"):
        return cls(list(images), [role] * len(images))

    def __len__(self):
        return len(self.images)

    def __getitem__(self, i):
        return self.images[i]

    def origin_indices(self) -> list[int]:
        return list(range(len(self.images))) if self.indices is None else list(self.indices)


def split_halves(train: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint halves of a dataset under a keyed index permutation.

    Odd sizes give the extra image to the first half.  Original ordering
    is kept within each half.
    """
    n = len(train)
    if n < 2:
        raise EmptyDataset(f"need at least 2 images to split, got {n}")
    perm = KeyStream(seed).permutation(n)
    n1 = (n + 1) // 2
    origin = train.origin_indices()

    def take(selected):
        sel = sorted(selected)
        return Dataset(
            [train.images[i] for i in sel],
            [train.roles[i] for i in sel],
            [origin[i] for i in sel],
        )

    return take(perm[:n1]), take(perm[n1:])
