"""Binary image datasets: IDX ingestion, binarisation, synthetic digits.

The IDX container is the big-endian binary layout used by the classic
handwritten-digit files: a 4-byte magic (0x00000803 for uint8 images with 3
dimensions, 0x00000801 for uint8 labels with 1 dimension), one big-endian
uint32 per dimension, then the raw payload.  Files are referenced by SHA-256
digest in dataset provenance.
"""

from __future__ import annotations

import gzip
import hashlib
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagicError,
    DimensionOverflowError,
    IdxFormatError,
    TruncatedPayloadError,
)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
DATASET_DIR_ENV = "QTHERMAL_DATASET_DIR"

_MAX_ELEMENTS = 2**31

_SPLIT_FILES = {
    "training": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "evaluation": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def parse_idx(data: bytes) -> np.ndarray:
    """Decode an IDX byte string into a uint8 array.

    Returns a (count, rows, cols) array for the image magic and a (count,)
    array for the label magic.

    Raises:
        BadMagicError: first four bytes match neither supported magic.
        DimensionOverflowError: header dimensions overflow the element cap.
        TruncatedPayloadError: payload shorter than the header promises.
        IdxFormatError: payload longer than the header promises.
    """
    if len(data) < 4:
        raise TruncatedPayloadError(f"container of {len(data)} bytes has no magic")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == IMAGE_MAGIC:
        ndim = 3
    elif magic == LABEL_MAGIC:
        ndim = 1
    else:
        raise BadMagicError(f"unsupported IDX magic 0x{magic:08x}")
    header = 4 + 4 * ndim
    if len(data) < header:
        raise TruncatedPayloadError("container ends inside the dimension header")
    dims = struct.unpack(f">{ndim}I", data[4:header])
    total = 1
    for d in dims:
        total *= d
    if total > _MAX_ELEMENTS:
        raise DimensionOverflowError(f"dimensions {dims} overflow the element cap")
    if len(data) < header + total:
        raise TruncatedPayloadError(
            f"payload holds {len(data) - header} bytes, header promises {total}"
        )
    if len(data) > header + total:
        raise IdxFormatError(f"{len(data) - header - total} trailing bytes")
    return np.frombuffer(data, dtype=np.uint8, offset=header).reshape(dims)


def load_idx(path: str) -> tuple[np.ndarray, str]:
    """Read an IDX file (gzip transparently) and return (array, sha256 hex)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return parse_idx(raw), digest


def binarize(images: np.ndarray, threshold: int = 128) -> np.ndarray:
    """Threshold uint8 pixels: >= threshold becomes target (1), else
    background (0)."""
    if not 1 <= threshold <= 255:
        raise ValueError(f"threshold must lie in [1, 255], got {threshold}")
    return (np.asarray(images) >= threshold).astype(np.uint8)


@dataclass
class BinaryImageDataset:
    """Labelled binary pixel images, flattened row-major."""

    images: np.ndarray
    labels: np.ndarray
    height: int
    width: int
    split: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.images = np.ascontiguousarray(self.images, dtype=np.uint8)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.images.ndim != 2 or self.images.shape[1] != self.height * self.width:
            raise ValueError(
                f"images must be (n, {self.height * self.width}), got {self.images.shape}"
            )
        if self.labels.shape != (self.images.shape[0],):
            raise ValueError("images and labels disagree in length")
        if self.images.size and self.images.max() > 1:
            raise ValueError("images must be binary")

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def pixels(self) -> int:
        return self.height * self.width

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self) else 0

    def subset(self, indices) -> "BinaryImageDataset":
        return BinaryImageDataset(
            images=self.images[indices],
            labels=self.labels[indices],
            height=self.height,
            width=self.width,
            split=self.split,
            provenance=dict(self.provenance),
        )


def dataset_dir(flag_value: str | None = None) -> str | None:
    """Dataset directory from the flag if given, else the environment."""
    return flag_value or os.environ.get(DATASET_DIR_ENV)


def load_idx_split(
    directory: str,
    split: str,
    threshold: int = 128,
    limit: int | None = None,
) -> BinaryImageDataset:
    """Load and binarise one IDX split from a directory.

    Looks for the conventional file names (``train-images-idx3-ubyte`` etc.),
    optionally with a ``.gz`` suffix.
    """
    if split not in _SPLIT_FILES:
        raise ValueError(f"split must be one of {sorted(_SPLIT_FILES)}, got {split!r}")
    arrays, digests = [], {}
    for name in _SPLIT_FILES[split]:
        path = os.path.join(directory, name)
        if not os.path.exists(path) and os.path.exists(path + ".gz"):
            path += ".gz"
        if not os.path.exists(path):
            raise FileNotFoundError(f"dataset file {name} not found under {directory}")
        arr, digest = load_idx(path)
        arrays.append(arr)
        digests[os.path.basename(path)] = digest
    images, labels = arrays
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError("image and label counts disagree")
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    n, h, w = images.shape
    return BinaryImageDataset(
        images=binarize(images, threshold).reshape(n, h * w),
        labels=labels.astype(np.int64),
        height=h,
        width=w,
        split=split,
        provenance={"source": digests, "threshold": threshold, "kind": "idx"},
    )


# 5x7 glyph rows for the synthetic ten-class dataset, one string per class
_GLYPHS = [
    ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    ["01110", "10001", "00001", "00110", "01000", "10000", "11111"],
    ["11110", "00001", "00001", "01110", "00001", "00001", "11110"],
    ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
]


def _glyph_array(cls: int, scale: int = 3) -> np.ndarray:
    rows = _GLYPHS[cls]
    base = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
    return np.kron(base, np.ones((scale, scale), dtype=np.uint8))


def synthetic_digits(
    n: int,
    seed: int,
    split: str = "training",
    height: int = 28,
    width: int = 28,
    max_shift: int = 2,
    speckle: float = 0.01,
) -> BinaryImageDataset:
    """Procedural ten-class binary digit dataset.

    Each image is a scaled glyph placed at a random offset with a small
    fraction of speckle flips; classes cycle so the dataset is balanced.
    Fully determined by (n, seed, split) through counter-based streams.
    """
    split_tag = int.from_bytes(hashlib.sha256(split.encode()).digest()[:4], "big")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, split_tag))))
    scale = max(1, min((height - 2) // 7, (width - 2) // 5))
    glyphs = [_glyph_array(c, scale) for c in range(10)]
    if glyphs[0].shape[0] > height or glyphs[0].shape[1] > width:
        raise ValueError(f"canvas {height}x{width} too small for the glyphs")
    images = np.zeros((n, height, width), dtype=np.uint8)
    labels = np.arange(n, dtype=np.int64) % 10
    gh, gw = glyphs[0].shape
    base_r = (height - gh) // 2
    base_c = (width - gw) // 2
    shifts = rng.integers(-max_shift, max_shift + 1, size=(n, 2))
    for i in range(n):
        r = int(np.clip(base_r + shifts[i, 0], 0, height - gh))
        c = int(np.clip(base_c + shifts[i, 1], 0, width - gw))
        images[i, r : r + gh, c : c + gw] = glyphs[labels[i]]
    flips = rng.random((n, height, width)) < speckle
    images ^= flips.astype(np.uint8)
    return BinaryImageDataset(
        images=images.reshape(n, height * width),
        labels=labels,
        height=height,
        width=width,
        split=split,
        provenance={"kind": "synthetic", "seed": seed, "speckle": speckle},
    )
