"""MNIST IDX ingestion and run-directory persistence.

IDX format (big endian):
    i32  magic        0x00000803 images / 0x00000801 labels
    i32  item count
    i32  rows, i32 cols   (images only)
    u8[] payload

Files may be plain or gzip-compressed (as distributed).  Loaders reject
malformed headers with distinct error types and never read past the
declared dimensions.
"""

import datetime
import gzip
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "IdxFormatError",
    "BadMagicError",
    "TruncatedFileError",
    "DimensionMismatchError",
    "LabelRangeError",
    "MnistDataset",
    "DatasetSlice",
    "load_idx_images",
    "load_idx_labels",
    "load_mnist",
    "normalize",
    "new_run_dir",
    "write_json",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


class BadMagicError(IdxFormatError):
    pass


class TruncatedFileError(IdxFormatError):
    pass


class DimensionMismatchError(IdxFormatError):
    pass


class LabelRangeError(IdxFormatError):
    pass


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_be32(fh, what, path):
    data = fh.read(4)
    if len(data) != 4:
        raise TruncatedFileError(f"{path}: truncated while reading {what}")
    return struct.unpack(">I", data)[0]


def load_idx_images(path, expect_shape=(28, 28)):
    """N x rows x cols uint8 tensor from an IDX image file."""
    with _open_maybe_gzip(path) as fh:
        magic = _read_be32(fh, "magic", path)
        if magic != IMAGE_MAGIC:
            raise BadMagicError(
                f"{path}: magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x} for images"
            )
        count = _read_be32(fh, "item count", path)
        rows = _read_be32(fh, "row count", path)
        cols = _read_be32(fh, "column count", path)
        if expect_shape is not None and (rows, cols) != expect_shape:
            raise DimensionMismatchError(
                f"{path}: image shape {(rows, cols)}, expected {expect_shape}"
            )
        payload = fh.read(count * rows * cols)
        if len(payload) != count * rows * cols:
            raise TruncatedFileError(
                f"{path}: payload {len(payload)} bytes, expected {count * rows * cols}"
            )
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def load_idx_labels(path, n_classes=10):
    """Length-N uint8 label vector from an IDX label file."""
    with _open_maybe_gzip(path) as fh:
        magic = _read_be32(fh, "magic", path)
        if magic != LABEL_MAGIC:
            raise BadMagicError(
                f"{path}: magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x} for labels"
            )
        count = _read_be32(fh, "item count", path)
        payload = fh.read(count)
        if len(payload) != count:
            raise TruncatedFileError(
                f"{path}: payload {len(payload)} bytes, expected {count}"
            )
    labels = np.frombuffer(payload, dtype=np.uint8)
    if labels.size and labels.max() >= n_classes:
        raise LabelRangeError(
            f"{path}: label {int(labels.max())} outside [0, {n_classes})"
        )
    return labels


@dataclass(frozen=True)
class MnistDataset:
    """Image/label pair for one split, kept as raw bytes."""

    images: np.ndarray
    labels: np.ndarray
    split: str = ""

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise DimensionMismatchError(
                f"{len(self.images)} images vs {len(self.labels)} labels"
            )

    def __len__(self):
        return len(self.labels)

    @property
    def flat_images(self) -> np.ndarray:
        return self.images.reshape(len(self.images), -1)

    def take(self, indices) -> "MnistDataset":
        indices = np.asarray(indices)
        return MnistDataset(
            images=self.images[indices], labels=self.labels[indices], split=self.split
        )


_SPLIT_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def load_mnist(data_dir, split: str) -> MnistDataset:
    """Load one MNIST split from a directory of IDX files (.gz accepted)."""
    if split not in _SPLIT_FILES:
        raise ValueError(f"split must be one of {sorted(_SPLIT_FILES)}")
    data_dir = Path(data_dir)
    paths = []
    for stem in _SPLIT_FILES[split]:
        path = data_dir / stem
        if not path.exists():
            path = data_dir / (stem + ".gz")
        if not path.exists():
            raise FileNotFoundError(f"missing MNIST file {stem}[.gz] under {data_dir}")
        paths.append(path)
    return MnistDataset(
        images=load_idx_images(paths[0]),
        labels=load_idx_labels(paths[1]),
        split=split,
    )


def normalize(images) -> np.ndarray:
    """Byte intensities to float64 in [0, 1] (training input); raw bytes
    stay with the dataset for rate coding."""
    return np.asarray(images, dtype=np.float64) / 255.0


@dataclass(frozen=True)
class DatasetSlice:
    """Deterministic subset: a contiguous range or a seeded sample."""

    count: int = None
    start: int = 0
    shuffle_seed: int = None

    def indices(self, total: int) -> np.ndarray:
        count = total if self.count is None else min(self.count, total)
        if self.start < 0 or self.start + count > total:
            raise IndexError(
                f"slice [{self.start}, {self.start + count}) outside dataset of {total}"
            )
        if self.shuffle_seed is None:
            return np.arange(self.start, self.start + count)
        rng = np.random.default_rng(self.shuffle_seed)
        return rng.permutation(total)[:count]


def new_run_dir(out_dir, tag: str = "run") -> Path:
    """Create runs/<timestamp>-<tag> under out_dir."""
    stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
    base = Path(out_dir) / "runs"
    base.mkdir(parents=True, exist_ok=True)
    path = base / f"{stamp}-{tag}"
    suffix = 0
    while path.exists():
        suffix += 1
        path = base / f"{stamp}-{tag}-{suffix}"
    path.mkdir()
    return path


def write_json(path, payload: dict):
    """Deterministic JSON: sorted keys, newline-terminated."""
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
