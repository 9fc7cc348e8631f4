"""MNIST IDX parsing, binarization, and image naming.

The IDX container is read big-endian: 4-byte magic (0x00000803 for
images, 0x00000801 for labels), big-endian counts/dims, then row-major
unsigned bytes.  Files may be plain or gzip-compressed (.gz).

Images are referred to in two ways:

* ``(digit, ordinal)`` — the ordinal-th image of that digit in file
  order (0-based), resolved through :class:`DatasetIndex`;
* names like ``"0_157"`` — the image at global file position 157, whose
  label is 0.  This is the convention used for the bundled weight-table
  examples; :func:`resolve_name` validates the label.
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, IdxFormatError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
GRID = 28
DEFAULT_THRESHOLD = 150


def _read_bytes(path) -> bytes:
    path = Path(path)
    if not path.exists():
        gz = path.with_name(path.name + ".gz")
        if gz.exists():
            path = gz
        else:
            raise IdxFormatError(f"no such file: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def load_idx_images(path) -> np.ndarray:
    """Load an IDX image file into a (count, 28, 28) uint8 array."""
    data = _read_bytes(path)
    if len(data) < 16:
        raise IdxFormatError(f"{path}: header truncated ({len(data)} bytes)")
    magic = int.from_bytes(data[0:4], "big")
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"{path}: bad image magic 0x{magic:08x} (want 0x{IMAGE_MAGIC:08x})")
    count = int.from_bytes(data[4:8], "big")
    rows = int.from_bytes(data[8:12], "big")
    cols = int.from_bytes(data[12:16], "big")
    if (rows, cols) != (GRID, GRID):
        raise IdxFormatError(f"{path}: image dims {rows}x{cols}, want 28x28")
    want = count * rows * cols
    payload = data[16:]
    if len(payload) != want:
        raise IdxFormatError(
            f"{path}: payload holds {len(payload)} bytes for a declared "
            f"count of {count} ({want} expected)")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    """Load an IDX label file into a (count,) uint8 array of digits."""
    data = _read_bytes(path)
    if len(data) < 8:
        raise IdxFormatError(f"{path}: header truncated ({len(data)} bytes)")
    magic = int.from_bytes(data[0:4], "big")
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"{path}: bad label magic 0x{magic:08x} (want 0x{LABEL_MAGIC:08x})")
    count = int.from_bytes(data[4:8], "big")
    payload = data[8:]
    if len(payload) != count:
        raise IdxFormatError(
            f"{path}: payload holds {len(payload)} labels, header says {count}")
    labels = np.frombuffer(payload, dtype=np.uint8)
    if count and labels.max() > 9:
        raise DatasetError(f"{path}: label {labels.max()} out of range 0-9")
    return labels


@dataclass(frozen=True)
class BinaryImage:
    """Black/white image: ``mask[r, c]`` is True where the pixel is white.

    White pixels are the charged cells of the simulated image plane.
    """

    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (GRID, GRID):
            raise ValueError(f"mask shape {mask.shape}, want (28, 28)")
        object.__setattr__(self, "mask", mask)
        # active flat indices in row-major order; fixes summation order
        object.__setattr__(self, "active_flat",
                           np.flatnonzero(mask.ravel()).astype(np.int64))

    @property
    def active(self) -> set[tuple[int, int]]:
        return {(int(i) // GRID, int(i) % GRID) for i in self.active_flat}

    def count(self) -> int:
        return int(len(self.active_flat))

    def __eq__(self, other):
        return isinstance(other, BinaryImage) and np.array_equal(
            self.mask, other.mask)


def binarize(img: np.ndarray, threshold: int = DEFAULT_THRESHOLD) -> BinaryImage:
    """Threshold a grayscale image: intensity strictly above -> white.

    A pixel exactly at the threshold stays black (uncharged).
    """
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold {threshold} outside [0, 255]")
    img = np.asarray(img)
    if img.shape != (GRID, GRID):
        raise ValueError(f"image shape {img.shape}, want (28, 28)")
    return BinaryImage(img > threshold)


@dataclass
class DatasetIndex:
    """Per-digit lists of dataset positions, in file order."""

    positions: dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "DatasetIndex":
        labels = np.asarray(labels)
        return cls({d: np.flatnonzero(labels == d) for d in range(10)})

    def class_count(self, digit: int) -> int:
        return int(len(self.positions.get(digit, ())))

    def class_counts(self) -> list[int]:
        return [self.class_count(d) for d in range(10)]

    def resolve_class_ordinal(self, digit: int, ordinal: int) -> int:
        """Dataset position of the ordinal-th (0-based) image of ``digit``."""
        if digit not in self.positions:
            raise DatasetError(f"digit {digit} outside 0-9")
        pos = self.positions[digit]
        if not 0 <= ordinal < len(pos):
            raise DatasetError(
                f"ordinal {ordinal} out of range for digit {digit} "
                f"(class has {len(pos)} images)")
        return int(pos[ordinal])


def parse_name(name: str) -> tuple[int, int]:
    """Split a ``"digit_position"`` image name into its two integers."""
    try:
        digit_s, pos_s = name.split("_")
        digit, position = int(digit_s), int(pos_s)
    except ValueError:
        raise DatasetError(f"bad image name {name!r}, want e.g. '0_157'")
    if not 0 <= digit <= 9 or position < 0:
        raise DatasetError(f"bad image name {name!r}")
    return digit, position


def resolve_name(name: str, labels: np.ndarray) -> int:
    """Resolve ``"digit_position"`` to a dataset position, checking the label."""
    digit, position = parse_name(name)
    if position >= len(labels):
        raise DatasetError(f"{name}: position {position} beyond dataset "
                           f"({len(labels)} images)")
    if int(labels[position]) != digit:
        raise DatasetError(
            f"{name}: image at position {position} has label "
            f"{int(labels[position])}, not {digit}")
    return position
