"""Shared fixtures: dataset location, synthetic IDX builders, image factories."""

import os
from pathlib import Path

import numpy as np
import pytest

from fieldnet import BinaryImage, load_idx_images, load_idx_labels

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.environ.get("FIELDNET_MNIST_DIR", REPO_ROOT / "data"))
IMAGES_FILE = DATA_DIR / "t10k-images-idx3-ubyte.gz"
LABELS_FILE = DATA_DIR / "t10k-labels-idx1-ubyte.gz"


def require_dataset():
    if not IMAGES_FILE.exists() or not LABELS_FILE.exists():
        pytest.skip(
            "MNIST test files not found; run scripts/fetch_mnist.py or set "
            "FIELDNET_MNIST_DIR")


@pytest.fixture(scope="session")
def mnist_paths():
    require_dataset()
    return IMAGES_FILE, LABELS_FILE


@pytest.fixture(scope="session")
def mnist(mnist_paths):
    images = load_idx_images(mnist_paths[0])
    labels = load_idx_labels(mnist_paths[1])
    return images, labels


def idx_image_bytes(images: np.ndarray, magic: int = 0x00000803,
                    count: int | None = None, rows: int = 28,
                    cols: int = 28) -> bytes:
    """Raw IDX image container (count/rows/cols overridable for negatives)."""
    images = np.asarray(images, dtype=np.uint8)
    if count is None:
        count = len(images)
    return (magic.to_bytes(4, "big") + count.to_bytes(4, "big")
            + rows.to_bytes(4, "big") + cols.to_bytes(4, "big")
            + images.tobytes())


def idx_label_bytes(labels, magic: int = 0x00000801,
                    count: int | None = None) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    if count is None:
        count = len(labels)
    return magic.to_bytes(4, "big") + count.to_bytes(4, "big") + labels.tobytes()


def random_binary_image(rng: np.random.Generator, n_active: int = 100) -> BinaryImage:
    mask = np.zeros(784, dtype=bool)
    mask[rng.choice(784, size=n_active, replace=False)] = True
    return BinaryImage(mask.reshape(28, 28))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def synthetic_digit_bank():
    """Forty 28x28 grayscale images, four distinctive shapes per digit.

    Bright (200) blocky glyph patterns, distinct per class and shifted
    per variant, for CLI and harness tests needing a tiny labelled
    dataset in IDX form.
    """
    rng = np.random.default_rng(7)
    images = np.zeros((40, 28, 28), dtype=np.uint8)
    labels = np.zeros(40, dtype=np.uint8)
    i = 0
    for digit in range(10):
        for variant in range(4):
            img = np.zeros((28, 28), dtype=np.uint8)
            r0 = 3 + 2 * (digit % 5) + (variant % 2)
            c0 = 3 + 2 * (digit // 5) + (variant // 2)
            img[r0:r0 + 8, c0:c0 + 3] = 200
            img[r0 + digit % 3, c0:c0 + 10] = 200
            img[r0 + 7, c0 + variant] = 255
            images[i] = img
            labels[i] = digit
            i += 1
    order = rng.permutation(40)
    return images[order], labels[order]
