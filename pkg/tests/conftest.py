"""Shared fixtures: synthetic datasets and the optional real-data hook.

The full-scale classification/continual-learning/density criteria need
the standard handwritten-digit IDX files.  Point GLN_DATA_DIR (or drop
the files into ./data) at a directory containing

    train-images-idx3-ubyte[.gz]   train-labels-idx1-ubyte[.gz]
    t10k-images-idx3-ubyte[.gz]    t10k-labels-idx1-ubyte[.gz]

and the gated tests run; otherwise they skip with a note.
"""

from __future__ import annotations

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gln.harness.data import write_idx_images, write_idx_labels

_STANDARD = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def mnist_paths():
    """Resolve the real dataset files, or None when unavailable."""
    root = os.environ.get("GLN_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "data"))
    found = {}
    for key, name in _STANDARD.items():
        for candidate in (name, name + ".gz"):
            path = os.path.join(root, candidate)
            if os.path.exists(path):
                found[key] = path
                break
        else:
            return None
    return found


def require_mnist():
    paths = mnist_paths()
    if paths is None:
        pytest.skip("real dataset not present (set GLN_DATA_DIR or populate ./data)")
    return paths


def make_synthetic_digits(n: int, seed: int, rows: int = 28, cols: int = 28):
    """Class-structured fake digit images: one bright block per class."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 10, n).astype(np.uint8)
    images = (rng.random((n, rows, cols)) * 60).astype(np.uint8)
    for i, c in enumerate(labels):
        r0 = (int(c) % 5) * (rows // 6)
        c0 = (int(c) // 5) * (cols // 2 - 2)
        images[i, r0 : r0 + rows // 5, c0 : c0 + cols // 3] = 220
    return images, labels


@pytest.fixture
def synthetic_idx_dir(tmp_path):
    """Directory with a small synthetic dataset in the standard layout."""
    train_images, train_labels = make_synthetic_digits(400, seed=1)
    test_images, test_labels = make_synthetic_digits(150, seed=2)
    write_idx_images(str(tmp_path / _STANDARD["train_images"]), train_images)
    write_idx_labels(str(tmp_path / _STANDARD["train_labels"]), train_labels)
    write_idx_images(str(tmp_path / _STANDARD["test_images"]), test_images)
    write_idx_labels(str(tmp_path / _STANDARD["test_labels"]), test_labels)
    return tmp_path


def synthetic_paths(directory) -> dict:
    return {key: str(directory / name) for key, name in _STANDARD.items()}
