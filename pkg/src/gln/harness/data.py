"""Dataset ingestion and preprocessing.

IDX is the big-endian binary format the MNIST files ship in: magic
0x00000803 for u8 image tensors (3 dims), 0x00000801 for u8 label
vectors.  Gzipped files are handled transparently.  Deskewing is the
classic moment-based shear removal; pixel permutations define the
continual-learning tasks; the CSV + sidecar-schema loader covers small
tabular benchmarks.
"""

from __future__ import annotations

import csv
import gzip
import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import affine_transform

from ..seeds import TASK_PERMUTATIONS, child_seed, make_rng

__all__ = [
    "IdxError",
    "load_idx",
    "load_idx_pair",
    "write_idx_images",
    "write_idx_labels",
    "normalize_images",
    "image_skew",
    "deskew",
    "deskew_batch",
    "binarize",
    "center_crop",
    "permute_task",
    "CsvDataset",
    "load_csv_dataset",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxError(ValueError):
    pass


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as fh:
        head = fh.read(2)
        fh.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(fh) as gz:
                return gz.read()
        return fh.read()


def load_idx(path: str) -> np.ndarray:
    """Parse one IDX file into a u8 array (images (n,r,c) or labels (n,))."""
    data = _read_bytes(path)
    if len(data) < 4:
        raise IdxError(f"{path}: truncated header")
    (magic,) = struct.unpack(">I", data[:4])
    if magic == IMAGE_MAGIC:
        ndim = 3
    elif magic == LABEL_MAGIC:
        ndim = 1
    else:
        raise IdxError(f"{path}: bad magic 0x{magic:08x}")
    header_len = 4 + 4 * ndim
    if len(data) < header_len:
        raise IdxError(f"{path}: truncated header")
    dims = struct.unpack(f">{ndim}I", data[4:header_len])
    expected = int(np.prod(dims))
    payload = data[header_len:]
    if len(payload) < expected:
        raise IdxError(f"{path}: truncated payload ({len(payload)} < {expected} bytes)")
    if len(payload) > expected:
        raise IdxError(f"{path}: {len(payload) - expected} trailing bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx_pair(images_path: str, labels_path: str):
    """Load an (images, labels) pair and validate matching counts."""
    images = load_idx(images_path)
    labels = load_idx(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxError(
            f"count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    return images, labels


def write_idx_images(path: str, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("expected images of shape (n, rows, cols)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path: str, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError("expected labels of shape (n,)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


def normalize_images(images: np.ndarray) -> np.ndarray:
    """Raw bytes to float64 intensities in [0, 1]."""
    return np.asarray(images, dtype=np.float64) / 255.0


def image_skew(image: np.ndarray) -> float:
    """Shear statistic mu11 / mu02 of an intensity image (0 if empty)."""
    img = np.asarray(image, dtype=np.float64)
    total = img.sum()
    if total <= 0.0:
        return 0.0
    rows, cols = np.indices(img.shape)
    r_bar = (rows * img).sum() / total
    c_bar = (cols * img).sum() / total
    mu11 = ((cols - c_bar) * (rows - r_bar) * img).sum() / total
    mu02 = ((rows - r_bar) ** 2 * img).sum() / total
    if mu02 <= 1e-12:
        return 0.0
    return float(mu11 / mu02)


def deskew(image: np.ndarray) -> np.ndarray:
    """Moment-based deskew: undo the shear and re-center the mass.

    The inverse shear x -> x + skew * (y - center) is applied as an
    affine warp with bilinear sampling, translated so the center of
    mass lands on the geometric center.  All-zero images pass through.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a single 2-d image")
    total = img.sum()
    if total <= 0.0:
        return img.copy()
    alpha = image_skew(img)
    rows, cols = np.indices(img.shape)
    r_bar = (rows * img).sum() / total
    c_bar = (cols * img).sum() / total
    center = np.array([(img.shape[0] - 1) / 2.0, (img.shape[1] - 1) / 2.0])
    matrix = np.array([[1.0, 0.0], [alpha, 1.0]])
    offset = np.array([r_bar, c_bar]) - matrix @ center
    return affine_transform(img, matrix, offset=offset, order=1, mode="constant", cval=0.0)


def deskew_batch(images: np.ndarray) -> np.ndarray:
    out = np.empty_like(images, dtype=np.float64)
    for i in range(images.shape[0]):
        out[i] = deskew(images[i])
    return out


def binarize(images: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Deterministic threshold on normalized intensity (>= threshold -> 1)."""
    return (np.asarray(images, dtype=np.float64) >= threshold).astype(np.uint8)


def center_crop(images: np.ndarray, size: int) -> np.ndarray:
    """Central size x size crop of a (n, rows, cols) stack."""
    _, rows, cols = images.shape
    if size > rows or size > cols:
        raise ValueError("crop larger than image")
    r0 = (rows - size) // 2
    c0 = (cols - size) // 2
    return images[:, r0 : r0 + size, c0 : c0 + size]


def permute_task(master_seed: int, task_index: int, n: int = 784) -> np.ndarray:
    """Pixel permutation defining a task; task 0 is the identity."""
    if task_index < 0:
        raise ValueError("task index must be >= 0")
    if task_index == 0:
        return np.arange(n, dtype=np.int64)
    rng = make_rng(child_seed(master_seed, TASK_PERMUTATIONS, task_index))
    return rng.permutation(n).astype(np.int64)


@dataclass
class CsvDataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    lo: np.ndarray
    hi: np.ndarray
    classes: list


def load_csv_dataset(csv_path: str, schema_path: str) -> CsvDataset:
    """CSV with a header row, plus a JSON sidecar schema.

    Schema: {"label": "<column>", "features": [{"name": .., "min": ..,
    "max": ..}, ...], "classes": [..]} where "classes" is optional
    (defaults to the sorted distinct label values).
    """
    with open(schema_path, "r", encoding="utf-8") as fh:
        schema = json.load(fh)
    label_col = schema["label"]
    feats = schema["features"]
    names = [f["name"] for f in feats]
    lo = np.array([float(f["min"]) for f in feats])
    hi = np.array([float(f["max"]) for f in feats])

    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{csv_path}: empty dataset")
    missing = [c for c in names + [label_col] if c not in rows[0]]
    if missing:
        raise ValueError(f"{csv_path}: missing columns {missing}")

    raw_labels = [row[label_col] for row in rows]
    classes = schema.get("classes") or sorted(set(raw_labels))
    index = {c: i for i, c in enumerate(classes)}
    unknown = sorted(set(raw_labels) - set(classes))
    if unknown:
        raise ValueError(f"{csv_path}: labels {unknown} not in schema classes")
    X = np.array([[float(row[c]) for c in names] for row in rows])
    y = np.array([index[l] for l in raw_labels], dtype=np.int64)
    return CsvDataset(X=X, y=y, feature_names=names, lo=lo, hi=hi, classes=list(classes))
