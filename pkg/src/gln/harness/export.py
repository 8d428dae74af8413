"""Image and table export for saliency maps and decision surfaces."""

from __future__ import annotations

import numpy as np

__all__ = ["write_pgm", "write_signed_pgm", "write_csv_matrix"]


def write_pgm(path: str, values: np.ndarray) -> None:
    """Binary PGM (P5) of values already in [0, 1]."""
    img = np.asarray(values, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2-d image")
    bytes_img = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(bytes_img.tobytes())


def write_signed_pgm(path: str, values: np.ndarray) -> None:
    """Signed map rendered symmetrically around mid-gray."""
    img = np.asarray(values, dtype=np.float64)
    scale = np.max(np.abs(img))
    if scale == 0.0:
        scale = 1.0
    write_pgm(path, img / (2.0 * scale) + 0.5)


def write_csv_matrix(path: str, values: np.ndarray) -> None:
    np.savetxt(path, np.asarray(values, dtype=np.float64), delimiter=",", fmt="%.17g")
