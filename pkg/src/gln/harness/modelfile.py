"""Versioned binary container for trained models.

Layout (all little-endian):

    magic  b"GLN1"
    u32    format version (currently 1)
    u32    number of models
    per model:
        u32 side_dim, u32 base_dim, u32 context_dim, u32 n_layers
        u32[n_layers]  layer sizes (neurons per layer)
        f64 epsilon, f64 beta, f64 clip_radius
        u64 seed (informational)
        u8  has_ranges; if 1: f64[base_dim-1] lo then f64[base_dim-1] hi
        gates, layer-major / neuron-major / gate-major:
            f64[side_dim] unit normal, then f64 offset
        weights, layer-major / neuron-major / context-major / index:
            f64[input_width]
    u64    checksum: first 8 bytes of SHA-256 of everything above

Weights and gates are raw float64 bytes, so save -> load -> save is
bit-identical.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from ..network import GlnLayer, GlnModel, ModelConfig

__all__ = ["ModelFileError", "serialize_models", "deserialize_models", "save_models", "load_models", "models_digest"]

MAGIC = b"GLN1"
VERSION = 1


class ModelFileError(ValueError):
    pass


def _model_bytes(model: GlnModel) -> bytes:
    cfg = model.config
    parts = [
        struct.pack(
            "<IIII", cfg.side_dim, cfg.base_dim, cfg.context_dim, len(cfg.layer_sizes)
        ),
        struct.pack(f"<{len(cfg.layer_sizes)}I", *cfg.layer_sizes),
        struct.pack("<ddd", cfg.epsilon, cfg.beta, cfg.clip_radius),
        struct.pack("<Q", model.seed & (2**64 - 1)),
    ]
    if model.feature_ranges is None:
        parts.append(struct.pack("<B", 0))
    else:
        lo, hi = model.feature_ranges
        parts.append(struct.pack("<B", 1))
        parts.append(lo.astype("<f8").tobytes())
        parts.append(hi.astype("<f8").tobytes())
    for layer in model.layers:
        for k in range(layer.size):
            for j in range(layer.context_dim):
                parts.append(layer.gate_normals[k, j].astype("<f8").tobytes())
                parts.append(struct.pack("<d", layer.gate_offsets[k, j]))
    for layer in model.layers:
        parts.append(layer.weights.astype("<f8").tobytes())
    return b"".join(parts)


def serialize_models(models: list[GlnModel]) -> bytes:
    body = MAGIC + struct.pack("<II", VERSION, len(models))
    body += b"".join(_model_bytes(m) for m in models)
    checksum = hashlib.sha256(body).digest()[:8]
    return body + checksum


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFileError("truncated model file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)


def deserialize_models(data: bytes) -> list[GlnModel]:
    if len(data) < len(MAGIC) + 8 + 8:
        raise ModelFileError("truncated model file")
    body, checksum = data[:-8], data[-8:]
    if hashlib.sha256(body).digest()[:8] != checksum:
        raise ModelFileError("checksum mismatch")
    r = _Reader(body)
    if r.take(4) != MAGIC:
        raise ModelFileError("bad magic")
    version, n_models = r.unpack("<II")
    if version != VERSION:
        raise ModelFileError(f"unsupported model file version {version}")
    models = []
    for _ in range(n_models):
        side_dim, base_dim, context_dim, n_layers = r.unpack("<IIII")
        sizes = r.unpack(f"<{n_layers}I")
        epsilon, beta, clip_radius = r.unpack("<ddd")
        (seed,) = r.unpack("<Q")
        (has_ranges,) = r.unpack("<B")
        ranges = None
        if has_ranges:
            lo = r.floats(base_dim - 1)
            hi = r.floats(base_dim - 1)
            ranges = (lo, hi)
        cfg = ModelConfig(
            layer_sizes=tuple(sizes),
            context_dim=context_dim,
            base_dim=base_dim,
            side_dim=side_dim,
            epsilon=epsilon,
            beta=beta,
            clip_radius=clip_radius,
        )
        gate_data = []
        for size in cfg.layer_sizes:
            normals = np.empty((size, context_dim, side_dim))
            offsets = np.empty((size, context_dim))
            for k in range(size):
                for j in range(context_dim):
                    normals[k, j] = r.floats(side_dim)
                    (offsets[k, j],) = r.unpack("<d")
            gate_data.append((normals, offsets))
        layers = []
        for i, size in enumerate(cfg.layer_sizes):
            in_dim = cfg.input_width(i)
            weights = r.floats(size * cfg.num_contexts * in_dim).reshape(size, cfg.num_contexts, in_dim)
            layers.append(GlnLayer(weights, *gate_data[i]))
        models.append(GlnModel(cfg, layers, ranges, seed=seed))
    if r.pos != len(body):
        raise ModelFileError(f"{len(body) - r.pos} trailing bytes")
    return models


def save_models(path: str, models: list[GlnModel]) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_models(models))


def load_models(path: str) -> list[GlnModel]:
    with open(path, "rb") as fh:
        return deserialize_models(fh.read())


def models_digest(models: list[GlnModel]) -> str:
    """Content hash, used to assert evaluation paths mutate nothing."""
    return hashlib.sha256(serialize_models(models)).hexdigest()
