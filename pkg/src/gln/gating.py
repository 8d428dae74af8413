"""Halfspace context functions and their composition.

A gate is a sampled hyperplane acting as a 1-bit test z . v >= offset
on the side information z.  A neuron composes m such gates into a
context index in {0 .. 2^m - 1}, which selects which of its weight rows
is active for a given input.  Inputs close in cosine distance share
most gate bits (the simhash property), so they select similar weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "HalfspaceGate",
    "NeuronGating",
    "halfspace_eval",
    "sample_gate",
    "context_index",
    "signature",
]


@dataclass(frozen=True)
class HalfspaceGate:
    """One sampled hyperplane: unit normal plus scalar offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        if n.ndim != 1:
            raise ValueError("gate normal must be a vector")
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-12:
            raise ValueError("gate normal must have unit 2-norm")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))


def halfspace_eval(gate: HalfspaceGate, z) -> int:
    """1 if z . v >= offset else 0 (boundary belongs to the 1 side)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != gate.normal.shape:
        raise ValueError(f"side info dimension mismatch: {z.shape} vs {gate.normal.shape}")
    return int(float(z @ gate.normal) >= gate.offset)


def sample_gate(rng: np.random.Generator, dz: int) -> HalfspaceGate:
    """Sample a gate: normal uniform on the unit sphere, offset ~ N(0,1).

    Draw order is fixed (dz normals componentwise, then the offset) so a
    seeded generator always yields the same gate.
    """
    if dz < 1:
        raise ValueError("side info dimension must be >= 1")
    x = rng.standard_normal(dz)
    norm = float(np.linalg.norm(x))
    while norm == 0.0:  # probability zero, but keep the contract total
        x = rng.standard_normal(dz)
        norm = float(np.linalg.norm(x))
    return HalfspaceGate(normal=x / norm, offset=float(rng.standard_normal()))


class NeuronGating:
    """m composed halfspace gates mapping side info to one of 2^m contexts.

    m = 0 is allowed and means a single always-active context (the
    neuron degenerates to plain geometric mixing).
    """

    def __init__(self, normals: np.ndarray, offsets: np.ndarray):
        normals = np.asarray(normals, dtype=np.float64)
        offsets = np.asarray(offsets, dtype=np.float64)
        if normals.ndim != 2 or offsets.shape != (normals.shape[0],):
            raise ValueError("expected normals (m, dz) and offsets (m,)")
        norms = np.linalg.norm(normals, axis=1)
        if normals.shape[0] and np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("every gate normal must have unit 2-norm")
        self.normals = normals
        self.offsets = offsets

    @classmethod
    def sample(cls, rng: np.random.Generator, m: int, dz: int) -> "NeuronGating":
        gates = [sample_gate(rng, dz) for _ in range(m)]
        return cls.from_gates(gates, dz)

    @classmethod
    def from_gates(cls, gates: Sequence[HalfspaceGate], dz: int) -> "NeuronGating":
        if gates:
            return cls(np.stack([g.normal for g in gates]), np.array([g.offset for g in gates]))
        return cls(np.empty((0, dz)), np.empty((0,)))

    @property
    def context_dim(self) -> int:
        return self.normals.shape[0]

    @property
    def side_dim(self) -> int:
        return self.normals.shape[1]

    @property
    def num_contexts(self) -> int:
        return 1 << self.context_dim

    @property
    def gates(self) -> list[HalfspaceGate]:
        return [HalfspaceGate(n, b) for n, b in zip(self.normals, self.offsets)]

    def bits(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.side_dim,):
            raise ValueError(f"side info dimension mismatch: {z.shape} vs ({self.side_dim},)")
        if self.context_dim == 0:
            return np.zeros(0, dtype=np.int64)
        return (self.normals @ z >= self.offsets).astype(np.int64)

    def context_index(self, z) -> int:
        """Positional binary encoding sum_j 2^j * bit_j of the gate bits."""
        b = self.bits(z)
        if b.size == 0:
            return 0
        return int(b @ (1 << np.arange(b.size, dtype=np.int64)))


def context_index(gating: NeuronGating, z) -> int:
    return gating.context_index(z)


def signature(gates, z) -> np.ndarray:
    """Bit vector (c_1(z), ..., c_m(z)) over a gate collection.

    Accepts a NeuronGating or any sequence of HalfspaceGate; used to
    measure how far apart inputs land in gating space.
    """
    if isinstance(gates, NeuronGating):
        return gates.bits(z)
    z = np.asarray(z, dtype=np.float64)
    return np.array([halfspace_eval(g, z) for g in gates], dtype=np.int64)
