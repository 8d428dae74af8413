"""Gated linear networks.

A model is a stack of layers of gated geometric mixing neurons.  Every
neuron holds one weight row per context; the side information z selects
the active row through the neuron's halfspace gates, and the neuron
geometrically mixes the previous layer's outputs under that row.  Every
neuron predicts the same binary target, so learning is a single forward
pass: each layer computes its clipped outputs, then takes one online
gradient step on its own log-loss, then the next layer runs on those
already-computed outputs.  There is no backward pass.

Weights live in the hypercube [-clip_radius, +clip_radius]; activations
live in [epsilon, 1 - epsilon]; the bias slot prepended to every layer
is the constant beta, whose default has logit exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _expit
from scipy.special import logit as _logit

from .gating import NeuronGating
from .seeds import make_rng

__all__ = [
    "BETA_DEFAULT",
    "ModelConfig",
    "Neuron",
    "GlnLayer",
    "GlnModel",
    "init_model",
    "base_layer",
    "lr_schedule",
]

# logit(BETA_DEFAULT) == 1, so the bias slot acts as a conventional bias
# term in logit space
BETA_DEFAULT = float(_expit(1.0))


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and numeric constants of one binary model.

    layer_sizes counts neurons per layer (the final layer must hold the
    single output neuron).  base_dim is the width of the base layer
    including the bias slot, so a model over F raw features has
    base_dim = F + 1.  side_dim is the dimension of the side information
    seen by the gates.
    """

    layer_sizes: tuple[int, ...]
    context_dim: int
    base_dim: int
    side_dim: int
    epsilon: float = 0.01
    beta: float = BETA_DEFAULT
    clip_radius: float = 200.0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(k) for k in self.layer_sizes))
        if len(self.layer_sizes) == 0 or any(k < 1 for k in self.layer_sizes):
            raise ValueError("layer_sizes must be a non-empty tuple of positive counts")
        if self.layer_sizes[-1] != 1:
            raise ValueError("the final layer must contain exactly one output neuron")
        if self.context_dim < 0:
            raise ValueError("context_dim must be >= 0")
        if self.base_dim < 1:
            raise ValueError("base_dim must be >= 1 (the bias slot)")
        if self.side_dim < 1:
            raise ValueError("side_dim must be >= 1")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if not self.epsilon <= self.beta <= 1.0 - self.epsilon or self.beta == 0.5:
            raise ValueError("beta must lie in [epsilon, 1-epsilon] excluding 0.5")
        if not self.clip_radius > 1.0:
            raise ValueError("clip_radius must exceed 1")

    @property
    def num_contexts(self) -> int:
        return 1 << self.context_dim

    def input_width(self, layer_index: int) -> int:
        """Bias-inclusive width of the inputs to the given layer."""
        if layer_index == 0:
            return self.base_dim
        return self.layer_sizes[layer_index - 1] + 1


@dataclass
class Neuron:
    """View of one neuron: its gating and its (num_contexts, in_dim) rows."""

    gating: NeuronGating
    weights: np.ndarray


class GlnLayer:
    """One layer: stacked gates and weights for all its neurons.

    weights has shape (size, num_contexts, in_dim); gate_normals has
    shape (size, context_dim, side_dim) with unit rows.
    """

    def __init__(self, weights: np.ndarray, gate_normals: np.ndarray, gate_offsets: np.ndarray):
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.gate_normals = np.ascontiguousarray(gate_normals, dtype=np.float64)
        self.gate_offsets = np.ascontiguousarray(gate_offsets, dtype=np.float64)
        k, m = self.gate_offsets.shape
        if self.gate_normals.shape[:2] != (k, m) or self.weights.shape[0] != k:
            raise ValueError("inconsistent layer arrays")
        if self.weights.shape[1] != 1 << m:
            raise ValueError("weight row count must equal 2^context_dim")
        self._wflat = self.weights.reshape(-1, self.weights.shape[2])
        self._flat_normals = self.gate_normals.reshape(k * m, self.gate_normals.shape[2])
        self._flat_offsets = self.gate_offsets.reshape(-1)
        self._pow2 = 1 << np.arange(m, dtype=np.int64)
        self._row_base = np.arange(k, dtype=np.int64) * (1 << m)
        self._rows = None
        self._upd = None

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def num_contexts(self) -> int:
        return self.weights.shape[1]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[2]

    @property
    def context_dim(self) -> int:
        return self.gate_offsets.shape[1]

    @property
    def side_dim(self) -> int:
        return self.gate_normals.shape[2]

    def neuron(self, k: int) -> Neuron:
        return Neuron(
            gating=NeuronGating(self.gate_normals[k], self.gate_offsets[k]),
            weights=self.weights[k],
        )

    def context_ids(self, z: np.ndarray) -> np.ndarray:
        """Active context index of every neuron for side info z."""
        if self.context_dim == 0:
            return np.zeros(self.size, dtype=np.int64)
        bits = self._flat_normals @ z >= self._flat_offsets
        return bits.reshape(self.size, self.context_dim).astype(np.int64) @ self._pow2

    def context_ids_batch(self, Z: np.ndarray) -> np.ndarray:
        """(n, size) context indices for a batch of side info rows."""
        n = Z.shape[0]
        if self.context_dim == 0:
            return np.zeros((n, self.size), dtype=np.int64)
        bits = Z @ self._flat_normals.T >= self._flat_offsets
        return bits.reshape(n, self.size, self.context_dim).astype(np.int64) @ self._pow2

    def active_rows(self, ctx: np.ndarray) -> np.ndarray:
        """Copy of the active weight row of every neuron."""
        return self.weights[np.arange(self.size), np.asarray(ctx, dtype=np.int64)]

    def _scratch(self):
        if self._rows is None:
            self._rows = np.empty((self.size, self.in_dim))
            self._upd = np.empty((self.size, self.in_dim))
        return self._rows, self._upd


class GlnModel:
    """A gated linear network over one binary target."""

    def __init__(self, config: ModelConfig, layers: list[GlnLayer], feature_ranges=None, seed: int = 0):
        self.config = config
        self.layers = layers
        self.seed = int(seed)
        for i, layer in enumerate(layers):
            if layer.in_dim != config.input_width(i) or layer.size != config.layer_sizes[i]:
                raise ValueError(f"layer {i} shape disagrees with config")
            if layer.side_dim != config.side_dim:
                raise ValueError(f"layer {i} gate dimension disagrees with config")
        if feature_ranges is not None:
            lo, hi = (np.asarray(a, dtype=np.float64) for a in feature_ranges)
            if lo.shape != (config.base_dim - 1,) or hi.shape != lo.shape:
                raise ValueError("feature_ranges must cover base_dim - 1 features")
            if np.any(hi <= lo):
                raise ValueError("feature ranges must have positive span")
            feature_ranges = (lo, hi)
        self.feature_ranges = feature_ranges

    # -- structure ----------------------------------------------------

    @property
    def epsilon(self) -> float:
        return self.config.epsilon

    @property
    def beta(self) -> float:
        return self.config.beta

    @property
    def clip_radius(self) -> float:
        return self.config.clip_radius

    @property
    def n_neurons(self) -> int:
        return sum(layer.size for layer in self.layers)

    def copy(self) -> "GlnModel":
        """Independent weight copy; gate arrays are shared (never mutated)."""
        layers = [GlnLayer(l.weights.copy(), l.gate_normals, l.gate_offsets) for l in self.layers]
        return GlnModel(self.config, layers, self.feature_ranges, self.seed)

    # -- contexts ------------------------------------------------------

    def context_row(self, z: np.ndarray) -> np.ndarray:
        """Flat per-neuron context indices, layer-major."""
        z = self._check_side(z)
        return np.concatenate([layer.context_ids(z) for layer in self.layers])

    def context_table(self, Z: np.ndarray, chunk: int = 8192) -> np.ndarray:
        """(n, n_neurons) context indices for a whole dataset.

        Stored in the smallest unsigned dtype that fits 2^context_dim so
        full-dataset tables stay cheap to hold in memory.
        """
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[1] != self.config.side_dim:
            raise ValueError("expected side info batch of shape (n, side_dim)")
        m = self.config.context_dim
        dtype = np.uint8 if m <= 8 else (np.uint16 if m <= 16 else np.uint32)
        out = np.empty((Z.shape[0], self.n_neurons), dtype=dtype)
        for start in range(0, Z.shape[0], chunk):
            block = Z[start : start + chunk]
            off = 0
            for layer in self.layers:
                out[start : start + block.shape[0], off : off + layer.size] = layer.context_ids_batch(block)
                off += layer.size
        return out

    # -- inference and learning ---------------------------------------

    def _check_side(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.config.side_dim,):
            raise ValueError(f"side info must have shape ({self.config.side_dim},), got {z.shape}")
        return z

    def _prepare(self, z, p_base, contexts):
        """Resolve (p0, per-layer context ids) for one example."""
        cfg = self.config
        if contexts is None:
            z = self._check_side(z)
            ctx_flat = None
        else:
            ctx_flat = np.asarray(contexts)
            if ctx_flat.shape != (self.n_neurons,):
                raise ValueError(f"contexts must be a flat ({self.n_neurons},) row")
        if p_base is None:
            if z is None:
                raise ValueError("need side info to derive default base predictions")
            if cfg.base_dim - 1 != cfg.side_dim:
                raise ValueError("default base predictions need base_dim == side_dim + 1")
            p0 = base_layer(z, self.feature_ranges, epsilon=cfg.epsilon, beta=cfg.beta)
        else:
            p_base = np.asarray(p_base, dtype=np.float64)
            if p_base.shape != (cfg.base_dim - 1,):
                raise ValueError(f"base predictions must have shape ({cfg.base_dim - 1},)")
            if p_base.size and (p_base.min() < cfg.epsilon or p_base.max() > 1.0 - cfg.epsilon):
                raise ValueError("base predictions must lie in [epsilon, 1-epsilon]")
            p0 = np.empty(cfg.base_dim)
            p0[0] = cfg.beta
            p0[1:] = p_base
        return z, p0, ctx_flat

    def _layer_ctx(self, layer_index, layer, z, ctx_flat, off):
        if ctx_flat is not None:
            return ctx_flat[off : off + layer.size]
        return layer.context_ids(z)

    def forward(self, z, p_base=None, contexts=None):
        """Pure forward pass; returns (output, per-layer activations).

        Activations carry the bias slot at index 0 of every layer,
        including the base layer, and are clipped to [eps, 1-eps].
        """
        z, p0, ctx_flat = self._prepare(z, p_base, contexts)
        cfg = self.config
        acts = [p0]
        p_prev = p0
        off = 0
        for i, layer in enumerate(self.layers):
            lp = _logit(p_prev)
            ctx = self._layer_ctx(i, layer, z, ctx_flat, off)
            off += layer.size
            raw = _expit(layer.active_rows(ctx) @ lp)
            act = np.empty(layer.size + 1)
            act[0] = cfg.beta
            act[1:] = np.clip(raw, cfg.epsilon, 1.0 - cfg.epsilon)
            acts.append(act)
            p_prev = act
        return float(acts[-1][1]), acts

    def predict_and_update(self, z, p_base, x, eta, contexts=None) -> float:
        """One fused pass: predict and take one gradient step per neuron.

        Returns the prediction computed with pre-update weights (each
        layer is updated only after its outputs are taken, and deeper
        layers consume the outputs computed this pass).  Only the active
        row of each neuron changes, and it is clipped back into the
        weight hypercube.
        """
        if x not in (0, 1):
            raise ValueError(f"binary target must be 0 or 1, got {x!r}")
        if not 0.0 < eta < 1.0:
            raise ValueError(f"learning rate must lie in (0, 1), got {eta!r}")
        z, p0, ctx_flat = self._prepare(z, p_base, contexts)
        cfg = self.config
        xf = float(x)
        b = cfg.clip_radius
        p_prev = p0
        off = 0
        for i, layer in enumerate(self.layers):
            lp = _logit(p_prev)
            ctx = self._layer_ctx(i, layer, z, ctx_flat, off)
            off += layer.size
            flat = layer._row_base + ctx
            rows, upd = layer._scratch()
            np.take(layer._wflat, flat, axis=0, out=rows)
            raw = _expit(rows @ lp)
            p = np.clip(raw, cfg.epsilon, 1.0 - cfg.epsilon)
            scale = p - xf
            scale *= -eta
            np.multiply(scale[:, None], lp[None, :], out=upd)
            rows += upd
            np.clip(rows, -b, b, out=rows)
            layer._wflat[flat] = rows
            act = np.empty(layer.size + 1)
            act[0] = cfg.beta
            act[1:] = p
            p_prev = act
        return float(p_prev[1])


def init_model(config: ModelConfig, seed, feature_ranges=None) -> GlnModel:
    """Build a model: uniform 1/width weights, gates sampled from seed.

    Gate draw order is layer-major, neuron-major, gate-major, so a seed
    pins the whole model.  Weight init is deterministic: every row of a
    layer with input width W starts at 1/W, which makes each neuron an
    exact geometric average of its inputs.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(int(seed))
    seed_val = 0 if isinstance(seed, np.random.Generator) else int(seed)
    m = config.context_dim
    layers = []
    for i, size in enumerate(config.layer_sizes):
        in_dim = config.input_width(i)
        weights = np.full((size, 1 << m, in_dim), 1.0 / in_dim)
        normals = np.empty((size, m, config.side_dim))
        offsets = np.empty((size, m))
        for k in range(size):
            g = NeuronGating.sample(rng, m, config.side_dim)
            normals[k] = g.normals
            offsets[k] = g.offsets
        layers.append(GlnLayer(weights, normals, offsets))
    return GlnModel(config, layers, feature_ranges, seed=seed_val)


def base_layer(features, ranges=None, *, epsilon: float, beta: float) -> np.ndarray:
    """Squash raw features into base predictions, bias slot prepended.

    Each feature is mapped affinely from its declared [lo, hi] range
    onto [epsilon, 1-epsilon] and clipped; ranges default to the unit
    interval.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 1:
        raise ValueError("features must be a vector")
    if ranges is None:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = (np.asarray(a, dtype=np.float64) for a in ranges)
        if np.any(hi <= lo):
            raise ValueError("feature ranges must have positive span")
        if getattr(lo, "shape", ()) not in ((), f.shape) or getattr(hi, "shape", ()) not in ((), f.shape):
            raise ValueError("feature ranges must be scalar or match the feature vector")
    s = epsilon + (f - lo) / (hi - lo) * (1.0 - 2.0 * epsilon)
    np.clip(s, epsilon, 1.0 - epsilon, out=s)
    out = np.empty(f.size + 1)
    out[0] = beta
    out[1:] = s
    return out


def lr_schedule(name: str, t: int, *, c: float = 1.0, eta: float = 0.01) -> float:
    """Learning rate for round t >= 1.

    "mnist":     min(100/t, 0.01)
    "inverse_t": c/t, capped at 0.5 so it is always a valid step size
    "constant":  eta
    """
    if t < 1:
        raise ValueError("round index starts at 1")
    if name == "mnist":
        return min(100.0 / t, 0.01)
    if name == "inverse_t":
        return min(c / t, 0.5)
    if name == "constant":
        return eta
    raise ValueError(f"unknown learning-rate schedule {name!r}")
