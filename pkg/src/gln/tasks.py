"""Task-level wrappers over binary models.

One-vs-all classification runs C independent binary models and predicts
the argmax of their outputs.  The autoregressive density model chains D
per-pixel binary models over a row-major pixel ordering: model i sees
only the visible prefix x_{<i}, both as gating side info (prefix pixels
mapped to {eps, 1-eps}, the rest held at 0.5) and as its base
predictions.
"""

from __future__ import annotations

import numpy as np

from .network import BETA_DEFAULT, GlnModel, ModelConfig, init_model
from .seeds import CLASS_MODELS, PIXEL_MODELS, child_seed

__all__ = ["OvaClassifier", "AutoregressiveDensityModel", "argmax_label"]


def argmax_label(probs) -> int:
    """Index of the largest probability; ties go to the lowest index."""
    return int(np.argmax(np.asarray(probs)))


class OvaClassifier:
    """One binary model per class; all share architecture and constants."""

    def __init__(self, models: list[GlnModel]):
        if not models:
            raise ValueError("need at least one class model")
        ref = models[0].config
        for m in models[1:]:
            if m.config != ref:
                raise ValueError("all class models must share one configuration")
        self.models = models

    @classmethod
    def create(cls, n_classes: int, config: ModelConfig, master_seed: int, feature_ranges=None) -> "OvaClassifier":
        """Fresh classifier; per-class gate seeds derived from the master seed."""
        models = [
            init_model(config, child_seed(master_seed, CLASS_MODELS, c), feature_ranges)
            for c in range(n_classes)
        ]
        return cls(models)

    @property
    def n_classes(self) -> int:
        return len(self.models)

    @property
    def config(self) -> ModelConfig:
        return self.models[0].config

    def copy(self) -> "OvaClassifier":
        return OvaClassifier([m.copy() for m in self.models])

    def context_tables(self, Z: np.ndarray, chunk: int = 8192) -> list[np.ndarray]:
        """Per-class (n, n_neurons) context tables for a dataset."""
        return [m.context_table(Z, chunk) for m in self.models]

    def _ctx(self, contexts, c):
        return None if contexts is None else contexts[c]

    def predict(self, z, p_base=None, contexts=None):
        """(label, per-class probabilities); outputs are not normalized."""
        probs = np.array(
            [m.forward(z, p_base, self._ctx(contexts, c))[0] for c, m in enumerate(self.models)]
        )
        return argmax_label(probs), probs

    def update(self, z, p_base, label, eta, contexts=None) -> np.ndarray:
        """One online step: model j gets target 1 iff j == label.

        Returns each model's pre-update prediction for this example.
        """
        if not 0 <= label < self.n_classes:
            raise ValueError(f"label {label} out of range for {self.n_classes} classes")
        return np.array(
            [
                m.predict_and_update(z, p_base, 1 if c == label else 0, eta, self._ctx(contexts, c))
                for c, m in enumerate(self.models)
            ]
        )


class AutoregressiveDensityModel:
    """Chain-rule density over binary images: one model per pixel."""

    def __init__(self, models: list[GlnModel]):
        d = len(models)
        for i, m in enumerate(models):
            if m.config.base_dim != i + 1:
                raise ValueError(f"pixel model {i} must have base width {i + 1}")
            if m.config.side_dim != d:
                raise ValueError("pixel models must gate on the full image length")
        self.models = models

    @classmethod
    def create(
        cls,
        n_pixels: int,
        layer_sizes: tuple[int, ...],
        context_dim: int,
        master_seed: int,
        epsilon: float = 0.01,
        beta: float = BETA_DEFAULT,
        clip_radius: float = 200.0,
    ) -> "AutoregressiveDensityModel":
        models = []
        for i in range(n_pixels):
            cfg = ModelConfig(
                layer_sizes=layer_sizes,
                context_dim=context_dim,
                base_dim=i + 1,
                side_dim=n_pixels,
                epsilon=epsilon,
                beta=beta,
                clip_radius=clip_radius,
            )
            models.append(init_model(cfg, child_seed(master_seed, PIXEL_MODELS, i)))
        return cls(models)

    @property
    def n_pixels(self) -> int:
        return len(self.models)

    def copy(self) -> "AutoregressiveDensityModel":
        return AutoregressiveDensityModel([m.copy() for m in self.models])

    def _check_image(self, image) -> np.ndarray:
        image = np.asarray(image)
        if image.shape != (self.n_pixels,):
            raise ValueError(f"image must be a flat vector of {self.n_pixels} bits")
        if not np.all((image == 0) | (image == 1)):
            raise ValueError("image must be binary")
        return image.astype(np.int64)

    def pixel_probabilities(self, image, update: bool = False, eta: float = 0.01) -> np.ndarray:
        """P(x_i = 1 | x_{<i}) for every pixel, optionally learning in-pass.

        Predictions are taken before each pixel model's update, so the
        returned vector is a genuine online forecast of the image.
        """
        image = self._check_image(image)
        eps = self.models[0].config.epsilon if self.models else 0.01
        mapped = np.where(image == 1, 1.0 - eps, eps)
        z = np.full(self.n_pixels, 0.5)
        probs = np.empty(self.n_pixels)
        for i, model in enumerate(self.models):
            p_base = mapped[:i]
            if update:
                probs[i] = model.predict_and_update(z, p_base, int(image[i]), eta)
            else:
                probs[i] = model.forward(z, p_base)[0]
            z[i] = mapped[i]
        return probs

    def logprob(self, image, update: bool = False, eta: float = 0.01) -> float:
        """Total ln-probability of the image in nats."""
        image = self._check_image(image)
        probs = self.pixel_probabilities(image, update=update, eta=eta)
        q = np.where(image == 1, probs, 1.0 - probs)
        return float(np.sum(np.log(q)))

    def nats_per_image(self, images, update: bool = False, eta=0.01, t_start: int = 1) -> float:
        """Mean negative log-probability over a dataset.

        eta may be a float or a callable t -> learning rate, with t
        counting images from t_start; it is ignored when frozen.
        """
        images = np.asarray(images)
        if images.ndim != 2 or images.shape[0] == 0:
            raise ValueError("expected a non-empty (n, n_pixels) dataset")
        total = 0.0
        for k in range(images.shape[0]):
            step_eta = eta(t_start + k) if callable(eta) else eta
            total += self.logprob(images[k], update=update, eta=step_eta)
        return -total / images.shape[0]
