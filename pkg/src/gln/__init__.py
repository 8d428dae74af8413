"""Online learning with gated linear networks."""

from .gating import HalfspaceGate, NeuronGating, halfspace_eval, sample_gate, signature
from .interpret import CollapsedWeights, collapse, saliency
from .mixer import geo_grad, geo_loss, geo_predict, logit, sigmoid
from .network import (
    BETA_DEFAULT,
    GlnModel,
    ModelConfig,
    base_layer,
    init_model,
    lr_schedule,
)
from .tasks import AutoregressiveDensityModel, OvaClassifier

__version__ = "0.1.0"

__all__ = [
    "AutoregressiveDensityModel",
    "BETA_DEFAULT",
    "CollapsedWeights",
    "GlnModel",
    "HalfspaceGate",
    "ModelConfig",
    "NeuronGating",
    "OvaClassifier",
    "base_layer",
    "collapse",
    "geo_grad",
    "geo_loss",
    "geo_predict",
    "halfspace_eval",
    "init_model",
    "logit",
    "lr_schedule",
    "saliency",
    "sample_gate",
    "sigmoid",
    "signature",
]
