"""Collapse a model into the single linear map it applies to one input.

For fixed side information the gating freezes one weight row per
neuron, the sigmoid/logit pairs between layers cancel, and the whole
network reduces to sigmoid(w_eff . logit(p0)) for one effective weight
vector over the base slots.  That vector, with the bias coordinate
dropped, is a ready-made saliency map.

Clipping breaks the exact cancellation, so the collapse also reports
whether any activation hit the clip bounds on this input; the identity
is exact only when none did.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as _expit
from scipy.special import logit as _logit

from .network import GlnModel

__all__ = ["CollapsedWeights", "collapse", "saliency"]


@dataclass
class CollapsedWeights:
    """Effective linear weights over the base slots (bias included)."""

    w_eff: np.ndarray
    clip_clean: bool


def collapse(model: GlnModel, z, p_base=None) -> CollapsedWeights:
    """Product of the active weight rows, folded top-down.

    The bias slot of each intermediate layer is carried as an extra
    coordinate whose row is the unit row on slot 0: the input's slot 0
    is logit(beta), so that row reproduces the bias contribution
    exactly.  clip_clean comes from a parallel forward pass with the
    same active rows.
    """
    z, p0, _ = model._prepare(z, p_base, None)
    cfg = model.config
    per_layer_rows = []
    clip_clean = True
    p_prev = p0
    for layer in model.layers:
        lp = _logit(p_prev)
        rows = layer.active_rows(layer.context_ids(z))
        per_layer_rows.append(rows)
        raw = _expit(rows @ lp)
        clipped = np.clip(raw, cfg.epsilon, 1.0 - cfg.epsilon)
        if not np.array_equal(raw, clipped):
            clip_clean = False
        act = np.empty(layer.size + 1)
        act[0] = cfg.beta
        act[1:] = clipped
        p_prev = act

    w = per_layer_rows[-1][0]
    for rows in reversed(per_layer_rows[:-1]):
        folded = w[1:] @ rows
        folded[0] += w[0]  # bias coordinate passes through unchanged
        w = folded
    return CollapsedWeights(w_eff=w, clip_clean=clip_clean)


def saliency(model: GlnModel, z, p_base=None) -> np.ndarray:
    """Effective weights per raw input feature (bias coordinate dropped)."""
    return collapse(model, z, p_base).w_eff[1:]
