"""Geometric mixing of probabilistic forecasts.

A geometric mixer combines input probabilities p_1..p_d into a single
prediction sigmoid(w . logit(p)).  This is equivalent to a weighted
product of experts, and the log-loss of the prediction is convex in the
weight vector w, which is what makes per-neuron online gradient descent
work everywhere else in this package.

The sigmoid-logit form is used for all computation (the product form
underflows for large d); tests carry the product form as an independent
oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit as _expit
from scipy.special import logit as _logit

__all__ = ["sigmoid", "logit", "geo_predict", "geo_loss", "geo_grad", "grad_norm_bound"]


def sigmoid(x):
    """Logistic function 1 / (1 + exp(-x)), elementwise."""
    return _expit(x)


def logit(p):
    """Log-odds ln(p / (1 - p)), elementwise.

    Raises ValueError outside the open interval (0, 1): a non-finite
    logit here means some upstream clipping step failed.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return _logit(p)


def _check_dims(w, p):
    w = np.asarray(w, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if w.ndim != 1 or p.ndim != 1 or w.shape != p.shape:
        raise ValueError(f"weight/input dimension mismatch: {w.shape} vs {p.shape}")
    return w, p


def geo_predict(w, p) -> float:
    """Geometric mixture sigmoid(w . logit(p)).

    The result is a probability in (0, 1) but is *not* clipped to the
    model's [eps, 1-eps] band; clipping is the network layer's job.
    """
    w, p = _check_dims(w, p)
    # (1, d) @ (d,) so that a one-neuron network layer and a standalone
    # mixer run the identical BLAS reduction (bit-for-bit contract).
    return float(_expit(w[None, :] @ logit(p))[0])


def geo_loss(w, p, x) -> float:
    """Log-loss -ln q(x) of the geometric mixture, convex in w."""
    q = geo_predict(w, p)
    if x == 1:
        return float(-np.log(q))
    if x == 0:
        return float(-np.log1p(-q))
    raise ValueError(f"binary target must be 0 or 1, got {x!r}")


def geo_grad(w, p, x) -> np.ndarray:
    """Exact gradient of geo_loss with respect to w.

    Equals (geo_predict(w, p) - x) * logit(p) componentwise; its 2-norm
    is at most sqrt(d) * ln(1/eps) whenever p lies in [eps, 1-eps]^d.
    """
    w, p = _check_dims(w, p)
    if x not in (0, 1):
        raise ValueError(f"binary target must be 0 or 1, got {x!r}")
    lp = logit(p)
    q = float(_expit(w[None, :] @ lp)[0])
    return (q - x) * lp


def grad_norm_bound(d: int, eps: float) -> float:
    """Upper bound sqrt(d) * ln(1/eps) on the gradient 2-norm."""
    return float(np.sqrt(d) * np.log(1.0 / eps))
