"""Reference models the experiments compare against."""

from __future__ import annotations

import numpy as np

__all__ = ["OnlineBernoulliBaseline"]


class OnlineBernoulliBaseline:
    """Per-pixel independent Bernoulli with add-one (Laplace) smoothing.

    Predicts each pixel from its running frequency, independent of all
    other pixels; updated online, one image at a time, prediction taken
    before the update.
    """

    def __init__(self, n_pixels: int):
        self.ones = np.zeros(n_pixels)
        self.count = 0

    def probabilities(self) -> np.ndarray:
        return (self.ones + 1.0) / (self.count + 2.0)

    def logprob(self, image, update: bool = True) -> float:
        image = np.asarray(image)
        p = self.probabilities()
        q = np.where(image == 1, p, 1.0 - p)
        value = float(np.sum(np.log(q)))
        if update:
            self.ones += image
            self.count += 1
        return value

    def copy(self) -> "OnlineBernoulliBaseline":
        out = OnlineBernoulliBaseline(self.ones.shape[0])
        out.ones = self.ones.copy()
        out.count = self.count
        return out
