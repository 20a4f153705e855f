"""Log-log slope regression for asymptotic-order estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitFailure


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float  # RMS of natural-log residuals
    t: tuple[float, ...]
    values: tuple[float, ...]

    def predict(self, t) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(t, dtype=float) ** self.slope


def fit_loglog(t, values) -> SlopeFit:
    """Least-squares fit of log(value) = slope * log(t) + intercept."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2 or len(np.unique(t)) < 2:
        raise FitFailure("a slope needs at least two distinct t values")
    if np.any(t <= 0) or np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise FitFailure("log-log fit needs positive finite data")
    X = np.stack([np.log(t), np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(X, np.log(v), rcond=None)
    res = np.log(v) - X @ coef
    return SlopeFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res ** 2))),
                    tuple(map(float, t)), tuple(map(float, v)))
