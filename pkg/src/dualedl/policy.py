"""Uncertainty-driven training policy: loss weights and smoothing factors.

Epistemic uncertainty picks out under-learned samples, so the loss weight is
w = (2 * EU)^sigma; the factor 2 stretches the vacuity range (0, 1] to (0, 2]
before the exponent.  Aleatoric uncertainty flags ambiguous samples, so the
smoothing factor is eps~ = sigmoid(AU) * eps.  Both are computed from the
current forward pass and carry no gradient: the trainer treats them as
constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evidential import UncertaintyReport
from .special_math import sigmoid

EU_SOURCES = ("vacuity", "entropy_decomposition")


@dataclass(frozen=True)
class PolicyConfig:
    sigma: float = 3.0
    epsilon: float = 0.2
    eu_source: str = "vacuity"
    reweight_enabled: bool = True
    smoothing_enabled: bool = True
    normalize_weights: bool = False

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError("sigma must be finite and >= 0")
        if not np.isfinite(self.epsilon) or not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.eu_source not in EU_SOURCES:
            raise ValueError(f"eu_source must be one of {EU_SOURCES}")


@dataclass(frozen=True)
class SamplePolicy:
    """Per-sample outcome: loss weight w and smoothing factor eps~."""

    weight: float
    smoothing: float


def weights_from_arrays(vacuity: np.ndarray, eu: np.ndarray,
                        cfg: PolicyConfig) -> np.ndarray:
    """Vectorized EU reweighting; returns all-ones when disabled."""
    if not cfg.reweight_enabled:
        return np.ones_like(np.asarray(vacuity, dtype=np.float64))
    base = vacuity if cfg.eu_source == "vacuity" else eu
    return (2.0 * np.asarray(base, dtype=np.float64)) ** cfg.sigma


def smoothings_from_arrays(au: np.ndarray, cfg: PolicyConfig) -> np.ndarray:
    """Vectorized AU-adaptive smoothing; returns zeros when disabled."""
    au = np.asarray(au, dtype=np.float64)
    if not cfg.smoothing_enabled:
        return np.zeros_like(au)
    return np.asarray(sigmoid(au), dtype=np.float64) * cfg.epsilon


def eu_weight(report: UncertaintyReport, cfg: PolicyConfig) -> float:
    """Loss weight (2 * EU)^sigma with EU taken from the configured source."""
    w = weights_from_arrays(np.array([report.vacuity]), np.array([report.eu]), cfg)
    return float(w[0])


def au_smoothing(report: UncertaintyReport, cfg: PolicyConfig) -> float:
    """Smoothing factor sigmoid(AU) * epsilon."""
    s = smoothings_from_arrays(np.array([report.au]), cfg)
    return float(s[0])


def normalize_weights(w: np.ndarray) -> np.ndarray:
    """Divide weights by their batch mean.

    An all-identical batch is mapped to exactly 1.0 (the fixed point of the
    normalization), sidestepping the mean's rounding.
    """
    if np.all(w == w[0]):
        return np.ones_like(w)
    return w / w.mean()


def batch_policy(reports, cfg: PolicyConfig) -> list[SamplePolicy]:
    """Apply the policy to a batch of reports.

    With normalize_weights on, weights are divided by their batch mean so the
    batch mean becomes 1.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("batch_policy requires a non-empty batch")
    vac = np.array([r.vacuity for r in reports])
    eu = np.array([r.eu for r in reports])
    au = np.array([r.au for r in reports])
    w = weights_from_arrays(vac, eu, cfg)
    if cfg.normalize_weights:
        w = normalize_weights(w)
    s = smoothings_from_arrays(au, cfg)
    return [SamplePolicy(weight=float(wi), smoothing=float(si)) for wi, si in zip(w, s)]
