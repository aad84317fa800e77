"""Evidential losses and their analytic gradients with respect to alpha.

The adjusted cross-entropy is the expected cross-entropy under the Dirichlet,
sum_j y_j (psi(S) - psi(alpha_j)); it accepts any target distribution with
sum(y) = 1, so smoothed labels reuse the same form.  The regularizer is the
KL divergence from Dirichlet(alpha~) to the uniform Dirichlet, where alpha~
keeps only incorrect-class evidence: alpha~ = y + (1 - y) * alpha built from
the hard one-hot label.  The annealed combination and the policy-weighted
final loss are provided as breakdowns so callers can audit each term.

Scalar entry points delegate to the batch implementations, so per-sample and
batched training paths produce bit-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evidential import DirichletState
from .special_math import digamma, log_gamma, trigamma


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear ramp of the KL balancing factor: 0 -> lambda_max over anneal_epochs."""

    lambda_max: float = 0.2
    anneal_epochs: int = 10

    def __post_init__(self):
        if not np.isfinite(self.lambda_max) or self.lambda_max < 0:
            raise ValueError("lambda_max must be finite and >= 0")
        if self.anneal_epochs < 1:
            raise ValueError("anneal_epochs must be a positive integer")


@dataclass(frozen=True)
class LossBreakdown:
    """One sample's loss terms: total = weight * ace + lambda_t * kl."""

    ace: float
    kl: float
    weight: float
    lambda_t: float
    total: float


def one_hot(label: int, k: int) -> np.ndarray:
    """One-hot target vector of length k."""
    if not 0 <= label < k:
        raise ValueError(f"label {label} outside [0, {k})")
    y = np.zeros(k, dtype=np.float64)
    y[label] = 1.0
    return y


def _check_label(y, k: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (k,):
        raise ValueError(f"label vector has shape {y.shape}, expected ({k},)")
    if not np.isfinite(y).all() or (y < 0).any():
        raise ValueError("label entries must be finite and >= 0")
    if abs(y.sum() - 1.0) > 1e-12:
        raise ValueError("label entries must sum to 1 within 1e-12")
    return y


def _check_one_hot(y, k: int) -> np.ndarray:
    y = _check_label(y, k)
    if np.count_nonzero(y == 1.0) != 1 or np.count_nonzero(y) != 1:
        raise ValueError("expected a one-hot label")
    return y


# ---------------------------------------------------------------------------
# batch implementations (alpha: (n, K), Y: (n, K))
# ---------------------------------------------------------------------------

def ace_loss_batch(alpha: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Row-wise sum_j y_j (psi(S) - psi(alpha_j))."""
    strength = alpha.sum(axis=1)
    psi_s = np.asarray(digamma(strength), dtype=np.float64)
    psi_a = np.asarray(digamma(alpha), dtype=np.float64)
    return (targets * (psi_s[:, None] - psi_a)).sum(axis=1)


def ace_grad_batch(alpha: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """d ace / d alpha_k = psi1(S) - y_k psi1(alpha_k) (uses sum_j y_j = 1)."""
    strength = alpha.sum(axis=1)
    tri_s = np.asarray(trigamma(strength), dtype=np.float64)
    tri_a = np.asarray(trigamma(alpha), dtype=np.float64)
    return tri_s[:, None] - targets * tri_a


def adjusted_alpha_batch(alpha: np.ndarray, hard_targets: np.ndarray) -> np.ndarray:
    """alpha~ = y + (1 - y) * alpha: correct-class entry reset to 1."""
    return hard_targets + (1.0 - hard_targets) * alpha


def kl_to_uniform_batch(alpha_tilde: np.ndarray) -> np.ndarray:
    """Row-wise KL( Dirichlet(alpha~) || Dirichlet(1) ).

    Rounding can push the analytically non-negative result a few 1e-19 below
    zero at the uniform state; such values are clamped to exactly 0.  Anything
    below -1e-9 is a special-function defect and raises.
    """
    k = alpha_tilde.shape[1]
    st = alpha_tilde.sum(axis=1)
    lg_st = np.asarray(log_gamma(st), dtype=np.float64)
    lg_a = np.asarray(log_gamma(alpha_tilde), dtype=np.float64)
    lg_k = float(log_gamma(float(k)))
    psi_st = np.asarray(digamma(st), dtype=np.float64)
    psi_a = np.asarray(digamma(alpha_tilde), dtype=np.float64)
    gap = (alpha_tilde - 1.0) * (psi_a - psi_st[:, None])
    raw = lg_st - lg_k - lg_a.sum(axis=1) + gap.sum(axis=1)
    if (raw < -1e-9).any():
        i = int(np.argmin(raw))
        raise ArithmeticError(f"KL came out {raw[i]:.3e} < -1e-9 at row {i}")
    return np.maximum(raw, 0.0)


def kl_grad_batch(alpha_tilde: np.ndarray) -> np.ndarray:
    """d KL / d alpha~_k = (alpha~_k - 1) psi1(alpha~_k) - psi1(S~) sum_j (alpha~_j - 1).

    The digamma terms of the naive differentiation cancel exactly; only the
    trigamma terms survive, which is also what makes the gradient vanish at
    alpha~ = 1.
    """
    st = alpha_tilde.sum(axis=1)
    tri_st = np.asarray(trigamma(st), dtype=np.float64)
    tri_a = np.asarray(trigamma(alpha_tilde), dtype=np.float64)
    excess = (alpha_tilde - 1.0).sum(axis=1)
    return (alpha_tilde - 1.0) * tri_a - (tri_st * excess)[:, None]


def smooth_labels_batch(hard_targets: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """y~ = (1 - eps) y + eps / K with a per-row smoothing factor."""
    k = hard_targets.shape[1]
    return (1.0 - eps)[:, None] * hard_targets + (eps / k)[:, None]


# ---------------------------------------------------------------------------
# scalar surface
# ---------------------------------------------------------------------------

def ace_loss(d: DirichletState, y) -> float:
    """Adjusted cross-entropy for one sample; accepts one-hot or smoothed y."""
    y = _check_label(y, d.k)
    return float(ace_loss_batch(d.alpha[None, :], y[None, :])[0])


def ace_grad_alpha(d: DirichletState, y) -> np.ndarray:
    """Analytic gradient of ace_loss with respect to alpha."""
    y = _check_label(y, d.k)
    return ace_grad_batch(d.alpha[None, :], y[None, :])[0]


def adjusted_alpha(d: DirichletState, y_hard) -> DirichletState:
    """Replace the labeled class's alpha entry by 1, keeping the rest."""
    y = _check_one_hot(y_hard, d.k)
    return DirichletState(adjusted_alpha_batch(d.alpha[None, :], y[None, :])[0])


def kl_to_uniform(d_tilde: DirichletState) -> float:
    """KL( Dirichlet(alpha~) || Dirichlet(1) ); >= 0, zero only at alpha~ = 1."""
    return float(kl_to_uniform_batch(d_tilde.alpha[None, :])[0])


def kl_grad_alpha(d_tilde: DirichletState) -> np.ndarray:
    """Analytic gradient of kl_to_uniform with respect to alpha~."""
    return kl_grad_batch(d_tilde.alpha[None, :])[0]


def lambda_at(schedule: AnnealSchedule, epoch: int) -> float:
    """Annealing factor lambda_t = lambda_max * min(1, epoch / anneal_epochs)."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return schedule.lambda_max * min(1.0, epoch / schedule.anneal_epochs)


def dual_loss(d: DirichletState, y_hard, weight: float, eps_tilde: float,
              lambda_t: float) -> LossBreakdown:
    """Policy-weighted loss: weight * ace(alpha, y~) + lambda_t * kl(alpha~).

    The smoothed label y~ = (1 - eps~) y + eps~/K enters only the adjusted
    cross-entropy; the KL adjustment alpha~ always uses the hard label, so the
    penalty keeps shrinking all incorrect-class evidence.
    """
    y = _check_one_hot(y_hard, d.k)
    if not (np.isfinite(weight) and weight >= 0):
        raise ValueError("weight must be finite and >= 0")
    if not (np.isfinite(eps_tilde) and 0.0 <= eps_tilde < 1.0):
        raise ValueError("eps_tilde must lie in [0, 1)")
    if not np.isfinite(lambda_t):
        raise ValueError("lambda_t must be finite")
    smoothed = smooth_labels_batch(y[None, :], np.array([eps_tilde]))[0]
    ace = float(ace_loss_batch(d.alpha[None, :], smoothed[None, :])[0])
    kl = float(kl_to_uniform_batch(adjusted_alpha_batch(d.alpha[None, :], y[None, :]))[0])
    total = weight * ace + lambda_t * kl
    return LossBreakdown(ace=ace, kl=kl, weight=weight, lambda_t=lambda_t, total=total)


def edl_loss(d: DirichletState, y_hard, lambda_t: float) -> LossBreakdown:
    """Annealed evidential loss: ace + lambda_t * kl.  Equals dual_loss at (1, 0)."""
    return dual_loss(d, y_hard, weight=1.0, eps_tilde=0.0, lambda_t=lambda_t)
