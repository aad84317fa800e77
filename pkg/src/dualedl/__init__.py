"""Dirichlet evidence modeling with dual uncertainty-driven training policies.

The library decomposes predictive uncertainty into its aleatoric and
epistemic parts from a single forward pass of an evidence network, then uses
the epistemic side to reweight scarce samples and the aleatoric side to adapt
label smoothing.  A deterministic desk-scale trainer, a synthetic long-tailed
data generator, and experiment runners make every formula testable on a CPU.
"""

from .data import (
    Dataset,
    HeadTailPartition,
    LongTailSpec,
    class_counts,
    generate,
    partition_classes,
)
from .evidential import (
    DirichletState,
    UncertaintyReport,
    aleatoric_uncertainty,
    beliefs,
    decompose,
    decompose_batch,
    expected_probability,
    mc_expected_entropy,
    to_dirichlet,
    vacuity,
)
from .losses import (
    AnnealSchedule,
    LossBreakdown,
    ace_grad_alpha,
    ace_loss,
    adjusted_alpha,
    dual_loss,
    edl_loss,
    kl_grad_alpha,
    kl_to_uniform,
    lambda_at,
    one_hot,
)
from .metrics import MetricsRow, spearman
from .policy import PolicyConfig, SamplePolicy, au_smoothing, batch_policy, eu_weight
from .special_math import digamma, log_gamma, shannon_entropy, sigmoid, trigamma
from .trainer import (
    Adam,
    Network,
    NetworkSpec,
    NonFiniteLossError,
    TrainConfig,
    TrainState,
    cosine_lr,
    evaluate,
    load_state,
    save_state,
    train,
)

__version__ = "0.1.0"
