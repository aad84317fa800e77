"""Minimal evidence network with hand-derived backprop and a deterministic loop.

The network is a fully-connected ReLU stack whose final layer emits
non-negative per-class evidence through a softplus (default) or clamped
exponential.  Training wires the pipeline forward -> alpha -> uncertainty
decomposition -> policy -> weighted loss -> analytic gradient -> Adam with
decoupled weight decay and cosine learning-rate decay.  Every random draw is
derived from (seed, stream, epoch), so runs are bit-reproducible and a
serialized state resumes exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, HeadTailPartition
from .evidential import decompose_batch
from .losses import (
    AnnealSchedule,
    ace_grad_batch,
    ace_loss_batch,
    adjusted_alpha_batch,
    kl_grad_batch,
    kl_to_uniform_batch,
    lambda_at,
    smooth_labels_batch,
)
from .metrics import MetricsRow
from .policy import (
    PolicyConfig,
    normalize_weights,
    smoothings_from_arrays,
    weights_from_arrays,
)
from .special_math import sigmoid

STATE_FORMAT = "dualedl-state-v1"

_STREAM_INIT = 4
_STREAM_SHUFFLE = 5

EVIDENCE_ACTIVATIONS = ("softplus", "exp_clamped")


class NonFiniteLossError(RuntimeError):
    """Raised when a sample's loss stops being finite; carries the culprit."""

    def __init__(self, sample_index: int, alpha: np.ndarray):
        self.sample_index = sample_index
        self.alpha = np.asarray(alpha)
        super().__init__(
            f"non-finite loss at sample {sample_index}; alpha = {self.alpha.tolist()}"
        )


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    k: int
    hidden_dims: tuple = (64, 64)
    evidence_activation: str = "softplus"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1 or self.k < 2:
            raise ValueError("need input_dim >= 1 and k >= 2")
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden widths must be positive")
        if self.evidence_activation not in EVIDENCE_ACTIVATIONS:
            raise ValueError(f"evidence_activation must be one of {EVIDENCE_ACTIVATIONS}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 1

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        # lr = 0 is allowed so a frozen-optimizer run stays expressible
        if not 0 <= self.lr_end <= self.lr_start:
            raise ValueError("need 0 <= lr_end <= lr_start")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


class Network:
    """Feed-forward evidence network; parameters are plain float64 arrays."""

    def __init__(self, spec: NetworkSpec, weights, biases):
        dims = [spec.input_dim, *spec.hidden_dims, spec.k]
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise ValueError("parameter count does not match the layer layout")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise ValueError(f"layer {i} parameter shape mismatch")
        self.spec = spec
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]

    @classmethod
    def initialize(cls, spec: NetworkSpec, seed: int) -> "Network":
        """Fan-in-scaled uniform weights, zero biases, seeded."""
        rng = np.random.default_rng([seed, _STREAM_INIT])
        dims = [spec.input_dim, *spec.hidden_dims, spec.k]
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            lim = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-lim, lim, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(spec, weights, biases)

    def _evidence(self, z_out: np.ndarray) -> np.ndarray:
        if self.spec.evidence_activation == "softplus":
            return np.logaddexp(0.0, z_out)
        return np.exp(np.clip(z_out, -30.0, 30.0))

    def _evidence_grad(self, z_out: np.ndarray, evidence: np.ndarray) -> np.ndarray:
        if self.spec.evidence_activation == "softplus":
            return np.asarray(sigmoid(z_out), dtype=np.float64)
        return np.where(np.abs(z_out) < 30.0, evidence, 0.0)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evidence vector(s) for a sample or batch; deterministic and pure."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.spec.input_dim:
            raise ValueError(f"expected input_dim {self.spec.input_dim}, got {x.shape[1]}")
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = np.maximum(z, 0.0) if i < len(self.weights) - 1 else z
        ev = self._evidence(h)
        return ev[0] if single else ev

    def forward_cached(self, x: np.ndarray):
        """Batched forward returning (alpha, cache) for a later backward pass."""
        x = np.asarray(x, dtype=np.float64)
        hs = [x]
        zs = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = hs[-1] @ w + b
            zs.append(z)
            hs.append(np.maximum(z, 0.0) if i < len(self.weights) - 1 else z)
        ev = self._evidence(zs[-1])
        alpha = ev + 1.0
        return alpha, (hs, zs, ev)

    def backward(self, cache, grad_alpha: np.ndarray):
        """Parameter gradients given d(loss)/d(alpha) for the cached batch."""
        hs, zs, ev = cache
        if grad_alpha.shape != zs[-1].shape:
            raise ValueError("grad_alpha shape does not match the cached batch")
        delta = grad_alpha * self._evidence_grad(zs[-1], ev)
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = hs[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (zs[i - 1] > 0)
        return grads_w, grads_b


class Adam:
    """Adaptive-moment optimizer with decoupled weight decay."""

    def __init__(self, network: Network, beta1: float, beta2: float, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m_w = [np.zeros_like(w) for w in network.weights]
        self.v_w = [np.zeros_like(w) for w in network.weights]
        self.m_b = [np.zeros_like(b) for b in network.biases]
        self.v_b = [np.zeros_like(b) for b in network.biases]

    def step(self, network: Network, grads_w, grads_b, lr: float, weight_decay: float):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        params = list(zip(network.weights, grads_w, self.m_w, self.v_w))
        params += list(zip(network.biases, grads_b, self.m_b, self.v_b))
        for p, g, m, v in params:
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            p *= 1.0 - lr * weight_decay


@dataclass
class TrainState:
    """Everything needed to resume a run and get the uninterrupted trajectory."""

    network: Network
    optimizer: Adam
    epoch: int
    seed: int
    history: list = field(default_factory=list)


def cosine_lr(cfg: TrainConfig, epoch: int) -> float:
    """lr_end + 0.5 (lr_start - lr_end) (1 + cos(pi epoch / epochs))."""
    if not 0 <= epoch <= cfg.epochs:
        raise ValueError("epoch outside [0, epochs]")
    if cfg.epochs == 0:
        return cfg.lr_start
    return cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) * (
        1.0 + np.cos(np.pi * epoch / cfg.epochs)
    )


def _policy_arrays(bu, policy_cfg: PolicyConfig):
    w = weights_from_arrays(bu.vacuity, bu.eu, policy_cfg)
    if policy_cfg.normalize_weights:
        w = normalize_weights(w)
    eps = smoothings_from_arrays(bu.au, policy_cfg)
    return w, eps


def train(train_data: Dataset, test_data: Dataset, partition: HeadTailPartition,
          net_spec: NetworkSpec, cfg: TrainConfig, policy_cfg: PolicyConfig,
          schedule: AnnealSchedule, state: TrainState | None = None,
          stop_epoch: int | None = None):
    """Run (or resume) training; returns (TrainState, final MetricsRow).

    Per batch: forward -> alpha -> decomposition -> policy (weights and
    smoothing factors, treated as constants) -> per-sample weighted loss,
    mean-aggregated -> analytic gradient -> Adam step.  Metrics are computed
    on the balanced test split after every epoch.

    ``stop_epoch`` interrupts after that many epochs without touching the
    cosine/anneal horizons, so a saved state resumed later reproduces the
    uninterrupted run exactly.
    """
    if state is None:
        network = Network.initialize(net_spec, cfg.seed)
        state = TrainState(
            network=network,
            optimizer=Adam(network, cfg.beta1, cfg.beta2),
            epoch=0,
            seed=cfg.seed,
            history=[],
        )
    network, optimizer = state.network, state.optimizer
    n = len(train_data)
    k = net_spec.k
    targets = np.zeros((n, k), dtype=np.float64)
    targets[np.arange(n), train_data.labels] = 1.0

    last = cfg.epochs if stop_epoch is None else min(stop_epoch, cfg.epochs)
    for epoch in range(state.epoch, last):
        lr = cosine_lr(cfg, epoch)
        lam = lambda_at(schedule, epoch)
        perm = np.random.default_rng([cfg.seed, _STREAM_SHUFFLE, epoch]).permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            x = train_data.features[idx]
            y_hard = targets[idx]
            alpha, cache = network.forward_cached(x)
            if not np.isfinite(alpha).all():
                bad = int(np.flatnonzero(~np.isfinite(alpha).all(axis=1))[0])
                raise NonFiniteLossError(int(idx[bad]), alpha[bad])
            bu = decompose_batch(alpha)
            w, eps = _policy_arrays(bu, policy_cfg)
            y_soft = smooth_labels_batch(y_hard, eps)
            alpha_tilde = adjusted_alpha_batch(alpha, y_hard)
            totals = w * ace_loss_batch(alpha, y_soft) + lam * kl_to_uniform_batch(alpha_tilde)
            if not np.isfinite(totals).all():
                bad = int(np.flatnonzero(~np.isfinite(totals))[0])
                raise NonFiniteLossError(int(idx[bad]), alpha[bad])
            grad_alpha = (
                w[:, None] * ace_grad_batch(alpha, y_soft)
                + lam * (1.0 - y_hard) * kl_grad_batch(alpha_tilde)
            ) / idx.size
            grads_w, grads_b = network.backward(cache, grad_alpha)
            optimizer.step(network, grads_w, grads_b, lr, cfg.weight_decay)
        state.epoch = epoch + 1
        state.history.append(evaluate(network, test_data, partition, epoch=epoch))
    final = state.history[-1] if state.history else evaluate(
        network, test_data, partition, epoch=-1
    )
    return state, final


def evaluate(network: Network, test_data: Dataset, partition: HeadTailPartition,
             epoch: int) -> MetricsRow:
    """Accuracy and uncertainty summaries on the (balanced) test split.

    Predictions take argmax of alpha, which equals argmax of the expected
    probability.  mean_au_clean is restricted to non-ambiguous samples of the
    classes that contain ambiguous ones, so it is directly comparable with
    mean_au_ambiguous; with no ambiguity configured it covers all samples and
    mean_au_ambiguous is NaN.
    """
    alpha, _ = network.forward_cached(test_data.features)
    bu = decompose_batch(alpha)
    pred = alpha.argmax(axis=1)
    labels = test_data.labels
    k = network.spec.k
    per_class = np.empty(k)
    for c in range(k):
        mask = labels == c
        if not mask.any():
            raise ValueError(f"test split has no samples of class {c}")
        per_class[c] = (pred[mask] == c).mean() * 100.0
    head = list(partition.head)
    tail = list(partition.tail)
    amb = test_data.is_ambiguous
    if amb.any():
        amb_classes = np.unique(test_data.clean_labels[amb])
        clean_mask = np.isin(test_data.clean_labels, amb_classes) & ~amb
        mean_au_amb = float(bu.au[amb].mean())
        mean_au_clean = float(bu.au[clean_mask].mean()) if clean_mask.any() else float("nan")
    else:
        mean_au_amb = float("nan")
        mean_au_clean = float(bu.au.mean())
    tail_mask = np.isin(test_data.clean_labels, tail)
    head_mask = np.isin(test_data.clean_labels, head)
    return MetricsRow(
        epoch=epoch,
        overall_acc=float((pred == labels).mean() * 100.0),
        avg_class_acc=float(per_class.mean()),
        head_acc=float(per_class[head].mean()),
        tail_acc=float(per_class[tail].mean()),
        mean_au_ambiguous=mean_au_amb,
        mean_au_clean=mean_au_clean,
        mean_eu_tail=float(bu.eu[tail_mask].mean()),
        mean_eu_head=float(bu.eu[head_mask].mean()),
    )


# ---------------------------------------------------------------------------
# state persistence
# ---------------------------------------------------------------------------

def save_state(state: TrainState, path, extra_json: str | None = None) -> None:
    """Serialize a TrainState to a single npz file tagged with STATE_FORMAT."""
    spec = state.network.spec
    payload = {
        "format": np.array(STATE_FORMAT),
        "epoch": np.array(state.epoch),
        "seed": np.array(state.seed),
        "adam_t": np.array(state.optimizer.t),
        "adam_beta1": np.array(state.optimizer.beta1),
        "adam_beta2": np.array(state.optimizer.beta2),
        "adam_eps": np.array(state.optimizer.eps),
        "net_spec": np.array(json.dumps({
            "input_dim": spec.input_dim,
            "k": spec.k,
            "hidden_dims": list(spec.hidden_dims),
            "evidence_activation": spec.evidence_activation,
        })),
        "history": np.array([row.as_tuple() for row in state.history], dtype=np.float64),
        "extra": np.array(extra_json if extra_json is not None else ""),
    }
    for i, (w, b) in enumerate(zip(state.network.weights, state.network.biases)):
        payload[f"w{i}"] = w
        payload[f"b{i}"] = b
        payload[f"mw{i}"] = state.optimizer.m_w[i]
        payload[f"vw{i}"] = state.optimizer.v_w[i]
        payload[f"mb{i}"] = state.optimizer.m_b[i]
        payload[f"vb{i}"] = state.optimizer.v_b[i]
    np.savez(path, **payload)


def load_state(path) -> tuple[TrainState, str]:
    """Load a TrainState; returns (state, extra_json)."""
    with np.load(path, allow_pickle=False) as f:
        if str(f["format"]) != STATE_FORMAT:
            raise ValueError(f"unsupported state format {f['format']}")
        raw = json.loads(str(f["net_spec"]))
        spec = NetworkSpec(
            input_dim=int(raw["input_dim"]),
            k=int(raw["k"]),
            hidden_dims=tuple(raw["hidden_dims"]),
            evidence_activation=raw["evidence_activation"],
        )
        n_layers = len(spec.hidden_dims) + 1
        weights = [f[f"w{i}"] for i in range(n_layers)]
        biases = [f[f"b{i}"] for i in range(n_layers)]
        network = Network(spec, weights, biases)
        optimizer = Adam(network, float(f["adam_beta1"]), float(f["adam_beta2"]),
                         float(f["adam_eps"]))
        optimizer.t = int(f["adam_t"])
        optimizer.m_w = [np.array(f[f"mw{i}"]) for i in range(n_layers)]
        optimizer.v_w = [np.array(f[f"vw{i}"]) for i in range(n_layers)]
        optimizer.m_b = [np.array(f[f"mb{i}"]) for i in range(n_layers)]
        optimizer.v_b = [np.array(f[f"vb{i}"]) for i in range(n_layers)]
        history_arr = f["history"]
        history = [MetricsRow.from_tuple(row) for row in history_arr]
        state = TrainState(
            network=network,
            optimizer=optimizer,
            epoch=int(f["epoch"]),
            seed=int(f["seed"]),
            history=history,
        )
        extra = str(f["extra"])
    return state, extra
