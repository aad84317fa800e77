"""Figure rendering for the report paths; every plot lands next to its CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_ACC_SERIES = (
    ("overall_acc", "overall"),
    ("avg_class_acc", "avg class"),
    ("head_acc", "head"),
    ("tail_acc", "tail"),
)
_UNC_SERIES = (
    ("mean_au_ambiguous", "AU ambiguous"),
    ("mean_au_clean", "AU clean"),
    ("mean_eu_tail", "EU tail"),
    ("mean_eu_head", "EU head"),
)


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_metrics(history, path) -> None:
    """Accuracy and uncertainty trajectories over epochs."""
    epochs = [row.epoch for row in history]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for attr, label in _ACC_SERIES:
        ax1.plot(epochs, [getattr(r, attr) for r in history], label=label)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("accuracy (%)")
    ax1.legend(fontsize=8)
    for attr, label in _UNC_SERIES:
        ax2.plot(epochs, [getattr(r, attr) for r in history], label=label)
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("uncertainty (nats)")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_correlation(pairs, rho: float, path) -> None:
    """Scatter of vacuity against entropy-based EU."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(pairs[:, 0], pairs[:, 1], s=4, alpha=0.4)
    ax.set_xlabel("vacuity K/S")
    ax.set_ylabel("entropy EU (nats)")
    ax.set_title(f"Spearman = {rho:.4f}")
    fig.tight_layout()
    _save(fig, path)


def render_ablation(results, path) -> None:
    """Grouped bars of the final accuracies per variant, std over seeds."""
    fields = ("overall_acc", "avg_class_acc", "head_acc", "tail_acc")
    labels = ("overall", "avg class", "head", "tail")
    width = 0.8 / len(results)
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, res in enumerate(results):
        xs = [i + j * width for i in range(len(fields))]
        ys = [getattr(res.mean, f) for f in fields]
        errs = [getattr(res.std, f) for f in fields]
        ax.bar(xs, ys, width=width, yerr=errs, capsize=3, label=res.variant)
    ax.set_xticks([i + width for i in range(len(fields))])
    ax.set_xticklabels(labels)
    ax.set_ylabel("accuracy (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_sweep(parameter: str, table, path) -> None:
    """Mean accuracy (with per-seed std) against the swept value."""
    values = [value for value, _, _ in table]
    fig, ax = plt.subplots(figsize=(5, 4))
    for attr, label in (("overall_acc", "overall"), ("avg_class_acc", "avg class")):
        means = [getattr(agg.mean, attr) for _, agg, _ in table]
        stds = [getattr(agg.std, attr) for _, agg, _ in table]
        ax.errorbar(values, means, yerr=stds, marker="o", capsize=3, label=label)
    ax.set_xlabel(parameter)
    ax.set_ylabel("accuracy (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
