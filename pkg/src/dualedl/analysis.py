"""Experiment runners: the vacuity-vs-entropy-EU correlation study, the
three-variant ablation, and hyperparameter sweeps.

Variant runs differ only in the policy flags; for a given seed the dataset and
initial parameters are regenerated per variant and asserted bit-identical by
hashing, so any accuracy difference is attributable to the policy alone.
Independent (variant, seed) runs can execute in parallel; results are merged
by key, so the output never depends on completion order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .data import generate
from .evidential import decompose_batch
from .metrics import MetricsRow, format_float, spearman
from .trainer import Network, train

ABLATION_VARIANTS = ("edl_only", "edl_eu", "edl_eu_au")
_VARIANT_FLAGS = {
    "edl_only": (False, False),
    "edl_eu": (True, False),
    "edl_eu_au": (True, True),
}
SWEEP_PARAMETERS = ("sigma", "epsilon")


@dataclass(frozen=True)
class AblationResult:
    """Mean/std over seeds of the final-epoch metrics for one variant."""

    variant: str
    seeds: tuple
    mean: MetricsRow
    std: MetricsRow


@dataclass(frozen=True)
class RunRecord:
    variant: str
    seed: int
    row: MetricsRow
    data_hash: str
    init_hash: str


def synthetic_alpha_sampler(n: int, k: int, seed: int) -> np.ndarray:
    """Random Dirichlet states: total evidence ~ LogUniform[0.1, 100],
    direction ~ Dirichlet(1)."""
    rng = np.random.default_rng(seed)
    total = np.exp(rng.uniform(np.log(0.1), np.log(100.0), size=n))
    direction = rng.dirichlet(np.ones(k), size=n)
    return total[:, None] * direction + 1.0


def _pairs_from_alpha(alpha: np.ndarray) -> np.ndarray:
    bu = decompose_batch(alpha)
    return np.column_stack([bu.vacuity, bu.eu])


def correlation_study(source, n: int, seed: int, k: int = 10):
    """Collect n (vacuity, entropy-EU) pairs and their Spearman coefficient.

    ``source`` is either the string "synthetic" or a (network, features)
    tuple whose forward pass supplies the Dirichlet states.  Returns
    (spearman, pairs) with pairs shaped (n, 2) for plotting.
    """
    if n < 100:
        raise ValueError("correlation study needs n >= 100 pairs")
    if source == "synthetic":
        alpha = synthetic_alpha_sampler(n, k, seed)
    else:
        network, features = source
        if not isinstance(network, Network):
            raise ValueError("model source must be a (Network, features) pair")
        if features.shape[0] < n:
            raise ValueError(f"model source provides {features.shape[0]} < n = {n} samples")
        alpha = network.forward(features[:n]) + 1.0
    pairs = _pairs_from_alpha(alpha)
    rho = spearman(pairs[:, 0], pairs[:, 1])
    return rho, pairs


def _hash_arrays(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


def _run_one(args) -> RunRecord:
    """Train one (variant, seed) and return its final metrics; a pure function."""
    config, variant, seed = args
    reweight, smoothing = _VARIANT_FLAGS[variant]
    policy = replace(config.policy, reweight_enabled=reweight, smoothing_enabled=smoothing)
    cfg = config.with_seed(seed)
    train_data, test_data, partition = generate(cfg.data)
    net_spec = cfg.network_spec()
    init = Network.initialize(net_spec, cfg.train.seed)
    data_hash = _hash_arrays(train_data.features, train_data.labels,
                             test_data.features, test_data.labels)
    init_hash = _hash_arrays(*init.weights, *init.biases)
    state, final = train(train_data, test_data, partition, net_spec, cfg.train,
                         policy, cfg.schedule)
    return RunRecord(variant=variant, seed=seed, row=final,
                     data_hash=data_hash, init_hash=init_hash)


def _execute(tasks, jobs: int):
    if jobs <= 1:
        return [_run_one(t) for t in tasks]
    with get_context("fork").Pool(processes=jobs) as pool:
        return pool.map(_run_one, tasks)


def _aggregate(variant: str, seeds, rows) -> AblationResult:
    table = np.array([r.as_tuple() for r in rows], dtype=np.float64)
    mean = MetricsRow.from_tuple(table.mean(axis=0))
    std = MetricsRow.from_tuple(table.std(axis=0, ddof=0))
    return AblationResult(variant=variant, seeds=tuple(seeds), mean=mean, std=std)


def ablate(config: ExperimentConfig, seeds, jobs: int = 1):
    """Run the three policy variants over the given seeds.

    Returns (results, runs): per-variant aggregates plus every individual
    RunRecord.  Raises if dataset or initialization hashes differ across
    variants of the same seed.
    """
    seeds = [int(s) for s in seeds]
    if len(seeds) < 3:
        raise ValueError("ablation needs at least 3 seeds")
    tasks = [(config, variant, seed) for variant in ABLATION_VARIANTS for seed in seeds]
    records = _execute(tasks, jobs)
    by_key = {(r.variant, r.seed): r for r in records}
    for seed in seeds:
        group = [by_key[(v, seed)] for v in ABLATION_VARIANTS]
        if len({g.data_hash for g in group}) != 1 or len({g.init_hash for g in group}) != 1:
            raise AssertionError(f"variants of seed {seed} diverged in data or init")
    results = [
        _aggregate(v, seeds, [by_key[(v, s)].row for s in seeds])
        for v in ABLATION_VARIANTS
    ]
    runs = [by_key[(v, s)] for v in ABLATION_VARIANTS for s in seeds]
    return results, runs


def sweep(parameter: str, values, config: ExperimentConfig, seeds, jobs: int = 1):
    """Full-policy runs across values of sigma or epsilon (the other fixed).

    Returns a list of (value, AblationResult-like aggregate, run rows).
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}")
    values = [float(v) for v in values]
    if not values:
        raise ValueError("sweep needs at least one value")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    out = []
    for value in values:
        policy = replace(config.policy, **{parameter: value},
                         reweight_enabled=True, smoothing_enabled=True)
        cfg = replace(config, policy=policy)
        tasks = [(cfg, "edl_eu_au", seed) for seed in seeds]
        records = _execute(tasks, jobs)
        by_seed = {r.seed: r for r in records}
        rows = [by_seed[s].row for s in seeds]
        out.append((value, _aggregate("edl_eu_au", seeds, rows),
                    [(s, by_seed[s].row) for s in seeds]))
    return out


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

_ACC_FIELDS = ("overall_acc", "avg_class_acc", "head_acc", "tail_acc")


def write_ablation_csv(path, results, runs) -> None:
    """Per-run rows plus one mean row per variant (seed column = "mean")."""
    lines = ["variant,seed," + ",".join(_ACC_FIELDS)]
    for rec in runs:
        cells = [rec.variant, str(rec.seed)]
        cells += [format_float(getattr(rec.row, f)) for f in _ACC_FIELDS]
        lines.append(",".join(cells))
    for res in results:
        cells = [res.variant, "mean"]
        cells += [format_float(getattr(res.mean, f)) for f in _ACC_FIELDS]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_csv(path, parameter: str, table) -> None:
    """Per-seed rows and a mean row per swept value."""
    lines = [f"{parameter},seed,overall_acc,avg_class_acc"]
    for value, agg, rows in table:
        for seed, row in rows:
            lines.append(
                f"{format_float(value)},{seed},"
                f"{format_float(row.overall_acc)},{format_float(row.avg_class_acc)}"
            )
        lines.append(
            f"{format_float(value)},mean,"
            f"{format_float(agg.mean.overall_acc)},{format_float(agg.mean.avg_class_acc)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
