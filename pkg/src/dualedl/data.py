"""Deterministic long-tailed synthetic datasets with controllable noise.

Classes are unit-variance isotropic Gaussians in feature space, with means
rescaled so the minimum pairwise distance equals ``class_separation``.
Per-class training counts follow the exponential profile
n_c = round(n_max * IR^(-c / (k-1))), giving a realized max/min ratio close to
the requested imbalance ratio.  The test split is balanced so per-class
accuracy is measurable on the tail.

Two impairments can be injected:

* ambiguous pairs (a, b, m): a fraction of class-a samples is replaced by the
  convex mixture (1 - m) x_a + m x_b and keeps label a.  This creates
  irreducible ambiguity (an aleatoric target) distinct from scarcity.
* label noise: training labels flip uniformly to another class at
  ``label_noise_rate``, either everywhere or restricted to tail classes.

Everything is a pure function of the spec, seed included.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

NOISE_SCOPES = ("all", "tail")

# Stream tags: means / train / test / network-init / shuffling share one seed
# but must not reuse draws.
_STREAM_MEANS = 1
_STREAM_TRAIN = 2
_STREAM_TEST = 3


@dataclass(frozen=True)
class LongTailSpec:
    """Parameters of one synthetic benchmark; defaults are the reference benchmark."""

    k: int = 10
    n_max: int = 400
    imbalance_ratio: float = 50.0
    feature_dim: int = 6
    class_separation: float = 2.5
    ambiguous_class_pairs: tuple = ((6, 7, 0.5), (8, 9, 0.5))
    ambiguous_fraction: float = 0.7
    label_noise_rate: float = 0.1
    noise_scope: str = "tail"
    test_per_class: int = 200
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(
            self,
            "ambiguous_class_pairs",
            tuple((int(a), int(b), float(m)) for a, b, m in self.ambiguous_class_pairs),
        )
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.imbalance_ratio < 1:
            raise ValueError("imbalance_ratio must be >= 1")
        if self.n_max < self.imbalance_ratio:
            raise ValueError("n_max must be >= imbalance_ratio so every class is non-empty")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be positive")
        if self.class_separation <= 0:
            raise ValueError("class_separation must be > 0")
        if not 0.0 <= self.label_noise_rate < 1.0:
            raise ValueError("label_noise_rate must lie in [0, 1)")
        if self.noise_scope not in NOISE_SCOPES:
            raise ValueError(f"noise_scope must be one of {NOISE_SCOPES}")
        if not 0.0 <= self.ambiguous_fraction <= 1.0:
            raise ValueError("ambiguous_fraction must lie in [0, 1]")
        if self.test_per_class < 1:
            raise ValueError("test_per_class must be positive")
        for a, b, m in self.ambiguous_class_pairs:
            if not (0 <= a < self.k and 0 <= b < self.k) or a == b:
                raise ValueError(f"ambiguous pair ({a}, {b}) is not two distinct classes")
            if not 0.0 <= m <= 1.0:
                raise ValueError("mix fraction must lie in [0, 1]")


@dataclass
class Dataset:
    """One split as parallel arrays; labels differ from clean labels only under noise."""

    features: np.ndarray
    labels: np.ndarray
    clean_labels: np.ndarray
    is_ambiguous: np.ndarray

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class HeadTailPartition:
    head: tuple
    tail: tuple

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(int(c) for c in self.head))
        object.__setattr__(self, "tail", tuple(int(c) for c in self.tail))


def class_counts(spec: LongTailSpec) -> np.ndarray:
    """Exponential long-tail profile, non-increasing in the class index."""
    k = spec.k
    exponents = -np.arange(k) / (k - 1)
    raw = spec.n_max * spec.imbalance_ratio ** exponents
    counts = np.floor(raw + 0.5).astype(np.int64)
    if (counts < 1).any():
        raise ValueError("long-tail profile produced an empty class")
    return counts


def partition_classes(counts) -> HeadTailPartition:
    """Head = ceil(k/3) most frequent classes; ties break toward lower index."""
    counts = np.asarray(counts)
    k = counts.size
    if k < 2:
        raise ValueError("need at least two classes to partition")
    order = np.argsort(-counts, kind="stable")
    n_head = -(-k // 3)
    return HeadTailPartition(
        head=tuple(sorted(int(c) for c in order[:n_head])),
        tail=tuple(sorted(int(c) for c in order[n_head:])),
    )


def _class_means(spec: LongTailSpec) -> np.ndarray:
    """Seeded Gaussian directions rescaled so min pairwise distance = separation."""
    rng = np.random.default_rng([spec.seed, _STREAM_MEANS])
    means = rng.standard_normal((spec.k, spec.feature_dim))
    dmin = min(
        float(np.linalg.norm(means[i] - means[j]))
        for i in range(spec.k)
        for j in range(i + 1, spec.k)
    )
    if dmin == 0.0:
        raise ValueError("degenerate class means; change the seed")
    return means * (spec.class_separation / dmin)


def _make_split(spec: LongTailSpec, means: np.ndarray, per_class: np.ndarray,
                rng: np.random.Generator, apply_noise: bool,
                tail_classes: tuple) -> Dataset:
    feats, labels, clean, amb = [], [], [], []
    for c in range(spec.k):
        n = int(per_class[c])
        x = means[c] + rng.standard_normal((n, spec.feature_dim))
        is_amb = np.zeros(n, dtype=bool)
        for a, b, m in spec.ambiguous_class_pairs:
            if a == c and n > 0:
                n_amb = int(np.floor(spec.ambiguous_fraction * n + 0.5))
                idx = rng.choice(n, size=n_amb, replace=False)
                partners = means[b] + rng.standard_normal((n_amb, spec.feature_dim))
                x[idx] = (1.0 - m) * x[idx] + m * partners
                is_amb[idx] = True
        feats.append(x)
        labels.append(np.full(n, c, dtype=np.int64))
        clean.append(np.full(n, c, dtype=np.int64))
        amb.append(is_amb)
    features = np.vstack(feats)
    labels = np.concatenate(labels)
    clean = np.concatenate(clean)
    is_ambiguous = np.concatenate(amb)
    if apply_noise and spec.label_noise_rate > 0:
        flip = rng.random(labels.size) < spec.label_noise_rate
        if spec.noise_scope == "tail":
            flip &= np.isin(clean, tail_classes)
        for i in np.where(flip)[0]:
            others = [c for c in range(spec.k) if c != clean[i]]
            labels[i] = others[rng.integers(len(others))]
    return Dataset(features=features, labels=labels, clean_labels=clean,
                   is_ambiguous=is_ambiguous)


def generate(spec: LongTailSpec) -> tuple[Dataset, Dataset, HeadTailPartition]:
    """Produce (train, test, partition); byte-deterministic for a given spec."""
    counts = class_counts(spec)
    partition = partition_classes(counts)
    means = _class_means(spec)
    train = _make_split(
        spec, means, counts,
        np.random.default_rng([spec.seed, _STREAM_TRAIN]),
        apply_noise=True, tail_classes=partition.tail,
    )
    test = _make_split(
        spec, means, np.full(spec.k, spec.test_per_class),
        np.random.default_rng([spec.seed, _STREAM_TEST]),
        apply_noise=False, tail_classes=partition.tail,
    )
    return train, test, partition


def realized_imbalance_ratio(train: Dataset) -> float:
    counts = np.bincount(train.clean_labels)
    return float(counts.max() / counts.min())


# ---------------------------------------------------------------------------
# CSV + sidecar persistence
# ---------------------------------------------------------------------------

def _write_split(path: Path, ds: Dataset) -> None:
    dim = ds.features.shape[1]
    header = ",".join([f"f{i}" for i in range(dim)] + ["label", "clean_label", "is_ambiguous"])
    lines = [header]
    for i in range(len(ds)):
        cells = [f"{v:.9g}" for v in ds.features[i]]
        cells += [str(int(ds.labels[i])), str(int(ds.clean_labels[i])),
                  str(int(ds.is_ambiguous[i]))]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _read_split(path: Path) -> Dataset:
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    dim = len(header) - 3
    if header != [f"f{i}" for i in range(dim)] + ["label", "clean_label", "is_ambiguous"]:
        raise ValueError(f"unexpected dataset header in {path}")
    rows = [line.split(",") for line in lines[1:]]
    features = np.array([[float(v) for v in r[:dim]] for r in rows], dtype=np.float64)
    labels = np.array([int(r[dim]) for r in rows], dtype=np.int64)
    clean = np.array([int(r[dim + 1]) for r in rows], dtype=np.int64)
    amb = np.array([bool(int(r[dim + 2])) for r in rows])
    return Dataset(features=features, labels=labels, clean_labels=clean, is_ambiguous=amb)


def save_dataset(out_dir, spec: LongTailSpec, train: Dataset, test: Dataset,
                 partition: HeadTailPartition) -> None:
    """Write train.csv / test.csv plus a sidecar JSON with the spec and partition."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_split(out / "train.csv", train)
    _write_split(out / "test.csv", test)
    sidecar = {
        "spec": asdict(spec),
        "partition": {"head": list(partition.head), "tail": list(partition.tail)},
        "train_class_counts": np.bincount(train.clean_labels, minlength=spec.k).tolist(),
    }
    (out / "dataset.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_dataset(in_dir) -> tuple[LongTailSpec, Dataset, Dataset, HeadTailPartition]:
    src = Path(in_dir)
    sidecar = json.loads((src / "dataset.json").read_text())
    raw_spec = dict(sidecar["spec"])
    raw_spec["ambiguous_class_pairs"] = tuple(
        tuple(p) for p in raw_spec["ambiguous_class_pairs"]
    )
    spec = LongTailSpec(**raw_spec)
    partition = HeadTailPartition(head=tuple(sidecar["partition"]["head"]),
                                  tail=tuple(sidecar["partition"]["tail"]))
    return spec, _read_split(src / "train.csv"), _read_split(src / "test.csv"), partition
