"""Tests for the long-tailed synthetic data generator."""

import numpy as np
import pytest

from dualedl.data import (
    Dataset,
    LongTailSpec,
    class_counts,
    generate,
    load_dataset,
    partition_classes,
    realized_imbalance_ratio,
    save_dataset,
)


def clean_spec(**overrides):
    """A spec with no impairments unless the test opts in."""
    base = dict(
        k=10, n_max=200, imbalance_ratio=50.0, feature_dim=4, class_separation=3.0,
        ambiguous_class_pairs=(), ambiguous_fraction=0.5, label_noise_rate=0.0,
        noise_scope="all", test_per_class=30, seed=7,
    )
    base.update(overrides)
    return LongTailSpec(**base)


class TestClassCounts:
    def test_two_point_profile(self):
        counts = class_counts(clean_spec(k=2, n_max=100, imbalance_ratio=4.0))
        np.testing.assert_array_equal(counts, [100, 25])

    def test_balanced_degenerate(self):
        counts = class_counts(clean_spec(imbalance_ratio=1.0, n_max=150))
        np.testing.assert_array_equal(counts, np.full(10, 150))

    def test_realized_ratio_near_target(self):
        counts = class_counts(clean_spec(k=10, n_max=1000, imbalance_ratio=50.0))
        ratio = counts.max() / counts.min()
        assert 45.0 <= ratio <= 55.0
        assert (np.diff(counts) <= 0).all()

    def test_rejects_empty_class(self):
        with pytest.raises(ValueError):
            LongTailSpec(k=2, n_max=10, imbalance_ratio=40.0)


class TestPartition:
    def test_three_classes(self):
        p = partition_classes([100, 50, 10])
        assert p.head == (0,)
        assert p.tail == (1, 2)

    def test_ten_classes(self):
        p = partition_classes(class_counts(clean_spec()))
        assert len(p.head) == 4
        assert len(p.tail) == 6
        assert sorted(p.head + p.tail) == list(range(10))

    def test_tie_break_low_index(self):
        p = partition_classes([5, 5, 5, 5, 5, 5])
        assert p.head == (0, 1)


class TestGenerate:
    def test_clean_generation_has_no_impairments(self):
        train, test, _ = generate(clean_spec())
        assert (train.labels == train.clean_labels).all()
        assert not train.is_ambiguous.any()
        assert not test.is_ambiguous.any()

    def test_deterministic(self):
        a_train, a_test, a_part = generate(clean_spec())
        b_train, b_test, b_part = generate(clean_spec())
        np.testing.assert_array_equal(a_train.features, b_train.features)
        np.testing.assert_array_equal(a_train.labels, b_train.labels)
        np.testing.assert_array_equal(a_test.features, b_test.features)
        assert a_part == b_part

    def test_seed_changes_data(self):
        a_train, _, _ = generate(clean_spec(seed=1))
        b_train, _, _ = generate(clean_spec(seed=2))
        assert not np.array_equal(a_train.features, b_train.features)

    def test_noise_fraction_concentrates(self):
        spec = clean_spec(imbalance_ratio=1.0, n_max=500, label_noise_rate=0.2)
        train, _, _ = generate(spec)
        flipped = (train.labels != train.clean_labels).mean()
        assert 0.18 <= flipped <= 0.22
        # flips never leave the label range and never hit the clean class
        changed = train.labels != train.clean_labels
        assert (train.labels[changed] != train.clean_labels[changed]).all()

    def test_tail_scope_leaves_head_clean(self):
        spec = clean_spec(label_noise_rate=0.3, noise_scope="tail")
        train, _, part = generate(spec)
        head_mask = np.isin(train.clean_labels, part.head)
        assert (train.labels[head_mask] == train.clean_labels[head_mask]).all()
        tail_mask = ~head_mask
        assert (train.labels[tail_mask] != train.clean_labels[tail_mask]).any()

    def test_test_split_balanced(self):
        _, test, _ = generate(clean_spec(test_per_class=25))
        np.testing.assert_array_equal(np.bincount(test.labels), np.full(10, 25))

    def test_ambiguity_marks_only_listed_classes(self):
        spec = clean_spec(ambiguous_class_pairs=((8, 9, 0.5),), ambiguous_fraction=0.5)
        train, test, _ = generate(spec)
        for split in (train, test):
            assert set(np.unique(split.clean_labels[split.is_ambiguous])) == {8}
            share = split.is_ambiguous[split.clean_labels == 8].mean()
            assert share == pytest.approx(0.5, abs=0.1)

    def test_ambiguous_samples_shift_toward_partner(self):
        spec = clean_spec(ambiguous_class_pairs=((8, 9, 0.5),), ambiguous_fraction=0.5,
                          class_separation=6.0)
        train, _, _ = generate(spec)
        c8 = train.clean_labels == 8
        mean_amb = train.features[c8 & train.is_ambiguous].mean(axis=0)
        mean_cln = train.features[c8 & ~train.is_ambiguous].mean(axis=0)
        c9_mean = train.features[train.clean_labels == 9].mean(axis=0)
        assert np.linalg.norm(mean_amb - c9_mean) < np.linalg.norm(mean_cln - c9_mean)

    def test_class_separation_is_respected(self):
        spec = clean_spec(class_separation=5.0, label_noise_rate=0.0)
        train, _, _ = generate(spec)
        means = np.stack([
            train.features[train.clean_labels == c].mean(axis=0) for c in range(spec.k)
        ])
        dmin = min(
            np.linalg.norm(means[i] - means[j])
            for i in range(spec.k) for j in range(i + 1, spec.k)
        )
        # sample means wobble around the true means by ~1/sqrt(n)
        assert dmin > spec.class_separation - 1.5

    def test_realized_ir_within_ten_percent(self):
        for n_max in (100, 400):
            spec = clean_spec(n_max=n_max, imbalance_ratio=50.0)
            train, _, _ = generate(spec)
            ir = realized_imbalance_ratio(train)
            assert abs(ir - 50.0) / 50.0 <= 0.10


class TestSpecValidation:
    @pytest.mark.parametrize("kwargs", [
        {"k": 1},
        {"imbalance_ratio": 0.5},
        {"label_noise_rate": 1.0},
        {"noise_scope": "heads"},
        {"ambiguous_class_pairs": ((0, 0, 0.5),)},
        {"ambiguous_class_pairs": ((0, 99, 0.5),)},
        {"ambiguous_fraction": 1.5},
        {"class_separation": 0.0},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            clean_spec(**kwargs)


class TestCsvRoundTrip:
    def test_round_trip_is_stable(self, tmp_path):
        spec = clean_spec(ambiguous_class_pairs=((8, 9, 0.5),), label_noise_rate=0.1)
        train, test, part = generate(spec)
        save_dataset(tmp_path / "d1", spec, train, test, part)
        spec2, train2, test2, part2 = load_dataset(tmp_path / "d1")
        assert spec2 == spec
        assert part2 == part
        np.testing.assert_array_equal(train2.labels, train.labels)
        np.testing.assert_array_equal(train2.clean_labels, train.clean_labels)
        np.testing.assert_array_equal(train2.is_ambiguous, train.is_ambiguous)
        # writing the loaded data again reproduces the files byte for byte
        save_dataset(tmp_path / "d2", spec2, train2, test2, part2)
        for name in ("train.csv", "test.csv", "dataset.json"):
            assert (tmp_path / "d1" / name).read_bytes() == (tmp_path / "d2" / name).read_bytes()

    def test_nine_significant_digits(self, tmp_path):
        spec = clean_spec()
        train, test, part = generate(spec)
        save_dataset(tmp_path, spec, train, test, part)
        _, train2, _, _ = load_dataset(tmp_path)
        np.testing.assert_allclose(train2.features, train.features, rtol=1e-8)
