"""Tests for the Gaussian-mixture benchmark generators and dataset plumbing."""

import numpy as np
import pytest

from sslc2st.hdgm import (
    LEVELS,
    HdgmSpec,
    LabeledDataset,
    build_dataset,
    hdgm_pair,
    read_jsonl,
    sample_hdgm,
    shuffle_split,
    strip_labels,
    write_jsonl,
)


class TestSpec:
    def test_dimension_must_be_at_least_two(self):
        with pytest.raises(ValueError):
            HdgmSpec(d=1, delta_mu=0.5, delta_q=0.0, role="P")

    def test_role_validated(self):
        with pytest.raises(ValueError):
            HdgmSpec(d=5, delta_mu=0.5, delta_q=0.0, role="R")

    def test_levels_differ_only_in_gaps(self):
        assert LEVELS == {"easy": (10.0, 5.0), "medium": (10.0, 0.0), "hard": (0.5, 0.0)}

    def test_cluster_means(self):
        spec = HdgmSpec(d=4, delta_mu=0.5, delta_q=0.0, role="P")
        assert np.array_equal(spec.cluster_mean(0), np.zeros(4))
        assert np.array_equal(spec.cluster_mean(1), np.full(4, 0.5))

    def test_alt_role_shifts_every_dimension(self):
        spec = HdgmSpec(d=4, delta_mu=10.0, delta_q=5.0, role="Q-alt")
        assert np.array_equal(spec.cluster_mean(0), np.full(4, 5.0))
        assert np.array_equal(spec.cluster_mean(1), np.full(4, 15.0))

    def test_alt_covariance_blocks(self):
        spec = HdgmSpec(d=5, delta_mu=0.5, delta_q=0.0, role="Q-alt")
        cov1 = spec.cluster_cov(0)
        cov2 = spec.cluster_cov(1)
        assert cov1[0, 1] == cov1[1, 0] == 0.5
        assert cov2[0, 1] == cov2[1, 0] == -0.5
        assert np.array_equal(cov1[2:, 2:], np.eye(3))
        # positive definite
        np.linalg.cholesky(cov1)
        np.linalg.cholesky(cov2)

    def test_reference_role_has_identity_covariance(self):
        spec = HdgmSpec(d=5, delta_mu=0.5, delta_q=0.0, role="P")
        assert np.array_equal(spec.cluster_cov(0), np.eye(5))
        assert np.array_equal(spec.cluster_cov(1), np.eye(5))

    def test_dict_round_trip(self):
        spec = HdgmSpec(d=7, delta_mu=0.5, delta_q=0.0, role="Q-alt")
        assert HdgmSpec.from_dict(spec.to_dict()) == spec

    def test_pair_under_null_reuses_reference_spec(self):
        spec_p, spec_q = hdgm_pair("hard", 10, "H0")
        assert spec_q is spec_p

    def test_pair_under_alternative(self):
        spec_p, spec_q = hdgm_pair("hard", 10, "H1")
        assert spec_p.role == "P" and spec_q.role == "Q-alt"
        assert (spec_q.delta_mu, spec_q.delta_q) == (0.5, 0.0)

    def test_unknown_level_rejected(self):
        with pytest.raises(ValueError):
            hdgm_pair("extreme", 10)


class TestSampling:
    def test_stratified_row_counts(self):
        spec = HdgmSpec(d=3, delta_mu=10.0, delta_q=0.0, role="P")
        x = sample_hdgm(spec, 25, rng_seed=0)
        assert x.shape == (50, 3)
        # first block near mu_1 = 0, second near mu_2 = 10
        assert abs(x[:25].mean()) < 1.0
        assert abs(x[25:].mean() - 10.0) < 1.0

    def test_same_seed_reproduces_sample(self):
        spec = HdgmSpec(d=4, delta_mu=0.5, delta_q=0.0, role="Q-alt")
        assert np.array_equal(sample_hdgm(spec, 10, 5), sample_hdgm(spec, 10, 5))

    def test_first_cluster_mean_near_zero(self):
        spec = HdgmSpec(d=10, delta_mu=0.5, delta_q=0.0, role="P")
        n = 50_000
        x = sample_hdgm(spec, n, rng_seed=1)[:n]
        tol = 3.0 / np.sqrt(n)
        assert np.all(np.abs(x.mean(axis=0)) < tol)

    def test_alt_correlation_sign_per_cluster(self):
        spec = HdgmSpec(d=10, delta_mu=0.5, delta_q=0.0, role="Q-alt")
        n = 50_000
        x = sample_hdgm(spec, n, rng_seed=2)
        r1 = np.corrcoef(x[:n, 0], x[:n, 1])[0, 1]
        r2 = np.corrcoef(x[n:, 0], x[n:, 1])[0, 1]
        assert r1 == pytest.approx(0.5, abs=0.02)
        assert r2 == pytest.approx(-0.5, abs=0.02)

    def test_sample_covariance_converges(self):
        n = 50_000
        for seed in range(3):
            for role in ("P", "Q-alt"):
                spec = HdgmSpec(d=10, delta_mu=0.5, delta_q=0.0, role=role)
                x = sample_hdgm(spec, n, rng_seed=seed)
                for i in range(2):
                    block = x[i * n : (i + 1) * n]
                    emp = np.cov(block, rowvar=False)
                    gap = np.linalg.norm(emp - spec.cluster_cov(i), ord="fro")
                    assert gap < 0.1, (role, seed, i, gap)

    def test_n_per_cluster_validated(self):
        spec = HdgmSpec(d=3, delta_mu=0.5, delta_q=0.0, role="P")
        with pytest.raises(ValueError):
            sample_hdgm(spec, 0)


class TestDataset:
    def test_build_concatenates_with_labels(self):
        sp = np.arange(9, dtype=float).reshape(3, 3)
        sq = np.arange(9, 18, dtype=float).reshape(3, 3)
        ds = build_dataset(sp, sq)
        assert len(ds) == 6
        assert np.array_equal(ds.labels, [0, 0, 0, 1, 1, 1])
        assert np.array_equal(ds.points[:3], sp)

    def test_build_rejects_empty(self):
        with pytest.raises(ValueError):
            build_dataset(np.empty((0, 2)), np.empty((0, 2)))

    def test_build_rejects_unequal_sizes(self):
        with pytest.raises(ValueError):
            build_dataset(np.zeros((3, 2)), np.zeros((2, 2)))

    def test_identical_samples_are_valid(self):
        x = np.random.default_rng(0).standard_normal((4, 2))
        ds = build_dataset(x, x)
        assert ds.is_balanced

    def test_labels_validated(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((2, 2)), np.array([0, 2]))


class TestSplit:
    def make(self, n=8, d=2, seed=0):
        rng = np.random.default_rng(seed)
        return build_dataset(rng.standard_normal((n // 2, d)), rng.standard_normal((n // 2, d)))

    def test_stratified_halves(self):
        split = shuffle_split(self.make(8), rng_seed=0)
        for half in (split.train, split.test):
            assert len(half) == 4
            assert int(half.labels.sum()) == 2

    def test_same_seed_same_split(self):
        ds = self.make(16)
        a = shuffle_split(ds, rng_seed=3)
        b = shuffle_split(ds, rng_seed=3)
        assert np.array_equal(a.train.points, b.train.points)
        assert np.array_equal(a.test.labels, b.test.labels)

    def test_partition_preserves_multiset(self):
        ds = self.make(20, d=3)
        split = shuffle_split(ds, rng_seed=1)
        merged = np.vstack([split.train.points, split.test.points])
        key = np.lexsort(merged.T)
        original_key = np.lexsort(ds.points.T)
        assert np.allclose(merged[key], ds.points[original_key])

    def test_odd_label_count_rejected(self):
        ds = LabeledDataset(np.zeros((6, 2)), np.array([0, 0, 0, 1, 1, 1]))
        with pytest.raises(ValueError):
            shuffle_split(ds, rng_seed=0)

    def test_n_te_property(self):
        split = shuffle_split(self.make(12), rng_seed=0)
        assert split.n_te == 6


class TestStripLabels:
    def test_multiset_preserved(self):
        ds = build_dataset(np.arange(6, dtype=float).reshape(3, 2),
                           np.arange(6, 12, dtype=float).reshape(3, 2))
        rows = strip_labels(ds, rng_seed=4)
        assert rows.shape == (6, 2)
        assert np.allclose(np.sort(rows, axis=0), np.sort(ds.points, axis=0))

    def test_single_row(self):
        ds = LabeledDataset(np.array([[1.0, 2.0]]), np.array([0]))
        assert np.array_equal(strip_labels(ds), [[1.0, 2.0]])


class TestJsonl:
    def test_round_trip(self, tmp_path):
        spec = HdgmSpec(d=3, delta_mu=0.5, delta_q=0.0, role="Q-alt")
        x = sample_hdgm(spec, 4, rng_seed=0)
        ds = build_dataset(x, x + 1.0)
        path = tmp_path / "data.jsonl"
        write_jsonl(path, ds, spec=spec, seed=17)
        loaded, header = read_jsonl(path)
        assert np.allclose(loaded.points, ds.points)
        assert np.array_equal(loaded.labels, ds.labels)
        assert header["seed"] == 17
        assert HdgmSpec.from_dict(header["spec"]) == spec

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(ValueError):
            read_jsonl(path)
