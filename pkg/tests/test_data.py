"""Tests for CSV loading, trial splitting, and the synthetic tasks."""

import numpy as np
import pytest

from svdreg.data import (
    Dataset,
    available_tasks,
    generate_synthetic,
    load_csv,
    make_synthetic_dataset,
    split_trial,
    synthetic_task,
)


def write_csv(path, text):
    path.write_text(text)
    return str(path)


def toy_dataset(size=12, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(
        features=rng.normal(size=(size, 2)),
        targets=rng.normal(size=size),
        feature_names=["a", "b"],
        target_name="y",
    )


class TestLoadCsv:
    def test_three_row_file(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
        ds = load_csv(path, "y")
        np.testing.assert_array_equal(ds.features, [[1.0, 2.0], [4.0, 5.0], [7.0, 8.0]])
        np.testing.assert_array_equal(ds.targets, [3.0, 6.0, 9.0])
        assert ds.feature_names == ["a", "b"]
        assert ds.target_name == "y"
        assert ds.n_dropped == 0
        assert ds.size == 3

    def test_unparseable_rows_are_dropped_and_counted(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\n1,2\noops,3\n4,\n5,6\n")
        ds = load_csv(path, "y")
        assert ds.size == 2
        assert ds.n_dropped == 2
        np.testing.assert_array_equal(ds.features[:, 0], [1.0, 5.0])
        np.testing.assert_array_equal(ds.targets, [2.0, 6.0])

    def test_non_numeric_columns_excluded_from_auto_features(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "name,a,y\nfoo,1,2\nbar,3,4\n")
        ds = load_csv(path, "y")
        assert ds.feature_names == ["a"]
        np.testing.assert_array_equal(ds.features, [[1.0], [3.0]])

    def test_explicit_feature_subset_keeps_given_order(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b,c,y\n1,2,3,4\n5,6,7,8\n")
        ds = load_csv(path, "y", feature_columns=["c", "a"])
        assert ds.feature_names == ["c", "a"]
        np.testing.assert_array_equal(ds.features, [[3.0, 1.0], [7.0, 5.0]])

    def test_row_limit_applies_before_cleaning(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\n1,2\nbad,3\n4,5\n6,7\n")
        ds = load_csv(path, "y", row_limit=2)
        assert ds.size == 1
        assert ds.n_dropped == 1
        np.testing.assert_array_equal(ds.targets, [2.0])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(str(tmp_path / "absent.csv"), "y")

    def test_missing_target_column(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,b\n1,2\n")
        with pytest.raises(ValueError, match="target column"):
            load_csv(path, "y")

    def test_missing_feature_column(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\n1,2\n")
        with pytest.raises(ValueError, match="feature columns"):
            load_csv(path, "y", feature_columns=["a", "q"])

    def test_no_numeric_feature_columns(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\nx,2\nz,3\n")
        with pytest.raises(ValueError, match="no numeric feature columns"):
            load_csv(path, "y")
        with pytest.raises(ValueError, match="no numeric feature columns"):
            load_csv(path, "y", feature_columns=[])

    def test_no_usable_rows(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", "a,y\n1,\n,3\n")
        with pytest.raises(ValueError, match="no usable rows"):
            load_csv(path, "y")


class TestSplitTrial:
    def test_rows_follow_the_seeded_permutation(self):
        ds = toy_dataset(size=10, seed=3)
        split = split_trial(ds, n=4, n_unlab=3, seed=17)
        perm = np.random.default_rng(17).permutation(10)
        np.testing.assert_array_equal(split.labeled_idx, perm[:4])
        np.testing.assert_array_equal(split.unlabeled_idx, perm[4:7])
        np.testing.assert_array_equal(split.test_idx, perm[7:])
        np.testing.assert_array_equal(split.x_labeled, ds.features[perm[:4]])
        np.testing.assert_array_equal(split.y_labeled, ds.targets[perm[:4]])
        np.testing.assert_array_equal(split.x_unlabeled, ds.features[perm[4:7]])
        np.testing.assert_array_equal(split.x_test, ds.features[perm[7:]])
        np.testing.assert_array_equal(split.y_test, ds.targets[perm[7:]])

    def test_parts_are_disjoint_and_cover_the_dataset(self):
        ds = toy_dataset(size=15)
        split = split_trial(ds, n=6, n_unlab=4, seed=2)
        everything = np.concatenate([split.labeled_idx, split.unlabeled_idx, split.test_idx])
        np.testing.assert_array_equal(np.sort(everything), np.arange(15))

    def test_deterministic_in_seed(self):
        ds = toy_dataset(size=15)
        a = split_trial(ds, n=5, n_unlab=5, seed=8)
        b = split_trial(ds, n=5, n_unlab=5, seed=8)
        np.testing.assert_array_equal(a.labeled_idx, b.labeled_idx)
        np.testing.assert_array_equal(a.test_idx, b.test_idx)
        c = split_trial(ds, n=5, n_unlab=5, seed=9)
        assert not np.array_equal(a.labeled_idx, c.labeled_idx)

    def test_test_cap_truncates_the_test_block(self):
        ds = toy_dataset(size=20)
        full = split_trial(ds, n=5, n_unlab=5, seed=4)
        capped = split_trial(ds, n=5, n_unlab=5, test_cap=3, seed=4)
        assert capped.test_idx.shape == (3,)
        np.testing.assert_array_equal(capped.test_idx, full.test_idx[:3])
        np.testing.assert_array_equal(capped.x_labeled, full.x_labeled)

    def test_unlabeled_targets_are_not_exposed(self):
        split = split_trial(toy_dataset(), n=4, n_unlab=4, seed=0)
        assert not hasattr(split, "y_unlabeled")

    def test_rejects_oversubscription(self):
        ds = toy_dataset(size=10)
        with pytest.raises(ValueError, match="no test rows"):
            split_trial(ds, n=6, n_unlab=4, seed=0)

    def test_rejects_bad_counts(self):
        ds = toy_dataset(size=10)
        with pytest.raises(ValueError):
            split_trial(ds, n=0, n_unlab=2, seed=0)
        with pytest.raises(ValueError):
            split_trial(ds, n=2, n_unlab=-1, seed=0)
        with pytest.raises(ValueError, match="test_cap"):
            split_trial(ds, n=2, n_unlab=2, test_cap=0, seed=0)


class TestSyntheticTasks:
    def test_sine_target_values(self):
        task = synthetic_task("sine", noise_sd=0.0)
        x = np.array([[-0.5], [0.0], [0.5]])
        np.testing.assert_allclose(task.target(x), [-1.0, 0.0, 1.0], atol=1e-15)

    def test_sine_parameters_forwarded(self):
        task = synthetic_task("sine", noise_sd=0.0, amplitude=2.0, frequency=2.0)
        np.testing.assert_allclose(task.target(np.array([[0.25]])), [2.0])

    def test_zero_target(self):
        task = synthetic_task("zero", noise_sd=1.0, n_features=3)
        assert task.n_features == 3
        x = task.sample_inputs(np.random.default_rng(0), 7)
        assert x.shape == (7, 3)
        np.testing.assert_array_equal(task.target(x), np.zeros(7))

    def test_clustered_bumps_alternate_sign_at_cluster_centers(self):
        task = synthetic_task("clustered-bumps", noise_sd=0.0)
        centers = np.linspace(-1.0, 1.0, 24)
        values = task.target(centers[:, None])
        signs = np.where(np.arange(24) % 2 == 0, 1.0, -1.0)
        assert np.all(np.sign(values) == signs)
        assert np.all(np.abs(values) > 0.9)
        assert np.all(np.abs(values) < 1.1)

    def test_clustered_bumps_inputs_hug_the_cluster_centers(self):
        task = synthetic_task("clustered-bumps", noise_sd=0.0)
        x = task.sample_inputs(np.random.default_rng(1), 500)
        centers = np.linspace(-1.0, 1.0, 24)
        gaps = np.min(np.abs(x[:, 0][:, None] - centers[None, :]), axis=1)
        assert np.max(gaps) < 0.2

    def test_target_nearly_vanishes_between_clusters(self):
        task = synthetic_task("clustered-bumps", noise_sd=0.0)
        centers = np.linspace(-1.0, 1.0, 24)
        midpoints = (centers[:-1] + centers[1:]) / 2.0
        assert np.max(np.abs(task.target(midpoints[:, None]))) < 0.05

    def test_ring_wave_oscillates_along_the_circle(self):
        task = synthetic_task("ring-wave", noise_sd=0.0)
        theta = np.linspace(0.0, 2.0 * np.pi, 17)[:-1]
        x = np.column_stack([np.cos(theta), np.sin(theta)])
        np.testing.assert_allclose(task.target(x), np.sin(10.0 * np.arctan2(x[:, 1], x[:, 0])))

    def test_ring_wave_inputs_stay_near_the_unit_circle(self):
        task = synthetic_task("ring-wave", noise_sd=0.0, radial_sd=0.01)
        x = task.sample_inputs(np.random.default_rng(5), 400)
        assert x.shape == (400, 2)
        radii = np.hypot(x[:, 0], x[:, 1])
        assert np.all(np.abs(radii - 1.0) < 0.06)

    def test_ring_wave_frequency_parameter(self):
        task = synthetic_task("ring-wave", noise_sd=0.0, frequency=2.0)
        quarter = np.array([[0.0, 1.0]])  # theta = pi/2, so sin(2 theta) = 0
        np.testing.assert_allclose(task.target(quarter), [0.0], atol=1e-12)

    def test_unknown_task_rejected(self):
        with pytest.raises(ValueError, match="unknown synthetic task"):
            synthetic_task("mystery", noise_sd=0.0)

    def test_available_tasks(self):
        assert available_tasks() == ["clustered-bumps", "ring-wave", "sine", "zero"]


class TestGenerateSynthetic:
    def test_noiseless_outputs_equal_the_truth(self):
        task = synthetic_task("sine", noise_sd=0.0)
        split, truth = generate_synthetic(task, n=9, n_unlab=5, n_test=7, seed=3)
        np.testing.assert_array_equal(split.y_labeled, truth.f_labeled)
        np.testing.assert_array_equal(split.y_test, truth.f_test)
        np.testing.assert_array_equal(truth.f_test, task.target(split.x_test))
        assert split.x_unlabeled.shape == (5, 1)
        assert truth.f_unlabeled.shape == (5,)

    def test_noise_has_the_requested_scale(self):
        task = synthetic_task("zero", noise_sd=1.0)
        split, _ = generate_synthetic(task, n=4000, n_unlab=0, n_test=1, seed=11)
        assert 0.9 < np.var(split.y_labeled) < 1.1

    def test_reproducible(self):
        task = synthetic_task("sine", noise_sd=0.25)
        a, _ = generate_synthetic(task, n=8, n_unlab=4, n_test=6, seed=5)
        b, _ = generate_synthetic(task, n=8, n_unlab=4, n_test=6, seed=5)
        np.testing.assert_array_equal(a.x_labeled, b.x_labeled)
        np.testing.assert_array_equal(a.y_labeled, b.y_labeled)
        np.testing.assert_array_equal(a.y_test, b.y_test)
        c, _ = generate_synthetic(task, n=8, n_unlab=4, n_test=6, seed=6)
        assert not np.array_equal(a.y_labeled, c.y_labeled)

    def test_rejects_bad_counts(self):
        task = synthetic_task("zero", noise_sd=0.0)
        with pytest.raises(ValueError):
            generate_synthetic(task, n=0, n_unlab=0, n_test=1)
        with pytest.raises(ValueError):
            generate_synthetic(task, n=1, n_unlab=-1, n_test=1)
        with pytest.raises(ValueError):
            generate_synthetic(task, n=1, n_unlab=0, n_test=0)


class TestMakeSyntheticDataset:
    def test_shapes_and_names(self):
        task = synthetic_task("sine", noise_sd=0.1)
        ds = make_synthetic_dataset(task, size=30, seed=2)
        assert ds.size == 30
        assert ds.features.shape == (30, 1)
        assert ds.feature_names == ["x0"]
        assert ds.target_name == "y"

    def test_reproducible(self):
        task = synthetic_task("sine", noise_sd=0.1)
        a = make_synthetic_dataset(task, size=20, seed=7)
        b = make_synthetic_dataset(task, size=20, seed=7)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.targets, b.targets)

    def test_rejects_tiny_size(self):
        with pytest.raises(ValueError, match="size"):
            make_synthetic_dataset(synthetic_task("zero", noise_sd=0.0), size=1)
