"""From-scratch K-means tests."""

import numpy as np
import pytest

from roamkit.kmeans import kmeans_fit


class TestKmeansFit:
    def test_single_cluster_is_column_means(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(100, 3))
        centers, labels, _ = kmeans_fit(X, 1, seed=0)
        np.testing.assert_allclose(centers[0], X.mean(axis=0), atol=1e-12)
        assert set(labels) == {0}

    def test_separated_blobs_recovered(self):
        rng = np.random.default_rng(1)
        means = np.array([[0.0, 0.0], [10.0, 10.0]])
        blob_a = rng.normal(size=(200, 2)) * 0.5 + means[0]
        blob_b = rng.normal(size=(200, 2)) * 0.5 + means[1]
        X = np.vstack([blob_a, blob_b])
        centers, labels, _ = kmeans_fit(X, 2, seed=3)
        sample_means = np.array([blob_a.mean(axis=0), blob_b.mean(axis=0)])
        order = np.argsort(centers[:, 0])
        np.testing.assert_allclose(
            centers[order], sample_means[np.argsort(sample_means[:, 0])], atol=0.1
        )
        # Each blob maps to exactly one label.
        assert len(set(labels[:200])) == 1
        assert len(set(labels[200:])) == 1

    def test_same_seed_bit_identical(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(300, 5))
        a_centers, a_labels, a_inertia = kmeans_fit(X, 7, seed=42)
        b_centers, b_labels, b_inertia = kmeans_fit(X, 7, seed=42)
        np.testing.assert_array_equal(a_centers, b_centers)
        np.testing.assert_array_equal(a_labels, b_labels)
        assert a_inertia == b_inertia

    def test_different_seeds_allowed_to_differ(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(50, 2))
        a, _, _ = kmeans_fit(X, 5, seed=0)
        b, _, _ = kmeans_fit(X, 5, seed=99)
        assert a.shape == b.shape  # same contract regardless of seed

    def test_duplicate_points_handled(self):
        X = np.repeat(np.array([[1.0, 1.0], [5.0, 5.0]]), 10, axis=0)
        centers, labels, inertia = kmeans_fit(X, 2, seed=0)
        assert inertia == pytest.approx(0.0, abs=1e-12)
        assert sorted(centers[:, 0].tolist()) == [1.0, 5.0]

    def test_more_clusters_than_points_rejected(self):
        with pytest.raises(ValueError):
            kmeans_fit(np.zeros((3, 2)), 4, seed=0)

    def test_labels_are_nearest_center(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 2))
        centers, labels, _ = kmeans_fit(X, 4, seed=1)
        distances = np.linalg.norm(X[:, None, :] - centers[None, :, :], axis=2)
        np.testing.assert_array_equal(labels, np.argmin(distances, axis=1))
