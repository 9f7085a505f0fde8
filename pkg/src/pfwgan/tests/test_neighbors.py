# -*- coding: utf-8 -*-
import numpy as np

from pfwgan.exceptions import LayoutMismatch
from pfwgan.neighbors import nearest_distances
from pfwgan.testing import PFWGANTestCase

__author__ = 'pfwgan'


def _one_hot_rows(n: int, seed: int, blocks: int = 4, width: int = 6) -> np.ndarray:
    """ Rows of one-hot blocks plus two coarsely quantised numeric coordinates, so exact distance ties abound. """
    rng = np.random.default_rng(seed)
    parts = [np.eye(width)[rng.integers(0, width, size=n)] for _ in range(blocks)]
    parts.append(np.round(rng.random((n, 2)) * 4.0) / 4.0)
    return np.hstack(parts)


class TestNearestDistances(PFWGANTestCase):
    def test_line(self):
        real = np.array([[0.0], [1.0], [3.0]])
        self.assertEqual(nearest_distances(real, real, exclude_self=True).tolist(), [1.0, 1.0, 2.0])
        fake = np.array([[0.5], [2.9], [10.0]])
        np.testing.assert_allclose(nearest_distances(fake, real), [0.5, 0.1, 7.0])

    def test_duplicates_have_distance_zero(self):
        real = np.array([[1.0, 2.0], [1.0, 2.0], [4.0, 6.0]])
        self.assertEqual(nearest_distances(real, real, exclude_self=True).tolist(), [0.0, 0.0, 5.0])

    def test_weights(self):
        real = np.array([[0.0, 0.0], [1.0, 1.0]])
        distances = nearest_distances(real, real, weights=np.array([3.0, 4.0]), exclude_self=True)
        np.testing.assert_allclose(distances, [5.0, 5.0])

    def test_prefilter_matches_brute_force(self):
        rng = np.random.default_rng(3)
        reference = rng.random((300, 6))
        queries = rng.random((50, 6))
        weights = rng.uniform(0.5, 2.0, size=6)
        np.testing.assert_array_equal(
            nearest_distances(queries, reference, weights=weights, brute_force_limit=10),
            nearest_distances(queries, reference, weights=weights),
        )
        np.testing.assert_array_equal(
            nearest_distances(reference, reference, exclude_self=True, brute_force_limit=10),
            nearest_distances(reference, reference, exclude_self=True),
        )

    def test_large_one_hot_tables_are_exact(self):
        real = _one_hot_rows(2500, seed=4)
        synth = _one_hot_rows(2400, seed=5)
        exact = 10**9
        d_real = nearest_distances(real, real, exclude_self=True)
        d_synth = nearest_distances(real, synth)
        np.testing.assert_array_equal(d_real, nearest_distances(real, real, exclude_self=True, brute_force_limit=exact))
        np.testing.assert_array_equal(d_synth, nearest_distances(real, synth, brute_force_limit=exact))
        weights = np.linspace(0.5, 2.0, real.shape[1])
        np.testing.assert_array_equal(
            nearest_distances(real, synth, weights=weights),
            nearest_distances(real, synth, weights=weights, brute_force_limit=exact),
        )

    def test_layout(self):
        with self.assertRaises(LayoutMismatch):
            nearest_distances(np.zeros((2, 3)), np.zeros((2, 4)))
        with self.assertRaises(LayoutMismatch):
            nearest_distances(np.zeros((2, 3)), np.zeros((3, 3)), exclude_self=True)
