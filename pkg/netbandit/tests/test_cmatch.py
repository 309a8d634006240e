from __future__ import annotations

import itertools

import numpy as np
from django.test import SimpleTestCase

from netbandit.clustering import Clustering, mcl_cluster
from netbandit.cmatch import (
    ClusterMatchMap,
    NodeMatching,
    ThresholdParams,
    Thresholds,
    build_cmatch,
    cluster_similarity,
    cluster_similarity_weights,
    compute_threshold,
    match_clusters,
    match_nodes,
    sample_cross_cluster_pairs,
)
from netbandit.errors import ContractViolation
from netbandit.graph import cosine_similarity

from .factories import TOY_EDGES, TOY_NODES, make_graph, toy_vectors


def _bits(n_bits: int, *ones: int) -> list[int]:
    vector = [0] * n_bits
    for index in ones:
        vector[index] = 1
    return vector


class ThresholdTests(SimpleTestCase):
    def test_median_of_four(self) -> None:
        self.assertAlmostEqual(compute_threshold([0.1, 0.2, 0.3, 0.4]), 0.25)

    def test_single_value(self) -> None:
        self.assertEqual(compute_threshold([0.5]), 0.5)

    def test_empty_sample(self) -> None:
        with self.assertRaises(ContractViolation):
            compute_threshold([])

    def test_uniform_sample_is_near_one_half(self) -> None:
        sample = np.random.default_rng(17).random(10_001)

        self.assertLess(abs(compute_threshold(sample) - 0.5), 0.02)

    def test_thresholds_must_be_in_unit_interval(self) -> None:
        with self.assertRaises(ContractViolation):
            Thresholds(gamma=1.5, beta=0.5)
        with self.assertRaises(ContractViolation):
            Thresholds(gamma=0.5, beta=-0.1)


class MatchNodesTests(SimpleTestCase):
    def test_gamma_one_matches_nothing_without_identical_vectors(self) -> None:
        graph = make_graph(3, attributes=[[1, 0, 0], [1, 1, 0], [0, 1, 1]])

        matching = match_nodes(graph, Clustering.from_labels([0, 1, 2]), 1.0)

        self.assertEqual(len(matching), 0)

    def test_all_cross_pairs_above_gamma(self) -> None:
        graph = make_graph(3, attributes=[[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1]])
        clustering = Clustering.from_labels([0, 1, 1])

        below = match_nodes(graph, clustering, 0.5 - 1e-9)
        at = match_nodes(graph, clustering, float(below.similarity.max()))

        self.assertEqual(below.pairs, frozenset({(0, 1), (0, 2)}))
        np.testing.assert_allclose(below.similarity, [0.5, 0.5])
        self.assertEqual(len(at), 0)

    def test_only_the_similar_pair_is_matched(self) -> None:
        # sim(0, 2) = 0.9 and sim(1, 3) = 0.1; every other pair is 0.
        attributes = [
            _bits(39, *range(0, 10)),
            _bits(39, *range(20, 30)),
            _bits(39, *range(0, 9), 10),
            _bits(39, 20, *range(30, 39)),
        ]
        graph = make_graph(4, attributes=attributes)

        matching = match_nodes(graph, Clustering.from_labels([0, 0, 1, 1]), 0.5)

        self.assertEqual(matching.pairs, frozenset({(0, 2)}))
        self.assertAlmostEqual(float(matching.similarity[0]), 0.9)

    def test_matches_brute_force_and_never_pairs_within_a_cluster(self) -> None:
        rng = np.random.default_rng(2)
        for trial in range(10):
            vectors = toy_vectors(14, 8, seed=trial)
            labels = rng.integers(0, 4, size=14)
            _, labels = np.unique(labels, return_inverse=True)
            graph = make_graph(14, attributes=vectors)
            clustering = Clustering.from_labels(labels)
            gamma = 0.45

            expected = {
                (u, v)
                for u, v in itertools.combinations(range(14), 2)
                if labels[u] != labels[v] and cosine_similarity(vectors[u], vectors[v]) > gamma
            }
            with self.subTest(trial=trial):
                matching = match_nodes(graph, clustering, gamma)
                self.assertEqual(matching.pairs, expected)
                self.assertTrue(np.all(matching.similarity > gamma))
                self.assertTrue(
                    np.all(labels[matching.left] != labels[matching.right])
                )


class ClusterSimilarityTests(SimpleTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.clustering = Clustering.from_labels([0, 0, 1, 1, 2])
        self.matching = NodeMatching(
            left=np.array([0, 1, 0]),
            right=np.array([2, 3, 4]),
            similarity=np.array([0.6, 0.8, 0.8]),
            gamma=0.5,
        )

    def test_no_pairs_is_zero(self) -> None:
        self.assertEqual(cluster_similarity(1, 2, self.matching, self.clustering), 0.0)

    def test_single_pair(self) -> None:
        self.assertAlmostEqual(cluster_similarity(0, 2, self.matching, self.clustering), 0.8)

    def test_mean_over_pairs_in_either_orientation(self) -> None:
        self.assertAlmostEqual(cluster_similarity(0, 1, self.matching, self.clustering), 0.7)
        self.assertAlmostEqual(cluster_similarity(1, 0, self.matching, self.clustering), 0.7)

    def test_same_cluster_is_rejected(self) -> None:
        with self.assertRaises(ContractViolation):
            cluster_similarity(1, 1, self.matching, self.clustering)

    def test_weights_agree_with_pairwise_similarity(self) -> None:
        weights = cluster_similarity_weights(self.matching, self.clustering)

        self.assertEqual(set(weights), {(0, 1), (0, 2)})
        for (first, second), weight in weights.items():
            self.assertAlmostEqual(
                weight, cluster_similarity(first, second, self.matching, self.clustering)
            )


class MatchClustersTests(SimpleTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.clustering = Clustering.from_labels([0, 1, 2, 3])

    def test_greedy_takes_heaviest_pair_first(self) -> None:
        weights = {(0, 1): 0.9, (0, 2): 0.8, (1, 2): 0.7}

        match_map = match_clusters(self.clustering, weights, 0.5)

        self.assertEqual(dict(match_map.match), {0: 1, 1: 0})
        self.assertIsNone(match_map.mate(2))
        # Every other valid matching with one pair is lighter.
        for pair, weight in weights.items():
            if pair != (0, 1):
                self.assertLess(weight, weights[(0, 1)])

    def test_nothing_above_beta(self) -> None:
        match_map = match_clusters(self.clustering, {(0, 1): 0.4, (2, 3): 0.5}, 0.5)

        self.assertEqual(len(match_map), 0)

    def test_weight_equal_to_beta_stays_unmatched(self) -> None:
        match_map = match_clusters(self.clustering, {(0, 1): 0.5}, 0.5)

        self.assertIsNone(match_map.mate(0))

    def test_ties_are_broken_by_pair(self) -> None:
        weights = {(2, 3): 0.8, (1, 2): 0.8, (0, 1): 0.8}

        match_map = match_clusters(self.clustering, weights, 0.1)

        self.assertEqual(match_map.pairs(), ((0, 1), (2, 3)))

    def test_unknown_cluster_is_rejected(self) -> None:
        with self.assertRaises(ContractViolation):
            match_clusters(self.clustering, {(0, 9): 0.9}, 0.1)


class ClusterMatchMapTests(SimpleTestCase):
    def test_one_sided_map_is_rejected(self) -> None:
        with self.assertRaises(ContractViolation):
            ClusterMatchMap({0: 1})

    def test_self_match_is_rejected(self) -> None:
        with self.assertRaises(ContractViolation):
            ClusterMatchMap({2: 2})

    def test_from_pairs_is_involutive(self) -> None:
        match_map = ClusterMatchMap.from_pairs([(0, 3), (1, 2)])

        for cluster in (0, 1, 2, 3):
            self.assertEqual(match_map.mate(match_map.mate(cluster)), cluster)
        self.assertEqual(len(match_map), 2)


class BuildCMatchTests(SimpleTestCase):
    def setUp(self) -> None:
        super().setUp()
        self.graph = make_graph(TOY_NODES, TOY_EDGES, attributes=toy_vectors(TOY_NODES, 6, seed=12))
        self.clustering = mcl_cluster(self.graph)

    def test_matched_pairs_exceed_beta_and_map_is_involutive(self) -> None:
        result = build_cmatch(self.graph, self.clustering)

        beta = result.thresholds.beta
        for first, second in result.match_map.pairs():
            self.assertGreater(result.weights[(first, second)], beta)
        for cluster, mate in result.match_map.match.items():
            self.assertEqual(result.match_map.mate(mate), cluster)
        self.assertTrue(np.all(result.node_matching.similarity > result.thresholds.gamma))

    def test_metadata_records_populations(self) -> None:
        result = build_cmatch(self.graph, self.clustering)
        sizes = [len(members) for members in self.clustering.clusters]
        cross = TOY_NODES * (TOY_NODES - 1) // 2 - sum(s * (s - 1) // 2 for s in sizes)

        self.assertEqual(result.metadata["cross_cluster_pairs"], cross)
        self.assertEqual(result.metadata["sampled_pairs"], cross)
        self.assertEqual(result.metadata["matched_cluster_pairs"], len(result.match_map))
        self.assertEqual(result.metadata["gamma"], result.thresholds.gamma)

    def test_sampling_is_seeded_and_distinct(self) -> None:
        left, right = sample_cross_cluster_pairs(self.clustering, 10, seed=3)
        again_left, again_right = sample_cross_cluster_pairs(self.clustering, 10, seed=3)

        self.assertEqual(len(set(zip(left.tolist(), right.tolist()))), 10)
        self.assertTrue(np.array_equal(left, again_left))
        self.assertTrue(np.array_equal(right, again_right))
        labels = self.clustering.labels
        self.assertTrue(np.all(labels[left] != labels[right]))
        self.assertTrue(np.all(left < right))

    def test_small_sample_uses_fewer_pairs(self) -> None:
        result = build_cmatch(self.graph, self.clustering, ThresholdParams(sample_size=5, seed=1))

        self.assertEqual(result.metadata["sampled_pairs"], 5)
