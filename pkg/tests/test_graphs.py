"""Graph generation, Laplacians, partitions and the ground-truth model."""
import numpy as np
import pytest

from ggmlab.graphs import (GraphModel, GraphSpec, binary_tree,
                           build_ground_truth, erdos_renyi, generate_graph,
                           grid, marginal_precision, normalized_laplacian,
                           partition_vertices, sparse_lowrank_split)


class TestGeneration:
    def test_binary_tree_counts(self):
        g = binary_tree(3)
        assert g.n == 15
        assert len(g.edges) == 14

    def test_grid_counts(self):
        g = grid(5, 5)
        assert g.n == 25
        assert len(g.edges) == 40  # w(h-1) + h(w-1)

    def test_erdos_renyi_mean_edges(self):
        # Monte-Carlo: mean edge count ~ C(15,2) * 0.05 = 5.25
        counts = [len(erdos_renyi(15, 0.05, seed=s).edges)
                  for s in range(10_000)]
        assert abs(np.mean(counts) - 5.25) < 0.15

    def test_determinism(self):
        a = erdos_renyi(30, 0.2, seed=123)
        b = erdos_renyi(30, 0.2, seed=123)
        assert a.edges == b.edges

    @pytest.mark.parametrize("spec", [
        GraphSpec("binary_tree", height=0),
        GraphSpec("grid", width=1, height=5),
        GraphSpec("erdos_renyi", n=1, p=0.5),
        GraphSpec("erdos_renyi", n=10, p=1.5),
    ])
    def test_invalid_parameters(self, spec):
        with pytest.raises(ValueError):
            generate_graph(spec)

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            GraphModel.from_edges(3, [(1, 1)])


class TestNormalizedLaplacian:
    def test_single_edge(self):
        g = GraphModel.from_edges(2, [(0, 1)])
        np.testing.assert_allclose(g.laplacian, [[1, -1], [-1, 1]])

    def test_empty_graph_is_zero(self):
        g = GraphModel.from_edges(4, [])
        np.testing.assert_allclose(g.laplacian, np.zeros((4, 4)))

    def test_eigenvalue_range(self):
        for g in (grid(3, 3), binary_tree(4), erdos_renyi(20, 0.2, seed=5)):
            ev = np.linalg.eigvalsh(g.laplacian)
            assert ev.min() > -1e-10
            assert ev.max() < 2 + 1e-10

    def test_connected_graph_has_zero_eigenvalue(self):
        ev = np.linalg.eigvalsh(grid(3, 3).laplacian)
        assert abs(ev[0]) < 1e-10

    def test_isolated_vertex_row_is_zero(self):
        g = GraphModel.from_edges(3, [(0, 1)])
        np.testing.assert_allclose(g.laplacian[2], 0.0)
        np.testing.assert_allclose(normalized_laplacian(g), g.laplacian)


class TestPartition:
    def test_sizes(self):
        g = binary_tree(3)
        part = partition_vertices(g, 10, seed=0)
        assert part.n1 == 10 and part.n2 == 5
        assert sorted(part.v1 + part.v2) == list(range(15))

    def test_n1_boundary(self):
        g = grid(2, 2)
        part = partition_vertices(g, 3, seed=0)
        assert part.n2 == 1

    def test_determinism(self):
        g = grid(4, 4)
        a = partition_vertices(g, 7, seed=42)
        b = partition_vertices(g, 7, seed=42)
        assert a.v1 == b.v1 and a.v2 == b.v2

    @pytest.mark.parametrize("n1", [0, 15, 20])
    def test_out_of_range(self, n1):
        with pytest.raises(ValueError):
            partition_vertices(binary_tree(3), n1, seed=0)


class TestGroundTruth:
    def test_two_by_two_schur(self):
        # Theta = [[2,1],[1,2]] split 1/1: Schur complement 2 - 1/2 = 1.5
        g = GraphModel.from_edges(2, [(0, 1)])
        lap = np.array([[2.0, 1.0], [1.0, 2.0]])
        pp = build_ground_truth(
            GraphModel(n=2, edges=g.edges, topology_tag="custom",
                       laplacian=lap - 1e-3 * np.eye(2)),
            1e-3, partition_vertices(g, 1, seed=0))
        np.testing.assert_allclose(pp.marginal_theta1, [[1.5]], atol=1e-12)
        np.testing.assert_allclose(pp.marginal_theta1,
                                   np.linalg.inv(pp.sigma[:1, :1]), atol=1e-10)

    def test_disconnected_blocks_marginal_is_block(self):
        g = GraphModel.from_edges(4, [(0, 1), (2, 3)])
        part = partition_vertices(g, 2, seed=None)
        # force v1 = {0,1}, v2 = {2,3}: no cross edges
        from ggmlab.graphs import Partition
        part = Partition(v1=(0, 1), v2=(2, 3))
        pp = build_ground_truth(g, 0.5, part)
        np.testing.assert_allclose(pp.marginal_theta1, pp.theta1, atol=1e-12)

    def test_random_pd_matches_inversion_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.standard_normal((4, 4))
            theta = a @ a.T + 4 * np.eye(4)
            g = GraphModel(n=4, edges=frozenset(), topology_tag="custom",
                           laplacian=theta - 0.1 * np.eye(4))
            from ggmlab.graphs import Partition
            pp = build_ground_truth(g, 0.1, Partition(v1=(0, 1), v2=(2, 3)))
            oracle = np.linalg.inv(np.linalg.inv(theta)[:2, :2])
            np.testing.assert_allclose(pp.marginal_theta1, oracle, atol=1e-10)
            np.testing.assert_allclose(marginal_precision(pp),
                                       pp.marginal_theta1, atol=1e-12)

    def test_rejects_nonpositive_epsilon(self):
        g = binary_tree(2)
        with pytest.raises(ValueError):
            build_ground_truth(g, 0.0, partition_vertices(g, 3, seed=1))

    def test_marginal_identity_on_generated_models(self):
        # marginal precision times the target covariance block is identity
        rng = np.random.default_rng(9)
        for spec in (GraphSpec("grid", width=4, height=3),
                     GraphSpec("binary_tree", height=3),
                     GraphSpec("erdos_renyi", n=12, p=0.3)):
            g = generate_graph(spec, seed=rng.integers(2**32))
            part = partition_vertices(g, g.n // 2, seed=rng.integers(2**32))
            pp = build_ground_truth(g, 1e-3, part)
            n1 = part.n1
            prod = pp.marginal_theta1 @ pp.sigma[:n1, :n1]
            np.testing.assert_allclose(prod, np.eye(n1), atol=1e-8)

    def test_theta_positive_definite(self):
        g = erdos_renyi(15, 0.05, seed=7)  # sparse: isolated vertices likely
        part = partition_vertices(g, 10, seed=8)
        pp = build_ground_truth(g, 1e-3, part)
        assert np.linalg.eigvalsh(pp.theta)[0] >= 1e-3 - 1e-12

    def test_support_equals_edges(self):
        g = grid(3, 4)
        part = partition_vertices(g, 7, seed=11)
        pp = build_ground_truth(g, 1e-3, part)
        off = np.abs(pp.theta - np.diag(np.diag(pp.theta)))
        iu, ju = np.nonzero(np.triu(off, 1) > 1e-12)
        got = {(min(pp.perm[i], pp.perm[j]), max(pp.perm[i], pp.perm[j]))
               for i, j in zip(iu, ju)}
        assert got == set(g.edges)

    def test_sparse_lowrank_split(self):
        g = grid(3, 3)
        part = partition_vertices(g, 5, seed=2)
        pp = build_ground_truth(g, 1e-3, part)
        c, m = sparse_lowrank_split(pp)
        np.testing.assert_allclose(c - m, pp.marginal_theta1, atol=1e-12)
        np.testing.assert_allclose(c, pp.theta1)
        assert np.linalg.eigvalsh(m)[0] >= -1e-10  # marginalization term PSD

    def test_target_edges_reindexing(self):
        g = grid(3, 3)
        part = partition_vertices(g, 5, seed=4)
        pp = build_ground_truth(g, 1e-3, part)
        edges = pp.target_edges(g)
        v1 = set(range(part.n1))
        assert all(i in v1 and j in v1 for i, j in edges)
        # back-mapped edges are real edges of g
        back = {(min(pp.perm[i], pp.perm[j]), max(pp.perm[i], pp.perm[j]))
                for i, j in edges}
        assert back <= set(g.edges)
