import numpy as np
import pytest

from tvlab.errors import (
    DisconnectedGraphError,
    DisconnectedSkeletonError,
    InvalidParamsError,
    SpectralBoundError,
)
from tvlab.graphcore import Graph, laplacian, laplacian_monotone_psd_check, spectral_summary
from tvlab.gossip import (
    GossipState,
    accelerated_gossip_nrl,
    chebyshev_degree,
    chebyshev_static,
    effective_graph,
    nrl_init,
    nrl_parameters,
    nrl_step,
    plain_gossip,
    rounds_for_contraction,
    verify_ct_sandwich,
)


def path(n):
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def random_skeleton_sequence(n, steps, rng, max_extra=3):
    base = [(i, i + 1) for i in range(n - 1)]
    out = []
    for _ in range(steps):
        extra = set()
        for _ in range(int(rng.integers(0, max_extra + 1))):
            a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
            if a != b:
                extra.add((min(a, b), max(a, b)))
        out.append(Graph.from_edges(n, base + sorted(extra)))
    return out


def sequence_bounds(graphs):
    lam_max = max(spectral_summary(g).lambda_max for g in graphs)
    lam_min = spectral_summary(effective_graph(graphs)).lambda_min_plus
    return lam_max, lam_min


def dense_reference(x0, graphs, T, lam_max, lam_min):
    """Closed-form matrix recursion: the oracle for the per-node updates."""
    eta, beta, _ = nrl_parameters(lam_max, lam_min)
    x = np.array(x0, dtype=float)
    y = x.copy()
    eff = set(graphs[0].edge_set)
    for k in range(T):
        eff &= graphs[k].edge_set
        w = laplacian(Graph(x.shape[0], tuple(sorted(eff))))
        y_next = x - eta * (w @ x)
        x = (1.0 + beta) * y_next - beta * y
        y = y_next
    return x


class TestEffectiveGraph:
    def test_constant_sequence(self):
        g = path(5)
        assert effective_graph([g, g, g]) == g

    def test_two_graph_intersection(self):
        g1 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        g2 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
        assert effective_graph([g1, g2]).edges == ((0, 1), (1, 2), (2, 3))

    def test_skeleton_always_contained(self):
        rng = np.random.default_rng(0)
        graphs = random_skeleton_sequence(10, 40, rng)
        eff = effective_graph(graphs)
        assert set(path(10).edges) <= set(eff.edges)

    def test_monotone_prefixes_shrink(self):
        rng = np.random.default_rng(1)
        graphs = random_skeleton_sequence(8, 30, rng)
        prev = effective_graph(graphs[:1])
        for k in range(2, len(graphs) + 1):
            cur = effective_graph(graphs[:k])
            assert cur.edge_set <= prev.edge_set
            assert laplacian_monotone_psd_check(prev, cur)
            prev = cur

    def test_empty_sequence_rejected(self):
        with pytest.raises(InvalidParamsError):
            effective_graph([])


class TestAcceleratedGossip:
    def test_consensus_input_is_fixed_point(self):
        g = path(6)
        s = spectral_summary(g)
        x0 = np.ones((6, 2)) * 4.2
        xt, ct = accelerated_gossip_nrl(x0, [g] * 10, 10, s.lambda_max, s.lambda_min_plus)
        assert np.max(np.abs(xt - x0)) <= 1e-12
        assert np.max(np.abs(ct)) <= 1e-12

    def test_matches_dense_matrix_recursion(self):
        rng = np.random.default_rng(2)
        graphs = random_skeleton_sequence(10, 50, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        x0 = rng.standard_normal((10, 3))
        xt, _ = accelerated_gossip_nrl(x0, graphs, 50, lam_max, lam_min)
        ref = dense_reference(x0, graphs, 50, lam_max, lam_min)
        assert np.max(np.abs(xt - ref)) <= 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(3)
        graphs = random_skeleton_sequence(9, 30, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        u = rng.standard_normal((9, 5))
        v = rng.standard_normal((9, 5))
        a, b = 1.7, -0.3
        _, ct_u = accelerated_gossip_nrl(u, graphs, 30, lam_max, lam_min)
        _, ct_v = accelerated_gossip_nrl(v, graphs, 30, lam_max, lam_min)
        _, ct_m = accelerated_gossip_nrl(a * u + b * v, graphs, 30, lam_max, lam_min)
        resid = np.linalg.norm(ct_m - a * ct_u - b * ct_v) / np.linalg.norm(ct_m)
        assert resid <= 1e-10

    def test_mean_preserved_every_step(self):
        rng = np.random.default_rng(4)
        graphs = random_skeleton_sequence(8, 25, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        eta, beta, _ = nrl_parameters(lam_max, lam_min)
        x0 = rng.standard_normal((8, 2))
        state = nrl_init(x0, graphs[0], eta, beta)
        mean0 = x0.sum(axis=0)
        for g in graphs:
            nrl_step(state, g)
            assert np.allclose(state.x.sum(axis=0), mean0, rtol=1e-10)
            assert np.allclose(state.y.sum(axis=0), mean0, rtol=1e-10)

    def test_neighbor_sets_shrink_monotonically(self):
        rng = np.random.default_rng(5)
        graphs = random_skeleton_sequence(8, 25, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        eta, beta, _ = nrl_parameters(lam_max, lam_min)
        state = nrl_init(np.zeros((8, 1)), graphs[0], eta, beta)
        prev = [set(s) for s in state.neighbor_sets]
        for g in graphs:
            nrl_step(state, g)
            for i in range(8):
                assert state.neighbor_sets[i] <= prev[i]
                # symmetry of the effective graph
                for j in state.neighbor_sets[i]:
                    assert i in state.neighbor_sets[j]
            prev = [set(s) for s in state.neighbor_sets]

    def test_output_rows_sum_to_zero(self):
        rng = np.random.default_rng(6)
        graphs = random_skeleton_sequence(9, 30, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        x = rng.standard_normal((9, 4))
        _, ct = accelerated_gossip_nrl(x, graphs, 30, lam_max, lam_min)
        assert np.max(np.abs(ct.sum(axis=0))) <= 1e-10 * np.max(np.linalg.norm(x, axis=0))

    def test_vector_input_round_trip(self):
        g = path(5)
        s = spectral_summary(g)
        x0 = np.arange(5.0)
        xt, ct = accelerated_gossip_nrl(x0, [g] * 5, 5, s.lambda_max, s.lambda_min_plus)
        assert xt.shape == (5,)
        assert np.allclose(x0 - xt, ct)

    def test_spectral_bound_enforced_on_demand(self):
        g = path(6)
        with pytest.raises(SpectralBoundError):
            accelerated_gossip_nrl(
                np.zeros(6), [g] * 3, 3, lambda_max=0.5, lambda_min_plus=0.1, check_spectral=True
            )

    def test_disconnected_skeleton_detected(self):
        g1 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        g2 = Graph.from_edges(4, [(0, 1), (2, 3), (0, 3)])
        with pytest.raises(DisconnectedSkeletonError):
            accelerated_gossip_nrl(np.zeros(4), [g1, g2, g2], 3, 4.0, 0.1, check_spectral=True)

    def test_requires_enough_graphs(self):
        g = path(4)
        with pytest.raises(InvalidParamsError):
            accelerated_gossip_nrl(np.zeros(4), [g], 5, 4.0, 0.5)


class TestSandwich:
    def test_bounds_hold_on_skeleton_sequence(self):
        rng = np.random.default_rng(7)
        graphs = random_skeleton_sequence(12, 200, rng)
        lam_max, lam_min = sequence_bounds(graphs)
        rep = verify_ct_sandwich(graphs, lam_max, lam_min, trials=40, seed=17)
        assert rep.all_pass
        assert all(rep.lower - 1e-9 <= r <= rep.upper + 1e-9 for r in rep.ratios)

    def test_complete_graph_single_round(self):
        g = Graph.from_edges(5, ((i, j) for i in range(5) for j in range(i + 1, 5)))
        s = spectral_summary(g)
        assert s.chi == pytest.approx(1.0, rel=1e-10)
        rep = verify_ct_sandwich([g] * 4, s.lambda_max, s.lambda_min_plus, trials=10, seed=3)
        assert rep.all_pass

    def test_round_count_formula(self):
        assert rounds_for_contraction(1.0) >= 1
        chi = 9.0
        assert rounds_for_contraction(chi) == int(np.ceil(np.sqrt(chi) * np.log(4 * chi)))


class TestChebyshev:
    def test_degree_one_is_a_scaled_gossip_step(self):
        g = path(7)
        s = spectral_summary(g)
        rng = np.random.default_rng(8)
        x0 = rng.standard_normal(7)
        out = chebyshev_static(x0, g, 1)
        eta = 2.0 / (s.lambda_max + s.lambda_min_plus)
        expected = x0 - eta * (laplacian(g) @ x0)
        assert np.allclose(out, expected, atol=1e-12)

    def test_consensus_component_preserved(self):
        g = path(9)
        x0 = np.full(9, 2.5)
        out = chebyshev_static(x0, g, 4)
        assert np.allclose(out, x0, atol=1e-12)

    def test_contraction_matches_eigendecomposition_oracle(self):
        g = path(16)
        s = spectral_summary(g)
        K = chebyshev_degree(g)
        rng = np.random.default_rng(9)
        x0 = rng.standard_normal(16)
        x0 -= x0.mean()
        out = chebyshev_static(x0, g, K)

        eigval, eigvec = np.linalg.eigh(laplacian(g))

        def cheb(k, z):
            a, b = 1.0, z
            for _ in range(k - 1):
                a, b = b, 2.0 * z * b - a
            return b

        xi = (s.lambda_max + s.lambda_min_plus - 2.0 * eigval) / (s.lambda_max - s.lambda_min_plus)
        c0 = (s.lambda_max + s.lambda_min_plus) / (s.lambda_max - s.lambda_min_plus)
        pk = np.array([cheb(K, z) for z in xi]) / cheb(K, c0)
        oracle = eigvec @ (pk * (eigvec.T @ x0))
        assert np.max(np.abs(out - oracle)) <= 1e-10

    def test_zero_mean_component_contracts(self):
        g = path(16)
        K = chebyshev_degree(g)
        rng = np.random.default_rng(10)
        x0 = rng.standard_normal(16)
        x0 -= x0.mean()
        out = chebyshev_static(x0, g, K)
        assert np.linalg.norm(out) < np.linalg.norm(x0)

    def test_mean_preserved(self):
        g = path(10)
        rng = np.random.default_rng(11)
        x0 = rng.standard_normal((10, 3))
        out = chebyshev_static(x0, g, 3)
        assert np.allclose(out.sum(axis=0), x0.sum(axis=0), rtol=1e-10)

    def test_disconnected_rejected(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(DisconnectedGraphError):
            chebyshev_static(np.zeros(4), g, 2)


class TestPlainGossip:
    def test_contracts_disagreement(self):
        g = path(8)
        s = spectral_summary(g)
        rng = np.random.default_rng(12)
        x0 = rng.standard_normal(8)
        out = plain_gossip(x0, [g] * 60, 60, 1.0 / s.lambda_max)
        assert np.std(out) < 0.1 * np.std(x0)
        assert out.mean() == pytest.approx(x0.mean(), rel=1e-9)
