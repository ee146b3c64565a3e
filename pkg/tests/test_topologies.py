import numpy as np
import pytest

from tvlab.errors import FamilyMismatchError, InvalidParamsError
from tvlab.graphcore import edge_diff, spectral_summary
from tvlab.topologies import (
    bethe_tree,
    compare_nested_coords,
    mirror_permutation,
    nested_order,
    nested_path_tree,
    partition_roles,
    rotating_star,
)


def bfs_diameter(graph):
    import collections

    def far(src):
        dist = {src: 0}
        q = collections.deque([src])
        while q:
            v = q.popleft()
            for w in graph.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        v = max(dist, key=dist.get)
        return v, dist[v]

    a, _ = far(0)
    _, d = far(a)
    return d


class TestBetheTree:
    def test_smallest_is_a_star(self):
        t = bethe_tree(3, 2)
        assert t.n == 4
        assert t.graph.degree(t.root) == 3
        assert all(t.graph.degree(v) == 1 for v in range(1, 4))

    def test_depth3_binary_has_7_vertices(self):
        assert bethe_tree(2, 3).n == 7

    @pytest.mark.parametrize("d,k", [(2, 4), (3, 3), (4, 4), (5, 3), (2, 8)])
    def test_vertex_count_formula(self, d, k):
        t = bethe_tree(d, k)
        assert t.n == (d**k - 1) // (d - 1)
        assert len(t.graph.edges) == t.n - 1
        assert t.graph.is_connected()

    def test_degree_profile(self):
        t = bethe_tree(3, 4)
        assert t.graph.degree(t.root) == 3
        for v in range(1, t.n):
            if t.level[v] < t.k:
                assert t.graph.degree(v) == 4
            else:
                assert t.graph.degree(v) == 1

    def test_levels_and_children_are_bfs_ordered(self):
        t = bethe_tree(3, 3)
        assert t.level[0] == 1
        assert t.children[0] == (1, 2, 3)
        assert t.children[1] == (4, 5, 6)

    def test_invalid_params(self):
        with pytest.raises(InvalidParamsError):
            bethe_tree(1, 3)
        with pytest.raises(InvalidParamsError):
            bethe_tree(3, 1)


class TestNestedPathTree:
    def test_single_level_is_a_path(self):
        t = nested_path_tree(1, 5)
        assert t.n == 5
        degs = sorted(t.graph.degree(v) for v in range(5))
        assert degs == [1, 1, 2, 2, 2]

    @pytest.mark.parametrize("d,k", [(2, 3), (2, 4), (3, 3), (3, 4), (1, 9)])
    def test_vertex_count_formula(self, d, k):
        t = nested_path_tree(d, k)
        assert t.n == sum(k**g for g in range(1, d + 1))
        assert len(t.graph.edges) == t.n - 1
        assert t.graph.is_connected()

    @pytest.mark.parametrize("d,k", [(2, 3), (2, 4), (3, 3), (1, 9)])
    def test_longest_path_vertex_count(self, d, k):
        # the construction counts path length in vertices (a level-1 path
        # "of length k" has k vertices), so the longest path holds
        # (2 d - 1) k vertices, i.e. (2 d - 1) k - 1 edges
        assert bfs_diameter(nested_path_tree(d, k).graph) + 1 == (2 * d - 1) * k

    def test_coordinate_adjacency_rule(self):
        t = nested_path_tree(3, 3)
        coords = t.coordinates
        label_of = {c: v for v, c in enumerate(coords)}
        for v, c in enumerate(coords):
            expected = set()
            if c[-1] >= 2:
                expected.add(label_of[c[:-1] + (c[-1] - 1,)])
            if c[-1] <= t.k - 1:
                expected.add(label_of[c[:-1] + (c[-1] + 1,)])
            if len(c) < t.d:
                expected.add(label_of[c + (t.k,)])
            if c[-1] == t.k and len(c) > 1:
                expected.add(label_of[c[:-1]])
            assert t.graph.neighbors(v) == frozenset(expected)

    def test_linear_order_matches_coordinate_comparator(self):
        # the traversal order must agree with the prefix-then-lexicographic
        # rule on coordinates, brute-force sorted
        import functools

        for d, k in [(1, 6), (2, 3), (2, 4), (3, 3)]:
            t = nested_path_tree(d, k)
            by_comparator = sorted(
                range(t.n),
                key=functools.cmp_to_key(
                    lambda a, b: compare_nested_coords(t.coordinates[a], t.coordinates[b])
                ),
            )
            assert list(nested_order(t)) == by_comparator

    def test_max_laplacian_eigenvalue_window(self):
        for d, k in [(2, 3), (2, 4), (3, 3)]:
            lam_max = spectral_summary(nested_path_tree(d, k).graph).lambda_max
            assert 4.0 <= lam_max <= 6.0

    def test_max_degree_is_three(self):
        for d, k in [(2, 4), (3, 3), (3, 4)]:
            assert nested_path_tree(d, k).max_degree() == 3

    def test_order_on_family_mismatch(self):
        with pytest.raises(FamilyMismatchError):
            nested_order(bethe_tree(2, 3))


class TestRotatingStar:
    def test_center_follows_step(self):
        g = rotating_star(4, 0)
        assert g.degree(0) == 3
        assert rotating_star(4, 4) == g

    def test_consecutive_steps_change_almost_all_edges(self):
        # two stars on one vertex set always share the old-center/new-center
        # edge, so exactly 2 (n - 1) - 2 edges differ; 2 (n - 1) is the
        # budget-side upper bound
        for n in (4, 5, 9):
            diff = edge_diff(rotating_star(n, 2), rotating_star(n, 3))
            assert diff == 2 * (n - 1) - 2
            assert diff <= 2 * (n - 1)

    def test_too_small(self):
        with pytest.raises(InvalidParamsError):
            rotating_star(2, 0)


class TestPartitions:
    def test_bethe_example_sizes(self):
        t = bethe_tree(6, 3)
        p = partition_roles(t, "bethe", 3)
        assert len(p.v1) == len(p.v2) == 2 * (6**2 - 1) // 5 == 14

    def test_binary_example_sizes(self):
        t = bethe_tree(2, 4)
        p = partition_roles(t, "binary")
        assert len(p.v1) == len(p.v2) == 2 ** (4 - 2) - 1 == 3

    def test_nested_example_sizes(self):
        t = nested_path_tree(2, 3)
        p = partition_roles(t, "nested")
        assert len(p.v1) == len(p.v2) == 3

    @pytest.mark.parametrize(
        "family,tree,t",
        [
            ("bethe", bethe_tree(4, 3), 3),
            ("bethe", bethe_tree(6, 4), 4),
            ("binary", bethe_tree(2, 6), None),
            ("nested", nested_path_tree(2, 4), None),
            ("nested", nested_path_tree(3, 3), None),
            ("nested", nested_path_tree(1, 7), None),
        ],
    )
    def test_partition_is_disjoint_cover(self, family, tree, t):
        p = partition_roles(tree, family, t)
        assert len(p.v1) == len(p.v2)
        assert not (p.v1 & p.v2)
        assert p.v1 | p.v2 | p.w == frozenset(range(tree.n))
        assert len(p.v1) + len(p.v2) + len(p.w) == tree.n

    def test_bethe_class_size_lower_bound(self):
        # at t = 3 each class holds at least n / 12 vertices
        for d, k in [(3, 2), (3, 3), (4, 3), (6, 3)]:
            t = bethe_tree(d, k)
            p = partition_roles(t, "bethe", 3)
            assert len(p.v1) >= t.n / 12

    def test_bethe_classes_are_extreme_subtrees(self):
        t = bethe_tree(3, 3)
        p = partition_roles(t, "bethe", 3)
        assert p.v1 == t.subtree(t.children[0][0])
        assert p.v2 == t.subtree(t.children[0][-1])

    def test_nested_classes_are_mirror_images(self):
        t = nested_path_tree(2, 4)
        p = partition_roles(t, "nested")
        sigma = mirror_permutation(t)
        assert {sigma[v] for v in p.v1} == p.v2

    def test_role_of(self):
        p = partition_roles(bethe_tree(3, 3), "bethe", 3)
        roles = {p.role_of(v) for v in range(13)}
        assert roles == {"v1", "v2", "w"}

    def test_family_mismatch(self):
        with pytest.raises(FamilyMismatchError):
            partition_roles(nested_path_tree(2, 3), "bethe", 3)
        with pytest.raises(FamilyMismatchError):
            partition_roles(bethe_tree(3, 3), "binary")

    def test_param_validation(self):
        with pytest.raises(InvalidParamsError):
            partition_roles(bethe_tree(3, 3), "bethe", 2)  # needs t > 2
        with pytest.raises(InvalidParamsError):
            partition_roles(bethe_tree(2, 3), "binary")  # needs k >= 4
        with pytest.raises(InvalidParamsError):
            partition_roles(nested_path_tree(2, 2), "nested")  # needs k >= 3


class TestMirror:
    @pytest.mark.parametrize(
        "tree",
        [bethe_tree(3, 3), bethe_tree(2, 5), nested_path_tree(2, 4), nested_path_tree(3, 3), nested_path_tree(1, 8)],
    )
    def test_involutive_automorphism(self, tree):
        sigma = mirror_permutation(tree)
        assert sorted(sigma) == list(range(tree.n))
        assert all(sigma[sigma[v]] == v for v in range(tree.n))
        mapped = {tuple(sorted((sigma[a], sigma[b]))) for a, b in tree.graph.edges}
        assert mapped == set(tree.graph.edges)

    def test_bethe_mirror_image_is_reversed_traversal(self):
        t = bethe_tree(3, 4)
        sigma = mirror_permutation(t)
        fwd = t.postorder()
        assert tuple(sigma[v] for v in fwd) == t.postorder(reverse_children=True)

    def test_nested_mirror_flips_top_coordinate(self):
        t = nested_path_tree(2, 5)
        sigma = mirror_permutation(t)
        for v, c in enumerate(t.coordinates):
            assert t.coordinates[sigma[v]] == (t.k + 1 - c[0],) + c[1:]


class TestOrderedTreeHelpers:
    def test_postorder_visits_children_before_parents(self):
        t = bethe_tree(2, 4)
        seen = set()
        for v in t.postorder():
            for c in t.children[v]:
                assert c in seen
            seen.add(v)

    def test_parent_of_root_is_sentinel(self):
        t = bethe_tree(3, 3)
        assert t.parent[t.root] == -1
        for v in range(1, t.n):
            assert v in t.children[t.parent[v]]

    def test_subtree_sizes(self):
        t = bethe_tree(3, 3)
        assert len(t.subtree(t.root)) == t.n
        assert len(t.subtree(t.children[0][0])) == 4
