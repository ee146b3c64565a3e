"""Deterministic tree families and role partitions for the schedule generators.

All generators label vertices in BFS order from the root with children kept
in construction order, so identical parameters always produce identical
labelings. Each tree carries the ordering metadata (children lists, levels,
and, for the nested-path family, per-vertex coordinate tuples) that the
graph-changing schemes traverse.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .errors import FamilyMismatchError, InvalidParamsError
from .graphcore import Graph


@dataclass(frozen=True)
class OrderedTree:
    """A rooted tree plus the traversal metadata the schedules need.

    children[v] lists v's children in construction order. level[v] is the
    depth from the root (1-based) for the Bethe family and the induction
    level for the nested-path family. coordinates is nested-path only.
    """

    graph: Graph
    root: int
    children: tuple[tuple[int, ...], ...]
    level: tuple[int, ...]
    coordinates: tuple[tuple[int, ...], ...] | None
    family: str
    d: int
    k: int

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def parent(self) -> tuple[int, ...]:
        par = [-1] * self.n
        for v, kids in enumerate(self.children):
            for c in kids:
                par[c] = v
        return tuple(par)

    def postorder(self, reverse_children: bool = False) -> tuple[int, ...]:
        """Depth-first postorder; children visited in (possibly reversed) order."""
        out: list[int] = []
        # Iterative on (vertex, expanded) to survive deep paths.
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            v, expanded = stack.pop()
            if expanded:
                out.append(v)
                continue
            stack.append((v, True))
            kids = self.children[v]
            ordered = kids if reverse_children else tuple(reversed(kids))
            for c in ordered:
                stack.append((c, False))
        return tuple(out)

    def subtree(self, v: int) -> frozenset[int]:
        acc = [v]
        i = 0
        while i < len(acc):
            acc.extend(self.children[acc[i]])
            i += 1
        return frozenset(acc)

    def max_degree(self) -> int:
        return max(self.graph.degree(v) for v in range(self.n))


@dataclass(frozen=True)
class RolePartition:
    """Disjoint vertex classes: two information-carrying sets and the rest."""

    v1: frozenset[int]
    v2: frozenset[int]
    w: frozenset[int]

    def role_of(self, v: int) -> str:
        if v in self.v1:
            return "v1"
        if v in self.v2:
            return "v2"
        return "w"


def bethe_tree(d: int, k: int) -> OrderedTree:
    """Rooted tree with root degree d, inner degree d+1 and leaves at depth k.

    Vertex count is (d**k - 1) / (d - 1).
    """
    if d < 2 or k < 2:
        raise InvalidParamsError(f"bethe tree needs d >= 2, k >= 2, got d={d}, k={k}")
    n = (d**k - 1) // (d - 1)
    children: list[list[int]] = [[] for _ in range(n)]
    level = [0] * n
    level[0] = 1
    next_label = 1
    frontier = [0]
    for lev in range(2, k + 1):
        new_frontier = []
        for v in frontier:
            for _ in range(d):
                children[v].append(next_label)
                level[next_label] = lev
                new_frontier.append(next_label)
                next_label += 1
        frontier = new_frontier
    assert next_label == n
    edges = [(v, c) for v in range(n) for c in children[v]]
    return OrderedTree(
        graph=Graph.from_edges(n, edges),
        root=0,
        children=tuple(tuple(c) for c in children),
        level=tuple(level),
        coordinates=None,
        family="bethe",
        d=d,
        k=k,
    )


def _nested_coord_children(coord: tuple[int, ...], d: int, k: int) -> list[tuple[int, ...]]:
    """Children of a coordinate vertex: in-path predecessor, then attached root."""
    kids: list[tuple[int, ...]] = []
    if coord[-1] >= 2:
        kids.append(coord[:-1] + (coord[-1] - 1,))
    if len(coord) < d:
        kids.append(coord + (k,))
    return kids


def nested_path_tree(d: int, k: int) -> OrderedTree:
    """Tree of nested k-vertex paths, d levels deep; n = k + k^2 + ... + k^d.

    Level 1 is a path whose positions are numbered 1..k with the root at
    position k. Every vertex at level g < d carries one subordinate path,
    attached by a single edge from the vertex to that path's position-k end.
    A vertex's coordinate tuple lists its ancestors' path positions followed
    by its own.
    """
    if d < 1 or k < 2:
        raise InvalidParamsError(f"nested path tree needs d >= 1, k >= 2, got d={d}, k={k}")
    root_coord = (k,)
    labels: dict[tuple[int, ...], int] = {}
    coords: list[tuple[int, ...]] = []
    children: list[list[int]] = []
    queue = deque([root_coord])
    labels[root_coord] = 0
    coords.append(root_coord)
    children.append([])
    while queue:
        coord = queue.popleft()
        v = labels[coord]
        for kid in _nested_coord_children(coord, d, k):
            labels[kid] = len(coords)
            coords.append(kid)
            children.append([])
            children[v].append(labels[kid])
            queue.append(kid)
    n = len(coords)
    assert n == sum(k**g for g in range(1, d + 1))
    edges = [(v, c) for v in range(n) for c in children[v]]
    return OrderedTree(
        graph=Graph.from_edges(n, edges),
        root=0,
        children=tuple(tuple(c) for c in children),
        level=tuple(len(c) for c in coords),
        coordinates=tuple(coords),
        family="nested",
        d=d,
        k=k,
    )


def rotating_star(n: int, step: int) -> Graph:
    """Star on n vertices whose center is step mod n."""
    if n < 3:
        raise InvalidParamsError(f"rotating star needs n >= 3, got {n}")
    if step < 0:
        raise InvalidParamsError("step must be nonnegative")
    c = step % n
    return Graph.from_edges(n, ((c, v) for v in range(n) if v != c))


def nested_order(tree: OrderedTree) -> tuple[int, ...]:
    """The linear order on a nested-path tree, smallest vertex first.

    Prefix coordinates sort after their extensions; otherwise the first
    differing coordinate decides. This equals the tree postorder with
    children visited as constructed, which is how it is computed.
    """
    if tree.family != "nested":
        raise FamilyMismatchError("linear order is defined for the nested family")
    return tree.postorder()


def compare_nested_coords(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Direct comparator for nested-path coordinates: -1 if a < b, 0, or 1.

    Kept as the reference definition; nested_order must agree with it.
    """
    if a == b:
        return 0
    m = min(len(a), len(b))
    if a[:m] == b[:m]:
        # One is a prefix of the other; the longer tuple is smaller.
        return -1 if len(a) > len(b) else 1
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    raise AssertionError("unreachable")


def mirror_permutation(tree: OrderedTree) -> tuple[int, ...]:
    """The tree's order-reversing graph automorphism, as a vertex map.

    bethe family: the involution that reverses every children list (child i
    of v maps to child d-1-i of the image of v). nested family: reverse the
    top-level path positions, carrying attached copies along: coordinates
    (x1, x2, ..., xg) map to (k+1-x1, x2, ..., xg). Both are involutions and
    both preserve the edge set; the image of the forward traversal order is
    the order the mirrored phase of a schedule walks.
    """
    n = tree.n
    sigma = [0] * n
    if tree.family == "bethe":
        sigma[tree.root] = tree.root
        queue = deque([tree.root])
        while queue:
            v = queue.popleft()
            kids = tree.children[v]
            mirror_kids = tree.children[sigma[v]]
            for i, c in enumerate(kids):
                sigma[c] = mirror_kids[len(kids) - 1 - i]
                queue.append(c)
    elif tree.family == "nested":
        assert tree.coordinates is not None
        label_of = {coord: v for v, coord in enumerate(tree.coordinates)}
        for v, coord in enumerate(tree.coordinates):
            sigma[v] = label_of[(tree.k + 1 - coord[0],) + coord[1:]]
    else:
        raise FamilyMismatchError(f"no mirror defined for family {tree.family!r}")
    return tuple(sigma)


def partition_roles(tree: OrderedTree, family: str, t: int | None = None) -> RolePartition:
    """The information-flow partition for a generated tree.

    bethe: the floor(d/t) lowest-ordered root subtrees versus the
    floor(d/t) highest-ordered ones. binary: the left-left grandchild
    subtree versus the right-right one (a depth-k binary tree, k >= 4).
    nested: the first s vertices of the linear order versus their image
    under the mirror automorphism (the copies hanging off the far end of
    the top path versus those at the root end); s = floor(k/3) * (k + ...
    + k^(d-1)) for d >= 2 and floor(k/3) for d = 1. In every family the
    second class is the mirror image of the first, which the schedule's
    phase alternation relies on.
    """
    if family == "bethe":
        if tree.family != "bethe":
            raise FamilyMismatchError("bethe partition needs a bethe tree")
        if t is None or not (2 < t <= tree.d):
            raise InvalidParamsError(f"bethe partition needs 2 < t <= d, got t={t}, d={tree.d}")
        m = tree.d // t
        root_kids = tree.children[tree.root]
        v1: set[int] = set()
        v2: set[int] = set()
        for c in root_kids[:m]:
            v1 |= tree.subtree(c)
        for c in root_kids[-m:]:
            v2 |= tree.subtree(c)
    elif family == "binary":
        if tree.family != "bethe" or tree.d != 2:
            raise FamilyMismatchError("binary partition needs a bethe tree of degree 2")
        if tree.k < 4:
            raise InvalidParamsError(f"binary partition needs k >= 4, got k={tree.k}")
        left = tree.children[tree.root][0]
        right = tree.children[tree.root][1]
        v1 = set(tree.subtree(tree.children[left][0]))
        v2 = set(tree.subtree(tree.children[right][1]))
    elif family == "nested":
        if tree.family != "nested":
            raise FamilyMismatchError("nested partition needs a nested-path tree")
        if tree.k < 3:
            raise InvalidParamsError(f"nested partition needs k >= 3, got k={tree.k}")
        m = tree.k // 3
        s = m if tree.d == 1 else m * sum(tree.k**g for g in range(1, tree.d))
        sigma = mirror_permutation(tree)
        v1 = set(nested_order(tree)[:s])
        v2 = {sigma[v] for v in v1}
    else:
        raise InvalidParamsError(f"unknown family {family!r}")
    if v1 & v2:
        raise InvalidParamsError("partition classes overlap; parameters too large for the tree")
    w = frozenset(range(tree.n)) - v1 - v2
    return RolePartition(frozenset(v1), frozenset(v2), w)
