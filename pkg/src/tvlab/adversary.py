"""Edge-budgeted graph-changing schemes and the information-flow bookkeeping.

A schedule walks a fixed tree shape whose positions are permuted by vertex
swaps. Infection state: a set of "bad" (informed) vertices seeds one side
of the role partition; each round, every good vertex adjacent to a bad one
hears the information and is infected. The scheme then swaps each newly
infected vertex into the deepest leftmost good position (the minimum of the
current traversal order), so the infected region stays an order prefix and
fresh neutral vertices rotate into the frontier. Near the end of a phase,
when the minimal good position is held by a target-class vertex, infection
happens in place instead (no swap, no edge change). Once a target-class
vertex is infected the roles swap and the next phase walks the mirror image
of the traversal order (the image under the tree's order-reversing
automorphism), so consecutive phases are congruent.

Three schemes share this engine and differ in tree family and budgets:

    poly  - degree-d depth-k tree, per-step edge budget 4 (k-1)(d+1),
            at most k-1 infections per round
    log   - the degree-2 instance, budget 12 (k-1), at most k-1 per round
    const - nested-path tree, budget 12 (d-1), at most d per round

Both caps and budgets are asserted on every advance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParamsError
from .graphcore import Graph, edge_diff
from .topologies import (
    OrderedTree,
    RolePartition,
    bethe_tree,
    mirror_permutation,
    nested_path_tree,
    partition_roles,
)
from .worstcase import ChainProblem


def potential_bad_vertices(g: Graph, bad: frozenset[int] | set[int]) -> list[int]:
    """Good vertices adjacent to at least one bad vertex, ascending labels."""
    out = []
    for v in range(g.n):
        if v in bad:
            continue
        if any(w in bad for w in g.neighbors(v)):
            out.append(v)
    return out


@dataclass(frozen=True)
class InfectionState:
    """Snapshot of a schedule's infection bookkeeping.

    label_at maps tree positions to vertex labels; order is the phase's
    position traversal (the forward order, or its mirror image in odd
    phases); bad and protected are label sets (protected = the current
    target class, never used as a swap candidate).
    """

    tree: OrderedTree
    label_at: tuple[int, ...]
    order: tuple[int, ...]
    bad: frozenset[int]
    phase: int
    protected: frozenset[int]


def find_candidate(state: InfectionState, u: int, scheme: str) -> int | None:
    """The good vertex at the minimal position of the current order.

    Equivalently: descend from the root, always into the lowest-ordered
    child subtree that still contains a good vertex, and stop when none
    does. Returns None when no good vertex remains. u is accepted for
    signature compatibility; the result does not depend on it.
    """
    del u, scheme  # one rule serves every scheme
    for slot in state.order:
        occupant = state.label_at[slot]
        if occupant not in state.bad:
            return occupant
    return None


@dataclass(frozen=True)
class ScheduleStep:
    """One emitted round: the post-swap graph and the round's bookkeeping."""

    index: int
    graph: Graph
    delta: int
    bad: frozenset[int]
    u_size: int
    new_infections: int
    swaps: int
    phase: int
    phase_ended: bool


@dataclass
class Schedule:
    """Infinite adversarial graph sequence with per-step budget assertions."""

    scheme: str
    tree: OrderedTree
    partition: RolePartition
    budget: int
    u_cap: int
    # mutable run state
    label_at: list[int] = field(init=False)
    slot_of: list[int] = field(init=False)
    bad: set[int] = field(init=False)
    cur_v1: frozenset[int] = field(init=False)
    cur_v2: frozenset[int] = field(init=False)
    mirrored: bool = field(init=False, default=False)
    phase: int = field(init=False, default=0)
    endgame: bool = field(init=False, default=False)
    step_count: int = field(init=False, default=0)
    rounds_in_phase: int = field(init=False, default=0)
    phase_flows: list[int] = field(init=False)

    def __post_init__(self) -> None:
        n = self.tree.n
        self.label_at = list(range(n))
        self.slot_of = list(range(n))
        self.bad = set(self.partition.v1)
        self.cur_v1 = self.partition.v1
        self.cur_v2 = self.partition.v2
        self.phase_flows = []
        forward = self.tree.postorder()
        sigma = mirror_permutation(self.tree)
        self._orders = (forward, tuple(sigma[s] for s in forward))
        self._shape_adj = self.tree.graph.adjacency
        self._current_graph = self._emit()

    # -- constructors ------------------------------------------------------

    @classmethod
    def poly(cls, d: int, k: int, t: int) -> "Schedule":
        tree = bethe_tree(d, k)
        part = partition_roles(tree, "bethe", t)
        return cls("poly", tree, part, budget=4 * (k - 1) * (d + 1), u_cap=k - 1)

    @classmethod
    def log(cls, k: int) -> "Schedule":
        tree = bethe_tree(2, k)
        part = partition_roles(tree, "binary")
        return cls("log", tree, part, budget=12 * (k - 1), u_cap=k - 1)

    @classmethod
    def const(cls, d: int, k: int) -> "Schedule":
        tree = nested_path_tree(d, k)
        part = partition_roles(tree, "nested")
        return cls("const", tree, part, budget=12 * (d - 1), u_cap=d)

    @classmethod
    def from_params(cls, scheme: str, d: int = 0, k: int = 0, t: int = 0) -> "Schedule":
        if scheme == "poly":
            return cls.poly(d, k, t)
        if scheme == "log":
            return cls.log(k)
        if scheme == "const":
            return cls.const(d, k)
        raise InvalidParamsError(f"unknown scheme {scheme!r}")

    def clone_fresh(self) -> "Schedule":
        return Schedule(self.scheme, self.tree, self.partition, self.budget, self.u_cap)

    # -- state views -------------------------------------------------------

    @property
    def current_graph(self) -> Graph:
        return self._current_graph

    def infection_state(self) -> InfectionState:
        return InfectionState(
            tree=self.tree,
            label_at=tuple(self.label_at),
            order=self._postorder(),
            bad=frozenset(self.bad),
            phase=self.phase,
            protected=self.cur_v2,
        )

    @property
    def t_flow(self) -> int | None:
        """Rounds the first phase took, once it has completed."""
        return self.phase_flows[0] if self.phase_flows else None

    # -- engine ------------------------------------------------------------

    def _emit(self) -> Graph:
        lab = self.label_at
        edges = ((lab[a], lab[b]) for a, b in self.tree.graph.edges)
        return Graph.from_edges(self.tree.n, edges)

    def _postorder(self) -> tuple[int, ...]:
        return self._orders[1 if self.mirrored else 0]

    def _candidate_slot(self, u: int) -> int:
        """Position receiving u's infection: minimal good position, or u's own.

        The in-place fallback fires when the minimal good position is held
        by a target-class vertex (pulling it would hand the target the
        frontier) or is u's own position already.
        """
        for slot in self._postorder():
            occ = self.label_at[slot]
            if occ in self.bad:
                continue
            if occ in self.cur_v2:
                self.endgame = True
                return self.slot_of[u]
            return slot
        return self.slot_of[u]

    def _swap_labels(self, a_slot: int, b_slot: int) -> None:
        la, lb = self.label_at[a_slot], self.label_at[b_slot]
        self.label_at[a_slot], self.label_at[b_slot] = lb, la
        self.slot_of[la], self.slot_of[lb] = b_slot, a_slot

    def _check_prefix_invariant(self) -> None:
        """Outside endgame rounds, bad positions fill a prefix of the order."""
        order = self._postorder()
        nbad = len(self.bad)
        prefix = {order[i] for i in range(nbad)}
        bad_slots = {self.slot_of[v] for v in self.bad}
        if bad_slots != prefix:
            raise AssertionError(
                f"infected positions are not an order prefix at step {self.step_count}"
            )

    def advance(self) -> ScheduleStep:
        """Run one inner-loop round and emit the resulting graph."""
        graph_before = self._current_graph
        u_list = potential_bad_vertices(graph_before, self.bad)
        if len(u_list) > self.u_cap:
            raise AssertionError(
                f"round {self.step_count + 1}: |U|={len(u_list)} exceeds cap {self.u_cap}"
            )
        swaps = 0
        for u in u_list:
            v_slot = self._candidate_slot(u)
            self.bad.add(u)
            if v_slot != self.slot_of[u]:
                self._swap_labels(self.slot_of[u], v_slot)
                swaps += 1
        new_graph = self._emit()
        delta = edge_diff(graph_before, new_graph)
        if delta > self.budget:
            raise AssertionError(
                f"round {self.step_count + 1}: delta={delta} exceeds budget {self.budget}"
            )
        if len(new_graph.edges) != self.tree.n - 1:
            raise AssertionError("emitted graph is not a tree")
        self._current_graph = new_graph
        self.step_count += 1
        self.rounds_in_phase += 1
        if not self.endgame:
            self._check_prefix_invariant()
        hit = bool(self.bad & self.cur_v2)
        if hit:
            self.phase_flows.append(self.rounds_in_phase)
            self.cur_v1, self.cur_v2 = self.cur_v2, self.cur_v1
            self.bad = set(self.cur_v1)
            self.mirrored = not self.mirrored
            self.endgame = False
            self.phase += 1
            self.rounds_in_phase = 0
        return ScheduleStep(
            index=self.step_count,
            graph=new_graph,
            delta=delta,
            bad=frozenset(self.bad),
            u_size=len(u_list),
            new_infections=len(u_list),
            swaps=swaps,
            phase=self.phase,
            phase_ended=hit,
        )

    def run(self, steps: int) -> list[ScheduleStep]:
        return [self.advance() for _ in range(steps)]


def information_flow(schedule: Schedule) -> int:
    """Rounds until the first target-class infection, on a fresh copy.

    Must satisfy T >= floor(|W| / cap) + 1 where cap is k-1 (poly, log)
    or d (const); the caller's schedule is not mutated.
    """
    run = schedule.clone_fresh()
    while not run.phase_flows:
        run.advance()
    t = run.phase_flows[0]
    floor_bound = len(schedule.partition.w) // schedule.u_cap + 1
    if t < floor_bound:
        raise AssertionError(f"measured flow {t} below floor bound {floor_bound}")
    return t


@dataclass(frozen=True)
class SpanTrace:
    """First-reach step indices per coordinate, from the reachability model."""

    first_reach: dict[int, int]
    steps_used: int
    t_flow: int


def span_trace(schedule: Schedule, problem: ChainProblem, budget: int) -> SpanTrace:
    """Simulate per-node reachable coordinates over the schedule.

    Nodes alternate one parallel local step (gradient-span extension, gated
    by role parity) with one communication step (max over the closed
    neighborhood in the graph the round communicates over). Stops after
    `budget` steps and returns whatever coordinates were reached. Verifies
    first_reach[m] >= (m - 1) T + m for every reached m.
    """
    if problem.partition is not schedule.partition and (
        problem.partition.v1 != schedule.partition.v1
        or problem.partition.v2 != schedule.partition.v2
    ):
        raise InvalidParamsError("schedule and problem must share one partition")
    run = schedule.clone_fresh()
    n = run.tree.n
    part = run.partition
    reach = np.zeros(n, dtype=np.int64)
    first: dict[int, int] = {}
    best = 0
    step = 0
    comm_graph = run.current_graph

    def note_progress() -> None:
        nonlocal best
        m = int(reach.max())
        if m > best:
            for j in range(best + 1, m + 1):
                first[j] = step
            best = m

    v1 = np.array(sorted(part.v1), dtype=np.int64)
    v2 = np.array(sorted(part.v2), dtype=np.int64)
    while step < budget:
        step += 1
        # local step: class-1 vertices extend even reach, class-2 odd reach
        r1 = reach[v1]
        reach[v1] = np.where(r1 % 2 == 0, r1 + 1, r1)
        r2 = reach[v2]
        reach[v2] = np.where(r2 % 2 == 1, r2 + 1, r2)
        note_progress()
        if step >= budget:
            break
        step += 1
        new_reach = reach.copy()
        for v in range(n):
            for w in comm_graph.neighbors(v):
                if reach[w] > new_reach[v]:
                    new_reach[v] = reach[w]
        reach = new_reach
        note_progress()
        comm_graph = run.advance().graph

    t = run.phase_flows[0] if run.phase_flows else information_flow(schedule)
    for m, l_m in first.items():
        lower = (m - 1) * t + m
        if l_m < lower:
            raise AssertionError(f"coordinate {m} reached at step {l_m} < bound {lower}")
    return SpanTrace(first_reach=first, steps_used=step, t_flow=t)
