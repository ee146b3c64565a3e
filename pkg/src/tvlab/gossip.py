"""Consensus operators: plain gossip, static Chebyshev, and the accelerated
momentum scheme with non-recoverable links.

In the non-recoverable-links scheme a pair of nodes stops exchanging
messages forever once the link between them is absent in any round, so the
effective communication graph is the running edge intersection and can only
shrink. With step size 1/lambda_max and momentum tuned to
chi = lambda_max / lambda_min_plus, T rounds produce the linear operator

    C_T(x) = x - x^T

which on zero-mean inputs behaves like a well-conditioned polynomial of a
static gossip matrix: for T = ceil(sqrt(chi) ln(4 chi)) its norm ratios are
sandwiched inside [1 - 1/sqrt(2), 1 + 1/sqrt(2)].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DisconnectedSkeletonError,
    InvalidParamsError,
    SpectralBoundError,
)
from .graphcore import Graph, laplacian, spectral_summary


def effective_graph(graphs: Sequence[Graph]) -> Graph:
    """Running edge intersection of a nonempty graph prefix."""
    if not graphs:
        raise InvalidParamsError("need at least one graph")
    n = graphs[0].n
    edges = set(graphs[0].edge_set)
    for g in graphs[1:]:
        if g.n != n:
            raise DimensionMismatchError("graphs share one vertex set")
        edges &= g.edge_set
    return Graph(n, tuple(sorted(edges)))


def nrl_parameters(lambda_max: float, lambda_min_plus: float) -> tuple[float, float, float]:
    """(eta, beta, chi) from the declared spectral bounds."""
    if lambda_max <= 0 or lambda_min_plus <= 0 or lambda_max < lambda_min_plus:
        raise InvalidParamsError("need lambda_max >= lambda_min_plus > 0")
    chi = lambda_max / lambda_min_plus
    eta = 1.0 / lambda_max
    beta = (np.sqrt(chi) - 1.0) / (np.sqrt(chi) + 1.0)
    return eta, beta, chi


def rounds_for_contraction(chi: float) -> int:
    """T = ceil(sqrt(chi) * ln(4 chi)), the sandwich round count."""
    return max(1, int(np.ceil(np.sqrt(chi) * np.log(4.0 * chi))))


def _as_state(x0: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x0, dtype=float)
    if x.ndim == 1:
        return x[:, None], True
    if x.ndim == 2:
        return x.copy(), False
    raise DimensionMismatchError("state must be a vector or an n-by-m matrix")


@dataclass
class GossipState:
    """Per-node state of the non-recoverable-links scheme.

    Row i of x and y belongs to node i; neighbor_sets[i] only ever loses
    members (a link absent in any round is dropped for good).
    """

    x: np.ndarray
    y: np.ndarray
    neighbor_sets: list[set[int]]
    k: int
    eta: float
    beta: float


def nrl_init(x0: np.ndarray, first: Graph, eta: float, beta: float) -> GossipState:
    x, _ = _as_state(x0)
    if first.n != x.shape[0]:
        raise DimensionMismatchError("state rows must match vertex count")
    sets = [set(first.neighbors(i)) for i in range(first.n)]
    return GossipState(x=x, y=x.copy(), neighbor_sets=sets, k=0, eta=eta, beta=beta)


def nrl_step(state: GossipState, graph: Graph) -> None:
    """One round: prune neighbor sets against the round's graph, then update.

    Every node i computes y_i = x_i - eta (|N_i| x_i - sum_{j in N_i} x_j)
    followed by the momentum combination x_i = (1 + beta) y_i - beta y_i_old.
    """
    n = state.x.shape[0]
    if graph.n != n:
        raise DimensionMismatchError("graph and state disagree on vertex count")
    for i in range(n):
        state.neighbor_sets[i] &= graph.neighbors(i)
    x, y = state.x, state.y
    y_next = np.empty_like(x)
    for i in range(n):
        nbrs = state.neighbor_sets[i]
        acc = np.zeros(x.shape[1])
        for j in nbrs:
            acc += x[j]
        y_next[i] = x[i] - state.eta * (len(nbrs) * x[i] - acc)
    state.x = (1.0 + state.beta) * y_next - state.beta * y
    state.y = y_next
    state.k += 1


def accelerated_gossip_nrl(
    x0: np.ndarray,
    graphs: Sequence[Graph],
    T: int,
    lambda_max: float,
    lambda_min_plus: float,
    check_spectral: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Run T momentum gossip rounds with non-recoverable links.

    Returns (x_T, C_T(x0)) with C_T(x0) = x0 - x_T. Requires T >= 1 and at
    least T graphs. With check_spectral, every round's effective Laplacian
    is verified against the declared lambda_max and for connectivity.
    """
    if T < 1:
        raise InvalidParamsError("need T >= 1")
    if len(graphs) < T:
        raise InvalidParamsError(f"need at least T={T} graphs, got {len(graphs)}")
    eta, beta, _ = nrl_parameters(lambda_max, lambda_min_plus)
    x_in, squeeze = _as_state(x0)
    state = nrl_init(x_in, graphs[0], eta, beta)
    for k in range(T):
        if check_spectral:
            eff = Graph.from_edges(
                graphs[0].n,
                (
                    (i, j)
                    for i in range(graphs[0].n)
                    for j in state.neighbor_sets[i] & graphs[k].neighbors(i)
                    if i < j
                ),
            )
            top = float(np.linalg.eigvalsh(laplacian(eff))[-1])
            if top > lambda_max * (1.0 + 1e-12):
                raise SpectralBoundError(f"round {k}: lambda_max {top} exceeds bound {lambda_max}")
            if not eff.is_connected():
                raise DisconnectedSkeletonError(f"effective graph disconnected at round {k}")
        nrl_step(state, graphs[k])
    ct = x_in - state.x
    if squeeze:
        return state.x[:, 0], ct[:, 0]
    return state.x, ct


def plain_gossip(x0: np.ndarray, graphs: Sequence[Graph], T: int, eta: float) -> np.ndarray:
    """T rounds of x <- x - eta W x over the running effective graphs."""
    if T < 1:
        raise InvalidParamsError("need T >= 1")
    if len(graphs) < T:
        raise InvalidParamsError(f"need at least T={T} graphs")
    x, squeeze = _as_state(x0)
    eff_edges = set(graphs[0].edge_set)
    for k in range(T):
        eff_edges &= graphs[k].edge_set
        w = laplacian(Graph(x.shape[0], tuple(sorted(eff_edges))))
        x = x - eta * (w @ x)
    return x[:, 0] if squeeze else x


@dataclass(frozen=True)
class SandwichReport:
    """Per-trial norm ratios of C_T on zero-mean inputs, with the verdict."""

    chi: float
    rounds: int
    lower: float
    upper: float
    ratios: tuple[float, ...]
    all_pass: bool


def verify_ct_sandwich(
    graphs: Sequence[Graph],
    lambda_max: float,
    lambda_min_plus: float,
    trials: int,
    seed: int = 0,
    tol: float = 1e-9,
) -> SandwichReport:
    """Check the two-sided norm bound of C_T on random zero-mean inputs.

    Inputs are sampled standard normal and de-meaned per column; zero draws
    are skipped. All trials run as one batched pass since the operator and
    schedule are shared.
    """
    _, _, chi = nrl_parameters(lambda_max, lambda_min_plus)
    t_rounds = rounds_for_contraction(chi)
    n = graphs[0].n
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, trials))
    x -= x.mean(axis=0, keepdims=True)
    _, ct = accelerated_gossip_nrl(x, graphs, t_rounds, lambda_max, lambda_min_plus)
    in_norm = np.linalg.norm(x, axis=0)
    out_norm = np.linalg.norm(ct, axis=0)
    keep = in_norm > 0
    ratios = out_norm[keep] / in_norm[keep]
    lower = 1.0 - 1.0 / np.sqrt(2.0)
    upper = 1.0 + 1.0 / np.sqrt(2.0)
    ok = bool(np.all(ratios >= lower - tol) and np.all(ratios <= upper + tol))
    return SandwichReport(
        chi=chi,
        rounds=t_rounds,
        lower=lower,
        upper=upper,
        ratios=tuple(float(r) for r in ratios),
        all_pass=ok,
    )


def chebyshev_static(x0: np.ndarray, g: Graph, K: int) -> np.ndarray:
    """Apply the degree-K residual Chebyshev polynomial of the Laplacian.

    The polynomial is the minimax residual on [lambda_min_plus, lambda_max],
    normalized to equal 1 at 0, so the consensus component passes through
    unchanged while the zero-mean part is contracted. Evaluated by the
    three-term recurrence on both the matrix iterates and the scalar
    normalizer.
    """
    if K < 1:
        raise InvalidParamsError("need K >= 1")
    summ = spectral_summary(g)  # raises DisconnectedGraphError when not connected
    lam_lo, lam_hi = summ.lambda_min_plus, summ.lambda_max
    x, squeeze = _as_state(x0)
    w = laplacian(g)
    width = lam_hi - lam_lo
    if width <= 0:
        # complete-graph style spectrum: one exact step annihilates the range
        out = x - (w @ x) / lam_hi
        return out[:, 0] if squeeze else out

    def xi_apply(v: np.ndarray) -> np.ndarray:
        return ((lam_hi + lam_lo) * v - 2.0 * (w @ v)) / width

    c0 = (lam_hi + lam_lo) / width  # xi(0), outside [-1, 1]
    z_prev, z_cur = x, xi_apply(x)
    s_prev, s_cur = 1.0, c0
    for _ in range(K - 1):
        z_prev, z_cur = z_cur, 2.0 * xi_apply(z_cur) - z_prev
        s_prev, s_cur = s_cur, 2.0 * c0 * s_cur - s_prev
    out = z_cur / s_cur
    return out[:, 0] if squeeze else out


def chebyshev_degree(g: Graph) -> int:
    """Default polynomial degree: ceil(sqrt(chi))."""
    return int(np.ceil(np.sqrt(spectral_summary(g).chi)))
