"""Accelerated gradient descent over uniformly non-increasing function
sequences, with the exponentially weighted potential that certifies the rate.

The sequence contract: every f_k is L-smooth and mu-strongly convex, the
sequence never increases pointwise (f_{k+1} <= f_k everywhere), and all f_k
share a minimizer. Under that contract the scheme

    y_{k+1} = x_k - (1/L) grad f_k(x_k)
    x_{k+1} = (1 + b) y_{k+1} - b y_k,      b = (sqrt(kappa)-1)/(sqrt(kappa)+1)

admits the potential

    Psi_k = (1 + gamma)^k (f_k(y_k) - f_k(x*) + (mu/2) |z_k - x*|^2)

with gamma = 1/(sqrt(kappa)-1), tau = 1/(sqrt(kappa)+1) and
z_k = x_k/tau - (1-tau)/tau y_k, which never increases, giving

    f_N(y_N) - f*      <= (L+mu) R^2 / 2 * (1 - 1/sqrt(kappa))^N
    |y_N - x*|^2       <= (L+mu) R^2 / mu * (1 - 1/sqrt(kappa))^N

for R = |x_0 - x*|. Quadratic consensus sequences (Laplacians of shrinking
graphs) satisfy the contract exactly; general sequences are spot-checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractViolationError, InvalidParamsError, NotSubgraphError
from .graphcore import Graph, laplacian, laplacian_monotone_psd_check, spectral_summary

Array = np.ndarray


@dataclass(frozen=True)
class FunctionSequenceContract:
    """Callable view of a function sequence plus its certified constants."""

    eval: Callable[[int, Array], float]
    grad: Callable[[int, Array], Array]
    mu: float
    L: float
    minimizer: Array
    exact_monotone: bool = False

    def __post_init__(self) -> None:
        if not (self.L >= self.mu > 0):
            raise InvalidParamsError(f"need L >= mu > 0, got L={self.L}, mu={self.mu}")

    @property
    def kappa(self) -> float:
        return self.L / self.mu


def momentum_coefficients(kappa: float) -> tuple[float, float, float]:
    """(beta, gamma, tau); beta degenerates to 0 at kappa = 1."""
    if kappa < 1:
        raise InvalidParamsError("kappa must be >= 1")
    rk = np.sqrt(kappa)
    if rk == 1.0:
        return 0.0, np.inf, 0.5
    return (rk - 1.0) / (rk + 1.0), 1.0 / (rk - 1.0), 1.0 / (rk + 1.0)


def agm_tv_step(
    seq: FunctionSequenceContract, k: int, x_k: Array, y_k: Array
) -> tuple[Array, Array]:
    """One accelerated step against f_k; returns (x_{k+1}, y_{k+1})."""
    beta, _, _ = momentum_coefficients(seq.kappa)
    y_next = x_k - seq.grad(k, x_k) / seq.L
    x_next = (1.0 + beta) * y_next - beta * y_k
    return x_next, y_next


def z_value(tau: float, x_k: Array, y_k: Array) -> Array:
    """Auxiliary point z = x/tau - (1-tau)/tau y (affine weights sum to 1)."""
    if not 0 < tau <= 0.5:
        raise InvalidParamsError(f"tau must lie in (0, 1/2], got {tau}")
    return x_k / tau - (1.0 - tau) / tau * y_k


def z_recursion(
    seq: FunctionSequenceContract, k: int, z_k: Array, x_k: Array, gamma: float
) -> Array:
    """The equivalent one-step recursion for z; must match z_value per step."""
    return (
        z_k / (1.0 + gamma)
        + gamma / (1.0 + gamma) * x_k
        - gamma / (seq.mu * (1.0 + gamma)) * seq.grad(k, x_k)
    )


def potential(seq: FunctionSequenceContract, k: int, y_k: Array, z_k: Array) -> float:
    """(1 + gamma)^k (f_k(y_k) - f_k(x*) + (mu/2) |z_k - x*|^2)."""
    _, gamma, _ = momentum_coefficients(seq.kappa)
    gap = seq.eval(k, y_k) - seq.eval(k, seq.minimizer)
    dist = float(np.sum((z_k - seq.minimizer) ** 2))
    weight = (1.0 + gamma) ** k if np.isfinite(gamma) else 1.0
    return weight * (gap + 0.5 * seq.mu * dist)


@dataclass(frozen=True)
class PotentialTrace:
    """Per-step potential values and the coefficients they were built with."""

    psi: tuple[float, ...]
    gamma: float
    tau: float

    def is_monotone(self, rel_tol: float = 1e-9, abs_floor: float | None = None) -> bool:
        """Non-increasing up to tolerance.

        The default floor is tiny relative to the starting potential; once
        iterates sit at machine precision the exponential weight amplifies
        arithmetic noise, and weighted values below the floor carry no
        information about the true potential.
        """
        if abs_floor is None:
            abs_floor = 1e-12 * max(1.0, abs(self.psi[0])) if self.psi else 0.0
        return all(
            nxt <= cur * (1.0 + rel_tol) + rel_tol * abs(cur) + abs_floor
            for cur, nxt in zip(self.psi, self.psi[1:])
        )


@dataclass(frozen=True)
class CertificateRow:
    """One step of the convergence certificate."""

    k: int
    f_gap: float
    dist_sq: float
    psi: float
    psi_monotone: bool
    rate_bound: float
    rate_ok: bool
    dist_bound: float
    dist_ok: bool


@dataclass
class AgmRun:
    """Trajectory, potential trace and certificate of one accelerated run."""

    ys: list[Array]
    xs: list[Array]
    trace: PotentialTrace
    certificate: list[CertificateRow]

    @property
    def all_ok(self) -> bool:
        return all(r.psi_monotone and r.rate_ok and r.dist_ok for r in self.certificate)


def _spot_check_monotone(
    seq: FunctionSequenceContract, k: int, points: Sequence[Array], rng: np.random.Generator
) -> None:
    """f_{k+1} <= f_k at the iterates and a few random probes."""
    probes = list(points)
    if probes:
        shape = probes[0].shape
        scale = max(1.0, max(float(np.abs(p).max()) for p in probes))
        for _ in range(8):
            probes.append(rng.standard_normal(shape) * scale)
    slack = 1e-9
    for p in probes:
        lo, hi = seq.eval(k + 1, p), seq.eval(k, p)
        if lo > hi + slack * max(1.0, abs(hi)):
            raise ContractViolationError(
                f"sequence increased at step {k}: f_{k + 1} = {lo} > f_{k} = {hi}"
            )


def run_agm_tv(
    seq: FunctionSequenceContract,
    x0: Array,
    N: int,
    check_contract: bool = True,
    seed: int = 0,
) -> AgmRun:
    """Run N accelerated steps from y_0 = x_0 and certify the rate.

    Per step this asserts the z recursion against its definition (1e-10
    relative), the one-step gradient inequality, and potential monotonicity;
    the certificate also records both rate inequalities with constants
    (L+mu) R^2 / 2 and (L+mu) R^2 / mu.
    """
    if N < 1:
        raise InvalidParamsError("need N >= 1")
    x0 = np.asarray(x0, dtype=float)
    beta, gamma, tau = momentum_coefficients(seq.kappa)
    star = seq.minimizer
    r_sq = float(np.sum((x0 - star) ** 2))
    rate_base = 1.0 - 1.0 / np.sqrt(seq.kappa)
    rng = np.random.default_rng(seed)

    x, y = x0.copy(), x0.copy()
    z = z_value(tau, x, y) if beta > 0 else 2.0 * x - y
    xs, ys = [x.copy()], [y.copy()]
    slack = 1e-9
    # cancellation floor: function gaps are differences of values whose
    # magnitude is set by the curvature and the offsets involved
    fp_floor = 1e-13 * (seq.L + seq.mu) * (r_sq + float(np.sum(star * star)) + 1.0)

    def phi(k: int, yv: Array, zv: Array) -> float:
        gap = seq.eval(k, yv) - seq.eval(k, star)
        return gap + 0.5 * seq.mu * float(np.sum((zv - star) ** 2))

    amp = (1.0 + gamma) if np.isfinite(gamma) else 1.0
    phis = [phi(0, y, z)]
    psis = [phis[0]]
    cert: list[CertificateRow] = []
    for k in range(N):
        if check_contract and not seq.exact_monotone:
            _spot_check_monotone(seq, k, [x, y], rng)
        g = seq.grad(k, x)
        y_next = x - g / seq.L
        x_next = (1.0 + beta) * y_next - beta * y
        # one-step descent sanity: f_k(y_next) <= f_k(x) - |g|^2 / (2L)
        lhs = seq.eval(k, y_next)
        rhs = seq.eval(k, x) - float(np.sum(g * g)) / (2.0 * seq.L)
        if lhs > rhs + slack * max(1.0, abs(rhs)) + fp_floor:
            raise ContractViolationError(f"gradient-step inequality failed at step {k}")
        if beta > 0:
            z_def = z_value(tau, x_next, y_next)
            z_rec = z_recursion(seq, k, z, x, gamma)
            scale = max(1.0, float(np.linalg.norm(z_def)))
            if float(np.linalg.norm(z_def - z_rec)) > 1e-10 * scale:
                raise AssertionError(f"z recursion diverged from definition at step {k}")
            z = z_def
        else:
            z = 2.0 * x_next - y_next
        x, y = x_next, y_next
        xs.append(x.copy())
        ys.append(y.copy())
        phi_next = phi(k + 1, y, z)
        phis.append(phi_next)
        psis.append(amp ** (k + 1) * phi_next)
        # the weighted potential never grows; compared one step at a time so
        # the exponential weight does not amplify arithmetic noise
        mono = amp * phi_next <= phis[k] * (1.0 + slack) + slack * abs(phis[k]) + fp_floor
        f_gap = seq.eval(k + 1, y) - seq.eval(k + 1, star)
        dist_sq = float(np.sum((y - star) ** 2))
        decay = rate_base ** (k + 1)
        rate_bound = 0.5 * (seq.L + seq.mu) * r_sq * decay
        dist_bound = (seq.L + seq.mu) * r_sq / seq.mu * decay
        cert.append(
            CertificateRow(
                k=k + 1,
                f_gap=f_gap,
                dist_sq=dist_sq,
                psi=psis[-1],
                psi_monotone=mono,
                rate_bound=rate_bound,
                rate_ok=f_gap <= rate_bound * (1.0 + slack) + fp_floor,
                dist_bound=dist_bound,
                dist_ok=dist_sq <= dist_bound * (1.0 + slack) + fp_floor,
            )
        )
    return AgmRun(ys=ys, xs=xs, trace=PotentialTrace(tuple(psis), gamma, tau), certificate=cert)


def consensus_sequence(graphs: Sequence[Graph]) -> FunctionSequenceContract:
    """Contract for h_k(x) = 1/2 x' W_k x over monotonically shrinking graphs.

    Verifies the PSD monotonicity of consecutive Laplacians exactly, takes
    mu from the final (smallest) graph and L from the first, and uses the
    per-column mean as the common minimizer anchor. States may be n-vectors
    or n-by-m matrices; the quadratic is summed over columns.
    """
    if not graphs:
        raise InvalidParamsError("need at least one graph")
    for a, b in zip(graphs, graphs[1:]):
        try:
            ok = laplacian_monotone_psd_check(a, b)
        except NotSubgraphError as exc:
            raise ContractViolationError(
                "graph sequence is not monotonically shrinking"
            ) from exc
        if not ok:
            raise ContractViolationError("graph sequence is not monotonically shrinking")
    laps = [laplacian(g) for g in graphs]
    mu = spectral_summary(graphs[-1]).lambda_min_plus
    big = spectral_summary(graphs[0]).lambda_max

    def clamp(k: int) -> np.ndarray:
        return laps[min(k, len(laps) - 1)]

    def h(k: int, x: Array) -> float:
        return 0.5 * float(np.sum(x * (clamp(k) @ x)))

    def grad(k: int, x: Array) -> Array:
        return clamp(k) @ x

    # minimizer anchor: the all-equal state with the columns' means; the
    # caller rebinds it per start vector via consensus_minimizer.
    zero = np.zeros((graphs[0].n,))
    return FunctionSequenceContract(
        eval=h, grad=grad, mu=mu, L=big, minimizer=zero, exact_monotone=True
    )


def consensus_minimizer(x0: Array) -> Array:
    """Projection of the start state onto the consensus subspace (the mean)."""
    x0 = np.asarray(x0, dtype=float)
    return np.broadcast_to(x0.mean(axis=0, keepdims=True), x0.shape).copy()


def with_minimizer(seq: FunctionSequenceContract, star: Array) -> FunctionSequenceContract:
    """Rebind the contract's minimizer (used for per-start consensus anchors)."""
    return FunctionSequenceContract(
        eval=seq.eval,
        grad=seq.grad,
        mu=seq.mu,
        L=seq.L,
        minimizer=np.asarray(star, dtype=float),
        exact_monotone=seq.exact_monotone,
    )
