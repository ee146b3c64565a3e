"""The worst-case distributed objective: chained quadratics split across roles.

Vertices hold one of three local functions on a truncated coordinate space
of dimension `dim` (the working slice of an infinite sequence space):

    class 1:  (mu/2n)|x|^2 + c1 * [ (x_1 - 1)^2 + sum_k (x_2k - x_2k+1)^2 ]
    class 2:  (mu/2n)|x|^2 + c2 * sum_k (x_2k-1 - x_2k)^2
    neutral:  (mu/2n)|x|^2

with c1 = (L - mu) / (4 |V1|) and c2 = (L - mu) / (4 |V2|). Class-1
gradients couple even coordinates to the next odd one (and create
coordinate 1 from nothing); class-2 gradients couple odd to even. That
parity gating is what meters information flow through the network.

Truncation is literal restriction: a function evaluated on R^dim equals
the full function on the zero-padded vector, and the gradient is the
projection of the full gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidParamsError
from .topologies import RolePartition


@dataclass(frozen=True)
class ChainProblem:
    """A role partition plus the curvature parameters of the global objective."""

    partition: RolePartition
    mu: float
    L: float
    n: int
    dim: int

    def __post_init__(self) -> None:
        if not (self.L > self.mu > 0):
            raise InvalidParamsError(f"need L > mu > 0, got L={self.L}, mu={self.mu}")
        if self.dim < 2:
            raise InvalidParamsError(f"working dimension must be >= 2, got {self.dim}")
        total = len(self.partition.v1) + len(self.partition.v2) + len(self.partition.w)
        if total != self.n:
            raise DimensionMismatchError("partition does not cover the vertex set")

    @property
    def kappa_g(self) -> float:
        return self.L / self.mu

    @property
    def kappa_l(self) -> float:
        size1 = len(self.partition.v1)
        return ((self.L - self.mu) / (2 * size1) + self.mu / self.n) / (self.mu / self.n)

    def role_of(self, v: int) -> str:
        return self.partition.role_of(v)


def _pair_coeff(p: ChainProblem, role: str) -> float:
    size = len(p.partition.v1) if role == "v1" else len(p.partition.v2)
    return (p.L - p.mu) / (4.0 * size)


def local_value(p: ChainProblem, v: int, x: np.ndarray) -> float:
    """f_v(x) on the truncated coordinate space."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.dim,):
        raise DimensionMismatchError(f"expected vector of length {p.dim}, got {x.shape}")
    val = 0.5 * p.mu / p.n * float(x @ x)
    role = p.role_of(v)
    if role == "w":
        return val
    c = _pair_coeff(p, role)
    if role == "v1":
        val += c * (x[0] - 1.0) ** 2
        # pairs (2k, 2k+1), 1-indexed; x[i] is coordinate i+1
        for i in range(1, p.dim, 2):
            hi = x[i + 1] if i + 1 < p.dim else 0.0
            val += c * (x[i] - hi) ** 2
    else:
        # pairs (2k-1, 2k)
        for i in range(0, p.dim, 2):
            hi = x[i + 1] if i + 1 < p.dim else 0.0
            val += c * (x[i] - hi) ** 2
    return val


def local_gradient(p: ChainProblem, v: int, x: np.ndarray) -> np.ndarray:
    """Analytic gradient of f_v at x, truncated at dim."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.dim,):
        raise DimensionMismatchError(f"expected vector of length {p.dim}, got {x.shape}")
    grad = (p.mu / p.n) * x
    role = p.role_of(v)
    if role == "w":
        return grad
    c = _pair_coeff(p, role)
    grad = grad.copy()
    if role == "v1":
        grad[0] += 2.0 * c * (x[0] - 1.0)
        start = 1
    else:
        start = 0
    for i in range(start, p.dim, 2):
        hi = x[i + 1] if i + 1 < p.dim else 0.0
        diff = 2.0 * c * (x[i] - hi)
        grad[i] += diff
        if i + 1 < p.dim:
            grad[i + 1] -= diff
    return grad


def global_value(p: ChainProblem, x: np.ndarray) -> float:
    """(1/n) sum of all vertex functions, via the closed per-class form."""
    x = np.asarray(x, dtype=float)
    val = 0.5 * p.mu / p.n * float(x @ x)
    c = (p.L - p.mu) / (4.0 * p.n)
    val += c * (x[0] - 1.0) ** 2
    val += c * float(np.sum((x[:-1] - x[1:]) ** 2))
    if p.dim >= 1:
        val += c * x[-1] ** 2  # dangling pair against the truncated coordinate
    return val


def global_gradient(p: ChainProblem, x: np.ndarray) -> np.ndarray:
    """Gradient of the assembled global objective."""
    x = np.asarray(x, dtype=float)
    grad = (p.mu / p.n) * x
    c = (p.L - p.mu) / (4.0 * p.n)
    chain = np.zeros_like(x)
    chain[0] += 2.0 * (x[0] - 1.0)
    d = x[:-1] - x[1:]
    chain[:-1] += 2.0 * d
    chain[1:] -= 2.0 * d
    chain[-1] += 2.0 * x[-1]
    return grad + c * chain


def global_hessian(p: ChainProblem) -> np.ndarray:
    """Constant Hessian of the assembled global objective."""
    c = (p.L - p.mu) / (4.0 * p.n)
    h = np.zeros((p.dim, p.dim))
    np.fill_diagonal(h, p.mu / p.n)
    h[0, 0] += 2.0 * c
    for i in range(p.dim - 1):
        h[i, i] += 2.0 * c
        h[i + 1, i + 1] += 2.0 * c
        h[i, i + 1] -= 2.0 * c
        h[i + 1, i] -= 2.0 * c
    h[-1, -1] += 2.0 * c
    return h


def global_optimum(p: ChainProblem) -> np.ndarray:
    """Closed-form optimum profile: entry p equals ratio**p (1-indexed).

    ratio = (sqrt(kappa_g) - 1) / (sqrt(kappa_g) + 1). This is the geometric
    profile the lower-bound bookkeeping uses; see true_chain_optimum for the
    exact stationary point of the assembled objective.
    """
    r = (np.sqrt(p.kappa_g) - 1.0) / (np.sqrt(p.kappa_g) + 1.0)
    return r ** np.arange(1, p.dim + 1)


def true_chain_optimum(p: ChainProblem) -> np.ndarray:
    """Exact minimizer of the assembled global objective on R^dim."""
    h = global_hessian(p)
    rhs = np.zeros(p.dim)
    rhs[0] = 2.0 * (p.L - p.mu) / (4.0 * p.n)  # from the (x_1 - 1)^2 term
    return np.linalg.solve(h, rhs)


def kappa_global_bound(kappa_l: float, scheme: str, t: int | None = None) -> float:
    """Lower bound on the global condition number implied by the local one.

    poly: (kappa_l - 1) / (2 t) + 1; log: (2/5)(kappa_l - 1) + 1;
    const: (kappa_l - 1) / 6 + 1.
    """
    if kappa_l < 1:
        raise InvalidParamsError(f"kappa_l must be >= 1, got {kappa_l}")
    if scheme == "poly":
        if t is None or t <= 2:
            raise InvalidParamsError("poly bound needs t > 2")
        return (kappa_l - 1.0) / (2.0 * t) + 1.0
    if scheme == "log":
        return 0.4 * (kappa_l - 1.0) + 1.0
    if scheme == "const":
        return (kappa_l - 1.0) / 6.0 + 1.0
    raise InvalidParamsError(f"unknown scheme {scheme!r}")
