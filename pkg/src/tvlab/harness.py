"""Experiment orchestration: suite runners, CSV emission, summary reports.

Every suite is deterministic: randomized trials draw from named generator
streams derived from the config seed, and reruns of an identical config
produce byte-identical CSV files. Hard checks (per-step budgets, counter
caps, norm sandwiches, potential monotonicity, rate certificates) abort the
process exit status; soft measurements are reported only.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adversary import Schedule, information_flow, span_trace
from .errors import ConfigError
from .gossip import (
    accelerated_gossip_nrl,
    effective_graph,
    nrl_parameters,
    rounds_for_contraction,
)
from .graphcore import Graph, spectral_summary
from .topologies import bethe_tree, nested_path_tree
from .tvopt import consensus_minimizer, consensus_sequence, run_agm_tv, with_minimizer
from .worstcase import ChainProblem

SUITES = ("budgets", "flow", "span", "ct", "tvopt", "full")

# named sub-streams so each suite's randomness is independent of the others
_STREAM = {"ct": 1, "tvopt": 2, "gossip": 3, "contract": 4}


def thread_cap() -> int:
    """Worker cap from TVLAB_THREADS; results never depend on its value."""
    raw = os.environ.get("TVLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    """One experiment invocation; flags override file values field by field."""

    suite: str
    scheme: str | None = None
    d: int = 4
    k: int = 4
    t: int = 3
    n: int = 20
    mu: float = 1.0
    L: float = 10.0
    dim: int = 16
    steps: int = 500
    trials: int = 100
    seed: int = 0
    out: str = "out"

    def __post_init__(self) -> None:
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        for name in ("d", "k", "n", "steps", "trials", "dim"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not (self.L > self.mu > 0):
            raise ConfigError(f"need L > mu > 0, got L={self.L}, mu={self.mu}")

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict) or "suite" not in raw:
            raise ConfigError(f"config {path} must be a JSON object with a 'suite' field")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**raw)


def format_value(v) -> str:
    """CSV cell: floats carry 17 significant digits so they round-trip."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def emit_csv(rows: Iterable[Sequence], schema: Sequence[str], path: str | Path) -> None:
    """Write header plus rows, comma separated, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(schema)]
    for row in rows:
        if len(row) != len(schema):
            raise ConfigError(f"row width {len(row)} does not match schema {schema}")
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


# -- schedule instances ------------------------------------------------------

SCHEME_DEFAULTS = {
    "poly": {"d": 4, "k": 4, "t": 3},
    "log": {"k": 8},
    "const": {"d": 3, "k": 6},
}


def build_schedule(scheme: str, d: int, k: int, t: int) -> Schedule:
    return Schedule.from_params(scheme, d=d, k=k, t=t)


def _scheme_instances(cfg: ExperimentConfig) -> list[tuple[str, Schedule]]:
    """Either the single configured scheme or the three reference instances."""
    if cfg.scheme is not None:
        return [(cfg.scheme, build_schedule(cfg.scheme, cfg.d, cfg.k, cfg.t))]
    out = []
    for scheme, params in SCHEME_DEFAULTS.items():
        out.append(
            (
                scheme,
                build_schedule(
                    scheme,
                    params.get("d", cfg.d),
                    params.get("k", cfg.k),
                    params.get("t", cfg.t),
                ),
            )
        )
    return out


# -- skeleton sequences ------------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def random_supergraph_sequence(
    n: int, steps: int, max_extra: int, rng: np.random.Generator
) -> list[Graph]:
    """Path skeleton plus up to max_extra random extra edges per step."""
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


def shrinking_sequence(
    n: int, steps: int, extra_edges: int, drop_every: int, rng: np.random.Generator
) -> list[Graph]:
    """Path skeleton plus extra edges, one extra edge removed every few steps."""
    base = [(i, i + 1) for i in range(n - 1)]
    base_set = set(base)
    extra: set[tuple[int, int]] = set()
    while len(extra) < extra_edges:
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        e = (min(a, b), max(a, b))
        if a != b and e not in base_set:
            extra.add(e)
    cur = sorted(extra)
    out = []
    for step in range(steps):
        out.append(Graph.from_edges(n, base + cur))
        if (step + 1) % drop_every == 0 and cur:
            cur = cur[:-1]
    return out


# -- suites ------------------------------------------------------------------


def run_budgets(cfg: ExperimentConfig, outdir: Path) -> dict:
    checks = {}
    for scheme, sched in _scheme_instances(cfg):
        rows = []
        max_delta = max_u = 0
        for step in sched.run(cfg.steps):
            rows.append((step.index, step.delta, step.u_size, len(step.bad), step.phase))
            max_delta = max(max_delta, step.delta)
            max_u = max(max_u, step.u_size)
        emit_csv(rows, ("step", "delta", "u_size", "bad_count", "phase"), outdir / f"budgets_{scheme}.csv")
        checks[scheme] = {
            "max_delta": max_delta,
            "budget": sched.budget,
            "delta_ok": max_delta <= sched.budget,
            "max_u": max_u,
            "u_cap": sched.u_cap,
            "u_ok": max_u <= sched.u_cap,
        }
    ok = all(c["delta_ok"] and c["u_ok"] for c in checks.values())
    return {"pass": ok, "checks": checks}


def run_flow(cfg: ExperimentConfig, outdir: Path) -> dict:
    rows = []
    checks = {}
    for scheme, sched in _scheme_instances(cfg):
        t = information_flow(sched)
        w = len(sched.partition.w)
        floor_bound = w // sched.u_cap + 1
        entry = {"t_flow": t, "floor_bound": floor_bound, "floor_ok": t >= floor_bound}
        if scheme == "poly":
            chi = spectral_summary(sched.tree.graph).chi
            t_param = cfg.t if cfg.scheme == "poly" else SCHEME_DEFAULTS["poly"]["t"]
            k_param = sched.tree.k
            chi_bound = (1.0 - 2.0 / t_param) * chi / (2.0 * (k_param - 1))
            entry.update({"chi": chi, "chi_bound": chi_bound, "chi_ok": t >= chi_bound})
        checks[scheme] = entry
        rows.append(
            (
                scheme,
                t,
                floor_bound,
                entry.get("chi_bound", 0.0),
                entry["floor_ok"] and entry.get("chi_ok", True),
            )
        )
    emit_csv(rows, ("scheme", "t_flow", "floor_bound", "chi_bound", "pass"), outdir / "flow.csv")
    ok = all(c["floor_ok"] and c.get("chi_ok", True) for c in checks.values())
    return {"pass": ok, "checks": checks}


def run_span(cfg: ExperimentConfig, outdir: Path) -> dict:
    checks = {}
    for scheme, sched in _scheme_instances(cfg):
        t = information_flow(sched)
        prob = ChainProblem(
            partition=sched.partition, mu=cfg.mu, L=cfg.L, n=sched.tree.n, dim=cfg.dim
        )
        trace = span_trace(sched, prob, budget=10 * t)
        rows = []
        all_ok = True
        for m in sorted(trace.first_reach):
            bound = (m - 1) * t + m
            ok = trace.first_reach[m] >= bound
            all_ok &= ok
            rows.append((m, trace.first_reach[m], bound, ok))
        emit_csv(rows, ("m", "first_reach", "bound", "pass"), outdir / f"span_{scheme}.csv")
        checks[scheme] = {
            "t_flow": t,
            "reached": max(trace.first_reach, default=0),
            "bounds_ok": all_ok,
        }
    ok = all(c["bounds_ok"] for c in checks.values())
    return {"pass": ok, "checks": checks}


def _ct_trial_runner(
    graphs: list[Graph], t_rounds: int, lam_max: float, lam_min: float, inputs: np.ndarray
) -> list[tuple[int, float, float, float, bool]]:
    lower = 1.0 - 1.0 / np.sqrt(2.0)
    upper = 1.0 + 1.0 / np.sqrt(2.0)

    def one(i: int) -> tuple[int, float, float, float, bool]:
        x = inputs[:, i]
        _, ct = accelerated_gossip_nrl(x, graphs, t_rounds, lam_max, lam_min)
        nin = float(np.linalg.norm(x))
        nout = float(np.linalg.norm(ct))
        ratio = nout / nin if nin > 0 else 0.0
        ok = nin == 0 or (lower - 1e-9 <= ratio <= upper + 1e-9)
        return (i, nin, nout, ratio, ok)

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        return list(pool.map(one, range(inputs.shape[1])))


def run_ct(cfg: ExperimentConfig, outdir: Path) -> dict:
    rng = np.random.default_rng([cfg.seed, _STREAM["ct"]])
    graphs = random_supergraph_sequence(cfg.n, max(cfg.steps, 300), 3, rng)
    lam_max = max(spectral_summary(g).lambda_max for g in graphs)
    lam_min = spectral_summary(effective_graph(graphs)).lambda_min_plus
    _, _, chi = nrl_parameters(lam_max, lam_min)
    t_rounds = rounds_for_contraction(chi)
    if t_rounds > len(graphs):
        raise ConfigError(
            f"contraction needs {t_rounds} rounds but only {len(graphs)} graphs generated; raise steps"
        )
    inputs = rng.standard_normal((cfg.n, cfg.trials))
    inputs -= inputs.mean(axis=0, keepdims=True)
    rows = _ct_trial_runner(graphs, t_rounds, lam_max, lam_min, inputs)
    emit_csv(rows, ("trial", "input_norm", "output_norm", "ratio", "pass"), outdir / "ct_report.csv")
    sandwich_ok = all(r[4] for r in rows)

    # structural checks on the same schedule
    pair_rng = np.random.default_rng([cfg.seed, _STREAM["gossip"]])
    u = pair_rng.standard_normal((cfg.n, 50))
    v = pair_rng.standard_normal((cfg.n, 50))
    a, b = 0.7, -1.3
    _, ct_u = accelerated_gossip_nrl(u, graphs, t_rounds, lam_max, lam_min)
    _, ct_v = accelerated_gossip_nrl(v, graphs, t_rounds, lam_max, lam_min)
    _, ct_mix = accelerated_gossip_nrl(a * u + b * v, graphs, t_rounds, lam_max, lam_min)
    lin_resid = float(
        np.max(
            np.linalg.norm(ct_mix - a * ct_u - b * ct_v, axis=0)
            / np.maximum(np.linalg.norm(ct_mix, axis=0), 1e-300)
        )
    )
    node_sum = float(np.max(np.abs(ct_u.sum(axis=0)) / np.linalg.norm(u, axis=0)))
    consensus_in = np.ones((cfg.n, 1)) * 3.7
    _, ct_c = accelerated_gossip_nrl(consensus_in, graphs, t_rounds, lam_max, lam_min)
    consensus_out = float(np.max(np.abs(ct_c)))
    checks = {
        "chi": chi,
        "rounds": t_rounds,
        "sandwich_ok": sandwich_ok,
        "linearity_residual": lin_resid,
        "linearity_ok": lin_resid <= 1e-10,
        "node_sum_max": node_sum,
        "node_sum_ok": node_sum <= 1e-10,
        "consensus_maps_to_zero": consensus_out,
        "consensus_ok": consensus_out <= 1e-12,
    }
    ok = sandwich_ok and checks["linearity_ok"] and checks["node_sum_ok"] and checks["consensus_ok"]
    return {"pass": ok, "checks": checks}


def run_tvopt(cfg: ExperimentConfig, outdir: Path) -> dict:
    rng = np.random.default_rng([cfg.seed, _STREAM["tvopt"]])
    steps = min(cfg.steps, 200) if cfg.suite != "tvopt" else cfg.steps
    graphs = shrinking_sequence(cfg.n, steps, 30, 5, rng)
    seq = consensus_sequence(graphs)
    x0 = rng.standard_normal(cfg.n)
    seq = with_minimizer(seq, consensus_minimizer(x0))
    result = run_agm_tv(seq, x0, steps)
    rows = [
        (r.k, r.f_gap, r.dist_sq, r.psi, r.psi_monotone, r.rate_bound, r.rate_ok)
        for r in result.certificate
    ]
    emit_csv(
        rows,
        ("k", "f_gap", "dist_sq", "psi", "psi_monotone", "rate_bound", "rate_ok"),
        outdir / "trace.csv",
    )
    checks = {
        "mu": seq.mu,
        "L": seq.L,
        "psi_monotone": result.trace.is_monotone(),
        "rate_ok": all(r.rate_ok for r in result.certificate),
        "dist_ok": all(r.dist_ok for r in result.certificate),
    }
    ok = checks["psi_monotone"] and checks["rate_ok"] and checks["dist_ok"]
    return {"pass": ok, "checks": checks}


_RUNNERS = {
    "budgets": run_budgets,
    "flow": run_flow,
    "span": run_span,
    "ct": run_ct,
    "tvopt": run_tvopt,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the configured suite(s); write CSVs and summary.json under cfg.out."""
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.suite == "full":
        summary = {"suite": "full", "config": asdict(cfg), "suites": {}}
        for name in ("budgets", "flow", "span", "ct", "tvopt"):
            summary["suites"][name] = _RUNNERS[name](cfg, outdir)
        summary["pass"] = all(s["pass"] for s in summary["suites"].values())
    else:
        summary = {"suite": cfg.suite, "config": asdict(cfg)}
        summary.update(_RUNNERS[cfg.suite](cfg, outdir))
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
