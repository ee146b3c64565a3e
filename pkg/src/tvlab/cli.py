"""Command line entry point: tvlab <subcommand> [flags].

Subcommands: topo (emit a tree and its metadata), adversary (emit a
schedule), gossip (consensus runs and reports), plus the verification
suites budgets, flow, span, ct, tvopt and full. Exit status is 0 only when
every hard invariant of the invoked command passed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .adversary import Schedule
from .errors import ConfigError, TvlabError
from .gossip import (
    accelerated_gossip_nrl,
    chebyshev_degree,
    chebyshev_static,
    effective_graph,
    nrl_parameters,
    plain_gossip,
    rounds_for_contraction,
)
from .graphcore import Graph, format_graph, parse_graph, spectral_summary
from .harness import (
    SUITES,
    ExperimentConfig,
    emit_csv,
    run_experiment,
)
from .topologies import bethe_tree, nested_path_tree, partition_roles, rotating_star


def _cmd_topo(args: argparse.Namespace) -> int:
    if args.family == "bethe":
        tree = bethe_tree(args.d, args.k)
        part = partition_roles(tree, "bethe", args.t) if args.t else None
    elif args.family == "binary":
        tree = bethe_tree(2, args.k)
        part = partition_roles(tree, "binary")
    elif args.family == "nested":
        tree = nested_path_tree(args.d, args.k)
        part = partition_roles(tree, "nested")
    elif args.family == "star":
        g = rotating_star(args.n, args.step)
        Path(args.out + ".graph").write_text(format_graph(g))
        print(f"wrote {args.out}.graph")
        return 0
    else:
        raise ConfigError(f"unknown family {args.family!r}")
    Path(args.out + ".graph").write_text(format_graph(tree.graph))
    sidecar = {
        "family": tree.family,
        "d": tree.d,
        "k": tree.k,
        "n": tree.n,
        "root": tree.root,
        "levels": list(tree.level),
        "children": [list(c) for c in tree.children],
        "coordinates": [list(c) for c in tree.coordinates] if tree.coordinates else None,
        "partition": None
        if part is None
        else {
            "v1": sorted(part.v1),
            "v2": sorted(part.v2),
            "w": sorted(part.w),
        },
    }
    Path(args.out + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {args.out}.graph and {args.out}.json")
    return 0


def _cmd_adversary(args: argparse.Namespace) -> int:
    sched = Schedule.from_params(args.scheme, d=args.d, k=args.k, t=args.t)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "step_0000.graph").write_text(format_graph(sched.current_graph))
    records = sched.run(args.steps)
    for step in records:
        (outdir / f"step_{step.index:04d}.graph").write_text(format_graph(step.graph))
    t_flow = sched.phase_flows[0] if sched.phase_flows else 0
    rows = [(0, 0, len(sched.partition.v1), 0, t_flow)]
    rows += [(s.index, s.delta, len(s.bad), s.phase, t_flow) for s in records]
    emit_csv(rows, ("step", "delta", "bad_count", "phase", "t_flow"), outdir / "schedule.csv")
    print(f"wrote {len(records) + 1} graphs and schedule.csv to {outdir}")
    return 0


def _load_graph_sequence(args: argparse.Namespace) -> list[Graph]:
    if args.static:
        g = parse_graph(Path(args.static).read_text())
        reps = args.T if args.T else 1
        return [g] * max(reps, 1)
    if not args.graphs:
        raise ConfigError("gossip needs --graphs DIR or --static FILE")
    files = sorted(Path(args.graphs).glob("*.graph"))
    if not files:
        raise ConfigError(f"no .graph files under {args.graphs}")
    return [parse_graph(f.read_text()) for f in files]


def _cmd_gossip(args: argparse.Namespace) -> int:
    graphs = _load_graph_sequence(args)
    n = graphs[0].n
    lam_max = max(spectral_summary(g).lambda_max for g in graphs)
    skeleton = effective_graph(graphs)
    if not skeleton.is_connected():
        raise ConfigError(
            "the sequence's edge intersection is disconnected; accelerated gossip "
            "with non-recoverable links needs a connected common skeleton"
        )
    lam_min = spectral_summary(skeleton).lambda_min_plus
    _, _, chi = nrl_parameters(lam_max, lam_min)
    rng = np.random.default_rng(args.seed)
    inputs = rng.standard_normal((n, args.trials))
    inputs -= inputs.mean(axis=0, keepdims=True)
    rows = []
    lower = 1.0 - 1.0 / np.sqrt(2.0)
    upper = 1.0 + 1.0 / np.sqrt(2.0)
    if args.mode == "nrl":
        t_rounds = args.T or rounds_for_contraction(chi)
        if t_rounds > len(graphs):
            graphs = graphs + [graphs[-1]] * (t_rounds - len(graphs))
        _, ct = accelerated_gossip_nrl(inputs, graphs, t_rounds, lam_max, lam_min)
        out = ct
        check = lambda r: lower - 1e-9 <= r <= upper + 1e-9
    elif args.mode == "chebyshev":
        g = graphs[0]
        degree = args.T or chebyshev_degree(g)
        out = chebyshev_static(inputs, g, degree)
        check = lambda r: r <= 1.0 + 1e-9
    elif args.mode == "plain":
        t_rounds = args.T or rounds_for_contraction(chi)
        if t_rounds > len(graphs):
            graphs = graphs + [graphs[-1]] * (t_rounds - len(graphs))
        out = plain_gossip(inputs, graphs, t_rounds, 1.0 / lam_max)
        check = lambda r: r <= 1.0 + 1e-9
    else:
        raise ConfigError(f"unknown mode {args.mode!r}")
    ok_all = True
    for i in range(args.trials):
        nin = float(np.linalg.norm(inputs[:, i]))
        nout = float(np.linalg.norm(out[:, i]))
        ratio = nout / nin if nin > 0 else 0.0
        ok = nin == 0 or check(ratio)
        ok_all &= ok
        rows.append((i, nin, nout, ratio, ok))
    emit_csv(rows, ("trial", "input_norm", "output_norm", "ratio", "pass"), args.out)
    print(f"mode={args.mode} chi={chi:.4f} trials={args.trials} all_pass={ok_all}")
    return 0 if ok_all else 1


def _cmd_skeleton(args: argparse.Namespace) -> int:
    from .harness import random_supergraph_sequence

    rng = np.random.default_rng(args.seed)
    graphs = random_supergraph_sequence(args.n, args.steps, args.extra, rng)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, g in enumerate(graphs):
        (outdir / f"step_{i:04d}.graph").write_text(format_graph(g))
    print(f"wrote {len(graphs)} graphs to {outdir}")
    return 0


def _cmd_suite(suite: str, args: argparse.Namespace) -> int:
    overrides = {
        k: getattr(args, k, None)
        for k in ("scheme", "d", "k", "t", "n", "mu", "L", "dim", "steps", "trials", "seed", "out")
    }
    if args.config:
        cfg = ExperimentConfig.from_json(args.config, suite=suite, **overrides)
    else:
        cfg = ExperimentConfig(suite=suite, **{k: v for k, v in overrides.items() if v is not None})
    summary = run_experiment(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if summary["pass"] else 1


def _cmd_tvopt(args: argparse.Namespace) -> int:
    if args.mode == "quadratic-skeleton":
        return _cmd_suite("tvopt", args)
    # custom: a seeded random diagonal quadratic with the given constants
    from .tvopt import FunctionSequenceContract, run_agm_tv

    rng = np.random.default_rng(args.seed)
    diag = rng.uniform(args.mu, args.L, size=args.dim)
    diag[0], diag[-1] = args.mu, args.L
    star = rng.standard_normal(args.dim)

    def h(_k: int, x: np.ndarray) -> float:
        return 0.5 * float((x - star) @ (diag * (x - star)))

    def grad(_k: int, x: np.ndarray) -> np.ndarray:
        return diag * (x - star)

    seq = FunctionSequenceContract(
        eval=h, grad=grad, mu=args.mu, L=args.L, minimizer=star, exact_monotone=True
    )
    x0 = rng.standard_normal(args.dim)
    result = run_agm_tv(seq, x0, args.steps)
    rows = [
        (r.k, r.f_gap, r.dist_sq, r.psi, r.psi_monotone, r.rate_bound, r.rate_ok)
        for r in result.certificate
    ]
    out = Path(args.out)
    target = out / "trace.csv" if out.suffix != ".csv" else out
    emit_csv(rows, ("k", "f_gap", "dist_sq", "psi", "psi_monotone", "rate_bound", "rate_ok"), target)
    ok = result.all_ok
    print(f"custom quadratic run: steps={args.steps} all_ok={ok}")
    return 0 if ok else 1


def _add_common_suite_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--scheme", choices=("poly", "log", "const"))
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("topo", help="emit a generated graph plus metadata sidecar")
    p.add_argument("--family", required=True, choices=("bethe", "binary", "nested", "star"))
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--step", type=int, default=0)
    p.add_argument("--out", default="topo")
    p.set_defaults(func=_cmd_topo)

    p = sub.add_parser("adversary", help="emit a budgeted graph schedule")
    p.add_argument("--scheme", required=True, choices=("poly", "log", "const"))
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--out", default="schedule_out")
    p.set_defaults(func=_cmd_adversary)

    p = sub.add_parser("gossip", help="consensus runs over a stored graph sequence")
    p.add_argument("--mode", required=True, choices=("nrl", "chebyshev", "plain"))
    p.add_argument("--graphs", help="directory of *.graph files")
    p.add_argument("--static", help="single graph file used for every round")
    p.add_argument("--T", type=int, default=0, help="rounds (nrl, plain) or degree (chebyshev)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="report.csv")
    p.set_defaults(func=_cmd_gossip)

    p = sub.add_parser("skeleton", help="emit a random sequence over a path skeleton")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--extra", type=int, default=3, help="max extra random edges per step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="skeleton_out")
    p.set_defaults(func=_cmd_skeleton)

    p = sub.add_parser("tvopt", help="accelerated run over a time-varying quadratic")
    p.add_argument("--mode", default="quadratic-skeleton", choices=("quadratic-skeleton", "custom"))
    p.add_argument("--config")
    p.add_argument("--scheme", choices=("poly", "log", "const"))
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--L", type=float, default=25.0)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_tvopt)

    for suite in ("budgets", "flow", "span", "ct", "full"):
        p = sub.add_parser(suite, help=f"run the {suite} verification suite")
        _add_common_suite_flags(p)
        p.set_defaults(func=lambda a, s=suite: _cmd_suite(s, a))

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
