"""Command-line front end: ``ctmn analyze|simulate|sweep|validate``.

Exit codes: 0 ok, 1 validation failure, 2 input error, 3 state cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, scenarios
from .config import load_config
from .core import (
    BALANCE_TOL,
    ORACLE_TOL,
    StationaryDistribution,
    balance_solve,
    check_detailed_balance,
    compute_theta,
    product_form,
)
from .errors import ConfigError, NumericalError, ParameterRangeError, StateExplosionError
from .simulator import KINDS, SimConfig, insensitivity_check, simulate
from .statespace import DEFAULT_STATE_CAP, enumerate_states, state_label
from .throughput import node_throughput
from .topology import Node, build_from_pairs

STATE_CAP_ENV = "CTMN_STATE_CAP"


def fmt(x: float) -> str:
    return f"{x:.6g}"


def mbps(x: float) -> str:
    return fmt(x / 1e6)


def state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{STATE_CAP_ENV} must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise ConfigError(f"{STATE_CAP_ENV} must be a positive integer, got {raw!r}")
    return cap


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("eb", "et", "el") if getattr(args, k, None) is not None}


def random_network(n: int, seed: int, edge_prob: float = 0.5):
    """Random conflict graph with log-uniform theta in [0.01, 100]."""
    if not 1 <= n <= 32:
        raise ConfigError(f"--random-nodes must be between 1 and 32, got {n}")
    rng = np.random.default_rng(seed)
    theta = 10.0 ** rng.uniform(-2, 2, n)
    nodes = [
        Node(id=f"n{i}", backoff_mean=1.0, tx_time_mean=float(theta[i]), packet_len_mean=1.0)
        for i in range(n)
    ]
    pairs = [(f"n{i}", f"n{j}") for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]
    return nodes, build_from_pairs(nodes, pairs)


def load_network(args):
    """Nodes, graph and a metadata description from --scenario/--config/--random-nodes."""
    overrides = _overrides(args)
    if getattr(args, "random_nodes", None) is not None:
        nodes, graph = random_network(args.random_nodes, args.seed)
        source = f"random n={args.random_nodes} seed={args.seed}"
    elif args.scenario is not None:
        nodes, graph = scenarios.build(args.scenario, overrides)
        source = f"scenario={args.scenario}"
    elif args.config is not None:
        nodes, graph = load_config(args.config)
        source = f"config={Path(args.config).name}"
    else:
        raise ConfigError("one of --scenario or --config is required")
    if overrides and args.scenario is None:
        keys = {"eb": "backoff_mean", "et": "tx_time_mean", "el": "packet_len_mean"}
        for key, value in overrides.items():
            if not value > 0:
                raise ConfigError(f"--{key} must be positive, got {value!r}")
        nodes = [n.with_params(**{keys[k]: v for k, v in overrides.items()}) for n in nodes]
        graph = graph.with_nodes(nodes)
    return nodes, graph, source


def _meta(command: str, source: str, args, **extra) -> list[str]:
    lines = [f"# ctmn {__version__}", f"# command: {command}", f"# source: {source}"]
    over = _overrides(args)
    lines.append("# overrides: " + (", ".join(f"{k}={fmt(v)}" for k, v in over.items()) or "none"))
    lines.extend(f"# {k}: {v}" for k, v in extra.items())
    return lines


def _table(meta: list[str], header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _states_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_states{path.suffix or '.csv'}")


def _emit(args, main: str, states: str | None = None) -> None:
    """Write the node table to --output (states alongside) or both to stdout."""
    if args.output:
        out = Path(args.output)
        out.write_text(main)
        if states is not None:
            _states_path(out).write_text(states)
    else:
        sys.stdout.write(main)
        if states is not None:
            sys.stdout.write("\n" + states)


def cmd_analyze(args) -> int:
    nodes, graph, source = load_network(args)
    space = enumerate_states(graph, cap=state_cap())
    theta = compute_theta(nodes)
    dist = product_form(space, theta)
    report = node_throughput(space, dist, nodes)
    meta = _meta("analyze", source, args, states=len(space), phi=fmt(dist.phi))
    ids = graph.ids
    state_rows = [[state_label(m, ids), str(m), fmt(p)] for m, p in zip(space.states, dist.pi)]
    node_rows = [
        [i, fmt(t), fmt(a), mbps(x)]
        for i, t, a, x in zip(ids, theta, report.airtime, report.throughput)
    ]
    _emit(
        args,
        _table(meta + ["# table: nodes"], ["id", "theta", "airtime", "throughput_mbps"], node_rows),
        _table(meta + ["# table: states"], ["state", "mask", "pi"], state_rows),
    )
    return 0


def _laws(raw: str) -> tuple[str, ...]:
    kinds = tuple(k.strip() for k in raw.split(",") if k.strip())
    bad = [k for k in kinds if k not in KINDS]
    if bad or "exponential" not in kinds:
        raise ConfigError(f"--laws takes laws from {', '.join(KINDS)} and must include exponential, got {raw!r}")
    return kinds


def _sim_config(args) -> SimConfig:
    return SimConfig(
        seed=args.seed,
        warmup=args.warmup,
        measure=args.measure,
        replications=args.reps,
        backoff_dist=args.dist_backoff,
        txtime_dist=args.dist_tx,
        jobs=args.jobs,
        state_cap=state_cap(),
    )


def cmd_simulate(args) -> int:
    nodes, graph, source = load_network(args)
    config = _sim_config(args)
    space = enumerate_states(graph, cap=config.state_cap)
    warmup, measure = config.windows(nodes)
    ids = graph.ids
    extra = dict(seed=config.seed, warmup_s=fmt(warmup), measure_s=fmt(measure), replications=config.replications)

    if args.check_insensitivity:
        kinds = _laws(args.laws)
        report = insensitivity_check(graph, nodes, config, kinds=kinds, tolerance=args.tol)
        labels = [f"airtime_{b[:3]}_{t[:3]}" for b, t in report.combos]
        rows = []
        for k, node_id in enumerate(ids):
            rows.append(
                [node_id, fmt(report.analytic_airtime[k])]
                + [fmt(r.airtime[k]) for r in report.results]
                + [fmt(report.ref_discrepancy[:, k].max()), "PASS" if report.passed[k] else "FAIL"]
            )
        meta = _meta(
            "simulate --check-insensitivity", source, args, laws=",".join(kinds), tolerance=fmt(args.tol), **extra
        )
        header = ["id", "analytic_airtime"] + labels + ["max_discrepancy", "verdict"]
        _emit(args, _table(meta + ["# table: insensitivity"], header, rows))
        for node_id, ok in zip(ids, report.passed):
            print(f"{node_id}: {'PASS' if ok else 'FAIL'}", file=sys.stderr)
        return 0 if report.all_passed else 1

    result = simulate(graph, nodes, config, space=space)
    analytic = product_form(space, compute_theta(nodes))
    model = node_throughput(space, analytic, nodes)
    extra.update(backoff=config.backoff_dist, txtime=config.txtime_dist)
    meta = _meta("simulate", source, args, **extra)
    node_rows = [
        [
            node_id,
            fmt(result.airtime[k]),
            fmt(result.airtime_hw[k]),
            fmt(model.airtime[k]),
            mbps(result.throughput[k]),
            mbps(result.throughput_hw[k]),
        ]
        for k, node_id in enumerate(ids)
    ]
    state_rows = [
        [state_label(m, ids), str(m), fmt(result.state_fraction[k]), fmt(result.state_fraction_hw[k]), fmt(analytic.pi[k])]
        for k, m in enumerate(space.states)
    ]
    _emit(
        args,
        _table(
            meta + ["# table: nodes"],
            ["id", "airtime", "airtime_ci95", "analytic_airtime", "throughput_mbps", "throughput_ci95_mbps"],
            node_rows,
        ),
        _table(meta + ["# table: states"], ["state", "mask", "pi_hat", "pi_hat_ci95", "pi"], state_rows),
    )
    return 0


def _grid(args, nodes) -> np.ndarray:
    if args.eb_list is not None:
        try:
            values = [float(x) for x in args.eb_list.split(",") if x.strip()]
        except ValueError:
            values = []
        if not values or not all(np.isfinite(v) and v > 0 for v in values):
            raise ConfigError(f"--eb-list must be positive comma-separated numbers, got {args.eb_list!r}")
        return np.array(values)
    if args.points < 1:
        raise ConfigError(f"--points must be >= 1, got {args.points}")
    et = max(n.tx_time_mean for n in nodes)
    lo = et / 100 if args.eb_min is None else args.eb_min
    hi = 10 * et if args.eb_max is None else args.eb_max
    if not (lo > 0 and hi >= lo):
        raise ConfigError(f"invalid grid range [{lo}, {hi}]")
    return np.logspace(np.log10(lo), np.log10(hi), args.points)


def cmd_sweep(args) -> int:
    if args.eb is not None:
        raise ConfigError("--eb conflicts with the backoff grid of sweep")
    nodes, graph, source = load_network(args)
    enumerate_states(graph, cap=state_cap())
    grid = _grid(args, nodes)
    rows = scenarios.sweep_nodes(nodes, graph, grid)
    ids = graph.ids
    meta = _meta("sweep", source, args, points=len(rows))
    body = [[fmt(eb)] + [mbps(x[i]) for i in ids] for eb, x in rows]
    _emit(args, _table(meta, ["eb_s"] + [f"x_{i}_mbps" for i in ids], body))
    return 0


def cmd_validate(args) -> int:
    nodes, graph, source = load_network(args)
    space = enumerate_states(graph, cap=state_cap())
    theta = compute_theta(nodes)
    dist = product_form(space, theta)
    if args.corrupt_pi:
        pi = dist.pi.copy()
        pi[-1] *= 1.01
        dist = StationaryDistribution(pi=pi / pi.sum(), phi=dist.phi)
    lines = [f"source: {source}", f"states: {len(space)}"]
    try:
        oracle = balance_solve(space, nodes)
        err = float(np.abs(dist.pi - oracle.pi).max())
    except NumericalError as exc:
        lines.append(f"balance solve failed: {exc}")
        err = float("inf")
    residual = check_detailed_balance(space, theta, dist)
    ok_oracle = err < args.tol
    ok_balance = residual < args.balance_tol
    lines.append(f"oracle_inf_norm: {err:.3e} (tol {args.tol:.1e}) {'PASS' if ok_oracle else 'FAIL'}")
    lines.append(
        f"detailed_balance_residual: {residual:.3e} (tol {args.balance_tol:.1e}) {'PASS' if ok_balance else 'FAIL'}"
    )
    verdict = ok_oracle and ok_balance
    lines.append("PASS" if verdict else "FAIL")
    print("\n".join(lines))
    return 0 if verdict else 1


def _input_args(p: argparse.ArgumentParser, random: bool = False) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", choices=[s.value for s in scenarios.ScenarioId])
    src.add_argument("--config", help="JSON network description")
    if random:
        src.add_argument("--random-nodes", type=int, metavar="N", help="random conflict graph on N nodes")
    p.add_argument("--eb", type=float, help="mean backoff E[B] in seconds, all nodes")
    p.add_argument("--et", type=float, help="mean single-channel transmission time E[T] in seconds, all nodes")
    p.add_argument("--el", type=float, help="mean packet length E[L] in bits, all nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctmn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ctmn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="product-form stationary distribution and throughput")
    _input_args(p)
    p.add_argument("--output", help="node table path; states go to <stem>_states.csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="discrete-event simulation")
    _input_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--warmup", type=float, help="seconds (default 1e3 * max E[T])")
    p.add_argument("--measure", type=float, help="seconds (default 1e5 * max E[T])")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--dist-backoff", choices=KINDS, default="exponential")
    p.add_argument("--dist-tx", choices=KINDS, default="exponential")
    p.add_argument("--check-insensitivity", action="store_true", help="run every backoff/tx law pair")
    p.add_argument("--laws", default=",".join(KINDS), help="comma-separated laws for --check-insensitivity")
    p.add_argument("--tol", type=float, default=0.02, help="relative airtime tolerance for --check-insensitivity")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="throughput versus uniform backoff mean")
    _input_args(p)
    p.add_argument("--eb-list", help="comma-separated backoff means in seconds")
    p.add_argument("--eb-min", type=float)
    p.add_argument("--eb-max", type=float)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="product form vs balance solve and detailed balance")
    _input_args(p, random=True)
    p.add_argument("--seed", type=int, default=0, help="seed for --random-nodes")
    p.add_argument("--tol", type=float, default=ORACLE_TOL)
    p.add_argument("--balance-tol", type=float, default=BALANCE_TOL)
    p.add_argument("--corrupt-pi", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StateExplosionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ParameterRangeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
