"""Command-line entry point: ``betafield <command> [options]``.

Randomised commands refuse to run without ``--seed``. Draws are produced in
fixed-size chunks, chunk ``k`` seeded by child ``k`` of the master seed, so
``--jobs`` changes wall time but never the output bytes.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, _backend
from ._parallel import DEFAULT_CHUNK, chunk_plan, run_ordered
from .bridge import fields_from_betas, log_density_q, sample_u
from .family import FamilyParams, log_density_nu, sample_beta
from .graph import Network, as_ordering
from .magic import (
    edge_weight_vector,
    log_constant_c,
    log_density_magic,
    path_probability_closed,
    sample_magic_point,
)
from .process import DEFAULT_T_END, errw_path_probability_direct, simulate_errw, simulate_vrjp, vrjp_limit_fields

OUTPUT_DIR_ENV = "BETAFIELD_OUTPUT_DIR"


class UsageError(Exception):
    """Bad arguments or input files; reported with exit code 2."""


# ---------------------------------------------------------------- parsing helpers


def _parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()], dtype=float)
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"cannot parse vertex list {text!r}") from exc


def _read_rows(path: str) -> np.ndarray:
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    rows = [_parse_floats(ln) for ln in lines]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"{path}: expected one or more rows of equal length")
    return np.vstack(rows)


def _vector(args, name: str, length: int | None, *, default=None, rows: bool = False) -> np.ndarray | None:
    """Inline ``--name`` or ``--name-file``; giving both is an error."""
    inline = getattr(args, name, None)
    path = getattr(args, f"{name}_file", None)
    if inline is not None and path is not None:
        raise UsageError(f"--{name} and --{name}-file are mutually exclusive")
    if inline is not None:
        val = _parse_floats(inline)[None]
    elif path is not None:
        val = _read_rows(path)
    elif default is not None:
        val = np.atleast_2d(default)
    else:
        raise UsageError(f"--{name} or --{name}-file is required")
    if not rows and len(val) != 1:
        raise UsageError(f"--{name}-file must hold a single row")
    if length is not None and val.shape[1] != length:
        raise UsageError(f"--{name} has {val.shape[1]} entries, expected {length}")
    return val if rows else val[0]


def _load_graph(path: str) -> Network:
    try:
        return Network.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _vertex(net: Network, v: int, what: str) -> int:
    if not 0 <= v < net.n:
        raise UsageError(f"{what} {v} is not a vertex of the graph")
    return v


# ---------------------------------------------------------------- output


def _out_path(args) -> str:
    if args.out is not None:
        return args.out
    return str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{args.command}.csv")


def _write_csv(path: str, header: Sequence[str], rows: np.ndarray, fmt: Callable = repr) -> None:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows.tolist()]
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _write_meta(args, path: str, **extra) -> None:
    meta_path = args.meta or (None if path == "-" else path + ".meta.json")
    if meta_path is None:
        return
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "meta", "jobs")}
    doc = {
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "seed_scheme": f"numpy SeedSequence(seed).spawn per chunk of {DEFAULT_CHUNK} draws",
        "config": config,
        "backend": _backend.NAME,
        "version": __version__,
        **extra,
    }
    Path(meta_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _chunk_call(fn, count: int, child: np.random.SeedSequence, extra: tuple) -> np.ndarray:
    return fn(np.random.default_rng(child), count, *extra)


def _chunked(fn, seed: int, total: int, jobs: int, *extra) -> np.ndarray:
    if total < 1:
        raise UsageError("--n must be positive")
    tasks = [(fn, count, child, extra) for _, count, child in chunk_plan(seed, total, DEFAULT_CHUNK)]
    return np.concatenate(run_ordered(_chunk_call, tasks, jobs))


# chunk workers (module level so that they pickle)


def _draw_beta(rng, count, params, ordering):
    return sample_beta(params, rng, count, ordering=ordering)


def _draw_u(rng, count, net, phi, i0):
    u, gamma = sample_u(net, phi, i0, rng, count)
    return np.column_stack([u, gamma])


def _draw_coupled(rng, count, net, phi, bases):
    beta = sample_beta(FamilyParams(net, phi**2), rng, count)
    return np.hstack([fields_from_betas(net, beta, b)[0] for b in bases])


def _draw_magic(rng, count, net, a, i0, e0):
    return sample_magic_point(net, a, i0, e0, rng, count)


def _draw_errw(rng, count, net, a, i0, depth):
    return simulate_errw(net, a, i0, count, depth, rng)


# ---------------------------------------------------------------- commands


def cmd_sample_beta(args) -> int:
    net = _load_graph(args.graph)
    theta = _vector(args, "theta", net.n, default=np.ones(net.n))
    try:
        params = FamilyParams(net, theta)
        order = as_ordering(None if args.ordering is None else _parse_ints(args.ordering), net.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    beta = _chunked(_draw_beta, args.seed, args.n, args.jobs, params, order)
    path = _out_path(args)
    _write_csv(path, [f"beta_{i}" for i in range(net.n)], beta)
    _write_meta(args, path, ordering=order.tolist())
    return 0


def cmd_sample_u(args) -> int:
    net = _load_graph(args.graph)
    phi = _vector(args, "phi", net.n, default=np.ones(net.n))
    i0 = _vertex(net, args.i0, "--i0")
    if np.any(phi <= 0):
        raise UsageError("phi must be positive")
    draws = _chunked(_draw_u, args.seed, args.n, args.jobs, net, phi, i0)
    path = _out_path(args)
    _write_csv(path, [f"u_{j}" for j in range(net.n)] + ["gamma"], draws)
    _write_meta(args, path, ordering=list(range(net.n)))
    return 0


def cmd_couple_u(args) -> int:
    net = _load_graph(args.graph)
    phi = _vector(args, "phi", net.n, default=np.ones(net.n))
    if np.any(phi <= 0):
        raise UsageError("phi must be positive")
    bases = list(range(net.n)) if args.bases is None else [_vertex(net, b, "base") for b in _parse_ints(args.bases)]
    draws = _chunked(_draw_coupled, args.seed, args.n, args.jobs, net, phi, bases)
    path = _out_path(args)
    _write_csv(path, [f"u_{b}_{j}" for b in bases for j in range(net.n)], draws)
    _write_meta(args, path, ordering=list(range(net.n)), bases=bases)
    return 0


def cmd_simulate_vrjp(args) -> int:
    net = _load_graph(args.graph)
    phi = _vector(args, "phi", net.n, default=np.ones(net.n))
    i0 = _vertex(net, args.i0, "--i0")
    if np.any(phi <= 0) or args.t_end <= 0:
        raise UsageError("phi and --t-end must be positive")
    path = _out_path(args)
    if args.log:
        log = simulate_vrjp(net, phi, i0, args.t_end, np.random.default_rng(args.seed), snapshot_every=args.snapshot_every)
        header = ["step", "y_time", "z_time", "vertex"] + [f"L_{i}" for i in range(net.n)]
        lines = [",".join(header)]
        for rec in log:
            snap = [repr(float(v)) for v in rec["L"]] if "L" in rec else [""] * net.n
            lines.append(",".join([str(rec["step"]), repr(rec["y_time"]), repr(rec["z_time"]), str(rec["vertex"]), *snap]))
        text = "\n".join(lines) + "\n"
        if path == "-":
            sys.stdout.write(text)
        else:
            Path(path).write_text(text)
        _write_meta(args, path)
        return 0
    res = vrjp_limit_fields(net, phi, i0, args.n, args.seed, t_end=args.t_end, jobs=args.jobs)
    _write_csv(path, [f"u_{j}" for j in range(net.n)], res.u)
    _write_meta(
        args,
        path,
        t_end_used=res.t_end,
        converged=res.converged,
        median_gap=res.median_gap.tolist(),
        seed_scheme_vrjp="numpy SeedSequence(seed).spawn per trajectory",
    )
    return 0


def cmd_simulate_errw(args) -> int:
    net = _load_graph(args.graph)
    a = _vector(args, "a", net.n_edges, default=np.ones(net.n_edges))
    i0 = _vertex(net, args.i0, "--i0")
    if np.any(a <= 0) or args.depth < 1:
        raise UsageError("a must be positive and --depth at least 1")
    paths = _chunked(_draw_errw, args.seed, args.n, args.jobs, net, a, i0, args.depth)
    path = _out_path(args)
    _write_csv(path, [f"x_{k}" for k in range(args.depth + 1)], paths, fmt=str)
    _write_meta(args, path)
    return 0


def cmd_magic_sample(args) -> int:
    net = _load_graph(args.graph)
    a = _vector(args, "a", net.n_edges, default=np.ones(net.n_edges))
    i0 = _vertex(net, args.i0, "--i0")
    if not 0 <= args.e0 < net.n_edges:
        raise UsageError(f"--e0 must index an edge (0..{net.n_edges - 1})")
    if np.any(a <= 0):
        raise UsageError("a must be positive")
    y = _chunked(_draw_magic, args.seed, args.n, args.jobs, net, a, i0, args.e0)
    path = _out_path(args)
    _write_csv(path, [f"y_{i}_{j}" for i, j in net.edges], y)
    _write_meta(args, path)
    return 0


def _print_values(values) -> None:
    for v in np.atleast_1d(values):
        print(repr(float(v)))


def cmd_magic_density(args) -> int:
    net = _load_graph(args.graph)
    a = _vector(args, "a", net.n_edges, default=np.ones(net.n_edges))
    i0 = _vertex(net, args.i0, "--i0")
    try:
        a = edge_weight_vector(net, a)
        if args.constant:
            _print_values(log_constant_c(net, a, i0))
            return 0
        y = _vector(args, "y", net.n_edges, rows=True)
        _print_values(log_density_magic(net, y, a, i0))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def cmd_path_prob(args) -> int:
    net = _load_graph(args.graph)
    a = _vector(args, "a", net.n_edges, default=np.ones(net.n_edges))
    try:
        walk = _parse_ints(args.path)
        p = errw_path_probability_direct(net, walk, a) if args.direct else path_probability_closed(net, walk, a)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(repr(p))
    return 0


def cmd_density_nu(args) -> int:
    net = _load_graph(args.graph)
    theta = _vector(args, "theta", net.n, default=np.ones(net.n))
    beta = _vector(args, "beta", net.n, rows=True)
    try:
        _print_values(log_density_nu(FamilyParams(net, theta), beta))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def cmd_density_q(args) -> int:
    net = _load_graph(args.graph)
    phi = _vector(args, "phi", net.n, default=np.ones(net.n))
    i0 = _vertex(net, args.i0, "--i0")
    u = _vector(args, "u", net.n, rows=True)
    try:
        _print_values(log_density_q(net, u, phi, i0))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suites, write_report

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    if args.scale <= 0:
        raise UsageError("--scale must be positive")
    results = run_suites(names, args.seed, scale=args.scale, jobs=args.jobs)
    report = args.report or str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / "verify-report.json")
    write_report(report, results, seed=args.seed, scale=args.scale)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} suites passed; report written to {report}")
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betafield", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def command(name, func, help_text, *, graph=True, seeded=False, output=False, draws=False):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if graph:
            p.add_argument("--graph", required=True, help='graph spec JSON: {"n": int, "edges": [[i, j, w], ...]}')
        if seeded:
            p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
            p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
        if output:
            p.add_argument("--out", help=f"output CSV; '-' for stdout (default ${OUTPUT_DIR_ENV}/{name}.csv)")
            p.add_argument("--meta", help="metadata sidecar path (default <out>.meta.json)")
        if draws:
            p.add_argument("--n", type=int, default=1000, help="number of draws (default 1000)")
        p.set_defaults(func=func)
        return p

    def vector(p, name, help_text):
        p.add_argument(f"--{name}", help=f"{help_text}, comma separated")
        p.add_argument(f"--{name}-file", help=f"file holding --{name}")

    p = command("sample-beta", cmd_sample_beta, "exact draws from nu^{W,theta}", seeded=True, output=True, draws=True)
    vector(p, "theta", "theta per vertex (default 1)")
    p.add_argument("--ordering", help="vertex ordering used by the sampler (default identity)")

    p = command("sample-u", cmd_sample_u, "draws of the VRJP mixing field (u, gamma)", seeded=True, output=True, draws=True)
    vector(p, "phi", "initial local times (default 1)")
    p.add_argument("--i0", type=int, default=0, help="base vertex (default 0)")

    p = command("couple-u", cmd_couple_u, "mixing fields of several base points from one potential", seeded=True, output=True, draws=True)
    vector(p, "phi", "initial local times (default 1)")
    p.add_argument("--bases", help="base vertices (default all)")

    p = command("simulate-vrjp", cmd_simulate_vrjp, "simulate the VRJP", seeded=True, output=True, draws=True)
    vector(p, "phi", "initial local times (default 1)")
    p.add_argument("--i0", type=int, default=0, help="start vertex (default 0)")
    p.add_argument("--t-end", type=float, default=DEFAULT_T_END, help="horizon on the Z clock (default 1e4)")
    p.add_argument("--log", action="store_true", help="write the event log of one trajectory instead of limit fields")
    p.add_argument("--snapshot-every", type=int, default=0, help="with --log, record L every k events")

    p = command("simulate-errw", cmd_simulate_errw, "simulate edge-reinforced random walks", seeded=True, output=True, draws=True)
    vector(p, "a", "initial edge weights in edge order (default 1)")
    p.add_argument("--i0", type=int, default=0, help="start vertex (default 0)")
    p.add_argument("--depth", type=int, default=4, help="steps per walk (default 4)")

    p = command("magic-sample", cmd_magic_sample, "draws from the ERRW mixing measure", seeded=True, output=True, draws=True)
    vector(p, "a", "initial edge weights in edge order (default 1)")
    p.add_argument("--i0", type=int, default=0, help="start vertex (default 0)")
    p.add_argument("--e0", type=int, default=0, help="index of the reference edge (default 0)")

    p = command("magic-density", cmd_magic_density, "log density of the ERRW mixing measure")
    vector(p, "a", "initial edge weights in edge order (default 1)")
    vector(p, "y", "conductances in edge order")
    p.add_argument("--i0", type=int, default=0, help="start vertex (default 0)")
    p.add_argument("--constant", action="store_true", help="print log C(a, i0) only")

    p = command("path-prob", cmd_path_prob, "probability that the ERRW follows a path")
    vector(p, "a", "initial edge weights in edge order (default 1)")
    p.add_argument("--path", required=True, help="vertices, comma separated, starting at the start vertex")
    p.add_argument("--direct", action="store_true", help="use the product of one-step probabilities")

    p = command("density-nu", cmd_density_nu, "log density of nu^{W,theta}")
    vector(p, "theta", "theta per vertex (default 1)")
    vector(p, "beta", "potential")

    p = command("density-q", cmd_density_q, "log density of the mixing law Q^{W,phi}")
    vector(p, "phi", "initial local times (default 1)")
    vector(p, "u", "field with u[i0] = 0")
    p.add_argument("--i0", type=int, default=0, help="base vertex (default 0)")

    p = command("verify", cmd_verify, "run acceptance suites", graph=False, seeded=True)
    p.add_argument("suite", help="suite name or 'all'")
    p.add_argument("--scale", type=float, default=1.0, help="multiply sample sizes (default 1)")
    p.add_argument("--report", help=f"JSON report path (default ${OUTPUT_DIR_ENV}/verify-report.json)")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("betafield: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"betafield {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
