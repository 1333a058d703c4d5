"""Command-line front end: ``wuh run | convergence | compare | list-problems | export-basis``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .adaptivity import AdaptConfig
from .grid import write_snapshot
from .limiter import LimiterConfig
from .problems import (ProblemSpec, UnknownProblemError, convergence_study, error_norms,
                       front_positions, list_problems, make_problem, node_weights,
                       relative_l2_difference)
from .reference_oracle import weno5_solve
from .time_integration import SchemeConfig, SolverError, Solution, TimeControl, solve
from .wavelet_basis import export_basis, make_basis

EXIT_OK, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("wuh")


@dataclass
class RunConfig:
    """Everything a run needs.  ``None`` means "use the problem's default"."""

    problem: str = "linear_smooth"
    scheme: str = "wcu"
    N: int = 5
    J0: int | None = None
    Jmax: int | None = None
    limiter: str | None = None
    M: float | None = None
    eps: float | None = None
    M0: float | None = None
    L: int = 1
    Kw: float = 2.0
    cfl: float = 0.4
    t_end: float | None = None
    out: str | None = None
    snapshot_every: int = 0
    deterministic: bool = True

    def __post_init__(self):
        self.scheme = self.scheme.lower()
        if self.scheme not in ("wcu", "amwcu"):
            raise ValueError(f"scheme must be wcu or amwcu, not {self.scheme!r}")
        if self.N not in (5, 7):
            raise ValueError("N must be 5 or 7")

    def resolved(self, problem: ProblemSpec) -> "RunConfig":
        """Copy with every problem-dependent default filled in."""
        J0 = problem.J0 if self.J0 is None else self.J0
        Jmax = self.Jmax if self.Jmax is not None else (problem.Jmax if self.scheme == "amwcu" else J0)
        limiter = self.limiter if self.limiter is not None else problem.limiter_mode
        if self.scheme == "wcu" and limiter.upper() == "TVBR":
            limiter = "TVBU"
        return replace(self, J0=J0, Jmax=Jmax, limiter=limiter,
                       M=problem.M if self.M is None else self.M,
                       eps=problem.eps if self.eps is None else self.eps,
                       M0=problem.M0 if self.M0 is None else self.M0,
                       t_end=problem.t_end if self.t_end is None else self.t_end)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, text: str):
    kind = str(_TYPES[key])
    if "bool" in kind:
        return text.strip().lower() in ("1", "true", "yes", "on")
    if "int" in kind:
        return int(text)
    if "float" in kind:
        return float(text)
    return text.strip()


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def output_dir(cfg: RunConfig, tag: str) -> Path:
    if cfg.out:
        path = Path(cfg.out)
    else:
        path = Path(os.environ.get("WUH_OUT", "wuh_out")) / tag
    path.mkdir(parents=True, exist_ok=True)
    return path


def execute(cfg: RunConfig, problem: ProblemSpec | None = None) -> tuple[Solution, RunConfig, float]:
    """Run one configuration; returns the solution, the resolved config and wall time."""
    problem = problem or make_problem(cfg.problem)
    cfg = cfg.resolved(problem)
    problem = problem.with_time(cfg.t_end)
    adaptive = cfg.scheme == "amwcu"
    scheme = SchemeConfig(N=cfg.N, J0=cfg.J0, Jmax=cfg.Jmax, adaptive=adaptive)
    adapt = AdaptConfig(eps=cfg.eps, M0=cfg.M0, L=cfg.L, Kw=cfg.Kw) if adaptive else None
    start = time.perf_counter()
    sol = solve(problem, scheme, adapt, LimiterConfig(cfg.limiter, cfg.M),
                TimeControl(cfg.t_end, cfl=cfg.cfl), snapshot_every=cfg.snapshot_every)
    return sol, cfg, time.perf_counter() - start


def _component_names(problem: ProblemSpec) -> list[str]:
    return ["rho", "momentum", "energy"] if problem.flux.kind == "euler3" else ["u"]


def run_metrics(problem: ProblemSpec, cfg: RunConfig, sol: Solution, runtime: float) -> dict:
    metrics = {
        "config": asdict(cfg),
        "t": sol.t,
        "steps": sol.steps,
        "n_nodes": sol.grid.size,
        "max_level": int(sol.grid.levels.max()),
        "runtime_s": runtime,
    }
    if problem.exact is not None:
        exact = problem.exact(sol.x, sol.t)
        rep = error_norms(sol.state, exact, node_weights(sol.grid))
        metrics["l_inf"], metrics["l2"] = rep.l_inf, rep.l2
        w = node_weights(sol.grid)
        e = np.abs(sol.state - exact)
        e = e[:, 0] if e.ndim > 1 else e
        metrics["l1"] = float(np.sum(w * e))
    if problem.riemann is not None:
        rho = sol.state[:, 0]
        metrics["fronts"] = {k: {"numeric": a, "exact": b, "error": abs(a - b)}
                             for k, (a, b) in front_positions(problem, sol.x, rho, sol.t).items()}
    return metrics


def cmd_run(args) -> int:
    cfg = _config_from(args)
    problem = make_problem(cfg.problem)
    try:
        sol, cfg, runtime = execute(cfg, problem)
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = output_dir(cfg, f"{cfg.problem}-{cfg.scheme}")
    names = _component_names(problem)
    write_snapshot(out / "solution.csv", sol.grid, sol.state, names)
    for k, (t, grid, U) in enumerate(sol.snapshots):
        write_snapshot(out / f"snapshot_{k:04d}.csv", grid, U, names)
    if sol.adapt_log is not None:
        sol.adapt_log.write_csv(out / "adapt_log.csv")
    metrics = run_metrics(problem.with_time(cfg.t_end), cfg, sol, runtime)
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _config_from(args)
    problem = make_problem(cfg.problem)
    try:
        table = convergence_study(problem, cfg.N, args.counts, t_end=cfg.t_end, cfl=cfg.cfl)
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = output_dir(cfg, f"{cfg.problem}-convergence-N{cfg.N}")
    table.write_csv(out / "convergence.csv")
    for n1, rep in table.rows:
        order = "" if rep.l_inf_order is None else f"{rep.l_inf_order:6.2f}"
        print(f"{n1:6d}  {rep.l_inf:.3e}  {order}")
    return EXIT_OK


def _steepness(x, rho) -> float:
    """Largest density jump between neighbouring nodes divided by their distance."""
    return float(np.max(np.abs(np.diff(rho)) / np.diff(x)))


def cmd_compare(args) -> int:
    cfg = _config_from(args)
    problem = make_problem(cfg.problem)
    try:
        sol, cfg, runtime = execute(cfg, problem)
        if args.against == "wcu":
            other_cfg = replace(cfg, scheme="wcu", J0=cfg.Jmax, Jmax=cfg.Jmax,
                                limiter="TVBU" if cfg.limiter.upper() == "TVBR" else cfg.limiter)
            other, _, other_rt = execute(other_cfg, problem)
            x_b, b, n_b = other.x, other.state, other.grid.size
        else:
            points = args.points or (1 << cfg.Jmax) * round(
                (problem.domain[1] - problem.domain[0]) / problem.unit)
            start = time.perf_counter()
            x_b, b = weno5_solve(problem.initial, problem.flux, problem.domain, points,
                                 cfg.t_end, problem.bc, problem.odd_components())
            other_rt, n_b = time.perf_counter() - start, points
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    a = sol.state[:, 0] if sol.state.ndim > 1 else sol.state
    bb = b[:, 0] if np.ndim(b) > 1 else b
    report = {
        "config": asdict(cfg),
        "against": args.against,
        "n_nodes": sol.grid.size,
        "n_nodes_other": int(n_b),
        "node_ratio": sol.grid.size / n_b,
        "relative_l2_difference": relative_l2_difference(sol.x, a, x_b, bb),
        "steepness": _steepness(sol.x, a),
        "steepness_other": _steepness(np.asarray(x_b), bb),
        "runtime_s": runtime,
        "runtime_other_s": other_rt,
    }
    out = output_dir(cfg, f"{cfg.problem}-compare-{args.against}")
    (out / "compare.json").write_text(json.dumps(report, indent=2))
    print(json.dumps({k: v for k, v in report.items() if k != "config"}, indent=2))
    return EXIT_OK


def cmd_list(args) -> int:
    for name in list_problems():
        p = make_problem(name)
        print(f"{name:28s} {p.description}")
    return EXIT_OK


def cmd_export_basis(args) -> int:
    tables = make_basis(args.N, args.orientation, depth=args.depth)
    path = Path(args.path)
    path.parent.mkdir(parents=True, exist_ok=True)
    export_basis(tables, path)
    print(f"wrote {path}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--problem", default=S)
    p.add_argument("--scheme", choices=["wcu", "amwcu"], type=str.lower, default=S)
    p.add_argument("--N", type=int, choices=[5, 7], default=S)
    p.add_argument("--J0", type=int, default=S)
    p.add_argument("--Jmax", type=int, default=S)
    p.add_argument("--limiter", choices=["off", "tvbu", "tvbr", "tvbc"], type=str.lower, default=S)
    p.add_argument("--M", type=float, default=S, help="switch parameter of the limiter")
    p.add_argument("--eps", type=float, default=S, help="wavelet coefficient threshold")
    p.add_argument("--M0", type=float, default=S, help="basic-level smoothness threshold factor")
    p.add_argument("--L", type=int, default=S, help="level reach of an adjacent zone")
    p.add_argument("--Kw", type=float, default=S, help="width of an adjacent zone in spacings")
    p.add_argument("--cfl", type=float, default=S)
    p.add_argument("--t-end", dest="t_end", type=float, default=S)
    p.add_argument("--out", default=S, help="output directory (default $WUH_OUT/<tag>)")
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int, default=S)


def _config_from(args) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    values.update({k: v for k, v in vars(args).items() if k in _TYPES})
    return RunConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wuh", description="Adaptive upwind wavelet solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one benchmark and write CSV/JSON artifacts")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convergence", help="uniform refinement study against the exact solution")
    _add_run_flags(p)
    p.add_argument("--counts", type=int, nargs="+", default=[16, 32, 64, 128, 256],
                   help="numbers of basic intervals")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("compare", help="compare a run with WCU at Jmax or a WENO-5 run")
    _add_run_flags(p)
    p.add_argument("--against", choices=["wcu", "weno5"], default="wcu")
    p.add_argument("--points", type=int, default=None, help="WENO-5 cell count")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("list-problems", help="print the benchmark catalogue")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("export-basis", help="write filter and tabulated scaling-function data")
    p.add_argument("--N", type=int, choices=[5, 7], default=5)
    p.add_argument("--orientation", choices=["positive", "negative"], default="positive")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("path")
    p.set_defaults(func=cmd_export_basis)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownProblemError as exc:
        print(exc.args[0], file=sys.stderr)
        print("available problems:\n  " + "\n  ".join(list_problems()), file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
