"""``biloc`` command line.

Exit codes: 0 success, 1 a domain invariant is violated, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path


from . import io
from .algebra import (
    AlgebraError,
    check_mutual_commutation,
    contains_M2,
    is_abelian,
    tol_commute,
)
from .bilocal import (
    ObservableError,
    canonical_max_violation,
    canonical_observables,
    evaluate,
    marginal_factorization_residual,
    probability_table,
)
from .optimize import OptimizationError, SeesawOptions, parse_grid, seesaw, sweep, werner_builder
from .oracle import OracleError, classical_bilocal_max, grid_search_qubit
from .states import StateError, check_independence

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
DOMAIN_ERRORS = (AlgebraError, StateError, ObservableError, OptimizationError, OracleError)

log = logging.getLogger("biloc")


@dataclass
class RunConfig:
    command: str
    scenario: Path | None = None
    state: Path | None = None
    observables: Path | None = None
    out: Path | None = None
    seed: int = 0
    options: dict = field(default_factory=dict)
    quiet: bool = False

    def seesaw_options(self, **extra) -> SeesawOptions:
        kw = {k: v for k, v in self.options.items() if v is not None}
        return SeesawOptions(seed=self.seed, **kw, **extra)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _need(path: Path | None, flag: str) -> Path:
    if path is None:
        raise CliError(f"missing required option {flag}", EXIT_IO)
    return path


def _say(cfg: RunConfig, msg: str) -> None:
    if not cfg.quiet:
        print(msg)


def _emit(cfg: RunConfig, doc: dict) -> None:
    if cfg.out is not None:
        io.write_json(cfg.out, doc)
        _say(cfg, f"wrote {cfg.out}")
    else:
        print(json.dumps(doc, indent=1))


def _load_inputs(cfg: RunConfig, need_obs: bool = True):
    s = io.scenario_from_json(io.read_json(_need(cfg.scenario, "--scenario"), io.SCENARIO_SCHEMA))
    state = io.state_from_json(io.read_json(_need(cfg.state, "--state"), io.STATE_SCHEMA), s)
    if state.dim != s.dim:
        raise StateError(f"state dimension {state.dim} != scenario dimension {s.dim}")
    obs = None
    if need_obs:
        obs = io.observables_from_json(
            io.read_json(_need(cfg.observables, "--observables"), io.OBSERVABLES_SCHEMA)
        )
        if obs.dim != s.dim:
            raise ObservableError("A0", f"dimension {obs.dim} != scenario dimension {s.dim}")
    return s, state, obs


# -- commands -----------------------------------------------------------------

def cmd_validate(cfg: RunConfig) -> int:
    s = io.scenario_from_json(io.read_json(_need(cfg.scenario, "--scenario"), io.SCENARIO_SCHEMA))
    r = check_mutual_commutation(s)
    ok = r <= tol_commute(s.dim)
    print(f"dimension: {s.dim}")
    print(f"commutation residual: {r:.3e} (tolerance {tol_commute(s.dim):.1e})")
    for party in "ABC":
        alg = s.algebra(party)
        blocks = ", ".join(f"({n},{m})" for n, m in alg.blocks)
        print(
            f"algebra {party}: blocks [{blocks}] abelian={str(is_abelian(alg)).lower()} "
            f"contains_M2={str(contains_M2(alg)).lower()}"
        )
    print("valid" if ok else "invalid: algebras do not commute")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_evaluate(cfg: RunConfig) -> int:
    s, state, obs = _load_inputs(cfg)
    report = evaluate(state, obs, s)
    ind = state.independence_residual
    if ind is None:
        ind = check_independence(state, s)
    mf = marginal_factorization_residual(probability_table(state, obs))
    _emit(cfg, io.report_to_json(report, ind, mf))
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    s, state, _ = _load_inputs(cfg, need_obs=False)
    sources = bool(cfg.options.pop("optimize_sources", False))
    resolution = cfg.options.pop("resolution", None)
    opts = cfg.seesaw_options(optimize_sources=sources)
    _say(cfg, f"seed: {opts.seed}")
    trace = seesaw(state, s, opts)
    doc = io.trace_to_json(trace)
    if resolution is not None:
        grid = grid_search_qubit(state, s, resolution)
        doc["grid_oracle"] = {"resolution": resolution, "S": grid.S, "settings": grid.settings}
        _say(cfg, f"grid oracle (resolution {resolution}): S = {grid.S:.12f}")
    _say(cfg, f"best S = {trace.best_S:.12f} (median iterations {trace.median_iterations:g})")
    if cfg.out is not None:
        io.write_json(cfg.out, doc)
        _say(cfg, f"wrote {cfg.out}")
    elif cfg.quiet:
        print(json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.options.pop("grid", None) or "0:1:0.05")
    if any(not 0.0 <= v <= 1.0 for v in grid):
        raise CliError("Werner visibility must lie in [0, 1]", EXIT_INVALID)
    optimize = bool(cfg.options.pop("optimize", False))
    cfg.options.pop("resolution", None)
    if optimize:
        opts = cfg.seesaw_options()
        print(f"seed: {opts.seed}", file=sys.stderr)
        rows = sweep(grid, werner_builder, opts)
    else:
        rows = sweep(grid, werner_builder, observables=canonical_observables())
    text = io.sweep_to_csv(rows)
    if cfg.out is not None:
        Path(cfg.out).write_text(text)
        _say(cfg, f"wrote {cfg.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classical(cfg: RunConfig, L: int, M: int) -> int:
    print(classical_bilocal_max(L, M))
    return EXIT_OK


def cmd_canonical(cfg: RunConfig) -> int:
    out = Path(_need(cfg.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    s, state, obs = canonical_max_violation()
    files = {
        "scenario.json": io.scenario_to_json(s),
        "state.json": io.state_to_json(state),
        "observables.json": io.observables_to_json(obs),
    }
    for name, doc in files.items():
        io.write_json(out / name, doc)
        _say(cfg, f"wrote {out / name}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path)
    common.add_argument("--state", type=Path)
    common.add_argument("--observables", type=Path)
    common.add_argument("--out", type=Path)
    common.add_argument("--restarts", type=int)
    common.add_argument("--max-iters", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--resolution", type=int)
    common.add_argument("--grid", help="comma list or start:stop:step")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="biloc", description="Bilocal Bell quantities on commuting algebras.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a scenario file")
    sub.add_parser("evaluate", parents=[common], help="I, J, S and residuals for a triple")
    o = sub.add_parser("optimize", parents=[common], help="see-saw maximization of S")
    o.add_argument("--optimize-sources", action="store_true")
    w = sub.add_parser("sweep", parents=[common], help="Werner visibility sweep (CSV)")
    w.add_argument("--optimize", action="store_true", help="run the see-saw at each point")
    c = sub.add_parser("classical", parents=[common], help="deterministic bilocal maximum")
    c.add_argument("L", type=int)
    c.add_argument("M", type=int)
    sub.add_parser("canonical", parents=[common], help="write the canonical triple to --out DIR")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    cfg = RunConfig(
        command=args.command,
        scenario=args.scenario,
        state=args.state,
        observables=args.observables,
        out=args.out,
        seed=args.seed,
        quiet=args.quiet,
        options={
            "restarts": args.restarts,
            "max_iters": args.max_iters,
            "resolution": args.resolution,
            "grid": args.grid,
            "optimize": getattr(args, "optimize", False),
            "optimize_sources": getattr(args, "optimize_sources", False),
        },
    )
    handlers = {
        "validate": cmd_validate,
        "evaluate": cmd_evaluate,
        "optimize": cmd_optimize,
        "sweep": cmd_sweep,
        "canonical": cmd_canonical,
    }
    try:
        if cfg.command in ("optimize", "sweep"):
            if cfg.command == "optimize":
                cfg.options.pop("grid")
                cfg.options.pop("optimize")
            else:
                cfg.options.pop("optimize_sources")
        if cfg.command == "classical":
            return cmd_classical(cfg, args.L, args.M)
        return handlers[cfg.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except io.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ObservableError as exc:
        print(f"error: invalid observable {exc.field}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
