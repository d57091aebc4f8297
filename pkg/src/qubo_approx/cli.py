"""Command-line entry point: ``qubo-approx <command> ...``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from qubo_approx.config import get_settings, parse_chimera
from qubo_approx.embedding import InstanceFamily, chimera
from qubo_approx.errors import ConfigError, InstanceError, ParameterError, QuboError
from qubo_approx.harness import (
    ExperimentConfig,
    compare_strategies,
    embed_curve,
    load_config,
    read_config,
    run_experiment,
    sweep_effort,
)
from qubo_approx.problems import ProblemKind, RefMode
from qubo_approx.pruning import PruneStrategy
from qubo_approx.qubo import load as load_qubo
from qubo_approx.reporting import emit_csv, emit_embed_plot, write_tables
from qubo_approx.sampler import brute_force

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_KINDS = [k.value for k in ProblemKind]


def _experiment_args(p: argparse.ArgumentParser, *, strategy: bool = True) -> None:
    p.add_argument("--config", help="rerun a written <name>.config.json; only --out and --name still apply")
    p.add_argument("--problem", choices=_KINDS)
    p.add_argument("--instance", help="instance file; omit to generate one with --size")
    p.add_argument("--size", type=int, help="size of a generated instance")
    if strategy:
        p.add_argument("--strategy", default="fraction", help="fraction, threshold, random or random:<seed>")
    p.add_argument("--seed", type=int, help="seed of the random pruning strategy")
    p.add_argument("--runs", type=int, help="samples per schedule step")
    p.add_argument("--sweeps", type=int, help="annealing sweeps per sample")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--granularity", type=float)
    p.add_argument("--chimera", help="RxCxS, e.g. 16x16x4")
    p.add_argument("--embed-attempts", type=int)
    p.add_argument("--no-embed", action="store_true", help="skip the physical-qubit column")
    p.add_argument("--no-embed-curve", action="store_true", help="skip the embeddable size ratio column")
    p.add_argument("--ref-mode", choices=[m.value for m in RefMode], default=RefMode.CAPTION.value)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--out", help="output directory (default: QUBO_OUTPUT_DIR)")
    p.add_argument("--name", help="basename of the output files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubo-approx", description="Approximate QUBO experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="quality and footprint over one pruning schedule")
    _experiment_args(run)

    compare = sub.add_parser("compare", help="one schedule per pruning strategy")
    _experiment_args(compare, strategy=False)
    compare.add_argument("--strategies", nargs="+", help="default: fraction threshold random")

    effort = sub.add_parser("sweep-effort", help="one schedule per annealing effort")
    _experiment_args(effort)
    effort.add_argument("--sweeps-list", nargs="+", type=int, help="default: QUBO_EFFORT_SWEEPS")

    curve = sub.add_parser("embed-curve", help="largest embeddable instance size per pruning fraction")
    curve.add_argument("--problem", required=True, choices=_KINDS)
    curve.add_argument("--strategy", default="fraction")
    curve.add_argument("--seed", type=int, help="seed of the random pruning strategy")
    curve.add_argument("--family-seed", type=int, default=0, help="generator seed of the instance family")
    curve.add_argument("--embed-seed", type=int, default=0)
    curve.add_argument("--embed-attempts", type=int)
    curve.add_argument("--granularity", type=float)
    curve.add_argument("--chimera")
    curve.add_argument("--out")
    curve.add_argument("--name")

    oracle = sub.add_parser("oracle", help="brute-force a QUBO file")
    oracle.add_argument("qubo_file")
    oracle.add_argument("--cap", type=int, help="largest n to enumerate (default: QUBO_BRUTE_FORCE_CAP)")

    serve = sub.add_parser("serve", help="run the HTTP/MCP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    return parser


def _config_from_args(args: argparse.Namespace) -> tuple[ExperimentConfig, dict[str, Any]]:
    """The experiment config and any extra keys (strategies, sweeps_list) of a --config file."""
    if args.config:
        cfg, extra = read_config(args.config)
        update = {k: v for k, v in (("output_dir", args.out), ("name", args.name)) if v is not None}
        return cfg.model_copy(update=update), extra
    if args.problem is None:
        raise ConfigError("either --problem or --config is required")
    data: dict[str, Any] = {
        "problem": args.problem,
        "instance": args.instance,
        "size": args.size,
        "strategy": getattr(args, "strategy", "fraction"),
        "strategy_seed": args.seed,
        "n_runs": args.runs,
        "sweeps": args.sweeps,
        "restarts": args.restarts,
        "granularity": args.granularity,
        "chimera": args.chimera,
        "embed": not args.no_embed,
        "embed_curve": not args.no_embed_curve,
        "embed_attempts": args.embed_attempts,
        "ref_mode": args.ref_mode,
        "master_seed": args.master_seed,
        "output_dir": args.out,
    }
    if args.name:
        data["name"] = args.name
    elif args.instance:
        data["name"] = f"{args.problem}-{Path(args.instance).stem}"
    else:
        data["name"] = f"{args.problem}-n{args.size}"
    return load_config({k: v for k, v in data.items() if v is not None}), {}


# ---------------------------
# Commands
# ---------------------------
def _cmd_run(args: argparse.Namespace) -> int:
    cfg, _ = _config_from_args(args)
    rows = run_experiment(cfg)
    written = write_tables(cfg.name, {rows[0].strategy: rows}, cfg, cfg.output_dir)
    print(json.dumps({k: str(v) for k, v in written.items()}, indent=2))
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg, extra = _config_from_args(args)
    strategies = args.strategies or extra.get("strategies") or ["fraction", "threshold", "random"]
    tables = compare_strategies(cfg, strategies)
    written = write_tables(cfg.name, tables, cfg, cfg.output_dir, {"strategies": list(tables)})
    print(json.dumps({k: str(v) for k, v in written.items()}, indent=2))
    return EXIT_OK


def _cmd_sweep_effort(args: argparse.Namespace) -> int:
    cfg, extra = _config_from_args(args)
    sweeps_list = args.sweeps_list or extra.get("sweeps_list") or get_settings().effort_sweeps
    tables = sweep_effort(cfg, sweeps_list)
    labelled = {f"sweeps-{s}": rows for s, rows in tables.items()}
    written = write_tables(cfg.name, labelled, cfg, cfg.output_dir, {"sweeps_list": list(tables)})
    print(json.dumps({k: str(v) for k, v in written.items()}, indent=2))
    return EXIT_OK


def _cmd_embed_curve(args: argparse.Namespace) -> int:
    settings = get_settings()
    try:
        strategy = PruneStrategy.parse(args.strategy, args.seed)
    except ParameterError as e:
        raise ConfigError(str(e)) from e
    gc = chimera(*parse_chimera(args.chimera or settings.chimera_raw))
    family = InstanceFamily(ProblemKind(args.problem), int(args.family_seed))
    rows = embed_curve(family, strategy, gc, args.embed_seed, args.embed_attempts, args.granularity)
    name = args.name or f"{args.problem}-embed-{strategy.label.replace(':', '-')}"
    out = Path(args.out or settings.output_dir)
    csv_path = emit_csv(rows, out / f"{name}.csv")
    svg_path = emit_embed_plot(rows, out / f"{name}.svg", title=f"{args.problem} on chimera {gc.label}")
    print(json.dumps({"csv": str(csv_path), "figure": str(svg_path)}, indent=2))
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    q = load_qubo(args.qubo_file)
    best = brute_force(q, args.cap)
    print(json.dumps({"n": q.n, "assignment": "".join(str(b) for b in best.assignment), "energy": best.energy}))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run(
        "qubo_approx.app:app",
        host=args.host or settings.host,
        port=args.port or settings.port,
        log_level=settings.log_level.lower(),
    )
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "sweep-effort": _cmd_sweep_effort,
    "embed-curve": _cmd_embed_curve,
    "oracle": _cmd_oracle,
    "serve": _cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
        logging.basicConfig(level=settings.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        return _COMMANDS[args.command](args)
    except (ConfigError, ParameterError, ValidationError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except InstanceError as e:
        logger.error("Bad input: %s", e)
        return EXIT_CONFIG
    except (QuboError, OSError) as e:
        logger.error("Run failed: %s", e)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
