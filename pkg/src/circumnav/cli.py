"""Command line interface: run scenarios, benchmark estimators, metrics."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

from .config import BUILTIN_SCENARIOS, ScenarioConfig, builtin, load_config
from .errors import ConfigError, SchemaError


def _load(args) -> ScenarioConfig:
    if args.config and args.scenario:
        raise ConfigError("cli", "pass either --config or --scenario, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.scenario:
        cfg = builtin(args.scenario)
    else:
        raise ConfigError("cli", "one of --config or --scenario is required")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "duration", None) is not None:
        cfg = dataclasses.replace(
            cfg, world=dataclasses.replace(cfg.world, duration=args.duration)
        )
    return cfg


def _out_dir(args, cfg: ScenarioConfig) -> Optional[Path]:
    if args.out:
        return Path(args.out)
    if cfg.out_dir:
        return Path(cfg.out_dir)
    return Path("runs") / f"{cfg.name}-seed{cfg.seed}"


def cmd_run(args) -> int:
    from .runner import run_scenario

    cfg = _load(args)
    out = _out_dir(args, cfg)
    result = run_scenario(
        cfg, out_dir=out, estimator_kinds=("modified", "classical", "rls")
    )
    print(f"run complete: {cfg.name} seed={cfg.seed} steps={len(result.tables.world)}")
    print(f"logs: {result.out_dir}")
    rmse_pooled = result.metrics.get("relative_rmse_pooled", {})
    for kind, value in sorted(rmse_pooled.items()):
        print(f"relative RMSE ({kind}): {value:.4f} m")
    return 0


def cmd_compare(args) -> int:
    from .metrics import compare_estimators

    cfg = _load(args)
    table = compare_estimators(cfg, trials=args.trials)
    print(f"{'estimator':<12} {'mean RMSE (m)':>14}")
    for kind in ("modified", "classical", "rls"):
        print(f"{kind:<12} {table['mean_rmse'][kind]:>14.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(table, indent=2, sort_keys=True))
    return 0


def cmd_metrics(args) -> int:
    from .metrics import compute_metrics

    m = compute_metrics(Path(args.run))
    print(json.dumps(m.summary(), indent=2, sort_keys=True))
    return 0


def cmd_list(args) -> int:
    for name, factory in sorted(BUILTIN_SCENARIOS.items()):
        doc = (factory.__doc__ or "").strip().splitlines()[0]
        print(f"{name:<24} {doc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circumnav",
        description="Deterministic cooperative-circumnavigation simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario and write logs")
    run.add_argument("--config", type=str, help="TOML scenario file")
    run.add_argument("--scenario", type=str, help="builtin scenario name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", type=str, default=None)
    run.add_argument("--duration", type=float, default=None)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare-estimators", help="RMSE table over seeded trials")
    cmp_.add_argument("--config", type=str)
    cmp_.add_argument("--scenario", type=str)
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--trials", type=int, default=10)
    cmp_.add_argument("--out", type=str, default=None)
    cmp_.add_argument("--duration", type=float, default=None)
    cmp_.set_defaults(func=cmd_compare)

    met = sub.add_parser("metrics", help="recompute metrics from a run directory")
    met.add_argument("--run", type=str, required=True)
    met.set_defaults(func=cmd_metrics)

    lst = sub.add_parser("list-scenarios", help="list builtin scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(
            json.dumps({"error": "config", "field": exc.field, "message": exc.message}),
            file=sys.stderr,
        )
        return 2
    except SchemaError as exc:
        print(
            json.dumps({"error": "schema", "column": exc.column, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
