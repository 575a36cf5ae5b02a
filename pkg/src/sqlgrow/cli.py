"""Batch command line for the synthesis pipeline.

Subcommands mirror the pipeline stages; ``run`` executes everything. All
stages read a JSON config file whose fields can be overridden by flags.
Exit codes: 0 success, 1 configuration error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import scheduler
from .errors import ConfigError, SqlgrowError
from .instances import read_jsonl, write_jsonl
from .pipeline import (
    RunConfig,
    SchemaRepo,
    build_gateway,
    ingest_seeds,
    run_eqe,
    run_full,
    run_oge,
    stats_report,
    verify_dataset,
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seeds", help="seed JSON file")
    parser.add_argument("--db-dir", dest="db_dir", help="directory of SQLite files")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--rounds", type=int, help="evolution rounds T")
    parser.add_argument("--budget-k", dest="budget_k", type=int, help="operators per instance")
    parser.add_argument("--epsilon", type=float, help="scarcity smoothing")
    parser.add_argument("--tau", type=float, help="dedup similarity threshold")
    parser.add_argument("--cot-n", dest="cot_n", type=int, help="reasoning samples per instance")
    parser.add_argument("--global-seed", dest="global_seed", type=int, help="run seed")
    parser.add_argument("--max-attempts", dest="max_attempts", type=int,
                        help="refinement attempts per candidate")
    parser.add_argument("--workers", type=int, help="worker count (reserved)")


def _load_config(args) -> RunConfig:
    overrides = {
        key: getattr(args, key, None)
        for key in ("seeds", "db_dir", "out_dir", "rounds", "budget_k", "epsilon",
                    "tau", "cot_n", "global_seed", "max_attempts", "workers")
    }
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sqlgrow",
        description="Evolve seed Text-to-SQL pairs into execution-verified training data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "full pipeline: ingest, expand, evolve, verify, dedup"),
        ("ingest", "validate seeds and write seeds.jsonl"),
        ("eqe", "exploratory expansion over ingested seeds"),
        ("oge", "one evolution round, operators scheduled per instance"),
        ("cot", "attach execution-verified reasoning traces"),
        ("dedup", "schema-aware near-duplicate removal"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        if name == "run":
            p.add_argument("--resume", action="store_true",
                           help="reuse finished stage checkpoints in the output directory")
        if name in ("eqe", "oge", "cot", "dedup"):
            p.add_argument("--in", dest="input", required=True, help="input JSONL")
        if name == "oge":
            p.add_argument("--round", type=int, default=1, help="round number")
            p.add_argument("--state", help="scheduler state JSON to resume from")

    stats = sub.add_parser("stats", help="feature report for a dataset")
    stats.add_argument("--dataset", required=True, help="dataset JSONL path")
    stats.add_argument("--csv", help="also write the CSV report here")

    verify = sub.add_parser("verify", help="re-execute every dataset row")
    verify.add_argument("--dataset", required=True)
    verify.add_argument("--db-dir", dest="db_dir", required=True)

    args = parser.parse_args(argv)

    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SqlgrowError, IOError) as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "stats":
        text, csv_text = stats_report(args.dataset)
        print(text)
        if args.csv:
            Path(args.csv).write_text(csv_text)
        return 0

    if args.command == "verify":
        repo = SchemaRepo(args.db_dir)
        try:
            summary = verify_dataset(args.dataset, repo)
        finally:
            repo.close()
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0 if not summary["failures"] else 2

    cfg = _load_config(args)

    if args.command == "run":
        manifest = run_full(cfg, resume=getattr(args, "resume", False))
        print(json.dumps(manifest["counts"], indent=2, sort_keys=True))
        print(f"dataset: {Path(cfg.out_dir) / 'dataset.jsonl'}")
        return 0

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    repo = SchemaRepo(cfg.db_dir)
    gateway = build_gateway(cfg)
    try:
        if args.command == "ingest":
            seeds, quarantined = ingest_seeds(cfg.seeds, repo, cfg)
            write_jsonl(seeds, out_dir / "seeds.jsonl")
            (out_dir / "quarantine.json").write_text(
                json.dumps(quarantined, sort_keys=True, indent=2))
            print(f"{len(seeds)} seeds accepted, {len(quarantined)} quarantined")
            return 0

        instances = read_jsonl(args.input)
        if args.command == "eqe":
            accepted = run_eqe(instances, cfg, repo, gateway)
            write_jsonl(accepted, out_dir / "eqe.jsonl")
            print(f"{len(accepted)} expansion instances accepted")
            return 0

        if args.command == "oge":
            if args.state:
                state = scheduler.state_from_json(Path(args.state).read_text())
            else:
                state = scheduler.fresh_state(cfg.epsilon, cfg.budget_k)
            next_set, evolved, state = run_oge(
                instances, cfg, repo, gateway, state, args.round)
            write_jsonl(next_set, out_dir / f"oge-{args.round}.jsonl")
            (out_dir / f"state-{args.round}.json").write_text(
                scheduler.state_to_json(state))
            print(f"{len(evolved)} evolved instances accepted in round {args.round}")
            return 0

        if args.command == "cot":
            from .pipeline import _run_cot

            records, discards, deferrals = _run_cot(instances, cfg, repo, gateway)
            traces = {r.instance_id: r.trace for r in records}
            kept = []
            for inst in instances:
                if inst.id in traces:
                    inst = inst.with_status("cot-kept")
                    inst.cot = traces[inst.id]
                    kept.append(inst)
            write_jsonl(kept, out_dir / "cot.jsonl")
            print(f"kept {len(records)}, discarded {len(discards)}, "
                  f"deferred {len(deferrals)}")
            return 0

        if args.command == "dedup":
            from .pipeline import _dedup_pool

            kept, removals = _dedup_pool(instances, cfg)
            write_jsonl(kept, out_dir / "dedup.jsonl")
            print(f"kept {len(kept)}, removed {len(removals)}")
            return 0
    finally:
        repo.close()
    return 1


if __name__ == "__main__":
    sys.exit(main())
