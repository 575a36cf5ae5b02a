"""End-to-end synthesis pipeline: ingest, expand, evolve, verify, dedup.

Stages run sequentially and deterministically: per-call RNG seeds derive
from the global seed plus the instance id, round, and operator, so a rerun
with the same configuration reproduces the dataset byte for byte. Each
stage checkpoints its output so an aborted run resumes by stage name.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
from dataclasses import dataclass, field, asdict
from pathlib import Path

from . import scheduler
from .cot import CotDeferral, CotDiscard, CotRecord, synthesize_cot
from .dedup import HttpEmbeddingBackend, dedup_schema_group, embed_questions
from .errors import ConfigError, SqlgrowError, TransportError
from .features import FEATURE_COLUMNS, FeatureVector, aggregate_features, extract_features
from .gateway import HttpChatBackend, LlmGateway
from .harness import (
    ExecutionLimits,
    collect_result,
    execute_sql,
    is_acceptable,
    open_readonly,
    refine_until_valid,
)
from .instances import (
    STAGE_EQE,
    STAGE_SEED,
    QueryInstance,
    oge_stage,
    read_jsonl,
    stage_rank,
    write_jsonl,
)
from .operators import OperatorId, check_applicability
from .parser import parse_sql
from .resolve import resolve_references
from .schema import DatabaseSchema, load_schema

STAGES = ("ingest", "eqe", "oge", "cot", "dedup", "final")


@dataclass
class RunConfig:
    seeds: str = ""
    db_dir: str = ""
    out_dir: str = "out"
    rounds: int = 2
    budget_k: int = 2
    epsilon: float = 0.01
    p_target: dict | None = None
    tau: float = 0.9
    cot_n: int = 4
    expansions_per_seed: int = 1
    timeout_ms: int = 5000
    max_rows: int = 1000
    max_attempts: int = 3
    global_seed: int = 0
    workers: int = 1
    dedup_before_cot: bool = False
    backends: dict = field(default_factory=dict)
    embedder: dict | None = None

    def validate(self) -> None:
        if self.rounds < 0:
            raise ConfigError("rounds must be >= 0")
        if self.budget_k < 1:
            raise ConfigError("budget_k must be >= 1")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError("tau must lie in (0, 1]")
        if self.cot_n < 1:
            raise ConfigError("cot_n must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.expansions_per_seed < 1:
            raise ConfigError("expansions_per_seed must be >= 1")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def limits(self) -> ExecutionLimits:
        return ExecutionLimits(timeout_ms=self.timeout_ms, max_rows=self.max_rows)

    def echo(self) -> dict:
        data = asdict(self)
        data.pop("out_dir")  # sink location, not a synthesis parameter
        data["backends"] = {role: {"model": b.get("model", "")}
                            for role, b in (self.backends or {}).items()}
        return data

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        merged = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
        cfg = cls(**merged)
        cfg.validate()
        return cfg


def derive_seed(global_seed: int, *parts) -> int:
    tag = ":".join([str(global_seed), *map(str, parts)])
    return int(hashlib.sha256(tag.encode("utf-8")).hexdigest()[:12], 16)


class SchemaRepo:
    """Discovers database files and serves schemas plus read-only handles."""

    def __init__(self, db_dir):
        self.db_dir = Path(db_dir)
        if not self.db_dir.is_dir():
            raise ConfigError(f"database directory not found: {db_dir}")
        self._paths: dict[str, Path] = {}
        for pattern in ("*.db", "*.sqlite", "*/*.db", "*/*.sqlite"):
            for path in sorted(self.db_dir.glob(pattern)):
                self._paths.setdefault(path.stem, path)
        self._schemas: dict[str, DatabaseSchema] = {}
        self._conns: dict[str, sqlite3.Connection] = {}

    def ids(self) -> list[str]:
        return sorted(self._paths)

    def has(self, schema_id: str) -> bool:
        return schema_id in self._paths

    def path(self, schema_id: str) -> Path:
        return self._paths[schema_id]

    def schema(self, schema_id: str) -> DatabaseSchema:
        if schema_id not in self._schemas:
            self._schemas[schema_id] = load_schema(self._paths[schema_id])
        return self._schemas[schema_id]

    def connection(self, schema_id: str) -> sqlite3.Connection:
        if schema_id not in self._conns:
            self._conns[schema_id] = open_readonly(self._paths[schema_id])
        return self._conns[schema_id]

    def close(self) -> None:
        for conn in self._conns.values():
            conn.close()
        self._conns.clear()


def build_gateway(cfg: RunConfig) -> LlmGateway:
    backends = {}
    for role, spec in (cfg.backends or {}).items():
        import os

        backends[role] = HttpChatBackend(
            endpoint=spec["endpoint"],
            model=spec.get("model", ""),
            api_key=os.environ.get(spec.get("api_key_env", ""), ""),
        )
    return LlmGateway(backends=backends, global_seed=cfg.global_seed)


def build_embedder(cfg: RunConfig) -> HttpEmbeddingBackend | None:
    if not cfg.embedder:
        return None
    import os

    spec = cfg.embedder
    return HttpEmbeddingBackend(
        endpoint=spec["endpoint"],
        model=spec.get("model", ""),
        api_key=os.environ.get(spec.get("api_key_env", ""), ""),
    )


# ---------------------------------------------------------------------------
# Stage: ingest
# ---------------------------------------------------------------------------

_SQL_KEYS = ("SQL", "sql", "query", "gold_sql")


def ingest_seeds(path, repo: SchemaRepo, cfg: RunConfig | None = None):
    """Parse, resolve, and execute every seed; failures are quarantined."""
    cfg = cfg or RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            records = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOError(f"cannot read seed file {path}: {exc}")
    if not isinstance(records, list):
        raise IOError(f"seed file {path} must hold a JSON array")

    seeds: list[QueryInstance] = []
    quarantined: list[dict] = []
    for i, record in enumerate(records):
        reason = None
        sql = next((record[k] for k in _SQL_KEYS if record.get(k)), "")
        question = record.get("question", "")
        schema_id = record.get("db_id") or record.get("schema_id") or ""
        if not question or not sql:
            reason = "missing question or SQL"
        elif not repo.has(schema_id):
            reason = "schema not found"
        else:
            schema = repo.schema(schema_id)
            conn = repo.connection(schema_id)
            reason = _seed_problem(sql, schema, conn, cfg.limits)
        if reason:
            quarantined.append({"index": i, "question": question,
                                "schema_id": schema_id, "reason": reason})
            continue
        ast = parse_sql(sql)
        seeds.append(QueryInstance(
            id=f"seed-{i:04d}",
            schema_id=schema_id,
            question=question,
            evidence=record.get("evidence", "") or "",
            sql=sql,
            stage=STAGE_SEED,
            features=extract_features(ast),
        ))
    return seeds, quarantined


def _seed_problem(sql, schema, conn, limits) -> str | None:
    try:
        ast = parse_sql(sql)
    except SqlgrowError as exc:
        return f"parse failure: {exc}"
    try:
        report = resolve_references(ast, schema)
    except SqlgrowError as exc:
        return f"resolution failure: {exc}"
    if report.unresolved:
        names = sorted({b.name for b in report.unresolved})
        return "unresolved columns: " + ", ".join(names)
    feedback = execute_sql(conn, sql, limits)
    if not feedback.ok:
        return feedback.error
    if feedback.row_count == 0:
        return "empty result"
    return None


# ---------------------------------------------------------------------------
# Stage: exploratory expansion
# ---------------------------------------------------------------------------

_TRANSPORT_TRIES = 2  # transport failures retry the instance once


def _with_transport_retry(action):
    last = None
    for _ in range(_TRANSPORT_TRIES):
        try:
            return action()
        except TransportError as exc:
            last = exc
    raise last


def run_eqe(seeds, cfg: RunConfig, repo: SchemaRepo, gateway: LlmGateway,
            rejections: list | None = None):
    accepted: list[QueryInstance] = []
    rejections = rejections if rejections is not None else []
    for seed_inst in seeds:
        schema = repo.schema(seed_inst.schema_id)
        conn = repo.connection(seed_inst.schema_id)
        for j in range(cfg.expansions_per_seed):
            call_seed = derive_seed(cfg.global_seed, seed_inst.id, "eqe", j)

            def expand_and_refine():
                result = gateway.generate_expansion(
                    seed_inst.question, seed_inst.evidence, seed_inst.sql,
                    schema, db=conn, seed=call_seed,
                )
                outcome = refine_until_valid(
                    result.question, result.sql, schema, conn,
                    refiner=lambda q, s, sc, fb: gateway.refine_sql(
                        q, s, sc, fb, db=conn),
                    max_attempts=cfg.max_attempts, limits=cfg.limits,
                )
                return result, outcome

            try:
                result, outcome = _with_transport_retry(expand_and_refine)
            except TransportError as exc:
                rejections.append({"stage": STAGE_EQE, "parent": seed_inst.id,
                                   "reason": f"transport: {exc}"})
                continue
            if not outcome.accepted:
                rejections.append({"stage": STAGE_EQE, "parent": seed_inst.id,
                                   "reason": outcome.reason})
                continue
            accepted.append(QueryInstance(
                id=f"{seed_inst.id}/e{j}",
                schema_id=seed_inst.schema_id,
                question=result.question,
                evidence=result.evidence,
                sql=outcome.sql,
                stage=STAGE_EQE,
                parent_id=seed_inst.id,
                features=extract_features(parse_sql(outcome.sql)),
            ))
    return accepted


# ---------------------------------------------------------------------------
# Stage: evolution rounds
# ---------------------------------------------------------------------------

def run_oge(current, cfg: RunConfig, repo: SchemaRepo, gateway: LlmGateway,
            state: scheduler.EvolutionState, round_no: int,
            rejections: list | None = None):
    """One evolution round; returns (next set, newly evolved, state)."""
    next_set: list[QueryInstance] = []
    evolved: list[QueryInstance] = []
    rejections = rejections if rejections is not None else []
    stage = oge_stage(round_no)

    for inst in current:
        schema = repo.schema(inst.schema_id)
        conn = repo.connection(inst.schema_id)
        try:
            ast = parse_sql(inst.sql)
        except SqlgrowError as exc:
            rejections.append({"stage": stage, "parent": inst.id,
                               "reason": f"unparseable input: {exc}"})
            continue

        rule_scores = {
            op: check_applicability(ast, schema, op).score for op in OperatorId
        }
        feas = dict(rule_scores)
        if "strategize" in gateway.backends:
            try:
                llm_scores = gateway.score_feasibility_llm(inst.question, inst.sql, schema)
            except (TransportError, SqlgrowError):
                llm_scores = {}
            for op in OperatorId:
                if op in llm_scores:
                    gate = 1.0 if rule_scores[op] > 0 else 0.0
                    feas[op] = gate * llm_scores[op][0]

        utilities = {
            op: scheduler.utility(feas[op], scheduler.scarcity_weight(state, op))
            for op in OperatorId
        }
        chosen = scheduler.select_top_k(utilities, cfg.budget_k)

        for op in chosen:
            call_seed = derive_seed(cfg.global_seed, inst.id, round_no, op.name)

            def evolve_and_refine():
                result = gateway.generate_evolution(
                    inst.question, inst.evidence, inst.sql, schema, op,
                    db=conn, seed=call_seed,
                )
                outcome = refine_until_valid(
                    result.question, result.sql, schema, conn,
                    refiner=lambda q, s, sc, fb: gateway.refine_sql(
                        q, s, sc, fb, db=conn),
                    max_attempts=cfg.max_attempts, limits=cfg.limits,
                )
                return result, outcome

            try:
                result, outcome = _with_transport_retry(evolve_and_refine)
            except TransportError as exc:
                rejections.append({"stage": stage, "parent": inst.id,
                                   "operator": op.name, "reason": f"transport: {exc}"})
                continue
            except SqlgrowError as exc:
                rejections.append({"stage": stage, "parent": inst.id,
                                   "operator": op.name, "reason": str(exc)})
                continue
            if not outcome.accepted:
                rejections.append({"stage": stage, "parent": inst.id,
                                   "operator": op.name, "reason": outcome.reason})
                continue
            child = QueryInstance(
                id=f"{inst.id}/{op.name.lower()}{round_no}",
                schema_id=inst.schema_id,
                question=result.question,
                evidence=result.evidence,
                sql=outcome.sql,
                stage=stage,
                parent_id=inst.id,
                operator_applied=op,
                features=extract_features(parse_sql(outcome.sql)),
            )
            next_set.append(child)
            evolved.append(child)
            state = scheduler.record_acceptance(state, op)
    return next_set, evolved, state


# ---------------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------------

def run_full(cfg: RunConfig, resume: bool = False) -> dict:
    """Execute the whole pipeline and write dataset, manifest, and reports."""
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    done = _load_done(ckpt_dir) if resume else {}

    repo = SchemaRepo(cfg.db_dir)
    gateway = build_gateway(cfg)
    rejections: list[dict] = []

    try:
        # ingest
        if "ingest" in done:
            seeds = read_jsonl(ckpt_dir / "seeds.jsonl")
            quarantined = json.loads((ckpt_dir / "quarantine.json").read_text())
        else:
            seeds, quarantined = ingest_seeds(cfg.seeds, repo, cfg)
            write_jsonl(seeds, ckpt_dir / "seeds.jsonl")
            (ckpt_dir / "quarantine.json").write_text(
                json.dumps(quarantined, sort_keys=True, indent=2))
            _mark_done(ckpt_dir, "ingest")

        # exploratory expansion
        if "eqe" in done:
            eqe = read_jsonl(ckpt_dir / "eqe.jsonl")
        else:
            eqe = run_eqe(seeds, cfg, repo, gateway, rejections)
            write_jsonl(eqe, ckpt_dir / "eqe.jsonl")
            _mark_done(ckpt_dir, "eqe")

        # evolution rounds
        state = scheduler.fresh_state(cfg.epsilon, cfg.budget_k, _p_target(cfg))
        current, evolved = eqe, []
        for round_no in range(1, cfg.rounds + 1):
            stage_name = f"oge-{round_no}"
            ckpt = ckpt_dir / f"{stage_name}.jsonl"
            if stage_name in done:
                current = read_jsonl(ckpt)
                evolved.extend(current)
                state = scheduler.state_from_json(
                    (ckpt_dir / f"state-{round_no}.json").read_text())
            else:
                current, delta, state = run_oge(
                    current, cfg, repo, gateway, state, round_no, rejections)
                evolved.extend(delta)
                write_jsonl(current, ckpt)
                (ckpt_dir / f"state-{round_no}.json").write_text(
                    scheduler.state_to_json(state))
                _mark_done(ckpt_dir, stage_name)

        pool = seeds + eqe + evolved

        # optional early dedup to save teacher calls
        removals = []
        if cfg.dedup_before_cot:
            pool, removals = _dedup_pool(pool, cfg)

        # chain-of-thought verification
        cot_records, discards, deferrals = _run_cot(pool, cfg, repo, gateway)
        kept_ids = {r.instance_id for r in cot_records}
        traces = {r.instance_id: r.trace for r in cot_records}
        surviving = []
        for inst in pool:
            if inst.id in kept_ids:
                inst = inst.with_status("cot-kept")
                inst.cot = traces[inst.id]
                surviving.append(inst)
            else:
                surviving.append(inst.with_status("cot-discarded"))
        dataset = [inst for inst in surviving if inst.status == "cot-kept"]

        # final dedup
        if not cfg.dedup_before_cot:
            dataset, removals = _dedup_pool(dataset, cfg)

        dataset.sort(key=lambda i: (i.schema_id, stage_rank(i.stage), i.id))
        write_jsonl(dataset, out_dir / "dataset.jsonl")
        _write_side_files(out_dir, removals, rejections, quarantined)

        manifest = _build_manifest(
            cfg, seeds, eqe, evolved, dataset, quarantined, rejections,
            removals, cot_records, discards, deferrals, state,
        )
        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n")

        report_text, report_csv = stats_report(out_dir / "dataset.jsonl")
        (out_dir / "feature_report.txt").write_text(report_text)
        (out_dir / "feature_report.csv").write_text(report_csv)
        _mark_done(ckpt_dir, "final")
        return manifest
    finally:
        repo.close()


def _p_target(cfg: RunConfig):
    if not cfg.p_target:
        return None
    return {OperatorId[name]: weight for name, weight in cfg.p_target.items()}


def _dedup_pool(pool, cfg: RunConfig):
    embedder = build_embedder(cfg)
    kept_all, removals = [], []
    by_schema: dict[str, list[QueryInstance]] = {}
    for inst in pool:
        by_schema.setdefault(inst.schema_id, []).append(inst)
    for schema_id in sorted(by_schema):
        group = sorted(by_schema[schema_id],
                       key=lambda i: (stage_rank(i.stage), i.id))
        vectors = embed_questions(
            [i.question for i in group], embedder, [i.id for i in group])
        kept, removed = dedup_schema_group(group, vectors, cfg.tau)
        kept_all.extend(kept)
        removals.extend(removed)
    return kept_all, removals


def _run_cot(pool, cfg: RunConfig, repo: SchemaRepo, gateway: LlmGateway):
    records: list[CotRecord] = []
    discards: list[CotDiscard] = []
    deferrals: list[CotDeferral] = []
    teacher_tag = "live" if "teach" in gateway.backends else "mock"
    gold_cache: dict[str, object] = {}
    for inst in pool:
        conn = repo.connection(inst.schema_id)
        schema = repo.schema(inst.schema_id)
        if inst.id not in gold_cache:
            gold_cache[inst.id] = collect_result(conn, inst.sql, cfg.limits)
        outcome = synthesize_cot(
            inst, conn, gateway, schema, n=cfg.cot_n, teacher_tag=teacher_tag,
            limits=cfg.limits, seed=derive_seed(cfg.global_seed, inst.id, "cot"),
            gold_result=gold_cache[inst.id],
        )
        if isinstance(outcome, CotRecord):
            records.append(outcome)
        elif isinstance(outcome, CotDiscard):
            discards.append(outcome)
        else:
            deferrals.append(outcome)
    return records, discards, deferrals


def _build_manifest(cfg, seeds, eqe, evolved, dataset, quarantined, rejections,
                    removals, cot_records, discards, deferrals, state) -> dict:
    stage_counts: dict[str, int] = {}
    for inst in dataset:
        stage_counts[inst.stage] = stage_counts.get(inst.stage, 0) + 1
    histogram = {op.name: 0 for op in OperatorId}
    for inst in evolved:
        histogram[inst.operator_applied.name] += 1
    rejection_counts: dict[str, int] = {}
    for item in rejections:
        rejection_counts[item["stage"]] = rejection_counts.get(item["stage"], 0) + 1

    feature_report = {}
    by_stage: dict[str, list[FeatureVector]] = {}
    for inst in dataset:
        if inst.features:
            by_stage.setdefault(inst.stage, []).append(inst.features)
    for stage in sorted(by_stage, key=stage_rank):
        feature_report[stage] = aggregate_features(by_stage[stage]).as_dict()

    return {
        "config": cfg.echo(),
        "global_seed": cfg.global_seed,
        "counts": {
            "seeds": len(seeds),
            "eqe": len(eqe),
            "evolved": len(evolved),
            "final": len(dataset),
        },
        "stages": stage_counts,
        "operator_histogram": histogram,
        "operator_acceptances": {op.name: state.counts[op] for op in OperatorId},
        "rejections": rejection_counts,
        "quarantined_seeds": len(quarantined),
        "cot": {
            "kept": len(cot_records),
            "discarded": len(discards),
            "deferred": len(deferrals),
        },
        "dedup": {
            "removed": len(removals),
            # tau calibrates differently on the lexical fallback
            "embedding_source": "external-embedder" if cfg.embedder else "lexical-fallback",
        },
        "feature_report": feature_report,
    }


def _write_side_files(out_dir: Path, removals, rejections, quarantined) -> None:
    with open(out_dir / "dedup_removals.jsonl", "w", encoding="utf-8") as handle:
        for record in removals:
            handle.write(json.dumps({
                "removed_id": record.removed_id,
                "kept_id": record.kept_id,
                "similarity": record.similarity,
            }, sort_keys=True) + "\n")
    with open(out_dir / "rejections.jsonl", "w", encoding="utf-8") as handle:
        for item in quarantined:
            handle.write(json.dumps({"stage": "ingest", **item}, sort_keys=True) + "\n")
        for item in rejections:
            handle.write(json.dumps(item, sort_keys=True) + "\n")


def _mark_done(ckpt_dir: Path, stage: str) -> None:
    path = ckpt_dir / "done.json"
    done = _load_done(ckpt_dir)
    done[stage] = True
    path.write_text(json.dumps(done, sort_keys=True, indent=2))


def _load_done(ckpt_dir: Path) -> dict:
    path = ckpt_dir / "done.json"
    if path.is_file():
        return json.loads(path.read_text())
    return {}


# ---------------------------------------------------------------------------
# Reporting and verification
# ---------------------------------------------------------------------------

def stats_report(dataset_path) -> tuple[str, str]:
    """Per-stage feature means plus operator and status summaries."""
    try:
        instances = read_jsonl(dataset_path)
    except OSError as exc:
        raise IOError(f"cannot read dataset {dataset_path}: {exc}")

    by_stage: dict[str, list[FeatureVector]] = {}
    histogram: dict[str, int] = {}
    status_counts: dict[str, int] = {}
    for inst in instances:
        features = inst.features or extract_features(parse_sql(inst.sql))
        by_stage.setdefault(inst.stage, []).append(features)
        if inst.operator_applied:
            histogram[inst.operator_applied.name] = (
                histogram.get(inst.operator_applied.name, 0) + 1
            )
        status_counts[inst.status] = status_counts.get(inst.status, 0) + 1

    headers = [label for _, label in FEATURE_COLUMNS]
    rows = []
    for stage in sorted(by_stage, key=stage_rank):
        means = aggregate_features(by_stage[stage])
        rows.append([stage] + [f"{getattr(means, name):.2f}" for name, _ in FEATURE_COLUMNS])

    widths = [max(len(r[i]) for r in rows + [["Stage"] + headers])
              for i in range(len(headers) + 1)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(["Stage"] + headers, widths))]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    lines.append("")
    lines.append("Instances per operator: " + (
        ", ".join(f"{k}={v}" for k, v in sorted(histogram.items())) or "none"))
    lines.append("Status counts: " + ", ".join(
        f"{k}={v}" for k, v in sorted(status_counts.items())))
    manifest_path = Path(dataset_path).parent / "manifest.json"
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text())
        dedup_info = manifest.get("dedup", {})
        lines.append(
            f"Dedup removed: {dedup_info.get('removed', 0)} "
            f"(embeddings: {dedup_info.get('embedding_source', 'unknown')})"
        )
        rejections = manifest.get("rejections", {})
        lines.append("Rejections per stage: " + (
            ", ".join(f"{k}={v}" for k, v in sorted(rejections.items())) or "none"))
    text = "\n".join(lines) + "\n"

    csv_lines = ["stage," + ",".join(headers)]
    for row in rows:
        csv_lines.append(",".join(row))
    return text, "\n".join(csv_lines) + "\n"


def verify_dataset(dataset_path, repo: SchemaRepo,
                   limits: ExecutionLimits = ExecutionLimits()) -> dict:
    """Re-execute every row; the final dataset must be 100% non-empty."""
    instances = read_jsonl(dataset_path)
    failures = []
    for inst in instances:
        conn = repo.connection(inst.schema_id)
        feedback = execute_sql(conn, inst.sql, limits)
        if not is_acceptable(feedback):
            failures.append({"id": inst.id, "reason": feedback.error or "empty result"})
    return {"total": len(instances), "failures": failures}
