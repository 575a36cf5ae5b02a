"""Execution-verified reasoning traces via rejection sampling.

For each instance the teacher proposes n (trace, SQL) candidates; each
candidate executes against the live database and the first one whose
result matches the gold result wins. Instances with no correct candidate
are discarded with every failure reason recorded.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass

from .errors import TransportError
from .harness import ExecutionLimits, collect_result, results_equivalent
from .instances import QueryInstance


@dataclass(frozen=True)
class CotRecord:
    instance_id: str
    trace: str
    verified_sql: str
    attempts_used: int
    teacher_tag: str


@dataclass(frozen=True)
class CotDiscard:
    instance_id: str
    failure_reasons: tuple[str, ...]


@dataclass(frozen=True)
class CotDeferral:
    instance_id: str
    reason: str


def synthesize_cot(
    instance: QueryInstance,
    conn: sqlite3.Connection,
    teacher,
    schema,
    n: int = 4,
    teacher_tag: str = "mock",
    limits: ExecutionLimits = ExecutionLimits(),
    seed: int = 0,
    gold_result=None,
) -> CotRecord | CotDiscard | CotDeferral:
    """Rejection-sample a verified trace for one instance."""
    if gold_result is None:
        gold_result = collect_result(conn, instance.sql, limits)
    if gold_result is None or not gold_result.rows:
        return CotDiscard(instance.id, ("gold SQL no longer returns rows",))

    try:
        candidates = teacher.generate_cot_candidates(
            instance.question,
            instance.evidence,
            schema,
            n,
            gold_sql=instance.sql,
            seed=seed,
        )
    except TransportError as exc:
        return CotDeferral(instance.id, str(exc))
    if not candidates:
        return CotDeferral(instance.id, "teacher produced no candidates")

    failures = []
    for index, candidate in enumerate(candidates, start=1):
        result = collect_result(conn, candidate.predicted_sql, limits)
        if result is None:
            failures.append(f"candidate {index}: execution error")
            continue
        if results_equivalent(result, gold_result):
            return CotRecord(
                instance_id=instance.id,
                trace=candidate.reasoning,
                verified_sql=candidate.predicted_sql,
                attempts_used=index,
                teacher_tag=teacher_tag,
            )
        failures.append(f"candidate {index}: result mismatch")
    return CotDiscard(instance.id, tuple(failures))
