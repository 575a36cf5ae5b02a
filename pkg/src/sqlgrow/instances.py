"""The instance record that flows through every pipeline stage."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import StructuralError
from .features import FeatureVector
from .operators import OperatorId

STAGE_SEED = "seed"
STAGE_EQE = "EQE"

# status lifecycle; transitions may only move rightward
_STATUS_ORDER = ("active", "rejected", "cot-kept", "cot-discarded", "dedup-removed")


def oge_stage(round_no: int) -> str:
    return f"OGE-{round_no}"


def stage_rank(stage: str) -> int:
    """Lineage ordering: seeds first, then expansion, then rounds."""
    if stage == STAGE_SEED:
        return 0
    if stage == STAGE_EQE:
        return 1
    if stage.startswith("OGE-"):
        try:
            return 1 + int(stage.split("-", 1)[1])
        except ValueError:
            pass
    return 99


@dataclass
class QueryInstance:
    id: str
    schema_id: str
    question: str
    evidence: str
    sql: str
    stage: str
    parent_id: str | None = None
    operator_applied: OperatorId | None = None
    features: FeatureVector | None = None
    status: str = "active"
    cot: str | None = None

    def __post_init__(self):
        if self.stage == STAGE_SEED and self.parent_id is not None:
            raise StructuralError("seed instances cannot have a parent")
        if self.stage.startswith("OGE-") and self.operator_applied is None:
            raise StructuralError("evolution instances must record their operator")
        if not self.stage.startswith("OGE-") and self.operator_applied is not None:
            raise StructuralError("operator_applied is only valid for OGE stages")

    def with_status(self, status: str) -> "QueryInstance":
        if _STATUS_ORDER.index(status) < _STATUS_ORDER.index(self.status):
            raise StructuralError(
                f"status cannot move from {self.status!r} back to {status!r}"
            )
        return replace(self, status=status)

    def to_dict(self) -> dict:
        record = {
            "id": self.id,
            "schema_id": self.schema_id,
            "question": self.question,
            "evidence": self.evidence,
            "sql": self.sql,
            "stage": self.stage,
            "parent_id": self.parent_id,
            "operator_applied": self.operator_applied.name if self.operator_applied else None,
            "features": self.features.as_dict() if self.features else None,
            "status": self.status,
        }
        if self.cot is not None:
            record["cot"] = self.cot
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "QueryInstance":
        features = record.get("features")
        operator = record.get("operator_applied")
        return cls(
            id=record["id"],
            schema_id=record["schema_id"],
            question=record["question"],
            evidence=record.get("evidence", ""),
            sql=record["sql"],
            stage=record["stage"],
            parent_id=record.get("parent_id"),
            operator_applied=OperatorId[operator] if operator else None,
            features=FeatureVector(**features) if features else None,
            status=record.get("status", "active"),
            cot=record.get("cot"),
        )


def write_jsonl(instances, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for inst in instances:
            handle.write(json.dumps(inst.to_dict(), sort_keys=True, ensure_ascii=False))
            handle.write("\n")


def read_jsonl(path) -> list[QueryInstance]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                out.append(QueryInstance.from_dict(json.loads(line)))
    return out
