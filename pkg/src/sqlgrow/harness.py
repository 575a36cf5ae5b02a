"""Read-only SQL execution with structured feedback and result comparison.

All execution failures are data, not exceptions: the feedback object
carries either the engine's error message or the shape of the result.
Acceptance means the query ran and returned at least one row.
"""

from __future__ import annotations

import sqlite3
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import SqlgrowError
from .parser import parse_sql
from .resolve import resolve_references
from . import tree as t

DEFAULT_TIMEOUT_MS = 5000
DEFAULT_MAX_ROWS = 1000
DEFAULT_SAMPLE_ROWS = 5

_PROGRESS_OPCODES = 2000


@dataclass(frozen=True)
class ExecutionLimits:
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    max_rows: int = DEFAULT_MAX_ROWS
    sample_rows: int = DEFAULT_SAMPLE_ROWS


@dataclass(frozen=True)
class ExecutionFeedback:
    ok: bool
    error: str = ""
    columns: tuple[str, ...] = ()
    row_count: int = 0
    sample_rows: tuple[tuple[str, ...], ...] = ()
    elapsed_ms: float = 0.0
    truncated: bool = False


@dataclass(frozen=True)
class ResultMultiset:
    rows: tuple[tuple, ...]
    ordered: bool


@dataclass(frozen=True)
class RefinementOutcome:
    accepted: bool
    sql: str
    attempts: int
    feedback: ExecutionFeedback
    reason: str = ""


def open_readonly(db_file) -> sqlite3.Connection:
    path = Path(db_file)
    if not path.is_file():
        raise IOError(f"database file not found: {path}")
    return sqlite3.connect(f"file:{path}?mode=ro", uri=True)


def execute_sql(
    conn: sqlite3.Connection,
    sql: str,
    limits: ExecutionLimits = ExecutionLimits(),
) -> ExecutionFeedback:
    """Run a query read-only; every failure comes back as feedback."""
    deadline = time.monotonic() + limits.timeout_ms / 1000.0

    def guard():
        return 1 if time.monotonic() > deadline else 0

    conn.set_progress_handler(guard, _PROGRESS_OPCODES)
    start = time.monotonic()
    try:
        cur = conn.execute(sql)
        rows = cur.fetchmany(limits.max_rows + 1)
        columns = tuple(d[0] for d in cur.description or ())
    except sqlite3.OperationalError as exc:
        message = str(exc)
        if "interrupted" in message:
            message = "timeout"
        return ExecutionFeedback(ok=False, error=message,
                                 elapsed_ms=_ms_since(start))
    except sqlite3.Error as exc:
        return ExecutionFeedback(ok=False, error=str(exc),
                                 elapsed_ms=_ms_since(start))
    finally:
        conn.set_progress_handler(None, 0)

    truncated = len(rows) > limits.max_rows
    if truncated:
        rows = rows[: limits.max_rows]
    sample = tuple(
        tuple("NULL" if cell is None else str(cell) for cell in row)
        for row in rows[: limits.sample_rows]
    )
    return ExecutionFeedback(
        ok=True,
        columns=columns,
        row_count=len(rows),
        sample_rows=sample,
        elapsed_ms=_ms_since(start),
        truncated=truncated,
    )


def _ms_since(start: float) -> float:
    return (time.monotonic() - start) * 1000.0


def is_acceptable(feedback: ExecutionFeedback) -> bool:
    return feedback.ok and feedback.row_count >= 1


def render_feedback(feedback: ExecutionFeedback) -> str:
    """Compact text form for prompt injection."""
    if not feedback.ok:
        return f"Execution error: {feedback.error}"
    lines = [
        f"Execution succeeded: {feedback.row_count} row(s)"
        + (" (truncated)" if feedback.truncated else ""),
        "Columns: " + ", ".join(feedback.columns),
    ]
    for row in feedback.sample_rows:
        lines.append("Row: " + " | ".join(row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Result comparison
# ---------------------------------------------------------------------------

def normalize_cell(value):
    """Comparable form: reals rounded to 1e-6, numeric text de-zeroed."""
    if value is None:
        return ("null",)
    if isinstance(value, bool):
        return ("num", int(value))
    if isinstance(value, int):
        return ("num", value)
    if isinstance(value, float):
        if value.is_integer():
            return ("num", int(value))
        return ("num", round(value, 6))
    if isinstance(value, bytes):
        return ("bytes", value)
    text = str(value)
    if _looks_numeric(text):
        trimmed = text.rstrip("0").rstrip(".") if "." in text else text
        return ("text", trimmed or "0")
    return ("text", text)


def _looks_numeric(text: str) -> bool:
    body = text[1:] if text[:1] in "+-" else text
    if not body:
        return False
    parts = body.split(".")
    return len(parts) <= 2 and all(p.isdigit() for p in parts if p) and any(
        p for p in parts
    )


def collect_result(
    conn: sqlite3.Connection,
    sql: str,
    limits: ExecutionLimits = ExecutionLimits(),
) -> ResultMultiset | None:
    """Normalized result rows, or None when execution fails."""
    feedback_rows: list[tuple] = []
    deadline = time.monotonic() + limits.timeout_ms / 1000.0
    conn.set_progress_handler(lambda: 1 if time.monotonic() > deadline else 0,
                              _PROGRESS_OPCODES)
    try:
        cur = conn.execute(sql)
        raw = cur.fetchmany(limits.max_rows + 1)
    except sqlite3.Error:
        return None
    finally:
        conn.set_progress_handler(None, 0)
    for row in raw[: limits.max_rows]:
        feedback_rows.append(tuple(normalize_cell(c) for c in row))
    return ResultMultiset(tuple(feedback_rows), ordered=_is_ordered(sql))


def _is_ordered(sql: str) -> bool:
    try:
        ast = parse_sql(sql)
    except SqlgrowError:
        return False
    if ast.kind == t.SETOP:
        return any(c.value[0] == "order_by" for c in ast.children[2:])
    found = t.get_clause(ast, "order_by")
    return found is not None


def results_equivalent(a: ResultMultiset, b: ResultMultiset) -> bool:
    """Sequence comparison when either side is ordered, else multisets."""
    if a.ordered or b.ordered:
        return a.rows == b.rows
    if len(a.rows) != len(b.rows):
        return False
    from collections import Counter

    return Counter(a.rows) == Counter(b.rows)


# ---------------------------------------------------------------------------
# Execution-grounded refinement
# ---------------------------------------------------------------------------

def refine_until_valid(
    question: str,
    draft_sql: str,
    schema,
    conn: sqlite3.Connection,
    refiner,
    max_attempts: int = 3,
    limits: ExecutionLimits = ExecutionLimits(),
) -> RefinementOutcome:
    """Execute, and on failure ask the refiner for a revision, up to a bound.

    Acceptance requires a non-empty result plus a clean parse and
    reference resolution, so everything downstream can rely on the tree.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    sql = draft_sql
    feedback = ExecutionFeedback(ok=False, error="not executed")
    reason = ""
    for attempt in range(1, max_attempts + 1):
        feedback = execute_sql(conn, sql, limits)
        reason = ""
        if is_acceptable(feedback):
            reason = _grounding_problem(sql, schema)
            if not reason:
                return RefinementOutcome(True, sql, attempt, feedback)
            feedback = ExecutionFeedback(ok=False, error=reason)
        elif feedback.ok:
            reason = "empty result"
        else:
            reason = feedback.error
        if attempt == max_attempts:
            break
        sql = refiner(question, sql, schema, feedback)
    return RefinementOutcome(False, sql, max_attempts, feedback, reason)


def _grounding_problem(sql: str, schema) -> str:
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
    return ""
