import hashlib

import pytest
from hypothesis import given, strategies as st

from fixtures import STAGE_SQL_2
from sqlgrow.harness import (
    ExecutionFeedback,
    ExecutionLimits,
    ResultMultiset,
    collect_result,
    execute_sql,
    is_acceptable,
    normalize_cell,
    open_readonly,
    refine_until_valid,
    results_equivalent,
)


def test_constant_query(connections):
    fb = execute_sql(connections["olympics"], "SELECT 1")
    assert fb.ok and fb.row_count == 1


def test_missing_table_error_names_table(connections):
    fb = execute_sql(connections["olympics"], "SELECT * FROM missing_table")
    assert not fb.ok
    assert "missing_table" in fb.error


def test_stage2_returns_rows(connections):
    fb = execute_sql(connections["olympics"], STAGE_SQL_2)
    assert fb.ok and fb.row_count >= 1


def test_timeout_kills_runaway_query(connections):
    runaway = ("WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) "
               "SELECT COUNT(*) FROM c")
    fb = execute_sql(connections["olympics"], runaway,
                     ExecutionLimits(timeout_ms=100))
    assert not fb.ok
    assert fb.error == "timeout"


def test_truncation_flag(connections):
    fb = execute_sql(connections["olympics"],
                     "SELECT gc.id FROM games_competitor gc, games_competitor g2",
                     ExecutionLimits(max_rows=3))
    assert fb.ok and fb.truncated and fb.row_count == 3
    assert len(fb.sample_rows) <= 3


def test_is_acceptable_rules():
    assert not is_acceptable(ExecutionFeedback(ok=True, row_count=0))
    assert not is_acceptable(ExecutionFeedback(ok=False, error="boom"))
    assert is_acceptable(ExecutionFeedback(ok=True, row_count=7))


def test_execute_never_writes(db_dir, connections):
    path = db_dir / "olympics.db"
    before = hashlib.sha256(path.read_bytes()).hexdigest()
    execute_sql(connections["olympics"], "SELECT * FROM person")
    fb = execute_sql(connections["olympics"], "DELETE FROM person")
    assert not fb.ok  # read-only connection refuses writes
    after = hashlib.sha256(path.read_bytes()).hexdigest()
    assert before == after


# -- result comparison --------------------------------------------------------

def rs(rows, ordered=False):
    return ResultMultiset(tuple(tuple(normalize_cell(c) for c in r) for r in rows),
                          ordered)


def test_multiset_ignores_order():
    assert results_equivalent(rs([(1, "x"), (2, "y")]), rs([(2, "y"), (1, "x")]))


def test_ordered_comparison_is_sequence():
    assert not results_equivalent(rs([(1,), (2,)], ordered=True),
                                  rs([(2,), (1,)], ordered=True))


def test_duplicate_multiplicity_matters():
    assert not results_equivalent(rs([(1,), (1,)]), rs([(1,)]))


def test_float_tolerance_and_numeric_text():
    assert normalize_cell(2.0) == normalize_cell(2)
    assert normalize_cell(0.30000000001) == normalize_cell(0.3)
    assert normalize_cell("1.50") == normalize_cell("1.5")
    assert normalize_cell(None) == normalize_cell(None)
    assert normalize_cell("1.5") != normalize_cell(1.5)  # text stays text


def test_redundant_join_same_multiset(connections):
    base = "SELECT p.full_name FROM person p"
    joined = ("SELECT p.full_name FROM person p "
              "LEFT JOIN games_competitor gc ON gc.id = -1")
    a = collect_result(connections["olympics"], base)
    b = collect_result(connections["olympics"], joined)
    assert results_equivalent(a, b)


@given(st.lists(st.tuples(st.integers(-5, 5), st.text(max_size=3)), max_size=6))
def test_results_equivalent_reflexive_symmetric(rows):
    a = rs(rows)
    b = rs(list(reversed(rows)))
    assert results_equivalent(a, a)
    assert results_equivalent(a, b) == results_equivalent(b, a)


# -- refinement loop ----------------------------------------------------------

def test_valid_draft_returned_unchanged(connections, olympics_schema):
    calls = []

    def refiner(q, s, sc, fb):
        calls.append(s)
        return s

    outcome = refine_until_valid(
        "who", "SELECT full_name FROM person", olympics_schema,
        connections["olympics"], refiner)
    assert outcome.accepted and outcome.attempts == 1
    assert outcome.sql == "SELECT full_name FROM person"
    assert calls == []


def test_misspelled_column_fixed_on_second_attempt(connections, olympics_schema):
    def refiner(q, s, sc, fb):
        assert "full_nam" in fb.error
        return s.replace("full_nam", "full_name")

    outcome = refine_until_valid(
        "who", "SELECT full_nam FROM person", olympics_schema,
        connections["olympics"], refiner)
    assert outcome.accepted and outcome.attempts == 2


def test_rejection_after_max_attempts(connections, olympics_schema):
    def hopeless(q, s, sc, fb):
        return s  # never fixes anything

    outcome = refine_until_valid(
        "who", "SELECT full_name FROM person WHERE weight < 0",
        olympics_schema, connections["olympics"], hopeless, max_attempts=3)
    assert not outcome.accepted
    assert outcome.attempts == 3
    assert outcome.reason == "empty result"


def test_accepted_sql_must_resolve(connections, olympics_schema):
    # executes fine (engine treats double-quoted unknowns as strings would
    # fail; use a query that runs but does not resolve: alias misuse)
    def refiner(q, s, sc, fb):
        return "SELECT full_name FROM person"

    outcome = refine_until_valid(
        "who", "SELECT p.full_name FROM person AS q JOIN person AS p ON p.id = q.id WHERE q.missing_col IS NULL OR 1",
        olympics_schema, connections["olympics"], refiner)
    assert outcome.accepted
    assert outcome.sql == "SELECT full_name FROM person"


@given(st.lists(st.tuples(st.integers(-3, 3)), min_size=0, max_size=5))
def test_results_equivalent_transitive_on_unordered(rows):
    a, b, c = rs(rows), rs(list(reversed(rows))), rs(sorted(rows))
    if results_equivalent(a, b) and results_equivalent(b, c):
        assert results_equivalent(a, c)
