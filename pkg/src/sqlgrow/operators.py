"""The six atomic mutation operators.

Each operator is a deterministic, schema-aware tree rewrite:

  FUNC   wrap a column leaf in a function
  OP     embed a simple comparison into a richer operator (CASE WHEN,
         BETWEEN, IN, NOT IN, LIKE)
  LOGIC  widen a WHERE / HAVING / ORDER BY clause with a new predicate
         or sort key
  JOIN   append an FK-reachable table to a FROM clause
  NEST   replace a compared literal with a scalar aggregate subquery
  SET    combine the query with a perturbed copy under a set operator

Planning is seeded and grounded: literals come from the live database
when a connection is available, join conditions come from the FK graph,
and every plan records enough of the original tree that applying it to a
different tree fails loudly.
"""

from __future__ import annotations

import enum
import random
import sqlite3
from dataclasses import dataclass

from . import tree as t
from .errors import InfeasibleOperatorError, StructuralError
from .resolve import resolve_references
from .schema import DatabaseSchema, fk_join_graph

DEFAULT_SITE_SATURATION = 3


class OperatorId(enum.Enum):
    """Fixed enumeration; ties in utility break by this order."""

    FUNC = 0
    OP = 1
    LOGIC = 2
    JOIN = 3
    NEST = 4
    SET = 5


OPERATOR_INSTRUCTIONS = {
    OperatorId.FUNC: (
        "Integrate SQL functions to process data within the query. You can "
        "use aggregate functions, date functions, mathematical functions, "
        "or window functions."
    ),
    OperatorId.OP: (
        "Use a wider variety of SQL operators in the query. For example, "
        "use BETWEEN for range comparisons, IN or NOT IN to filter against "
        "a set of values, or LIKE for pattern matching. You can also "
        "introduce conditional logic with a CASE WHEN expression in the "
        "SELECT or ORDER BY clause."
    ),
    OperatorId.LOGIC: (
        "Increase the logical complexity within existing SQL clauses. For "
        "example, combine multiple conditions in the WHERE clause using "
        "AND/OR/NOT; if the original SQL has a GROUP BY, add a HAVING "
        "clause to filter the aggregated results; or sort by multiple "
        "columns in the ORDER BY clause."
    ),
    OperatorId.JOIN: (
        "Increase the number of tables being joined or change the join "
        "type (e.g., switching between INNER JOIN and LEFT JOIN) to "
        "introduce new data relationships."
    ),
    OperatorId.NEST: (
        "Make the query structure more complex by introducing nested "
        "queries, correlated subqueries, or Common Table Expressions (CTEs)."
    ),
    OperatorId.SET: (
        "Use set operators (UNION, INTERSECT, EXCEPT) to combine or "
        "compare the result sets of two or more queries. Alternatively, "
        "use an EXISTS or NOT EXISTS subquery to check for the existence "
        "of records that satisfy specific conditions."
    ),
}


def operator_instruction(op: OperatorId) -> str:
    return OPERATOR_INSTRUCTIONS[op]


@dataclass(frozen=True)
class FeasibilityReport:
    operator: OperatorId
    score: float
    eligible_sites: tuple[t.Path, ...]
    justification: str


@dataclass(frozen=True)
class MutationPlan:
    operator: OperatorId
    target_path: t.Path
    payload: dict


# ---------------------------------------------------------------------------
# Value sampling
# ---------------------------------------------------------------------------

_NUMERIC_AFFINITIES = ("integer", "real", "numeric")


class ValueSampler:
    """Deterministic literal pools drawn from a live database."""

    def __init__(self, conn: sqlite3.Connection | None, pool_size: int = 20):
        self.conn = conn
        self.pool_size = pool_size
        self._cache: dict[tuple[str, str], list] = {}

    def pool(self, table: str, column_name: str) -> list:
        key = (table.lower(), column_name.lower())
        if key in self._cache:
            return self._cache[key]
        values: list = []
        if self.conn is not None:
            try:
                cur = self.conn.execute(
                    f'SELECT DISTINCT "{table}"."{column_name}" FROM "{table}" '
                    f'WHERE "{table}"."{column_name}" IS NOT NULL '
                    f'ORDER BY 1 LIMIT {self.pool_size}'
                )
                values = [row[0] for row in cur.fetchall()]
            except sqlite3.Error:
                values = []
        self._cache[key] = values
        return values

    def absent_value(self, table: str, column_name: str, affinity: str):
        """A value not present in the column, best effort."""
        if self.conn is not None:
            try:
                if affinity in _NUMERIC_AFFINITIES:
                    row = self.conn.execute(
                        f'SELECT MAX("{column_name}") + 1 FROM "{table}"'
                    ).fetchone()
                    if row and row[0] is not None:
                        return row[0]
                else:
                    row = self.conn.execute(
                        f'SELECT MAX("{column_name}") || \'~\' FROM "{table}"'
                    ).fetchone()
                    if row and row[0] is not None:
                        return row[0]
            except sqlite3.Error:
                pass
        return -999999 if affinity in _NUMERIC_AFFINITIES else "__absent__"


def _value_literal(value) -> t.Node:
    if isinstance(value, bool):
        return t.literal("1" if value else "0")
    if isinstance(value, (int, float)):
        return t.number(value)
    if isinstance(value, bytes):
        return t.literal("x'" + value.hex() + "'")
    return t.string(str(value))


# ---------------------------------------------------------------------------
# Site contexts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Ctx:
    clause: str | None
    select_path: t.Path
    depth: int
    grouped: bool
    in_aggregate: bool = False
    in_window: bool = False
    in_compound: bool = False


class _Annotator:
    """Assigns each node the context the planners reason about."""

    def __init__(self):
        self.ctx: dict[t.Path, _Ctx] = {}
        self.max_depth = 1
        self.cores: list[tuple[t.Path, bool]] = []  # (path, in_compound)

    def run(self, ast: t.Node) -> "_Annotator":
        self._query(ast, (), 1, False)
        return self

    def _query(self, node: t.Node, path: t.Path, depth: int, in_compound: bool):
        if node.kind == t.SETOP:
            for i in (0, 1):
                self._query(node.children[i], (*path, i), depth, True)
            for i, extra in enumerate(node.children[2:], start=2):
                base = _Ctx("setop_trailing", path, depth, False, in_compound=True)
                for j, child in enumerate(extra.children):
                    self._expr(child, (*path, i, j), base)
            return
        if node.kind != t.SELECT:
            raise StructuralError(f"not a query node: {node.kind}")
        self.max_depth = max(self.max_depth, depth)
        self.cores.append((path, in_compound))
        grouped = t.get_clause(node, "group_by") is not None
        for ci, clause_node in enumerate(node.children):
            kind = clause_node.value[0]
            base = _Ctx(kind, path, depth, grouped, in_compound=in_compound)
            for j, child in enumerate(clause_node.children):
                cpath = (*path, ci, j)
                if kind == "with":
                    # cte -> subquery -> query
                    self._query(child.children[0].children[0], (*cpath, 0, 0),
                                depth + 1, False)
                elif kind == "from":
                    self._source(child, cpath, base)
                else:
                    self._expr(child, cpath, base)

    def _source(self, node: t.Node, path: t.Path, base: _Ctx):
        if node.kind == t.TABLE:
            self.ctx[path] = base
            return
        if node.kind == t.SUBQUERY:
            self._query(node.children[0], (*path, 0), base.depth + 1, False)
            return
        if node.kind == t.JOIN:
            self._source(node.children[0], (*path, 0), base)
            if len(node.children) > 1:
                on_ctx = _Ctx("on", base.select_path, base.depth, base.grouped,
                              in_compound=base.in_compound)
                self._expr(node.children[1], (*path, 1), on_ctx)
            return
        raise StructuralError(f"invalid FROM child {node.kind}")

    def _expr(self, node: t.Node, path: t.Path, ctx: _Ctx):
        self.ctx[path] = ctx
        if node.kind == t.SUBQUERY:
            self._query(node.children[0], (*path, 0), ctx.depth + 1, False)
            return
        child_ctx = ctx
        if node.kind == t.FUNCTION and node.value[0] in t.AGGREGATE_FUNCTIONS:
            child_ctx = _Ctx(ctx.clause, ctx.select_path, ctx.depth, ctx.grouped,
                             True, ctx.in_window, ctx.in_compound)
        elif node.kind == t.WINDOW:
            child_ctx = _Ctx(ctx.clause, ctx.select_path, ctx.depth, ctx.grouped,
                             ctx.in_aggregate, True, ctx.in_compound)
        for i, child in enumerate(node.children):
            self._expr(child, (*path, i), child_ctx)


# ---------------------------------------------------------------------------
# Applicability
# ---------------------------------------------------------------------------

_COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")

_JUSTIFICATIONS = {
    OperatorId.FUNC: "column leaves available for function wrapping",
    OperatorId.OP: "column-vs-literal comparisons available for operator rewriting",
    OperatorId.LOGIC: "clauses available for predicate or sort-key expansion",
    OperatorId.JOIN: "FK-reachable tables not yet joined",
    OperatorId.NEST: "compared literals replaceable by scalar subqueries",
    OperatorId.SET: "root query always composable with a set operator",
}


def check_applicability(
    ast: t.Node,
    schema: DatabaseSchema,
    op: OperatorId,
    saturation: int = DEFAULT_SITE_SATURATION,
) -> FeasibilityReport:
    """Rule-based feasibility: enumerate rewrite sites and score them."""
    sites = [site for site, _ in _enumerate_sites(ast, schema, op)]
    score = min(1.0, len(sites) / saturation) if sites else 0.0
    note = _JUSTIFICATIONS[op] if sites else "no eligible rewrite site"
    return FeasibilityReport(op, score, tuple(sites), note)


def _enumerate_sites(ast, schema, op):
    """Yields (target_path, site_info) pairs in deterministic order."""
    try:
        report = resolve_references(ast, schema)
    except Exception:
        return []
    relation_at = {b.path: b.relation for b in report.resolved}
    ann = _Annotator().run(ast)

    if op is OperatorId.FUNC:
        return _func_sites(ast, schema, ann, relation_at)
    if op is OperatorId.OP:
        return _op_sites(ast, schema, ann, relation_at)
    if op is OperatorId.LOGIC:
        return _logic_sites(ast, schema, ann, relation_at)
    if op is OperatorId.JOIN:
        return _join_sites(ast, schema, ann)
    if op is OperatorId.NEST:
        return _nest_sites(ast, schema, ann, relation_at)
    if op is OperatorId.SET:
        return [((), {"cores": ann.cores})]
    raise StructuralError(f"unknown operator {op}")


_FUNC_CONTEXTS = ("select", "where", "having", "group_by", "order_by")

_SCALARS_BY_AFFINITY = {
    "integer": ("round", "abs"),
    "real": ("round", "abs"),
    "numeric": ("round", "abs"),
    "text": ("length", "upper", "lower"),
    "blob": ("length",),
}
_AGGREGATES_BY_AFFINITY = {
    "integer": ("avg", "sum", "max", "min"),
    "real": ("avg", "sum", "max", "min"),
    "numeric": ("avg", "sum", "max", "min"),
    "text": ("count", "max", "min"),
    "blob": ("count",),
}


def _column_affinity(schema, relation, name):
    tab = schema.table(relation) if relation else None
    col = tab.column(name) if tab else None
    return col.affinity if col else None


def _func_candidates(schema, relation, name, ctx) -> tuple[str, ...]:
    affinity = _column_affinity(schema, relation, name)
    if affinity is None:
        return ()
    if affinity == "text" and schema.is_date_like(relation, name):
        scalars: tuple[str, ...] = ("date",)
    else:
        scalars = _SCALARS_BY_AFFINITY[affinity]
    aggregate_ok = (
        not ctx.in_aggregate
        and not ctx.in_window
        and (
            ctx.clause == "select"
            or ctx.clause == "having"
            or (ctx.clause == "order_by" and ctx.grouped)
        )
    )
    if aggregate_ok:
        return scalars + _AGGREGATES_BY_AFFINITY[affinity]
    return scalars


def _func_sites(ast, schema, ann, relation_at):
    sites = []
    for path, node in t.walk(ast):
        if node.kind != t.COLUMN:
            continue
        ctx = ann.ctx.get(path)
        if ctx is None or ctx.clause not in _FUNC_CONTEXTS:
            continue
        # wrapping a bare select item of a nested core would rename the
        # output column that enclosing queries may reference by name
        if (
            ctx.clause == "select"
            and ctx.depth > 1
            and len(path) == len(ctx.select_path) + 2
        ):
            continue
        relation = relation_at.get(path)
        if relation in (None, "<select-alias>"):
            continue
        names = _func_candidates(schema, relation, node.value[1], ctx)
        if names:
            sites.append((path, {"node": node, "candidates": names}))
    sites.sort(key=lambda s: s[0])
    return sites


_OMEGA_BY_SHAPE = {
    # (comparison symbol class, literal class) -> candidate operators
    ("=", "text"): ("like", "in", "case"),
    ("=", "number"): ("between", "in", "case"),
    ("!=", "text"): ("not_in", "case"),
    ("!=", "number"): ("not_in", "case"),
    ("<", "number"): ("between", "case"),
    ("<", "text"): ("case",),
}


def _literal_class(node: t.Node) -> str | None:
    lex = node.value[0]
    if lex and (lex[0].isdigit() or (lex[0] in "-." and len(lex) > 1)):
        return "number"
    if lex.startswith("'"):
        return "text"
    return None


def _op_sites(ast, schema, ann, relation_at):
    sites = []
    for path, node in t.walk(ast):
        if node.kind != t.OPERATOR or node.value[0] not in _COMPARISONS:
            continue
        ctx = ann.ctx.get(path)
        if ctx is None or ctx.clause not in ("where", "having"):
            continue
        if len(node.children) != 2:
            continue
        left, right = node.children
        if left.kind != t.COLUMN or right.kind != t.LITERAL:
            continue
        lit_class = _literal_class(right)
        if lit_class is None:
            continue
        relation = relation_at.get((*path, 0))
        if relation in (None, "<select-alias>"):
            continue
        affinity = _column_affinity(schema, relation, left.value[1])
        if affinity is None:
            continue
        sym = node.value[0]
        sym_class = "=" if sym == "=" else "!=" if sym == "!=" else "<"
        candidates = _OMEGA_BY_SHAPE.get((sym_class, lit_class), ())
        if affinity == "text" and "between" in candidates:
            candidates = tuple(c for c in candidates if c != "between")
        if candidates:
            sites.append(
                (path, {
                    "node": node, "relation": relation, "affinity": affinity,
                    "literal_class": lit_class, "candidates": candidates,
                })
            )
    sites.sort(key=lambda s: s[0])
    return sites


def _scope_columns(ast, core_path, schema):
    """In-scope (label, table, column, affinity) tuples for a select core."""
    core = t.node_at(ast, core_path)
    found = t.get_clause(core, "from")
    if not found:
        return []
    out = []
    for child in found[1].children:
        source = child.children[0] if child.kind == t.JOIN else child
        if source.kind != t.TABLE:
            continue
        name, alias = source.value
        tab = schema.table(name)
        if tab is None:
            continue
        label = alias or tab.name
        for col in tab.columns:
            out.append((label, tab.name, col.name, col.affinity))
    return out


def _logic_sites(ast, schema, ann, relation_at):
    sites = []
    for core_path, in_compound in ann.cores:
        core = t.node_at(ast, core_path)
        columns = _scope_columns(ast, core_path, schema)
        where = t.get_clause(core, "where")
        having = t.get_clause(core, "having")
        group_by = t.get_clause(core, "group_by")
        order_by = t.get_clause(core, "order_by")
        if where:
            if columns:
                sites.append(((*core_path, where[0]),
                              {"clause": "where", "mode": "extend", "core": core_path}))
        elif columns:
            sites.append((core_path,
                          {"clause": "where", "mode": "create", "core": core_path}))
        if having:
            sites.append(((*core_path, having[0]),
                          {"clause": "having", "mode": "extend", "core": core_path}))
        elif group_by:
            sites.append((core_path,
                          {"clause": "having", "mode": "create", "core": core_path}))
        if not in_compound:
            if order_by:
                if _sort_candidates(core, columns, schema):
                    sites.append(((*core_path, order_by[0]),
                                  {"clause": "order_by", "mode": "extend",
                                   "core": core_path}))
            elif columns:
                sites.append((core_path,
                              {"clause": "order_by", "mode": "create",
                               "core": core_path}))
    return sites


def _sort_candidates(core, columns, schema):
    """Columns not already used as sort keys."""
    found = t.get_clause(core, "order_by")
    used = set()
    if found:
        for key in found[1].children:
            used.add(render_sql_fragment_text(key.children[0]))
    grouped = t.get_clause(core, "group_by") is not None
    group_keys = set()
    if grouped:
        for key in t.get_clause(core, "group_by")[1].children:
            group_keys.add(render_sql_fragment_text(key))
    out = []
    for label, table_name, col, affinity in columns:
        node = t.column(label, col)
        text = render_sql_fragment_text(node)
        if text in used:
            continue
        # in a grouped query only group keys are safe bare sort columns
        if grouped and text not in group_keys:
            continue
        out.append((label, table_name, col, affinity))
    if grouped:
        # aggregates are always available sort keys in a grouped query
        out.append(("", "", "*count*", "integer"))
    return out


def render_sql_fragment_text(node: t.Node) -> str:
    from .render import _expr

    return _expr(node, 0)


def _join_sites(ast, schema, ann):
    graph = fk_join_graph(schema)
    sites = []
    for core_path, _ in ann.cores:
        core = t.node_at(ast, core_path)
        found = t.get_clause(core, "from")
        if not found:
            continue
        from_idx, from_clause = found
        present: dict[str, str] = {}  # real table name -> label
        labels = set()
        for child in from_clause.children:
            source = child.children[0] if child.kind == t.JOIN else child
            if source.kind == t.TABLE:
                name, alias = source.value
                tab = schema.table(name)
                if tab is not None:
                    present.setdefault(tab.name.lower(), alias or tab.name)
                labels.add((alias or name).lower())
            elif source.kind == t.SUBQUERY and source.value[0]:
                labels.add(source.value[0].lower())
        # a new table whose columns collide with unqualified references
        # anywhere under this core would make them ambiguous
        bare_names = {
            n.value[1].lower()
            for _, n in t.walk(core)
            if n.kind == t.COLUMN and not n.value[0]
        }
        candidates = []
        for real_name in sorted(present):
            for edge in graph.get(schema.table(real_name).name, ()):
                if edge.table_b.lower() in present:
                    continue
                new_tab = schema.table(edge.table_b)
                new_cols = {c.lower() for c in new_tab.column_names()}
                if new_cols & bare_names:
                    continue
                candidates.append((present[real_name], edge))
        if candidates:
            sites.append(((*core_path, from_idx),
                          {"candidates": candidates, "labels": labels,
                           "core": core_path}))
    return sites


def _nest_sites(ast, schema, ann, relation_at):
    sites = []
    for path, node in t.walk(ast):
        if node.kind != t.OPERATOR or node.value[0] not in _COMPARISONS:
            continue
        ctx = ann.ctx.get(path)
        if ctx is None or ctx.clause not in ("where", "having"):
            continue
        if ctx.depth != ann.max_depth:
            continue  # keep the rewrite on the deepest core so depth grows
        if len(node.children) != 2:
            continue
        left, right = node.children
        if left.kind != t.COLUMN or right.kind != t.LITERAL:
            continue
        if _literal_class(right) is None:
            continue
        relation = relation_at.get((*path, 0))
        if relation in (None, "<select-alias>"):
            continue
        affinity = _column_affinity(schema, relation, left.value[1])
        if affinity is None:
            continue
        lit_class = _literal_class(right)
        if lit_class == "number" and affinity not in _NUMERIC_AFFINITIES:
            continue
        if lit_class == "text" and affinity != "text":
            continue
        sites.append(((*path, 1), {
            "comparison": node.value[0], "column": left,
            "relation": relation, "literal": right, "affinity": affinity,
        }))
    sites.sort(key=lambda s: s[0])
    return sites


def _nest_source_candidates(schema, relation, column_name, affinity):
    """(table, column) pairs the scalar subquery may aggregate over.

    The compared column's own table comes first (and is the safe default);
    FK neighbours contribute any column of the matching affinity class.
    """
    numeric = affinity in _NUMERIC_AFFINITIES
    candidates = [(relation, column_name)]
    graph = fk_join_graph(schema)
    tab = schema.table(relation)
    if tab is None:
        return candidates
    for edge in graph.get(tab.name, ()):
        neighbour = schema.table(edge.table_b)
        for col in neighbour.columns:
            matches = (
                col.affinity in _NUMERIC_AFFINITIES if numeric
                else col.affinity == affinity
            )
            if matches:
                candidates.append((neighbour.name, col.name))
    return candidates


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------

def plan_mutation(
    ast: t.Node,
    schema: DatabaseSchema,
    op: OperatorId,
    seed: int,
    db: sqlite3.Connection | None = None,
) -> MutationPlan:
    """Pick a rewrite site uniformly (seeded) and fill a grounded payload."""
    sites = list(_enumerate_sites(ast, schema, op))
    if not sites:
        raise InfeasibleOperatorError(f"{op.name} has no eligible site")
    rng = random.Random(seed)
    path, info = sites[rng.randrange(len(sites))]
    sampler = ValueSampler(db)

    if op is OperatorId.FUNC:
        return _plan_func(path, info, rng)
    if op is OperatorId.OP:
        return _plan_op(path, info, rng, sampler)
    if op is OperatorId.LOGIC:
        return _plan_logic(ast, schema, path, info, rng, sampler)
    if op is OperatorId.JOIN:
        return _plan_join(path, info, rng)
    if op is OperatorId.NEST:
        return _plan_nest(schema, path, info, rng)
    return _plan_set(ast, schema, rng, sampler)


def _plan_func(path, info, rng):
    name = info["candidates"][rng.randrange(len(info["candidates"]))]
    col = info["node"]
    label = f"{col.value[0]}.{col.value[1]}" if col.value[0] else col.value[1]
    return MutationPlan(OperatorId.FUNC, path, {
        "function": name,
        "original": col,
        "summary": f"apply {name.upper()} to {label}",
    })


def _plan_op(path, info, rng, sampler):
    node = info["node"]
    col, lit = node.children
    omega = info["candidates"][rng.randrange(len(info["candidates"]))]
    relation, affinity = info["relation"], info["affinity"]
    col_name = col.value[1]

    if omega == "case":
        replacement = t.Node(t.OPERATOR, ("case",), (
            t.operator("when", [node, t.literal("1")]),
            t.operator("else", [t.literal("0")]),
        ))
    elif omega == "like":
        raw = lit.value[0]
        inner = raw[1:-1].replace("''", "'") if raw.startswith("'") else raw
        pattern = t.operator("||", [
            t.operator("||", [t.string("%"), t.string(inner)]), t.string("%"),
        ])
        replacement = t.operator("like", [col, pattern])
    elif omega in ("in", "not_in"):
        items = [lit]
        if omega == "in":
            extra = _other_value(sampler, relation, col_name, lit)
            if extra is not None:
                items.append(_value_literal(extra))
        else:
            items.append(_value_literal(
                sampler.absent_value(relation, col_name, affinity)))
        replacement = t.operator(omega, [col, *items])
    elif omega == "between":
        lo, hi = _between_bounds(sampler, relation, col_name, lit)
        replacement = t.operator("between", [col, lo, hi])
    else:
        raise StructuralError(f"unknown operator payload {omega!r}")

    word = {"case": "CASE WHEN", "like": "LIKE", "in": "IN",
            "not_in": "NOT IN", "between": "BETWEEN"}[omega]
    return MutationPlan(OperatorId.OP, path, {
        "omega": omega,
        "original": node,
        "replacement": replacement,
        "summary": f"use a {word} condition on {col_name}",
    })


def _other_value(sampler, relation, col_name, lit):
    for value in sampler.pool(relation, col_name):
        if _value_literal(value) != lit:
            return value
    return None


def _between_bounds(sampler, relation, col_name, lit):
    try:
        lit_num = float(lit.value[0])
    except ValueError:
        return lit, lit
    pool = [v for v in sampler.pool(relation, col_name)
            if isinstance(v, (int, float))]
    if not pool:
        return lit, lit
    other = max(pool)
    if other < lit_num:
        other = min(pool)
    lo_num, hi_num = min(lit_num, other), max(lit_num, other)
    lo = lit if lo_num == lit_num else _value_literal(other)
    hi = lit if hi_num == lit_num else _value_literal(other)
    return lo, hi


def _plan_logic(ast, schema, path, info, rng, sampler):
    clause_kind, mode = info["clause"], info["mode"]
    core = t.node_at(ast, info["core"])
    columns = _scope_columns(ast, info["core"], schema)

    if clause_kind in ("where", "having"):
        connector = ("and", "or")[rng.randrange(2)] if mode == "extend" else "and"
        if clause_kind == "having":
            expr = t.operator(">=", [t.func("count", [t.star()]), t.literal("1")])
            summary = "keep groups having COUNT(*) >= 1"
        else:
            expr, summary = _sampled_predicate(columns, rng, sampler)
    else:
        connector = ""
        expr, summary = _sort_expr(core, columns, schema, rng)

    return MutationPlan(OperatorId.LOGIC, path, {
        "clause": clause_kind,
        "mode": mode,
        "connector": connector,
        "expr": expr,
        "summary": summary,
    })


def _sampled_predicate(columns, rng, sampler):
    pick = columns[rng.randrange(len(columns))]
    label, table_name, col_name, affinity = pick
    col = t.column(label, col_name)
    pool = sampler.pool(table_name, col_name)
    if not pool:
        return t.operator("is_not_null", [col]), f"require {label}.{col_name} to be present"
    value = pool[rng.randrange(len(pool))]
    if affinity in _NUMERIC_AFFINITIES and isinstance(value, (int, float)):
        symbol = ("=", ">=", "<=")[rng.randrange(3)]
    else:
        symbol = "="
    pred = t.operator(symbol, [col, _value_literal(value)])
    return pred, f"filter where {render_sql_fragment_text(pred)}"


def _sort_expr(core, columns, schema, rng):
    candidates = _sort_candidates(core, columns, schema)
    if not candidates:
        raise InfeasibleOperatorError("no sort key candidate")
    label, table_name, col_name, _ = candidates[rng.randrange(len(candidates))]
    if col_name == "*count*":
        expr = t.func("count", [t.star()])
        text = "COUNT(*)"
    else:
        expr = t.column(label, col_name)
        text = render_sql_fragment_text(expr)
    direction = ("asc", "desc")[rng.randrange(2)]
    return t.sort_key(expr, direction), f"sort also by {text} {direction.upper()}"


def _plan_join(path, info, rng):
    candidates = info["candidates"]
    label, edge = candidates[rng.randrange(len(candidates))]
    kind = ("inner", "left")[rng.randrange(2)]
    alias = _fresh_alias(edge.table_b, info["labels"])
    parts = [
        t.operator("=", [t.column(label, ca), t.column(alias, cb)])
        for ca, cb in zip(edge.columns_a, edge.columns_b)
    ]
    condition = parts[0] if len(parts) == 1 else t.logical("and", parts)
    return MutationPlan(OperatorId.JOIN, path, {
        "table": edge.table_b,
        "alias": alias,
        "kind": kind,
        "condition": condition,
        "summary": f"bring in {edge.table_b} via {render_sql_fragment_text(condition)}",
    })


def _fresh_alias(table_name: str, taken: set[str]) -> str:
    initials = "".join(w[0] for w in table_name.split("_") if w)
    candidates = [initials]
    for i in range(2, len(table_name) + 1):
        candidates.append(table_name[:i])
    for cand in candidates:
        if cand and cand.lower() not in taken:
            return cand
    i = 2
    while f"t{i}" in taken:
        i += 1
    return f"t{i}"


_AGG_FOR_COMPARISON = {
    ">": "min", ">=": "min", "<": "max", "<=": "max", "=": "max", "!=": "min",
}


def _plan_nest(schema, path, info, rng):
    agg = _AGG_FOR_COMPARISON[info["comparison"]]
    col = info["column"]
    candidates = _nest_source_candidates(
        schema, info["relation"], col.value[1], info["affinity"])
    # the same-column aggregate is the safe default; bias toward it
    weighted = [candidates[0], candidates[0], *candidates[1:]]
    table_name, column_name = weighted[rng.randrange(len(weighted))]
    body = t.select_core([
        t.clause("select", [t.func(agg, [t.column("", column_name)])]),
        t.clause("from", [t.table(table_name)]),
        t.clause("limit", [t.literal("1")]),
    ])
    return MutationPlan(OperatorId.NEST, path, {
        "original": info["literal"],
        "subquery": t.subquery(body),
        "summary": (
            f"compare {col.value[1]} against {agg.upper()}({table_name}.{column_name})"
        ),
    })


def _plan_set(ast, schema, rng, sampler):
    symbol = ("union", "intersect", "except")[rng.randrange(3)]
    second, perturb_note = _perturbed_copy(ast, schema, symbol, rng, sampler)
    return MutationPlan(OperatorId.SET, (), {
        "symbol": symbol,
        "second": second,
        "summary": f"{symbol.upper().replace('_', ' ')} with a variant that {perturb_note}",
    })


def _literal_comparison_paths(ast):
    out = []
    for path, node in t.walk(ast):
        if (
            node.kind == t.OPERATOR
            and node.value[0] in _COMPARISONS
            and len(node.children) == 2
            and node.children[0].kind == t.COLUMN
            and node.children[1].kind == t.LITERAL
            and _literal_class(node.children[1]) is not None
        ):
            out.append(path)
    out.sort()
    return out


def _perturbed_copy(ast, schema, symbol, rng, sampler):
    """Second operand for SET, shaped so the composition stays non-empty."""
    report = resolve_references(ast, schema)
    relation_at = {b.path: b.relation for b in report.resolved}
    comparisons = _literal_comparison_paths(ast)

    if symbol == "intersect":
        # relax the copy: drop one predicate so q ∩ copy == q
        for core_path, _ in _Annotator().run(ast).cores:
            core = t.node_at(ast, core_path)
            found = t.get_clause(core, "where")
            if not found:
                continue
            idx, where = found
            preds = t.flat_predicates(where.children[0])
            if len(preds) > 1:
                keep = preds[:-1]
                new_expr = keep[0] if len(keep) == 1 else t.logical("and", keep)
                new_core = t.set_clause(core, t.clause("where", [new_expr]))
            else:
                kept = [c for c in core.children if c.value[0] != "where"]
                new_core = t.select_core(kept)
            return t.replace_at(ast, core_path, new_core), "drops one filter"
        return ast, "repeats the query"

    if comparisons:
        path = comparisons[rng.randrange(len(comparisons))]
        node = t.node_at(ast, path)
        col, lit = node.children
        relation = relation_at.get((*path, 0), "")
        replacement_value = None
        for value in sampler.pool(relation, col.value[1]) if relation else []:
            if _value_literal(value) != lit:
                replacement_value = value
                break
        if replacement_value is None:
            tab = schema.table(relation) if relation else None
            affinity = tab.column(col.value[1]).affinity if tab and tab.column(col.value[1]) else "text"
            replacement_value = sampler.absent_value(relation or "", col.value[1], affinity)
        new_cmp = t.operator(node.value[0], [col, _value_literal(replacement_value)])
        changed = t.replace_at(ast, path, new_cmp)
        note = f"uses {render_sql_fragment_text(_value_literal(replacement_value))} instead"
        return changed, note

    # no predicate to perturb: narrow the copy so EXCEPT keeps everything
    ann = _Annotator().run(ast)
    for core_path, _ in ann.cores:
        columns = _scope_columns(ast, core_path, schema)
        if not columns:
            continue
        label, table_name, col_name, affinity = columns[rng.randrange(len(columns))]
        absent = sampler.absent_value(table_name, col_name, affinity)
        pred = t.operator("=", [t.column(label, col_name), _value_literal(absent)])
        core = t.node_at(ast, core_path)
        new_core = t.set_clause(core, t.clause("where", [pred]))
        return t.replace_at(ast, core_path, new_core), "matches nothing extra"
    return ast, "repeats the query"


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def apply_mutation(ast: t.Node, plan: MutationPlan) -> t.Node:
    """Apply a plan, returning a new tree; the input is never modified."""
    op = plan.operator
    if op is OperatorId.FUNC:
        node = t.node_at(ast, plan.target_path)
        if node != plan.payload["original"]:
            raise StructuralError("plan does not match tree at target path")
        wrapped = t.func(plan.payload["function"], [node])
        return t.replace_at(ast, plan.target_path, wrapped)

    if op is OperatorId.OP:
        node = t.node_at(ast, plan.target_path)
        if node != plan.payload["original"]:
            raise StructuralError("plan does not match tree at target path")
        return t.replace_at(ast, plan.target_path, plan.payload["replacement"])

    if op is OperatorId.LOGIC:
        return _apply_logic(ast, plan)

    if op is OperatorId.JOIN:
        from_clause = t.node_at(ast, plan.target_path)
        if from_clause.kind != t.CLAUSE or from_clause.value[0] != "from":
            raise StructuralError("JOIN plan must target a FROM clause")
        payload = plan.payload
        join_node = t.join(
            payload["kind"],
            t.table(payload["table"], payload["alias"]),
            payload["condition"],
        )
        new_clause = t.Node(from_clause.kind, from_clause.value,
                            (*from_clause.children, join_node))
        return t.replace_at(ast, plan.target_path, new_clause)

    if op is OperatorId.NEST:
        node = t.node_at(ast, plan.target_path)
        if node != plan.payload["original"]:
            raise StructuralError("plan does not match tree at target path")
        return t.replace_at(ast, plan.target_path, plan.payload["subquery"])

    if op is OperatorId.SET:
        left = _compound_operand(ast, right_side=False)
        right = _compound_operand(plan.payload["second"], right_side=True)
        return t.setop(plan.payload["symbol"], left, right)

    raise StructuralError(f"unknown operator {op}")


def _apply_logic(ast: t.Node, plan: MutationPlan) -> t.Node:
    payload = plan.payload
    clause_kind, mode = payload["clause"], payload["mode"]
    target = t.node_at(ast, plan.target_path)

    if mode == "create":
        if target.kind != t.SELECT:
            raise StructuralError("clause creation must target a select core")
        children = [payload["expr"]]
        new_core = t.set_clause(target, t.clause(clause_kind, children))
        return t.replace_at(ast, plan.target_path, new_core)

    if target.kind != t.CLAUSE or target.value[0] != clause_kind:
        raise StructuralError(f"LOGIC plan must target a {clause_kind} clause")
    if clause_kind == "order_by":
        new_clause = t.Node(target.kind, target.value,
                            (*target.children, payload["expr"]))
    else:
        connector = payload["connector"]
        old = target.children[0]
        if old.kind == t.LOGICAL and old.value[0] == connector:
            combined = t.logical(connector, (*old.children, payload["expr"]))
        else:
            combined = t.logical(connector, (old, payload["expr"]))
        new_clause = t.Node(target.kind, target.value, (combined,))
    return t.replace_at(ast, plan.target_path, new_clause)


def _compound_operand(query: t.Node, right_side: bool) -> t.Node:
    """Wrap a query unfit to be a compound operand as a derived table.

    The engine rejects compound operands that carry ORDER BY / LIMIT or a
    WITH prefix (and set operations only chain on the left), and it does
    not accept parenthesized operands, so SELECT * FROM (q) is the only
    faithful rendering.
    """
    needs_wrap = (
        t.has_trailing_clauses(query)
        or _has_with_prefix(query)
        or (right_side and query.kind == t.SETOP)
    )
    if not needs_wrap:
        return query
    return t.select_core([
        t.clause("select", [t.star()]),
        t.clause("from", [t.subquery(query)]),
    ])


def _has_with_prefix(query: t.Node) -> bool:
    core = query
    while core.kind == t.SETOP:
        core = core.children[0]
    return t.get_clause(core, "with") is not None
