"""Column reference resolution against a schema.

Scoping follows the engine: a column is looked up in the innermost FROM
scope first, then in enclosing (correlated) scopes. Unqualified columns
matching more than one relation in the same scope raise an ambiguity
error; references that match nothing are reported, never dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tree as t
from .errors import AmbiguousColumnError, StructuralError
from .schema import DatabaseSchema


@dataclass(frozen=True)
class Binding:
    path: t.Path
    qualifier: str
    name: str
    relation: str  # real table name, derived-table alias, or CTE name


@dataclass
class BindingReport:
    resolved: list[Binding] = field(default_factory=list)
    unresolved: list[Binding] = field(default_factory=list)
    alias_map: dict[str, str] = field(default_factory=dict)

    @property
    def is_clean(self) -> bool:
        return not self.unresolved

    def relation_of(self, path: t.Path) -> str | None:
        for b in self.resolved:
            if b.path == path:
                return b.relation
        return None


@dataclass(frozen=True)
class _Relation:
    label: str            # what qualified refs must use (alias, or table name)
    relation: str         # reported origin
    columns: tuple[str, ...] | None  # None when the table is unknown


def resolve_references(ast: t.Node, schema: DatabaseSchema) -> BindingReport:
    """Bind every column reference in the tree, innermost scope first."""
    report = BindingReport()
    _resolve_query(ast, (), [], {}, schema, report)
    return report


def _resolve_query(node, path, outer_scopes, cte_env, schema, report):
    if node.kind == t.SELECT:
        _resolve_select(node, path, outer_scopes, cte_env, schema, report)
        return
    if node.kind == t.SETOP:
        env = dict(cte_env)
        lead = node.children[0]
        while lead.kind == t.SETOP:
            lead = lead.children[0]
        found = t.get_clause(lead, "with")
        if found:
            for cte_node in found[1].children:
                env[cte_node.value[0]] = None  # filled during left resolution
        for i in (0, 1):
            _resolve_query(node.children[i], (*path, i), outer_scopes, env, schema, report)
        # trailing ORDER BY resolves against the left-most core's scope
        for i, extra in enumerate(node.children[2:], start=2):
            scope = _from_scope(lead, schema, env, report, record_aliases=False)
            for j, child in enumerate(extra.children):
                _resolve_expr(child, (*path, i, j), [scope] + outer_scopes,
                              env, schema, report, alias_env=_select_aliases(lead))
        return
    raise StructuralError(f"cannot resolve non-query root {node.kind}")


def _resolve_select(node, path, outer_scopes, cte_env, schema, report):
    env = dict(cte_env)
    found = t.get_clause(node, "with")
    if found:
        idx, with_clause = found
        for i, cte_node in enumerate(with_clause.children):
            body = cte_node.children[0].children[0]
            _resolve_query(body, (*path, idx, i, 0, 0), [], env, schema, report)
            env[cte_node.value[0]] = tuple(_output_columns(body, schema, env))

    scope = _from_scope(node, schema, env, report, record_aliases=True)
    scopes = [scope] + outer_scopes if scope else outer_scopes
    alias_env = _select_aliases(node)

    for idx, clause_node in enumerate(node.children):
        kind = clause_node.value[0]
        if kind == "with":
            continue
        use_aliases = alias_env if kind in ("group_by", "having", "order_by") else ()
        for j, child in enumerate(clause_node.children):
            if kind == "from":
                _resolve_source(child, (*path, idx, j), scopes, env, schema, report)
            else:
                _resolve_expr(child, (*path, idx, j), scopes, env, schema, report,
                              alias_env=use_aliases)


def _resolve_source(node, path, scopes, cte_env, schema, report):
    if node.kind == t.TABLE:
        return
    if node.kind == t.SUBQUERY:
        _resolve_query(node.children[0], (*path, 0), [], cte_env, schema, report)
        return
    if node.kind == t.JOIN:
        _resolve_source(node.children[0], (*path, 0), scopes, cte_env, schema, report)
        if len(node.children) > 1:
            _resolve_expr(node.children[1], (*path, 1), scopes, cte_env, schema, report)
        return
    raise StructuralError(f"invalid FROM child {node.kind}")


def _resolve_expr(node, path, scopes, cte_env, schema, report, alias_env=()):
    if node.kind == t.COLUMN:
        _bind_column(node, path, scopes, report, alias_env)
        return
    if node.kind == t.SUBQUERY:
        _resolve_query(node.children[0], (*path, 0), scopes, cte_env, schema, report)
        return
    for i, child in enumerate(node.children):
        _resolve_expr(child, (*path, i), scopes, cte_env, schema, report, alias_env)


def _bind_column(node, path, scopes, report, alias_env):
    qualifier, name = node.value
    low = name.lower()
    if qualifier:
        qlow = qualifier.lower()
        for scope in scopes:
            for rel in scope:
                if rel.label.lower() != qlow:
                    continue
                if rel.columns is None or low in rel.columns:
                    report.resolved.append(Binding(path, qualifier, name, rel.relation))
                else:
                    report.unresolved.append(Binding(path, qualifier, name, rel.relation))
                return
        report.unresolved.append(Binding(path, qualifier, name, ""))
        return

    for scope in scopes:
        matches = [
            rel for rel in scope if rel.columns is not None and low in rel.columns
        ]
        if len(matches) > 1:
            raise AmbiguousColumnError(name, [m.relation for m in matches])
        if matches:
            report.resolved.append(Binding(path, qualifier, name, matches[0].relation))
            return
    if low in alias_env:
        report.resolved.append(Binding(path, qualifier, name, "<select-alias>"))
        return
    report.unresolved.append(Binding(path, qualifier, name, ""))


def _from_scope(select_node, schema, cte_env, report, record_aliases):
    found = t.get_clause(select_node, "from")
    if not found:
        return []
    _, from_clause = found
    relations: list[_Relation] = []
    for child in from_clause.children:
        source = child.children[0] if child.kind == t.JOIN else child
        relations.append(_relation_for(source, schema, cte_env, report, record_aliases))
    return relations


def _relation_for(source, schema, cte_env, report, record_aliases):
    if source.kind == t.TABLE:
        name, alias = source.value
        label = alias or name
        low = name.lower()
        cte_cols = None
        for cte_name, cols in cte_env.items():
            if cte_name.lower() == low:
                cte_cols = cols
                break
        if cte_cols is not None or low in (k.lower() for k in cte_env):
            if record_aliases:
                report.alias_map[label] = name
            return _Relation(label, name, cte_cols)
        tab = schema.table(name)
        if record_aliases:
            report.alias_map[label] = name
        if tab is None:
            # unknown relation: nothing can bind to it
            return _Relation(label, name, ())
        return _Relation(label, tab.name, tuple(c.lower() for c in tab.column_names()))
    if source.kind == t.SUBQUERY:
        alias = source.value[0]
        cols = tuple(_output_columns(source.children[0], schema, cte_env))
        label = alias or "(subquery)"
        if record_aliases and alias:
            report.alias_map[alias] = "(derived)"
        return _Relation(label, label, cols)
    raise StructuralError(f"invalid FROM source {source.kind}")


def _output_columns(query, schema, cte_env) -> list[str]:
    """Best-effort output column names of a query, for derived tables."""
    core = query
    while core.kind == t.SETOP:
        core = core.children[0]
    found = t.get_clause(core, "select")
    if not found:
        return []
    names: list[str] = []
    for item in found[1].children:
        if item.kind == t.ALIAS:
            names.append(item.value[0].lower())
        elif item.kind == t.COLUMN:
            names.append(item.value[1].lower())
        elif item.kind == t.STAR:
            names.extend(_star_columns(core, item.value[0], schema, cte_env))
        else:
            names.append(render_sql_fragment(item))
    return names


def _star_columns(core, qualifier, schema, cte_env) -> list[str]:
    found = t.get_clause(core, "from")
    if not found:
        return []
    out: list[str] = []
    for child in found[1].children:
        source = child.children[0] if child.kind == t.JOIN else child
        if source.kind == t.TABLE:
            name, alias = source.value
            if qualifier and qualifier.lower() not in (alias.lower(), name.lower()):
                continue
            low = name.lower()
            for cte_name, cols in cte_env.items():
                if cte_name.lower() == low and cols:
                    out.extend(cols)
                    break
            else:
                tab = schema.table(name)
                if tab is not None:
                    out.extend(c.lower() for c in tab.column_names())
        elif source.kind == t.SUBQUERY:
            alias = source.value[0]
            if qualifier and alias.lower() != qualifier.lower():
                continue
            out.extend(_output_columns(source.children[0], schema, cte_env))
    return out


def _select_aliases(select_node) -> tuple[str, ...]:
    found = t.get_clause(select_node, "select")
    if not found:
        return ()
    return tuple(
        item.value[0].lower() for item in found[1].children if item.kind == t.ALIAS
    )


def render_sql_fragment(node) -> str:
    """Expression-level rendering used for synthetic output column names."""
    from .render import _expr  # local import; render has no resolver dependency

    return _expr(node, 0)
