"""Recursive-descent parser for the supported SQLite dialect subset.

Covers: SELECT cores with DISTINCT, stars and expressions; FROM with comma
sources and INNER/LEFT/CROSS joins (ON required for inner/left); WHERE,
GROUP BY, HAVING, ORDER BY, LIMIT/OFFSET; scalar and aggregate functions;
window functions with OVER(PARTITION BY ... ORDER BY ...); CASE; CAST;
BETWEEN / IN / NOT IN / LIKE / IS NULL / EXISTS; scalar, IN-list and
derived-table subqueries; non-recursive CTEs; UNION / UNION ALL /
INTERSECT / EXCEPT.

Everything else (DDL, DML, PRAGMA, recursive CTEs, USING joins, window
frames) is rejected with an UnsupportedSqlError.
"""

from __future__ import annotations

from . import tree as t
from .errors import SqlSyntaxError, UnsupportedSqlError
from .lexer import Token, tokenize

_UNSUPPORTED_LEADS = {
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "ALTER", "PRAGMA",
    "REPLACE", "VACUUM", "ATTACH", "EXPLAIN",
}


def parse_sql(text: str) -> t.Node:
    """Parse SQL text into its labeled ordered tree."""
    if not text or not text.strip():
        raise SqlSyntaxError("empty SQL text", 0)
    tokens = tokenize(text)
    if not tokens:
        raise SqlSyntaxError("empty SQL text", 0)
    parser = _Parser(tokens)
    node = parser.parse_query()
    if not parser.at_end():
        tok = parser.peek()
        raise SqlSyntaxError(f"unexpected trailing input {tok.text!r}", tok.pos)
    return node


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.type == "kw" and tok.text in words

    def accept_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.i += 1
            return True
        return False

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if tok is None or tok.type != "kw" or tok.text != word:
            got = "end of input" if tok is None else repr(tok.text)
            pos = tok.pos if tok else (self.tokens[-1].pos if self.tokens else 0)
            raise SqlSyntaxError(f"expected {word}, got {got}", pos)
        self.i += 1
        return tok

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.type == "punct" and tok.text == ch

    def accept_punct(self, ch: str) -> bool:
        if self.at_punct(ch):
            self.i += 1
            return True
        return False

    def expect_punct(self, ch: str) -> None:
        tok = self.peek()
        if tok is None or tok.type != "punct" or tok.text != ch:
            got = "end of input" if tok is None else repr(tok.text)
            pos = tok.pos if tok else (self.tokens[-1].pos if self.tokens else 0)
            raise SqlSyntaxError(f"expected {ch!r}, got {got}", pos)
        self.i += 1

    def at_op(self, *symbols: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.type == "op" and tok.text in symbols

    def accept_op(self, *symbols: str) -> str | None:
        tok = self.peek()
        if tok is not None and tok.type == "op" and tok.text in symbols:
            self.i += 1
            return tok.text
        return None

    def expect_ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok is None or tok.type != "ident":
            got = "end of input" if tok is None else repr(tok.text)
            pos = tok.pos if tok else 0
            raise SqlSyntaxError(f"expected {what}, got {got}", pos)
        self.i += 1
        return tok.text

    # -- query level -------------------------------------------------------

    def parse_query(self) -> t.Node:
        tok = self.peek()
        if tok and tok.type in ("kw", "ident") and tok.text.upper() in _UNSUPPORTED_LEADS:
            raise UnsupportedSqlError(f"unsupported statement {tok.text.upper()}", tok.pos)

        with_ctes: list[t.Node] = []
        if self.accept_kw("WITH"):
            lead = self.peek()
            if lead is not None and lead.text.lower() == "recursive" \
                    and self.peek(1) is not None and self.peek(1).type == "ident":
                raise UnsupportedSqlError("recursive CTEs are not supported", lead.pos)
            with_ctes.append(self.parse_cte())
            while self.accept_punct(","):
                with_ctes.append(self.parse_cte())

        core = self.parse_select_core()
        compounds: list[tuple[str, t.Node]] = []
        while self.at_kw("UNION", "INTERSECT", "EXCEPT"):
            word = self.peek().text
            self.i += 1
            symbol = word.lower()
            if word == "UNION" and self.accept_kw("ALL"):
                symbol = "union_all"
            compounds.append((symbol, self.parse_select_core()))

        order_by = self.parse_order_by() if self.at_kw("ORDER") else None
        limit = self.parse_limit() if self.at_kw("LIMIT") else None

        if with_ctes:
            core = t.set_clause(core, t.clause("with", with_ctes))

        if not compounds:
            if order_by is not None:
                core = t.set_clause(core, order_by)
            if limit is not None:
                core = t.set_clause(core, limit)
            return core

        node = core
        for symbol, rhs in compounds:
            node = t.setop(symbol, node, rhs)
        trailing = [c for c in (order_by, limit) if c is not None]
        if trailing:
            node = t.Node(t.SETOP, node.value, (*node.children, *trailing))
        return node

    def parse_cte(self) -> t.Node:
        name = self.expect_ident("CTE name")
        self.expect_kw("AS")
        self.expect_punct("(")
        body = self.parse_query()
        self.expect_punct(")")
        return t.cte(name, body)

    def parse_select_core(self) -> t.Node:
        self.expect_kw("SELECT")
        flags = []
        if self.accept_kw("DISTINCT"):
            flags.append("distinct")
        else:
            self.accept_kw("ALL")
        items = [self.parse_select_item()]
        while self.accept_punct(","):
            items.append(self.parse_select_item())
        clauses = [t.clause("select", items, *flags)]

        if self.accept_kw("FROM"):
            clauses.append(t.clause("from", self.parse_from_sources()))
        if self.accept_kw("WHERE"):
            clauses.append(t.clause("where", [self.parse_expr()]))
        if self.at_kw("GROUP"):
            self.i += 1
            self.expect_kw("BY")
            keys = [self.parse_expr()]
            while self.accept_punct(","):
                keys.append(self.parse_expr())
            clauses.append(t.clause("group_by", keys))
        if self.accept_kw("HAVING"):
            clauses.append(t.clause("having", [self.parse_expr()]))
        return t.select_core(clauses)

    def parse_order_by(self) -> t.Node:
        self.expect_kw("ORDER")
        self.expect_kw("BY")
        keys = [self.parse_sort_key()]
        while self.accept_punct(","):
            keys.append(self.parse_sort_key())
        return t.clause("order_by", keys)

    def parse_sort_key(self) -> t.Node:
        expr = self.parse_expr()
        direction = "asc"
        if self.accept_kw("DESC"):
            direction = "desc"
        else:
            self.accept_kw("ASC")
        return t.sort_key(expr, direction)

    def parse_limit(self) -> t.Node:
        self.expect_kw("LIMIT")
        count = self.parse_expr()
        if self.accept_kw("OFFSET"):
            return t.clause("limit", [count, self.parse_expr()])
        if self.accept_punct(","):
            # LIMIT skip, count  ==  LIMIT count OFFSET skip
            real_count = self.parse_expr()
            return t.clause("limit", [real_count, count])
        return t.clause("limit", [count])

    # -- FROM --------------------------------------------------------------

    def parse_from_sources(self) -> list[t.Node]:
        sources = [self.parse_source()]
        while True:
            if self.accept_punct(","):
                sources.append(t.join("comma", self.parse_source()))
                continue
            kind = self.parse_join_kind()
            if kind is None:
                break
            source = self.parse_source()
            if kind == "cross":
                sources.append(t.join("cross", source))
                continue
            if self.at_kw("USING"):
                raise UnsupportedSqlError("USING joins are not supported", self.peek().pos)
            self.expect_kw("ON")
            sources.append(t.join(kind, source, self.parse_expr()))
        return sources

    def parse_join_kind(self) -> str | None:
        if self.accept_kw("JOIN"):
            return "inner"
        if self.at_kw("INNER"):
            self.i += 1
            self.expect_kw("JOIN")
            return "inner"
        if self.at_kw("LEFT"):
            self.i += 1
            self.accept_kw("OUTER")
            self.expect_kw("JOIN")
            return "left"
        if self.at_kw("CROSS"):
            self.i += 1
            self.expect_kw("JOIN")
            return "cross"
        if self.at_kw("RIGHT", "FULL", "NATURAL"):
            raise UnsupportedSqlError(
                f"{self.peek().text} joins are not supported", self.peek().pos
            )
        return None

    def parse_source(self) -> t.Node:
        if self.accept_punct("("):
            body = self.parse_query()
            self.expect_punct(")")
            alias = self.parse_optional_alias()
            return t.subquery(body, alias)
        name = self.expect_ident("table name")
        alias = self.parse_optional_alias()
        return t.table(name, alias)

    def parse_optional_alias(self) -> str:
        if self.accept_kw("AS"):
            return self.expect_ident("alias")
        tok = self.peek()
        if tok is not None and tok.type == "ident":
            self.i += 1
            return tok.text
        return ""

    # -- select items --------------------------------------------------------

    def parse_select_item(self) -> t.Node:
        tok = self.peek()
        if tok is not None and tok.type == "op" and tok.text == "*":
            self.i += 1
            return t.star()
        nxt = self.peek(1)
        nxt2 = self.peek(2)
        if (
            tok is not None
            and tok.type == "ident"
            and nxt is not None
            and nxt.type == "punct"
            and nxt.text == "."
            and nxt2 is not None
            and nxt2.type == "op"
            and nxt2.text == "*"
        ):
            self.i += 3
            return t.star(tok.text)
        expr = self.parse_expr()
        if self.accept_kw("AS"):
            return t.aliased(expr, self.expect_ident("alias"))
        tok = self.peek()
        if tok is not None and tok.type == "ident":
            self.i += 1
            return t.aliased(expr, tok.text)
        return expr

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> t.Node:
        return self.parse_or()

    def parse_or(self) -> t.Node:
        node = self.parse_and()
        if not self.at_kw("OR"):
            return node
        children = [node]
        while self.accept_kw("OR"):
            children.append(self.parse_and())
        return t.logical("or", _flatten("or", children))

    def parse_and(self) -> t.Node:
        node = self.parse_not()
        if not self.at_kw("AND"):
            return node
        children = [node]
        while self.accept_kw("AND"):
            children.append(self.parse_not())
        return t.logical("and", _flatten("and", children))

    def parse_not(self) -> t.Node:
        if self.at_kw("NOT"):
            if self.peek(1) is not None and self.peek(1).type == "kw" and self.peek(1).text == "EXISTS":
                self.i += 2
                return t.operator("not_exists", [self.parse_subquery_parens()])
            self.i += 1
            return t.logical("not", [self.parse_not()])
        return self.parse_predicate()

    def parse_predicate(self) -> t.Node:
        node = self.parse_relational()
        while True:
            sym = self.accept_op("=", "!=")
            if sym:
                node = t.operator(sym, [node, self.parse_relational()])
                continue
            if self.at_kw("IS"):
                self.i += 1
                negated = self.accept_kw("NOT")
                self.expect_kw("NULL")
                node = t.operator("is_not_null" if negated else "is_null", [node])
                continue
            negated = False
            if self.at_kw("NOT") and self.peek(1) is not None and self.peek(1).type == "kw" \
                    and self.peek(1).text in ("LIKE", "BETWEEN", "IN"):
                negated = True
                self.i += 1
            if self.accept_kw("LIKE"):
                node = t.operator(
                    "not_like" if negated else "like", [node, self.parse_relational()]
                )
                continue
            if self.accept_kw("BETWEEN"):
                low = self.parse_relational()
                self.expect_kw("AND")
                high = self.parse_relational()
                node = t.operator(
                    "not_between" if negated else "between", [node, low, high]
                )
                continue
            if self.accept_kw("IN"):
                node = self.parse_in_rhs(node, negated)
                continue
            if negated:
                raise SqlSyntaxError("dangling NOT", self.peek().pos if self.peek() else 0)
            return node

    def parse_in_rhs(self, lhs: t.Node, negated: bool) -> t.Node:
        symbol = "not_in" if negated else "in"
        self.expect_punct("(")
        if self.at_kw("SELECT", "WITH"):
            body = self.parse_query()
            self.expect_punct(")")
            return t.operator(symbol, [lhs, t.subquery(body)])
        items = [self.parse_expr()]
        while self.accept_punct(","):
            items.append(self.parse_expr())
        self.expect_punct(")")
        return t.operator(symbol, [lhs, *items])

    def parse_relational(self) -> t.Node:
        node = self.parse_additive()
        while True:
            sym = self.accept_op("<", "<=", ">", ">=")
            if not sym:
                return node
            node = t.operator(sym, [node, self.parse_additive()])

    def parse_additive(self) -> t.Node:
        node = self.parse_multiplicative()
        while True:
            sym = self.accept_op("+", "-")
            if not sym:
                return node
            node = t.operator(sym, [node, self.parse_multiplicative()])

    def parse_multiplicative(self) -> t.Node:
        node = self.parse_concat()
        while True:
            sym = self.accept_op("*", "/", "%")
            if not sym:
                return node
            node = t.operator(sym, [node, self.parse_concat()])

    def parse_concat(self) -> t.Node:
        node = self.parse_unary()
        while True:
            sym = self.accept_op("||")
            if not sym:
                return node
            node = t.operator("||", [node, self.parse_unary()])

    def parse_unary(self) -> t.Node:
        if self.accept_op("-"):
            return t.operator("neg", [self.parse_unary()])
        if self.accept_op("+"):
            return self.parse_unary()
        return self.parse_primary()

    def parse_subquery_parens(self) -> t.Node:
        self.expect_punct("(")
        body = self.parse_query()
        self.expect_punct(")")
        return t.subquery(body)

    def parse_primary(self) -> t.Node:
        tok = self.peek()
        if tok is None:
            raise SqlSyntaxError("unexpected end of input", self.tokens[-1].pos)

        if tok.type in ("number", "string"):
            self.i += 1
            return t.literal(tok.text)
        if tok.type == "kw" and tok.text in ("NULL", "TRUE", "FALSE"):
            self.i += 1
            return t.literal(tok.text)
        if tok.type == "kw" and tok.text == "CASE":
            return self.parse_case()
        if tok.type == "kw" and tok.text == "CAST":
            return self.parse_cast()
        if tok.type == "kw" and tok.text == "EXISTS":
            self.i += 1
            return t.operator("exists", [self.parse_subquery_parens()])

        if tok.type == "punct" and tok.text == "(":
            if self.peek(1) is not None and self.peek(1).type == "kw" \
                    and self.peek(1).text in ("SELECT", "WITH"):
                return self.parse_subquery_parens()
            self.i += 1
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner

        if tok.type == "ident":
            nxt = self.peek(1)
            if nxt is not None and nxt.type == "punct" and nxt.text == "(":
                return self.parse_function_call()
            if nxt is not None and nxt.type == "punct" and nxt.text == ".":
                self.i += 2
                trailer = self.peek()
                if trailer is not None and trailer.type == "op" and trailer.text == "*":
                    self.i += 1
                    return t.star(tok.text)
                return t.column(tok.text, self.expect_ident("column name"))
            self.i += 1
            return t.column("", tok.text)

        raise SqlSyntaxError(f"unexpected token {tok.text!r}", tok.pos)

    def parse_function_call(self) -> t.Node:
        name = self.expect_ident("function name")
        self.expect_punct("(")
        distinct = False
        args: list[t.Node] = []
        if self.at_op("*"):
            self.i += 1
            args.append(t.star())
        elif not self.at_punct(")"):
            if self.accept_kw("DISTINCT"):
                distinct = True
            args.append(self.parse_expr())
            while self.accept_punct(","):
                args.append(self.parse_expr())
        self.expect_punct(")")
        node = t.func(name, args, distinct=distinct)
        if self.at_kw("OVER"):
            self.i += 1
            return self.parse_window(node)
        return node

    def parse_window(self, func_node: t.Node) -> t.Node:
        self.expect_punct("(")
        kids: list[t.Node] = [func_node]
        if self.at_kw("PARTITION"):
            self.i += 1
            self.expect_kw("BY")
            keys = [self.parse_expr()]
            while self.accept_punct(","):
                keys.append(self.parse_expr())
            kids.append(t.clause("group_by", keys, "partition"))
        if self.at_kw("ORDER"):
            kids.append(self.parse_order_by())
        tok = self.peek()
        if tok is not None and tok.type == "ident" and tok.text in ("rows", "range", "groups"):
            raise UnsupportedSqlError("window frames are not supported", tok.pos)
        self.expect_punct(")")
        return t.Node(t.WINDOW, (), tuple(kids))

    def parse_case(self) -> t.Node:
        self.expect_kw("CASE")
        kids: list[t.Node] = []
        simple = not self.at_kw("WHEN")
        if simple:
            kids.append(self.parse_expr())
        while self.accept_kw("WHEN"):
            cond = self.parse_expr()
            self.expect_kw("THEN")
            kids.append(t.operator("when", [cond, self.parse_expr()]))
        if self.accept_kw("ELSE"):
            kids.append(t.operator("else", [self.parse_expr()]))
        self.expect_kw("END")
        if len([k for k in kids if k.kind == t.OPERATOR and k.value[0] == "when"]) == 0:
            raise SqlSyntaxError("CASE requires at least one WHEN branch",
                                 self.peek().pos if self.peek() else 0)
        value = ("case", "simple") if simple else ("case",)
        return t.Node(t.OPERATOR, value, tuple(kids))

    def parse_cast(self) -> t.Node:
        self.expect_kw("CAST")
        self.expect_punct("(")
        expr = self.parse_expr()
        self.expect_kw("AS")
        tok = self.peek()
        if tok is None or tok.type not in ("ident", "kw"):
            raise SqlSyntaxError("expected type name in CAST", tok.pos if tok else 0)
        self.i += 1
        type_name = tok.text.lower()
        self.expect_punct(")")
        return t.operator("cast", [expr, t.literal(type_name)])


def _flatten(connector: str, children: list[t.Node]) -> list[t.Node]:
    out: list[t.Node] = []
    for child in children:
        if child.kind == t.LOGICAL and child.value[0] == connector:
            out.extend(child.children)
        else:
            out.append(child)
    return out
