"""Tokenizer and recursive-descent parser for the SELECT subset.

Keywords and identifiers are case-insensitive (identifiers normalize to
lower case).  String literals accept single or double quotes and normalize
to one internal representation.  ``classify`` is total and never raises.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .nodes import (
    AGGREGATE_FUNCS,
    And,
    Atom,
    BinOp,
    ChainCmp,
    ColumnRef,
    DerivedTable,
    ExprCond,
    FuncCall,
    InList,
    Join,
    Literal,
    Not,
    Or,
    OrderItem,
    QueryTree,
    SchemaDef,
    SelectItem,
    Star,
    Subquery,
    TableRef,
    and_,
    from_bindings,
    or_,
    resolve_column,
    subqueries_of,
)

KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
    "AS", "ON", "AND", "OR", "NOT", "IN", "BETWEEN", "LIKE", "IS", "NULL",
    "DISTINCT", "ALL", "INNER", "LEFT", "RIGHT", "CROSS", "OUTER", "JOIN",
    "ASC", "DESC", "CAST",
}

# identifiers that terminate an implicit (AS-less) alias
_ALIAS_STOPPERS = KEYWORDS

KNOWN_FUNCS = {"COUNT", "SUM", "AVG", "MIN", "MAX", "ROUND", "CAST", "ISNULL"}

_TYPE_MAP = [
    (re.compile(r"^(int|integer|smallint|bigint|tinyint)"), "integer"),
    (re.compile(r"^(decimal|numeric|real|float|double|number)"), "decimal"),
    (re.compile(r"^(char|varchar|text|string|nchar|nvarchar|clob)"), "text"),
    (re.compile(r"^(date|datetime|timestamp|time)"), "date"),
    (re.compile(r"^(bool|boolean)"), "boolean"),
]


def normalize_type(raw: str) -> str:
    low = raw.strip().lower()
    for pat, mapped in _TYPE_MAP:
        if pat.match(low):
            return mapped
    return "text"


class ParseError(Exception):
    def __init__(self, message: str, position: int, expected: str = ""):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KEYWORD INT DEC STR OP PUNCT EOF
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*|/\*.*?\*/)
  | (?P<dec>\d+\.\d+|\.\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>'(?:[^']|'')*'|"(?:[^"]|"")*")
  | (?P<op><>|!=|<=|>=|=|<|>)
  | (?P<punct>[(),;.*/+\-])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        value = m.group()
        if m.lastgroup == "ident":
            upper = value.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, m.start()))
            else:
                tokens.append(Token("IDENT", value.lower(), m.start()))
        elif m.lastgroup == "str":
            quote = value[0]
            body = value[1:-1].replace(quote * 2, quote)
            tokens.append(Token("STR", body, m.start()))
        elif m.lastgroup == "int":
            tokens.append(Token("INT", value, m.start()))
        elif m.lastgroup == "dec":
            tokens.append(Token("DEC", value, m.start()))
        elif m.lastgroup == "op":
            op = "<>" if value == "!=" else value
            tokens.append(Token("OP", op, m.start()))
        else:
            tokens.append(Token("PUNCT", value, m.start()))
    tokens.append(Token("EOF", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Statement classification

def _split_statements(text: str):
    """Split on semicolons outside string literals; never raises."""
    parts = []
    current = []
    quote = None
    i = 0
    while i < len(text):
        ch = text[i]
        if quote:
            current.append(ch)
            if ch == quote:
                if i + 1 < len(text) and text[i + 1] == quote:
                    current.append(text[i + 1])
                    i += 1
                else:
                    quote = None
        elif ch in "'\"":
            quote = ch
            current.append(ch)
        elif ch == ";":
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return [p for p in parts if p.strip()]


def classify(text: str) -> str:
    """One of "SingleSelect", "NonSelect", "MultiStatement". Total function."""
    try:
        statements = _split_statements(text or "")
        if len(statements) > 1:
            return "MultiStatement"
        if not statements:
            return "NonSelect"
        first_word = re.match(r"\s*(?:--[^\n]*\s*|/\*.*?\*/\s*)*([A-Za-z_]+)",
                              statements[0], re.DOTALL)
        if first_word and first_word.group(1).upper() == "SELECT":
            return "SingleSelect"
        return "NonSelect"
    except Exception:
        return "NonSelect"


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------
    def peek(self, ahead=0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_keyword(self, *words) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.value in words

    def take_keyword(self, *words) -> bool:
        if self.at_keyword(*words):
            self.next()
            return True
        return False

    def expect_keyword(self, word):
        if not self.take_keyword(word):
            tok = self.peek()
            raise ParseError(f"unexpected {tok.value or 'end of input'!r}",
                             tok.pos, word)

    def at_punct(self, p) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.value == p

    def take_punct(self, p) -> bool:
        if self.at_punct(p):
            self.next()
            return True
        return False

    def expect_punct(self, p):
        if not self.take_punct(p):
            tok = self.peek()
            raise ParseError(f"unexpected {tok.value or 'end of input'!r}",
                             tok.pos, repr(p))

    def error(self, message, expected=""):
        tok = self.peek()
        raise ParseError(message, tok.pos, expected)

    # -- grammar ------------------------------------------------------------
    def parse_query(self) -> QueryTree:
        self.expect_keyword("SELECT")
        distinct = False
        if self.take_keyword("DISTINCT"):
            distinct = True
        else:
            self.take_keyword("ALL")
        items = [self.parse_select_item()]
        while self.take_punct(","):
            items.append(self.parse_select_item())
        from_tree = None
        if self.take_keyword("FROM"):
            from_tree = self.parse_from()
        where_expr = None
        if self.take_keyword("WHERE"):
            where_expr = self.parse_bool()
        group_by = []
        if self.take_keyword("GROUP"):
            self.expect_keyword("BY")
            group_by.append(self.parse_column_ref())
            while self.take_punct(","):
                group_by.append(self.parse_column_ref())
        having_expr = None
        if self.take_keyword("HAVING"):
            having_expr = self.parse_bool()
        order_by = []
        if self.take_keyword("ORDER"):
            self.expect_keyword("BY")
            order_by.append(self.parse_order_item())
            while self.take_punct(","):
                order_by.append(self.parse_order_item())
        limit = None
        if self.take_keyword("LIMIT"):
            tok = self.peek()
            if tok.kind != "INT":
                self.error("LIMIT requires a non-negative integer", "integer")
            self.next()
            limit = int(tok.value)
        tree = QueryTree(
            distinct=distinct,
            select_items=tuple(items),
            from_tree=from_tree,
            where_expr=where_expr,
            group_by=tuple(group_by),
            having_expr=having_expr,
            order_by=tuple(order_by),
            limit=limit,
        )
        self._check_unique_bindings(tree)
        return tree

    def _check_unique_bindings(self, tree):
        # one scope, one name: "FROM a x, b x" and "FROM t, t" are rejected
        from .nodes import from_leaves

        seen = set()
        for leaf in from_leaves(tree.from_tree):
            name = leaf.alias or leaf.name
            if name in seen:
                self.error(f"duplicate table binding {name!r} in FROM")
            seen.add(name)

    def parse_select_item(self) -> SelectItem:
        if self.at_punct("*"):
            self.next()
            return SelectItem(Star())
        # qualified star: ident . *
        if (self.peek().kind == "IDENT" and self.peek(1).kind == "PUNCT"
                and self.peek(1).value == "." and self.peek(2).kind == "PUNCT"
                and self.peek(2).value == "*"):
            qualifier = self.next().value
            self.next()
            self.next()
            return SelectItem(Star(qualifier))
        expr = self.parse_expr()
        alias = self.parse_alias()
        return SelectItem(expr, alias)

    def parse_alias(self):
        if self.take_keyword("AS"):
            tok = self.peek()
            if tok.kind != "IDENT":
                self.error("alias name expected", "identifier")
            return self.next().value
        if self.peek().kind == "IDENT":
            return self.next().value
        return None

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        if self.take_keyword("DESC"):
            return OrderItem(expr, "desc")
        if self.take_keyword("ASC"):
            return OrderItem(expr, "asc", asc_explicit=True)
        return OrderItem(expr, "asc")

    def parse_column_ref(self) -> ColumnRef:
        tok = self.peek()
        if tok.kind != "IDENT":
            self.error("column reference expected", "identifier")
        name = self.next().value
        if self.at_punct(".") and self.peek(1).kind == "IDENT":
            self.next()
            return ColumnRef(self.next().value, qualifier=name)
        return ColumnRef(name)

    # -- FROM ---------------------------------------------------------------
    def parse_from(self):
        node = self.parse_from_item()
        while True:
            if self.take_punct(","):
                right = self.parse_from_item()
                node = Join("comma", node, right)
                continue
            kind = self.parse_join_kind()
            if kind is None:
                return node
            right = self.parse_from_item()
            condition = None
            if kind in ("inner", "left", "right"):
                self.expect_keyword("ON")
                condition = self.parse_bool()
            node = Join(kind, node, right, condition)

    def parse_join_kind(self):
        if self.take_keyword("JOIN"):
            return "inner"
        if self.at_keyword("INNER", "LEFT", "RIGHT", "CROSS"):
            word = self.next().value
            self.take_keyword("OUTER")
            self.expect_keyword("JOIN")
            return word.lower() if word != "INNER" else "inner"
        return None

    def parse_from_item(self):
        if self.take_punct("("):
            if self.at_keyword("SELECT"):
                sub = self.parse_query()
                self.expect_punct(")")
                alias = self.parse_alias()
                if alias is None:
                    self.error("derived table requires an alias", "alias")
                return DerivedTable(sub, alias)
            group = self.parse_from()
            self.expect_punct(")")
            return group
        tok = self.peek()
        if tok.kind != "IDENT":
            self.error("table name expected", "identifier")
        name = self.next().value
        alias = self.parse_alias()
        return TableRef(name, alias)

    # -- boolean expressions --------------------------------------------------
    def parse_bool(self):
        return self.parse_or()

    def parse_or(self):
        parts = [self.parse_and()]
        while self.take_keyword("OR"):
            parts.append(self.parse_and())
        return or_(*parts) if len(parts) > 1 else parts[0]

    def parse_and(self):
        parts = [self.parse_not()]
        while self.take_keyword("AND"):
            parts.append(self.parse_not())
        return and_(*parts) if len(parts) > 1 else parts[0]

    def parse_not(self):
        if self.take_keyword("NOT"):
            return Not(self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self):
        if self.at_punct("(") and not self._paren_starts_expression():
            mark = self.i
            self.next()
            try:
                inner = self.parse_bool()
                self.expect_punct(")")
            except ParseError:
                self.i = mark
            else:
                follower = self.peek()
                if not (follower.kind == "OP"
                        or (follower.kind == "PUNCT" and follower.value in "*/+-")
                        or follower.kind == "KEYWORD" and follower.value in
                        ("LIKE", "IN", "BETWEEN", "IS", "NOT")):
                    return inner
                self.i = mark
        return self.parse_comparison()

    def _paren_starts_expression(self) -> bool:
        nxt = self.peek(1)
        return nxt.kind == "KEYWORD" and nxt.value == "SELECT"

    def parse_comparison(self):
        left = self.parse_expr()
        if self.take_keyword("IS"):
            negated = self.take_keyword("NOT")
            self.expect_keyword("NULL")
            atom = Atom("IS NULL", (left,))
            return Not(atom) if negated else atom
        negated = self.take_keyword("NOT")
        if self.take_keyword("LIKE"):
            pattern = self.parse_expr()
            atom = Atom("LIKE", (left, pattern))
            return Not(atom) if negated else atom
        if self.take_keyword("IN"):
            atom = Atom("IN", (left, self.parse_in_rhs()))
            return Not(atom) if negated else atom
        if self.take_keyword("BETWEEN"):
            low = self.parse_expr(no_and=True)
            self.expect_keyword("AND")
            high = self.parse_expr(no_and=True)
            atom = Atom("BETWEEN", (left, low, high))
            return Not(atom) if negated else atom
        if negated:
            self.error("LIKE, IN or BETWEEN expected after NOT", "predicate")
        operands = [left]
        ops = []
        while self.peek().kind == "OP":
            ops.append(self.next().value)
            operands.append(self.parse_expr())
        if not ops:
            return ExprCond(left)
        if len(ops) == 1:
            return Atom(ops[0], tuple(operands))
        if all(op in ("<", "<=", ">", ">=") for op in ops):
            return ChainCmp(tuple(operands), tuple(ops))
        self.error("cannot chain this comparison operator")

    def parse_in_rhs(self):
        self.expect_punct("(")
        if self.at_keyword("SELECT"):
            sub = self.parse_query()
            self.expect_punct(")")
            return Subquery(sub)
        items = [self.parse_expr()]
        while self.take_punct(","):
            items.append(self.parse_expr())
        self.expect_punct(")")
        return InList(tuple(items))

    # -- scalar expressions ---------------------------------------------------
    def parse_expr(self, no_and: bool = False):
        return self.parse_sum()

    def parse_sum(self):
        node = self.parse_term()
        while self.at_punct("+") or self.at_punct("-"):
            op = self.next().value
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.at_punct("*") or self.at_punct("/"):
            op = self.next().value
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return Literal("int", int(tok.value))
        if tok.kind == "DEC":
            self.next()
            return Literal("dec", str(Decimal(tok.value)))
        if tok.kind == "STR":
            self.next()
            return Literal("str", tok.value)
        if tok.kind == "KEYWORD" and tok.value == "NULL":
            self.next()
            return Literal("null")
        if tok.kind == "PUNCT" and tok.value == "-":
            self.next()
            inner = self.parse_factor()
            if isinstance(inner, Literal) and inner.kind == "int":
                return Literal("int", -inner.value)
            if isinstance(inner, Literal) and inner.kind == "dec":
                return Literal("dec", str(-Decimal(inner.value)))
            return BinOp("-", Literal("int", 0), inner)
        if tok.kind == "PUNCT" and tok.value == "(":
            self.next()
            if self.at_keyword("SELECT"):
                sub = self.parse_query()
                self.expect_punct(")")
                return Subquery(sub)
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner
        if tok.kind == "KEYWORD" and tok.value == "CAST":
            return self.parse_cast()
        if tok.kind == "IDENT":
            if self.peek(1).kind == "PUNCT" and self.peek(1).value == "(":
                return self.parse_func_call()
            return self.parse_column_with_star()
        self.error(f"unexpected {tok.value or 'end of input'!r}", "expression")

    def parse_column_with_star(self):
        name = self.next().value
        if self.at_punct(".") and self.peek(1).kind == "PUNCT" and self.peek(1).value == "*":
            self.next()
            self.next()
            return Star(name)
        if self.at_punct(".") and self.peek(1).kind == "IDENT":
            self.next()
            return ColumnRef(self.next().value, qualifier=name)
        return ColumnRef(name)

    def parse_func_call(self):
        tok = self.next()
        name = tok.value.upper()
        if name not in KNOWN_FUNCS:
            raise ParseError(f"unsupported function {tok.value!r}", tok.pos,
                             "/".join(sorted(KNOWN_FUNCS)))
        self.expect_punct("(")
        args = []
        if name == "COUNT" and self.at_punct("*"):
            self.next()
            args.append(Star())
        elif not self.at_punct(")"):
            args.append(self.parse_expr())
            while self.take_punct(","):
                args.append(self.parse_expr())
        self.expect_punct(")")
        return FuncCall(name, tuple(args))

    def parse_cast(self):
        self.next()  # CAST
        self.expect_punct("(")
        arg = self.parse_expr()
        self.expect_keyword("AS")
        tok = self.peek()
        if tok.kind not in ("IDENT", "KEYWORD"):
            self.error("type name expected", "type")
        type_name = self.next().value
        # optional length like varchar(255)
        if self.take_punct("("):
            while not self.take_punct(")"):
                self.next()
        self.expect_punct(")")
        return FuncCall("CAST", (arg,), cast_type=normalize_type(type_name))


def parse(text: str, schema: SchemaDef | None = None) -> QueryTree:
    """Parse one SELECT statement; raises ParseError on malformed input."""
    tokens = tokenize(text or "")
    if tokens[0].kind == "EOF":
        raise ParseError("empty input", 0, "SELECT")
    p = _Parser(tokens)
    tree = p.parse_query()
    p.take_punct(";")
    tok = p.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.value!r}", tok.pos, "end of statement")
    return tree


def unresolved_columns(tree: QueryTree, schema: SchemaDef):
    """(clause, serialized ref) pairs the schema cannot account for.

    Parsing never fails on these; the feedback layer reports them.
    """
    from .nodes import serialize_scalar

    out = []

    def check_query(q):
        bindings = from_bindings(q.from_tree, schema)
        aliases = tuple(it.alias for it in q.select_items if it.alias)
        known = all(b.columns is not None for b in bindings)

        def check_ref(ref, clause):
            if not known and not ref.qualifier:
                return
            if ref.qualifier and not any(b.name == ref.qualifier for b in bindings):
                out.append((clause, serialize_scalar(ref)))
                return
            if resolve_column(ref, bindings, aliases) is None:
                if ref.qualifier or ref.name not in aliases:
                    out.append((clause, serialize_scalar(ref)))

        def walk_scalar(e, clause):
            if isinstance(e, ColumnRef):
                check_ref(e, clause)
            elif isinstance(e, FuncCall):
                for a in e.args:
                    walk_scalar(a, clause)
            elif isinstance(e, BinOp):
                walk_scalar(e.left, clause)
                walk_scalar(e.right, clause)

        def walk_bool(b, clause):
            if b is None:
                return
            if isinstance(b, Atom):
                for o in b.operands:
                    if isinstance(o, InList):
                        for i in o.items:
                            walk_scalar(i, clause)
                    elif not isinstance(o, Subquery):
                        walk_scalar(o, clause)
            elif isinstance(b, ExprCond):
                walk_scalar(b.expr, clause)
            elif isinstance(b, ChainCmp):
                for o in b.operands:
                    walk_scalar(o, clause)
            elif isinstance(b, Not):
                walk_bool(b.child, clause)
            elif isinstance(b, (And, Or)):
                for c in b.children:
                    walk_bool(c, clause)

        for it in q.select_items:
            if not isinstance(it.expr, (Star, Subquery)):
                walk_scalar(it.expr, "select")
        walk_bool(q.where_expr, "where")
        for g in q.group_by:
            walk_scalar(g, "group_by")
        walk_bool(q.having_expr, "having")
        for o in q.order_by:
            if not isinstance(o.expr, Subquery):
                walk_scalar(o.expr, "order_by")
        for _, sub in subqueries_of(q):
            check_query(sub)

    check_query(tree)
    return out


# ---------------------------------------------------------------------------
# Schema DDL (CREATE TABLE subset)

_CREATE_RE = re.compile(r"create\s+table\s+(?:if\s+not\s+exists\s+)?", re.IGNORECASE)


def parse_schema(ddl_text: str) -> SchemaDef:
    """Build a SchemaDef from CREATE TABLE statements.

    Understands column lines ``name type [PRIMARY KEY] [REFERENCES t(c)]``
    and table-level ``PRIMARY KEY (...)`` / ``FOREIGN KEY (c) REFERENCES t(c)``.
    """
    tables = []
    pks = []
    fks = []
    for stmt in _split_statements(ddl_text):
        m = _CREATE_RE.match(stmt.strip())
        if not m:
            continue
        rest = stmt.strip()[m.end():]
        name_match = re.match(r'[`"\[]?([A-Za-z_][A-Za-z0-9_]*)[`"\]]?\s*\(', rest)
        if not name_match:
            raise ValueError(f"unparseable CREATE TABLE statement: {stmt[:60]!r}")
        table = name_match.group(1).lower()
        body = rest[name_match.end():]
        depth = 1
        end = 0
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    end = i
                    break
        defs = _split_top_level_commas(body[:end])
        columns = []
        table_pk = []
        for d in defs:
            d = d.strip()
            if not d:
                continue
            upper = d.upper()
            if upper.startswith("PRIMARY KEY"):
                table_pk = re.findall(r"[A-Za-z_][A-Za-z0-9_]*", d[11:])
                continue
            if upper.startswith("FOREIGN KEY"):
                fk = re.match(
                    r"FOREIGN\s+KEY\s*\(\s*([A-Za-z_]\w*)\s*\)\s*REFERENCES\s+"
                    r"([A-Za-z_]\w*)\s*\(\s*([A-Za-z_]\w*)\s*\)",
                    d, re.IGNORECASE)
                if fk:
                    fks.append((table, fk.group(1).lower(),
                                fk.group(2).lower(), fk.group(3).lower()))
                continue
            if upper.startswith(("UNIQUE", "CHECK", "CONSTRAINT")):
                continue
            col_match = re.match(r'[`"\[]?([A-Za-z_][A-Za-z0-9_]*)[`"\]]?\s+([A-Za-z]+(?:\s*\(\s*\d+(?:\s*,\s*\d+)?\s*\))?)', d)
            if not col_match:
                continue
            col = col_match.group(1).lower()
            columns.append((col, normalize_type(col_match.group(2))))
            if "PRIMARY KEY" in upper:
                table_pk = [col]
            ref = re.search(r"REFERENCES\s+([A-Za-z_]\w*)\s*\(\s*([A-Za-z_]\w*)\s*\)",
                            d, re.IGNORECASE)
            if ref:
                fks.append((table, col, ref.group(1).lower(), ref.group(2).lower()))
        names = [c for c, _ in columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column name in table {table!r}")
        if any(t == table for t, _ in tables):
            raise ValueError(f"duplicate table name {table!r}")
        tables.append((table, tuple(columns)))
        if table_pk:
            pks.append((table, tuple(c.lower() for c in table_pk)))
    return SchemaDef(tables=tuple(tables), primary_keys=tuple(pks),
                     foreign_keys=tuple(fks))


def _split_top_level_commas(text: str):
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts
