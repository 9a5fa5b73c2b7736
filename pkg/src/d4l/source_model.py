"""Tolerant parser for a Java subset.

Turns source text into functions, statements and intra-procedural control
flow graphs, plus project-level call edges. The parser is deliberately
forgiving: constructs outside the supported subset (switch, lambdas with
block bodies, synchronized, labeled statements, ...) become opaque
statements with conservative use sets instead of failing the file. Only
unbalanced braces reject a file outright.

Supported statement forms: local declarations, assignments, expression
calls, if/else, for/while/do, try/catch/finally, return, throw.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional


class SourceModelError(Exception):
    pass


class UnbalancedDelimiters(SourceModelError):
    """Braces in the file cannot be matched; the file is rejected."""


class EncodingError(SourceModelError):
    """File bytes are not valid UTF-8."""


JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while var record yield
    true false null""".split()
)

MODIFIER_KEYWORDS = frozenset(
    "public private protected static final abstract synchronized native strictfp transient volatile default".split()
)

PRIMITIVE_TYPES = frozenset("boolean byte char short int long float double void var".split())

# Multi-character operators, longest first so greedy matching works.
_MULTI_OPS = [
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||",
    "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>",
]

ASSIGN_OPS = frozenset(["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="])

_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | num | str | char | punct
    text: str
    line: int
    offset: int  # character offset of first char in the original text

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def tokenize(text: str) -> list[Token]:
    """Lex Java-ish source. Comments and whitespace are dropped.

    Raises UnbalancedDelimiters when braces do not match over the whole text.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    n = len(text)
    brace_depth = 0
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\f":
            i += 1
            continue
        if c == "/" and i + 1 < n:
            if text[i + 1] == "/":
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            if text[i + 1] == "*":
                j = text.find("*/", i + 2)
                if j < 0:
                    i = n
                    continue
                line += text.count("\n", i, j + 2)
                i = j + 2
                continue
        if c == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            j = min(j, n - 1)
            tokens.append(Token("str", text[i : j + 1], line, i))
            line += text.count("\n", i, j + 1)
            i = j + 1
            continue
        if c == "'":
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == "'":
                    break
                j += 1
            j = min(j, n - 1)
            tokens.append(Token("char", text[i : j + 1], line, i))
            i = j + 1
            continue
        if _IDENT_START.match(c):
            m = _IDENT_RE.match(text, i)
            tokens.append(Token("ident", m.group(), line, i))
            i = m.end()
            continue
        if c.isdigit():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "._"):
                j += 1
            tokens.append(Token("num", text[i:j], line, i))
            i = j
            continue
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                tokens.append(Token("punct", op, line, i))
                i += len(op)
                break
        else:
            if c == "{":
                brace_depth += 1
            elif c == "}":
                brace_depth -= 1
                if brace_depth < 0:
                    raise UnbalancedDelimiters(f"unmatched '}}' at line {line}")
            tokens.append(Token("punct", c, line, i))
            i += 1
    if brace_depth != 0:
        raise UnbalancedDelimiters(f"{brace_depth} unclosed '{{' at end of input")
    return tokens


# ---------------------------------------------------------------------------
# Expression analysis


@dataclass(frozen=True)
class CallExpr:
    """One call expression found inside a statement."""

    name: str            # simple method name
    arity: int
    receiver: Optional[str]  # root identifier of the receiver chain, if any
    arg_texts: tuple[str, ...]
    line: int


def _match_forward(tokens: list[Token], start: int, open_p: str, close_p: str) -> int:
    """Index of the token closing the bracket opened at `start` (which must open it)."""
    depth = 0
    for k in range(start, len(tokens)):
        t = tokens[k].text
        if t == open_p:
            depth += 1
        elif t == close_p:
            depth -= 1
            if depth == 0:
                return k
    return len(tokens) - 1


def _split_top_level(tokens: list[Token], sep: str = ",") -> list[tuple[int, int]]:
    """Split a token span on top-level separators; returns (start, end) index pairs."""
    parts: list[tuple[int, int]] = []
    depth = 0
    start = 0
    for k, tok in enumerate(tokens):
        if tok.text in "([{":
            depth += 1
        elif tok.text in ")]}":
            depth -= 1
        elif tok.text == sep and depth == 0:
            parts.append((start, k))
            start = k + 1
    parts.append((start, len(tokens)))
    return parts


def span_text(text: str, tokens: list[Token]) -> str:
    if not tokens:
        return ""
    return text[tokens[0].offset : tokens[-1].end]


def analyze_expression(tokens: list[Token], raw_text: str) -> tuple[list[str], list[CallExpr]]:
    """Extract variable uses and call expressions from an expression token span.

    An identifier counts as a variable use when it is the root of a reference
    chain (not preceded by '.'), is not immediately followed by '(' (method
    name), does not follow 'new', and is not a keyword.
    """
    uses: list[str] = []
    calls: list[CallExpr] = []
    k = 0
    n = len(tokens)
    while k < n:
        tok = tokens[k]
        if tok.kind != "ident" or tok.text in JAVA_KEYWORDS:
            k += 1
            continue
        prev = tokens[k - 1] if k > 0 else None
        nxt = tokens[k + 1] if k + 1 < n else None
        after_dot = prev is not None and prev.text == "."
        after_new = prev is not None and prev.text == "new"
        if nxt is not None and nxt.text == "(":
            close = _match_forward(tokens, k + 1, "(", ")")
            inner = tokens[k + 2 : close]
            arg_spans = _split_top_level(inner) if inner else []
            arg_texts = tuple(span_text(raw_text, inner[a:b]) for a, b in arg_spans if b > a)
            receiver = None
            if after_dot:
                # walk back the chain a.b.c.m( ... ) to its root identifier
                j = k - 1
                root = None
                while j >= 0:
                    if tokens[j].text == ".":
                        j -= 1
                        continue
                    if tokens[j].kind == "ident":
                        root = tokens[j]
                        j -= 1
                        continue
                    break
                if root is not None and root.text not in JAVA_KEYWORDS:
                    receiver = root.text
            if not after_new:
                calls.append(
                    CallExpr(
                        name=tok.text,
                        arity=len(arg_texts),
                        receiver=receiver,
                        arg_texts=arg_texts,
                        line=tok.line,
                    )
                )
            for a, b in arg_spans:
                sub_uses, sub_calls = analyze_expression(inner[a:b], raw_text)
                uses.extend(sub_uses)
                calls.extend(sub_calls)
            k = close + 1
            continue
        if not after_dot and not after_new:
            uses.append(tok.text)
        k += 1
    return uses, calls


def lexical_identifiers(tokens: list[Token]) -> list[str]:
    """All non-keyword identifiers in order, used for opaque statements."""
    return [t.text for t in tokens if t.kind == "ident" and t.text not in JAVA_KEYWORDS]


# ---------------------------------------------------------------------------
# Statements and declarations


@dataclass
class Statement:
    kind: str  # assignment | declaration | call | if | loop | try | return | throw | opaque
    text: str
    line: int
    defs: set[str] = field(default_factory=set)
    uses: set[str] = field(default_factory=set)
    children: list["Statement"] = field(default_factory=list)
    # then/else grouping for if, body for loop, body/catches/finally for try
    groups: dict[str, list["Statement"]] = field(default_factory=dict)
    head_text: str = ""  # condensed form for compound kinds ("if (c)", "for (...)")
    calls: list[CallExpr] = field(default_factory=list)
    # variables whose definitions should be traced by slicing (uses outside
    # call-argument positions); for opaque statements this equals uses
    traced_uses: set[str] = field(default_factory=set)
    arg_exprs: list[str] = field(default_factory=list)  # for call statements
    loop_flavor: str = ""  # for | while | do (loop kind only)

    def flat(self) -> Iterator["Statement"]:
        yield self
        for group in self.groups.values():
            for child in group:
                yield from child.flat()

    def __repr__(self) -> str:  # keep debugging output short
        return f"Statement({self.kind}@{self.line}: {self.text[:40]!r})"


@dataclass
class FunctionDecl:
    qualified_name: str
    parameters: list[tuple[str, str]]  # (name, declared type text)
    body: list[Statement]
    span: tuple[int, int]  # 1-based start/end line in the file
    text: str  # verbatim source including signature and annotations

    @property
    def name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]

    @property
    def parameter_names(self) -> set[str]:
        return {name for name, _ in self.parameters}

    def statements(self) -> list[Statement]:
        out: list[Statement] = []
        for s in self.body:
            out.extend(s.flat())
        return out


@dataclass
class TypeDecl:
    name: str
    kind: str  # class | interface | enum
    functions: list[FunctionDecl]
    nested: list["TypeDecl"] = field(default_factory=list)

    def all_functions(self) -> Iterator[FunctionDecl]:
        yield from self.functions
        for t in self.nested:
            yield from t.all_functions()


@dataclass
class SourceUnit:
    path: str
    package: str
    types: list[TypeDecl]
    raw_text: str

    def functions(self) -> list[FunctionDecl]:
        out: list[FunctionDecl] = []
        for t in self.types:
            out.extend(t.all_functions())
        return out


class _StatementParser:
    """Recursive-descent statement parser over a token window."""

    def __init__(self, tokens: list[Token], raw_text: str):
        self.tokens = tokens
        self.raw = raw_text

    def parse_block_body(self, start: int, stop: int) -> list[Statement]:
        """Parse statements in tokens[start:stop] (exclusive of braces)."""
        stmts: list[Statement] = []
        k = start
        while k < stop:
            stmt, k = self._parse_statement(k, stop)
            if stmt is not None:
                if isinstance(stmt, list):
                    stmts.extend(stmt)
                else:
                    stmts.append(stmt)
        return stmts

    def _parse_statement(self, k: int, stop: int):
        toks = self.tokens
        tok = toks[k]
        if tok.text == ";":
            return None, k + 1
        if tok.text == "{":
            close = _match_forward(toks, k, "{", "}")
            # bare blocks dissolve into the surrounding statement list
            return self.parse_block_body(k + 1, close), close + 1
        if tok.text == "if":
            return self._parse_if(k, stop)
        if tok.text in ("for", "while"):
            return self._parse_loop(k, stop)
        if tok.text == "do":
            return self._parse_do(k, stop)
        if tok.text == "try":
            return self._parse_try(k, stop)
        if tok.text == "return":
            return self._parse_flow_exit(k, stop, "return")
        if tok.text == "throw":
            return self._parse_flow_exit(k, stop, "throw")
        return self._parse_simple(k, stop)

    # -- helpers

    def _text(self, a: int, b: int) -> str:
        return span_text(self.raw, self.tokens[a:b])

    def _branch(self, k: int, stop: int) -> tuple[list[Statement], int]:
        """A single statement or a braced block as a statement list."""
        if k < stop and self.tokens[k].text == "{":
            close = _match_forward(self.tokens, k, "{", "}")
            return self.parse_block_body(k + 1, close), close + 1
        stmt, k2 = self._parse_statement(k, stop)
        if stmt is None:
            return [], k2
        if isinstance(stmt, list):
            return stmt, k2
        return [stmt], k2

    def _parse_if(self, k: int, stop: int):
        toks = self.tokens
        cond_close = _match_forward(toks, k + 1, "(", ")")
        cond_tokens = toks[k + 2 : cond_close]
        uses, calls = analyze_expression(cond_tokens, self.raw)
        then_stmts, after = self._branch(cond_close + 1, stop)
        else_stmts: list[Statement] = []
        if after < stop and toks[after].text == "else":
            else_stmts, after = self._branch(after + 1, stop)
        stmt = Statement(
            kind="if",
            text=self._text(k, after),
            line=toks[k].line,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
            head_text=f"if ({span_text(self.raw, cond_tokens)})",
            groups={"then": then_stmts, "else": else_stmts},
        )
        return stmt, after

    def _parse_loop(self, k: int, stop: int):
        toks = self.tokens
        flavor = toks[k].text
        head_close = _match_forward(toks, k + 1, "(", ")")
        head_tokens = toks[k + 2 : head_close]
        defs: set[str] = set()
        uses: list[str] = []
        calls: list[CallExpr] = []
        if flavor == "for":
            colon_parts = _split_top_level(head_tokens, ":")
            if len(colon_parts) == 2:
                # enhanced for: "Type x : expr"
                left = head_tokens[colon_parts[0][0] : colon_parts[0][1]]
                right = head_tokens[colon_parts[1][0] : colon_parts[1][1]]
                if left and left[-1].kind == "ident":
                    defs.add(left[-1].text)
                u, c = analyze_expression(right, self.raw)
                uses.extend(u)
                calls.extend(c)
            else:
                for a, b in _split_top_level(head_tokens, ";"):
                    part = head_tokens[a:b]
                    d, u, c = self._classify_simple_span(part)
                    defs |= d
                    uses.extend(u)
                    calls.extend(c)
        else:
            u, c = analyze_expression(head_tokens, self.raw)
            uses.extend(u)
            calls.extend(c)
        body, after = self._branch(head_close + 1, stop)
        stmt = Statement(
            kind="loop",
            text=self._text(k, after),
            line=toks[k].line,
            defs=defs,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
            head_text=f"{flavor} ({span_text(self.raw, head_tokens)})",
            groups={"body": body},
            loop_flavor=flavor,
        )
        return stmt, after

    def _parse_do(self, k: int, stop: int):
        toks = self.tokens
        body, after = self._branch(k + 1, stop)
        uses: list[str] = []
        calls: list[CallExpr] = []
        head = "do ... while"
        if after < stop and toks[after].text == "while":
            cond_close = _match_forward(toks, after + 1, "(", ")")
            cond_tokens = toks[after + 2 : cond_close]
            u, calls = analyze_expression(cond_tokens, self.raw)
            uses.extend(u)
            head = f"do ... while ({span_text(self.raw, cond_tokens)})"
            after = cond_close + 1
            if after < stop and toks[after].text == ";":
                after += 1
        stmt = Statement(
            kind="loop",
            text=self._text(k, after),
            line=toks[k].line,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
            head_text=head,
            groups={"body": body},
            loop_flavor="do",
        )
        return stmt, after

    def _parse_try(self, k: int, stop: int):
        toks = self.tokens
        after = k + 1
        defs: set[str] = set()
        uses: list[str] = []
        calls: list[CallExpr] = []
        head = "try"
        if after < stop and toks[after].text == "(":
            res_close = _match_forward(toks, after, "(", ")")
            res_tokens = toks[after + 1 : res_close]
            for a, b in _split_top_level(res_tokens, ";"):
                d, u, c = self._classify_simple_span(res_tokens[a:b])
                defs |= d
                uses.extend(u)
                calls.extend(c)
            head = f"try ({span_text(self.raw, res_tokens)})"
            after = res_close + 1
        body, after = self._branch(after, stop)
        catches: list[Statement] = []
        catch_params: list[str] = []
        finally_stmts: list[Statement] = []
        while after < stop and toks[after].text == "catch":
            param_close = _match_forward(toks, after + 1, "(", ")")
            param_tokens = toks[after + 2 : param_close]
            if param_tokens and param_tokens[-1].kind == "ident":
                catch_params.append(param_tokens[-1].text)
            catch_body, after = self._branch(param_close + 1, stop)
            catches.extend(catch_body)
        if after < stop and toks[after].text == "finally":
            finally_stmts, after = self._branch(after + 1, stop)
        stmt = Statement(
            kind="try",
            text=self._text(k, after),
            line=toks[k].line,
            defs=defs,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
            head_text=head,
            groups={"body": body, "catch": catches, "finally": finally_stmts},
        )
        stmt.catch_params = catch_params  # type: ignore[attr-defined]
        return stmt, after

    def _parse_flow_exit(self, k: int, stop: int, kind: str):
        toks = self.tokens
        end = self._scan_to_semicolon(k, stop)
        expr_tokens = toks[k + 1 : end]
        uses, calls = analyze_expression(expr_tokens, self.raw)
        stmt = Statement(
            kind=kind,
            text=self._text(k, end + 1),
            line=toks[k].line,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
        )
        return stmt, end + 1

    def _scan_to_semicolon(self, k: int, stop: int) -> int:
        """Index of the terminating ';' starting at k, skipping nested brackets
        and brace pairs (array initializers, anonymous classes)."""
        depth = 0
        j = k
        while j < stop:
            t = self.tokens[j].text
            if t in "([":
                depth += 1
            elif t in ")]":
                depth -= 1
            elif t == "{":
                j = _match_forward(self.tokens, j, "{", "}")
            elif t == ";" and depth == 0:
                return j
            j += 1
        return stop - 1

    def _parse_simple(self, k: int, stop: int):
        toks = self.tokens
        # unknown compound statement (switch, synchronized, labeled blocks):
        # spans to the matching brace without a semicolon in between
        j = k
        depth = 0
        while j < stop:
            t = toks[j].text
            if t in "([":
                depth += 1
            elif t in ")]":
                depth -= 1
            elif t == ";" and depth == 0:
                break
            elif t == "{" and depth == 0:
                close = _match_forward(toks, j, "{", "}")
                end = close + 1
                if end < stop and toks[end].text == ";":
                    end += 1
                stmt = Statement(
                    kind="opaque",
                    text=self._text(k, end),
                    line=toks[k].line,
                    uses=set(lexical_identifiers(toks[k:end])),
                )
                stmt.traced_uses = set(stmt.uses)
                return stmt, end
            j += 1
        end = j  # index of ';' or stop
        span = toks[k:end]
        defs, uses, calls, kind, arg_exprs = self._classify_statement_span(span)
        stmt = Statement(
            kind=kind,
            text=self._text(k, min(end + 1, stop)),
            line=toks[k].line,
            defs=defs,
            uses=set(uses),
            traced_uses=set(uses),
            calls=calls,
            arg_exprs=arg_exprs,
        )
        if kind == "opaque":
            stmt.defs = set()
            stmt.uses = set(lexical_identifiers(span))
            stmt.traced_uses = set(stmt.uses)
        return stmt, end + 1

    def _top_level_assign_index(self, span: list[Token]) -> int:
        depth = 0
        for idx, tok in enumerate(span):
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                depth -= 1
            elif depth == 0 and tok.text in ASSIGN_OPS:
                return idx
        return -1

    def _looks_like_declaration(self, lhs: list[Token]) -> bool:
        """True when the tokens before '=' (or the whole span) read as 'Type name'."""
        if len(lhs) < 2 or lhs[-1].kind != "ident" or lhs[-1].text in JAVA_KEYWORDS:
            return False
        before = lhs[-2]
        if before.kind == "ident":
            return True
        return before.text in (">", "]", "...")

    def _classify_simple_span(self, span: list[Token]):
        defs, uses, calls, _kind, _args = self._classify_statement_span(span)
        return defs, uses, calls

    def _classify_statement_span(
        self, span: list[Token]
    ) -> tuple[set[str], list[str], list[CallExpr], str, list[str]]:
        if not span:
            return set(), [], [], "opaque", []
        # strip leading modifiers ("final", annotations)
        start = 0
        while start < len(span):
            t = span[start]
            if t.text == "final":
                start += 1
                continue
            if t.text == "@":
                start += 1
                if start < len(span) and span[start].kind == "ident":
                    start += 1
                if start < len(span) and span[start].text == "(":
                    start = _match_forward(span, start, "(", ")") + 1
                continue
            break
        span = span[start:]
        if not span:
            return set(), [], [], "opaque", []

        eq = self._top_level_assign_index(span)
        if eq > 0:
            lhs = span[:eq]
            rhs = span[eq + 1 :]
            op = span[eq].text
            rhs_uses, rhs_calls = analyze_expression(rhs, self.raw)
            if op == "=" and self._looks_like_declaration(lhs):
                name = lhs[-1].text
                # multi-declarator tails ("int a = 1, b = 2") handled over the rhs
                defs = {name}
                extra_uses: list[str] = []
                for a, b in _split_top_level(rhs)[1:]:
                    part = rhs[a:b]
                    sub_eq = self._top_level_assign_index(part)
                    if sub_eq > 0 and part[0].kind == "ident":
                        defs.add(part[0].text)
                return defs, rhs_uses + extra_uses, rhs_calls, "declaration", []
            if len(lhs) == 1 and lhs[0].kind == "ident" and lhs[0].text not in JAVA_KEYWORDS:
                uses = list(rhs_uses)
                if op != "=":
                    uses.append(lhs[0].text)
                return {lhs[0].text}, uses, rhs_calls, "assignment", []
            lhs_uses, lhs_calls = analyze_expression(lhs, self.raw)
            return set(), lhs_uses + rhs_uses, lhs_calls + rhs_calls, "assignment", []

        # declaration without initializer: "Type name;" / "Type name"
        if self._looks_like_declaration(span) and not any(t.text == "(" for t in span):
            return {span[-1].text}, [], [], "declaration", []

        # increment/decrement statements
        texts = [t.text for t in span]
        if "++" in texts or "--" in texts:
            idents = lexical_identifiers(span)
            if len(idents) == 1:
                return {idents[0]}, [idents[0]], [], "assignment", []

        uses, calls = analyze_expression(span, self.raw)
        if calls:
            outer = calls[-1]  # outermost call is analyzed last at this level
            # statement-level call: the span ends with the closing paren
            if span[-1].text == ")":
                return set(), uses, calls, "call", list(outer.arg_texts)
        if span and all(t.kind in ("ident", "punct") for t in span) and not calls:
            # bare identifier chains etc.: keep as opaque
            return set(), uses, calls, "opaque", []
        return set(), uses, calls, "opaque" if not calls else "call", []


# ---------------------------------------------------------------------------
# Compilation unit parsing


def _skip_annotations(tokens: list[Token], k: int) -> int:
    while k < len(tokens) and tokens[k].text == "@":
        k += 1
        while k < len(tokens) and tokens[k].kind == "ident":
            k += 1
            if k < len(tokens) and tokens[k].text == ".":
                k += 1
                continue
            break
        if k < len(tokens) and tokens[k].text == "(":
            k = _match_forward(tokens, k, "(", ")") + 1
    return k


def _parse_parameters(tokens: list[Token], raw: str) -> list[tuple[str, str]]:
    params: list[tuple[str, str]] = []
    if not tokens:
        return params
    for a, b in _split_top_level(tokens):
        part = tokens[a:b]
        j = _skip_annotations(part, 0)
        part = [t for t in part[j:] if t.text != "final"]
        if not part:
            continue
        if part[-1].kind == "ident":
            name = part[-1].text
            type_text = span_text(raw, part[:-1]).strip()
            params.append((name, type_text))
    return params


def parse_compilation_unit(text: str, path: str = "<memory>") -> SourceUnit:
    """Parse one Java file into a SourceUnit.

    Unsupported constructs degrade into opaque statements; only unmatched
    braces reject the file.
    """
    tokens = tokenize(text)
    package = ""
    types: list[TypeDecl] = []
    k = 0
    n = len(tokens)
    while k < n:
        tok = tokens[k]
        if tok.text == "package":
            j = k + 1
            parts = []
            while j < n and tokens[j].text != ";":
                parts.append(tokens[j].text)
                j += 1
            package = "".join(parts)
            k = j + 1
            continue
        if tok.text == "import":
            while k < n and tokens[k].text != ";":
                k += 1
            k += 1
            continue
        if tok.text in ("class", "interface", "enum"):
            decl, k = _parse_type(tokens, k, text, package, [])
            if decl is not None:
                types.append(decl)
            continue
        k += 1
    return SourceUnit(path=path, package=package, types=types, raw_text=text)


def _parse_type(
    tokens: list[Token], k: int, raw: str, package: str, outer_names: list[str]
) -> tuple[Optional[TypeDecl], int]:
    kind = tokens[k].text
    n = len(tokens)
    k += 1
    if k >= n or tokens[k].kind != "ident":
        return None, k
    name = tokens[k].text
    # skip to the type body, ignoring generics / extends / implements
    j = k + 1
    while j < n and tokens[j].text != "{":
        j += 1
    if j >= n:
        return None, j
    close = _match_forward(tokens, j, "{", "}")
    qualifier_parts = ([package] if package else []) + outer_names + [name]
    functions: list[FunctionDecl] = []
    nested: list[TypeDecl] = []
    _parse_type_body(
        tokens, j + 1, close, raw, package, outer_names + [name], functions, nested
    )
    decl = TypeDecl(name=name, kind=kind, functions=functions, nested=nested)
    del qualifier_parts
    return decl, close + 1


def _parse_type_body(
    tokens: list[Token],
    start: int,
    stop: int,
    raw: str,
    package: str,
    type_names: list[str],
    functions: list[FunctionDecl],
    nested: list[TypeDecl],
) -> None:
    k = start
    n = stop
    qualifier = ".".join(([package] if package else []) + type_names)
    while k < n:
        tok = tokens[k]
        if tok.text == ";":
            k += 1
            continue
        member_start = k
        k = _skip_annotations(tokens, k)
        while k < n and tokens[k].text in MODIFIER_KEYWORDS:
            k += 1
        if k < n and tokens[k].text in ("class", "interface", "enum"):
            decl, k = _parse_type(tokens, k, raw, package, type_names)
            if decl is not None:
                nested.append(decl)
            continue
        if k < n and tokens[k].text == "{":
            # static/instance initializer block: skipped (not a method)
            k = _match_forward(tokens, k, "{", "}") + 1
            continue
        # scan the member signature up to '(', ';' or '{'
        j = k
        depth = 0
        paren_at = -1
        while j < n:
            t = tokens[j].text
            if t == "<":
                depth += 1
            elif t == ">":
                depth = max(0, depth - 1)
            elif depth == 0 and t == "(":
                paren_at = j
                break
            elif depth == 0 and t in (";", "{", "="):
                break
            j += 1
        if paren_at < 0:
            # field or unparsable member: skip to ';' (brace-aware for initializers)
            j = k
            while j < n:
                t = tokens[j].text
                if t == "{":
                    j = _match_forward(tokens, j, "{", "}")
                elif t == ";":
                    break
                j += 1
            k = j + 1
            continue
        params_close = _match_forward(tokens, paren_at, "(", ")")
        # after params: throws clause, then '{' body or ';'
        j = params_close + 1
        while j < n and tokens[j].text not in ("{", ";"):
            j += 1
        if j >= n or tokens[j].text == ";":
            k = j + 1
            continue
        body_close = _match_forward(tokens, j, "{", "}")
        name_tok = tokens[paren_at - 1]
        if name_tok.kind != "ident":
            k = body_close + 1
            continue
        parser = _StatementParser(tokens, raw)
        body = parser.parse_block_body(j + 1, body_close)
        start_tok = tokens[member_start]
        end_tok = tokens[body_close]
        functions.append(
            FunctionDecl(
                qualified_name=f"{qualifier}.{name_tok.text}",
                parameters=_parse_parameters(tokens[paren_at + 1 : params_close], raw),
                body=body,
                span=(start_tok.line, end_tok.line),
                text=raw[start_tok.offset : end_tok.end],
            )
        )
        k = body_close + 1


def parse_source_file(path: str | Path) -> SourceUnit:
    """Read and parse a .java file; raises EncodingError on non-UTF-8 bytes."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path}: {exc}") from exc
    return parse_compilation_unit(text, path=str(path))


# ---------------------------------------------------------------------------
# Control flow graphs


@dataclass
class ControlFlowGraph:
    nodes: list[Statement]
    edges: list[tuple[int, int]]
    entry: int
    exits: set[int]
    successors: dict[int, list[int]] = field(default_factory=dict)
    predecessors: dict[int, list[int]] = field(default_factory=dict)
    node_index: dict[int, int] = field(default_factory=dict)  # id(stmt) -> index

    def index_of(self, stmt: Statement) -> int:
        return self.node_index[id(stmt)]


def build_cfg(f: FunctionDecl) -> ControlFlowGraph:
    """Statement-granular CFG: straight-line code is a path graph, if/else a
    diamond, loops get a back edge, try-body nodes all flow to the catch entry."""
    nodes: list[Statement] = f.statements()
    index = {id(s): i for i, s in enumerate(nodes)}
    edges: list[tuple[int, int]] = []
    edge_seen: set[tuple[int, int]] = set()

    def add_edge(a: int, b: int) -> None:
        if (a, b) not in edge_seen:
            edge_seen.add((a, b))
            edges.append((a, b))

    def wire_list(stmts: list[Statement]) -> tuple[Optional[int], list[int]]:
        """Returns (entry_index, exit_indices) for a statement sequence."""
        entry: Optional[int] = None
        prev_exits: list[int] = []
        for s in stmts:
            s_entry, s_exits = wire_stmt(s)
            if entry is None:
                entry = s_entry
            for p in prev_exits:
                add_edge(p, s_entry)
            prev_exits = s_exits
        return entry, prev_exits

    def wire_stmt(s: Statement) -> tuple[int, list[int]]:
        i = index[id(s)]
        if s.kind == "if":
            then_entry, then_exits = wire_list(s.groups.get("then", []))
            else_entry, else_exits = wire_list(s.groups.get("else", []))
            exits: list[int] = []
            if then_entry is not None:
                add_edge(i, then_entry)
                exits.extend(then_exits)
            else:
                exits.append(i)
            if else_entry is not None:
                add_edge(i, else_entry)
                exits.extend(else_exits)
            elif then_entry is not None:
                exits.append(i)  # fall-through when the condition is false
            return i, exits
        if s.kind == "loop":
            body_entry, body_exits = wire_list(s.groups.get("body", []))
            if body_entry is not None:
                add_edge(i, body_entry)
                for e in body_exits:
                    add_edge(e, i)  # back edge
            entry = i
            if s.loop_flavor == "do" and body_entry is not None:
                entry = body_entry
            return entry, [i]
        if s.kind == "try":
            body_entry, body_exits = wire_list(s.groups.get("body", []))
            catch_entry, catch_exits = wire_list(s.groups.get("catch", []))
            final_entry, final_exits = wire_list(s.groups.get("finally", []))
            if body_entry is not None:
                add_edge(i, body_entry)
            else:
                body_exits = [i]
            if catch_entry is not None:
                # exceptions may occur anywhere in the body
                for child in _body_nodes(s):
                    add_edge(index[id(child)], catch_entry)
            exits = list(body_exits) + list(catch_exits)
            if not exits:
                exits = [i] if body_entry is None else []
            if final_entry is not None:
                for e in exits:
                    add_edge(e, final_entry)
                return i, list(final_exits)
            return i, exits
        if s.kind in ("return", "throw"):
            return i, []
        return i, [i]

    def _body_nodes(try_stmt: Statement) -> list[Statement]:
        out: list[Statement] = []
        for child in try_stmt.groups.get("body", []):
            out.extend(child.flat())
        return out

    entry_idx, tail_exits = wire_list(f.body)
    if entry_idx is None:
        entry_idx = 0
    exit_set = set(tail_exits)
    for i, s in enumerate(nodes):
        if s.kind in ("return", "throw"):
            exit_set.add(i)
    succ: dict[int, list[int]] = {i: [] for i in range(len(nodes))}
    pred: dict[int, list[int]] = {i: [] for i in range(len(nodes))}
    for a, b in edges:
        succ[a].append(b)
        pred[b].append(a)
    return ControlFlowGraph(
        nodes=nodes,
        edges=edges,
        entry=entry_idx,
        exits=exit_set,
        successors=succ,
        predecessors=pred,
        node_index=index,
    )


def node_in_cycle(cfg: ControlFlowGraph, node: int) -> bool:
    """True when the node can reach itself through at least one edge."""
    seen: set[int] = set()
    stack = list(cfg.successors.get(node, []))
    while stack:
        cur = stack.pop()
        if cur == node:
            return True
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(cfg.successors.get(cur, []))
    return False


# ---------------------------------------------------------------------------
# Project-level call resolution


@dataclass
class CallGraph:
    edges: dict[tuple[str, int], str]  # (caller qualified_name, line) -> callee qualified_name
    unresolved: set[tuple[str, int]]
    functions: dict[str, FunctionDecl] = field(default_factory=dict)
    _by_signature: dict[tuple[str, int], list[str]] = field(default_factory=dict)

    def resolve(self, name: str, arity: int) -> Optional[FunctionDecl]:
        """Unique project function with this simple name and arity, if any."""
        candidates = self._by_signature.get((name, arity), [])
        if len(candidates) == 1:
            return self.functions[candidates[0]]
        return None


def resolve_calls(units: list[SourceUnit]) -> CallGraph:
    """Match call sites to project functions by simple name + arity.

    Ambiguous (same-arity overloads) and external targets land in
    `unresolved`; every call site goes to exactly one of the two buckets.
    """
    functions: dict[str, FunctionDecl] = {}
    by_signature: dict[tuple[str, int], list[str]] = {}
    for unit in units:
        for f in unit.functions():
            functions[f.qualified_name] = f
            by_signature.setdefault((f.name, len(f.parameters)), []).append(f.qualified_name)
    edges: dict[tuple[str, int], str] = {}
    unresolved: set[tuple[str, int]] = set()
    for unit in units:
        for f in unit.functions():
            for stmt in f.statements():
                for call in stmt.calls:
                    site = (f.qualified_name, call.line)
                    candidates = by_signature.get((call.name, call.arity), [])
                    if len(candidates) == 1 and site not in edges:
                        edges[site] = candidates[0]
                        unresolved.discard(site)
                    elif site not in edges:
                        unresolved.add(site)
    return CallGraph(
        edges=edges,
        unresolved=unresolved,
        functions=functions,
        _by_signature=by_signature,
    )


def discover_sources(root: str | Path, deny_globs: list[str] | None = None) -> list[Path]:
    """All .java files under root, recursively, minus deny-listed path globs."""
    root = Path(root)
    deny = deny_globs or []
    out = []
    for p in sorted(root.rglob("*.java")):
        rel = p.relative_to(root)
        if any(rel.match(g) or p.match(g) for g in deny):
            continue
        out.append(p)
    return out
