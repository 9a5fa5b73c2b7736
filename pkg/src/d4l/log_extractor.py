"""Recognition and decomposition of logging statements.

A logging call is split into its level, static template (literal segments,
`{}` placeholders, concatenated expressions), dynamic arguments, trailing
throwable, and an optional level-check guard.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .source_model import (
    CallExpr,
    FunctionDecl,
    Statement,
    analyze_expression,
    tokenize,
)

LEVELS = ("trace", "debug", "info", "warn", "error", "fatal")
LEVEL_RANK = {name: i for i, name in enumerate(LEVELS)}

DEFAULT_LOGGER_REGEX = r"(?i)^(log|logger|.*_log)$"
DEFAULT_THROWABLE_NAMES = ("e", "ex", "t", "ie", "exception", "throwable")

_GUARD_RE = re.compile(r"\bis[A-Z][A-Za-z]*Enabled\s*\(")


class NotAStringHead(Exception):
    """First call argument is neither a string literal nor a concatenation
    containing one."""


@dataclass(frozen=True)
class Segment:
    kind: str  # literal | placeholder | concat_expr
    text: str = ""


@dataclass
class LogTemplate:
    segments: list[Segment]
    placeholder_count: int
    uses_concatenation: bool

    def literal_text(self) -> str:
        return "".join(s.text for s in self.segments if s.kind == "literal")

    def reconstruct(self) -> str:
        """Literal content with `{}` reinserted at placeholder positions."""
        out = []
        for s in self.segments:
            if s.kind == "literal":
                out.append(s.text)
            elif s.kind == "placeholder":
                out.append("{}")
        return "".join(out)


@dataclass
class LogStatement:
    location: tuple[str, int]  # (file path, 1-based line)
    level: str
    template: LogTemplate
    args: list[str]
    throwable_last: bool
    guard: Optional[str]
    enclosing_function: FunctionDecl
    statement: Statement
    call: CallExpr = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def line(self) -> int:
        return self.location[1]


@dataclass(frozen=True)
class ExtractorSettings:
    logger_regex: str = DEFAULT_LOGGER_REGEX
    levels: tuple[str, ...] = LEVELS
    throwable_names: tuple[str, ...] = DEFAULT_THROWABLE_NAMES


def _split_literal(content: str) -> tuple[list[Segment], int]:
    """Split raw string-literal content on non-overlapping, unescaped `{}`."""
    segments: list[Segment] = []
    count = 0
    pos = 0
    buf: list[str] = []
    while pos < len(content):
        idx = content.find("{}", pos)
        if idx < 0:
            buf.append(content[pos:])
            break
        if idx > 0 and content[idx - 1] == "\\":
            buf.append(content[pos : idx + 2])
            pos = idx + 2
            continue
        buf.append(content[pos:idx])
        segments.append(Segment("literal", "".join(buf)))
        buf = []
        segments.append(Segment("placeholder"))
        count += 1
        pos = idx + 2
    tail = "".join(buf)
    if tail or not segments:
        segments.append(Segment("literal", tail))
    return segments, count


def parse_template(call_argument_exprs: list[str]) -> LogTemplate:
    """Decompose the first call argument into a LogTemplate.

    String literals split on `{}` into literal/placeholder segments;
    `+`-joined non-literal operands become concat_expr segments. Raises
    NotAStringHead when no string literal is present in the head expression.
    """
    if not call_argument_exprs:
        raise NotAStringHead("logging call has no arguments")
    head = call_argument_exprs[0]
    tokens = tokenize(head)
    # split the head on top-level '+'
    operands: list[list] = [[]]
    depth = 0
    for tok in tokens:
        if tok.text in "([{":
            depth += 1
        elif tok.text in ")]}":
            depth -= 1
        if tok.text == "+" and depth == 0:
            operands.append([])
        else:
            operands[-1].append(tok)

    segments: list[Segment] = []
    count = 0
    uses_concat = False
    saw_literal = False
    for op_tokens in operands:
        if len(op_tokens) == 1 and op_tokens[0].kind == "str":
            saw_literal = True
            content = op_tokens[0].text[1:-1]
            segs, c = _split_literal(content)
            segments.extend(segs)
            count += c
        elif op_tokens:
            text = head[op_tokens[0].offset : op_tokens[-1].end]
            segments.append(Segment("concat_expr", text))
            uses_concat = True
    if not saw_literal:
        raise NotAStringHead(f"first argument is not string-headed: {head!r}")
    return LogTemplate(segments=segments, placeholder_count=count, uses_concatenation=uses_concat)


def looks_like_throwable(expr: str, throwable_names: tuple[str, ...] = DEFAULT_THROWABLE_NAMES) -> bool:
    name = expr.strip()
    return name in throwable_names or name.endswith("Exception") or name.endswith("Throwable")


def is_logging_call(call: CallExpr, settings: ExtractorSettings) -> bool:
    if call.name.lower() not in settings.levels:
        return False
    if call.receiver is not None and re.match(settings.logger_regex, call.receiver):
        return True
    # any receiver counts when the first argument is a string expression
    if call.arg_texts and '"' in call.arg_texts[0] and call.receiver is not None:
        return True
    return False


def _guard_text(stack: list[Statement]) -> Optional[str]:
    """Condition text of the nearest enclosing level-check conditional."""
    for ancestor in reversed(stack):
        if ancestor.kind == "if":
            cond = ancestor.head_text[len("if (") : -1]
            if _GUARD_RE.search(cond):
                return cond
            return None
    return None


def find_logging_calls(
    f: FunctionDecl,
    file_path: str = "<memory>",
    settings: ExtractorSettings | None = None,
) -> list[LogStatement]:
    """Every logging call in the function, in source order.

    A call qualifies when its receiver matches the logger-name heuristic (or
    any receiver with a string first argument) and its method is a level
    name. The guard is the nearest enclosing `is<Level>Enabled` conditional.
    """
    settings = settings or ExtractorSettings()
    results: list[LogStatement] = []

    def visit(stmts: list[Statement], stack: list[Statement]) -> None:
        for s in stmts:
            if s.kind == "call":
                for call in s.calls:
                    if not is_logging_call(call, settings):
                        continue
                    try:
                        template = parse_template(list(call.arg_texts))
                    except NotAStringHead:
                        continue
                    args = list(call.arg_texts[1:])
                    throwable_last = bool(args) and looks_like_throwable(
                        args[-1], settings.throwable_names
                    )
                    results.append(
                        LogStatement(
                            location=(file_path, s.line),
                            level=call.name.lower(),
                            template=template,
                            args=args,
                            throwable_last=throwable_last,
                            guard=_guard_text(stack),
                            enclosing_function=f,
                            statement=s,
                            call=call,
                        )
                    )
                    break  # one LogStatement per call statement
            for group in s.groups.values():
                visit(group, stack + [s])

    visit(f.body, [])
    results.sort(key=lambda ls: ls.line)
    return results


def log_argument_variables(stmt: LogStatement) -> list[str]:
    """Variables lexically used in the log arguments and concat segments,
    in order of first appearance."""
    out: list[str] = []
    seen: set[str] = set()

    def add_from(expr: str) -> None:
        uses, _ = analyze_expression(tokenize(expr), expr)
        for name in uses:
            if name not in seen:
                seen.add(name)
                out.append(name)

    for seg in stmt.template.segments:
        if seg.kind == "concat_expr":
            add_from(seg.text)
    for arg in stmt.args:
        add_from(arg)
    return out


def line_has_logging_call(line_text: str, settings: ExtractorSettings | None = None) -> bool:
    """Lexical check used by the commit miner and dataset validation."""
    settings = settings or ExtractorSettings()
    level_alt = "|".join(settings.levels)
    pattern = re.compile(
        rf"(?i)\b([A-Za-z_$][A-Za-z0-9_$]*)\s*\.\s*({level_alt})\s*\("
    )
    for m in pattern.finditer(line_text):
        receiver = m.group(1)
        if re.match(settings.logger_regex, receiver):
            return True
        rest = line_text[m.end() :]
        if rest.lstrip().startswith('"'):
            return True
    return False
