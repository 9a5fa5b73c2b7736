"""Rule-based baseline detectors for statically checkable defect scenarios.

The rules cover placeholder arity (VR-2), unguarded cheap-level
concatenation (PF-2), unguarded logging inside loops (PF-1), sensitive
keywords in arguments and slices (SS-1), and low-severity exception logging
(LV-1, emitted as a candidate). RD, SM, and IS require semantic reasoning
and deliberately have no rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .context_builder import ContextBundle, DataFlowSlice
from .log_extractor import LEVEL_RANK, LogStatement
from .source_model import build_cfg, node_in_cycle
from .taxonomy import NO_DEFECT

DEFAULT_SENSITIVE_KEYWORDS = (
    "password",
    "passwd",
    "pwd",
    "secret",
    "token",
    "credential",
    "apikey",
    "api_key",
    "private_key",
    "jdbc",
)

# single-label priority for the rules baseline: most syntactically certain first
LABEL_PRIORITY = ("VR", "PF", "SS", "LV")

_EXCEPTION_WORD_RE = re.compile(r"\b\w*(Exception|Throwable|Error)\b")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class Finding:
    statement: LogStatement
    pattern: str
    scenario: str
    rationale: str
    rule_id: str


@dataclass
class RuleSettings:
    sensitive_keywords: tuple[str, ...] = DEFAULT_SENSITIVE_KEYWORDS
    disabled_rules: tuple[str, ...] = ()


def rule_placeholder_mismatch(stmt: LogStatement) -> Optional[Finding]:
    """VR-2: placeholder count disagrees with the supplied arguments."""
    expected = len(stmt.args) - (1 if stmt.throwable_last else 0)
    count = stmt.template.placeholder_count
    if count == expected:
        return None
    if stmt.template.uses_concatenation and not stmt.args and count > 0:
        why = (
            f"{count} placeholder(s) appear inside a concatenated message with no "
            "arguments, so they are never substituted"
        )
    else:
        why = f"{count} placeholder(s) but {expected} substitutable argument(s)"
    return Finding(stmt, "VR", "VR-2", why, "placeholder-mismatch")


def rule_costly_string_ops(stmt: LogStatement) -> Optional[Finding]:
    """PF-2: unguarded string concatenation at trace/debug level."""
    if not stmt.template.uses_concatenation:
        return None
    if stmt.level not in ("trace", "debug") or stmt.guard is not None:
        return None
    return Finding(
        stmt,
        "PF",
        "PF-2",
        f"string concatenation in an unguarded {stmt.level}-level call is built "
        "even when the level is disabled",
        "costly-string-ops",
    )


def rule_hot_path_logging(stmt: LogStatement, cfg=None) -> Optional[Finding]:
    """PF-1: unguarded logging at info level or above inside a loop."""
    if LEVEL_RANK[stmt.level] < LEVEL_RANK["info"] or stmt.guard is not None:
        return None
    cfg = cfg if cfg is not None else build_cfg(stmt.enclosing_function)
    if not node_in_cycle(cfg, cfg.index_of(stmt.statement)):
        return None
    return Finding(
        stmt,
        "PF",
        "PF-1",
        f"{stmt.level}-level logging inside a loop body runs on every iteration",
        "hot-path-logging",
    )


def rule_sensitive_keywords(
    stmt: LogStatement,
    slices: list[DataFlowSlice],
    keywords: tuple[str, ...] = DEFAULT_SENSITIVE_KEYWORDS,
) -> Optional[Finding]:
    """SS-1: a sensitive keyword in arguments, template text, or slice chains."""
    haystacks: list[str] = []
    for arg in stmt.args:
        haystacks.extend(_IDENT_RE.findall(arg))
    for seg in stmt.template.segments:
        if seg.kind == "concat_expr":
            haystacks.extend(_IDENT_RE.findall(seg.text))
    haystacks.append(stmt.template.literal_text())
    for s in slices:
        for text, _line in s.chain:
            haystacks.append(text)
    for kw in keywords:
        for hay in haystacks:
            if kw.lower() in hay.lower():
                return Finding(
                    stmt,
                    "SS",
                    "SS-1",
                    f"sensitive keyword {kw!r} appears in {hay!r}",
                    "sensitive-keywords",
                )
    return None


def rule_exception_level(stmt: LogStatement) -> Optional[Finding]:
    """LV-1 candidate: exception context logged below warn severity.

    Triggers on a trailing throwable argument or an exception-like word in
    the message text. The finding is a candidate, not a direction: real
    fixes both raise and lower such levels depending on context.
    """
    if stmt.level not in ("trace", "debug", "info"):
        return None
    exception_in_text = bool(_EXCEPTION_WORD_RE.search(stmt.template.literal_text()))
    if not stmt.throwable_last and not exception_in_text:
        return None
    via = "a trailing throwable argument" if stmt.throwable_last else "exception text in the message"
    return Finding(
        stmt,
        "LV",
        "LV-1",
        f"candidate: exception context ({via}) logged at {stmt.level} level may "
        "deserve a different severity",
        "exception-level",
    )


@dataclass(frozen=True)
class _Rule:
    rule_id: str
    apply: Callable[[LogStatement, ContextBundle, RuleSettings], Optional[Finding]]


_RULES: tuple[_Rule, ...] = (
    _Rule("placeholder-mismatch", lambda s, b, cfg: rule_placeholder_mismatch(s)),
    _Rule("costly-string-ops", lambda s, b, cfg: rule_costly_string_ops(s)),
    _Rule("hot-path-logging", lambda s, b, cfg: rule_hot_path_logging(s)),
    _Rule(
        "sensitive-keywords",
        lambda s, b, cfg: rule_sensitive_keywords(
            s, b.slices if b else [], cfg.sensitive_keywords
        ),
    ),
    _Rule("exception-level", lambda s, b, cfg: rule_exception_level(s)),
)


def run_rules(
    stmt: LogStatement,
    bundle: Optional[ContextBundle] = None,
    settings: Optional[RuleSettings] = None,
) -> list[Finding]:
    """Apply every enabled rule; at most one finding per rule, ordered by rule_id."""
    settings = settings or RuleSettings()
    findings: list[Finding] = []
    for rule in _RULES:
        if rule.rule_id in settings.disabled_rules:
            continue
        hit = rule.apply(stmt, bundle, settings)
        if hit is not None:
            findings.append(hit)
    findings.sort(key=lambda f: f.rule_id)
    return findings


def single_label(findings: list[Finding]) -> str:
    """Collapse findings to one prediction: VR > PF > SS > LV, else NO_DEFECT."""
    present = {f.pattern for f in findings}
    for code in LABEL_PRIORITY:
        if code in present:
            return code
    return NO_DEFECT
