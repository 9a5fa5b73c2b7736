"""The defect taxonomy: 7 patterns, 14 scenarios, label normalization.

Pattern and scenario definitions live in a versioned TOML data file so they
can be rendered verbatim into prompts and swapped out for ablations.
"""

from __future__ import annotations

import hashlib
import re
import sys
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PATTERN_CODES = ("RD", "VR", "LV", "SM", "SS", "IS", "PF")
NO_DEFECT = "NO_DEFECT"
LABELS = PATTERN_CODES + (NO_DEFECT,)

# accepted besides the canonical pattern names
_NAME_ALIASES = {
    "semantics inconsistent with context": "SM",
    "performance issue": "PF",
}

_NO_DEFECT_PHRASES = (
    "no defect",
    "no_defect",
    "nodefect",
    "none",
    "no issue",
    "no issues",
    "not defective",
    "non-defective",
)


class UnknownPattern(Exception):
    pass


class UnparsableLabel(Exception):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    name: str
    explanation: str


@dataclass(frozen=True)
class PatternSpec:
    code: str
    name: str
    description: str
    scenarios: tuple[ScenarioSpec, ...]


class Taxonomy:
    def __init__(self, patterns: list[PatternSpec], raw_bytes: bytes):
        self.patterns = patterns
        self._by_code = {p.code: p for p in patterns}
        self.data_hash = hashlib.sha256(raw_bytes).hexdigest()

    def lookup(self, code: str) -> PatternSpec:
        normalized = code.strip().upper()
        spec = self._by_code.get(normalized)
        if spec is None:
            raise UnknownPattern(f"unknown defect pattern code: {code!r}")
        return spec

    def scenario(self, scenario_id: str) -> ScenarioSpec:
        pattern_code = scenario_id.split("-", 1)[0].upper()
        for s in self.lookup(pattern_code).scenarios:
            if s.id.lower() == scenario_id.strip().lower():
                return s
        raise UnknownPattern(f"unknown scenario id: {scenario_id!r}")

    def scenario_ids(self) -> list[str]:
        return [s.id for p in self.patterns for s in p.scenarios]

    def render_knowledge(self, include_scenarios: bool) -> str:
        """Deterministic text listing the 7 patterns; with scenarios, each
        pattern is followed by its scenario names and explanations."""
        lines: list[str] = []
        for p in self.patterns:
            lines.append(f"- {p.code}: {p.name}. {p.description}")
            if include_scenarios:
                for s in p.scenarios:
                    lines.append(f"    - {s.id} {s.name}: {s.explanation}")
        return "\n".join(lines) + "\n"

    def validate_label(self, s: str) -> str:
        """Normalize a pattern code, pattern name, or no-defect phrasing to
        the closed label set; ambiguous multi-label strings are rejected."""
        if not isinstance(s, str) or not s.strip():
            raise UnparsableLabel(f"empty label: {s!r}")
        text = s.strip().strip(".").strip()
        lowered = text.lower()
        if text.upper() in self._by_code:
            return text.upper()
        if lowered in _NO_DEFECT_PHRASES:
            return NO_DEFECT
        for p in self.patterns:
            if lowered == p.name.lower():
                return p.code
        if lowered in _NAME_ALIASES:
            return _NAME_ALIASES[lowered]
        # mention scan: exactly one distinct code or name may appear
        mentioned: list[str] = []
        for code in PATTERN_CODES:
            if re.search(rf"\b{code}\b", text):
                mentioned.append(code)
        if not mentioned:
            for p in self.patterns:
                if p.name.lower() in lowered:
                    mentioned.append(p.code)
            if any(phrase in lowered for phrase in _NO_DEFECT_PHRASES):
                mentioned.append(NO_DEFECT)
        distinct = sorted(set(mentioned))
        if len(distinct) == 1:
            return distinct[0]
        raise UnparsableLabel(f"cannot map {s!r} to a single label")

    def valid_pair(self, label: str, scenario_id: Optional[str]) -> bool:
        """True when the scenario belongs to the label's pattern."""
        if label == NO_DEFECT:
            return scenario_id is None
        if label not in self._by_code:
            return False
        if scenario_id is None:
            return True
        return any(s.id == scenario_id for s in self._by_code[label].scenarios)


def _parse_taxonomy(raw: bytes) -> Taxonomy:
    data = tomllib.loads(raw.decode("utf-8"))
    patterns = []
    for p in data["patterns"]:
        scenarios = tuple(
            ScenarioSpec(id=s["id"], name=s["name"], explanation=s["explanation"])
            for s in p.get("scenarios", [])
        )
        patterns.append(
            PatternSpec(
                code=p["code"],
                name=p["name"],
                description=p["description"],
                scenarios=scenarios,
            )
        )
    return Taxonomy(patterns, raw)


@lru_cache(maxsize=8)
def load_taxonomy(path: Optional[str] = None) -> Taxonomy:
    """Packaged taxonomy by default; `path` overrides for ablations."""
    if path:
        raw = Path(path).read_bytes()
    else:
        raw = (
            resources.files("d4l").joinpath("data/taxonomy/taxonomy.toml").read_bytes()
        )
    return _parse_taxonomy(raw)


# module-level conveniences bound to the packaged taxonomy
def lookup(code: str) -> PatternSpec:
    return load_taxonomy().lookup(code)


def render_knowledge(include_scenarios: bool) -> str:
    return load_taxonomy().render_knowledge(include_scenarios)


def validate_label(s: str) -> str:
    return load_taxonomy().validate_label(s)
