"""A deterministic stand-in for a user's phone: per-app fact tables plus ground truth."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .dataset import Instruction
from .exploration import AgentReport, ExplorationInstruction
from .text import PLACEHOLDER, contains_phrase, normalize_phrase, normalize_sentence


class ScenarioError(ValueError):
    pass


class UnknownApp(LookupError):
    pass


def _normalized(table: Mapping[str, str]) -> dict[str, str]:
    return {normalize_phrase(k): v for k, v in table.items()}


@dataclass(frozen=True)
class Scenario:
    profile: Mapping[str, str] = field(default_factory=dict)
    apps: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "profile", MappingProxyType(_normalized(self.profile)))
        apps = {name: MappingProxyType(_normalized(facts)) for name, facts in self.apps.items()}
        object.__setattr__(self, "apps", MappingProxyType(apps))
        aliases = {normalize_phrase(a): normalize_phrase(c) for a, c in self.aliases.items()}
        object.__setattr__(self, "aliases", MappingProxyType(aliases))
        object.__setattr__(self, "_app_index", {normalize_phrase(a): a for a in apps})

    @classmethod
    def empty(cls) -> "Scenario":
        return cls()

    @property
    def app_names(self) -> list[str]:
        return list(self.apps)

    def canonical(self, element: str) -> str:
        key = normalize_phrase(element)
        return self.aliases.get(key, key)

    def truth(self, element: str) -> str | None:
        key = normalize_phrase(element)
        return self.profile.get(key, self.profile.get(self.canonical(key)))

    def facts(self, app: str) -> Mapping[str, str]:
        try:
            return self.apps[self._app_index[normalize_phrase(app)]]
        except KeyError:
            raise UnknownApp(f"app {app!r} is not installed on the simulated device") from None

    def holders(self, element: str) -> list[str]:
        """Apps whose fact table can answer ``element``."""
        keys = {normalize_phrase(element), self.canonical(element)}
        return [name for name, facts in self.apps.items() if keys & facts.keys()]

    def unreachable(self) -> list[str]:
        """Profile elements no app can reveal (only a human can supply them)."""
        return [k for k in self.profile if not self.holders(k)]

    def to_data(self) -> dict:
        return {
            "profile": dict(self.profile),
            "apps": {name: dict(facts) for name, facts in self.apps.items()},
            "aliases": dict(self.aliases),
        }


def scenario_from_data(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be an object with profile/apps/aliases sections")
    for section in ("profile", "apps", "aliases"):
        if not isinstance(data.get(section, {}), dict):
            raise ScenarioError(f"section {section!r} must be a map")
    for app, facts in data.get("apps", {}).items():
        if not isinstance(facts, dict) or not all(isinstance(v, str) and v.strip() for v in facts.values()):
            raise ScenarioError(f"app {app!r}: fact table must map phrases to non-empty strings")
    return Scenario(data.get("profile", {}), data.get("apps", {}), data.get("aliases", {}))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return scenario_from_data(data)


def explore(instr: ExplorationInstruction, scenario: Scenario) -> AgentReport:
    facts = scenario.facts(instr.app)
    key = normalize_phrase(instr.element)
    value = facts.get(key) or facts.get(scenario.canonical(key))
    return AgentReport(True, value) if value else AgentReport(False)


@dataclass(frozen=True)
class ExecutionVerdict:
    success: bool
    reason: str


def expected_instruction(record: Instruction, scenario: Scenario) -> str:
    """The completed form of ``record`` under ``scenario``'s truth values.

    Placeholders whose text span is a gold element take the scenario value;
    spans that are not elements (explicit values in the raw text) stay as written.
    """
    spans = record.placeholder_spans()
    if spans is None:
        raise ScenarioError(f"record {record.id}: completed template does not align with its text")
    gold = {normalize_phrase(e) for e in record.gold_elements}
    values = []
    for span in spans:
        if normalize_phrase(span) in gold:
            value = scenario.truth(span)
            if value is None:
                raise ScenarioError(f"record {record.id}: scenario has no truth value for {span!r}")
            values.append(value)
        else:
            values.append(span)
    parts = PLACEHOLDER.split(record.completed_template)
    out = []
    for i, part in enumerate(parts):
        out.append(part if i % 2 == 0 else values[i // 2])
    return "".join(out)


def judge(final_instruction: str, record: Instruction, scenario: Scenario) -> ExecutionVerdict:
    try:
        expected = expected_instruction(record, scenario)
    except ScenarioError as exc:
        return ExecutionVerdict(False, f"unbound placeholder: {exc}")
    if normalize_sentence(final_instruction) == normalize_sentence(expected):
        return ExecutionVerdict(True, "matches completed form")
    left = [e for e in record.gold_elements if contains_phrase(final_instruction, e)]
    if left:
        return ExecutionVerdict(False, f"unresolved element {left[0]!r}")
    return ExecutionVerdict(False, f"expected {expected!r}")
