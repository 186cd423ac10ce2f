"""Reference fixtures: gold-answer mock scripts and the bundled TikTok walkthrough."""

from __future__ import annotations

import json
from importlib import resources
from itertools import combinations

from .dataset import Instruction, instruction_from_dict
from .exploration import build_exploration_prompt, render_exploration
from .llm import MockBackend, ScriptEntry
from .memory import MemoryStore
from .perception import PerceptionResult, build_perception_prompt
from .simenv import Scenario, scenario_from_data
from .text import normalize_phrase


def _info_kinds(record: Instruction) -> dict[str, str]:
    spans = record.placeholder_spans() or []
    kinds = {}
    for span, kind in zip(spans, record.info_types):
        kinds.setdefault(normalize_phrase(span), kind)
    return kinds


def gold_entries(record: Instruction, scenario: Scenario) -> list[ScriptEntry]:
    """Exact-match entries answering every prompt the pipeline can send for ``record``.

    Exploration prompts depend on which elements memory already holds, so one entry
    is generated per non-empty subset of the gold elements.
    """
    elements = record.gold_elements
    verdict = PerceptionResult(bool(elements), tuple(elements)).serialize()
    entries = [ScriptEntry(build_perception_prompt(record.text), verdict, exact=True)]
    if not elements or not scenario.app_names:
        return entries
    kinds = _info_kinds(record)
    for size in range(1, len(elements) + 1):
        for subset in combinations(elements, size):
            lines = []
            for e in subset:
                holders = scenario.holders(e)
                if not holders:
                    break
                lines.append(render_exploration(holders[0], e, kinds.get(normalize_phrase(e), "")))
            else:
                prompt = build_exploration_prompt(record.text, subset, scenario.app_names)
                entries.append(ScriptEntry(prompt, "\n".join(lines), exact=True))
    return entries


def gold_backend(corpus, scenario: Scenario) -> MockBackend:
    entries = []
    for record in sorted(corpus, key=lambda r: r.id):
        entries.extend(gold_entries(record, scenario))
    return MockBackend(entries, strict=True)


def _data(*parts: str):
    node = resources.files("perpilot.data")
    for p in parts:
        node = node.joinpath(p)
    return json.loads(node.read_text(encoding="utf-8"))


def full_scenario() -> Scenario:
    """Ground truth covering every gold element of the bundled corpus."""
    return scenario_from_data(_data("scenario_full.json"))


def walkthrough():
    """(record, scenario, scripted backend, pre-seeded memory) for the TikTok walkthrough."""
    record = instruction_from_dict(_data("walkthrough", "record.json"))
    scenario = scenario_from_data(_data("walkthrough", "scenario.json"))
    backend = MockBackend.from_data(_data("walkthrough", "script.json"))
    mem = _data("walkthrough", "memory.json")
    return record, scenario, backend, MemoryStore(mem["profile_id"], mem["entries"])
