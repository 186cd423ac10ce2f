"""The perceive -> retrieve -> explore -> intervene -> complete -> judge pipeline."""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

from .dataset import Instruction
from .exploration import PlanError, parse_agent_report, plan_exploration
from .llm import Backend, BackendError, LlmConfig
from .memory import Completed, MemoryStore, Missing, Partial, SubstitutionError, retrieve_complete
from .perception import GrammarError, build_perception_prompt, parse_perception
from .simenv import Scenario, UnknownApp, explore, judge
from .text import normalize_phrase

log = logging.getLogger(__name__)


class Source(str, Enum):
    MEMORY = "Memory"
    EXPLORATION = "Exploration"
    HUMAN = "Human"
    UNRESOLVED = "Unresolved"


class Stage(str, Enum):
    PERCEIVE = "perceive"
    RETRIEVE = "retrieve"
    EXPLORE = "explore"
    INTERVENE = "intervene"
    COMPLETE = "complete"
    JUDGE = "judge"


# --- human intervention ----------------------------------------------------


class DisabledHook:
    mode = "disabled"

    def ask(self, element: str, instruction: str) -> str | None:
        return None


class ScriptedHook:
    mode = "scripted"

    def __init__(self, answers: Mapping[str, str]):
        self.answers = {normalize_phrase(k): v for k, v in answers.items()}

    def ask(self, element: str, instruction: str) -> str | None:
        value = self.answers.get(normalize_phrase(element))
        return value if value and value.strip() else None


class InteractiveHook:
    mode = "interactive"

    def __init__(self, read: Callable[[str], str] = input, out=sys.stderr):
        self.read = read
        self.out = out

    def ask(self, element: str, instruction: str) -> str | None:
        print(f"Instruction: {instruction}", file=self.out)
        try:
            value = self.read(f"What does {element!r} refer to? (blank to skip) ").strip()
        except EOFError:
            return None
        return value or None


# --- trace -----------------------------------------------------------------


@dataclass
class RunTrace:
    instruction_id: int
    instruction: str
    perception: str | None = None
    retrieval: dict | None = None
    explorations: list = field(default_factory=list)
    interventions: list = field(default_factory=list)
    final_instruction: str | None = None
    success: bool = False
    reason: str = ""
    sources: dict = field(default_factory=dict)
    gold_sources: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def event(self, stage: Stage, kind: str, **detail) -> None:
        self.events.append({"stage": stage.value, "kind": kind, **detail})

    def fail(self, stage: Stage, error: Exception | str) -> None:
        self.failures.append({"stage": stage.value, "error": str(error)})
        self.event(stage, "error", error=str(error))

    @property
    def perceived_elements(self) -> list[str]:
        return list(self.sources)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunTrace":
        return cls(**data)


def _retrieval_record(outcome) -> dict:
    if isinstance(outcome, Completed):
        return {"case": "Y", "text": outcome.text}
    if isinstance(outcome, Partial):
        return {"case": "Part", "text": outcome.text, "remaining": list(outcome.remaining)}
    return {"case": "N", "remaining": list(outcome.elements)}


def _assign_gold_sources(trace: RunTrace, record: Instruction) -> None:
    by_key = {normalize_phrase(e): s for e, s in trace.sources.items()}
    trace.gold_sources = {
        e: by_key.get(normalize_phrase(e), Source.UNRESOLVED.value) for e in record.gold_elements
    }


def _finish(trace: RunTrace, record: Instruction, scenario: Scenario, final: str, judged: bool = True) -> RunTrace:
    trace.final_instruction = final
    if judged:
        verdict = judge(final, record, scenario)
        trace.success, trace.reason = verdict.success, verdict.reason
        trace.event(Stage.JUDGE, "verdict", success=verdict.success, reason=verdict.reason)
    if trace.success and Source.UNRESOLVED.value in trace.sources.values():
        trace.success, trace.reason = False, "unresolved element"
    _assign_gold_sources(trace, record)
    return trace


def run_one(
    record: Instruction,
    store: MemoryStore,
    scenario: Scenario,
    backend: Backend,
    hook=None,
    config: LlmConfig | None = None,
) -> RunTrace:
    """Run one instruction through the pipeline. Never raises for stage failures."""
    hook = hook or DisabledHook()
    text = record.text
    trace = RunTrace(instruction_id=record.id, instruction=text)

    # perceive
    try:
        raw = backend.complete(build_perception_prompt(text), config)
        trace.event(Stage.PERCEIVE, "llm", response=raw)
        perceived = parse_perception(raw)
    except (BackendError, GrammarError) as exc:
        trace.fail(Stage.PERCEIVE, exc)
        trace.reason = f"perception failed: {exc}"
        return _finish(trace, record, scenario, text, judged=False)
    trace.perception = perceived.serialize()
    if not perceived.is_personalized:
        return _finish(trace, record, scenario, text)
    elements = perceived.elements

    # memory retrieval
    try:
        outcome = retrieve_complete(text, elements, store)
    except SubstitutionError as exc:
        trace.fail(Stage.RETRIEVE, exc)
        trace.sources = {e: Source.UNRESOLVED.value for e in elements}
        trace.reason = f"retrieval failed: {exc}"
        return _finish(trace, record, scenario, text, judged=False)
    trace.retrieval = _retrieval_record(outcome)
    trace.event(Stage.RETRIEVE, "outcome", **trace.retrieval)
    remaining = () if isinstance(outcome, Completed) else (
        outcome.remaining if isinstance(outcome, Partial) else outcome.elements
    )
    sources = {e: Source.MEMORY.value for e in elements if e not in remaining}

    # exploration, one planning call then one device session per element
    failed: list[str] = []
    if remaining:
        try:
            plan = plan_exploration(text, remaining, scenario.app_names, backend, config)
            trace.event(Stage.EXPLORE, "plan", instructions=[p.text for p in plan])
        except (BackendError, PlanError, ValueError) as exc:
            trace.fail(Stage.EXPLORE, exc)
            plan = []
            failed = list(remaining)
        for step in plan:
            attempt = {"app": step.app, "element": step.element, "instruction": step.text}
            try:
                raw_report = explore(step, scenario).to_raw()
            except UnknownApp as exc:
                raw_report = None
                attempt["error"] = str(exc)
            report = parse_agent_report(raw_report) if raw_report is not None else None
            attempt["report"] = raw_report
            trace.explorations.append(attempt)
            trace.event(Stage.EXPLORE, "attempt", **attempt)
            if report is not None and report.finished:
                store.store(step.element, report.info)
                trace.event(Stage.EXPLORE, "memory_write", element=step.element, value=report.info)
                sources[step.element] = Source.EXPLORATION.value
            else:
                failed.append(step.element)

    # ask the user only after exploration has failed
    for element in failed:
        value = hook.ask(element, text)
        trace.interventions.append({"element": element, "value": value})
        trace.event(Stage.INTERVENE, "ask", element=element, value=value)
        if value:
            store.store(element, value)
            trace.event(Stage.INTERVENE, "memory_write", element=element, value=value)
            sources[element] = Source.HUMAN.value
        else:
            sources[element] = Source.UNRESOLVED.value
    trace.sources = {e: sources[e] for e in elements}

    final_outcome = retrieve_complete(text, elements, store)
    final = text if isinstance(final_outcome, Missing) else final_outcome.text
    trace.event(Stage.COMPLETE, "outcome", **_retrieval_record(final_outcome))
    return _finish(trace, record, scenario, final)


def run_corpus(
    corpus: Iterable[Instruction],
    store: MemoryStore,
    scenario: Scenario,
    backend: Backend,
    hook=None,
    config: LlmConfig | None = None,
    fail_fast: bool = False,
    on_progress: Callable[[int, int, RunTrace], None] | None = None,
) -> list[RunTrace]:
    """Run records in id order, threading one memory store through all of them."""
    records = sorted(corpus, key=lambda r: r.id)
    traces = []
    for i, record in enumerate(records, 1):
        trace = run_one(record, store, scenario, backend, hook, config)
        traces.append(trace)
        log.debug("record %d: success=%s %s", record.id, trace.success, trace.reason)
        if on_progress:
            on_progress(i, len(records), trace)
        if fail_fast and not trace.success:
            break
    return traces


def dump_traces(traces: Iterable[RunTrace], fh) -> None:
    for t in traces:
        fh.write(t.to_json() + "\n")


def load_traces(fh) -> list[RunTrace]:
    return [RunTrace.from_dict(json.loads(line)) for line in fh if line.strip()]
