import io

import pytest
from hypothesis import given, settings, strategies as st

from perpilot.gold import gold_backend, walkthrough
from perpilot.llm import MockBackend, ScriptEntry
from perpilot.memory import MemoryStore
from perpilot.orchestrator import (
    DisabledHook,
    InteractiveHook,
    RunTrace,
    ScriptedHook,
    Source,
    dump_traces,
    load_traces,
    run_corpus,
    run_one,
)
from perpilot.perception import build_perception_prompt
from perpilot.simenv import Scenario

from conftest import make_record


def test_walkthrough_trace():
    record, scenario, backend, store = walkthrough()
    t = run_one(record, store, scenario, backend)
    assert t.perception == "Yes|my school|my friend"
    assert t.retrieval["case"] == "Part" and t.retrieval["remaining"] == ["my friend"]
    assert t.explorations[0]["instruction"] == "From the app wechat, obtain my friend name information."
    assert t.explorations[0]["report"] == "Stop|jack"
    assert t.final_instruction == "Open TikTok, search for a video about test school, and share it with jack."
    assert t.success
    assert t.sources == {"my school": "Memory", "my friend": "Exploration"}
    assert store.lookup("my friend") == "jack"


def test_runs_are_deterministic(corpus, scenario):
    def once():
        traces = run_corpus(corpus, MemoryStore(), scenario, gold_backend(corpus, scenario))
        buf = io.StringIO()
        dump_traces(traces, buf)
        return buf.getvalue()

    assert once() == once()


def test_trace_round_trip(corpus, scenario):
    traces = run_corpus(corpus[:10], MemoryStore(), scenario, gold_backend(corpus, scenario))
    buf = io.StringIO()
    dump_traces(traces, buf)
    buf.seek(0)
    assert load_traces(buf) == traces


def test_counting_invariant(corpus, scenario):
    traces = run_corpus(corpus, MemoryStore(), scenario, gold_backend(corpus, scenario))
    for t, r in zip(traces, sorted(corpus, key=lambda r: r.id)):
        assert len(t.gold_sources) == len(r.gold_elements)
        assert set(t.gold_sources.values()) <= {s.value for s in Source}


@settings(max_examples=25, deadline=None)
@given(order=st.permutations(list(range(75))))
def test_memory_is_monotone(corpus, scenario, order):
    store = MemoryStore()
    backend = gold_backend(corpus, scenario)
    keys: set = set()
    for i in order[:20]:
        run_one(corpus[i], store, scenario, backend)
        assert keys <= set(store.entries)
        keys = set(store.entries)


def _two_element_setup(scenario_apps):
    rec = make_record(
        text="Call my mother and my father.",
        completed_template="Call {name} and {name}.",
        gold_elements=["my mother", "my father"],
        info_types=["name", "name"],
    )
    sc = Scenario({"my mother": "Ann", "my father": "Bob"}, scenario_apps)
    backend = MockBackend(
        [
            ScriptEntry(build_perception_prompt(rec.text), "Yes|my mother|my father", exact=True),
            ScriptEntry(
                "['my mother', 'my father']",
                "From the app Phone, obtain my mother name.\nFrom the app Phone, obtain my father name.",
            ),
        ]
    )
    return rec, sc, backend


def test_human_hook_fills_after_exploration_fails():
    rec, sc, backend = _two_element_setup({"Phone": {"my mother": "Ann"}})
    store = MemoryStore()
    t = run_one(rec, store, sc, backend, ScriptedHook({"my father": "Bob"}))
    assert t.success
    assert t.sources == {"my mother": "Exploration", "my father": "Human"}
    assert t.interventions == [{"element": "my father", "value": "Bob"}]
    assert store.lookup("my father") == "Bob"


def test_disabled_hook_leaves_unresolved():
    rec, sc, backend = _two_element_setup({"Phone": {"my mother": "Ann"}})
    t = run_one(rec, MemoryStore(), sc, backend, DisabledHook())
    assert not t.success
    assert t.sources["my father"] == Source.UNRESOLVED.value
    assert t.final_instruction == "Call Ann and my father."


def test_interactive_hook_reads_answer():
    out = io.StringIO()
    hook = InteractiveHook(read=lambda prompt: " Bob ", out=out)
    assert hook.ask("my father", "Call my father.") == "Bob"
    assert "Call my father." in out.getvalue()

    def eof(prompt):
        raise EOFError

    assert InteractiveHook(read=eof, out=out).ask("x", "y") is None


def test_perception_grammar_error_fails_record():
    rec = make_record()
    backend = MockBackend([ScriptEntry("Call my mother.", "Perhaps")])
    t = run_one(rec, MemoryStore(), Scenario({"my mother": "Ann"}), backend)
    assert not t.success and t.failures[0]["stage"] == "perceive"


def test_bad_plan_goes_to_intervention():
    rec = make_record()
    backend = MockBackend(
        [ScriptEntry(build_perception_prompt(rec.text), "Yes|my mother", exact=True), ScriptEntry("['my mother']", "no idea")]
    )
    sc = Scenario({"my mother": "Ann"}, {"Phone": {}})
    t = run_one(rec, MemoryStore(), sc, backend, ScriptedHook({"my mother": "Ann"}))
    assert t.failures[0]["stage"] == "explore"
    assert t.success and t.sources == {"my mother": "Human"}


def test_unknown_app_in_plan_fails_element():
    rec = make_record()
    backend = MockBackend(
        [
            ScriptEntry(build_perception_prompt(rec.text), "Yes|my mother", exact=True),
            ScriptEntry("['my mother']", "From the app Phone, obtain my mother."),
        ]
    )
    t = run_one(rec, MemoryStore(), Scenario({"my mother": "Ann"}, {"Phone": {}}), backend)
    assert t.sources == {"my mother": "Unresolved"} and not t.success


def test_fail_fast(corpus):
    traces = run_corpus(corpus, MemoryStore(), Scenario.empty(), MockBackend([]), fail_fast=True)
    assert len(traces) == 1


def test_trace_from_dict():
    t = RunTrace(1, "x")
    assert RunTrace.from_dict(t.to_dict()) == t
