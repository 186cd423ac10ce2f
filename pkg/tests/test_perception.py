import pytest
from hypothesis import given, strategies as st

from perpilot.llm import MockBackend, ScriptEntry
from perpilot.perception import (
    PERCEPTION_PROMPT,
    GrammarError,
    PerceptionResult,
    build_perception_prompt,
    parse_perception,
    perceive,
)


def test_prompt_has_one_slot_and_keeps_examples():
    assert PERCEPTION_PROMPT.count("{instruction}") == 1
    prompt = build_perception_prompt("Call my mother.")
    assert prompt.endswith("Call my mother.") or "Call my mother." in prompt
    assert "{instruction}" not in prompt
    with pytest.raises(ValueError):
        build_perception_prompt("   ")


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("No", PerceptionResult(False)),
        ("  no \n", PerceptionResult(False)),
        ("Yes|my school|my friend", PerceptionResult(True, ("my school", "my friend"))),
        ("yes | my home |my  home|", PerceptionResult(True, ("my home",))),
        ("YES|My Mother|my mother", PerceptionResult(True, ("My Mother",))),
    ],
)
def test_parse_ok(raw, expected):
    assert parse_perception(raw) == expected


@pytest.mark.parametrize("raw", ["", "Yes", "Yes|", "Yes| | ", "Maybe|x", "No|my home", "Sure, yes|home"])
def test_parse_grammar_errors(raw):
    with pytest.raises(GrammarError) as info:
        parse_perception(raw)
    assert info.value.raw == raw


@given(st.text())
def test_parse_never_yields_personalized_without_elements(raw):
    try:
        result = parse_perception(raw)
    except GrammarError:
        return
    assert result.is_personalized == bool(result.elements)


@given(st.lists(st.text(alphabet=st.characters(blacklist_characters="|\n\r"), min_size=1), min_size=1, max_size=5))
def test_serialize_round_trip(elements):
    try:
        result = PerceptionResult(True, tuple(elements))
        parsed = parse_perception(result.serialize())
    except (GrammarError, ValueError):
        return
    assert parsed.normalized() <= result.normalized()


def test_result_invariants():
    with pytest.raises(ValueError):
        PerceptionResult(True, ())
    with pytest.raises(ValueError):
        PerceptionResult(False, ("x",))


def test_perceive_uses_backend():
    backend = MockBackend([ScriptEntry("Call my mother.", "Yes|my mother")])
    assert perceive("Call my mother.", backend).elements == ("my mother",)
