import pytest
from hypothesis import given, strategies as st

from perpilot.exploration import ExplorationInstruction
from perpilot.simenv import (
    Scenario,
    ScenarioError,
    UnknownApp,
    expected_instruction,
    explore,
    judge,
    scenario_from_data,
)

from conftest import make_record


def test_full_scenario_covers_every_gold_element(corpus, scenario):
    for r in corpus:
        for e in r.gold_elements:
            assert scenario.truth(e), (r.id, e)


def test_judge_accepts_expected_form_for_every_record(corpus, scenario):
    for r in corpus:
        assert judge(expected_instruction(r, scenario), r, scenario).success, r.id


def test_judge_rejects_raw_text_of_personalized_records(corpus, scenario):
    for r in corpus:
        verdict = judge(r.text, r, scenario)
        assert verdict.success is (not r.personalized), r.id


@given(st.sampled_from(["upper", "lower", "spaces", "dot"]))
def test_judge_normalization_invariance(mode):
    rec = make_record()
    sc = Scenario({"my mother": "Ann"})
    final = {"upper": "CALL ANN.", "lower": "call ann", "spaces": "  Call   Ann . ", "dot": "Call Ann!"}[mode]
    assert judge(final, rec, sc).success


def test_judge_reasons():
    rec = make_record()
    sc = Scenario({"my mother": "Ann"})
    assert judge("Call my mother.", rec, sc).reason == "unresolved element 'my mother'"
    assert "expected" in judge("Call Bob.", rec, sc).reason
    assert "unbound placeholder" in judge("Call Ann.", rec, Scenario.empty()).reason


def test_explore_and_aliases():
    sc = Scenario({"my friend": "Jack"}, {"WeChat": {"My Friend": "Jack"}}, {"friend": "my friend"})
    assert explore(ExplorationInstruction("wechat", "my friend", ""), sc).info == "Jack"
    assert explore(ExplorationInstruction("WeChat", "friend", ""), sc).info == "Jack"
    assert not explore(ExplorationInstruction("WeChat", "my home", ""), sc).finished
    with pytest.raises(UnknownApp):
        explore(ExplorationInstruction("Alipay", "my friend", ""), sc)
    assert sc.truth("friend") == "Jack"
    assert sc.holders("my friend") == ["WeChat"]


def test_unreachable():
    sc = Scenario({"a": "1", "b": "2"}, {"X": {"a": "1"}})
    assert sc.unreachable() == ["b"]


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        scenario_from_data([])
    with pytest.raises(ScenarioError):
        scenario_from_data({"apps": {"X": {"a": ""}}})
    sc = scenario_from_data({"profile": {"A": "1"}, "apps": {"X": {"A": "1"}}})
    assert scenario_from_data(sc.to_data()).to_data() == sc.to_data()


def test_scenario_is_immutable():
    sc = Scenario({"a": "1"})
    with pytest.raises(TypeError):
        sc.profile["a"] = "2"
