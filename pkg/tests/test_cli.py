import json

import pytest

from perpilot.cli import main


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_bad_option_is_usage_error(capsys):
    assert main(["run", "--backend", "carrier-pigeon"]) == 2


def test_dataset_check_and_metrics(capsys):
    assert main(["dataset", "check"]) == 0
    assert "75 records, 27 distinct apps" in capsys.readouterr().out
    assert main(["dataset", "metrics"]) == 0
    out = capsys.readouterr().out
    assert "DLC" in out and "0.86" in out


def test_missing_and_invalid_files(tmp_path, capsys):
    assert main(["dataset", "check", str(tmp_path / "nope.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("[{}]")
    assert main(["dataset", "check", str(bad)]) == 4
    assert "missing" in capsys.readouterr().err


def test_run_eval_and_memory(tmp_path, capsys):
    traces, mem = tmp_path / "t.jsonl", tmp_path / "m.json"
    assert main(["run", "--traces", str(traces), "--memory", str(mem)]) == 0
    assert "75/75" in capsys.readouterr().err
    assert len(traces.read_text().splitlines()) == 75
    assert main(["eval", "--traces", str(traces), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["success"]["Overall"] == [75, 75] and report["hi_count"] == 0
    assert main(["memory", "show", "--memory", str(mem)]) == 0
    assert "-> Jack" in capsys.readouterr().out
    assert main(["memory", "clear", "--memory", str(mem)]) == 0
    assert json.loads(mem.read_text())["entries"] == {}


def test_run_with_interventions_file(tmp_path, capsys):
    empty = tmp_path / "scenario.json"
    empty.write_text(json.dumps({"profile": {"my mother": "Ann"}, "apps": {"Phone": {}}}))
    corpus = tmp_path / "corpus.json"
    corpus.write_text(json.dumps([{
        "id": 1, "text": "Call my mother.", "difficulty": "Simple", "min_steps": 3, "apps": ["Phone"],
        "completed_template": "Call {name}.", "gold_elements": ["my mother"], "info_types": ["name"],
    }]))
    answers = tmp_path / "answers.json"
    answers.write_text(json.dumps({"my mother": "Ann"}))
    script = tmp_path / "script.json"
    assert main(["gold-script", "--corpus", str(corpus), "--scenario", str(empty), "-o", str(script)]) == 0
    traces = tmp_path / "t.jsonl"
    args = ["run", "--corpus", str(corpus), "--scenario", str(empty), "--traces", str(traces)]
    assert main(args + ["--interventions", str(answers)]) == 0
    trace = json.loads(traces.read_text())
    assert trace["success"] and trace["sources"] == {"my mother": "Human"}
    assert main(args + ["--script", str(script), "--no-interventions"]) == 0
    assert not json.loads(traces.read_text())["success"]


def test_http_backend_needs_credentials(monkeypatch, capsys):
    monkeypatch.delenv("PERPILOT_API_KEY", raising=False)
    assert main(["run", "--backend", "http", "--endpoint", "http://127.0.0.1:9"]) == 5
    assert "PERPILOT_API_KEY" in capsys.readouterr().err


def test_malformed_trace_log(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text("{oops\n")
    assert main(["eval", "--traces", str(p)]) == 4
