import sys

import pytest

from perpilot.dataset import load_corpus
from perpilot.gold import full_scenario


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def scenario():
    return full_scenario()


def make_record(**over):
    from perpilot.dataset import instruction_from_dict

    raw = {
        "id": 1,
        "text": "Call my mother.",
        "difficulty": "Simple",
        "min_steps": 3,
        "apps": ["Phone"],
        "completed_template": "Call {name}.",
        "gold_elements": ["my mother"],
        "info_types": ["name"],
    }
    raw.update(over)
    return instruction_from_dict(raw)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
