"""Plan app-targeted retrieval of missing elements and read back the agent's report."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .llm import Backend, LlmConfig
from .perception import GrammarError
from .text import contains_phrase, normalize_phrase, phrase_pattern

EXPLORATION_PROMPT = """You need to assist me in completing an information exploration task. The specific task information is as follows:
You are currently controlling the user's phone to complete the personalized instruction {instruction}, but those personalized information: {search_element} (You only need to deal with the personalized elements in parentheses) in the instruction is missing.
I am now trying to obtain the precise information for these personalized elements from the user's phone.

It is known that the user's phone has the following apps:
{app_lists}

Please carefully consider the types of these apps and the information they may contain. For each personalized element, select the app that is most likely to store the corresponding precise information (note that each personalized element can only select one app, do not select multiple apps).

Output the same number of instructions as the number of personalized elements (do not output extra instructions, only output one instruction per personalized element, strictly forbidden to output extra instructions), each instruction should be in the format 'From the app XX, obtain the YY (the YY is personalized element and personalized element must be included in the sentence) XX information (here, XX is the type of information you need to obtain, for example From QQ, obtain the friend name information. please note one instruction per line)'."""

# "From QQ, obtain ..." appears in the prompt's own example, so "the app" is optional
_LINE = re.compile(r"^From\s+(?:the\s+app\s+)?(?P<app>[^,]+?)\s*,\s*obtain\s+(?P<rest>.+)$", re.IGNORECASE)
_LEADER = re.compile(r"^\s*(?:[-*•]\s*|\d+[.)]\s*)?")
_REPORT = re.compile(r"^(?:finish|stop)\s*\|(?P<info>.*)$", re.IGNORECASE)


class PlanError(GrammarError):
    pass


class PlanCountError(PlanError):
    pass


class PlanLineError(PlanError):
    pass


class UnknownAppError(PlanError):
    pass


class ElementMentionError(PlanError):
    pass


@dataclass(frozen=True)
class ExplorationInstruction:
    app: str
    element: str
    text: str


@dataclass(frozen=True)
class AgentReport:
    finished: bool
    info: str | None = None

    def __post_init__(self):
        if self.finished and not (self.info and self.info.strip()):
            raise ValueError("a finished report must carry information")

    def to_raw(self, keyword: str = "Stop") -> str:
        return f"{keyword}|{self.info}" if self.finished else "Not found"


def format_search_elements(unresolved) -> str:
    return "[" + ", ".join(f"'{e}'" for e in unresolved) + "]"


def build_exploration_prompt(instruction: str, unresolved, app_list) -> str:
    unresolved, app_list = list(unresolved), list(app_list)
    if not unresolved:
        raise ValueError("nothing to explore: unresolved element list is empty")
    if not app_list:
        raise ValueError("the device reports no installed apps")
    return (
        EXPLORATION_PROMPT.replace("{instruction}", instruction)
        .replace("{search_element}", format_search_elements(unresolved))
        .replace("{app_lists}", ", ".join(app_list))
    )


def render_exploration(app: str, element: str, info_kind: str = "") -> str:
    tail = f" {info_kind}" if info_kind else ""
    return f"From the app {app}, obtain the {element}{tail} information."


def parse_exploration_plan(raw: str, unresolved, app_list) -> list[ExplorationInstruction]:
    unresolved = list(unresolved)
    apps = {normalize_phrase(a): a for a in app_list}
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if len(lines) != len(unresolved):
        raise PlanCountError(f"expected {len(unresolved)} instruction line(s), got {len(lines)}", raw)
    by_key = {normalize_phrase(e): e for e in unresolved}
    finder = phrase_pattern(unresolved) if unresolved else None
    plan: list[ExplorationInstruction] = []
    covered: set[str] = set()
    for line in lines:
        body = _LEADER.sub("", line, count=1).strip().strip("'\"`")
        m = _LINE.match(body)
        if not m:
            raise PlanLineError("line is not of the form 'From the app X, obtain ...'", line)
        app = apps.get(normalize_phrase(m.group("app")))
        if app is None:
            raise UnknownAppError(f"app {m.group('app')!r} is not installed", line)
        mentioned = {normalize_phrase(x) for x in finder.findall(m.group("rest"))}
        if len(mentioned) != 1:
            raise ElementMentionError(f"line must name exactly one unresolved element, found {len(mentioned)}", line)
        key = mentioned.pop()
        if key in covered:
            raise PlanCountError(f"element {by_key[key]!r} is targeted twice", raw)
        covered.add(key)
        plan.append(ExplorationInstruction(app=app, element=by_key[key], text=body))
    return plan


def plan_exploration(
    instruction: str, unresolved, app_list, backend: Backend, config: LlmConfig | None = None
) -> list[ExplorationInstruction]:
    prompt = build_exploration_prompt(instruction, unresolved, app_list)
    return parse_exploration_plan(backend.complete(prompt, config), unresolved, app_list)


def parse_agent_report(raw: str) -> AgentReport:
    """Read 'FINISH|info' (AppAgent) or 'Stop|info' (MobileAgent, UI-TARS). Never raises."""
    if not isinstance(raw, str):
        return AgentReport(False)
    for line in raw.strip().splitlines():
        m = _REPORT.match(line.strip())
        if m:
            info = m.group("info").strip()
            return AgentReport(True, info) if info else AgentReport(False)
    return AgentReport(False)


def instruction_mentions(instr: ExplorationInstruction) -> bool:
    return contains_phrase(instr.text, instr.element)
