"""Detect personalized elements in an instruction with a single LLM call."""

from __future__ import annotations

from dataclasses import dataclass

from .llm import Backend, LlmConfig
from .text import normalize_phrase

PERCEPTION_PROMPT = """Please understand and evaluate the instructions I have given you to determine if they contain personalized elements.
If the instruction contains words that need to be clarified by asking the user, or if certain words have different meanings for different people or devices, it can be determined that the instruction contains personalized elements, and these words are personalized elements.

You need to strictly follow the following rules:

Rule 1: If certain words have unique executable meanings, such as app names like QQ and WeChat, they are not personalized elements.

Rule 2: When you think something is not a personalized element, directly determine that it is not a personalized element.

Rule 3: Strictly prohibit treating specific names as personalized elements, whether they are Chinese or English names. But abstract names are still personalized elements, such as friends.

If you think it is not a personalized instruction, please answer 'No'.

If you think this is a personalized instruction, you need to determine which part of the instruction is the personalized element.

Then your answer should follow this format:
'Yes|First personalized element (i.e., the first part you consider personalized)|Second personalized element|Third personalized element (and so on, output all personalized elements,The same element only needs to be output once)'
The current instruction is as follows:{instruction}

Please note that your answer should not include any additional information outside the format provided."""


class GrammarError(ValueError):
    """Model output that does not follow the expected delimited format."""

    def __init__(self, message: str, raw: str):
        super().__init__(f"{message}: {raw[:120]!r}")
        self.raw = raw


@dataclass(frozen=True)
class PerceptionResult:
    is_personalized: bool
    elements: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.is_personalized and self.elements:
            raise ValueError("a non-personalized result cannot carry elements")
        if self.is_personalized and not self.elements:
            raise ValueError("a personalized result needs at least one element")

    def serialize(self) -> str:
        return "|".join(("Yes", *self.elements)) if self.is_personalized else "No"

    def normalized(self) -> frozenset[str]:
        return frozenset(normalize_phrase(e) for e in self.elements)


def build_perception_prompt(instruction: str) -> str:
    if not instruction or not instruction.strip():
        raise ValueError("instruction text must be non-empty")
    return PERCEPTION_PROMPT.replace("{instruction}", instruction)


def dedup_elements(segments) -> tuple[str, ...]:
    seen: set[str] = set()
    out = []
    for seg in segments:
        seg = " ".join(seg.split())
        key = normalize_phrase(seg)
        if key and key not in seen:
            seen.add(key)
            out.append(seg)
    return tuple(out)


def parse_perception(raw: str) -> PerceptionResult:
    body = raw.strip()
    if body.lower() == "no":
        return PerceptionResult(False)
    head, sep, rest = body.partition("|")
    if head.strip().lower() != "yes":
        raise GrammarError("expected 'No' or 'Yes|element|...'", raw)
    elements = dedup_elements(rest.split("|")) if sep else ()
    if not elements:
        raise GrammarError("'Yes' without any element", raw)
    return PerceptionResult(True, elements)


def perceive(instruction: str, backend: Backend, config: LlmConfig | None = None) -> PerceptionResult:
    return parse_perception(backend.complete(build_perception_prompt(instruction), config))
