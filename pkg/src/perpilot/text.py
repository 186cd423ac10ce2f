"""Phrase normalization and placeholder helpers shared across modules."""

from __future__ import annotations

import re

PLACEHOLDER = re.compile(r"\{([^{}]+)\}")
_TERMINAL_PUNCT = ".!?。！？;；,，"


def normalize_phrase(phrase: str) -> str:
    """Lowercase, trim and collapse internal whitespace."""
    return " ".join(phrase.lower().split())


def normalize_sentence(text: str) -> str:
    """Comparison form for whole instructions: phrase normalization plus terminal punctuation stripped."""
    return normalize_phrase(text).rstrip(_TERMINAL_PUNCT).rstrip()


def phrase_pattern(phrases) -> re.Pattern:
    """Case-insensitive alternation matching whole phrases, longest first.

    Word-boundary lookarounds keep ``friend`` from matching inside ``girlfriend``.
    """
    ordered = sorted({p for p in phrases}, key=lambda p: (-len(p), p))
    body = "|".join(r"(?<!\w)" + r"\s+".join(map(re.escape, p.split())) + r"(?!\w)" for p in ordered)
    return re.compile(body, re.IGNORECASE)


def contains_phrase(text: str, phrase: str) -> bool:
    return phrase_pattern([phrase]).search(text) is not None


def template_spans(template: str, text: str) -> list[str] | None:
    """Recover the text spans that each placeholder of ``template`` stands for in ``text``.

    Returns None when the template does not align with the text.
    """
    parts = PLACEHOLDER.split(template)
    pattern = "".join(re.escape(p) if i % 2 == 0 else "(.+?)" for i, p in enumerate(parts))
    m = re.fullmatch(pattern, text, re.DOTALL)
    return list(m.groups()) if m else None
