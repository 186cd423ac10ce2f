"""Persistent element -> value memory and memory-based instruction completion."""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .text import normalize_phrase, phrase_pattern


class MemoryFileError(ValueError):
    pass


class SubstitutionError(ValueError):
    def __init__(self, phrase: str):
        super().__init__(f"element {phrase!r} does not occur in the instruction text")
        self.phrase = phrase


@dataclass
class MemoryStore:
    profile_id: str = "default"
    entries: dict[str, str] = field(default_factory=dict)
    dirty: bool = False

    def __post_init__(self):
        self._lock = threading.RLock()
        raw, self.entries = self.entries, {}
        for k, v in raw.items():
            self.store(k, v)
        self.dirty = False

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, element: str) -> bool:
        return normalize_phrase(element) in self.entries

    def lookup(self, element: str) -> str | None:
        return self.entries.get(normalize_phrase(element))

    def store(self, element: str, value: str) -> "MemoryStore":
        key = normalize_phrase(element)
        if not key:
            raise ValueError("element phrase must be non-empty")
        if not isinstance(value, str) or not value.strip():
            raise ValueError(f"refusing to store an empty value for {element!r}")
        with self._lock:
            if self.entries.get(key) != value:
                self.entries[key] = value
                self.dirty = True
        return self

    def clear(self) -> None:
        with self._lock:
            if self.entries:
                self.dirty = True
            self.entries.clear()

    def to_data(self) -> dict:
        return {"profile_id": self.profile_id, "entries": dict(sorted(self.entries.items()))}

    def persist(self, path: str | Path) -> None:
        """Atomic write: temp file in the same directory, then rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            text = json.dumps(self.to_data(), indent=2, ensure_ascii=False) + "\n"
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(text)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            self.dirty = False

    @classmethod
    def load_profile(cls, path: str | Path, profile_id: str | None = None) -> "MemoryStore":
        path = Path(path)
        if not path.exists():
            return cls(profile_id=profile_id or path.stem)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MemoryFileError(f"{path}: not a valid memory file ({exc})") from None
        if not isinstance(data, dict) or not isinstance(data.get("entries"), dict):
            raise MemoryFileError(f"{path}: expected an object with an 'entries' map")
        stored_id = data.get("profile_id", path.stem)
        if profile_id is not None and stored_id != profile_id:
            raise MemoryFileError(f"{path}: holds profile {stored_id!r}, not {profile_id!r}")
        try:
            return cls(profile_id=stored_id, entries=data["entries"])
        except ValueError as exc:
            raise MemoryFileError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class Completed:
    text: str


@dataclass(frozen=True)
class Partial:
    text: str
    remaining: tuple[str, ...]


@dataclass(frozen=True)
class Missing:
    elements: tuple[str, ...]


RetrievalOutcome = Union[Completed, Partial, Missing]


def substitute(text: str, values: dict[str, str], keep=()) -> str:
    """Replace every occurrence of each element phrase with its value in one pass.

    Matching is case-insensitive, whole-phrase and longest-first; replaced values
    are never rescanned. Phrases in ``keep`` take part in matching but stay as they
    are, so a shorter known phrase cannot eat into a longer unresolved one.
    """
    if not values:
        return text
    lookup = {normalize_phrase(k): v for k, v in values.items()}
    for phrase in values:
        if phrase_pattern([phrase]).search(text) is None:
            raise SubstitutionError(phrase)
    pattern = phrase_pattern([*values, *keep])
    return pattern.sub(lambda m: lookup.get(normalize_phrase(m.group(0)), m.group(0)), text)


def retrieve_complete(instruction: str, elements, store: MemoryStore) -> RetrievalOutcome:
    elements = tuple(elements)
    if not elements:
        raise ValueError("retrieval needs at least one element")
    if len({normalize_phrase(e) for e in elements}) != len(elements):
        raise ValueError("elements must be deduplicated")
    for e in elements:
        if phrase_pattern([e]).search(instruction) is None:
            raise SubstitutionError(e)
    found = {e: store.lookup(e) for e in elements if e in store}
    remaining = tuple(e for e in elements if e not in found)
    if not found:
        return Missing(elements)
    text = substitute(instruction, found, keep=remaining)
    if remaining:
        return Partial(text, remaining)
    return Completed(text)
