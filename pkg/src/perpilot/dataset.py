"""PerInstruct records, corpus I/O and the dataset quality metrics (DLC, DE)."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .text import PLACEHOLDER, normalize_phrase, template_spans

BUNDLED_CORPUS = "perinstruct.json"


class CorpusError(ValueError):
    """Malformed corpus file or a record violating the schema."""


class CorrelationUndefined(ValueError):
    pass


class Difficulty(str, Enum):
    SIMPLE = "Simple"
    NORMAL = "Normal"
    HARD = "Hard"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @classmethod
    def parse(cls, label: str) -> "Difficulty":
        try:
            return _SPELLINGS[label.strip().lower()]
        except (KeyError, AttributeError):
            raise ValueError(f"unknown difficulty label {label!r}") from None


_RANK = {Difficulty.SIMPLE: 1, Difficulty.NORMAL: 2, Difficulty.HARD: 3}
_SPELLINGS = {
    "simple": Difficulty.SIMPLE,
    "easy": Difficulty.SIMPLE,
    "normal": Difficulty.NORMAL,
    "hard": Difficulty.HARD,
    "difficult": Difficulty.HARD,
}


@dataclass(frozen=True)
class Instruction:
    id: int
    text: str
    difficulty: Difficulty
    min_steps: int
    apps: tuple[str, ...]
    completed_template: str
    gold_elements: tuple[str, ...] = ()
    info_types: tuple[str, ...] = ()

    @property
    def personalized(self) -> bool:
        return bool(self.gold_elements)

    def placeholder_spans(self) -> list[str] | None:
        return template_spans(self.completed_template, self.text)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["difficulty"] = self.difficulty.value
        d["apps"] = list(self.apps)
        d["gold_elements"] = list(self.gold_elements)
        d["info_types"] = list(self.info_types)
        return d


_KEYS = ("id", "text", "difficulty", "min_steps", "apps", "completed_template", "gold_elements", "info_types")


def instruction_from_dict(raw: Mapping) -> Instruction:
    rid = raw.get("id", "?") if isinstance(raw, Mapping) else "?"

    def bad(fld: str, why: str) -> CorpusError:
        return CorpusError(f"record id={rid}: field {fld!r} {why}")

    if not isinstance(raw, Mapping):
        raise CorpusError(f"record is not an object: {raw!r}")
    for key in _KEYS:
        if key not in raw:
            raise bad(key, "is missing")
    if not isinstance(raw["id"], int) or isinstance(raw["id"], bool) or raw["id"] < 1:
        raise bad("id", "must be a positive integer")
    if not isinstance(raw["text"], str) or not raw["text"].strip():
        raise bad("text", "must be a non-empty string")
    try:
        difficulty = Difficulty.parse(raw["difficulty"])
    except ValueError as exc:
        raise bad("difficulty", str(exc)) from None
    steps = raw["min_steps"]
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise bad("min_steps", "must be an integer >= 1")
    apps = raw["apps"]
    if not isinstance(apps, list) or not apps or not all(isinstance(a, str) and a.strip() for a in apps):
        raise bad("apps", "must be a non-empty list of names")
    template = raw["completed_template"]
    if not isinstance(template, str) or not template.strip():
        raise bad("completed_template", "must be a non-empty string")
    for key in ("gold_elements", "info_types"):
        v = raw[key]
        if not isinstance(v, list) or not all(isinstance(x, str) and x.strip() for x in v):
            raise bad(key, "must be a list of non-empty strings")
    elements = tuple(raw["gold_elements"])
    if len({normalize_phrase(e) for e in elements}) != len(elements):
        raise bad("gold_elements", "contains duplicates")
    placeholders = PLACEHOLDER.findall(template)
    if len(placeholders) != len(raw["info_types"]):
        raise bad(
            "info_types",
            f"has {len(raw['info_types'])} entries but completed_template has {len(placeholders)} placeholders",
        )
    return Instruction(
        id=raw["id"],
        text=raw["text"],
        difficulty=difficulty,
        min_steps=steps,
        apps=tuple(a.strip() for a in apps),
        completed_template=template,
        gold_elements=elements,
        info_types=tuple(raw["info_types"]),
    )


def parse_corpus(source: str, origin: str = "<string>") -> list[Instruction]:
    if not source.strip():
        raise CorpusError(f"{origin}: empty corpus file")
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{origin}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, list):
        raise CorpusError(f"{origin}: top level must be an array of records")
    records = []
    seen: set[int] = set()
    for i, raw in enumerate(data):
        try:
            rec = instruction_from_dict(raw)
        except CorpusError as exc:
            raise CorpusError(f"{origin}: record #{i}: {exc}") from None
        if rec.id in seen:
            raise CorpusError(f"{origin}: record #{i}: duplicate id {rec.id}")
        seen.add(rec.id)
        records.append(rec)
    return records


def load_corpus(path: str | Path | None = None) -> list[Instruction]:
    """Load and validate a corpus file; ``None`` loads the bundled 75-record corpus."""
    if path is None:
        source = resources.files("perpilot.data").joinpath(BUNDLED_CORPUS).read_text(encoding="utf-8")
        return parse_corpus(source, origin=BUNDLED_CORPUS)
    path = Path(path)
    return parse_corpus(path.read_text(encoding="utf-8"), origin=str(path))


def save_corpus(records: Iterable[Instruction], path: str | Path) -> None:
    payload = [r.to_dict() for r in records]
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def app_key(name: str) -> str:
    # "Baidumap" and "Baidu Map" are one app
    return "".join(name.casefold().split())


def distinct_apps(corpus: Iterable[Instruction]) -> set[str]:
    return {app_key(a) for r in corpus for a in r.apps}


# --- metrics ---------------------------------------------------------------


def average_ranks(values: list[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the positions they occupy."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise CorrelationUndefined("zero variance")
    return sxy / math.sqrt(sxx * syy)


def spearman_dlc(corpus: list[Instruction]) -> float:
    """Difficulty label consistency: tie-corrected Spearman rho of difficulty rank vs min_steps."""
    if len(corpus) < 2:
        raise CorrelationUndefined("need at least 2 records")
    xs = average_ranks([r.difficulty.rank for r in corpus])
    ys = average_ranks([r.min_steps for r in corpus])
    try:
        rho = pearson(xs, ys)
    except CorrelationUndefined:
        raise CorrelationUndefined("difficulty or min_steps is constant across the corpus") from None
    return max(-1.0, min(1.0, rho))


def distribution_entropy(counts: Mapping[str, int]) -> float:
    """Shannon entropy of ``counts`` divided by ln(K), K = number of categories supplied."""
    if len(counts) < 2:
        raise ValueError("distribution entropy needs at least 2 categories")
    if any(c < 0 for c in counts.values()):
        raise ValueError("counts must be non-negative")
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("all counts are zero")
    h = -sum((c / total) * math.log(c / total) for c in counts.values() if c > 0)
    return min(1.0, max(0.0, h / math.log(len(counts))))


def difficulty_counts(corpus: Iterable[Instruction]) -> dict[Difficulty, int]:
    counts = {d: 0 for d in Difficulty}
    for r in corpus:
        counts[r.difficulty] += 1
    return counts


def app_occurrences(corpus: Iterable[Instruction]) -> Counter:
    """Each app listed by each instruction contributes one count."""
    return Counter(app_key(a) for r in corpus for a in r.apps)


def primary_app_counts(corpus: Iterable[Instruction]) -> Counter:
    """Alternative basis: each instruction counted once, under its first-listed app."""
    return Counter(app_key(r.apps[0]) for r in corpus)


@dataclass(frozen=True)
class DatasetQualityReport:
    dlc: float
    de_difficulty: float
    de_diversity: float
    counts_by_difficulty: dict = field(default_factory=dict)
    n_records: int = 0
    n_apps: int = 0
    diversity_basis: str = "app occurrences"


def quality_report(corpus: list[Instruction]) -> DatasetQualityReport:
    counts = difficulty_counts(corpus)
    apps = app_occurrences(corpus)
    return DatasetQualityReport(
        dlc=spearman_dlc(corpus),
        de_difficulty=distribution_entropy({d.value: c for d, c in counts.items()}),
        de_diversity=distribution_entropy(apps),
        counts_by_difficulty={d.value: c for d, c in counts.items()},
        n_records=len(corpus),
        n_apps=len(apps),
    )


def render_quality_table(report: DatasetQualityReport) -> str:
    rows = [
        ("Quantitative Metrics", "DLC", f"{report.dlc:.2f}"),
        ("", "DE_difficulty", f"{report.de_difficulty:.2f}"),
        ("", "DE_diversity", f"{report.de_diversity:.2f}"),
    ]
    w0 = max(len("Category"), *(len(r[0]) for r in rows))
    w1 = max(len("Metric"), *(len(r[1]) for r in rows))
    lines = [f"{'Category':<{w0}} | {'Metric':<{w1}} | Value", "-" * (w0 + w1 + 14)]
    lines += [f"{a:<{w0}} | {b:<{w1}} | {c}" for a, b, c in rows]
    counts = ", ".join(f"{k}:{v}" for k, v in report.counts_by_difficulty.items())
    lines.append("")
    lines.append(f"records={report.n_records} apps={report.n_apps} difficulty counts {counts}")
    lines.append(f"DLC: Spearman rho with average ranks for ties; DE_diversity basis: {report.diversity_basis}")
    return "\n".join(lines)
