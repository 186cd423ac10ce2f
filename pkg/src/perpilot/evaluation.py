"""Benchmark metrics over run traces: success rate, EP/Ex accuracy, HI count."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .dataset import Instruction
from .orchestrator import RunTrace, Source
from .text import normalize_phrase

COLUMNS = ("Simple", "Normal", "Hard", "Overall")


class AlignmentError(ValueError):
    pass


def _frac(k: int, n: int) -> float:
    return k / n if n else 0.0


@dataclass(frozen=True)
class MetricsReport:
    success: dict = field(default_factory=dict)  # column -> [k, n]
    ep_correct: int = 0
    ex_without_hi: int = 0
    ex_with_hi: int = 0
    n_personalized: int = 0
    hi_count: int = 0

    def success_rate(self, column: str = "Overall") -> float:
        k, n = self.success.get(column, (0, 0))
        return _frac(k, n)

    @property
    def ep_accuracy(self) -> float:
        return _frac(self.ep_correct, self.n_personalized)

    @property
    def ex_accuracy_without_hi(self) -> float:
        return _frac(self.ex_without_hi, self.n_personalized)

    @property
    def ex_accuracy_with_hi(self) -> float:
        return _frac(self.ex_with_hi, self.n_personalized)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["success"] = {k: list(v) for k, v in self.success.items()}
        return d

    @classmethod
    def from_dict(cls, data) -> "MetricsReport":
        fields = {k: data[k] for k in ("ep_correct", "ex_without_hi", "ex_with_hi", "n_personalized", "hi_count")}
        return cls(success={k: list(v) for k, v in data["success"].items()}, **fields)


def compute_metrics(traces: list[RunTrace], corpus: list[Instruction]) -> MetricsReport:
    by_id = {r.id: r for r in corpus}
    unknown = [t.instruction_id for t in traces if t.instruction_id not in by_id]
    if unknown:
        raise AlignmentError(f"traces reference ids missing from the corpus: {unknown[:5]}")
    if len({t.instruction_id for t in traces}) != len(traces):
        raise AlignmentError("duplicate instruction ids in traces")

    success = {c: [0, 0] for c in COLUMNS}
    ep = ex_plain = ex_hi = personalized = hi = 0
    for t in traces:
        record = by_id[t.instruction_id]
        for col in (record.difficulty.value, "Overall"):
            success[col][1] += 1
            success[col][0] += int(t.success)
        hi += sum(1 for iv in t.interventions if iv.get("value"))
        if not record.personalized:
            continue
        personalized += 1
        gold = {normalize_phrase(e) for e in record.gold_elements}
        if {normalize_phrase(e) for e in t.sources} == gold:
            ep += 1
        srcs = [t.gold_sources.get(e, Source.UNRESOLVED.value) for e in record.gold_elements]
        auto = {Source.MEMORY.value, Source.EXPLORATION.value}
        if all(s in auto for s in srcs):
            ex_plain += 1
        if all(s in auto | {Source.HUMAN.value} for s in srcs):
            ex_hi += 1
    return MetricsReport(
        success=success,
        ep_correct=ep,
        ex_without_hi=ex_plain,
        ex_with_hi=ex_hi,
        n_personalized=personalized,
        hi_count=hi,
    )


def source_counts(traces: list[RunTrace]) -> dict[str, int]:
    counts = {s.value: 0 for s in Source}
    for t in traces:
        for s in t.gold_sources.values():
            counts[s] += 1
    return counts


def render_report(report: MetricsReport, fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True)
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    cells = []
    for c in COLUMNS:
        k, n = report.success.get(c, (0, 0))
        cells.append(f"{100 * _frac(k, n):.1f}% ({k}/{n})")
    width = max(len(x) for x in (*cells, *COLUMNS)) + 2
    lines = [
        "SuccessRate",
        "".join(f"{c:<{width}}" for c in COLUMNS).rstrip(),
        "".join(f"{c:<{width}}" for c in cells).rstrip(),
        "",
        f"EP Acc.          {100 * report.ep_accuracy:.1f}% ({report.ep_correct}/{report.n_personalized})",
        f"Ex Acc. w/o HI   {100 * report.ex_accuracy_without_hi:.1f}% ({report.ex_without_hi}/{report.n_personalized})",
        f"Ex Acc. with HI  {100 * report.ex_accuracy_with_hi:.1f}% ({report.ex_with_hi}/{report.n_personalized})",
        f"HI Count         {report.hi_count}",
        "",
        "success is judged by template equality on a simulated device",
    ]
    return "\n".join(lines)


def report_from_json(text: str) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(text))

