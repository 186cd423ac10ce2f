"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 missing file, 4 invalid input data,
5 backend or backend-configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dataset, evaluation
from .gold import full_scenario, gold_backend
from .llm import API_KEY_ENV, BackendError, HttpBackend, LlmConfig, MockBackend
from .memory import MemoryFileError, MemoryStore
from .orchestrator import DisabledHook, InteractiveHook, ScriptedHook, dump_traces, load_traces, run_corpus
from .simenv import ScenarioError, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_MISSING, EXIT_INVALID, EXIT_BACKEND = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _existing(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {p}", EXIT_MISSING)
    return p


def _corpus(path):
    return dataset.load_corpus(_existing(path))


def cmd_dataset(args) -> int:
    corpus = _corpus(args.path)
    if args.action == "check":
        apps = dataset.distinct_apps(corpus)
        counts = dataset.difficulty_counts(corpus)
        print(f"ok: {len(corpus)} records, {len(apps)} distinct apps, "
              + ", ".join(f"{d.value}:{n}" for d, n in counts.items()))
    else:
        print(dataset.render_quality_table(dataset.quality_report(corpus)))
    return EXIT_OK


def _backend(args, corpus, scenario):
    if args.backend == "mock":
        if args.script:
            return MockBackend.from_file(_existing(args.script))
        return gold_backend(corpus, scenario)
    config = LlmConfig.from_env(
        model_name=args.model, endpoint=args.endpoint or "", temperature=args.temperature,
        max_tokens=args.max_tokens, seed=args.seed,
    )
    try:
        return HttpBackend(config)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_BACKEND) from None


def _hook(args):
    if args.interactive:
        return InteractiveHook()
    if args.interventions:
        answers = json.loads(_existing(args.interventions).read_text(encoding="utf-8"))
        if not isinstance(answers, dict):
            raise CliError("interventions file must map element phrases to values", EXIT_INVALID)
        return ScriptedHook(answers)
    return DisabledHook()


def cmd_run(args) -> int:
    corpus = _corpus(args.corpus)
    scenario = load_scenario(_existing(args.scenario)) if args.scenario else full_scenario()
    if args.memory:
        store = MemoryStore.load_profile(args.memory, args.profile)
    else:
        store = MemoryStore(profile_id=args.profile or "fresh")
    backend = _backend(args, corpus, scenario)

    def progress(i, n, trace):
        logging.getLogger("perpilot.run").info("[%d/%d] id=%d success=%s", i, n, trace.instruction_id, trace.success)

    traces = run_corpus(corpus, store, scenario, backend, _hook(args), fail_fast=args.fail_fast, on_progress=progress)
    if args.memory:
        store.persist(args.memory)
    if args.traces:
        with open(args.traces, "w", encoding="utf-8") as fh:
            dump_traces(traces, fh)
    else:
        dump_traces(traces, sys.stdout)
    ok = sum(t.success for t in traces)
    print(f"{ok}/{len(traces)} instructions succeeded", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    corpus = _corpus(args.corpus)
    with open(_existing(args.traces), encoding="utf-8") as fh:
        try:
            traces = load_traces(fh)
        except (json.JSONDecodeError, TypeError) as exc:
            raise CliError(f"{args.traces}: malformed trace log ({exc})", EXIT_INVALID) from None
    report = evaluation.compute_metrics(traces, corpus)
    print(evaluation.render_report(report, args.format))
    return EXIT_OK


def cmd_memory(args) -> int:
    if args.action == "show":
        store = MemoryStore.load_profile(_existing(args.memory))
        print(f"profile {store.profile_id}: {len(store)} entries")
        for k, v in sorted(store.entries.items()):
            print(f"  {k} -> {v}")
    else:
        store = MemoryStore.load_profile(args.memory)
        store.clear()
        store.persist(args.memory)
        print(f"cleared profile {store.profile_id}")
    return EXIT_OK


def cmd_gold_script(args) -> int:
    corpus = _corpus(args.corpus)
    scenario = load_scenario(_existing(args.scenario)) if args.scenario else full_scenario()
    gold_backend(corpus, scenario).save(args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="perpilot", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    d = sub.add_parser("dataset", help="validate a corpus or print its quality metrics")
    d.add_argument("action", choices=["check", "metrics"])
    d.add_argument("path", nargs="?", help="corpus file (default: bundled PerInstruct corpus)")
    d.set_defaults(func=cmd_dataset)

    r = sub.add_parser("run", help="run the pipeline over a corpus and write a trace log")
    r.add_argument("--corpus", help="corpus file (default: bundled)")
    r.add_argument("--scenario", help="scenario file (default: bundled full scenario)")
    r.add_argument("--memory", help="memory file to load and update; omitted = fresh in-memory profile")
    r.add_argument("--profile", help="profile id expected in / written to the memory file")
    r.add_argument("--backend", choices=["mock", "http"], default="mock")
    r.add_argument("--script", help="mock script file (default: gold answers built from corpus + scenario)")
    r.add_argument("--traces", help="write newline-delimited traces here instead of stdout")
    r.add_argument("--model", default="o4-mini")
    r.add_argument("--endpoint", help=f"OpenAI-compatible base URL; API key from ${API_KEY_ENV}")
    r.add_argument("--temperature", type=float, default=0.0)
    r.add_argument("--max-tokens", type=int, default=4096)
    r.add_argument("--seed", type=int, default=1234)
    r.add_argument("--fail-fast", action="store_true", help="stop at the first failed instruction")
    hi = r.add_mutually_exclusive_group()
    hi.add_argument("--interventions", help="JSON map element -> value answering human-intervention requests")
    hi.add_argument("--interactive", action="store_true", help="ask on stdin when exploration fails")
    hi.add_argument("--no-interventions", action="store_true", help="never ask (default)")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="compute metrics from a trace log")
    e.add_argument("--traces", required=True)
    e.add_argument("--corpus", help="corpus file (default: bundled)")
    e.add_argument("--format", choices=["table", "json"], default="table")
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("memory", help="inspect or clear a memory profile")
    m.add_argument("action", choices=["show", "clear"])
    m.add_argument("--memory", required=True)
    m.set_defaults(func=cmd_memory)

    g = sub.add_parser("gold-script", help="write the gold-answer mock script for a corpus and scenario")
    g.add_argument("--corpus")
    g.add_argument("--scenario")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gold_script)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (dataset.CorpusError, ScenarioError, MemoryFileError, evaluation.AlignmentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
