"""Gold-mock sweep over the bundled corpus, with the full and the empty scenario.

    python scripts/run_sweep.py [--out DIR]
"""

import argparse
import time
from pathlib import Path

from perpilot.dataset import load_corpus
from perpilot.evaluation import compute_metrics, render_report
from perpilot.gold import full_scenario, gold_backend
from perpilot.memory import MemoryStore
from perpilot.orchestrator import DisabledHook, dump_traces, run_corpus
from perpilot.simenv import Scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, help="write trace logs here")
    args = ap.parse_args()

    corpus = load_corpus()
    for name, scenario in (("full", full_scenario()), ("empty", Scenario.empty())):
        start = time.perf_counter()
        traces = run_corpus(corpus, MemoryStore(), scenario, gold_backend(corpus, scenario), DisabledHook())
        elapsed = time.perf_counter() - start
        print(f"== {name} scenario ({elapsed:.2f}s)")
        print(render_report(compute_metrics(traces, corpus)))
        print()
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            with open(args.out / f"traces_{name}.jsonl", "w", encoding="utf-8") as fh:
                dump_traces(traces, fh)


if __name__ == "__main__":
    main()
