"""Where resolved values come from as one memory profile ages.

Runs the corpus for several passes against a single store and prints, per window
of consecutive instructions, how many gold elements were resolved from memory,
by exploration, by a human, or not at all.

    python scripts/learning_curve.py --passes 2 --window 15 [--plot curve.png]
"""

import argparse

from perpilot.dataset import load_corpus
from perpilot.evaluation import source_counts
from perpilot.gold import full_scenario, gold_backend
from perpilot.memory import MemoryStore
from perpilot.orchestrator import Source, run_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--passes", type=int, default=2)
    ap.add_argument("--window", type=int, default=15)
    ap.add_argument("--plot", help="save a stacked bar chart (needs matplotlib)")
    args = ap.parse_args()

    corpus = load_corpus()
    scenario = full_scenario()
    backend = gold_backend(corpus, scenario)
    store = MemoryStore()
    traces = []
    for _ in range(args.passes):
        traces.extend(run_corpus(corpus, store, scenario, backend))

    names = [s.value for s in Source]
    rows = []
    for start in range(0, len(traces), args.window):
        chunk = traces[start : start + args.window]
        counts = source_counts(chunk)
        rows.append((f"{start + 1}-{start + len(chunk)}", counts))
    print("window      " + "".join(f"{n:>13}" for n in names))
    for label, counts in rows:
        print(f"{label:<12}" + "".join(f"{counts[n]:>13}" for n in names))

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(8, 4))
        bottom = [0] * len(rows)
        for n in names:
            vals = [c[n] for _, c in rows]
            ax.bar([r for r, _ in rows], vals, bottom=bottom, label=n)
            bottom = [b + v for b, v in zip(bottom, vals)]
        ax.set_ylabel("resolved elements")
        ax.set_xlabel("instructions")
        ax.tick_params(axis="x", rotation=45)
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()
