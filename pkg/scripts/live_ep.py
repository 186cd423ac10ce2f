"""Perception-only EP accuracy against a live OpenAI-compatible endpoint.

    PERPILOT_API_KEY=... python scripts/live_ep.py --endpoint https://host/v1 --model o4-mini

Only perception is exercised; exploration would need a real device.
"""

import argparse
import sys

from perpilot.dataset import load_corpus
from perpilot.llm import BackendError, HttpBackend, LlmConfig
from perpilot.perception import GrammarError, perceive
from perpilot.text import normalize_phrase


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--endpoint", required=True)
    ap.add_argument("--model", default="o4-mini")
    ap.add_argument("--temperature", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--all", action="store_true", help="also score non-personalized records (expects 'No')")
    args = ap.parse_args()

    config = LlmConfig.from_env(endpoint=args.endpoint, model_name=args.model, temperature=args.temperature, seed=args.seed)
    try:
        backend = HttpBackend(config)
    except ValueError as exc:
        sys.exit(f"error: {exc}")

    records = [r for r in load_corpus() if args.all or r.personalized]
    correct = 0
    for r in records:
        gold = {normalize_phrase(e) for e in r.gold_elements}
        try:
            got = perceive(r.text, backend, config).normalized()
        except (BackendError, GrammarError) as exc:
            print(f"{r.id:>5}  ERROR  {exc}")
            continue
        hit = got == gold
        correct += hit
        print(f"{r.id:>5}  {'ok ' if hit else 'MISS'}  gold={sorted(gold)} got={sorted(got)}")
    print(f"EP accuracy: {correct}/{len(records)} = {correct / max(1, len(records)):.1%}")


if __name__ == "__main__":
    main()
