"""Compare the compiled text kernels against the pure-Python fallback.

Generates a seeded synthetic corpus, runs each kernel over it with both
backends, and prints a small table with best-of-N wall times and the
speedup. Run from a checkout with the package installed:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --texts 5000 --repeats 7
"""

from __future__ import annotations

import argparse
import random
import time

from ca_harvest.kernels import pytext

try:
    from ca_harvest.kernels import _ctext
except ImportError:
    _ctext = None

TERMS = frozenset(
    {"petition", "boycott", "march", "volunteer", "donate", "protest", "signed", "organize"}
)

FILLER = (
    "the city council meeting yesterday about housing we need local support "
    "for this issue because people keep asking what happens next around here "
    "everyone talks nobody listens same story again"
).split()


def build_corpus(n_texts: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    terms = sorted(TERMS)
    corpus = []
    for _ in range(n_texts):
        words = rng.choices(FILLER, k=30)
        for _ in range(rng.choice((0, 1, 2, 3))):
            words[rng.randrange(len(words))] = rng.choice(terms)
        # Sprinkle sentence breaks and some punctuation so the
        # sentence splitter has real work to do.
        for i in range(6, len(words), 7):
            words[i] = words[i] + "." if rng.random() < 0.7 else words[i] + ","
            if i + 1 < len(words):
                words[i + 1] = words[i + 1].capitalize()
        corpus.append(" ".join(words).capitalize() + ".")
    return corpus


def best_of(repeats: int, fn) -> float:
    best = None
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        elapsed = time.perf_counter() - started
        if best is None or elapsed < best:
            best = elapsed
    return best


def bench_backend(impl, corpus: list[str], repeats: int) -> dict[str, float]:
    return {
        "token_spans": best_of(repeats, lambda: [impl.token_spans(t) for t in corpus]),
        "count_matches": best_of(
            repeats, lambda: [impl.count_matches(t, TERMS) for t in corpus]
        ),
        "split_sentences": best_of(
            repeats, lambda: [impl.split_sentences(t) for t in corpus]
        ),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--texts", type=int, default=2000, help="corpus size")
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats")
    parser.add_argument("--seed", type=int, default=13, help="corpus seed")
    args = parser.parse_args()

    corpus = build_corpus(args.texts, args.seed)
    total_chars = sum(len(t) for t in corpus)
    print(f"corpus: {len(corpus)} texts, {total_chars} chars, seed {args.seed}")

    pure = bench_backend(pytext, corpus, args.repeats)
    compiled = bench_backend(_ctext, corpus, args.repeats) if _ctext else None

    header = f"{'kernel':<16} {'pure':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, pure_s in pure.items():
        if compiled is None:
            print(f"{name:<16} {pure_s * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
        else:
            comp_s = compiled[name]
            print(
                f"{name:<16} {pure_s * 1e3:>8.1f}ms {comp_s * 1e3:>8.1f}ms "
                f"{pure_s / comp_s:>7.1f}x"
            )
    if compiled is None:
        print("compiled extension not importable; only the fallback was timed")


if __name__ == "__main__":
    main()
