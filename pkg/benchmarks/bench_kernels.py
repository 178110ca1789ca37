"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import timeit

from nosqint import _kernels_py as py
from nosqint import kernels


def random_rows(rng: random.Random, n_objects: int, n_attrs: int, density: float) -> list[int]:
    return [sum(1 << j for j in range(n_attrs) if rng.random() < density) for _ in range(n_objects)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not available; build the extension first")
    from nosqint import _ckernels as c

    rng = random.Random(7)
    rows = random_rows(rng, 40, 14, 0.35)
    words = ["".join(rng.choice("abcdefgh") for _ in range(rng.randint(3, 14))) for _ in range(60)]
    pairs = [(a, b) for a in words[:30] for b in words[30:]]
    cases = [
        ("next_closure_intents 40x14", lambda m: m.next_closure_intents(rows, 14)),
        ("closure x1000", lambda m: [m.closure(rows, 14, 1 << (i % 14)) for i in range(1000)]),
        ("levenshtein 900 pairs", lambda m: [m.levenshtein(a, b) for a, b in pairs]),
    ]
    print(f"{'kernel':32} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in cases:
        assert fn(py) == fn(c), name
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(c), number=1, repeat=args.repeat))
        print(f"{name:32} {tp:10.4f} {tc:10.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
