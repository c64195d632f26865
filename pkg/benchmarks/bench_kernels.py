"""Benchmark the certification kernels: numba backend vs pure numpy.

Runs the same learner-vs-adversary batches through both backends, checks the
outputs are identical, and reports wall-clock timings.

    python3 benchmarks/bench_kernels.py [--trials 500] [--horizon 10000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from socialcoop._kernels import available_backends, learner_regret_batch
from socialcoop.agents import default_hedge_rate
from socialcoop.games import make_coordpref_game


def bench(kind, matrix, eta, code, horizon, trials, backend, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = learner_regret_batch(
            kind, matrix, eta, code, horizon, trials, seed=0, backend=backend
        )
        best = min(best, time.perf_counter() - start)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--horizon", type=int, default=10000)
    args = parser.parse_args()

    backends = sorted(available_backends())
    print(f"backends: {backends}  trials={args.trials}  horizon={args.horizon}")
    game = make_coordpref_game(2, 0.6, args.horizon)
    matrix = game.payoff_matrix(0)
    eta = default_hedge_rate(game.n_actions, args.horizon)

    if "numba" in backends:
        # One warmup call so JIT compilation is not billed to the benchmark.
        learner_regret_batch("hedge", matrix, eta, 0, 100, 2, seed=0, backend="numba")

    header = f"{'learner':<16} {'adversary':<10}" + "".join(f" {b:>12}" for b in backends)
    print(header)
    print("-" * len(header))
    adversaries = [("const-0", 0), ("const-1", 1), ("uniform", -1), ("flip", -2)]
    for kind in ("hedge", "regret_matching"):
        for name, code in adversaries:
            times, outputs = {}, {}
            for b in backends:
                times[b], outputs[b] = bench(
                    kind, matrix, eta, code, args.horizon, args.trials, b
                )
            row = f"{kind:<16} {name:<10}" + "".join(
                f" {times[b] * 1000:>10.1f}ms" for b in backends
            )
            if len(backends) == 2:
                same = np.array_equal(outputs[backends[0]], outputs[backends[1]])
                row += "   identical" if same else "   MISMATCH"
            print(row)


if __name__ == "__main__":
    main()
