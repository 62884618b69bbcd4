"""Throughput comparison of the event kernels.

Runs the same workload through every available backend and reports
events per second. The backends are bit-identical, so the only thing
that differs is speed.
"""

import argparse
import time

import numpy as np

from moranweights import kernel
from moranweights.model import ModelConfig
from moranweights.randomness import seed_sequence
from moranweights.weights import monotone_slack


def bench_sampling(backend: str, config: ModelConfig, events: int) -> float:
    impl = kernel.get_backend(backend)
    bg = np.random.PCG64(seed_sequence(config.seed))
    start = time.perf_counter()
    impl.sample_events(bg, config.population_size, config.parent_count,
                       config.variant_code, events)
    return events / (time.perf_counter() - start)


def bench_replicates(backend: str, config: ModelConfig, replicates: int) -> tuple[float, int]:
    impl = kernel.get_backend(backend)
    tracked = np.asarray([0], dtype=np.int64)
    slack = monotone_slack(config.parent_count)
    n = config.population_size
    total_steps = 0
    start = time.perf_counter()
    for r in range(replicates):
        bg = np.random.PCG64(seed_sequence(config.seed, r))
        _, _, steps = impl.run_replicate(bg, n, config.parent_count,
                                         config.variant_code, tracked,
                                         1e-9, 100 * n * n, n, slack)
        total_steps += int(steps)
    return total_steps / (time.perf_counter() - start), total_steps


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pop-size", type=int, default=100)
    parser.add_argument("--parents", type=int, default=2)
    parser.add_argument("--events", type=int, default=2_000_000,
                        help="events for the raw sampling benchmark")
    parser.add_argument("--replicates", type=int, default=20,
                        help="full convergence runs per backend")
    args = parser.parse_args()

    config = ModelConfig(population_size=args.pop_size, parent_count=args.parents)
    print(f"N={args.pop_size} m={args.parents} backends={kernel.available_backends()}")
    print(f"{'backend':<10} {'sample events/s':>18} {'replicate events/s':>20}")
    rates = {}
    for backend in kernel.available_backends():
        events = args.events if backend != "python" else max(args.events // 20, 10_000)
        replicates = args.replicates if backend != "python" else max(args.replicates // 5, 3)
        sample_rate = bench_sampling(backend, config, events)
        run_rate, total = bench_replicates(backend, config, replicates)
        rates[backend] = run_rate
        print(f"{backend:<10} {sample_rate:>18,.0f} {run_rate:>20,.0f}   "
              f"({total:,} events)")
    if "cython" in rates and "python" in rates:
        print(f"speedup (full run): {rates['cython'] / rates['python']:.1f}x")


if __name__ == "__main__":
    main()
