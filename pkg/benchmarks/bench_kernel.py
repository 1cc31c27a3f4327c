"""Compare the compiled and pure-Python cascade kernels.

    python benchmarks/bench_kernel.py [--scale X] [--repeat K]

Both kernels get identical inputs; their outputs are checked for equality
before any timing is reported.
"""

import argparse
import time

import numpy as np

from habicascade import backend
from habicascade.diffusion import DiffusionConfig, Ranking, Seeding, draw_stream, rank_nodes, run_batch
from habicascade.graph import generate_ba, star_graph

CASES = [
    ("star3, single", star_graph(3), DiffusionConfig(0.5, 0.25), 20_000),
    ("BA(1000,7), single+hab", generate_ba(1000, 7, 1), DiffusionConfig(0.05, 0.02), 50),
    ("BA(1000,7), sequential+hab", generate_ba(1000, 7, 1),
     DiffusionConfig(0.05, 0.02, seeding=Seeding.SEQUENTIAL), 50),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=1.0, help="multiply run counts")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    names = backend.available_backends()
    if "cython" not in names:
        print("compiled kernel not built; only the Python fallback is available")
    print(f"{'case':<30}{'runs':>8}" + "".join(f"{n + ' us/run':>18}" for n in names) + f"{'speedup':>10}")
    for label, g, cfg, runs in CASES:
        runs = max(1, int(runs * args.scale))
        draws = draw_stream(g, 7, runs)
        ranking = rank_nodes(g, Ranking.DEGREE)
        timings, outputs = {}, {}
        for name in names:
            kernel = backend.get_kernel(name)
            timings[name], outputs[name] = best_of(
                lambda: run_batch(g, cfg, draws, ranking, kernel=kernel), args.repeat)
        ref = outputs[names[0]]
        for name in names[1:]:
            assert np.array_equal(ref.activation_time, outputs[name].activation_time), name
        cols = "".join(f"{1e6 * timings[n] / runs:>18.2f}" for n in names)
        speed = timings["python"] / timings["cython"] if "cython" in timings else float("nan")
        print(f"{label:<30}{runs:>8}{cols}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
