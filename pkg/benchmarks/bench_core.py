"""Time the compiled and pure-Python tie-block kernels on the same inputs.

    python benchmarks/bench_core.py [--reps 20000] [--repeat 5]

Each row reports the best of ``--repeat`` runs over a batch of ``--reps``
datasets, and checks that both kernels return identical moments.
"""

import argparse
import timeit

import numpy as np

from npbehrens import _backend
from npbehrens.inference import permutation_test

SIZES = ((10, 10), (15, 30), (50, 50), (100, 200))


def batch(n1, n2, reps, tied, seed=0):
    rng = np.random.default_rng(seed)
    shape = (reps, n1 + n2)
    data = rng.integers(1, 6, shape).astype(float) if tied else rng.normal(size=shape)
    return _backend.sorted_blocks(data, n1)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["python"] + (["compiled"] if _backend.BACKEND == "compiled" else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the python fallback only")

    print(f"{'n1':>5}{'n2':>5}  {'data':<7}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for n1, n2 in SIZES:
        for tied in (False, True):
            blocks, labels = batch(n1, n2, args.reps, tied)
            times, outs = [], []
            for b in backends:
                outs.append(_backend.block_moments(blocks, labels, b))
                times.append(best(lambda b=b: _backend.block_moments(blocks, labels, b), args.repeat))
            assert all(np.array_equal(outs[0], o) for o in outs[1:]), "kernels disagree"
            speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
            kind = "ties" if tied else "cont"
            print(f"{n1:>5}{n2:>5}  {kind:<7}" + "".join(f"{1e3 * t:>14.2f}" for t in times) + f"{speed:>10}")

    rng = np.random.default_rng(1)
    x1, x2 = rng.normal(size=30), rng.normal(0.5, size=30)
    print("\npermutation_test, n = (30, 30), n_p = 10000")
    for b in backends:
        t = best(lambda b=b: permutation_test(x1, x2, n_p=10_000, seed=1, backend=b), args.repeat)
        print(f"  {b:<9}{1e3 * t:9.1f} ms")


if __name__ == "__main__":
    main()
