"""Time each kernel on its numba path and its numpy path.

    python benchmarks/bench_kernels.py [--repeat N] [--size S]

Compilation happens once before timing; the table reports the best of
``--repeat`` runs in milliseconds.
"""
import argparse
import time

import numpy as np

from patgen import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times) * 1e3


def cases(size, rng):
    trace = rng.integers(0, 4, size=size)
    dag = np.triu(rng.random((size, size)) < 0.05, 1)
    closed = _kernels.transitive_closure(dag, jit=False)
    a = rng.integers(0, 4, size=size)
    b = rng.integers(0, 4, size=size)
    row = np.arange(size + 1)

    def indel(jit):
        r = row
        for x in b[:50]:
            r = _kernels.indel_step(r, a, x, jit=jit)
        return r

    return {
        "tandem_candidates": lambda jit: _kernels.tandem_candidates(trace, jit=jit),
        "transitive_closure": lambda jit: _kernels.transitive_closure(dag, jit=jit),
        "transitive_reduction": lambda jit: _kernels.transitive_reduction(closed, jit=jit),
        "lcs_length": lambda jit: _kernels.lcs_length(a, b, jit=jit),
        "indel_step x50": indel,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=300, help="trace length / number of events")
    args = parser.parse_args()
    if not _kernels.USE_NUMBA:
        parser.error("numba path disabled (unset PATGEN_DISABLE_NUMBA to compare)")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numba ms':>12}{'numpy ms':>12}{'ratio':>9}")
    for name, fn in cases(args.size, rng).items():
        fn(True)  # compile
        assert np.array_equal(np.asarray(fn(True)), np.asarray(fn(False)))
        jit_ms = best_of(lambda: fn(True), args.repeat)
        np_ms = best_of(lambda: fn(False), args.repeat)
        print(f"{name:<22}{jit_ms:>12.3f}{np_ms:>12.3f}{np_ms / jit_ms:>8.1f}x")


if __name__ == "__main__":
    main()
