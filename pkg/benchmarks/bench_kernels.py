"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, size, backend) with the best wall time and the
speed-up of the compiled backend over the fallback.
"""

import argparse
import math
import timeit

import numpy as np

from blockrip._kernels import available_backends, get_backend


def admm_case(n, K):
    g = np.random.default_rng(0)

    def make():
        c = lambda: np.ascontiguousarray(g.standard_normal((n, K)) + 1j * g.standard_normal((n, K)))
        return c(), c(), c(), np.full(K, 0.5)

    return f"admm_shrink_update n={n} K={K}", make, lambda k, args: k.admm_shrink_update(*args)


def ric_case(n, S):
    g = np.random.default_rng(1)
    B = g.standard_normal((n // 2, n)) + 1j * g.standard_normal((n // 2, n))
    G = np.ascontiguousarray(B.conj().T @ B / (n // 2))
    label = f"ric_enumerate n={n} S={S} ({math.comb(n, S)} supports)"
    return label, lambda: (G, S), lambda k, args: k.ric_enumerate(*args)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the NumPy fallback is timed")
    cases = [admm_case(128, 20), admm_case(8192, 20), ric_case(16, 2), ric_case(16, 4), ric_case(24, 3)]
    for label, make, call in cases:
        times = {}
        for name in backends:
            k = get_backend(name)
            data = make()
            t = timeit.Timer(lambda: call(k, data))
            number, _ = t.autorange()
            times[name] = min(t.repeat(repeat=args.repeat, number=number)) / number
        line = "  ".join(f"{name}={times[name] * 1e3:9.3f} ms" for name in backends)
        if len(times) == 2:
            line += f"  speed-up x{times['python'] / times['cython']:.1f}"
        print(f"{label:<48} {line}")


if __name__ == "__main__":
    main()
