"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_accel.py [--repeat 3]

Both backends run in one process (the env flag only picks the default);
results are checked for agreement before timings are printed.
"""

import argparse
import time

from somepairs import _accel
from somepairs.bounds import brute_force_expansion
from somepairs.graph import gen_hd1_up, gen_random
from somepairs.planners import plan_prefix


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    g = gen_random(28, 250, seed=0)
    yield "expansion n=28 q=5", lambda be: brute_force_expansion(g, 5, backend=be).phi
    h = gen_hd1_up(12)
    csr = plan_prefix(h, 4).csr()  # packed once; only the kernel is timed
    yield "cover prefix b=12 q=4", lambda be: int(
        _accel.cover_counts(*csr, h.edge_codes, h.n_y, backend=be).sum())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _accel.available_backends()
    print(f"{'case':<24}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for name, fn in cases():
        for be in backends:
            fn(be)  # warm up (JIT compile)
        times, results = zip(*(best_of(lambda: fn(be), args.repeat) for be in backends))
        assert len(set(results)) == 1, f"{name}: backends disagree {results}"
        speed = f"{times[-1] / times[0]:.1f}x" if len(times) > 1 else "-"
        print(f"{name:<24}" + "".join(f"{t:>11.4f}s" for t in times) + f"{speed:>12}")


if __name__ == "__main__":
    main()
