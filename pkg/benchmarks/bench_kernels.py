"""Benchmark the compiled kernel against the pure-python fallback.

Times forward_backward and masked_logits on representative workloads and
reports per-call latency plus speedup. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import statistics
import time

import numpy as np

from restyle import _pykernels
from restyle.rng import Xoshiro256StarStar

try:
    from restyle import _ckernels
except ImportError:
    _ckernels = None


def make_case(seed, n, v, d, window=3):
    rng = Xoshiro256StarStar(seed)
    E = np.array([[rng.random() - 0.5 for _ in range(d)] for _ in range(v)])
    W = np.array([[rng.random() - 0.5 for _ in range(d)] for _ in range(v)])
    ids = np.array([rng.randbelow(v) for _ in range(n)], dtype=np.int64)
    weights = np.array([rng.random() if rng.random() < 0.4 else 0.0 for _ in range(n)])
    m = max(1, n // 3)
    masked = np.array(sorted(set(rng.randbelow(n) for _ in range(m))), dtype=np.int64)
    targets = np.array([rng.randbelow(v) for _ in range(masked.size)], dtype=np.int64)
    ctrl = rng.randbelow(v)
    return E, W, ids, weights, masked, targets, ctrl, 0, window


def time_call(fn, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench(impl, case, repeats):
    E, W, ids, weights, masked, targets, ctrl, mask_id, window = case
    dE, dW = np.zeros_like(E), np.zeros_like(W)

    fwd = time_call(
        lambda: impl.forward_backward(
            E, W, ids, weights, masked, targets, ctrl, mask_id, window, dE, dW
        ),
        repeats,
    )
    logits = time_call(
        lambda: impl.masked_logits(E, W, ids, weights, masked, ctrl, mask_id, window),
        repeats,
    )
    return fwd, logits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    cases = [
        ("small  (n=12,  |V|=64,  d=32)", make_case(1, 12, 64, 32)),
        ("medium (n=24,  |V|=256, d=64)", make_case(2, 24, 256, 64)),
        ("large  (n=48,  |V|=1024,d=64)", make_case(3, 48, 1024, 64)),
    ]

    print(f"{'case':32s} {'python (us)':>12s} {'cython (us)':>12s} {'speedup':>8s}")
    for name, case in cases:
        py_fwd, py_logits = bench(_pykernels, case, args.repeats)
        if _ckernels is None:
            print(f"{name:32s} {py_fwd * 1e6:12.1f} {'n/a':>12s} {'n/a':>8s}")
            continue
        c_fwd, c_logits = bench(_ckernels, case, args.repeats)
        print(
            f"{name + ' fb':32s} {py_fwd * 1e6:12.1f} {c_fwd * 1e6:12.1f} "
            f"{py_fwd / c_fwd:7.1f}x"
        )
        print(
            f"{name + ' logits':32s} {py_logits * 1e6:12.1f} {c_logits * 1e6:12.1f} "
            f"{py_logits / c_logits:7.1f}x"
        )


if __name__ == "__main__":
    main()
