"""Benchmark the shot-sampling kernels: numba @njit loop vs pure-numpy twin.

Both backends consume the same counter-based stream and return identical
counts, so this is a pure speed comparison. Run:

    python3 benchmarks/bench_sampling.py [shots_per_block] [n_blocks]
"""

import sys
import time

import numpy as np

from adqkd import sampling

# a BB84-like block: 2 outcomes, 1 measured bit, readout flip 3%
CUM = np.array([[0.91, 1.0]])
BITS = np.array([[[0], [1]]], dtype=np.uint8)
FLIPS = np.array([0.03])

# an encoded-protocol block: 4 outcomes, data bit + detection bit
CUM_ENC = np.array([[0.02, 0.05, 0.72, 1.0]])
BITS_ENC = np.array([[[0, 0], [1, 0], [0, 1], [1, 1]]], dtype=np.uint8)
FLIPS_ENC = np.array([0.03, 0.054])


def run(backend, shots, blocks, encoded=False):
    total = np.zeros(2, dtype=np.int64)
    for i in range(blocks):
        if encoded:
            s, e = sampling.sample_block(
                1234 ^ i, shots, CUM_ENC, BITS_ENC, FLIPS_ENC,
                ps_index=1, data_flags=[True, False], backend=backend,
            )
        else:
            s, e = sampling.sample_block(1234 ^ i, shots, CUM, BITS, FLIPS, backend=backend)
        total += (s[0], e[0])
    return total


def bench(backend, shots, blocks, encoded):
    start = time.perf_counter()
    counts = run(backend, shots, blocks, encoded)
    elapsed = time.perf_counter() - start
    rate = shots * blocks / elapsed / 1e6
    return counts, elapsed, rate


def main():
    shots = int(sys.argv[1]) if len(sys.argv) > 1 else 32768
    blocks = int(sys.argv[2]) if len(sys.argv) > 2 else 256
    backends = ["numpy"] + (["numba"] if sampling.HAS_NUMBA else [])
    if sampling.HAS_NUMBA:
        run("numba", 128, 2)  # trigger JIT outside the timed section
        run("numba", 128, 2, encoded=True)
    print(f"{shots} shots/block x {blocks} blocks")
    for encoded in (False, True):
        kind = "encoded " if encoded else "plain   "
        reference = None
        for backend in backends:
            counts, elapsed, rate = bench(backend, shots, blocks, encoded)
            if reference is None:
                reference = counts
            agree = "ok" if np.array_equal(counts, reference) else "MISMATCH"
            print(
                f"  {kind} {backend:>5}: {elapsed:7.3f}s  {rate:7.1f} Mshot/s  "
                f"counts {counts.tolist()}  [{agree}]"
            )


if __name__ == "__main__":
    main()
