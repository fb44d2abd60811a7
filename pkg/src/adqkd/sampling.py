"""Shot-sampling kernels: numba-jitted hot loop with a pure-numpy twin.

Both backends consume the same counter-based splitmix64 stream, so they
produce bit-identical counts; results depend only on (seed, block layout),
never on the backend or on any global RNG state. Select the backend with
the environment variable ``ADQKD_BACKEND`` (``numba`` or ``numpy``); the
default is numba when importable, else numpy.

Uniform k of a stream is ``mix64(seed + (k+1)*GOLDEN) >> 11`` scaled to
[0, 1). Per shot the layout is: one state draw (only when sampling from
more than one prepared state), one outcome draw, then one readout-flip
draw per measured bit. Block i of a plan derives its stream seed as
``seed XOR i``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


ENV_BACKEND = "ADQKD_BACKEND"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def splitmix64_reference(seed: int, count: int) -> list:
    """Pure-python reference of the uniform stream (tests only)."""
    out = []
    for k in range(count):
        z = (seed + (k + 1) * 0x9E3779B97F4A7C15) & _U64_MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64_MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64_MASK
        z = z ^ (z >> 31)
        out.append((z >> 11) * _INV_2_53)
    return out


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for sweep point ``index`` (splitmix64 mix)."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _U64_MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64_MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64_MASK
    return (z ^ (z >> 31)) & _U64_MASK


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """Vectorized splitmix64 stream: ``count`` float64 uniforms in [0, 1)."""
    ks = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _U64_MASK) + ks * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


@njit(cache=True)
def _sample_block_numba(seed, n_shots, cum, bits, flips, ps_index, data_flags, xor_ref, sifted, errors):
    n_states = cum.shape[0]
    n_outcomes = cum.shape[1]
    n_bits = bits.shape[2]
    stride = n_bits + 1 + (1 if n_states > 1 else 0)
    golden = np.uint64(0x9E3779B97F4A7C15)
    mix1 = np.uint64(0xBF58476D1CE4E5B9)
    mix2 = np.uint64(0x94D049BB133111EB)
    base = np.uint64(seed)
    inv = 1.0 / 9007199254740992.0
    for shot in range(n_shots):
        k = np.uint64(shot * stride)
        slot = np.uint64(0)
        # state draw (multi-state blocks only)
        s = 0
        if n_states > 1:
            z = base + (k + np.uint64(1)) * golden
            z = (z ^ (z >> np.uint64(30))) * mix1
            z = (z ^ (z >> np.uint64(27))) * mix2
            z = z ^ (z >> np.uint64(31))
            u = np.float64(z >> np.uint64(11)) * inv
            s = int(u * n_states)
            if s >= n_states:
                s = n_states - 1
            slot = np.uint64(1)
        # outcome draw
        z = base + (k + slot + np.uint64(1)) * golden
        z = (z ^ (z >> np.uint64(30))) * mix1
        z = (z ^ (z >> np.uint64(27))) * mix2
        z = z ^ (z >> np.uint64(31))
        u = np.float64(z >> np.uint64(11)) * inv
        j = 0
        while j < n_outcomes - 1 and u >= cum[s, j]:
            j += 1
        # readout flips, then sift/error classification
        kept = True
        parity = np.uint8(0)
        for m in range(n_bits):
            z = base + (k + slot + np.uint64(2 + m)) * golden
            z = (z ^ (z >> np.uint64(30))) * mix1
            z = (z ^ (z >> np.uint64(27))) * mix2
            z = z ^ (z >> np.uint64(31))
            u = np.float64(z >> np.uint64(11)) * inv
            bit = bits[s, j, m]
            if u < flips[m]:
                bit = bit ^ np.uint8(1)
            if m == ps_index and bit != np.uint8(1):
                kept = False
            if data_flags[m]:
                parity = parity ^ bit
        if kept:
            sifted[s] += 1
            if parity != xor_ref[s]:
                errors[s] += 1


def _sample_block_numpy(seed, n_shots, cum, bits, flips, ps_index, data_flags, xor_ref, sifted, errors):
    n_states, n_outcomes = cum.shape
    n_bits = bits.shape[2]
    stride = n_bits + 1 + (1 if n_states > 1 else 0)
    u = uniform_stream(seed, n_shots * stride).reshape(n_shots, stride)
    col = 0
    if n_states > 1:
        s = np.minimum((u[:, 0] * n_states).astype(np.int64), n_states - 1)
        col = 1
    else:
        s = np.zeros(n_shots, dtype=np.int64)
    # inverse CDF: count of cumulative weights <= u, capped at the last outcome
    j = np.minimum((u[:, col, None] >= cum[s, : n_outcomes - 1]).sum(axis=1), n_outcomes - 1)
    final = bits[s, j, :] ^ (u[:, col + 1 : col + 1 + n_bits] < flips[None, :]).astype(np.uint8)
    kept = np.ones(n_shots, dtype=bool) if ps_index < 0 else final[:, ps_index] == 1
    parity = np.bitwise_xor.reduce(final[:, data_flags], axis=1)
    err = parity != xor_ref[s]
    np.add.at(sifted, s[kept], 1)
    np.add.at(errors, s[kept & err], 1)


def active_backend() -> str:
    """Resolve the sampling backend from ADQKD_BACKEND (numba default)."""
    choice = os.environ.get(ENV_BACKEND, "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError("ADQKD_BACKEND=numba but numba is not importable")
        return choice
    return "numba" if HAS_NUMBA else "numpy"


def sample_block(seed, n_shots, cum_probs, outcome_bits, flip_probs, ps_index=-1,
                 data_flags=None, xor_ref=None, backend=None):
    """Sample one block of shots; returns (sifted, errors) counts per state.

    Args:
        seed: 64-bit stream seed for this block.
        n_shots: shots in the block.
        cum_probs: (S, K) cumulative outcome probabilities per prepared state.
        outcome_bits: (S, K, M) uint8 ideal bit values of each outcome.
        flip_probs: (M,) readout flip probability per measured bit.
        ps_index: index of the post-selection bit (kept when it reads 1),
            or -1 when every shot is sifted.
        data_flags: (M,) bools marking the key-material bits.
        xor_ref: (S,) expected XOR of the data bits; a shot errs when the
            flipped data bits XOR to anything else.
        backend: "numba" | "numpy" | None (None = ADQKD_BACKEND / default).
    """
    cum = np.ascontiguousarray(cum_probs, dtype=np.float64)
    bits = np.ascontiguousarray(outcome_bits, dtype=np.uint8)
    flips = np.ascontiguousarray(flip_probs, dtype=np.float64)
    if cum.ndim != 2 or bits.shape[:2] != cum.shape or bits.shape[2] != flips.size:
        raise ValueError("inconsistent block layout")
    if n_shots < 1:
        raise ValueError("a block needs at least one shot")
    n_states = cum.shape[0]
    if data_flags is None:
        data_flags = np.ones(flips.size, dtype=bool)
    data_flags = np.ascontiguousarray(data_flags, dtype=bool)
    if xor_ref is None:
        xor_ref = np.zeros(n_states, dtype=np.uint8)
    xor_ref = np.ascontiguousarray(xor_ref, dtype=np.uint8)
    sifted = np.zeros(n_states, dtype=np.int64)
    errors = np.zeros(n_states, dtype=np.int64)
    which = backend if backend is not None else active_backend()
    if which == "numba":
        _sample_block_numba(
            np.uint64(int(seed) & _U64_MASK), int(n_shots), cum, bits, flips,
            int(ps_index), data_flags, xor_ref, sifted, errors,
        )
    elif which == "numpy":
        _sample_block_numpy(
            int(seed) & _U64_MASK, int(n_shots), cum, bits, flips,
            int(ps_index), data_flags, xor_ref, sifted, errors,
        )
    else:
        raise ValueError(f"unknown backend {which!r}")
    return sifted, errors
