"""Seeded, portable random number generation.

All randomness in the package flows through Philox, a counter-based 64-bit
bit generator whose streams are stable across platforms and numpy versions.
Standard normals are produced with the Box-Muller transform on top of the
uniform stream rather than numpy's ziggurat sampler, so the exact draw
sequence is documented and reproducible from the seed alone.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_generator", "normals"]


def make_generator(seed: int) -> np.random.Generator:
    """Return a Philox-backed generator keyed by a 64-bit unsigned seed."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


def normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. N(0, 1) values via Box-Muller.

    Consumes exactly ``2 * ceil(n / 2)`` uniform doubles from ``gen``:
    doubles are drawn as one block and split into alternating (u1, u2)
    pairs, each pair yielding the usual (r cos, r sin) couple, which is
    emitted interleaved and truncated to ``n``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return np.empty(0)
    m = (n + 1) // 2
    u = gen.random(2 * m)
    u1 = 1.0 - u[0::2]  # (0, 1]; log is safe
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]
