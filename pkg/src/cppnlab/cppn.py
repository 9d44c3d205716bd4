"""Randomly weighted per-pixel networks and image rendering.

A network maps a single pixel coordinate triple (x, y, r) through a stack
of fully connected hidden layers with activation tanh(z^3) into a 3-wide
sigmoid output head giving (R, G, B) in (0, 1). Rendering evaluates the
network independently for every pixel of a coordinate grid spanning
[-1, 1] x [-1, 1], with r the distance from the image center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arch import ArchitectureSpec, layer_sizes
from .image import ImageRGB, quantize_unit
from .rng import make_generator, normals

__all__ = [
    "Network",
    "build_network",
    "forward",
    "forward_batch",
    "coordinate_grid",
    "render",
    "render_field",
]

INPUT_ARITY = 3  # (x, y, r)
OUTPUT_ARITY = 3  # (R, G, B)

# tanh saturates to exactly 1.0 in float64 well below this cube; clipping
# the pre-activation here cannot change any output but bounds z**3.
_PREACT_CLIP = 64.0


@dataclass(frozen=True)
class Network:
    """Immutable stack of (weights, biases) pairs; last layer is the RGB head."""

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        prev = INPUT_ARITY
        for w, b in self.layers:
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ValueError(f"inconsistent layer shapes {w.shape} / {b.shape}")
            if w.shape[1] != prev:
                raise ValueError(f"layer input width {w.shape[1]} != previous output {prev}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError("non-finite network parameters")
            prev = w.shape[0]
        if prev != OUTPUT_ARITY:
            raise ValueError(f"output width must be {OUTPUT_ARITY}, got {prev}")


def build_network(spec: ArchitectureSpec) -> Network:
    """Realize a network from a spec, drawing all parameters N(0, 1).

    The draw order is fixed: layers first to last, and within each layer
    the weight matrix in row-major order followed by the bias vector. The
    same spec (including seed) always yields a bit-identical network.
    """
    if spec.seed is None:
        raise ValueError("spec.seed must be set to build a network")
    widths = layer_sizes(spec) + [OUTPUT_ARITY]
    gen = make_generator(spec.seed)
    layers = []
    fan_in = INPUT_ARITY
    for width in widths:
        w = normals(gen, width * fan_in).reshape(width, fan_in)
        b = normals(gen, width)
        layers.append((w, b))
        fan_in = width
    return Network(layers=tuple(layers))


def forward_batch(net: Network, points: np.ndarray) -> np.ndarray:
    """Evaluate the network on a (P, 3) batch of (x, y, r) rows.

    Hidden layers cube the affine pre-activation and apply tanh; the output
    head applies the logistic sigmoid, so results lie in (0, 1)^3.
    """
    v = np.asarray(points, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != INPUT_ARITY:
        raise ValueError(f"expected (P, {INPUT_ARITY}) input, got {v.shape}")
    *hidden, head = net.layers
    for w, b in hidden:
        z = v @ w.T + b
        np.clip(z, -_PREACT_CLIP, _PREACT_CLIP, out=z)
        v = np.tanh(z * z * z)
    z = v @ head[0].T + head[1]
    out = np.empty_like(z)
    np.negative(z, out=out)
    np.exp(out, out=out)
    out += 1.0
    np.reciprocal(out, out=out)
    return out


def forward(net: Network, x: float, y: float, r: float) -> tuple[float, float, float]:
    """Single-pixel evaluation; returns the (R, G, B) triple."""
    rgb = forward_batch(net, np.array([[x, y, r]]))
    return float(rgb[0, 0]), float(rgb[0, 1]), float(rgb[0, 2])


def _axis(n: int) -> np.ndarray:
    if n == 1:
        return np.zeros(1)
    return -1.0 + 2.0 * np.arange(n) / (n - 1)


def coordinate_grid(width: int, height: int) -> np.ndarray:
    """(height * width, 3) rows of (x, y, r), row-major over pixels.

    Pixel (i, j) maps to x = -1 + 2i/(width-1) and y = -1 + 2j/(height-1),
    so the borders land exactly on the [-1, 1] interval ends; a singleton
    axis sits at 0. r is the Euclidean distance from the center.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    xs = _axis(width)
    ys = _axis(height)
    x = np.tile(xs, height)
    y = np.repeat(ys, width)
    r = np.hypot(x, y)
    return np.column_stack([x, y, r])


def render_field(net: Network, width: int, height: int) -> np.ndarray:
    """Pre-quantization render: (height, width, 3) float64 in (0, 1)."""
    pts = coordinate_grid(width, height)
    # Chunk rows to bound peak memory on wide layers; per-pixel results do
    # not depend on the batch split.
    out = np.empty((height * width, OUTPUT_ARITY))
    max_width = max(w.shape[0] for w, _ in net.layers)
    chunk = max(1024, min(height * width, (1 << 25) // max(max_width, 1)))
    for start in range(0, height * width, chunk):
        out[start : start + chunk] = forward_batch(net, pts[start : start + chunk])
    return out.reshape(height, width, OUTPUT_ARITY)


def render(net: Network, width: int, height: int) -> ImageRGB:
    """Render to 8-bit RGB. Deterministic for a given network and size."""
    return ImageRGB(quantize_unit(render_field(net, width, height)))
