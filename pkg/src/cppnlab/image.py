"""8-bit RGB image container, quantization rule, and PNG round-trips."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["ImageRGB", "quantize_unit", "save_png", "save_png_gray", "load_png"]


@dataclass(frozen=True)
class ImageRGB:
    """Pixel data as a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"expected (H, W, 3) uint8 pixels, got {p.shape} {p.dtype}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def quantize_unit(values: np.ndarray) -> np.ndarray:
    """Map values in (0, 1) to uint8 by round-half-away-from-zero.

    For non-negative inputs this is floor(255 * v + 0.5), which avoids the
    round-half-to-even behaviour of ``np.round``.
    """
    return np.floor(255.0 * np.asarray(values) + 0.5).astype(np.uint8)


def save_png(img: ImageRGB, path: str | Path) -> None:
    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")


def save_png_gray(values: np.ndarray, path: str | Path) -> None:
    """Write a single-channel uint8 array as a grayscale PNG."""
    if values.ndim != 2 or values.dtype != np.uint8:
        raise ValueError(f"expected (H, W) uint8 array, got {values.shape} {values.dtype}")
    Image.fromarray(values, mode="L").save(path, format="PNG")


def load_png(path: str | Path) -> ImageRGB:
    """Load any PIL-decodable image as RGB (grayscale expands to equal channels)."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return ImageRGB(np.asarray(rgb, dtype=np.uint8))
