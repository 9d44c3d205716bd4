"""Two-point correlation structure of grayscale images.

For every pixel displacement a = (dx, dy) the Pearson correlation is taken
over all overlapping pixel pairs {(i(p + a), i(p))}. Writing N(a) for the
pair count and mu/sigma for mean and standard deviation over the two
overlap windows, the coefficient is

    rho(a) = (sum_p i(p+a) i(p) / N(a) - mu(a) mu(-a)) / (sigma(a) sigma(-a))

and every term is obtained from linear cross-correlations computed with
zero-padded real FFTs: the raw term from the image against itself, N(a)
from an all-ones mask against itself, and the windowed means and variances
from mask correlations of the image and its square.

Because rho(a) = rho(-a), only the upper half-plane of displacements is
kept. The retained universe mirrors the double-resolution convolution
output convention: for an H x W image it holds W * (2H - 1) displacements
(523776 at 512 x 512), which includes a margin of zero-overlap lags that
always land in the excluded set.

Angle information is averaged out by binning each displacement into the
unit-width distance bin floor(|a|), producing a correlation curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.fft import irfft2, next_fast_len, rfft2

from .image import ImageRGB

__all__ = [
    "REC601_WEIGHTS",
    "VARIANCE_FLOOR",
    "Luminance",
    "luminance",
    "CorrelationMap",
    "correlation_map",
    "brute_force_rho",
    "CorrelationCurve",
    "radial_curve",
    "curve_to_csv",
    "save_map",
    "load_map",
]

# Rec. 601 luma coefficients; configurable at the call sites.
REC601_WEIGHTS = (0.299, 0.587, 0.114)

# Displacements whose windowed std-dev product falls at or below this are
# excluded rather than allowed to poison radial bins with near-0/0 noise.
VARIANCE_FLOOR = 1e-12

_MAP_MAGIC = b"CPPNCMAP"


@dataclass(frozen=True)
class Luminance:
    """Per-pixel scalar brightness in [0, 1] as a (H, W) float64 array."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.dtype != np.float64:
            raise ValueError(f"expected (H, W) float64 values, got {v.shape} {v.dtype}")
        if not np.isfinite(v).all():
            raise ValueError("non-finite luminance values")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def luminance(img: ImageRGB, weights: tuple[float, float, float] = REC601_WEIGHTS) -> Luminance:
    """Collapse RGB to a [0, 1] scalar channel with the given weights."""
    if len(weights) != 3:
        raise ValueError("luminance needs exactly three channel weights")
    rgb = img.pixels.astype(np.float64)
    v = (weights[0] * rgb[:, :, 0] + weights[1] * rgb[:, :, 1] + weights[2] * rgb[:, :, 2]) / 255.0
    return Luminance(v)


@dataclass(frozen=True)
class CorrelationMap:
    """Per-displacement Pearson coefficients over the upper half-plane.

    Arrays are laid out as (H, 2W) grids indexed by dy = 0..H-1 (rows) and
    dx = -W..W-1 (columns). ``in_universe`` marks the displacements that
    count toward the map (the half-plane with duplicates and the origin
    removed); ``excluded`` marks the in-universe displacements dropped for
    zero overlap or degenerate variance. ``rho`` is NaN outside the
    retained set and clamped to [-1, 1] inside it.
    """

    rho: np.ndarray
    pair_counts: np.ndarray
    in_universe: np.ndarray
    excluded: np.ndarray
    width: int
    height: int

    @property
    def retained(self) -> np.ndarray:
        return self.in_universe & ~self.excluded

    @property
    def n_universe(self) -> int:
        return int(self.in_universe.sum())

    @property
    def degenerate(self) -> bool:
        """True when no displacement survived, e.g. for a constant image."""
        return not self.retained.any()

    def _index(self, dx: int, dy: int) -> tuple[int, int]:
        if not (0 <= dy < self.height and -self.width <= dx < self.width):
            raise KeyError(f"displacement ({dx}, {dy}) outside map layout")
        return dy, dx + self.width

    def rho_at(self, dx: int, dy: int) -> float:
        return float(self.rho[self._index(dx, dy)])

    def pair_count_at(self, dx: int, dy: int) -> int:
        return int(self.pair_counts[self._index(dx, dy)])

    def retained_displacements(self) -> tuple[np.ndarray, np.ndarray]:
        """(dx, dy) integer arrays of the retained displacements."""
        rows, cols = np.nonzero(self.retained)
        return cols - self.width, rows


def _universe_mask(height: int, width: int) -> np.ndarray:
    mask = np.ones((height, 2 * width), dtype=bool)
    # Row dy = 0: drop the origin and the dx < 0 duplicates of dx > 0 lags,
    # keeping the dx = -W wrap lag so the count matches the half of the
    # (2H, 2W) lag grid: W * (2H - 1) displacements in total.
    mask[0, 1 : width + 1] = False
    return mask


def correlation_map(lum: Luminance) -> CorrelationMap:
    """All upper-half-plane Pearson coefficients of an image via FFT.

    Rejects images smaller than 2 x 2. A globally constant image comes
    back with every displacement excluded (``map.degenerate`` is True).
    """
    h, w = lum.height, lum.width
    if h < 2 or w < 2:
        raise ValueError(f"correlation needs at least a 2x2 image, got {w}x{h}")

    # Centering by the global mean leaves every rho unchanged but avoids
    # most of the cancellation in the windowed-moment subtractions.
    img = lum.values - lum.values.mean()
    p = next_fast_len(2 * h)
    q = next_fast_len(2 * w)

    f_img = rfft2(img, s=(p, q))
    f_sq = rfft2(img * img, s=(p, q))
    f_mask = rfft2(np.ones((h, w)), s=(p, q))

    # xcorr(A, B)[a] = sum_p A(p + a) B(p), laid out circularly on (p, q).
    raw_full = irfft2(f_img * np.conj(f_img), s=(p, q))
    counts_full = irfft2(f_mask * np.conj(f_mask), s=(p, q))
    win_sum_full = irfft2(f_img * np.conj(f_mask), s=(p, q))
    win_sq_full = irfft2(f_sq * np.conj(f_mask), s=(p, q))

    dxs = np.arange(-w, w)
    pos = np.ix_(np.arange(h) % p, dxs % q)
    neg = np.ix_((-np.arange(h)) % p, (-dxs) % q)

    counts = np.rint(counts_full[pos]).astype(np.int64)
    n_safe = np.maximum(counts, 1).astype(np.float64)
    mean_p = win_sum_full[pos] / n_safe
    mean_m = win_sum_full[neg] / n_safe
    var_p = np.maximum(win_sq_full[pos] / n_safe - mean_p * mean_p, 0.0)
    var_m = np.maximum(win_sq_full[neg] / n_safe - mean_m * mean_m, 0.0)
    sig_prod = np.sqrt(var_p * var_m)

    universe = _universe_mask(h, w)
    excluded = universe & ((counts == 0) | (sig_prod <= VARIANCE_FLOOR))
    retained = universe & ~excluded

    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (raw_full[pos] / n_safe - mean_p * mean_m) / sig_prod
    rho = np.where(retained, rho, np.nan)
    if retained.any():
        overshoot = np.nanmax(np.abs(rho[retained])) - 1.0
        if overshoot > 1e-9:
            raise FloatingPointError(f"correlation exceeded unit range by {overshoot:.3e}")
        np.clip(rho, -1.0, 1.0, out=rho)

    return CorrelationMap(
        rho=rho,
        pair_counts=counts,
        in_universe=universe,
        excluded=excluded,
        width=w,
        height=h,
    )


def brute_force_rho(lum: Luminance, a: tuple[int, int]) -> float:
    """Textbook Pearson over explicitly gathered pairs at displacement a.

    This is the test oracle for ``correlation_map``: it never touches the
    FFT path. Raises on fewer than two pairs or degenerate variance.
    """
    dx, dy = a
    h, w = lum.height, lum.width
    v = lum.values
    n = max(0, w - abs(dx)) * max(0, h - abs(dy))
    if n < 2:
        raise ValueError(f"displacement {a} has {n} overlapping pairs")
    rows = slice(max(0, -dy), h - max(0, dy))
    cols = slice(max(0, -dx), w - max(0, dx))
    y_vec = v[rows, cols].ravel()
    x_vec = v[rows.start + dy : rows.stop + dy, cols.start + dx : cols.stop + dx].ravel()
    mx, my = x_vec.mean(), y_vec.mean()
    vx = np.maximum(np.mean(x_vec * x_vec) - mx * mx, 0.0)
    vy = np.maximum(np.mean(y_vec * y_vec) - my * my, 0.0)
    denom = np.sqrt(vx * vy)
    if denom <= VARIANCE_FLOOR:
        raise ValueError(f"displacement {a} has degenerate variance")
    return float((np.mean(x_vec * y_vec) - mx * my) / denom)


@dataclass(frozen=True)
class CorrelationCurve:
    """Radially binned reduction of a correlation map.

    Bin k covers distances [k, k+1). ``mean_rho`` is NaN for bins that
    received no displacements; emptiness is what ``n_displacements == 0``
    flags, never a zero mean.
    """

    mean_rho: np.ndarray
    pair_weight: np.ndarray
    n_displacements: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.mean_rho.shape[0]

    @property
    def empty(self) -> np.ndarray:
        return self.n_displacements == 0


def radial_curve(
    cmap: CorrelationMap, n_bins: int = 512, weighting: str = "pairs"
) -> CorrelationCurve:
    """Average the angle out of a map into unit-width distance bins.

    Each retained displacement lands in bin floor(|a|); displacements at or
    beyond ``n_bins`` fall outside the curve and are dropped. ``weighting``
    selects the bin mean: "pairs" weights each coefficient by its pair
    count N(a), "uniform" averages coefficients plainly. ``pair_weight``
    always reports the summed pair counts per bin.
    """
    if weighting not in ("pairs", "uniform"):
        raise ValueError(f"unknown weighting {weighting!r}")
    dx, dy = cmap.retained_displacements()
    rho = cmap.rho[cmap.retained]
    counts = cmap.pair_counts[cmap.retained].astype(np.float64)

    k = np.floor(np.hypot(dx, dy)).astype(np.int64)
    keep = k < n_bins
    k, rho, counts = k[keep], rho[keep], counts[keep]

    w = counts if weighting == "pairs" else np.ones_like(rho)
    wsum = np.bincount(k, weights=w, minlength=n_bins)
    wrho = np.bincount(k, weights=w * rho, minlength=n_bins)
    n_disp = np.bincount(k, minlength=n_bins).astype(np.int64)
    pair_weight = np.bincount(k, weights=counts, minlength=n_bins)

    with np.errstate(invalid="ignore"):
        mean = np.where(n_disp > 0, wrho / np.where(wsum > 0, wsum, 1.0), np.nan)
    return CorrelationCurve(mean_rho=mean, pair_weight=pair_weight, n_displacements=n_disp)


def curve_to_csv(curve: CorrelationCurve) -> str:
    """CSV rows (bin_lo, bin_hi, mean_rho, pair_weight, n_displacements)."""
    lines = ["bin_lo,bin_hi,mean_rho,pair_weight,n_displacements"]
    for k in range(curve.n_bins):
        lines.append(
            f"{k},{k + 1},{float(curve.mean_rho[k])!r},{float(curve.pair_weight[k])!r},"
            f"{int(curve.n_displacements[k])}"
        )
    return "\n".join(lines) + "\n"


def save_map(cmap: CorrelationMap, path: str | Path) -> None:
    """Diagnostic binary dump.

    Layout: 8-byte magic, three little-endian uint32 (version, height,
    width), then the rho grid (float64), pair counts (int64), universe and
    excluded masks (uint8), each of shape (height, 2 * width), row-major.
    """
    header = _MAP_MAGIC + np.array([1, cmap.height, cmap.width], dtype="<u4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(cmap.rho.astype("<f8").tobytes())
        fh.write(cmap.pair_counts.astype("<i8").tobytes())
        fh.write(cmap.in_universe.astype(np.uint8).tobytes())
        fh.write(cmap.excluded.astype(np.uint8).tobytes())


def load_map(path: str | Path) -> CorrelationMap:
    data = Path(path).read_bytes()
    if data[:8] != _MAP_MAGIC:
        raise ValueError(f"{path} is not a correlation map dump")
    version, height, width = np.frombuffer(data[8:20], dtype="<u4")
    if version != 1:
        raise ValueError(f"unsupported map dump version {version}")
    h, w2 = int(height), 2 * int(width)
    grid = h * w2
    off = 20
    rho = np.frombuffer(data, dtype="<f8", count=grid, offset=off).reshape(h, w2).copy()
    off += grid * 8
    counts = np.frombuffer(data, dtype="<i8", count=grid, offset=off).reshape(h, w2).copy()
    off += grid * 8
    universe = np.frombuffer(data, dtype=np.uint8, count=grid, offset=off).reshape(h, w2) > 0
    off += grid
    excluded = np.frombuffer(data, dtype=np.uint8, count=grid, offset=off).reshape(h, w2) > 0
    return CorrelationMap(
        rho=rho,
        pair_counts=counts,
        in_universe=universe.copy(),
        excluded=excluded.copy(),
        width=int(width),
        height=h,
    )
