"""Per-bin Welch comparisons between two sets of correlation curves.

The one-sided p-values come from an in-package Student-t tail implemented
with the regularized incomplete beta function (continued-fraction
evaluation), so the engine carries no external statistics dependency and
can be cross-checked against independent references in the tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corr import CorrelationCurve

__all__ = [
    "regularized_incomplete_beta",
    "student_t_sf",
    "welch_bin",
    "CurveSet",
    "BinComparison",
    "compare_sets",
    "contiguous_significance_prefix",
    "comparison_to_csv",
    "comparison_summary",
]

ALTERNATIVES = ("A_greater", "B_greater")

_BETA_EPS = 1e-15
_BETA_TINY = 1e-300
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise FloatingPointError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """Upper-tail probability P(T > t) for Student's t with df > 0.

    Exactly 0.5 at t = 0, and sf(-t) = 1 - sf(t) by construction.
    """
    if df <= 0.0 or not math.isfinite(df):
        raise ValueError(f"degrees of freedom must be positive and finite, got {df}")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


def welch_bin(
    samples_a: Sequence[float], samples_b: Sequence[float], alternative: str = "A_greater"
) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test on two samples; returns (t, df, p).

    ``alternative`` picks the one-sided direction of the alternative
    hypothesis. Both samples need n >= 2. When both variances vanish the
    conventional p is 0.5 for equal means and 0 or 1 by direction
    otherwise; df is NaN in that degenerate case.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    a = np.asarray(samples_a, dtype=np.float64)
    b = np.asarray(samples_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError(f"both samples need n >= 2, got {a.size} and {b.size}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("samples must be finite")

    na, nb = a.size, b.size
    ma, mb = a.mean(), b.mean()
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    # t always measures A against B; only the p orientation follows the
    # declared alternative.
    sign = 1.0 if alternative == "A_greater" else -1.0

    if va == 0.0 and vb == 0.0:
        diff = ma - mb
        if diff == 0.0:
            return 0.0, math.nan, 0.5
        t = math.copysign(math.inf, diff)
        return t, math.nan, 0.0 if sign * diff > 0 else 1.0

    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df, student_t_sf(sign * t, df)


@dataclass(frozen=True)
class CurveSet:
    """A labelled collection of per-image correlation curves.

    The per-bin sample for bin k is the list of that bin's mean
    coefficient across the curves, skipping curves whose bin k is empty.
    """

    label: str
    curves: tuple[CorrelationCurve, ...]
    degenerate_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.curves:
            raise ValueError(f"curve set {self.label!r} is empty")
        n_bins = {c.n_bins for c in self.curves}
        if len(n_bins) != 1:
            raise ValueError(f"curves disagree on bin count: {sorted(n_bins)}")

    @property
    def n_bins(self) -> int:
        return self.curves[0].n_bins

    def bin_samples(self, k: int) -> np.ndarray:
        vals = [c.mean_rho[k] for c in self.curves if c.n_displacements[k] > 0]
        return np.asarray(vals, dtype=np.float64)


@dataclass(frozen=True)
class BinComparison:
    """Per-bin Welch statistics with a Bonferroni significance mask."""

    scope_bins: int
    alpha_base: float
    alpha_corrected: float
    alternative: str
    label_a: str
    label_b: str
    n_a: np.ndarray
    n_b: np.ndarray
    mean_a: np.ndarray
    mean_b: np.ndarray
    var_a: np.ndarray
    var_b: np.ndarray
    t: np.ndarray
    df: np.ndarray
    p: np.ndarray
    tested: np.ndarray
    significant: np.ndarray = field(init=False)

    def __post_init__(self):
        sig = self.tested & (self.p < self.alpha_corrected)
        object.__setattr__(self, "significant", sig)


def compare_sets(
    set_a: CurveSet,
    set_b: CurveSet,
    alternative: str = "A_greater",
    scope_bins: int = 300,
    alpha_base: float = 0.05,
) -> BinComparison:
    """Run ``welch_bin`` on every bin up to ``scope_bins``.

    The significance threshold is Bonferroni-corrected to
    ``alpha_base / scope_bins``. Bins where either set has fewer than two
    contributing curves are reported as untested rather than assigned a p.
    """
    if not 1 <= scope_bins <= min(set_a.n_bins, set_b.n_bins):
        raise ValueError(f"scope_bins must be in [1, {min(set_a.n_bins, set_b.n_bins)}]")
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    if not 0.0 < alpha_base < 1.0:
        raise ValueError(f"alpha_base must be in (0, 1), got {alpha_base}")

    shape = (scope_bins,)
    n_a = np.zeros(shape, dtype=np.int64)
    n_b = np.zeros(shape, dtype=np.int64)
    mean_a = np.full(shape, np.nan)
    mean_b = np.full(shape, np.nan)
    var_a = np.full(shape, np.nan)
    var_b = np.full(shape, np.nan)
    t_arr = np.full(shape, np.nan)
    df_arr = np.full(shape, np.nan)
    p_arr = np.full(shape, np.nan)
    tested = np.zeros(shape, dtype=bool)

    for k in range(scope_bins):
        sa = set_a.bin_samples(k)
        sb = set_b.bin_samples(k)
        n_a[k], n_b[k] = sa.size, sb.size
        if sa.size:
            mean_a[k] = sa.mean()
            var_a[k] = sa.var(ddof=1) if sa.size >= 2 else np.nan
        if sb.size:
            mean_b[k] = sb.mean()
            var_b[k] = sb.var(ddof=1) if sb.size >= 2 else np.nan
        if sa.size < 2 or sb.size < 2:
            continue
        t_arr[k], df_arr[k], p_arr[k] = welch_bin(sa, sb, alternative)
        tested[k] = True

    return BinComparison(
        scope_bins=scope_bins,
        alpha_base=alpha_base,
        alpha_corrected=alpha_base / scope_bins,
        alternative=alternative,
        label_a=set_a.label,
        label_b=set_b.label,
        n_a=n_a,
        n_b=n_b,
        mean_a=mean_a,
        mean_b=mean_b,
        var_a=var_a,
        var_b=var_b,
        t=t_arr,
        df=df_arr,
        p=p_arr,
        tested=tested,
    )


def contiguous_significance_prefix(cmp: BinComparison) -> int:
    """Count the leading run of significant tested bins.

    Untested bins are skipped (bin 0 is empty on square pixel grids, so
    breaking on them would make every prefix zero); the run ends at the
    first tested bin that is not significant.
    """
    run = 0
    for k in range(cmp.scope_bins):
        if not cmp.tested[k]:
            continue
        if not cmp.significant[k]:
            break
        run += 1
    return run


def comparison_to_csv(cmp: BinComparison) -> str:
    """CSV rows (bin, nA, nB, meanA, meanB, t, df, p, significant)."""
    lines = ["bin,nA,nB,meanA,meanB,t,df,p,significant"]
    for k in range(cmp.scope_bins):
        lines.append(
            f"{k},{int(cmp.n_a[k])},{int(cmp.n_b[k])},{float(cmp.mean_a[k])!r},"
            f"{float(cmp.mean_b[k])!r},{float(cmp.t[k])!r},{float(cmp.df[k])!r},"
            f"{float(cmp.p[k])!r},{bool(cmp.significant[k])}"
        )
    return "\n".join(lines) + "\n"


def comparison_summary(cmp: BinComparison) -> dict:
    """JSON-ready summary echoing the configuration."""
    return {
        "label_a": cmp.label_a,
        "label_b": cmp.label_b,
        "alternative": cmp.alternative,
        "scope_bins": cmp.scope_bins,
        "alpha_base": cmp.alpha_base,
        "alpha_corrected": cmp.alpha_corrected,
        "n_tested": int(cmp.tested.sum()),
        "n_significant": int(cmp.significant.sum()),
        "significance_prefix": contiguous_significance_prefix(cmp),
    }


def summary_to_json(cmp: BinComparison) -> str:
    return json.dumps(comparison_summary(cmp), indent=2, sort_keys=True) + "\n"
