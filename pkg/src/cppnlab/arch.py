"""Architecture parametrization: hyper-parameters to per-layer neuron counts.

A five-parameter family (layer count L, neuron budget N, decay rate mu,
oscillation frequency omega, oscillation strength alpha) describes how a
fixed budget of neurons is distributed over a stack of hidden layers. The
raw per-layer weight is

    s(l) = exp(mu * l / L) * (alpha + sin(-omega * l)),   l = 1..L

which is normalized to sum to N, integerized by largest-remainder
apportionment, and finally clamped so no layer falls below 2 neurons.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

__all__ = [
    "ArchitectureSpec",
    "MIN_LAYER_WIDTH",
    "layer_sizes",
    "raw_layer_weights",
    "largest_remainder",
    "enumerate_grid",
    "default_grid",
]

MIN_LAYER_WIDTH = 2

# Default sweep: 3 * 3 * 7 * 7 * 2 = 882 architectures.
DEFAULT_LAYER_COUNTS = (3, 5, 10)
DEFAULT_NEURON_TOTALS = (100, 250, 500)
DEFAULT_DECAY_RATES = (-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0)
DEFAULT_FREQUENCIES = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
DEFAULT_OSCILLATION_STRENGTHS = (2.0, 5.0)


@dataclass(frozen=True)
class ArchitectureSpec:
    """Hyper-parameters identifying one generated image family.

    ``seed`` is optional: grid enumeration leaves it unset and the dataset
    pipeline assigns one seed per rendered image.
    """

    L: int
    N: int
    mu: float
    omega: float
    alpha: float
    seed: int | None = None

    def validate(self) -> None:
        if self.L < 1:
            raise ValueError(f"layer count must be >= 1, got {self.L}")
        if self.N < 1:
            raise ValueError(f"neuron budget must be >= 1, got {self.N}")
        if not self.alpha > 1.0:
            # alpha > 1 keeps alpha + sin(-omega * l) strictly positive.
            raise ValueError(f"oscillation strength must be > 1, got {self.alpha}")
        for name in ("mu", "omega", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.seed is not None and self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    def with_seed(self, seed: int) -> "ArchitectureSpec":
        return replace(self, seed=seed)

    def to_json_dict(self) -> dict:
        return {
            "L": self.L,
            "N": self.N,
            "mu": self.mu,
            "omega": self.omega,
            "alpha": self.alpha,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ArchitectureSpec":
        return cls(
            L=int(d["L"]),
            N=int(d["N"]),
            mu=float(d["mu"]),
            omega=float(d["omega"]),
            alpha=float(d["alpha"]),
            seed=None if d.get("seed") is None else int(d["seed"]),
        )

    def canonical_json(self) -> str:
        """Stable serialized form used for hashing and manifests."""
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def raw_layer_weights(spec: ArchitectureSpec) -> list[float]:
    """Unnormalized layer weights s(l) for l = 1..L."""
    return [
        math.exp(spec.mu * l / spec.L) * (spec.alpha + math.sin(-spec.omega * l))
        for l in range(1, spec.L + 1)
    ]


def largest_remainder(targets: Sequence[float], total: int) -> list[int]:
    """Apportion ``total`` units over real-valued ``targets`` summing to it.

    Each entry receives floor(target); the leftover units go to the largest
    fractional remainders, ties broken by lower index. The result sums to
    ``total`` exactly and each entry differs from its target by < 1.
    """
    floors = [math.floor(t) for t in targets]
    leftover = total - sum(floors)
    if leftover < 0 or leftover > len(targets):
        raise ValueError("targets do not sum to total within rounding")
    remainders = sorted(
        range(len(targets)), key=lambda i: (-(targets[i] - floors[i]), i)
    )
    for i in remainders[:leftover]:
        floors[i] += 1
    return floors


def layer_sizes(spec: ArchitectureSpec) -> list[int]:
    """Concrete hidden-layer widths for a spec.

    Deterministic: raw weights are normalized so targets sum to N, then
    integerized by largest-remainder apportionment, then any layer below
    the 2-neuron floor is clamped up (the total may then exceed N; no
    re-balancing happens afterwards).
    """
    spec.validate()
    weights = raw_layer_weights(spec)
    total = sum(weights)
    targets = [spec.N * w / total for w in weights]
    sizes = largest_remainder(targets, spec.N)
    return [max(s, MIN_LAYER_WIDTH) for s in sizes]


def enumerate_grid(
    Ls: Iterable[int],
    Ns: Iterable[int],
    mus: Iterable[float],
    omegas: Iterable[float],
    alphas: Iterable[float],
) -> list[ArchitectureSpec]:
    """Cartesian product of hyper-parameter values, seeds unset.

    Order is deterministic with L varying slowest and alpha fastest.
    """
    lists = [tuple(v) for v in (Ls, Ns, mus, omegas, alphas)]
    for name, values in zip(("Ls", "Ns", "mus", "omegas", "alphas"), lists):
        if not values:
            raise ValueError(f"{name} must be non-empty")
    return [
        ArchitectureSpec(L=int(L), N=int(N), mu=float(mu), omega=float(om), alpha=float(al))
        for L, N, mu, om, al in itertools.product(*lists)
    ]


def default_grid() -> list[ArchitectureSpec]:
    """The full default sweep (882 architectures)."""
    return enumerate_grid(
        DEFAULT_LAYER_COUNTS,
        DEFAULT_NEURON_TOTALS,
        DEFAULT_DECAY_RATES,
        DEFAULT_FREQUENCIES,
        DEFAULT_OSCILLATION_STRENGTHS,
    )
