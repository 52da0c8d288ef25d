"""Service-time laws.

Each family exposes its mean, its Laplace-Stieltjes transform
``E[exp(-s X)]`` in closed form, and an exact sampler driven by a
caller-owned :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "ServiceDistribution",
    "Exponential",
    "Deterministic",
    "ErlangK",
    "Hyperexponential",
    "ZeroExponential",
    "from_dict",
]

_WEIGHT_TOL = 1e-12


def _check_s(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s < 0.0:
        raise ValueError(f"transform argument must be finite and >= 0, got {s!r}")
    return s


def _positive(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x > 0


class ServiceDistribution:
    """Base class for the service-time families."""

    kind: str = ""

    def mean(self) -> float:
        raise NotImplementedError

    def lst(self, s: float) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int | None = None):
        raise NotImplementedError

    def problems(self) -> list[str]:
        """Return parameter violations; empty when the law is well formed."""
        return []

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    rate: float
    kind = "exponential"

    def mean(self) -> float:
        return 1.0 / self.rate

    def lst(self, s: float) -> float:
        s = _check_s(s)
        return self.rate / (self.rate + s)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def problems(self):
        return [] if _positive(self.rate) else [f"exponential rate must be > 0, got {self.rate!r}"]

    def to_dict(self):
        return {"type": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    value: float
    kind = "deterministic"

    def mean(self) -> float:
        return float(self.value)

    def lst(self, s: float) -> float:
        s = _check_s(s)
        return math.exp(-s * self.value)

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def problems(self):
        v = self.value
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            return [f"deterministic value must be >= 0, got {v!r}"]
        return []

    def to_dict(self):
        return {"type": self.kind, "value": self.value}


@dataclass(frozen=True)
class ErlangK(ServiceDistribution):
    """Sum of ``shape`` independent exponential stages, each at ``stage_rate``."""

    shape: int
    stage_rate: float
    kind = "erlang"

    def mean(self) -> float:
        return self.shape / self.stage_rate

    def lst(self, s: float) -> float:
        s = _check_s(s)
        return (self.stage_rate / (self.stage_rate + s)) ** self.shape

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.stage_rate, size)

    def problems(self):
        out = []
        if isinstance(self.shape, bool) or not isinstance(self.shape, int) or self.shape < 1:
            out.append(f"erlang shape must be an integer >= 1, got {self.shape!r}")
        if not _positive(self.stage_rate):
            out.append(f"erlang stage_rate must be > 0, got {self.stage_rate!r}")
        return out

    def to_dict(self):
        return {"type": self.kind, "shape": self.shape, "stage_rate": self.stage_rate}


@dataclass(frozen=True)
class Hyperexponential(ServiceDistribution):
    """Probabilistic mixture of exponentials given as ``(weight, rate)`` pairs.

    Weights that are all positive but do not sum to one (beyond 1e-12) are
    renormalised with a :class:`UserWarning`.
    """

    branches: tuple[tuple[float, float], ...]
    kind = "hyperexponential"
    _weights: np.ndarray = field(init=False, repr=False, compare=False)
    _rates: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        branches = tuple((float(w), float(r)) for w, r in self.branches)
        weights = [w for w, _ in branches]
        total = sum(weights)
        if branches and all(w > 0 for w in weights) and math.isfinite(total):
            if abs(total - 1.0) > _WEIGHT_TOL:
                warnings.warn(
                    f"hyperexponential weights sum to {total!r}; renormalising",
                    UserWarning,
                    stacklevel=3,
                )
                branches = tuple((w / total, r) for w, r in branches)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "_weights", np.array([w for w, _ in branches]))
        object.__setattr__(self, "_rates", np.array([r for _, r in branches]))

    def mean(self) -> float:
        return sum(w / r for w, r in self.branches)

    def lst(self, s: float) -> float:
        s = _check_s(s)
        return sum(w * r / (r + s) for w, r in self.branches)

    def sample(self, rng, size=None):
        if size is None:
            k = rng.choice(len(self.branches), p=self._weights)
            return rng.exponential(1.0 / self._rates[k])
        k = rng.choice(len(self.branches), size=size, p=self._weights)
        return rng.exponential(1.0, size) / self._rates[k]

    def problems(self):
        if not self.branches:
            return ["hyperexponential needs at least one branch"]
        out = []
        for n, (w, r) in enumerate(self.branches):
            if not _positive(w):
                out.append(f"hyperexponential branch {n} weight must be > 0, got {w!r}")
            if not _positive(r):
                out.append(f"hyperexponential branch {n} rate must be > 0, got {r!r}")
        return out

    def to_dict(self):
        return {
            "type": self.kind,
            "branches": [{"weight": w, "rate": r} for w, r in self.branches],
        }


@dataclass(frozen=True)
class ZeroExponential(ServiceDistribution):
    """Zero with probability ``atom``, otherwise exponential at ``rate``."""

    atom: float
    rate: float
    kind = "zero_exponential"

    def mean(self) -> float:
        return (1.0 - self.atom) / self.rate

    def lst(self, s: float) -> float:
        s = _check_s(s)
        return self.atom + (1.0 - self.atom) * self.rate / (self.rate + s)

    def sample(self, rng, size=None):
        if size is None:
            if rng.random() < self.atom:
                return 0.0
            return rng.exponential(1.0 / self.rate)
        hit = rng.random(size) < self.atom
        x = rng.exponential(1.0 / self.rate, size)
        x[hit] = 0.0
        return x

    def problems(self):
        out = []
        a = self.atom
        if not (isinstance(a, (int, float)) and 0.0 <= a < 1.0):
            out.append(f"zero_exponential atom must lie in [0, 1), got {a!r}")
        if not _positive(self.rate):
            out.append(f"zero_exponential rate must be > 0, got {self.rate!r}")
        return out

    def to_dict(self):
        return {"type": self.kind, "atom": self.atom, "rate": self.rate}


_FIELDS = {
    "exponential": ({"rate"}, lambda d: Exponential(d["rate"])),
    "deterministic": ({"value"}, lambda d: Deterministic(d["value"])),
    "erlang": ({"shape", "stage_rate"}, lambda d: ErlangK(d["shape"], d["stage_rate"])),
    "hyperexponential": (
        {"branches"},
        lambda d: Hyperexponential(tuple((b["weight"], b["rate"]) for b in d["branches"])),
    ),
    "zero_exponential": ({"atom", "rate"}, lambda d: ZeroExponential(d["atom"], d["rate"])),
}


def from_dict(data: dict[str, Any], path: str = "service") -> ServiceDistribution:
    """Build a distribution from its tagged-object form.

    Unknown or missing keys raise :class:`ValueError` naming ``path``.
    """
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected an object, got {type(data).__name__}")
    kind = data.get("type")
    if kind not in _FIELDS:
        raise ValueError(f"{path}.type: unknown distribution type {kind!r}")
    expected, build = _FIELDS[kind]
    keys = set(data) - {"type"}
    for extra in sorted(keys - expected):
        raise ValueError(f"{path}.{extra}: unknown key for {kind}")
    for missing in sorted(expected - keys):
        raise ValueError(f"{path}.{missing}: required for {kind}")
    if kind == "hyperexponential":
        branches = data["branches"]
        if not isinstance(branches, list):
            raise ValueError(f"{path}.branches: expected a list")
        for n, b in enumerate(branches):
            if not isinstance(b, dict):
                raise ValueError(f"{path}.branches[{n}]: expected an object")
            for extra in sorted(set(b) - {"weight", "rate"}):
                raise ValueError(f"{path}.branches[{n}].{extra}: unknown key")
            for missing in sorted({"weight", "rate"} - set(b)):
                raise ValueError(f"{path}.branches[{n}].{missing}: required")
    for key in expected - {"branches"}:
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValueError(f"{path}.{key}: expected a number, got {v!r}")
    return build(data)
