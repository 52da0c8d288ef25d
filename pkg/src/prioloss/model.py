"""System description: servers, priority classes and displacement protocol.

Class 1 is the highest priority; a larger index means a lower priority.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .distributions import Deterministic, ServiceDistribution

__all__ = [
    "Protocol",
    "PriorityClass",
    "SystemModel",
    "ModelError",
    "cumulative_rates",
    "cumulative_loads",
    "validate",
]


class Protocol(str, enum.Enum):
    """Which job of the lowest-priority class in service gets displaced.

    FCFD ejects the earliest-arrived such job and lets an arrival displace
    work of its own priority. LCFD ejects the latest-arrived one and only
    displaces strictly lower priorities.
    """

    FCFD = "fcfd"
    LCFD = "lcfd"


class ModelError(ValueError):
    """Raised when an invalid model reaches an operation that needs a valid one."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class PriorityClass:
    index: int
    rate: float
    service: ServiceDistribution


@dataclass(frozen=True)
class SystemModel:
    servers: int
    classes: tuple[PriorityClass, ...]
    protocol: Protocol = Protocol.FCFD

    def __post_init__(self):
        classes = tuple(self.classes)
        indices = [c.index for c in classes]
        if indices != list(range(1, len(classes) + 1)):
            raise ValueError(f"class indices must be 1..N in order, got {indices}")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "protocol", Protocol(self.protocol))

    @classmethod
    def build(
        cls,
        servers: int,
        classes: Iterable[tuple[float, ServiceDistribution]],
        protocol: Protocol | str = Protocol.FCFD,
    ) -> "SystemModel":
        """Construct from ``(rate, service)`` pairs listed highest priority first."""
        pcs = tuple(PriorityClass(i + 1, rate, svc) for i, (rate, svc) in enumerate(classes))
        return cls(servers, pcs, Protocol(protocol))

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def rates(self) -> np.ndarray:
        return np.array([c.rate for c in self.classes], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.array([c.service.mean() for c in self.classes], dtype=float)

    def with_protocol(self, protocol: Protocol | str) -> "SystemModel":
        return SystemModel(self.servers, self.classes, Protocol(protocol))

    def check(self) -> "SystemModel":
        """Return ``self`` if valid, else raise :class:`ModelError`."""
        problems = validate(self)
        if problems:
            raise ModelError(problems)
        return self


def cumulative_rates(model: SystemModel) -> np.ndarray:
    """Arrival rate of classes ``1..i`` for each ``i``."""
    return np.cumsum(model.rates)


def cumulative_loads(model: SystemModel) -> np.ndarray:
    """Offered work rate ``sum_{j<=i} rate_j * mean_j`` for each ``i``."""
    return np.cumsum(model.rates * model.means)


def validate(model: SystemModel) -> list[str]:
    """List every violated invariant of ``model``; an empty list means valid."""
    out: list[str] = []
    m = model.servers
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        out.append(f"servers must be >= 1, got {m!r}")
    if not model.classes:
        out.append("at least one priority class is required")
    for c in model.classes:
        rate = c.rate
        if isinstance(rate, bool) or not isinstance(rate, (int, float)) or not math.isfinite(rate) or rate <= 0:
            out.append(f"class {c.index}: class rate must be positive and finite, got {rate!r}")
        if not isinstance(c.service, ServiceDistribution):
            out.append(f"class {c.index}: service is not a ServiceDistribution")
            continue
        out.extend(f"class {c.index}: {p}" for p in c.service.problems())
        if isinstance(c.service, Deterministic) and not c.service.problems() and c.service.value == 0:
            out.append(f"class {c.index}: service mean must be positive (Deterministic(0) does no work)")
    return out
