"""Approximate loss probabilities for the preemptive-priority loss system.

Pipeline, per priority level ``i`` (classes ``1..i`` pooled):

1. busy-period means ``g_i`` of an inflated single-server system and the
   per-starting-class means ``d_j`` (:func:`busy_period_chain_fcfd`,
   :func:`busy_period_chain_lcfd`);
2. the probability ``c_i`` that all servers hold classes ``1..i``
   (:func:`blocking_probabilities`);
3. arrival-loss ``q_i`` (``c_{i-1}`` under FCFD, ``c_i`` under LCFD),
   preemption ``r_i`` and total loss ``gamma_i``.

Conventions: ``c_0 = 0`` and ``Lambda_0 = 0``. Out-of-range probabilities
are returned raw and listed in :attr:`AnalyticReport.warnings`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Protocol, SystemModel, cumulative_loads, cumulative_rates

__all__ = [
    "GammaMode",
    "NumericalError",
    "BusyPeriodChain",
    "AnalyticReport",
    "erlang_b",
    "busy_period_chain_fcfd",
    "busy_period_chain_lcfd",
    "busy_period_chain",
    "blocking_probabilities",
    "arrival_loss_probabilities",
    "preemption_probabilities",
    "loss_probabilities",
    "analyze",
]

_CHAIN_TOL = 1e-10

# The string values are part of the CLI/config contract.
class GammaMode(str, enum.Enum):
    STRICT = "strict-eq8"
    COMPOSED = "composed-eq7"

    @classmethod
    def parse(cls, value: "GammaMode | str") -> "GammaMode":
        if isinstance(value, cls):
            return value
        aliases = {"strict": cls.STRICT, "composed": cls.COMPOSED}
        if value in aliases:
            return aliases[value]
        return cls(value)


class NumericalError(ArithmeticError):
    """The approximation broke down at priority level ``index`` (1-based)."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"class {index}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class BusyPeriodChain:
    d: np.ndarray
    g: np.ndarray
    protocol: Protocol


@dataclass
class AnalyticReport:
    protocol: Protocol
    gamma_mode: GammaMode
    rates: np.ndarray
    means: np.ndarray
    cum_rates: np.ndarray
    cum_loads: np.ndarray
    chain: BusyPeriodChain
    c: np.ndarray
    q: np.ndarray
    r: np.ndarray
    gamma: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.value,
            "gamma_mode": self.gamma_mode.value,
            "rates": self.rates.tolist(),
            "means": self.means.tolist(),
            "cum_rates": self.cum_rates.tolist(),
            "cum_loads": self.cum_loads.tolist(),
            "d": self.chain.d.tolist(),
            "g": self.chain.g.tolist(),
            "c": self.c.tolist(),
            "q": self.q.tolist(),
            "r": self.r.tolist(),
            "gamma": self.gamma.tolist(),
            "warnings": list(self.warnings),
        }


def erlang_b(m: int, a: float) -> float:
    """Erlang loss formula ``B(m, a)`` by the stable forward recurrence."""
    if isinstance(m, bool) or int(m) != m or m < 0:
        raise ValueError(f"server count must be a non-negative integer, got {m!r}")
    a = float(a)
    if not math.isfinite(a) or a < 0:
        raise ValueError(f"offered load must be finite and >= 0, got {a!r}")
    b = 1.0
    for k in range(1, int(m) + 1):
        b = a * b / (k + a * b)
    return b


def _shifted(x: np.ndarray) -> np.ndarray:
    return np.concatenate(([0.0], x[:-1]))


def busy_period_chain_fcfd(model: SystemModel) -> BusyPeriodChain:
    m = model.servers
    lam = model.rates
    cum = cumulative_rates(model)
    n = model.n_classes
    d = np.empty(n)
    g = np.empty(n)
    acc = 0.0  # sum_{j<i} lam_j d_j
    for i in range(n):
        lead = cum[i]
        hit = model.classes[i].service.lst(lead / m)
        miss = 1.0 - hit
        # 1 - (lam_i/Lambda_i)(1 - beta), arranged to avoid cancellation
        denom = (lead - lam[i]) / lead + lam[i] / lead * hit
        if not denom > 0.0:
            raise NumericalError(f"busy-period denominator {float(denom):.3g} is not positive (transform underflow)", i + 1)
        g[i] = (acc / lead + lam[i] / lead**2 * miss) / denom
        d[i] = miss * (1.0 / lead + g[i])
        acc += lam[i] * d[i]
        if not (math.isfinite(g[i]) and g[i] > 0 and d[i] > 0):
            raise NumericalError(f"busy-period means not positive and finite (g={float(g[i]):.6g}, d={float(d[i]):.6g})", i + 1)
        if abs(lead * g[i] - acc) > _CHAIN_TOL * max(1.0, acc):
            raise NumericalError("busy-period recursion is not self-consistent", i + 1)
    return BusyPeriodChain(d, g, Protocol.FCFD)


def busy_period_chain_lcfd(model: SystemModel) -> BusyPeriodChain:
    """Busy-period chain for last-come-first-displaced.

    A class-``j`` job is interrupted only by classes ``< j``, so the
    transform is evaluated at ``Lambda_{j-1}/m`` and the interrupted branch
    continues with the level-``j-1`` busy period. Class 1 is never
    interrupted and contributes ``b_1/m``.
    """
    m = model.servers
    lam = model.rates
    cum = cumulative_rates(model)
    n = model.n_classes
    d = np.empty(n)
    g = np.empty(n)
    d[0] = model.classes[0].service.mean() / m
    acc = lam[0] * d[0]
    g[0] = acc / cum[0]
    for j in range(1, n):
        prev = cum[j - 1]
        miss = 1.0 - model.classes[j].service.lst(prev / m)
        d[j] = miss * (1.0 / prev + g[j - 1])
        acc += lam[j] * d[j]
        g[j] = acc / cum[j]
    for i in range(n):
        if not (math.isfinite(g[i]) and g[i] > 0 and d[i] > 0):
            raise NumericalError(f"busy-period means not positive and finite (g={float(g[i]):.6g}, d={float(d[i]):.6g})", i + 1)
    return BusyPeriodChain(d, g, Protocol.LCFD)


def busy_period_chain(model: SystemModel) -> BusyPeriodChain:
    if model.protocol is Protocol.FCFD:
        return busy_period_chain_fcfd(model)
    return busy_period_chain_lcfd(model)


def blocking_probabilities(model: SystemModel, chain: BusyPeriodChain) -> np.ndarray:
    """Probability ``c_i`` that all ``m`` servers are held by classes ``1..i``.

    ``(m-1)! sum_{k<m} R^k/k!`` divided by ``R^{m-1}`` is ``1/B(m-1, R)``,
    so the factorial sums are replaced by one Erlang-B recurrence and the
    result stays finite for any ``m``.
    """
    m = model.servers
    loads = cumulative_loads(model)
    x = cumulative_rates(model) * chain.g
    c = np.empty(model.n_classes)
    for i, (load, xi) in enumerate(zip(loads, x)):
        t = xi * erlang_b(m - 1, load)
        c[i] = t / (1.0 + t)
    return c


def arrival_loss_probabilities(c: Sequence[float], protocol: Protocol | str = Protocol.FCFD) -> np.ndarray:
    """Probability that an arrival is refused outright.

    Under FCFD an arrival is refused only when all servers hold strictly
    higher classes (``c_{i-1}``); under LCFD its own class blocks it too
    (``c_i``).
    """
    c = np.asarray(c, dtype=float)
    if Protocol(protocol) is Protocol.LCFD:
        return c.copy()
    return _shifted(c)


def preemption_probabilities(model: SystemModel, c: Sequence[float]) -> np.ndarray:
    """Probability that an accepted job is later displaced.

    Displacing arrivals come from classes ``1..i`` under FCFD and from
    classes ``1..i-1`` under LCFD.
    """
    c = np.asarray(c, dtype=float)
    full = np.flatnonzero(c >= 1.0)
    if full.size:
        raise NumericalError("blocking probability reached 1; preemption is undefined", int(full[0]) + 1)
    cum = cumulative_rates(model)
    if model.protocol is Protocol.LCFD:
        cum = _shifted(cum)
    return cum * (c - _shifted(c)) / (model.rates * (1.0 - c))


def loss_probabilities(
    model: SystemModel, c: Sequence[float], mode: GammaMode | str = GammaMode.STRICT
) -> np.ndarray:
    """Total loss probability per class.

    ``strict-eq8`` is ``c_{i-1} + (Lambda_i/lambda_i)(c_i - c_{i-1})``;
    ``composed-eq7`` is ``q_i + (1 - q_i) r_i``. Under FCFD the two differ
    by the factor ``(1 - c_{i-1})/(1 - c_i)`` on the increment; under LCFD
    both equal ``c_i + (Lambda_{i-1}/lambda_i)(c_i - c_{i-1})``.
    """
    mode = GammaMode.parse(mode)
    c = np.asarray(c, dtype=float)
    prev = _shifted(c)
    if mode is GammaMode.STRICT:
        return prev + cumulative_rates(model) / model.rates * (c - prev)
    q = arrival_loss_probabilities(c, model.protocol)
    r = preemption_probabilities(model, c)
    return q + (1.0 - q) * r


def _out_of_range(name: str, values: np.ndarray) -> list[str]:
    return [
        f"{name}_{i + 1} = {float(v):.6g} outside [0, 1]"
        for i, v in enumerate(values)
        if not 0.0 <= v <= 1.0
    ]


def analyze(model: SystemModel, mode: GammaMode | str = GammaMode.STRICT) -> AnalyticReport:
    """Run the full approximation for ``model`` under its own protocol."""
    model.check()
    mode = GammaMode.parse(mode)
    chain = busy_period_chain(model)
    c = blocking_probabilities(model, chain)
    q = arrival_loss_probabilities(c, model.protocol)
    r = preemption_probabilities(model, c)
    gamma = loss_probabilities(model, c, mode)
    notes = []
    for i in range(1, len(c)):
        if c[i] < c[i - 1]:
            notes.append(f"c_{i + 1} < c_{i}: blocking approximation is not monotone")
    for name, values in (("c", c), ("r", r), ("gamma", gamma)):
        notes.extend(_out_of_range(name, values))
    return AnalyticReport(
        protocol=model.protocol,
        gamma_mode=mode,
        rates=model.rates,
        means=model.means,
        cum_rates=cumulative_rates(model),
        cum_loads=cumulative_loads(model),
        chain=chain,
        c=c,
        q=q,
        r=r,
        gamma=gamma,
        warnings=notes,
    )
