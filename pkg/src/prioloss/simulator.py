"""Discrete-event simulation of the m-server preemptive-priority loss system.

There is no waiting room. An arrival takes a free server if there is one;
otherwise the displacement protocol decides whether it evicts a job of the
lowest priority in service (which is then lost for good) or is itself
blocked. Estimates come from independent replications with Student-t
confidence intervals.

Arrivals form a single merged Poisson stream at the total rate with the
class drawn in proportion to the class rates. Interarrival gaps, classes
and service requirements are generated in blocks with numpy and fed to a
numba-compiled event loop. A service requirement is drawn for every
arrival, used or not, so the random stream consumed per arrival is fixed.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np
from scipy import stats

from .model import Protocol, SystemModel, cumulative_rates

__all__ = [
    "Job",
    "SimConfig",
    "ClassStats",
    "SimulationReport",
    "select_victim",
    "replication_seed",
    "run_replication",
    "run",
    "write_replications_csv",
    "CSV_HEADER",
]

RNG_ALGORITHM = "numpy PCG64, SeedSequence([base_seed, replication])"
CSV_HEADER = ("replication", "class", "arrivals", "blocked", "preempted", "completed", "in_service_at_end")

_BLOCK = 1 << 16

# Columns of the per-class counter matrix.
_ARR, _BLK, _PRE, _DONE, _LIVE = range(5)


@dataclass(frozen=True)
class Job:
    class_index: int
    arrival_time: float
    seq: int


def select_victim(in_service: Sequence[Job], arriving_class: int, protocol: Protocol | str) -> Job | None:
    """Pick the job an arrival of ``arriving_class`` displaces, if any.

    Only meaningful when every server is busy. Returns ``None`` when the
    arrival must be blocked.
    """
    protocol = Protocol(protocol)
    if not in_service:
        return None
    lowest = max(job.class_index for job in in_service)
    candidates = [job for job in in_service if job.class_index == lowest]
    if protocol is Protocol.FCFD:
        if lowest < arriving_class:
            return None
        return min(candidates, key=lambda job: job.seq)
    if lowest <= arriving_class:
        return None
    return max(candidates, key=lambda job: job.seq)


@numba.njit(cache=True, nogil=True)
def _victim_slot(scls, sseq, arriving, fcfd):
    m = scls.shape[0]
    lowest = -1
    for s in range(m):
        if scls[s] > lowest:
            lowest = scls[s]
    if fcfd:
        if lowest < arriving:
            return -1
    elif lowest <= arriving:
        return -1
    best = -1
    for s in range(m):
        if scls[s] != lowest:
            continue
        if best < 0:
            best = s
        elif fcfd and sseq[s] < sseq[best]:
            best = s
        elif not fcfd and sseq[s] > sseq[best]:
            best = s
    return best


@numba.njit(cache=True, nogil=True)
def _finish(slot, end, outcome, scls, sseq, sstart, warmup, counts, work, clock):
    # clock: [now, busy_area, t_warm]
    k = scls[slot]
    start = sstart[slot]
    if sseq[slot] >= warmup:
        counts[k, outcome] += 1
        work[k] += end - start
    lo = start if start > clock[2] else clock[2]
    if end > lo:
        clock[1] += end - lo
    scls[slot] = -1


@numba.njit(cache=True, nogil=True)
def _advance(gaps, kinds, services, seq0, warmup, fcfd, dep, scls, sseq, sstart, counts, work, clock):
    m = dep.shape[0]
    t = clock[0]
    for n in range(gaps.shape[0]):
        t += gaps[n]
        seq = seq0 + n
        # departures at or before t leave first
        for s in range(m):
            if scls[s] >= 0 and dep[s] <= t:
                _finish(s, dep[s], _DONE, scls, sseq, sstart, warmup, counts, work, clock)
        if seq == warmup:
            clock[2] = t
        k = kinds[n]
        counted = seq >= warmup
        if counted:
            counts[k, _ARR] += 1
        slot = -1
        for s in range(m):
            if scls[s] < 0:
                slot = s
                break
        if slot < 0:
            slot = _victim_slot(scls, sseq, k, fcfd)
            if slot < 0:
                if counted:
                    counts[k, _BLK] += 1
                continue
            _finish(slot, t, _PRE, scls, sseq, sstart, warmup, counts, work, clock)
        x = services[n]
        if x <= 0.0:
            if counted:
                counts[k, _DONE] += 1
            continue
        scls[slot] = k
        sseq[slot] = seq
        sstart[slot] = t
        dep[slot] = t + x
    clock[0] = t


@numba.njit(cache=True, nogil=True)
def _close(warmup, scls, sseq, sstart, counts, work, clock):
    for s in range(scls.shape[0]):
        if scls[s] >= 0:
            _finish(s, clock[0], _LIVE, scls, sseq, sstart, warmup, counts, work, clock)


@dataclass(frozen=True)
class SimConfig:
    arrivals: int = 100_000
    replications: int = 20
    warmup: int | None = None
    seed: int = 0
    confidence: float = 0.95

    @property
    def warmup_arrivals(self) -> int:
        if self.warmup is None:
            return self.arrivals // 10
        return self.warmup

    def problems(self) -> list[str]:
        out = []
        if isinstance(self.arrivals, bool) or not isinstance(self.arrivals, int) or self.arrivals < 1:
            out.append(f"arrivals must be an integer >= 1, got {self.arrivals!r}")
        if isinstance(self.replications, bool) or not isinstance(self.replications, int) or self.replications < 2:
            out.append(f"replications must be an integer >= 2, got {self.replications!r}")
        w = self.warmup
        if w is not None and (isinstance(w, bool) or not isinstance(w, int) or w < 0):
            out.append(f"warmup must be an integer >= 0, got {w!r}")
        elif not out and not self.warmup_arrivals < self.arrivals:
            out.append("warmup must be smaller than arrivals")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            out.append(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not (isinstance(self.confidence, float) and 0.0 < self.confidence < 1.0):
            out.append(f"confidence must lie in (0, 1), got {self.confidence!r}")
        return out

    def to_dict(self) -> dict:
        return {
            "arrivals": self.arrivals,
            "replications": self.replications,
            "warmup": self.warmup_arrivals,
            "seed": self.seed,
            "confidence": self.confidence,
        }


@dataclass
class ClassStats:
    """Outcome counts of one replication, one entry per class.

    ``work`` is the service actually received by counted jobs (truncated
    at displacement or at the end of the run); ``busy_area`` is the
    integral of the number of busy servers over ``horizon``, the interval
    from the first counted arrival to the last arrival.
    """

    arrivals: np.ndarray
    blocked: np.ndarray
    preempted: np.ndarray
    completed: np.ndarray
    in_service_at_end: np.ndarray
    work: np.ndarray
    busy_area: float
    horizon: float

    @property
    def accepted(self) -> np.ndarray:
        return self.arrivals - self.blocked

    def q_hat(self) -> np.ndarray:
        return self.blocked / np.maximum(self.arrivals, 1)

    def r_hat(self) -> np.ndarray:
        return self.preempted / np.maximum(self.accepted, 1)

    def gamma_hat(self) -> np.ndarray:
        return (self.blocked + self.preempted) / np.maximum(self.arrivals, 1)

    def conserved(self) -> bool:
        total = self.blocked + self.preempted + self.completed + self.in_service_at_end
        return bool(np.array_equal(total, self.arrivals))

    def to_dict(self) -> dict:
        return {
            "arrivals": self.arrivals.tolist(),
            "blocked": self.blocked.tolist(),
            "preempted": self.preempted.tolist(),
            "completed": self.completed.tolist(),
            "in_service_at_end": self.in_service_at_end.tolist(),
            "work": self.work.tolist(),
            "busy_area": self.busy_area,
            "horizon": self.horizon,
        }


def replication_seed(base_seed: int, replication: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(base_seed), int(replication)])


def _draw_block(model: SystemModel, rng: np.random.Generator, size: int, total_rate: float, cum_prob: np.ndarray):
    gaps = rng.exponential(1.0 / total_rate, size)
    kinds = np.minimum(np.searchsorted(cum_prob, rng.random(size), side="right"), len(cum_prob) - 1)
    services = np.empty(size)
    for k, pc in enumerate(model.classes):
        mask = kinds == k
        count = int(mask.sum())
        if count:
            services[mask] = pc.service.sample(rng, count)
    return gaps, kinds.astype(np.int64), services


def run_replication(
    model: SystemModel,
    config: SimConfig,
    seed: np.random.SeedSequence | int,
    *,
    compiled: bool = True,
) -> ClassStats:
    """Simulate one replication of ``config.arrivals`` arrivals.

    ``compiled=False`` runs the same event loop as plain Python; it is slow
    and exists to cross-check the compiled path.
    """
    n_cls = model.n_classes
    m = model.servers
    rng = np.random.Generator(np.random.PCG64(seed))
    total = float(cumulative_rates(model)[-1])
    cum_prob = cumulative_rates(model) / total
    warmup = config.warmup_arrivals
    fcfd = model.protocol is Protocol.FCFD

    advance = _advance if compiled else _advance.py_func
    close = _close if compiled else _close.py_func

    dep = np.full(m, np.inf)
    scls = np.full(m, -1, dtype=np.int64)
    sseq = np.zeros(m, dtype=np.int64)
    sstart = np.zeros(m)
    counts = np.zeros((n_cls, 5), dtype=np.int64)
    work = np.zeros(n_cls)
    clock = np.array([0.0, 0.0, np.inf])

    done = 0
    while done < config.arrivals:
        size = min(_BLOCK, config.arrivals - done)
        gaps, kinds, services = _draw_block(model, rng, size, total, cum_prob)
        advance(gaps, kinds, services, done, warmup, fcfd, dep, scls, sseq, sstart, counts, work, clock)
        done += size
    close(warmup, scls, sseq, sstart, counts, work, clock)

    return ClassStats(
        arrivals=counts[:, _ARR].copy(),
        blocked=counts[:, _BLK].copy(),
        preempted=counts[:, _PRE].copy(),
        completed=counts[:, _DONE].copy(),
        in_service_at_end=counts[:, _LIVE].copy(),
        work=work,
        busy_area=float(clock[1]),
        horizon=float(clock[0] - clock[2]),
    )


def _interval(samples: np.ndarray, confidence: float) -> tuple[np.ndarray, np.ndarray]:
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    sd = samples.std(axis=0, ddof=1)
    t = stats.t.ppf(0.5 + confidence / 2.0, n - 1)
    return mean, t * sd / math.sqrt(n)


@dataclass
class SimulationReport:
    protocol: Protocol
    config: SimConfig
    q_hat: np.ndarray
    q_halfwidth: np.ndarray
    r_hat: np.ndarray
    r_halfwidth: np.ndarray
    gamma_hat: np.ndarray
    gamma_halfwidth: np.ndarray
    utilisation: float
    utilisation_halfwidth: float
    replications: list[ClassStats]
    simulated_time: float
    rng: str = RNG_ALGORITHM
    wall_seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.value,
            "config": self.config.to_dict(),
            "rng": self.rng,
            "q_hat": self.q_hat.tolist(),
            "q_halfwidth": self.q_halfwidth.tolist(),
            "r_hat": self.r_hat.tolist(),
            "r_halfwidth": self.r_halfwidth.tolist(),
            "gamma_hat": self.gamma_hat.tolist(),
            "gamma_halfwidth": self.gamma_halfwidth.tolist(),
            "utilisation": self.utilisation,
            "utilisation_halfwidth": self.utilisation_halfwidth,
            "simulated_time": self.simulated_time,
            "replications": [r.to_dict() for r in self.replications],
        }


def run(
    model: SystemModel,
    config: SimConfig,
    *,
    workers: int = 1,
    order: Iterable[int] | None = None,
) -> SimulationReport:
    """Run ``config.replications`` independent replications and aggregate.

    Replication ``k`` always uses the stream seeded by ``(config.seed, k)``;
    ``order`` only changes the execution order, never the result.
    """
    model.check()
    problems = config.problems()
    if problems:
        raise ValueError("; ".join(problems))
    indices = list(range(config.replications)) if order is None else list(order)
    if sorted(indices) != list(range(config.replications)):
        raise ValueError("order must be a permutation of the replication indices")

    started = time.perf_counter()
    job = lambda k: (k, run_replication(model, config, replication_seed(config.seed, k)))  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(job, indices))
    else:
        results = dict(map(job, indices))
    reps = [results[k] for k in range(config.replications)]

    conf = config.confidence
    q, q_hw = _interval(np.array([s.q_hat() for s in reps]), conf)
    r, r_hw = _interval(np.array([s.r_hat() for s in reps]), conf)
    gamma, gamma_hw = _interval(np.array([s.gamma_hat() for s in reps]), conf)
    util = np.array([s.busy_area / s.horizon / model.servers if s.horizon > 0 else 0.0 for s in reps])
    u, u_hw = _interval(util, conf)
    return SimulationReport(
        protocol=model.protocol,
        config=config,
        q_hat=q,
        q_halfwidth=q_hw,
        r_hat=r,
        r_halfwidth=r_hw,
        gamma_hat=gamma,
        gamma_halfwidth=gamma_hw,
        utilisation=float(u),
        utilisation_halfwidth=float(u_hw),
        replications=reps,
        simulated_time=float(sum(s.horizon for s in reps)),
        wall_seconds=time.perf_counter() - started,
    )


def write_replications_csv(report: SimulationReport, path) -> None:
    """One row per replication per class, classes numbered from 1."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for k, s in enumerate(report.replications):
            for i in range(len(s.arrivals)):
                writer.writerow(
                    (k, i + 1, int(s.arrivals[i]), int(s.blocked[i]), int(s.preempted[i]),
                     int(s.completed[i]), int(s.in_service_at_end[i]))
                )
