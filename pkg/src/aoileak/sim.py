"""Monte Carlo simulation of the source -> server -> monitor pipeline.

The source generates an update in slot ``t`` (``0 <= t < T``) with
probability ``lam``; the server receives it at the start of slot ``t + 1``.
The coin streams match :func:`aoileak.policies.run_policy` with
``start=1``, so :func:`trace` reproduces the state machines exactly while
running vectorised over the horizon.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Dict, Optional

import numpy as np

from .core import (OutOfRange, PolicyKind, PolicySpec, RngStream, Unstable,
                   UnsupportedPolicy, generate_arrivals, validate_policy)

N_BATCHES = 20
MIN_REPORTED_HORIZON = 1000
QUEUE_OVERFLOW = 10 ** 6


@dataclasses.dataclass(frozen=True)
class SimConfig:
    policy: PolicySpec
    horizon: int
    warmup: int = 0
    rng: RngStream = RngStream()

    def validate(self) -> "SimConfig":
        validate_policy(self.policy)
        self.policy.require_lam()
        if self.horizon < 1:
            raise OutOfRange("T", "horizon must be positive")
        if not 0 <= self.warmup < self.horizon:
            raise OutOfRange("warmup", "need 0 <= warmup < T")
        return self


@dataclasses.dataclass
class Trace:
    """Per-slot record of one run.

    Monitor-side arrays are indexed by slot ``0..T-1``; entries are ``-1``
    where the quantity is not yet defined (no update seen so far).
    ``y`` is indexed by server slot ``1..T`` at position ``slot - 1``.
    """

    gen: np.ndarray
    y: np.ndarray
    recv_slots: np.ndarray
    recv_ts: np.ndarray
    monitor_age: np.ndarray
    input_age: np.ndarray
    sampling_age: Optional[np.ndarray] = None
    monitor_age_fake: Optional[np.ndarray] = None
    system_times: Optional[np.ndarray] = None


def _ffill_max(marker: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(marker)


def _age_from_marks(marks: np.ndarray) -> np.ndarray:
    """``n - u(n)`` where ``u`` is the forward-filled mark, ``-1`` if no mark yet."""
    u = _ffill_max(marks)
    age = np.arange(len(marks), dtype=np.int64) - u
    age[u < 0] = -1
    return age


def _mbt_departures(arr_slots, coins_ok, horizon):
    """FCFS departure slot per admitted update; ``horizon + 1`` means not sent."""
    # next_ok[s] = first server slot >= s whose service coin succeeds
    never = horizon + 1
    next_ok = np.full(horizon + 2, never, dtype=np.int64)
    ok_slots = np.flatnonzero(coins_ok) + 1
    idx = np.searchsorted(ok_slots, np.arange(horizon + 2))
    have = idx < len(ok_slots)
    next_ok[have] = ok_slots[idx[have]]
    nxt = next_ok.tolist()
    dep = []
    prev = 0
    for a in arr_slots.tolist():
        s = a if a > prev else prev + 1
        d = nxt[s] if s <= horizon else never
        dep.append(d)
        prev = d
        if d == never:
            break
    dep.extend([never] * (len(arr_slots) - len(dep)))
    return np.asarray(dep, dtype=np.int64)


def trace(config: SimConfig) -> Trace:
    """Run one replication and return per-slot arrays."""
    config.validate()
    pol = config.policy
    T = config.horizon
    lam = pol.lam
    if pol.kind is PolicyKind.MBT and pol.alpha * lam >= pol.mu:
        raise Unstable(f"alpha*lambda={pol.alpha * lam:.6g} >= mu={pol.mu:.6g}: queue grows without bound")

    gen = generate_arrivals(lam, T, config.rng)
    slots = np.arange(T, dtype=np.int64)
    gen_marks = np.where(gen == 1, slots, -1)
    latest_gen = _ffill_max(gen_marks)  # latest generation slot <= t
    # input age in slot n counts from the freshest update received before n
    input_age = np.full(T, -1, dtype=np.int64)
    input_age[1:] = np.where(latest_gen[:-1] >= 0, slots[1:] - latest_gen[:-1], -1)

    y = np.zeros(T, dtype=np.int8)
    sampling_age = None
    monitor_fake = None
    system_times = None

    if pol.kind is PolicyKind.MBT:
        coins = config.rng.generator("services").random(T)
        arr_slots = np.flatnonzero(gen) + 1
        admit = config.rng.generator("admissions").random(len(arr_slots)) < pol.alpha
        arr_slots = arr_slots[admit]
        dep = _mbt_departures(arr_slots, coins < pol.mu, T)
        sent = dep <= T
        if len(arr_slots):
            backlog = np.arange(1, len(arr_slots) + 1) - np.searchsorted(dep, arr_slots)
            if backlog.max() > QUEUE_OVERFLOW:
                raise Unstable("queue length exceeded 1e6")
        y[dep[sent] - 1] = 1
        recv_slots = dep[sent] + 1
        recv_ts = arr_slots[sent] - 1
        ts = recv_ts
        if len(ts) > 1:
            system_times = np.stack([np.diff(ts), dep[sent][1:] - ts[1:]], axis=1)
        else:
            system_times = np.zeros((0, 2), dtype=np.int64)
    else:
        server_slots = np.arange(1, T + 1)
        if pol.kind is PolicyKind.DAD:
            attempt = server_slots % pol.tau == 0
        else:
            attempt = config.rng.generator("services").random(T) < pol.mu
        att_slots = server_slots[attempt]
        # freshest timestamp held at server slot s is latest_gen[s - 1]
        fresh = latest_gen[att_slots - 1]
        prev = np.concatenate([[-1], fresh[:-1]])
        real = fresh > prev
        y[att_slots[real] - 1] = 1
        recv_slots = att_slots[real] + 1
        recv_ts = fresh[real]

        # fake-update view: every attempt re-delivers the freshest held update
        fake_marks = np.full(T, -1, dtype=np.int64)
        keep = att_slots + 1 < T
        fake_marks[att_slots[keep] + 1] = fresh[keep]
        monitor_fake = _age_from_marks(fake_marks)
        att_marks = np.full(T, -1, dtype=np.int64)
        att_marks[att_slots[att_slots < T]] = att_slots[att_slots < T]
        last_att = _ffill_max(att_marks)
        sampling_age = np.full(T, -1, dtype=np.int64)
        sampling_age[1:] = np.where(last_att[:-1] >= 0, slots[1:] - last_att[:-1], -1)

    marks = np.full(T, -1, dtype=np.int64)
    inside = recv_slots < T
    marks[recv_slots[inside]] = recv_ts[inside]
    monitor_age = _age_from_marks(marks)
    return Trace(gen, y, recv_slots, recv_ts, monitor_age, input_age,
                 sampling_age, monitor_fake, system_times)


def batch_means(values: np.ndarray, n_batches: int = N_BATCHES):
    """Means of ``n_batches`` equal contiguous batches (remainder dropped) and their std error."""
    size = len(values) // n_batches
    if size < 1:
        raise OutOfRange("slots", f"need at least {n_batches} samples for batch means")
    means = values[:size * n_batches].reshape(n_batches, size).mean(axis=1)
    return means, float(means.std(ddof=1) / math.sqrt(n_batches))


@dataclasses.dataclass
class AgeEstimate:
    mean_age: float
    std_error: float
    histogram: Dict[int, int]
    slots_counted: int
    batch_means: list


def _estimate(series: np.ndarray) -> AgeEstimate:
    counts = np.bincount(series)
    hist = {int(a): int(c) for a, c in enumerate(counts) if c}
    means, se = batch_means(series.astype(np.float64))
    return AgeEstimate(float(series.mean()), se, hist, int(len(series)), means.tolist())


def simulate_aoi(config: SimConfig) -> AgeEstimate:
    """Time-average monitor age over post-warmup slots after the first delivery."""
    config.validate()
    if config.horizon < MIN_REPORTED_HORIZON:
        raise OutOfRange("T", f"need T >= {MIN_REPORTED_HORIZON} to report statistics")
    tr = trace(config)
    ages = tr.monitor_age[config.warmup:]
    return _estimate(ages[ages >= 1])


def mbt_system_time_samples(config: SimConfig) -> np.ndarray:
    """``(Y_k, T_k)`` pairs for MBT updates generated after the warmup."""
    if config.policy.kind is not PolicyKind.MBT:
        raise UnsupportedPolicy("system times are defined for the FCFS (MBT) server")
    tr = trace(config)
    st = tr.system_times
    ts = tr.recv_ts[1:]
    return st[ts >= config.warmup]


def empirical_renewal_age(config: SimConfig, observation_point: str) -> Dict[int, int]:
    """Histogram of the renewal age seen at ``"server_input"`` or ``"monitor_sampling"``."""
    config.validate()
    tr = trace(config)
    if observation_point == "server_input":
        series = tr.input_age
    elif observation_point == "monitor_sampling":
        if tr.sampling_age is None:
            raise UnsupportedPolicy("monitor sampling age is defined for DAD and RAD")
        series = tr.sampling_age
    else:
        raise OutOfRange("observation_point", observation_point)
    series = series[config.warmup:]
    series = series[series >= 1]
    counts = np.bincount(series)
    return {int(a): int(c) for a, c in enumerate(counts) if c}


def total_variation(hist: Dict[int, int], pmf) -> float:
    """TV distance between a count histogram and a pmf callable on ``{1, 2, ...}``."""
    total = sum(hist.values())
    top = max(hist)
    tv = 0.0
    covered = 0.0
    for z in range(1, top + 1):
        p = pmf(z)
        covered += p
        tv += abs(hist.get(z, 0) / total - p)
    tv += max(0.0, 1.0 - covered)
    return 0.5 * tv


@dataclasses.dataclass
class DecompositionReport:
    monitor_mean: float
    input_mean: float
    sampling_mean: float
    monitor_se: float
    input_se: float
    sampling_se: float
    residual: float
    combined_se: float
    slots_counted: int

    @property
    def passed(self) -> bool:
        # a deterministic run has zero residual and zero spread
        return self.residual < 3.0 * self.combined_se or self.residual == 0.0


def decomposition_check(config: SimConfig) -> DecompositionReport:
    """Measure monitor age, input age and sampling age together.

    The residual is ``|E[A_m] - E[A_i] - E[Z']|``; ``combined_se`` is the
    root-sum-square of the three batch-means standard errors.
    """
    config.validate()
    if config.policy.kind is PolicyKind.MBT:
        raise UnsupportedPolicy("decomposition holds for sampling servers (DAD, RAD)")
    if config.horizon < MIN_REPORTED_HORIZON:
        raise OutOfRange("T", f"need T >= {MIN_REPORTED_HORIZON} to report statistics")
    tr = trace(config)
    sl = slice(config.warmup, None)
    am, ai, zs = tr.monitor_age[sl], tr.input_age[sl], tr.sampling_age[sl]
    ok = (am >= 1) & (ai >= 1) & (zs >= 1)
    am, ai, zs = (a[ok].astype(np.float64) for a in (am, ai, zs))
    _, se_m = batch_means(am)
    _, se_i = batch_means(ai)
    _, se_z = batch_means(zs)
    m_m, m_i, m_z = am.mean(), ai.mean(), zs.mean()
    return DecompositionReport(
        float(m_m), float(m_i), float(m_z), se_m, se_i, se_z,
        residual=float(abs(m_m - m_i - m_z)),
        combined_se=math.sqrt(se_m ** 2 + se_i ** 2 + se_z ** 2),
        slots_counted=int(ok.sum()),
    )
