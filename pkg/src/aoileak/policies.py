"""Slot-by-slot server state machines for the MBT, DAD and RAD policies.

Within a slot the order is: arrival, admission, service. An update received
at the start of slot ``t`` (generated in ``t - 1``) can therefore leave the
server in slot ``t`` and reach the monitor at the start of ``t + 1``.
"""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import PolicyKind, PolicySpec, RngStream, validate_policy


@dataclasses.dataclass(frozen=True)
class MbtState:
    queue: Tuple[int, ...] = ()


@dataclasses.dataclass(frozen=True)
class DadState:
    stored: Optional[int] = None
    slot_in_cycle: int = 1


@dataclasses.dataclass(frozen=True)
class RadState:
    stored: Optional[int] = None


@dataclasses.dataclass(frozen=True)
class StepOutcome:
    sent: int = 0
    delivered_timestamp: Optional[int] = None


_IDLE = StepOutcome()


def mbt_step(state: MbtState, arrival_ts: Optional[int], admit_coin: float,
             serve_coin: float, alpha: float, mu: float) -> Tuple[MbtState, StepOutcome]:
    """Advance an FCFS Bernoulli-thinning queue by one slot.

    ``arrival_ts`` is the timestamp of the update received at the start of
    the slot, or ``None``. ``admit_coin`` is ignored when nothing arrives.
    """
    queue = state.queue
    if arrival_ts is not None and admit_coin < alpha:
        queue = queue + (arrival_ts,)
    if queue and serve_coin < mu:
        return MbtState(queue[1:]), StepOutcome(1, queue[0])
    return MbtState(queue), _IDLE


def dad_step(state: DadState, arrival_ts: Optional[int], tau: int) -> Tuple[DadState, StepOutcome]:
    stored = arrival_ts if arrival_ts is not None else state.stored
    if state.slot_in_cycle == tau:
        out = StepOutcome(1, stored) if stored is not None else _IDLE
        return DadState(None, 1), out
    return DadState(stored, state.slot_in_cycle + 1), _IDLE


def rad_step(state: RadState, arrival_ts: Optional[int], serve_coin: float,
             mu: float) -> Tuple[RadState, StepOutcome]:
    stored = arrival_ts if arrival_ts is not None else state.stored
    if stored is not None and serve_coin < mu:
        # buffer empties on send; an idle server never re-sends on the wire
        return RadState(None), StepOutcome(1, stored)
    return RadState(stored), _IDLE


@dataclasses.dataclass
class PolicyRun:
    """Departure bits ``y`` (slot ``start + i`` at index ``i``) and deliveries.

    Each delivery is ``(reception_slot, timestamp)`` where the reception slot
    is one past the sending slot.
    """

    y: np.ndarray
    deliveries: List[Tuple[int, int]]


def run_policy(spec: PolicySpec, x: Sequence[int], rng: Optional[RngStream] = None, *,
               admit_coins: Optional[Sequence[float]] = None,
               serve_coins: Optional[Sequence[float]] = None,
               start: int = 1) -> PolicyRun:
    """Drive one policy over the arrival bits ``x``.

    ``x[i]`` marks an update received at the start of slot ``start + i``; that
    update was generated one slot earlier. Coins come from ``admit_coins`` /
    ``serve_coins`` when given, otherwise from the ``"admissions"`` and
    ``"services"`` substreams of ``rng``. One service coin is drawn per slot
    and one admission coin per arrival, so the fast simulator in
    :mod:`aoileak.sim` reproduces this run exactly.
    """
    validate_policy(spec)
    x = np.asarray(x, dtype=np.int64)
    n = len(x)
    if spec.kind is not PolicyKind.DAD:
        if serve_coins is None:
            serve_coins = (rng or RngStream()).generator("services").random(n)
        if spec.kind is PolicyKind.MBT and admit_coins is None:
            admit_coins = (rng or RngStream()).generator("admissions").random(int(x.sum()))

    y = np.zeros(n, dtype=np.int8)
    deliveries: List[Tuple[int, int]] = []
    n_arrivals = 0
    if spec.kind is PolicyKind.MBT:
        state = MbtState()
    elif spec.kind is PolicyKind.DAD:
        state = DadState()
    else:
        state = RadState()

    for i in range(n):
        slot = start + i
        ts = slot - 1 if x[i] else None
        if spec.kind is PolicyKind.MBT:
            coin = 1.0
            if ts is not None:
                coin = admit_coins[n_arrivals]
                n_arrivals += 1
            state, out = mbt_step(state, ts, coin, serve_coins[i], spec.alpha, spec.mu)
        elif spec.kind is PolicyKind.DAD:
            state, out = dad_step(state, ts, spec.tau)
        else:
            state, out = rad_step(state, ts, serve_coins[i], spec.mu)
        if out.sent:
            y[i] = 1
            deliveries.append((slot + 1, out.delivered_timestamp))
    return PolicyRun(y, deliveries)


def dad_image(x: Sequence[int], tau: int) -> np.ndarray:
    """Deterministic DAD output for arrival bits ``x`` over slots ``1..n``."""
    x = np.asarray(x, dtype=np.int8)
    y = np.zeros_like(x)
    for k in range(1, len(x) // tau + 1):
        y[k * tau - 1] = 1 if x[(k - 1) * tau:k * tau].any() else 0
    return y
