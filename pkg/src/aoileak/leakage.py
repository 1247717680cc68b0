"""Maximal leakage of the server departure process.

Two routes are provided and kept independent of each other:

* closed-form leakage rates (``ln(1 + mu)`` for MBT/RAD, ``floor(n/tau) ln 2 / n``
  for DAD), and
* an exact oracle that evaluates ``log sum_y max_x P(y | x)`` by enumerating
  every input ``x in {0,1}^n`` and computing ``P(. | x)`` with a forward
  dynamic program over the server occupancy.

All leakage values are in nats.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (LengthMismatch, OutOfRange, PolicyKind, PolicySpec, TooLarge,
                   UnsupportedPolicy, validate_policy)

ORACLE_MAX_N = 12
SWEEP_MAX_N = 10
TOL = 1e-9


def _occupancy_levels(policy: PolicySpec, n: int) -> int:
    # MBT needs the full queue length; DAD and RAD hold at most one update
    return n + 1 if policy.kind is PolicyKind.MBT else 2


def _admit(policy: PolicySpec, dist: np.ndarray) -> np.ndarray:
    """Apply one arrival to an occupancy distribution (last axis = level)."""
    if policy.kind is PolicyKind.MBT:
        out = (1.0 - policy.alpha) * dist
        out[..., 1:] += policy.alpha * dist[..., :-1]
        return out
    out = np.zeros_like(dist)
    out[..., 1] = dist.sum(axis=-1)
    return out


def _serve(policy: PolicySpec, dist: np.ndarray, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """Split an occupancy distribution into the (y_t = 0, y_t = 1) branches."""
    if policy.kind is PolicyKind.DAD:
        if t % policy.tau:
            return dist, np.zeros_like(dist)
        idle = np.zeros_like(dist)
        idle[..., 0] = dist[..., 0]
        sent = np.zeros_like(dist)
        sent[..., 0] = dist[..., 1]
        return idle, sent
    mu = policy.mu
    idle = dist.copy()
    idle[..., 1:] *= 1.0 - mu
    sent = np.zeros_like(dist)
    sent[..., :-1] = mu * dist[..., 1:]
    return idle, sent


def conditional_pmf(policy: PolicySpec, x: Sequence[int], y: Sequence[int]) -> float:
    """Exact ``P(Y^n = y | X^n = x)`` for slots ``1..n``."""
    if len(x) != len(y):
        raise LengthMismatch(f"len(x)={len(x)} != len(y)={len(y)}")
    validate_policy(policy)
    n = len(x)
    dist = np.zeros(_occupancy_levels(policy, n))
    dist[0] = 1.0
    for t in range(1, n + 1):
        if x[t - 1]:
            dist = _admit(policy, dist)
        idle, sent = _serve(policy, dist, t)
        dist = sent if y[t - 1] else idle
    return float(dist.sum())


def conditional_pmf_row(policy: PolicySpec, x: Sequence[int]) -> np.ndarray:
    """``P(. | x)`` over all ``2^n`` outputs.

    Index ``i`` corresponds to the output whose bits, read ``y_1`` first, are
    the binary digits of ``i``; ascending index is lexicographic order.
    """
    validate_policy(policy)
    n = len(x)
    dist = np.zeros((1, _occupancy_levels(policy, n)))
    dist[0, 0] = 1.0
    for t in range(1, n + 1):
        if x[t - 1]:
            dist = _admit(policy, dist)
        idle, sent = _serve(policy, dist, t)
        dist = np.stack([idle, sent], axis=1).reshape(-1, dist.shape[-1])
    return dist.sum(axis=1)


def _bits(index: int, n: int) -> Tuple[int, ...]:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def _all_inputs(n: int):
    return itertools.product((0, 1), repeat=n)


def _require_full_support(policy: PolicySpec) -> None:
    if policy.lam is not None and policy.lam >= 1.0:
        raise OutOfRange("lambda", "leakage results assume full-support arrivals, lambda < 1")


def _max_over_inputs(policy: PolicySpec, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-output maximum over inputs and the lexicographically smallest argmax.

    Inputs are visited depth-first in lexicographic order; ``P(y^t | x^t)``
    depends only on the prefix ``x^t``, so each prefix's table is built once.
    """
    best = np.full(2 ** n, -1.0)
    witness = np.zeros(2 ** n, dtype=np.int64)
    levels = _occupancy_levels(policy, n)

    def visit(dist, t, prefix):
        if t == n:
            row = dist.sum(axis=1)
            # relative slack keeps the smallest x on ties that differ only by rounding
            better = row > best + 1e-12 * np.abs(best)
            best[better] = row[better]
            witness[better] = prefix
            return
        for bit in (0, 1):
            cur = _admit(policy, dist) if bit else dist
            idle, sent = _serve(policy, cur, t + 1)
            visit(np.stack([idle, sent], axis=1).reshape(-1, levels), t + 1, 2 * prefix + bit)

    start = np.zeros((1, levels))
    start[0, 0] = 1.0
    visit(start, 0, 0)
    return best, witness


def max_conditional(policy: PolicySpec, y: Sequence[int]) -> Tuple[float, Tuple[int, ...]]:
    """``max_x P(y | x)`` with the lexicographically smallest maximiser."""
    n = len(y)
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n={n} exceeds enumeration cap {ORACLE_MAX_N}")
    validate_policy(policy)
    best, arg = -1.0, None
    for x in _all_inputs(n):
        p = conditional_pmf(policy, x, y)
        if p > best + 1e-12 * abs(best):
            best, arg = p, x
    return best, tuple(arg)


@dataclasses.dataclass
class LeakageReport:
    n: int
    leakage_nats: float
    per_output: Dict[Tuple[int, ...], Tuple[float, Tuple[int, ...]]]
    support_size: int
    exploratory: bool = False

    @property
    def leakage_rate_nats(self) -> float:
        return self.leakage_nats / self.n


def maximal_leakage_oracle(policy: PolicySpec, n: int) -> LeakageReport:
    """Exact maximal leakage by enumeration over all ``x, y in {0,1}^n``.

    MBT with ``alpha < 1`` is computed the same way and flagged as
    ``exploratory``: the closed-form rate is not claimed for it.
    """
    if n < 1:
        raise OutOfRange("n", "n >= 1 required")
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n={n} exceeds enumeration cap {ORACLE_MAX_N}")
    validate_policy(policy)
    _require_full_support(policy)
    best, witness = _max_over_inputs(policy, n)
    per_output = {}
    total = 0.0
    for yi in np.flatnonzero(best > 0.0):
        per_output[_bits(int(yi), n)] = (float(best[yi]), _bits(int(witness[yi]), n))
        total += best[yi]
    return LeakageReport(
        n=n,
        leakage_nats=math.log(total),
        per_output=per_output,
        support_size=len(per_output),
        exploratory=policy.kind is PolicyKind.MBT and policy.alpha < 1.0,
    )


def analytic_leakage_rate(policy: PolicySpec, n: Optional[int] = None) -> float:
    """Closed-form leakage rate in nats per slot.

    For DAD, ``n=None`` gives the large-``n`` limit ``ln 2 / tau``.
    """
    validate_policy(policy)
    if policy.kind is PolicyKind.DAD:
        if n is None:
            return math.log(2.0) / policy.tau
        return (n // policy.tau) * math.log(2.0) / n
    return math.log1p(policy.mu)


def dad_support_size(n: int, tau: int) -> int:
    if n < 1 or tau < 1:
        raise OutOfRange("n" if n < 1 else "tau")
    return 2 ** (n // tau)


@dataclasses.dataclass
class LemmaReport:
    n: int
    holds: bool
    counterexamples: List[dict]
    checked: int


def verify_lemma1(policy: PolicySpec, n: int) -> LemmaReport:
    """Check that ``max_x P(y|x) = mu^{sum y}`` and that ``x = y`` attains it, for every ``y``."""
    validate_policy(policy)
    if policy.kind is PolicyKind.DAD:
        raise UnsupportedPolicy("DAD is covered by verify_lemma2")
    if policy.kind is PolicyKind.MBT and policy.alpha < 1.0:
        raise UnsupportedPolicy("MBT with alpha < 1 is exploratory; use maximal_leakage_oracle")
    if n > SWEEP_MAX_N:
        raise TooLarge(f"n={n} exceeds sweep cap {SWEEP_MAX_N}")
    _require_full_support(policy)
    best, _ = _max_over_inputs(policy, n)
    bad = []
    for yi in range(2 ** n):
        y = _bits(yi, n)
        expected = policy.mu ** sum(y)
        at_y = conditional_pmf(policy, y, y)
        if abs(best[yi] - expected) > TOL or abs(at_y - best[yi]) > TOL:
            bad.append({"y": y, "max": float(best[yi]), "expected": expected, "at_x_eq_y": at_y})
    return LemmaReport(n, not bad, bad, 2 ** n)


def verify_lemma2(policy: PolicySpec, n: int) -> LemmaReport:
    """DAD: every reachable ``y`` has maximum exactly 1, attained at ``x = y``;
    unreachable outputs have maximum exactly 0."""
    validate_policy(policy)
    if policy.kind is not PolicyKind.DAD:
        raise UnsupportedPolicy("verify_lemma2 applies to DAD only")
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n={n} exceeds enumeration cap {ORACLE_MAX_N}")
    best, _ = _max_over_inputs(policy, n)
    tau = policy.tau
    bad = []
    for yi in range(2 ** n):
        y = _bits(yi, n)
        reachable = all(b == 0 for t, b in enumerate(y, start=1) if t % tau)
        if reachable:
            ok = best[yi] == 1.0 and conditional_pmf(policy, y, y) == 1.0
        else:
            ok = best[yi] == 0.0
        if not ok:
            bad.append({"y": y, "max": float(best[yi]), "reachable": reachable})
    return LemmaReport(n, not bad, bad, 2 ** n)
