"""Closed-form average age of information and discrete renewal-age machinery."""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Mapping, Optional, Tuple

import numpy as np

from .core import EmptyInput, OutOfRange, Unstable, check_probability

GEOMETRIC_TAIL_CUTOFF = 1e-12


@dataclasses.dataclass(frozen=True)
class InterArrivalModel:
    """Distribution of the gap between renewals, supported on ``{1, 2, ...}``.

    Build with :meth:`geometric`, :meth:`deterministic` or :meth:`empirical`.
    """

    kind: str
    p: Optional[float] = None
    d: Optional[int] = None
    pmf: Optional[Tuple[Tuple[int, float], ...]] = None

    @classmethod
    def geometric(cls, p: float) -> "InterArrivalModel":
        check_probability("p", p)
        return cls("geometric", p=p)

    @classmethod
    def deterministic(cls, d: int) -> "InterArrivalModel":
        if d < 1:
            raise OutOfRange("d", "deterministic gap must be >= 1")
        return cls("deterministic", d=int(d))

    @classmethod
    def empirical(cls, pmf: Mapping[int, float]) -> "InterArrivalModel":
        items = tuple(sorted((int(k), float(v)) for k, v in pmf.items() if v > 0))
        if not items or items[0][0] < 1:
            raise OutOfRange("pmf", "support must be a nonempty subset of the positive integers")
        if abs(sum(v for _, v in items) - 1.0) > 1e-9:
            raise OutOfRange("pmf", "probabilities must sum to 1")
        return cls("empirical", pmf=items)

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "InterArrivalModel":
        total = sum(counts.values())
        return cls.empirical({k: c / total for k, c in counts.items()})

    @property
    def mean(self) -> float:
        if self.kind == "geometric":
            return 1.0 / self.p
        if self.kind == "deterministic":
            return float(self.d)
        return sum(k * v for k, v in self.pmf)

    @property
    def second_moment(self) -> float:
        if self.kind == "geometric":
            return (2.0 - self.p) / self.p ** 2
        if self.kind == "deterministic":
            return float(self.d) ** 2
        return sum(k * k * v for k, v in self.pmf)

    def tail(self, z: int) -> float:
        """``P(Y >= z)``."""
        if self.kind == "geometric":
            return (1.0 - self.p) ** (z - 1)
        if self.kind == "deterministic":
            return 1.0 if z <= self.d else 0.0
        return sum(v for k, v in self.pmf if k >= z)

    def max_support(self) -> int:
        """Largest ``z`` worth summing over; geometric tails are cut at 1e-12."""
        if self.kind == "geometric":
            if self.p == 1.0:
                return 1
            return 1 + int(math.ceil(math.log(GEOMETRIC_TAIL_CUTOFF) / math.log1p(-self.p)))
        if self.kind == "deterministic":
            return self.d
        return self.pmf[-1][0]


def renewal_age_pmf(model: InterArrivalModel, z: int) -> float:
    """Stationary age of a discrete renewal process: ``P(Z = z) = P(Y >= z) / E[Y]``."""
    if z < 1:
        raise OutOfRange("z", "age is at least one slot")
    return model.tail(z) / model.mean


def renewal_mean_age(model: InterArrivalModel) -> float:
    return model.second_moment / (2.0 * model.mean) + 0.5


@dataclasses.dataclass(frozen=True)
class AgeFormulaResult:
    """Average age in slots, with the input-age / sampling-age split when it exists."""

    age_slots: float
    input_age: Optional[float] = None
    sampling_age: Optional[float] = None


def aoi_mbt(lam: float, alpha: float, mu: float) -> AgeFormulaResult:
    """Average age of the FCFS Geo/Geo/1 queue at effective arrival rate ``alpha * lam``."""
    for name, v in (("lambda", lam), ("alpha", alpha), ("mu", mu)):
        check_probability(name, v)
    p = alpha * lam
    if p >= mu:
        raise Unstable(f"alpha*lambda={p:.6g} >= mu={mu:.6g}")
    age = 1.0 / p + (1.0 - p) / (mu - p) - p / mu ** 2 + p / mu
    return AgeFormulaResult(age)


def aoi_dad(lam: float, tau: int) -> AgeFormulaResult:
    check_probability("lambda", lam)
    if tau < 1:
        raise OutOfRange("tau")
    return AgeFormulaResult(1.0 / lam + (tau + 1) / 2.0, 1.0 / lam, (tau + 1) / 2.0)


def aoi_rad(lam: float, mu: float) -> AgeFormulaResult:
    check_probability("lambda", lam)
    check_probability("mu", mu)
    return AgeFormulaResult(1.0 / lam + 1.0 / mu, 1.0 / lam, 1.0 / mu)


def aoi_from_system_times(samples: Iterable[Tuple[int, int]]) -> float:
    """FCFS age from per-update ``(interarrival Y_k, system time T_k)`` pairs.

    ``Y_k`` is the gap between the generation slots of updates ``k - 1`` and
    ``k``; ``T_k`` is the number of slots from the arrival of update ``k`` at
    the server to its reception at the monitor. The estimate is the plug-in
    ``(E[Y^2] + 2 E[Y T]) / (2 E[Y]) + 1/2``.
    """
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples,
                     dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("no (Y, T) samples")
    gaps, sys_t = arr[:, 0], arr[:, 1]
    if (gaps < 1).any() or (sys_t < 1).any():
        raise OutOfRange("samples", "Y_k and T_k must be >= 1")
    return float((np.mean(gaps ** 2) + 2.0 * np.mean(gaps * sys_t)) / (2.0 * np.mean(gaps)) + 0.5)
