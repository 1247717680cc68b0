"""Slot conventions, policy descriptors and seeded randomness.

Time is slotted. A packet sent in slot ``t`` (source to server, or server
to monitor) is received at the start of slot ``t + 1``. An update generated
in slot ``t`` carries timestamp ``t`` and has age ``j`` in slot ``t + j``.

Leakage sequences are indexed ``1..n``; simulation runs use ``0..T-1``.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
from typing import Optional

import numpy as np


class AoiLeakError(ValueError):
    """Base class for every domain error raised by this package."""


class OutOfRange(AoiLeakError):
    def __init__(self, field: str, detail: str = ""):
        self.field = field
        msg = f"{field} out of range"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MissingField(AoiLeakError):
    def __init__(self, field: str, kind: str = ""):
        self.field = field
        super().__init__(f"{kind + ' ' if kind else ''}policy requires {field}")


class ExtraneousField(AoiLeakError):
    def __init__(self, field: str, kind: str = ""):
        self.field = field
        super().__init__(f"{field} does not apply to {kind or 'this'} policy")


class Unstable(AoiLeakError):
    """Queue is not stable; the stationary age does not exist."""


class TooLarge(AoiLeakError):
    """Requested exhaustive enumeration is beyond the supported size."""


class LengthMismatch(AoiLeakError):
    pass


class UnsupportedPolicy(AoiLeakError):
    pass


class EmptyInput(AoiLeakError):
    pass


class PolicyKind(str, enum.Enum):
    MBT = "mbt"
    DAD = "dad"
    RAD = "rad"


_FIELDS = {
    PolicyKind.MBT: ("alpha", "mu"),
    PolicyKind.DAD: ("tau",),
    PolicyKind.RAD: ("mu",),
}


@dataclasses.dataclass(frozen=True)
class PolicySpec:
    """Server policy plus the Bernoulli arrival rate feeding it.

    ``lam`` may be left unset for pure leakage work, where only the support
    of the arrival process matters.
    """

    kind: PolicyKind
    lam: Optional[float] = None
    alpha: Optional[float] = None
    mu: Optional[float] = None
    tau: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))

    @classmethod
    def mbt(cls, mu: float, alpha: float = 1.0, lam: Optional[float] = None):
        return cls(PolicyKind.MBT, lam=lam, alpha=alpha, mu=mu)

    @classmethod
    def dad(cls, tau: int, lam: Optional[float] = None):
        return cls(PolicyKind.DAD, lam=lam, tau=tau)

    @classmethod
    def rad(cls, mu: float, lam: Optional[float] = None):
        return cls(PolicyKind.RAD, lam=lam, mu=mu)

    def require_lam(self) -> float:
        if self.lam is None:
            raise MissingField("lambda", self.kind.value)
        return self.lam

    def label(self) -> str:
        parts = [self.kind.value.upper()]
        for name in _FIELDS[self.kind]:
            parts.append(f"{name}={getattr(self, name)}")
        return " ".join(parts)


def check_probability(name: str, value) -> None:
    if not (isinstance(value, (int, float)) and 0.0 < value <= 1.0):
        raise OutOfRange(name, f"expected 0 < {name} <= 1, got {value!r}")


def validate_policy(spec: PolicySpec) -> PolicySpec:
    """Return ``spec`` unchanged, or raise on the first violated bound."""
    if spec.lam is not None:
        check_probability("lambda", spec.lam)
    wanted = _FIELDS[spec.kind]
    for name in ("alpha", "mu", "tau"):
        value = getattr(spec, name)
        if name in wanted and value is None:
            raise MissingField(name, spec.kind.value)
        if name not in wanted and value is not None:
            raise ExtraneousField(name, spec.kind.value)
    if spec.kind is PolicyKind.MBT:
        check_probability("alpha", spec.alpha)
        check_probability("mu", spec.mu)
    elif spec.kind is PolicyKind.RAD:
        check_probability("mu", spec.mu)
    else:
        if isinstance(spec.tau, bool) or not isinstance(spec.tau, (int, np.integer)) or spec.tau < 1:
            raise OutOfRange("tau", f"expected integer tau >= 1, got {spec.tau!r}")
    return spec


def ones_count(bits) -> int:
    return int(np.sum(np.asarray(bits, dtype=np.int64)))


@dataclasses.dataclass(frozen=True)
class RngStream:
    """Seed plus stream id; named substreams are derived deterministically.

    Each substream name (``"arrivals"``, ``"admissions"``, ``"services"``)
    maps to an independent PCG64 generator, so two policies run with the same
    ``RngStream`` see common random numbers on every shared substream.
    """

    seed: int = 0
    stream: int = 0

    def generator(self, name: str = "main") -> np.random.Generator:
        # stable across hosts and Python versions, unlike hash()
        key = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "little")
        ss = np.random.SeedSequence(
            entropy=self.seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(self.stream & 0xFFFFFFFFFFFFFFFF, key),
        )
        return np.random.Generator(np.random.PCG64(ss))


def generate_arrivals(lam: float, n: int, rng: RngStream) -> np.ndarray:
    """Length-``n`` Bernoulli(``lam``) bit sequence drawn from the arrivals substream."""
    check_probability("lambda", lam)
    if n < 1:
        raise OutOfRange("n", f"expected n >= 1, got {n}")
    if lam == 1.0:
        return np.ones(n, dtype=np.int8)
    u = rng.generator("arrivals").random(n)
    return (u < lam).astype(np.int8)
