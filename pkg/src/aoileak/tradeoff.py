"""Age versus leakage-rate trade-off curves for the three server policies."""

from __future__ import annotations

import dataclasses
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .age import aoi_dad, aoi_mbt, aoi_rad
from .core import OutOfRange, PolicyKind, PolicySpec, Unstable, check_probability
from .leakage import analytic_leakage_rate
from .sim import SimConfig, simulate_aoi

ALPHA_EPS = 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclasses.dataclass
class TradeoffPoint:
    policy: PolicySpec
    leakage_rate_nats: float
    age_slots: float
    source: str = "analytic"
    alpha_star: Optional[float] = None
    effective_rate: Optional[float] = None
    std_error: Optional[float] = None
    note: str = ""

    @property
    def unstable(self) -> bool:
        return math.isinf(self.age_slots)


@dataclasses.dataclass
class SweepSpec:
    lam: float
    kind: PolicyKind
    grid: Sequence[float]
    alpha: float = 1.0
    optimize_alpha: bool = False
    sim_overlay: Optional[SimConfig] = None

    def validate(self) -> "SweepSpec":
        check_probability("lambda", self.lam)
        check_probability("alpha", self.alpha)
        if len(self.grid) == 0:
            raise OutOfRange("grid", "empty parameter grid")
        return self


def _policy_at(spec: SweepSpec, value, alpha: float) -> PolicySpec:
    kind = PolicyKind(spec.kind)
    if kind is PolicyKind.DAD:
        return PolicySpec.dad(int(value), lam=spec.lam)
    if kind is PolicyKind.RAD:
        return PolicySpec.rad(float(value), lam=spec.lam)
    return PolicySpec.mbt(float(value), alpha=alpha, lam=spec.lam)


def analytic_age(policy: PolicySpec) -> float:
    lam = policy.require_lam()
    if policy.kind is PolicyKind.MBT:
        return aoi_mbt(lam, policy.alpha, policy.mu).age_slots
    if policy.kind is PolicyKind.DAD:
        return aoi_dad(lam, policy.tau).age_slots
    return aoi_rad(lam, policy.mu).age_slots


def pareto_sweep(spec: SweepSpec) -> List[TradeoffPoint]:
    """One analytic point per grid value, plus a simulated point when an overlay is set.

    DAD uses the large-``n`` leakage rate ``ln 2 / tau``. Unstable MBT points
    are kept with infinite age.
    """
    spec.validate()
    points = []
    for value in spec.grid:
        alpha = spec.alpha
        alpha_star = None
        if PolicyKind(spec.kind) is PolicyKind.MBT and spec.optimize_alpha:
            alpha_star, _ = optimize_alpha(spec.lam, float(value))
            alpha = alpha_star
        pol = _policy_at(spec, value, alpha)
        rate = analytic_leakage_rate(pol)
        eff = alpha * spec.lam if pol.kind is PolicyKind.MBT else None
        try:
            age = analytic_age(pol)
            note = ""
        except Unstable:
            age, note = math.inf, "unstable"
        points.append(TradeoffPoint(pol, rate, age, "analytic", alpha_star, eff, None, note))
        if spec.sim_overlay is not None and not note:
            ov = spec.sim_overlay
            est = simulate_aoi(SimConfig(pol, ov.horizon, ov.warmup, ov.rng))
            points.append(TradeoffPoint(pol, rate, est.mean_age, "simulated", alpha_star,
                                        eff, est.std_error))
    return points


def _alpha_upper(lam: float, mu: float) -> float:
    # alpha = 1 is admissible only when lam < mu
    if mu / lam > 1.0:
        return 1.0
    return mu / lam - ALPHA_EPS


def optimize_alpha(lam: float, mu: float, tolerance: float = 1e-10) -> Tuple[float, float]:
    """Admission probability minimising the MBT age at service rate ``mu``.

    The age is strictly convex in the effective rate ``alpha * lam``, so a
    golden-section search over ``[1e-6, min(1, mu/lam)]`` finds the minimum;
    when it sits on ``alpha = 1`` that boundary is returned.
    """
    check_probability("lambda", lam)
    check_probability("mu", mu)
    hi = _alpha_upper(lam, mu)
    lo = ALPHA_EPS

    def age(a):
        return aoi_mbt(lam, a, mu).age_slots

    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = age(c), age(d)
    while b - a > 1e-12 and not (b - a < 1e-7 and abs(fc - fd) < tolerance):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = age(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = age(d)
    best_a, best_f = (c, fc) if fc <= fd else (d, fd)
    f_hi = age(hi)
    if f_hi <= best_f:
        best_a, best_f = hi, f_hi
    return best_a, best_f


def grid_search_alpha(lam: float, mu: float, step: float = 1e-4) -> Tuple[float, float]:
    """Brute-force minimiser over ``alpha in {step, 2 step, ...}`` inside the stable region."""
    cap = min(1.0, mu / lam)
    alphas = np.arange(1, int(math.floor(cap / step)) + 1) * step
    alphas = alphas[alphas * lam < mu]
    if cap == 1.0 and lam < mu:
        alphas = np.append(alphas, 1.0)
    p = alphas * lam
    ages = 1.0 / p + (1.0 - p) / (mu - p) - p / mu ** 2 + p / mu
    i = int(np.argmin(ages))
    return float(alphas[i]), float(ages[i])


@dataclasses.dataclass
class MatchedLeakage:
    lam: float
    tau: int
    mu: float
    leakage_rate_nats: float
    dad_age: float
    rad_age: float
    mbt_alpha_star: float
    mbt_age: float


def matched_leakage_comparison(lam: float, tau: int) -> MatchedLeakage:
    """Compare the three policies at the RAD/MBT rate ``mu = 2^(1/tau) - 1``,
    whose leakage ``ln(1 + mu)`` equals the DAD limit ``ln 2 / tau``."""
    if tau < 1:
        raise OutOfRange("tau")
    mu = 2.0 ** (1.0 / tau) - 1.0
    a_star, mbt_age = optimize_alpha(lam, mu)
    return MatchedLeakage(lam, tau, mu, math.log(2.0) / tau, aoi_dad(lam, tau).age_slots,
                          aoi_rad(lam, mu).age_slots, a_star, mbt_age)


def _stepped(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(np.linspace(lo, hi, n + 1), 10)


def fig4_epsilon(lam: float) -> float:
    return 0.024 if lam == 0.5 else 0.01


def _segment(eff: float) -> str:
    if eff <= 0.1:
        return "blue"
    if eff <= 0.5:
        return "orange"
    return "green"


def fig_dataset(figure: str, overrides: Optional[Dict] = None) -> List[TradeoffPoint]:
    """Every point behind one of the published trade-off figures.

    ``overrides`` may replace ``lambdas`` (list), ``tau_max`` (int) or
    ``points`` (number of points on continuous MBT grids).
    """
    ov = dict(overrides or {})
    tau_max = int(ov.get("tau_max", 39))
    taus = list(range(1, tau_max + 1))
    rad_mu = _stepped(0.05, 1.0, 0.01)
    out: List[TradeoffPoint] = []

    def tag(points, label):
        for p in points:
            p.note = (p.note + ";" if p.note else "") + label
        return points

    if figure == "fig2":
        lam = float(ov.get("lambdas", [0.5])[0])
        mbt_mu = np.round(np.linspace(lam + fig4_epsilon(lam), 1.0, int(ov.get("points", 120))), 10)
        out += tag(pareto_sweep(SweepSpec(lam, PolicyKind.MBT, mbt_mu)), "fig2")
        out += tag(pareto_sweep(SweepSpec(lam, PolicyKind.RAD, rad_mu)), "fig2")
        out += tag(pareto_sweep(SweepSpec(lam, PolicyKind.DAD, taus)), "fig2")
    elif figure == "fig3":
        for lam in ov.get("lambdas", [0.1, 0.5, 0.9]):
            out += tag(pareto_sweep(SweepSpec(float(lam), PolicyKind.RAD, rad_mu)), "fig3")
            out += tag(pareto_sweep(SweepSpec(float(lam), PolicyKind.DAD, taus)), "fig3")
    elif figure == "fig4":
        lams = [float(v) for v in ov.get("lambdas", [0.1, 0.5, 0.9])]
        npts = int(ov.get("points", 100))
        for lam in lams:
            grid = np.round(np.linspace(lam + fig4_epsilon(lam), 1.0, npts), 10)
            out += tag(pareto_sweep(SweepSpec(lam, PolicyKind.MBT, grid)), "fig4 alpha=1")
        env_mu = _stepped(min(lams), 1.0, 0.01)
        for lam in lams:
            pts = pareto_sweep(SweepSpec(lam, PolicyKind.MBT, env_mu, optimize_alpha=True))
            for p in pts:
                p.note = f"fig4 envelope segment={_segment(p.effective_rate)}"
            out += pts
    else:
        raise OutOfRange("figure", f"unknown figure {figure!r}")
    return out


def envelope_segments(lam: float = 0.9, step: float = 0.001) -> Dict[str, Tuple[float, float]]:
    """Range of optimal effective rates ``alpha* lam`` per colour band, over ``mu in [0.1, 1]``."""
    bands: Dict[str, List[float]] = {}
    for mu in _stepped(0.1, 1.0, step):
        a, _ = optimize_alpha(lam, float(mu))
        eff = a * lam
        bands.setdefault(_segment(eff), []).append(eff)
    return {k: (min(v), max(v)) for k, v in bands.items()}
