"""Cross-checks between the closed forms, the exact oracle and simulation.

Each suite returns a list of :class:`Check` records. The ``verify`` CLI
command and the acceptance tests both run these.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Dict, List

import numpy as np

from . import age as agemod
from .core import PolicySpec, RngStream, Unstable
from .leakage import (analytic_leakage_rate, dad_support_size, maximal_leakage_oracle,
                      verify_lemma1, verify_lemma2)
from .sim import (SimConfig, decomposition_check, empirical_renewal_age,
                  mbt_system_time_samples, simulate_aoi, total_variation)
from .tradeoff import grid_search_alpha, matched_leakage_comparison, optimize_alpha

LEAK_TOL = 1e-9
MU_GRID = (0.25, 0.5, 0.75, 1.0)
SLOTS = 10 ** 6
WARMUP = 10 ** 4


@dataclasses.dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} {self.detail}".rstrip()


def _memoryless_policies():
    for mu in MU_GRID:
        yield PolicySpec.mbt(mu, alpha=1.0)
        yield PolicySpec.rad(mu)


def suite_leakage_closed_form(max_n: int = 8) -> List[Check]:
    out = []
    for pol in _memoryless_policies():
        worst = 0.0
        for n in range(1, max_n + 1):
            rep = maximal_leakage_oracle(pol, n)
            worst = max(worst, abs(rep.leakage_nats - n * math.log1p(pol.mu)))
        out.append(Check(f"leakage-rate[{pol.label()}]", worst < LEAK_TOL, f"max|err|={worst:.3g}"))
    return out


def suite_pointwise_max(max_n: int = 8) -> List[Check]:
    out = []
    for pol in _memoryless_policies():
        bad = 0
        checked = 0
        for n in range(1, max_n + 1):
            rep = verify_lemma1(pol, n)
            bad += len(rep.counterexamples)
            checked += rep.checked
        out.append(Check(f"pointwise-max[{pol.label()}]", bad == 0, f"outputs={checked} violations={bad}"))
    return out


def suite_dad_maxima(max_n: int = 12) -> List[Check]:
    out = []
    for tau in (1, 2, 3, 4):
        pol = PolicySpec.dad(tau)
        bad = sum(len(verify_lemma2(pol, n).counterexamples) for n in range(1, max_n + 1))
        out.append(Check(f"dad-maxima[DAD tau={tau}]", bad == 0, f"violations={bad}"))
    return out


def suite_dad_leakage(max_n: int = 12) -> List[Check]:
    out = []
    for tau in (1, 2, 3, 4):
        pol = PolicySpec.dad(tau)
        ok = True
        for n in range(1, max_n + 1):
            rep = maximal_leakage_oracle(pol, n)
            k = n // tau
            exact_ones = all(p == 1.0 for p, _ in rep.per_output.values())
            expected = k * math.log(2.0)
            size_ok = rep.support_size == dad_support_size(n, tau) == 2 ** k
            rate_ok = abs(rep.leakage_rate_nats - analytic_leakage_rate(pol, n)) < LEAK_TOL
            ok &= exact_ones and size_ok and rate_ok and abs(rep.leakage_nats - expected) < LEAK_TOL
        out.append(Check(f"dad-leakage[DAD tau={tau}]", ok, f"n=1..{max_n}"))
    return out


def _within(sim: float, se: float, exact: float, rel: float = 0.01) -> bool:
    return abs(sim - exact) <= max(3.0 * se, rel * exact)


def suite_sampling_age(slots: int = SLOTS, warmup: int = WARMUP, seed: int = 0) -> List[Check]:
    out = []
    stream = 0
    for lam in (0.1, 0.5, 0.9):
        for tau in (1, 2, 3, 5):
            stream += 1
            exact = agemod.aoi_dad(lam, tau).age_slots
            est = simulate_aoi(SimConfig(PolicySpec.dad(tau, lam=lam), slots, warmup, RngStream(seed, stream)))
            out.append(Check(f"sampling-age[DAD lam={lam} tau={tau}]", _within(est.mean_age, est.std_error, exact),
                             f"sim={est.mean_age:.5f}+-{est.std_error:.2g} exact={exact:.5f}"))
        for mu in (0.25, 0.5, 1.0):
            stream += 1
            exact = agemod.aoi_rad(lam, mu).age_slots
            est = simulate_aoi(SimConfig(PolicySpec.rad(mu, lam=lam), slots, warmup, RngStream(seed, stream)))
            out.append(Check(f"sampling-age[RAD lam={lam} mu={mu}]", _within(est.mean_age, est.std_error, exact),
                             f"sim={est.mean_age:.5f}+-{est.std_error:.2g} exact={exact:.5f}"))
    return out


def suite_geoage(slots: int = SLOTS, warmup: int = WARMUP, seed: int = 0) -> List[Check]:
    out = []
    for i, mu in enumerate((0.6, 0.75, 0.9, 1.0)):
        cfg = SimConfig(PolicySpec.mbt(mu, alpha=1.0, lam=0.5), slots, warmup, RngStream(seed, 100 + i))
        exact = agemod.aoi_mbt(0.5, 1.0, mu).age_slots
        est = simulate_aoi(cfg)
        out.append(Check(f"geoage[MBT mu={mu}]", _within(est.mean_age, est.std_error, exact),
                         f"sim={est.mean_age:.5f}+-{est.std_error:.2g} exact={exact:.5f}"))
        st = agemod.aoi_from_system_times(mbt_system_time_samples(cfg))
        out.append(Check(f"geoage-system-times[MBT mu={mu}]", abs(st - exact) <= 3.0 * est.std_error,
                         f"estimator={st:.5f} exact={exact:.5f}"))
    return out


def suite_common(slots: int = SLOTS, warmup: int = WARMUP, seed: int = 0) -> List[Check]:
    lam = 0.5
    pols = [PolicySpec.mbt(1.0, alpha=1.0, lam=lam), PolicySpec.dad(1, lam=lam), PolicySpec.rad(1.0, lam=lam)]
    analytic = [agemod.aoi_mbt(lam, 1.0, 1.0).age_slots, agemod.aoi_dad(lam, 1).age_slots,
                agemod.aoi_rad(lam, 1.0).age_slots]
    out = [Check("common[analytic]", all(a == 3.0 for a in analytic), f"ages={analytic}")]
    for i, pol in enumerate(pols):
        est = simulate_aoi(SimConfig(pol, slots, warmup, RngStream(seed, 200 + i)))
        out.append(Check(f"common[sim {pol.label()}]", abs(est.mean_age - 3.0) <= 3.0 * est.std_error,
                         f"sim={est.mean_age:.5f}+-{est.std_error:.2g}"))
    return out


def suite_renewal(slots: int = SLOTS, warmup: int = WARMUP, seed: int = 0) -> List[Check]:
    out = []
    cases = [
        (PolicySpec.rad(0.5, lam=0.5), "server_input", agemod.InterArrivalModel.geometric(0.5)),
        (PolicySpec.dad(4, lam=0.5), "monitor_sampling", agemod.InterArrivalModel.deterministic(4)),
        (PolicySpec.rad(0.25, lam=0.5), "monitor_sampling", agemod.InterArrivalModel.geometric(0.25)),
        (PolicySpec.dad(3, lam=0.2), "server_input", agemod.InterArrivalModel.geometric(0.2)),
    ]
    for i, (pol, point, model) in enumerate(cases):
        hist = empirical_renewal_age(SimConfig(pol, slots, warmup, RngStream(seed, 300 + i)), point)
        tv = total_variation(hist, lambda z: agemod.renewal_age_pmf(model, z))
        out.append(Check(f"renewal[{pol.label()} {point}]", tv < 0.01, f"TV={tv:.4g}"))
    lams = np.round(np.arange(1, 21) * 0.05, 10)
    worst = max(abs(agemod.renewal_mean_age(agemod.InterArrivalModel.geometric(float(p))) * p - 1.0)
                for p in lams)
    out.append(Check("renewal[geometric mean age = 1/lambda]", worst < 1e-12,
                     f"20 values, max rel err={worst:.2g}"))
    return out


DECOMPOSITION_POINTS = (
    PolicySpec.dad(3, lam=0.5),
    PolicySpec.rad(0.9, lam=0.9),
    PolicySpec.dad(2, lam=0.9),
    PolicySpec.dad(5, lam=0.1),
    PolicySpec.rad(0.5, lam=0.5),
    PolicySpec.rad(0.25, lam=0.1),
)


def suite_decomposition(slots: int = SLOTS, warmup: int = WARMUP, seed: int = 0) -> List[Check]:
    out = []
    for i, pol in enumerate(DECOMPOSITION_POINTS):
        rep = decomposition_check(SimConfig(pol, slots, warmup, RngStream(seed, 400 + i)))
        out.append(Check(f"decomposition[{pol.label()} lam={pol.lam}]", rep.passed,
                         f"residual={rep.residual:.3g} 3se={3 * rep.combined_se:.3g}"))
    return out


def suite_matched() -> List[Check]:
    out = []
    for tau in range(2, 11):
        cmp_ = matched_leakage_comparison(0.5, tau)
        out.append(Check(f"matched[lam=0.5 tau={tau}]", cmp_.dad_age < cmp_.rad_age,
                         f"dad={cmp_.dad_age:.5f} rad={cmp_.rad_age:.5f}"))
    return out


def suite_alpha(seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        lam, mu = rng.uniform(0.05, 1.0, size=2)
        _, f_opt = optimize_alpha(float(lam), float(mu))
        _, f_grid = grid_search_alpha(float(lam), float(mu))
        worst = max(worst, abs(f_opt - f_grid))
    out = [Check("alpha[golden vs grid, 20 pairs]", worst < 1e-3, f"max|dage|={worst:.3g}")]
    a, f = optimize_alpha(0.9, 0.3)
    try:
        agemod.aoi_mbt(0.9, 1.0, 0.3)
        unit_infeasible = False
    except Unstable:
        unit_infeasible = True
    out.append(Check("alpha[lam=0.9 mu=0.3]", math.isfinite(f) and a * 0.9 < 0.3 and unit_infeasible,
                     f"alpha*={a:.6f} age={f:.6f}; alpha=1 unstable={unit_infeasible}"))
    return out


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "lemma1": suite_pointwise_max,
    "lemma2": suite_dad_maxima,
    "theorem1": suite_leakage_closed_form,
    "theorem2": suite_dad_leakage,
    "theorem3": suite_sampling_age,
    "geoage": suite_geoage,
    "common": suite_common,
    "renewal": suite_renewal,
    "decomposition": suite_decomposition,
    "matched": suite_matched,
    "alpha": suite_alpha,
}


def run_suite(name: str) -> List[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn()]
    return SUITES[name]()
