import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoileak.core import PolicyKind, PolicySpec, RngStream
from aoileak.sim import SimConfig
from aoileak.tradeoff import (SweepSpec, envelope_segments, fig_dataset, grid_search_alpha,
                              matched_leakage_comparison, optimize_alpha, pareto_sweep)


def test_sweep_examples():
    (p,) = pareto_sweep(SweepSpec(0.5, PolicyKind.RAD, [0.5]))
    assert p.leakage_rate_nats == pytest.approx(math.log(1.5)) and p.age_slots == 4.0
    (p,) = pareto_sweep(SweepSpec(0.1, PolicyKind.DAD, [39]))
    assert p.leakage_rate_nats == pytest.approx(math.log(2) / 39) and p.age_slots == 30.0
    (p,) = pareto_sweep(SweepSpec(0.5, PolicyKind.MBT, [0.5]))
    assert p.unstable and p.note == "unstable"


def test_sweep_with_overlay():
    pts = pareto_sweep(SweepSpec(0.5, PolicyKind.DAD, [2], sim_overlay=SimConfig(
        PolicySpec.dad(2, lam=0.5), 10 ** 5, 10 ** 3, RngStream(3))))
    assert [p.source for p in pts] == ["analytic", "simulated"]
    assert abs(pts[1].age_slots - pts[0].age_slots) < 5 * pts[1].std_error + 0.01


def test_matched_examples():
    m = matched_leakage_comparison(0.5, 2)
    assert m.mu == pytest.approx(math.sqrt(2) - 1)
    assert m.dad_age == 3.5
    assert m.rad_age == pytest.approx(2 + 1 / (math.sqrt(2) - 1))
    m = matched_leakage_comparison(0.9, 4)
    assert m.dad_age == pytest.approx(1 / 0.9 + 2.5)
    assert m.rad_age == pytest.approx(1 / 0.9 + 1 / (2 ** 0.25 - 1))
    assert m.rad_age == pytest.approx(6.3963, abs=1e-4)


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
def test_dad_beats_rad_at_matched_leakage(lam):
    for tau in range(2, 40):
        m = matched_leakage_comparison(lam, tau)
        assert m.dad_age < m.rad_age
    m = matched_leakage_comparison(lam, 1)
    assert m.dad_age == pytest.approx(m.rad_age)


def test_sweeps_are_monotone():
    rad = pareto_sweep(SweepSpec(0.5, PolicyKind.RAD, np.linspace(0.05, 1, 40)))
    assert all(a.leakage_rate_nats < b.leakage_rate_nats and a.age_slots > b.age_slots
               for a, b in zip(rad, rad[1:]))
    dad = pareto_sweep(SweepSpec(0.5, PolicyKind.DAD, range(1, 40)))
    assert all(a.leakage_rate_nats > b.leakage_rate_nats and a.age_slots < b.age_slots
               for a, b in zip(dad, dad[1:]))


def test_unit_service_common_point():
    for kind, v in ((PolicyKind.MBT, 1.0), (PolicyKind.RAD, 1.0), (PolicyKind.DAD, 1)):
        (p,) = pareto_sweep(SweepSpec(0.5, kind, [v]))
        assert p.leakage_rate_nats == pytest.approx(math.log(2)) and p.age_slots == 3.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_golden_section_agrees_with_grid(lam, mu):
    a, f = optimize_alpha(lam, mu)
    ga, gf = grid_search_alpha(lam, mu)
    assert a * lam < mu
    assert f <= gf + 1e-9
    assert abs(f - gf) < 1e-3


def test_alpha_rescues_overloaded_queue():
    a, f = optimize_alpha(0.9, 0.3)
    assert math.isfinite(f) and a * 0.9 < 0.3
    # the optimum never beats the envelope of any fixed alpha
    for alpha in np.linspace(0.01, 0.33, 30):
        from aoileak.age import aoi_mbt
        assert f <= aoi_mbt(0.9, float(alpha), 0.3).age_slots + 1e-12


def test_fig3_rows():
    pts = fig_dataset("fig3")
    hit = [p for p in pts if p.policy.kind is PolicyKind.RAD and p.policy.lam == 0.1
           and abs(p.policy.mu - 0.5) < 1e-12]
    assert len(hit) == 1
    assert hit[0].leakage_rate_nats == pytest.approx(math.log(1.5)) and hit[0].age_slots == 12.0


def test_fig_row_counts_and_envelope():
    assert len(fig_dataset("fig2")) == 255
    assert len(fig_dataset("fig3")) == 405
    pts = fig_dataset("fig4")
    env = [p for p in pts if "envelope" in p.note]
    assert env and all(p.alpha_star is not None for p in env)
    with pytest.raises(Exception):
        fig_dataset("fig9")


def test_envelope_bands():
    bands = envelope_segments(0.9, step=0.01)
    assert set(bands) == {"blue", "orange", "green"}
    assert bands["blue"][0] == pytest.approx(0.054, abs=1e-3)
    assert bands["orange"][1] <= 0.5 < bands["green"][0]
