import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoileak.core import PolicySpec, RngStream
from aoileak.leakage import conditional_pmf
from aoileak.policies import (DadState, MbtState, RadState, dad_image, dad_step, mbt_step,
                              rad_step, run_policy)

bits = st.lists(st.integers(0, 1), min_size=1, max_size=40)
probs = st.floats(0.05, 1.0)


def test_mbt_step_forced_relay():
    state, out = mbt_step(MbtState(), 4, 0.0, 0.0, 1.0, 0.5)
    assert state.queue == () and out.sent == 1 and out.delivered_timestamp == 4


def test_mbt_step_nothing_to_serve():
    state, out = mbt_step(MbtState(), None, 0.0, 0.0, 1.0, 0.5)
    assert state.queue == () and out.sent == 0 and out.delivered_timestamp is None


def test_mbt_step_pops_head():
    state, out = mbt_step(MbtState((2, 3)), None, 0.9, 0.1, 1.0, 0.5)
    assert state.queue == (3,) and out.delivered_timestamp == 2


def test_dad_examples():
    assert run_policy(PolicySpec.dad(2), [1, 0, 0, 0]).y.tolist() == [0, 1, 0, 0]
    run = run_policy(PolicySpec.dad(2), [0, 0, 1, 1])
    assert run.y.tolist() == [0, 0, 0, 1]
    # slot 4 arrival carries timestamp 3 and reaches the monitor at slot 5
    assert run.deliveries == [(5, 3)]


def test_dad_step_cycle():
    s, out = dad_step(DadState(), 7, 3)
    assert out.sent == 0 and s == DadState(7, 2)
    s, out = dad_step(DadState(7, 3), None, 3)
    assert out.delivered_timestamp == 7 and s == DadState(None, 1)


def test_rad_step_examples():
    assert rad_step(RadState(), None, 0.0, 0.5)[1].sent == 0
    s, out = rad_step(RadState(5), 7, 0.1, 0.5)
    assert out.delivered_timestamp == 7 and s.stored is None
    s, out = rad_step(RadState(5), None, 0.9, 0.5)
    assert out.sent == 0 and s.stored == 5


def test_run_policy_examples():
    assert run_policy(PolicySpec.rad(1.0), [1, 0, 1]).y.tolist() == [1, 0, 1]
    assert run_policy(PolicySpec.dad(3), [1] * 7).y.tolist() == [0, 0, 1, 0, 0, 1, 0]
    run = run_policy(PolicySpec.mbt(0.5), [1, 0], admit_coins=[0.0], serve_coins=[0.9, 0.1])
    assert run.y.tolist() == [0, 1]
    assert conditional_pmf(PolicySpec.mbt(0.5), (1, 0), (0, 1)) == pytest.approx(0.25, abs=1e-12)


@given(bits, probs, probs, st.integers(0, 2 ** 32 - 1))
def test_mbt_fcfs_and_conservation(x, alpha, mu, seed):
    run = run_policy(PolicySpec.mbt(mu, alpha=alpha), x, RngStream(seed))
    ts = [t for _, t in run.deliveries]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    arrivals_so_far = np.cumsum(x)
    departures_so_far = np.cumsum(run.y)
    assert (departures_so_far <= arrivals_so_far).all()
    for recv, t in run.deliveries:
        assert recv - t >= 2


@given(bits, probs, st.integers(0, 2 ** 32 - 1))
def test_rad_freshest_only(x, mu, seed):
    run = run_policy(PolicySpec.rad(mu), x, RngStream(seed))
    ts = [t for _, t in run.deliveries]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    for recv, t in run.deliveries:
        sent_slot = recv - 1
        freshest = max(i for i in range(1, sent_slot + 1) if x[i - 1]) - 1
        assert t == freshest


@given(bits, st.integers(1, 6))
def test_dad_support_shape_and_determinism(x, tau):
    y = run_policy(PolicySpec.dad(tau), x).y
    assert np.array_equal(y, run_policy(PolicySpec.dad(tau), x, RngStream(99)).y)
    assert np.array_equal(y, dad_image(x, tau))
    for t in range(1, len(x) + 1):
        if t % tau:
            assert y[t - 1] == 0
        else:
            assert y[t - 1] == int(any(x[t - tau:t]))


@settings(max_examples=50)
@given(bits, st.integers(0, 2 ** 32 - 1))
def test_unit_service_policies_coincide(x, seed):
    rng = RngStream(seed)
    y_mbt = run_policy(PolicySpec.mbt(1.0, alpha=1.0), x, rng).y
    y_dad = run_policy(PolicySpec.dad(1), x).y
    y_rad = run_policy(PolicySpec.rad(1.0), x, rng).y
    assert y_mbt.tolist() == y_dad.tolist() == y_rad.tolist() == list(x)
