"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line; the lines are also collected and
repeated in the pytest terminal summary. Run on its own with
``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""

import io
import time
from contextlib import redirect_stdout

import pytest

from aoileak import checks
from aoileak.cli import main
from aoileak.core import PolicySpec, RngStream
from aoileak.leakage import max_conditional
from aoileak.sim import SimConfig, decomposition_check

RESULTS = []


def report(number, title, passed, detail=""):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    return passed


def _suite(fn, *args):
    start = time.perf_counter()
    res = fn(*args)
    return res, time.perf_counter() - start


def _failures(res):
    return [c.line() for c in res if not c.passed]


def test_criterion_01_oracle_equals_closed_form():
    res, secs = _suite(checks.suite_leakage_closed_form)
    ok = not _failures(res) and secs < 60
    assert report(1, "oracle leakage = n ln(1+mu), MBT alpha=1 and RAD, n<=8", ok,
                  f"{len(res)} policies, {secs:.1f}s"), _failures(res)


def test_criterion_02_pointwise_maximum():
    res, _ = _suite(checks.suite_pointwise_max)
    # spot-check the lexicographic witness on a few outputs too
    pol = PolicySpec.rad(0.5)
    spot = all(max_conditional(pol, y) == (pytest.approx(0.5 ** sum(y), abs=1e-9), y)
               for y in [(0, 1, 1), (1, 0, 1), (1, 1, 1)])
    ok = not _failures(res) and spot
    assert report(2, "max_x P(y|x) = mu^|y| attained at x = y", ok, f"{len(res)} policies"), _failures(res)


def test_criterion_03_dad_exact():
    res, secs = _suite(checks.suite_dad_leakage)
    res2, secs2 = _suite(checks.suite_dad_maxima)
    ok = not _failures(res + res2)
    assert report(3, "DAD leakage = floor(n/tau) ln 2, maxima exactly 1, support 2^floor(n/tau)", ok,
                  f"tau 1..4, n 1..12, {secs + secs2:.1f}s"), _failures(res + res2)


def test_criterion_04_sampling_policy_ages():
    res, secs = _suite(checks.suite_sampling_age)
    ok = not _failures(res) and secs < 120 and len(res) == 21
    assert report(4, "simulated DAD/RAD age vs closed form", ok, f"{len(res)} points, {secs:.1f}s"), _failures(res)


def test_criterion_05_fcfs_age():
    res, _ = _suite(checks.suite_geoage)
    ok = not _failures(res) and len(res) == 8
    assert report(5, "simulated MBT age and system-time estimator vs closed form", ok), _failures(res)


def test_criterion_06_common_point():
    res, _ = _suite(checks.suite_common)
    ok = not _failures(res)
    assert report(6, "unit service rate at lambda=0.5 gives age 3 for all policies", ok), _failures(res)


def test_criterion_07_renewal_age():
    res, _ = _suite(checks.suite_renewal)
    ok = not _failures(res)
    assert report(7, "renewal age histograms within TV 0.01; geometric E[Z] = 1/lambda", ok), _failures(res)


def test_criterion_08_decomposition():
    reps = [decomposition_check(SimConfig(pol, 10 ** 6, 10 ** 4, RngStream(0, 400 + i)))
            for i, pol in enumerate(checks.DECOMPOSITION_POINTS)]
    ok = len(reps) == 6 and all(r.residual < 3 * r.combined_se for r in reps)
    worst = max(r.residual / r.combined_se for r in reps)
    assert report(8, "monitor age = input age + sampling age", ok, f"max residual/se={worst:.2f}")


def test_criterion_09_matched_leakage():
    res, _ = _suite(checks.suite_matched)
    ok = not _failures(res) and len(res) == 9
    assert report(9, "DAD age < RAD age at matched leakage, lambda=0.5, tau 2..10", ok), _failures(res)


def test_criterion_10_alpha_optimisation():
    res, _ = _suite(checks.suite_alpha)
    ok = not _failures(res)
    assert report(10, "golden-section alpha matches grid search; rescues lambda=0.9 mu=0.3", ok), _failures(res)


def _capture(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_criterion_11_cli_determinism(tmp_path):
    commands = [
        ["analytic", "--policy", "mbt", "--lambda", "0.5", "--alpha", "0.8", "--mu", "0.7"],
        ["simulate", "--policy", "dad", "--lambda", "0.5", "--tau", "3", "--slots", "200000", "--seed", "7"],
        ["simulate", "--policy", "mbt", "--lambda", "0.6", "--mu", "0.9", "--slots", "200000", "--seed", "3"],
        ["simulate", "--policy", "rad", "--lambda", "0.2", "--mu", "0.4", "--slots", "200000"],
        ["leakage", "--policy", "rad", "--mu", "0.5", "--n", "6", "--both"],
        ["leakage", "--policy", "mbt", "--alpha", "0.5", "--mu", "0.5", "--n", "4", "--oracle"],
        ["verify", "--suite", "alpha"],
    ]
    ok = True
    for argv in commands:
        a, b = _capture(argv), _capture(argv)
        ok &= a == b and a[0] == 0 and bool(a[1])
    for fig in ("fig2", "fig3", "fig4"):
        paths = [tmp_path / f"{fig}-{i}.csv" for i in range(2)]
        for p in paths:
            _capture(["pareto", "--figure", fig, "--out", str(p)])
        ok &= paths[0].read_bytes() == paths[1].read_bytes()
    paths = [tmp_path / f"sim-{i}.csv" for i in range(2)]
    for p in paths:
        _capture(["pareto", "--policy", "rad", "--lambda", "0.5", "--mu-range", "0.2:1:0.2", "--simulate",
                  "--slots", "20000", "--warmup", "1000", "--seed", "9", "--out", str(p)])
    ok &= paths[0].read_bytes() == paths[1].read_bytes()
    assert report(11, "repeated CLI commands give byte-identical output", ok,
                  f"{len(commands) + 4} commands run twice")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
