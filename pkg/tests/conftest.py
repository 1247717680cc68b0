import itertools
from collections import defaultdict

from aoileak.core import PolicyKind
from aoileak.policies import run_policy


def coin_path_pmf(policy, x):
    """P(. | x) by enumerating every admission/service coin outcome through the state machines.

    Independent of the dynamic program in ``aoileak.leakage``: it only uses
    ``run_policy`` with coins forced to succeed (0.0) or fail (1.0).
    """
    n = len(x)
    out = defaultdict(float)
    if policy.kind is PolicyKind.DAD:
        out[tuple(run_policy(policy, x).y.tolist())] = 1.0
        return dict(out)
    n_arr = sum(x) if policy.kind is PolicyKind.MBT else 0
    for admit in itertools.product((True, False), repeat=n_arr):
        w_admit = 1.0
        for a in admit:
            w_admit *= policy.alpha if a else 1.0 - policy.alpha
        if w_admit == 0.0:
            continue
        for serve in itertools.product((True, False), repeat=n):
            run = run_policy(policy, x,
                             admit_coins=[0.0 if a else 1.0 for a in admit],
                             serve_coins=[0.0 if s else 1.0 for s in serve])
            # a service coin only matters in slots where something could be sent;
            # weight every slot so the total mass over all coin paths is 1
            w = w_admit
            for s in serve:
                w *= policy.mu if s else 1.0 - policy.mu
            out[tuple(run.y.tolist())] += w
    return dict(out)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
