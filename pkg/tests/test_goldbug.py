import math

import numpy as np
import pytest

from rotorlab import goldbug as gb
from rotorlab.errors import PreconditionViolated, StepCapExceeded
from rotorlab.zphi import PHI_PLUS, ZPhi, numeric_value


def oracle_run(n_bugs):
    """Independent flip-then-hop simulator: plain dict, no shared code.

    Returns (cups, trajectories, final arrow dict).
    """
    arrows = {}  # site -> 0 Outbound / 1 Inbound
    cups = []
    trajectories = []
    for _ in range(n_bugs):
        pos = 1
        traj = [1]
        while pos >= 1:
            arrows[pos] = 1 - arrows.get(pos, 0)
            pos = pos + 1 if arrows[pos] == 0 else pos - 2
            traj.append(pos)
        cups.append(pos)
        trajectories.append(traj)
    return cups, trajectories, arrows


def test_first_bugs_against_oracle():
    cups, trajs, arrows = oracle_run(50)
    s = gb.GoldbugSystem()
    for k in range(50):
        s.bug_pos = 1
        traj = [1]
        while s.bug_pos >= 1:
            gb.step_bug(s)
            traj.append(s.bug_pos)
        assert traj == trajs[k]
        cup = s.bug_pos
        s.bug_pos = None
        s.bugs_run += 1
        if cup == -1:
            s.cup_left += 1
        else:
            s.cup_right += 1
        assert cup == cups[k]
    for i in range(1, 30):
        assert int(s.arrow(i)) == arrows.get(i, 0)


def test_single_step_examples():
    s = gb.GoldbugSystem()
    s.bug_pos = 1
    gb.step_bug(s)  # Outbound arrow flips Inbound, bug bounces to -1
    assert s.arrow(1) == gb.ArrowState.INBOUND
    assert s.bug_pos == -1

    s2 = gb.GoldbugSystem()
    s2._flip(1)  # preset Inbound
    s2.bug_pos = 1
    gb.step_bug(s2)  # flips back Outbound, bug moves right
    assert s2.arrow(1) == gb.ArrowState.OUTBOUND
    assert s2.bug_pos == 2


def test_bug_trajectories():
    s = gb.GoldbugSystem()
    assert gb.run_bug(s) == -1   # bug 1
    assert gb.run_bug(s) == 0    # bug 2
    assert gb.run_bug(s) == -1   # bug 3
    s4 = gb.GoldbugSystem()
    for _ in range(3):
        gb.run_bug(s4)
    s4.bug_pos = 1
    traj = [1]
    while s4.bug_pos >= 1:
        gb.step_bug(s4)
        traj.append(s4.bug_pos)
    assert traj == [1, 2, 3, 1, -1]  # the fourth bug's ramble


def test_five_bug_cups():
    cups, _, _ = oracle_run(5)
    assert cups == [-1, 0, -1, -1, 0]
    assert gb.run_bugs(5) == (3, 2)


@pytest.mark.parametrize("n,want", [(5, (3, 2)), (8, (5, 3)), (13, (8, 5)),
                                    (117, (72, 45))])
def test_paper_splits(n, want):
    assert gb.run_bugs(n) == want


def test_117_arrow_pattern():
    s = gb.GoldbugSystem()
    gb.run_bugs(117, s)
    pattern = [int(s.arrow(i)) for i in range(1, 10)]
    # O I O I I I O I I: Inbound labels 2+5+8+13+34+55 = 117
    assert pattern == [0, 1, 0, 1, 1, 1, 0, 1, 1]
    assert s.max_inbound_site() == 9
    assert gb.fib_decode(s, 0) == 117
    assert gb.fib_decode(s, 1) == 72
    assert gb.fib_decode(s, 2) == 45


def test_system_value_examples():
    s = gb.GoldbugSystem()
    assert gb.system_value(s) == ZPhi(0, 0)
    s.bug_pos = 1
    assert gb.system_value(s) == ZPhi(1, 1)  # phi^2
    s.bug_pos = None
    s2 = gb.GoldbugSystem()
    gb.run_bug(s2)
    assert gb.system_value(s2) == ZPhi(0, 1)  # phi: net change phi^2 - 1


def test_exact_conservation_and_invariants():
    s = gb.GoldbugSystem()
    inv_phi = 1.0 / PHI_PLUS
    for k in range(1500):
        s.bug_pos = 1
        v = gb.system_value(s)
        while s.bug_pos >= 1:
            gb.step_bug(s)
            assert gb.system_value(s) == v  # exact, every hop
        cup = s.bug_pos
        s.bug_pos = None
        s.bugs_run += 1
        if cup == -1:
            s.cup_left += 1
        else:
            s.cup_right += 1
        a, b = s.cup_left, s.cup_right
        arrows_value = gb.system_value(s)
        # ledger identity: value = b + a*phi, exactly
        assert arrows_value == ZPhi(b, 0) + a * ZPhi(0, 1)
        assert gb.value_in_trap_interval(arrows_value)
        num = numeric_value(arrows_value, "minus")
        assert -1 - 1e-12 <= num <= 1 / PHI_PLUS + 1e-12
        if a >= 1:
            assert abs(b / a - inv_phi) < 1 / a
        assert gb.fib_decode(s, 0) == k + 1
        assert gb.fib_decode(s, 1) == a
        assert gb.fib_decode(s, 2) == b
        assert gb.digit_pattern_ok(s)


def test_fib_decode_preconditions():
    s = gb.GoldbugSystem()
    gb.run_bugs(10, s)
    with pytest.raises(ValueError):
        gb.fib_decode(s, 3)
    s.bug_pos = 1
    with pytest.raises(PreconditionViolated):
        gb.fib_decode(s, 0)


def test_run_bug_preconditions_and_cap():
    s = gb.GoldbugSystem()
    s.bug_pos = 1
    with pytest.raises(PreconditionViolated):
        gb.run_bug(s)
    s4 = gb.GoldbugSystem()
    for _ in range(3):
        gb.run_bug(s4)
    with pytest.raises(StepCapExceeded):
        gb.run_bug(s4, step_cap=2)  # the fourth bug needs 4 bounces


def oracle_ruin_probabilities(m=400):
    """Truncated linear system for the +1/-2 walk, solved directly."""
    a = np.zeros((m, m))
    rhs = np.zeros(m)
    for i in range(1, m + 1):
        a[i - 1, i - 1] = 2.0
        if i + 1 <= m:
            a[i - 1, i] = -1.0
        if i - 2 >= 1:
            a[i - 1, i - 3] = -1.0
        elif i - 2 == -1:
            rhs[i - 1] += 1.0
    return np.linalg.solve(a, rhs)


def test_analytic_ruin_probability():
    assert gb.analytic_ruin_probability(0) == 0.0
    assert gb.analytic_ruin_probability(-1) == 1.0
    assert gb.analytic_ruin_probability(1) == pytest.approx(1 / PHI_PLUS,
                                                            abs=1e-15)
    sol = oracle_ruin_probabilities()
    for i in range(1, 31):
        assert abs(gb.analytic_ruin_probability(i) - sol[i - 1]) < 1e-10
    with pytest.raises(ValueError):
        gb.analytic_ruin_probability(-2)


def test_monte_carlo_ruin():
    est, se = gb.monte_carlo_ruin(0, 100, seed=3)
    assert est == 0.0
    est, se = gb.monte_carlo_ruin(-1, 100, seed=3)
    assert est == 1.0
    est, se = gb.monte_carlo_ruin(1, 100_000, seed=1)
    assert abs(est - 1 / PHI_PLUS) < 3 * se
    est2, se2 = gb.monte_carlo_ruin(2, 100_000, seed=2)
    assert abs(est2 - gb.analytic_ruin_probability(2)) < 3 * se2
    # (1 - phi_minus^2) / phi_plus^2 = 0.23607; from 2 the first -2 hop is
    # absorbed at 0, so reaching -1 is much less likely than from 1
    assert gb.analytic_ruin_probability(2) == pytest.approx(0.23607, abs=1e-5)
    with pytest.raises(ValueError):
        gb.monte_carlo_ruin(1, 0, seed=0)


def test_termination_stays_cheap():
    s = gb.GoldbugSystem()
    worst = 0
    for _ in range(20_000):
        s.bug_pos = 1
        hops = 0
        while s.bug_pos >= 1:
            gb.step_bug(s)
            hops += 1
        worst = max(worst, hops)
        cup = s.bug_pos
        s.bug_pos = None
        s.bugs_run += 1
        if cup == -1:
            s.cup_left += 1
        else:
            s.cup_right += 1
    assert worst < 10 ** 6  # termination bound, far below the cap


def test_report_fields():
    s = gb.GoldbugSystem()
    gb.run_bugs(117, s)
    rep = gb.report(s)
    assert rep == {
        "n": 117, "cup_left": 72, "cup_right": 45,
        "value_phi_minus": pytest.approx(45 + 72 * (1 - math.sqrt(5)) / 2),
        "fib0": 117, "fib1": 72, "fib2": 45, "max_inbound_site": 9,
    }
