"""The 1D goldbug system.

A bug at site i flips the arrow there and hops where the new arrow points:
Outbound to i+1, Inbound to i-2.  Cups at 0 and -1 absorb bugs; all arrows
start Outbound.  The configuration read as digits (Outbound=0, Inbound=1,
the in-flight bug a phi digit) has an exactly conserved Z[phi] value, and
the arrows left after n bugs encode n, the left-cup count and the right-cup
count in base Fibonacci under label shifts 0, 1 and 2.
"""

from __future__ import annotations

import math
from enum import IntEnum

import numpy as np

from . import _kernels
from .errors import PreconditionViolated, StepCapExceeded
from .lattice import MASK64
from .zphi import (PHI_MINUS, PHI_PLUS, ZPHI_ZERO, ZPhi, fib_label,
                   numeric_value, phi_pow, sign_with_sqrt5)

STEP_CAP = 10 ** 8


class ArrowState(IntEnum):
    OUTBOUND = 0
    INBOUND = 1


class GoldbugSystem:
    """Arrow configuration, cup counters, and the optional in-flight bug."""

    def __init__(self):
        self._arrows: list[int] = []  # index i-1 holds site i; default Outbound
        self.cup_left = 0    # landings at -1
        self.cup_right = 0   # landings at 0
        self.bugs_run = 0
        self.bug_pos: int | None = None

    def arrow(self, i: int) -> ArrowState:
        if i < 1:
            raise ValueError("sites are indexed from 1")
        if i <= len(self._arrows):
            return ArrowState(self._arrows[i - 1])
        return ArrowState.OUTBOUND

    def _flip(self, i: int) -> ArrowState:
        if i > len(self._arrows):
            self._arrows.extend([0] * (i - len(self._arrows)))
        self._arrows[i - 1] ^= 1
        return ArrowState(self._arrows[i - 1])

    def inbound_sites(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self._arrows) if v]

    def max_inbound_site(self) -> int:
        for i in range(len(self._arrows), 0, -1):
            if self._arrows[i - 1]:
                return i
        return 0


def step_bug(s: GoldbugSystem) -> None:
    """One bounce: flip the arrow under the bug, hop where it now points."""
    i = s.bug_pos
    if i is None or i < 1:
        raise PreconditionViolated("no bug in flight at a site >= 1")
    new = s._flip(i)
    s.bug_pos = i + 1 if new == ArrowState.OUTBOUND else i - 2


def run_bug(s: GoldbugSystem, step_cap: int = STEP_CAP) -> int:
    """Inject a bug at 1, bounce it into a cup; returns -1 or 0."""
    if s.bug_pos is not None:
        raise PreconditionViolated("a bug is already in flight")
    s.bug_pos = 1
    steps = 0
    while s.bug_pos >= 1:
        step_bug(s)
        steps += 1
        if steps >= step_cap:
            raise StepCapExceeded(f"bug exceeded {step_cap} steps")
    cup = s.bug_pos
    s.bug_pos = None
    s.bugs_run += 1
    if cup == -1:
        s.cup_left += 1
    else:
        s.cup_right += 1
    return cup


def run_bugs(n: int, system: GoldbugSystem | None = None) -> tuple[int, int]:
    """Run n bugs (fresh system unless given); cumulative (left, right)."""
    s = system if system is not None else GoldbugSystem()
    for _ in range(n):
        run_bug(s)
    return s.cup_left, s.cup_right


def system_value(s: GoldbugSystem) -> ZPhi:
    """Exact configuration value: sum of phi^i over Inbound sites, plus the
    bug's phi^(pos+1) when one is in flight (cups count as positions 0, -1).
    """
    total = ZPHI_ZERO
    for i in s.inbound_sites():
        total = total + phi_pow(i)
    if s.bug_pos is not None:
        total = total + phi_pow(s.bug_pos + 1)
    return total


def value_in_trap_interval(z: ZPhi) -> bool:
    """Exact test that a + b*phi_minus lies in [-1, 1/phi_plus].

    Both ends use integer sign evaluations of p + q*sqrt5:
    value + 1 >= 0 and (sqrt5-1)/2 - value >= 0.
    """
    lo = sign_with_sqrt5(2 * z.a + z.b + 2, -z.b)
    hi = sign_with_sqrt5(-2 * z.a - z.b - 1, z.b + 1)
    return lo >= 0 and hi >= 0


def fib_decode(s: GoldbugSystem, shift: int) -> int:
    """Base-Fibonacci readout: sum of L(i - shift) over Inbound sites.

    Shift 0 decodes the number of bugs run, shift 1 the left-cup count,
    shift 2 the right-cup count.
    """
    if s.bug_pos is not None:
        raise PreconditionViolated("decode requires no bug in flight")
    if shift not in (0, 1, 2):
        raise ValueError("shift must be 0, 1 or 2")
    return sum(fib_label(i - shift) for i in s.inbound_sites())


def digit_pattern_ok(s: GoldbugSystem) -> bool:
    """No two consecutive Outbound arrows below the highest Inbound site."""
    top = s.max_inbound_site()
    run = 0
    for i in range(1, top + 1):
        run = run + 1 if s.arrow(i) == ArrowState.OUTBOUND else 0
        if run >= 2:
            return False
    return True


def report(s: GoldbugSystem) -> dict:
    return {
        "n": s.bugs_run,
        "cup_left": s.cup_left,
        "cup_right": s.cup_right,
        "value_phi_minus": numeric_value(system_value(s), "minus"),
        "fib0": fib_decode(s, 0),
        "fib1": fib_decode(s, 1),
        "fib2": fib_decode(s, 2),
        "max_inbound_site": s.max_inbound_site(),
    }


def analytic_ruin_probability(i: int) -> float:
    """P(absorption at -1) for the random +1/-2 walk started at i >= -1.

    Closed form (1 - phi_minus^i) / phi_plus^2; p(-1)=1, p(0)=0,
    p(1)=1/phi_plus.  Validated against a truncated linear system in tests.
    """
    if i < -1:
        raise ValueError("start must be >= -1")
    return (1.0 - PHI_MINUS ** i) / (PHI_PLUS * PHI_PLUS)


def monte_carlo_ruin(i: int, trials: int, seed: int,
                     step_cap: int = STEP_CAP) -> tuple[float, float]:
    """Seeded random-walk estimate of the -1 absorption probability.

    Returns (estimate, binomial standard error); each trial hops +1 or -2
    with one stream bit per step until absorption.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if i < -1:
        raise ValueError("start must be >= -1")
    left, status = _kernels.ruin_mc(i, trials, np.uint64(seed & MASK64),
                                    step_cap)
    if status == 1:
        raise StepCapExceeded(f"a trial exceeded {step_cap} steps")
    p = int(left) / trials
    return p, math.sqrt(p * (1.0 - p) / trials)
