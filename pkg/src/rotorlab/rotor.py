"""2D rotor-router aggregation.

Bugs start at the source; a bug entering an occupied site rotates the rotor
one quarter turn counterclockwise (E -> N -> W -> S) and moves where it now
points; the first bug to reach a site settles there and leaves the rotor
pointing East.

A site's whole history is one integer: its total departure count t (-1 while
vacant).  Because every site's departures follow the same fixed cycle from
East, departure k goes in direction k mod 4 of (E, N, W, S), the rotor points
at direction t mod 4, and the per-direction departure splits are recovered
exactly from t.  The test suite validates this against a four-plane recording.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CardUnderflow, StepCapExceeded
from .lattice import (MASK64, DX, DY, Coord2, Direction, SeededRandom,
                      dist2, safe_radius)

BUG_STEP_CAP = 10 ** 9
SWARM_CAP_PER_BUG = 10 ** 5  # 1e9 total hops per 1e4 bugs

# Supported bug count for the int32 per-site departure counters; the busiest
# site sees ~(2/pi) n ln(sqrt n) departures, far below 2**31 at this bound.
MAX_BUGS = 50_000_000


def departures_from_total(t: int) -> tuple[int, int, int, int]:
    """Exact per-direction (E, N, W, S) split of t cyclic departures."""
    if t <= 0:
        return (0, 0, 0, 0)
    return (t // 4, (t + 3) // 4, (t + 2) // 4, (t + 1) // 4)


@dataclass(frozen=True)
class RotorSite:
    occupied: bool
    rotor: Direction
    departures: tuple[int, int, int, int]  # E, N, W, S


@dataclass(frozen=True)
class BlobStats:
    n: int
    site_count: int
    max_occupied_dist2: int
    min_vacant_dist2: int
    effective_radius: float
    delta_in: float
    delta_out: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "site_count": self.site_count,
            "max_occupied_dist2": self.max_occupied_dist2,
            "min_vacant_dist2": self.min_vacant_dist2,
            "effective_radius": self.effective_radius,
            "delta_in": self.delta_in,
            "delta_out": self.delta_out,
        }


class RotorBlob:
    """Occupancy, rotors and departure counts of an aggregation run."""

    def __init__(self, half: int):
        self.half = half
        side = 2 * half + 1
        self._cnt = np.full((side, side), -1, np.int32)
        self.n = 0
        self.source: Coord2 = (0, 0)
        self.total_hops = 0
        self.max_bug_hops = 0

    # -- raw access -------------------------------------------------------

    def counts(self) -> np.ndarray:
        """Departure-count grid; element (y+half, x+half) is site (x, y)."""
        return self._cnt

    def _at(self, c: Coord2) -> int:
        x, y = c
        h = self.half
        if -h <= x <= h and -h <= y <= h:
            return int(self._cnt[y + h, x + h])
        return -1

    # -- site views -------------------------------------------------------

    def occupied(self, c: Coord2) -> bool:
        return self._at(c) >= 0

    def rotor(self, c: Coord2) -> Direction | None:
        t = self._at(c)
        return Direction(t & 3) if t >= 0 else None

    def departures(self, c: Coord2) -> tuple[int, int, int, int]:
        return departures_from_total(self._at(c))

    def site(self, c: Coord2) -> RotorSite:
        t = self._at(c)
        if t < 0:
            return RotorSite(False, Direction.EAST, (0, 0, 0, 0))
        return RotorSite(True, Direction(t & 3), departures_from_total(t))

    def occupied_mask(self) -> np.ndarray:
        return self._cnt >= 0

    def occupied_sites(self) -> set[Coord2]:
        ys, xs = np.nonzero(self.occupied_mask())
        h = self.half
        return {(int(x) - h, int(y) - h) for x, y in zip(xs, ys)}

    def _grow(self, new_half: int) -> None:
        side = 2 * new_half + 1
        a = np.full((side, side), -1, np.int32)
        off = new_half - self.half
        a[off:off + 2 * self.half + 1, off:off + 2 * self.half + 1] = self._cnt
        self._cnt = a
        self.half = new_half


def fresh_blob(capacity: int = 0) -> RotorBlob:
    return RotorBlob(safe_radius(capacity))


def add_bug(blob: RotorBlob, step_cap: int = BUG_STEP_CAP) -> Coord2:
    """Walk one bug from the source until it settles; returns its home.

    Pure-Python reference path; run() drives the compiled kernel through the
    same count representation and is tested for full-state equality.
    """
    cnt = blob._cnt
    h = blob.half
    x, y = blob.source
    hops = 0
    while True:
        c = int(cnt[y + h, x + h])
        if c < 0:
            cnt[y + h, x + h] = 0
            break
        c += 1
        cnt[y + h, x + h] = c
        x += DX[c & 3]
        y += DY[c & 3]
        hops += 1
        if hops >= step_cap:
            raise StepCapExceeded(f"bug exceeded {step_cap} hops")
    blob.n += 1
    blob.total_hops += hops
    blob.max_bug_hops = max(blob.max_bug_hops, hops)
    if max(abs(x), abs(y)) >= blob.half:
        blob._grow(2 * blob.half)
    return (x, y)


def _check_bugs(n: int) -> None:
    if n < 0:
        raise ValueError("bug count must be nonnegative")
    if n > MAX_BUGS:
        raise ValueError(f"bug count above supported maximum {MAX_BUGS}")


def _run_counts(n: int) -> tuple[np.ndarray, int, int, int]:
    half = safe_radius(n)
    while True:
        flat, hops, max_hops, status = _kernels.rotor_aggregate(
            n, half, BUG_STEP_CAP)
        if status == 1:
            raise StepCapExceeded(f"a bug exceeded {BUG_STEP_CAP} hops")
        if status == 2:
            half *= 2
            continue
        side = 2 * half + 1
        return flat.reshape(side, side), int(hops), int(max_hops), half


def run(n: int) -> tuple[RotorBlob, BlobStats]:
    """Aggregate n bugs sequentially from a fresh grid; exhaustive stats."""
    _check_bugs(n)
    cnt, hops, max_hops, half = _run_counts(n)
    blob = RotorBlob.__new__(RotorBlob)
    blob.half = half
    blob._cnt = cnt
    blob.n = n
    blob.source = (0, 0)
    blob.total_hops = hops
    blob.max_bug_hops = max_hops
    return blob, stats(blob)


def run_swarm(n: int, seed: int) -> RotorBlob:
    """Drop n bugs on the source at once; move one random bug per event.

    The mover is picked uniformly among unsettled bugs via the seeded
    generator.  The abelian property makes the final state equal to run(n)'s,
    rotors and departure counts included.
    """
    _check_bugs(n)
    half = safe_radius(n)
    while True:
        flat, hops, status = _kernels.rotor_swarm(
            n, half, np.uint64(seed & MASK64), max(1, n) * SWARM_CAP_PER_BUG)
        if status == 1:
            raise StepCapExceeded("swarm exceeded its total hop budget")
        if status == 2:
            half *= 2
            continue
        break
    blob = RotorBlob.__new__(RotorBlob)
    blob.half = half
    side = 2 * half + 1
    blob._cnt = flat.reshape(side, side)
    blob.n = n
    blob.source = (0, 0)
    blob.total_hops = int(hops)
    blob.max_bug_hops = 0
    return blob


def same_state(a: RotorBlob, b: RotorBlob) -> bool:
    """Full-state equality: occupancy, rotors and departure counts."""
    ha, hb = a.half, b.half
    if ha > hb:
        a, b = b, a
        ha, hb = hb, ha
    off = hb - ha
    inner = b._cnt[off:off + 2 * ha + 1, off:off + 2 * ha + 1]
    if not np.array_equal(a._cnt, inner):
        return False
    outer = b._cnt.copy()
    outer[off:off + 2 * ha + 1, off:off + 2 * ha + 1] = -1
    return not (outer >= 0).any()


class CardStacks:
    """Per-site, per-direction departure records ("I went North" cards)."""

    def __init__(self, stacks: dict[Coord2, tuple[int, int, int, int]] | None = None):
        self.stacks: dict[Coord2, tuple[int, int, int, int]] = {}
        if stacks:
            for c, v in stacks.items():
                t = tuple(int(k) for k in v)
                if any(k < 0 for k in t):
                    raise ValueError("negative card count")
                if any(t):
                    self.stacks[c] = t  # type: ignore[assignment]

    def total(self) -> int:
        return sum(sum(v) for v in self.stacks.values())

    def get(self, c: Coord2) -> tuple[int, int, int, int]:
        return self.stacks.get(c, (0, 0, 0, 0))

    def to_text(self) -> str:
        """One line per nonzero site: "x y nN nW nS nE", ordered by y then x."""
        lines = []
        for (x, y) in sorted(self.stacks, key=lambda c: (c[1], c[0])):
            e, n, w, s = self.stacks[(x, y)]
            lines.append(f"{x} {y} {n} {w} {s} {e}\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "CardStacks":
        stacks: dict[Coord2, tuple[int, int, int, int]] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            x, y, n, w, s, e = (int(f) for f in line.split())
            stacks[(x, y)] = (e, n, w, s)
        return cls(stacks)


def cards_from_blob(blob: RotorBlob) -> CardStacks:
    stacks: dict[Coord2, tuple[int, int, int, int]] = {}
    h = blob.half
    ys, xs = np.nonzero(blob._cnt > 0)
    for x, y in zip(xs, ys):
        t = int(blob._cnt[y, x])
        stacks[(int(x) - h, int(y) - h)] = departures_from_total(t)
    return CardStacks(stacks)


def record_cards(n: int) -> CardStacks:
    """Run n bugs and keep only the cards they dropped."""
    blob, _ = run(n)
    return cards_from_blob(blob)


@dataclass
class ReplayResult:
    n: int
    seed: int
    occupied: set[Coord2]
    leftover: CardStacks
    consumed: int


def replay_with_cards(cards: CardStacks, n: int, seed: int) -> ReplayResult:
    """Re-run n bugs with no rotors, eating any random card to move on.

    Each move consumes one card chosen uniformly among those remaining at the
    occupied site the bug stands on.  Occupancy must reproduce the recorded
    run's; rotors are meaningless here, so only occupancy is returned.
    """
    remaining = {c: list(v) for c, v in cards.stacks.items()}
    occupied: set[Coord2] = set()
    rng = SeededRandom(seed)
    consumed = 0
    for _ in range(n):
        pos = (0, 0)
        while pos in occupied:
            stack = remaining.get(pos)
            left = sum(stack) if stack else 0
            if left == 0:
                raise CardUnderflow(f"no card left at {pos}")
            pick = rng.next_below(left)
            acc = 0
            for d in range(4):
                acc += stack[d]
                if pick < acc:
                    stack[d] -= 1
                    consumed += 1
                    pos = (pos[0] + DX[d], pos[1] + DY[d])
                    break
        occupied.add(pos)
    leftover = CardStacks({c: tuple(v) for c, v in remaining.items()})
    return ReplayResult(n, seed, occupied, leftover, consumed)


def leftover_loop_balance(cards: CardStacks, leftover: CardStacks) -> list[Coord2]:
    """Sites where leftover out-cards != leftover in-cards (must be empty)."""
    out_at = {c: sum(v) for c, v in leftover.stacks.items()}
    in_at: dict[Coord2, int] = {}
    for (x, y), v in leftover.stacks.items():
        for d in range(4):
            if v[d]:
                t = (x + DX[d], y + DY[d])
                in_at[t] = in_at.get(t, 0) + v[d]
    bad = []
    for c in set(out_at) | set(in_at):
        if out_at.get(c, 0) != in_at.get(c, 0):
            bad.append(c)
    return sorted(bad)


def flow_check(blob: RotorBlob) -> list[dict]:
    """Exact conservation and tent-equation checks over the whole grid.

    For every site: arrivals + n*[source] = departures + occupied.  For every
    non-source site: |4*(d + occupied) - sum of neighbor departures| <= 12
    (the tent residual, in quarter units).
    Returns a list of violation records; empty means all good.
    """
    cnt = blob._cnt.astype(np.int64)
    occ = (cnt >= 0).astype(np.int64)
    d = np.maximum(cnt, 0)
    e = d // 4
    n_ = (d + 3) // 4
    w = (d + 2) // 4
    s = (d + 1) // 4

    arr = np.zeros_like(d)
    # a site's arrivals come from its west neighbor's E cards, east neighbor's
    # W cards, south neighbor's N cards, north neighbor's S cards
    arr[:, 1:] += e[:, :-1]
    arr[:, :-1] += w[:, 1:]
    arr[1:, :] += n_[:-1, :]
    arr[:-1, :] += s[1:, :]

    h = blob.half
    inject = np.zeros_like(d)
    inject[h, h] = blob.n

    nbr_sum = np.zeros_like(d)
    nbr_sum[:, 1:] += d[:, :-1]
    nbr_sum[:, :-1] += d[:, 1:]
    nbr_sum[1:, :] += d[:-1, :]
    nbr_sum[:-1, :] += d[1:, :]

    violations: list[dict] = []
    flow_bad = (arr + inject) != (d + occ)
    for y, x in zip(*np.nonzero(flow_bad)):
        violations.append({
            "site": (int(x) - h, int(y) - h), "kind": "flow",
            "arrivals": int(arr[y, x] + inject[y, x]),
            "departures_plus_occupied": int(d[y, x] + occ[y, x]),
        })
    tent = 4 * (d + occ) - nbr_sum
    tent[h, h] = 0  # source is exempt (held up by the injected bugs)
    tent_bad = np.abs(tent) > 12
    for y, x in zip(*np.nonzero(tent_bad)):
        violations.append({
            "site": (int(x) - h, int(y) - h), "kind": "tent",
            "residual_quarters": int(tent[y, x]),
        })
    return violations


def stats(blob: RotorBlob) -> BlobStats:
    """Exhaustive-scan statistics with exact integer radii."""
    occ = blob.occupied_mask()
    site_count = int(occ.sum())
    h = blob.half
    ax = np.arange(-h, h + 1, dtype=np.int64) ** 2
    d2 = ax[:, None] + ax[None, :]
    if site_count:
        max_occ = int(d2[occ].max())
    else:
        max_occ = 0
    min_vac = int(d2[~occ].min())
    r_eff = math.sqrt(site_count / math.pi)
    return BlobStats(
        n=blob.n,
        site_count=site_count,
        max_occupied_dist2=max_occ,
        min_vacant_dist2=min_vac,
        effective_radius=r_eff,
        delta_in=r_eff - math.sqrt(min_vac),
        delta_out=math.sqrt(max_occ) - r_eff,
    )
