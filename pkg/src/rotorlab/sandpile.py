"""Abelian sandpile stabilization at the origin, greedy and standard.

Greedy piles topple at five or more grains and keep one forever (a site
hoards its first grain); standard piles topple at four, possibly emptying
themselves.  Either way a topple sends one grain to each of the four
neighbors, and the final grid is independent of the toppling order.

The default stabilizer multi-topples sites off a BFS-like work queue (a site
with g grains fires floor((g - keep)/4) times at once); the random order
single-topples a uniformly random unstable site.  Multi-topple equivalence
with single topples is pinned by tests, as the abelian property promises.
"""

from __future__ import annotations

from collections import deque
from enum import Enum

import numpy as np

from . import _kernels, rotor
from .errors import PreconditionViolated, StepCapExceeded
from .lattice import MASK64, DX, DY, Coord2, SeededRandom, safe_radius

TOPPLE_CAP_FACTOR = 10 ** 4  # cap = factor * n topplings


class SandVariant(Enum):
    GREEDY = "greedy"
    STANDARD = "standard"

    @property
    def keep(self) -> int:
        return 1 if self is SandVariant.GREEDY else 0

    @property
    def threshold(self) -> int:
        return 4 + self.keep

    @property
    def stable_max(self) -> int:
        return 3 + self.keep


class SandGrid:
    """Grain counts, ever-occupied flags, variant and total for one pile."""

    def __init__(self, half: int, variant: SandVariant, n: int = 0):
        side = 2 * half + 1
        self.half = half
        self.variant = variant
        self.n = n
        self.heights = np.zeros((side, side), np.int64)
        self.ever = np.zeros((side, side), np.uint8)

    def grains(self, c: Coord2) -> int:
        x, y = c
        h = self.half
        if -h <= x <= h and -h <= y <= h:
            return int(self.heights[y + h, x + h])
        return 0

    def ever_occupied(self, c: Coord2) -> bool:
        x, y = c
        h = self.half
        if -h <= x <= h and -h <= y <= h:
            return bool(self.ever[y + h, x + h])
        return False

    def total_grains(self) -> int:
        return int(self.heights.sum())

    def ever_sites(self) -> set[Coord2]:
        ys, xs = np.nonzero(self.ever)
        h = self.half
        return {(int(x) - h, int(y) - h) for x, y in zip(xs, ys)}

    def is_stable(self) -> bool:
        return int(self.heights.max(initial=0)) < self.variant.threshold

    def dump_text(self) -> str:
        """Bounding-box header "x0 y0 width height", then rows of counts.

        Rows run south to north (y ascending), columns west to east.  The box
        covers the ever-occupied sites (origin only for an empty pile).
        """
        h = self.half
        ys, xs = np.nonzero(self.ever)
        if len(xs) == 0:
            return "0 0 1 1\n0\n"
        x0, x1 = int(xs.min()) - h, int(xs.max()) - h
        y0, y1 = int(ys.min()) - h, int(ys.max()) - h
        lines = [f"{x0} {y0} {x1 - x0 + 1} {y1 - y0 + 1}\n"]
        for y in range(y0, y1 + 1):
            row = self.heights[y + h, x0 + h:x1 + h + 1]
            lines.append(" ".join(str(int(v)) for v in row) + "\n")
        return "".join(lines)


def topple(g: SandGrid, c: Coord2) -> None:
    """One topple at c: four grains slide off, one to each neighbor."""
    if g.grains(c) < g.variant.threshold:
        raise PreconditionViolated(
            f"site {c} holds {g.grains(c)} < threshold {g.variant.threshold}")
    x, y = c
    h = g.half
    g.heights[y + h, x + h] -= 4
    for d in range(4):
        nx, ny = x + DX[d], y + DY[d]
        if max(abs(nx), abs(ny)) > h:
            raise PreconditionViolated("topple would leave the grid")
        g.heights[ny + h, nx + h] += 1
        g.ever[ny + h, nx + h] = 1


def _wrap(heights: np.ndarray, ever: np.ndarray, half: int,
          variant: SandVariant, n: int) -> SandGrid:
    g = SandGrid.__new__(SandGrid)
    g.half = half
    g.variant = variant
    g.n = n
    side = 2 * half + 1
    g.heights = heights.reshape(side, side)
    g.ever = ever.reshape(side, side)
    return g


def stabilize(n: int, variant: SandVariant = SandVariant.GREEDY,
              order: str = "systematic", seed: int = 0,
              cap: int | None = None) -> SandGrid:
    """Drop n grains at the origin and topple until every site is stable.

    order="systematic" multi-topples off a work queue; order="random"
    single-topples uniformly random unstable sites using the seeded stream.
    The abelian property makes the result identical either way.

    The default topple cap is 10^4 * n.  Real topple counts grow like
    ~0.0124 * n^2, so runs beyond ~8*10^5 grains need an explicit cap.
    """
    if n < 0:
        raise ValueError("grain count must be nonnegative")
    half = safe_radius(n)
    if cap is None:
        cap = TOPPLE_CAP_FACTOR * max(1, n)
    while True:
        if order == "systematic":
            hts, ever, topples, status = _kernels.sandpile_queue(
                n, half, variant.keep, cap)
        elif order == "random":
            hts, ever, topples, status = _kernels.sandpile_random(
                n, half, variant.keep, np.uint64(seed & MASK64), cap)
        else:
            raise ValueError("order must be 'systematic' or 'random'")
        if status == 1:
            raise StepCapExceeded(f"exceeded {cap} topplings")
        if status == 2:
            half *= 2
            continue
        g = _wrap(hts, ever, half, variant, n)
        g.topples = int(topples)
        return g


def stabilize_reference(n: int, variant: SandVariant,
                        order: str = "systematic", seed: int = 0,
                        half: int | None = None) -> SandGrid:
    """Pure-Python single-topple stabilizer (oracle for the kernels).

    Also verifies grain conservation after every single topple.
    """
    if half is None:
        half = safe_radius(n)
    g = SandGrid(half, variant, n)
    g.heights[half, half] = n
    if n > 0:
        g.ever[half, half] = 1
    thresh = variant.threshold
    rng = SeededRandom(seed)
    if order == "systematic":
        queue: deque[Coord2] = deque()
        queued: set[Coord2] = set()
        if n >= thresh:
            queue.append((0, 0))
            queued.add((0, 0))
        while queue:
            c = queue.popleft()
            queued.discard(c)
            while g.grains(c) >= thresh:
                topple(g, c)
                for d in range(4):
                    t = (c[0] + DX[d], c[1] + DY[d])
                    if g.grains(t) >= thresh and t not in queued:
                        queue.append(t)
                        queued.add(t)
    elif order == "random":
        unstable: list[Coord2] = [(0, 0)] if n >= thresh else []
        member = set(unstable)
        while unstable:
            j = rng.next_below(len(unstable))
            c = unstable[j]
            topple(g, c)
            if g.grains(c) < thresh:
                unstable[j] = unstable[-1]
                unstable.pop()
                member.discard(c)
            for d in range(4):
                t = (c[0] + DX[d], c[1] + DY[d])
                if g.grains(t) >= thresh and t not in member:
                    unstable.append(t)
                    member.add(t)
    else:
        raise ValueError("order must be 'systematic' or 'random'")
    return g


def containment_check(n: int) -> dict:
    """Verify the n-grain greedy pile fits inside the n-bug rotor blob."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pile = stabilize(n, SandVariant.GREEDY)
    blob, _ = rotor.run(n)
    sand = pile.ever_sites()
    rot = blob.occupied_sites()
    missing = sorted(sand - rot)
    return {
        "n": n,
        "sandpile_sites": len(sand),
        "rotor_sites": len(rot),
        "contained": not missing,
        "missing": missing,
    }


def swarm_to_sandpile(n: int) -> SandGrid:
    """Rotor swarm restricted to symmetric quadruple moves.

    n bugs start at the origin; whenever a site's bug count (settled plus
    waiting) reaches the greedy threshold, four waiting bugs each take one
    rotor step - a full rotor cycle, one bug to each neighbor.  Bugs landing
    on a vacant site settle immediately.  The resulting bug-count field is
    the greedy sandpile's grain field, and every rotor is left pointing East.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    half = safe_radius(n)
    side = 2 * half + 1
    settled = np.zeros((side, side), np.uint8)
    waiting = np.zeros((side, side), np.int64)
    departs = np.zeros((side, side), np.int64)
    ever = np.zeros((side, side), np.uint8)

    def arrive(x: int, y: int, k: int) -> None:
        ever[y + half, x + half] = 1
        if settled[y + half, x + half] == 0 and k > 0:
            settled[y + half, x + half] = 1
            k -= 1
        waiting[y + half, x + half] += k

    arrive(0, 0, n)
    queue: deque[Coord2] = deque([(0, 0)])
    queued = {(0, 0)}
    while queue:
        x, y = queue.popleft()
        queued.discard((x, y))
        while settled[y + half, x + half] + waiting[y + half, x + half] >= 5:
            waiting[y + half, x + half] -= 4
            departs[y + half, x + half] += 4
            for d in range(4):
                nx, ny = x + DX[d], y + DY[d]
                arrive(nx, ny, 1)
                if (settled[ny + half, nx + half]
                        + waiting[ny + half, nx + half] >= 5
                        and (nx, ny) not in queued):
                    queue.append((nx, ny))
                    queued.add((nx, ny))
    if np.any(departs % 4 != 0):
        raise AssertionError("a rotor was left off East after quadruple moves")
    g = SandGrid.__new__(SandGrid)
    g.half = half
    g.variant = SandVariant.GREEDY
    g.n = n
    g.heights = settled.astype(np.int64) + waiting
    g.ever = ever
    return g


def same_grid(a: SandGrid, b: SandGrid) -> bool:
    """Equal grain fields (and ever-flags), ignoring grid extents."""
    ha, hb = a.half, b.half
    if ha > hb:
        a, b = b, a
        ha, hb = hb, ha
    off = hb - ha
    hin = b.heights[off:off + 2 * ha + 1, off:off + 2 * ha + 1]
    ein = b.ever[off:off + 2 * ha + 1, off:off + 2 * ha + 1]
    if not (np.array_equal(a.heights, hin) and np.array_equal(a.ever, ein)):
        return False
    rest = b.heights.copy()
    rest[off:off + 2 * ha + 1, off:off + 2 * ha + 1] = 0
    reste = b.ever.copy()
    reste[off:off + 2 * ha + 1, off:off + 2 * ha + 1] = 0
    return not rest.any() and not reste.any()


def symmetry_images(g: SandGrid) -> list[np.ndarray]:
    """The eight dihedral images of the height grid (x->-x, y->-y, x<->y)."""
    a = g.heights
    out = []
    for m in (a, a.T):
        out.extend([m, m[::-1, :], m[:, ::-1], m[::-1, ::-1]])
    return out
