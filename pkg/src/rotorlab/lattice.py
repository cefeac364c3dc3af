"""Shared lattice primitives.

Directions with the counterclockwise cyclic order E -> N -> W -> S, integer
coordinates with exact squared distances, a dense origin-centered auto-growing
grid, and the deterministic random source every seeded experiment uses.
"""

from __future__ import annotations

import math
from enum import IntEnum

import numpy as np

Coord2 = tuple[int, int]

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # golden-gamma increment of SplitMix64


class Direction(IntEnum):
    EAST = 0
    NORTH = 1
    WEST = 2
    SOUTH = 3


# Unit steps, indexed by Direction value.
DX = (1, 0, -1, 0)
DY = (0, 1, 0, -1)


def ccw_next(d: Direction) -> Direction:
    """Next direction one quarter turn counterclockwise (E->N->W->S->E)."""
    return Direction((d + 1) & 3)


def opposite(d: Direction) -> Direction:
    return Direction((d + 2) & 3)


def neighbor(c: Coord2, d: Direction) -> Coord2:
    x, y = c
    return (x + DX[d], y + DY[d])


def dist2(c: Coord2) -> int:
    """Squared Euclidean distance from the origin, exact integer."""
    x, y = c
    return x * x + y * y


def safe_radius(n: int) -> int:
    """Grid half-extent that provably contains an n-particle aggregate.

    ceil(2*sqrt(n/pi)) + 16: twice the effective radius plus margin.
    """
    if n <= 0:
        return 16
    return math.ceil(2.0 * math.sqrt(n / math.pi)) + 16


class DenseGrid:
    """Dense origin-centered square grid with a default payload.

    Reads outside the current extent return the default; writes outside grow
    the extent (at least doubling) without disturbing stored payloads.
    """

    def __init__(self, default=0, dtype=np.int64, half: int = 8):
        self.default = default
        self.dtype = np.dtype(dtype)
        self.half = int(half)
        side = 2 * self.half + 1
        self._a = np.full((side, side), default, dtype=self.dtype)

    def _grow_to(self, need: int) -> None:
        new_half = max(need, 2 * self.half)
        side = 2 * new_half + 1
        a = np.full((side, side), self.default, dtype=self.dtype)
        off = new_half - self.half
        a[off:off + 2 * self.half + 1, off:off + 2 * self.half + 1] = self._a
        self._a = a
        self.half = new_half

    def get(self, c: Coord2):
        x, y = c
        h = self.half
        if -h <= x <= h and -h <= y <= h:
            return self._a[y + h, x + h]
        return self.default

    def set(self, c: Coord2, value) -> None:
        x, y = c
        need = max(abs(x), abs(y))
        if need > self.half:
            self._grow_to(need)
        self._a[y + self.half, x + self.half] = value

    def array(self) -> np.ndarray:
        """Raw backing array; element (y+half, x+half) is site (x, y)."""
        return self._a

    def nonzero_coords(self) -> list[Coord2]:
        ys, xs = np.nonzero(self._a != self.default)
        h = self.half
        return [(int(x) - h, int(y) - h) for y, x in zip(ys, xs)]


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SeededRandom:
    """SplitMix64 (Steele-Lea-Vigna), the fixed PRNG of this package.

    state_{k+1} = state_k + 0x9E3779B97F4A7C15 (mod 2^64), output is the
    mix64 finalizer of the new state.  Identical seeds give identical streams
    on every platform; the numba kernels implement the same algorithm, and
    the test suite pins stream equality between the two.
    """

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix64(self._state)

    def coin(self) -> int:
        """One random bit (low bit of the next output)."""
        return self.next_u64() & 1

    def direction_bits(self) -> int:
        """Two random bits, the fixed E,N,W,S direction encoding 0..3."""
        return self.next_u64() & 3

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by low-bit mask rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            r = self.next_u64() & mask
            if r < n:
                return r

    def substream(self, i: int) -> "SeededRandom":
        """Independent stream i, seeded with mix64(seed XOR (i+1)*gamma)."""
        return SeededRandom(_mix64(self.seed ^ (((i + 1) * _GAMMA) & MASK64)))
