"""Rotor-walk evolution versus the exact expected random-walk distribution.

Bugs live on Z^d (d = 1 or 2); every bug moves every step.  A site's rotor
cycles through the 2d neighbor directions in a fixed order (E,N,W,S for d=2;
right,left for d=1); a moving bug increments the rotor, then follows it.
The comparison distribution evolves by exact mass splitting, 1/(2d) to each
neighbor; its per-site masses come from binomial rows kept in double
precision (the 2D walk factorizes into two independent diagonal walks, so a
point source's mass is an exact product of two binomial weights).  Pointwise
discrepancy between integer rotor counts and expected mass is tracked over
time; the checkered-parity hypothesis is enforced.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import NonCheckeredDistribution
from .lattice import MASK64, _mix64

# direction steps per dimension: d=1 right,left; d=2 E,N,W,S
_STEPS_1D = ((1,), (-1,))
_STEPS_2D = ((1, 0), (0, 1), (-1, 0), (0, -1))

MASS_TOLERANCE = 1e-9


def _site_key(dim: int, site) -> tuple:
    if dim == 1:
        return (int(site),) if np.isscalar(site) else (int(site[0]),)
    x, y = site
    return (int(x), int(y))


class RotorField:
    """Per-site rotor indices 0..2d-1, lazily materialized.

    init="constant" starts every site at `value`; init="random" derives each
    site's start from mix64(mix64(seed) XOR packed-site) mod 2d, so any site
    can be queried without allocating a grid.
    """

    def __init__(self, dim: int, init: str = "constant", value: int = 0,
                 seed: int = 0):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if init not in ("constant", "random"):
            raise ValueError("init must be 'constant' or 'random'")
        self.dim = dim
        self.init = init
        self.value = value % (2 * dim)
        self.seed = seed
        self._mixed_seed = _mix64(seed & MASK64)
        self._idx: dict[tuple, int] = {}

    def _initial(self, key: tuple) -> int:
        if self.init == "constant":
            return self.value
        x = key[0]
        y = key[1] if self.dim == 2 else 0
        packed = ((x & 0xFFFFFFFF) << 32) | (y & 0xFFFFFFFF)
        return _mix64(self._mixed_seed ^ packed) % (2 * self.dim)

    def index(self, site) -> int:
        key = _site_key(self.dim, site)
        v = self._idx.get(key)
        if v is None:
            v = self._initial(key)
            self._idx[key] = v
        return v

    def _advance(self, key: tuple, k: int) -> int:
        """Advance the rotor k increments; returns the index before them."""
        old = self._idx.get(key)
        if old is None:
            old = self._initial(key)
        self._idx[key] = (old + k) % (2 * self.dim)
        return old


class BugDistribution:
    """Nonnegative integer bug counts on one checkerboard parity class."""

    def __init__(self, dim: int, counts: dict):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        self.dim = dim
        self.counts: dict[tuple, int] = {}
        parity = None
        total = 0
        for site, k in counts.items():
            k = int(k)
            if k < 0:
                raise ValueError("bug counts must be nonnegative")
            if k == 0:
                continue
            key = _site_key(dim, site)
            p = sum(key) & 1
            if parity is None:
                parity = p
            elif p != parity:
                raise NonCheckeredDistribution(
                    "bugs occupy both checkerboard parities")
            self.counts[key] = self.counts.get(key, 0) + k
            total += k
        self.total = total
        self.parity = parity if parity is not None else 0


def rotor_step(dist: BugDistribution,
               field: RotorField) -> BugDistribution:
    """Advance every bug one rotor-directed step; mutates the field.

    A site holding k bugs sends them along rotor indices rho+1 .. rho+k, so
    direction j receives k // 2d plus one when (j - rho) mod 2d is in
    1 .. k mod 2d.
    """
    if dist.dim != field.dim:
        raise ValueError("dimension mismatch")
    dim = dist.dim
    m = 2 * dim
    steps = _STEPS_1D if dim == 1 else _STEPS_2D
    new: dict[tuple, int] = {}
    for key in sorted(dist.counts):
        k = dist.counts[key]
        rho = field._advance(key, k)
        base, rem = divmod(k, m)
        for j in range(m):
            cnt = base + (1 if 0 < (j - rho) % m <= rem else 0)
            if cnt == 0:
                continue
            tgt = tuple(key[i] + steps[j][i] for i in range(dim))
            new[tgt] = new.get(tgt, 0) + cnt
    out = BugDistribution.__new__(BugDistribution)
    out.dim = dim
    out.counts = new
    out.total = dist.total
    out.parity = dist.parity ^ 1
    return out


class ExpectedDistribution:
    """Exact-form expected mass after t uniform random-walk steps.

    Point sources evolve as binomial rows q_t (kept as one shared float64
    row); in 2D the walk splits into independent diagonal walks, so mass at
    (x, y) from a source (sx, sy) is q_t(x+y-sx-sy) * q_t(x-y-sx+sy).
    """

    def __init__(self, dim: int, sources: dict):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        self.dim = dim
        self.sources = [( _site_key(dim, s), float(m))
                        for s, m in sources.items() if m]
        self.total = float(sum(m for _, m in self.sources))
        self.t = 0
        self._q = np.array([1.0])  # q_t(u) at index u + t

    def step(self) -> None:
        q = self._q
        nq = np.zeros(len(q) + 2)
        nq[:-2] += q * 0.5
        nq[2:] += q * 0.5
        self._q = nq
        self.t += 1

    def q_at(self, u: int) -> float:
        i = u + self.t
        if 0 <= i < len(self._q):
            return float(self._q[i])
        return 0.0

    def mass_at(self, site) -> float:
        key = _site_key(self.dim, site)
        if self.dim == 1:
            return sum(m * self.q_at(key[0] - s[0]) for s, m in self.sources)
        x, y = key
        return sum(m * self.q_at(x + y - s[0] - s[1])
                   * self.q_at(x - y - s[0] + s[1])
                   for s, m in self.sources)

    def mass_total(self) -> float:
        row = float(self._q.sum())
        per_source = row if self.dim == 1 else row * row
        return per_source * self.total


def expected_step(e: ExpectedDistribution) -> ExpectedDistribution:
    """One step of exact mass splitting (1/(2d) to each neighbor)."""
    e.step()
    drift = abs(float(e._q.sum()) - 1.0)
    if drift > MASS_TOLERANCE:
        raise ArithmeticError(f"expected-mass drift {drift}")
    return e


def expected_step_exact(masses: dict, dim: int) -> dict:
    """Reference exact-rational splitting step, for validating the fast path."""
    steps = _STEPS_1D if dim == 1 else _STEPS_2D
    share = Fraction(1, 2 * dim)
    out: dict[tuple, Fraction] = {}
    for site, m in masses.items():
        key = _site_key(dim, site)
        for s in steps:
            tgt = tuple(key[i] + s[i] for i in range(dim))
            out[tgt] = out.get(tgt, Fraction(0)) + Fraction(m) * share
    return out


def _max_expected_off_bugs(e: ExpectedDistribution, bug_sites: set,
                           best: float) -> float:
    """Exact max expected mass over bug-free sites, if it can exceed best."""
    q = e._q
    t = e.t
    qmax = float(q.max())
    total = sum(m for _, m in e.sources)
    if total * qmax < best:  # no site can beat the bug-site discrepancy
        return 0.0
    if e.dim == 1:
        xs_min = min(s[0] for s, _ in e.sources) - t
        xs_max = max(s[0] for s, _ in e.sources) + t
        xs = np.arange(xs_min, xs_max + 1)
        acc = np.zeros(len(xs))
        for (sx,), m in e.sources:
            lo = sx - t - xs_min
            acc[lo:lo + len(q)] += m * q
        for (bx,) in bug_sites:
            if xs_min <= bx <= xs_max:
                acc[bx - xs_min] = 0.0
        return float(acc.max()) if len(acc) else 0.0
    # d=2: a site with mass >= best needs per-diagonal weights of at least
    # best / (total * qmax); those u, v windows are small once t grows.
    if total * qmax * qmax < best:
        return 0.0
    us_min = min(s[0] + s[1] for s, _ in e.sources) - t
    us_max = max(s[0] + s[1] for s, _ in e.sources) + t
    vs_min = min(s[0] - s[1] for s, _ in e.sources) - t
    vs_max = max(s[0] - s[1] for s, _ in e.sources) + t
    us = np.arange(us_min, us_max + 1)
    vs = np.arange(vs_min, vs_max + 1)
    qu = np.zeros(len(us))
    qv = np.zeros(len(vs))
    for (sx, sy), m in e.sources:
        lo = sx + sy - t - us_min
        qu[lo:lo + len(q)] = np.maximum(qu[lo:lo + len(q)], q)
        lo = sx - sy - t - vs_min
        qv[lo:lo + len(q)] = np.maximum(qv[lo:lo + len(q)], q)
    cut = best / (total * qmax) if best > 0 else 0.0
    u_idx = np.nonzero(qu >= cut)[0]
    v_idx = np.nonzero(qv >= cut)[0]
    top = 0.0
    for ui in u_idx:
        u = int(us[ui])
        for vi in v_idx:
            v = int(vs[vi])
            if (u + v) & 1:
                continue
            site = ((u + v) // 2, (u - v) // 2)
            if site in bug_sites:
                continue
            val = e.mass_at(site)
            if val > top:
                top = val
    return top


def max_discrepancy(dist0: BugDistribution, field0: RotorField,
                    steps: int) -> np.ndarray:
    """Trace D(t) = max over sites |rotor count - expected mass|, t = 0..steps.

    Refuses distributions that straddle checkerboard parities (the bounded-
    discrepancy theorem's hypothesis).  D(0) is 0 by construction.
    """
    if dist0.dim != field0.dim:
        raise ValueError("dimension mismatch")
    # BugDistribution enforces checkeredness at construction; re-validate in
    # case counts were mutated.
    parities = {sum(k) & 1 for k in dist0.counts}
    if len(parities) > 1:
        raise NonCheckeredDistribution("bugs occupy both parities")
    if not dist0.counts:
        return np.zeros(steps + 1)
    expected = ExpectedDistribution(dist0.dim, dict(dist0.counts))
    dist = dist0
    trace = np.zeros(steps + 1)
    for t in range(1, steps + 1):
        dist = rotor_step(dist, field0)
        expected_step(expected)
        best = 0.0
        bug_sites = set(dist.counts)
        for site, k in dist.counts.items():
            diff = abs(k - expected.mass_at(site))
            if diff > best:
                best = diff
        off = _max_expected_off_bugs(expected, bug_sites, best)
        trace[t] = max(best, off)
    return trace
