from fractions import Fraction

import pytest

from rotorlab import discrepancy as dc
from rotorlab.errors import NonCheckeredDistribution
from rotorlab.lattice import SeededRandom


class TestBugDistribution:
    def test_merges_and_totals(self):
        d = dc.BugDistribution(2, {(0, 0): 3, (1, 1): 2})
        assert d.total == 5 and d.parity == 0

    def test_rejects_mixed_parity(self):
        with pytest.raises(NonCheckeredDistribution):
            dc.BugDistribution(2, {(0, 0): 1, (1, 0): 1})
        with pytest.raises(NonCheckeredDistribution):
            dc.BugDistribution(1, {0: 1, 1: 1})

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            dc.BugDistribution(1, {0: -1})


class TestRotorField:
    def test_constant(self):
        f = dc.RotorField(2, "constant", value=3)
        assert f.index((5, -7)) == 3

    def test_random_is_deterministic(self):
        a = dc.RotorField(2, "random", seed=4)
        b = dc.RotorField(2, "random", seed=4)
        sites = [(0, 0), (3, -2), (-100, 55)]
        assert [a.index(s) for s in sites] == [b.index(s) for s in sites]
        c = dc.RotorField(2, "random", seed=5)
        assert any(a.index(s) != c.index(s)
                   for s in ((x, y) for x in range(-6, 7)
                             for y in range(-6, 7)))

    def test_cycle_period(self):
        for dim in (1, 2):
            f = dc.RotorField(dim, "constant", value=0)
            key = (0,) if dim == 1 else (0, 0)
            start = f.index(key)
            f._advance(key, 2 * dim)
            assert f.index(key) == start


def brute_force_step(dim, counts, field):
    """Literal one-bug-at-a-time stepping (the rotor_step oracle)."""
    steps = {1: {0: (1,), 1: (-1,)},
             2: {0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}}[dim]
    out: dict = {}
    for site in sorted(counts):
        k = counts[site]
        for _ in range(k):
            rho = (field.index(site) + 1) % (2 * dim)
            field._idx[site] = rho
            tgt = tuple(site[i] + steps[rho][i] for i in range(dim))
            out[tgt] = out.get(tgt, 0) + 1
    return out


class TestRotorStep:
    def test_empty(self):
        f = dc.RotorField(1)
        d = dc.rotor_step(dc.BugDistribution(1, {}), f)
        assert d.counts == {}

    def test_forced_single_move(self):
        f = dc.RotorField(1, "constant", value=1)  # increment points right
        d = dc.rotor_step(dc.BugDistribution(1, {0: 1}), f)
        assert d.counts == {(1,): 1}

    def test_four_bugs_split_evenly_any_init(self):
        for kind, val, seed in (("constant", 0, 0), ("constant", 1, 0),
                                ("random", 0, 3), ("random", 0, 11)):
            f = dc.RotorField(1, kind, value=val, seed=seed)
            d = dc.rotor_step(dc.BugDistribution(1, {0: 4}), f)
            assert d.counts == {(-1,): 2, (1,): 2}

    def test_parity_flips_and_total_conserved(self):
        d = dc.BugDistribution(2, {(0, 0): 5, (2, 0): 1})
        f = dc.RotorField(2, "random", seed=1)
        for _ in range(6):
            before = d.total
            parity = d.parity
            d = dc.rotor_step(d, f)
            assert d.total == before
            assert d.parity == parity ^ 1
            assert all((x + y) & 1 == d.parity for x, y in d.counts)

    @pytest.mark.parametrize("dim", [1, 2])
    def test_batched_equals_brute_force(self, dim):
        rng = SeededRandom(6)
        for trial in range(30):
            sites = {}
            for _ in range(4):
                if dim == 1:
                    s = (2 * (rng.next_below(9) - 4),)
                else:
                    x = rng.next_below(9) - 4
                    y = rng.next_below(9) - 4
                    if (x + y) & 1:
                        x += 1
                    s = (x, y)
                sites[s] = sites.get(s, 0) + rng.next_below(12) + 1
            fa = dc.RotorField(dim, "random", seed=trial)
            fb = dc.RotorField(dim, "random", seed=trial)
            got = dc.rotor_step(dc.BugDistribution(dim, sites), fa)
            want = brute_force_step(dim, sites, fb)
            assert dict(got.counts) == want
            # rotors themselves must agree after the step
            for s in sites:
                assert fa.index(s) == fb.index(s)


class TestExpected:
    def test_one_step_1d(self):
        e = dc.ExpectedDistribution(1, {0: 1})
        dc.expected_step(e)
        assert e.mass_at(-1) == pytest.approx(0.5, abs=1e-15)
        assert e.mass_at(1) == pytest.approx(0.5, abs=1e-15)
        assert e.mass_at(0) == 0.0

    def test_two_steps_1d_binomial(self):
        e = dc.ExpectedDistribution(1, {0: 1})
        dc.expected_step(e)
        dc.expected_step(e)
        assert e.mass_at(-2) == pytest.approx(0.25, abs=1e-15)
        assert e.mass_at(0) == pytest.approx(0.5, abs=1e-15)
        assert e.mass_at(2) == pytest.approx(0.25, abs=1e-15)

    def test_two_steps_2d_origin(self):
        e = dc.ExpectedDistribution(2, {(0, 0): 1})
        dc.expected_step(e)
        dc.expected_step(e)
        assert e.mass_at((0, 0)) == pytest.approx(4 / 16, abs=1e-15)

    @pytest.mark.parametrize("dim,steps", [(1, 40), (2, 16)])
    def test_matches_exact_fraction_oracle(self, dim, steps):
        src = {0: 1} if dim == 1 else {(0, 0): 1}
        exact = {k if dim == 2 else (k,): Fraction(v) for k, v in src.items()}
        fast = dc.ExpectedDistribution(dim, src)
        for _ in range(steps):
            exact = dc.expected_step_exact(exact, dim)
            dc.expected_step(fast)
        for site, frac in exact.items():
            assert fast.mass_at(site) == pytest.approx(float(frac), abs=1e-13)
        assert fast.mass_total() == pytest.approx(1.0, abs=1e-12)

    def test_multi_source_masses(self):
        e = dc.ExpectedDistribution(2, {(0, 0): 4, (2, 0): 4})
        dc.expected_step(e)
        assert e.mass_at((1, 0)) == pytest.approx(2.0, abs=1e-14)
        assert e.mass_total() == pytest.approx(8.0, abs=1e-12)


class TestMaxDiscrepancy:
    def test_zero_steps(self):
        tr = dc.max_discrepancy(dc.BugDistribution(1, {0: 1}),
                                dc.RotorField(1), 0)
        assert list(tr) == [0.0]

    def test_first_step_half_for_single_bug(self):
        for kind, seed in (("constant", 0), ("random", 5)):
            tr = dc.max_discrepancy(dc.BugDistribution(1, {0: 1}),
                                    dc.RotorField(1, kind, seed=seed), 1)
            assert tr[1] == pytest.approx(0.5, abs=1e-15)

    def test_symmetric_load_is_exact(self):
        # 2d*k bugs on one site: rotors hand exactly k to each neighbor
        tr = dc.max_discrepancy(dc.BugDistribution(2, {(0, 0): 8}),
                                dc.RotorField(2, "random", seed=2), 1)
        assert tr[1] == 0.0
        tr1 = dc.max_discrepancy(dc.BugDistribution(1, {0: 6}),
                                 dc.RotorField(1, "random", seed=2), 1)
        assert tr1[1] == 0.0

    def test_refuses_non_checkered(self):
        d = dc.BugDistribution(2, {(0, 0): 1})
        d.counts[(1, 0)] = 1  # sneak in an off-parity bug
        with pytest.raises(NonCheckeredDistribution):
            dc.max_discrepancy(d, dc.RotorField(2), 3)

    @pytest.mark.parametrize("dim", [1, 2])
    def test_bounded_with_honest_windows(self, dim):
        # module-level no-growth check at short horizon; the acceptance
        # suite carries the spec-literal (and miscalibrated) window.  Any
        # late increase must be explained by expected mass still decaying.
        import math
        load = {0: 1} if dim == 1 else {(0, 0): 1}
        f = dc.RotorField(dim, "random", seed=0)
        tr = dc.max_discrepancy(dc.BugDistribution(dim, load), f, 1500)
        qmax = math.sqrt(2.0 / (math.pi * 750))
        allowance = (qmax if dim == 1 else qmax * qmax) + 0.01
        assert tr.max() <= tr[:751].max() + allowance
        assert tr.max() < 1.05  # bounded: single bug plateaus just below 1

    def test_expected_off_bug_sites_counted(self):
        # one bug walks away; the vacated center keeps expected mass, which
        # must dominate D when larger than the bug-site difference
        tr = dc.max_discrepancy(dc.BugDistribution(2, {(0, 0): 1}),
                                dc.RotorField(2, "constant", 0), 2)
        e = dc.ExpectedDistribution(2, {(0, 0): 1})
        dc.expected_step(e)
        dc.expected_step(e)
        # bug sits at distance 2; biggest |count-mass| is 1 - 1/16 there
        assert tr[2] == pytest.approx(1 - e.mass_at((0, 2)), abs=1e-12)
