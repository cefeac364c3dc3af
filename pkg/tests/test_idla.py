from collections import Counter

import numpy as np
import pytest

from rotorlab import idla, rotor
from rotorlab.lattice import Direction


def test_single_bug():
    blob = idla.run_idla(1, 0)
    assert blob.occupied_sites() == {(0, 0)}
    assert blob.total_hops == 0


def test_determinism_byte_exact():
    a = idla.run_idla(3000, 7)
    b = idla.run_idla(3000, 7)
    assert np.array_equal(a.occ, b.occ)
    assert np.array_equal(a.planes, b.planes)
    c = idla.run_idla(3000, 8)
    assert not np.array_equal(a.occ, c.occ)


def test_second_bug_uniform_over_neighbors():
    counts = Counter()
    for seed in range(40_000):
        sites = idla.run_idla(2, seed).occupied_sites()
        sites.discard((0, 0))
        counts[sites.pop()] += 1
    assert set(counts) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    for v in counts.values():
        assert abs(v / 40_000 - 0.25) < 0.01


def test_cardinality_and_connectivity():
    blob = idla.run_idla(10_000, 3)
    assert blob.site_count() == 10_000
    assert idla.is_connected(blob)


def test_exact_flow_identity_per_run():
    for seed in (0, 5):
        blob = idla.run_idla(2000, seed)
        assert idla.flow_identity_violations(blob) == 0


class TestRoundness:
    def test_single_site_clamps(self):
        rep = idla.roundness(idla.run_idla(1, 9))
        assert rep.effective_radius == pytest.approx(0.5641895835, abs=1e-9)
        assert rep.delta_out == 0.0 and rep.clamped

    def test_modest_scale(self):
        reps = [idla.roundness(idla.run_idla(2000, s)) for s in range(5)]
        r = reps[0].effective_radius
        assert sum(x.delta_in for x in reps) / 5 < 0.1 * r
        assert sum(x.delta_out for x in reps) / 5 < 0.1 * r

    def test_requires_a_bug(self):
        with pytest.raises(ValueError):
            idla.roundness(idla.run_idla(0, 0))


class TestCoupling:
    def test_first_bug_needs_no_cards(self):
        res = idla.run_coupled(rotor.CardStacks({}), 1, seed=0)
        assert res.settled == 1 and res.failed_at is None
        assert res.settled_sites == {(0, 0)}

    def test_settled_subset_of_rotor_blob(self):
        n = 300
        cards = rotor.record_cards(n)
        blob_sites = rotor.run(n)[0].occupied_sites()
        for seed in range(5):
            res = idla.run_coupled(cards, n, seed)
            assert res.settled_sites <= blob_sites
            assert len(res.settled_sites) == res.settled

    def test_failure_reported_as_data(self):
        res = idla.run_coupled(rotor.CardStacks({}), 2, seed=0)
        assert res.settled == 1
        assert res.failed_at is not None
        site, direction = res.failed_at
        assert site == (0, 0) and isinstance(direction, Direction)
        d = res.to_dict()
        assert d["failed_at"]["x"] == 0 and d["failed_at"]["direction"]


def test_mean_departure_flow_summary():
    rep = idla.mean_departure_flow(500, 20, seed=1)
    assert rep["ok"], rep
    assert rep["zero_variance_violations"] == 0
    assert rep["violations"] <= rep["allowed_by_chance"]
