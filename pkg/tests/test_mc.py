import math

import numpy as np
import pytest

from nonlocality import catalog, mc
from nonlocality.polytope import LPFailure
from nonlocality.qcore import Scenario

GHZ3 = catalog.get_state("GHZ3")


def test_ghz3_fraction_small_run():
    est = mc.estimate_nonlocal_fraction(GHZ3, "2x2x2", 20000, "iopt", seed=3)
    assert est.p_v == pytest.approx(0.69997, abs=0.015)
    assert est.stderr_p_v == pytest.approx(math.sqrt(est.p_v * (1 - est.p_v) / 20000))
    assert est.discarded == 0


def test_histogram_mass_equals_fraction_exactly():
    est = mc.estimate_strength(catalog.get_state("W3"), "3x2x2", 5000, "iopt", seed=1)
    assert est.histogram.total_mass == est.p_v
    assert math.isclose(est.histogram.bins.sum(), est.p_v, abs_tol=1e-12)
    assert np.all(est.histogram.bins >= 0)
    assert len(est.histogram.bins) == 200
    assert est.s_bar <= est.p_v * est.s_max_observed + 1e-15


def test_histogram_rows():
    est = mc.estimate_strength(GHZ3, "2x2x2", 2000, "iopt", seed=1)
    rows = est.histogram.rows()
    assert rows[0][:2] == (0.0, 0.005)
    assert rows[1][2] * 2000 == pytest.approx(est.histogram.counts[1])
    assert rows[1][3] == pytest.approx(rows[1][2] / 0.005)


def test_product_state_is_never_nonlocal():
    psi = np.zeros(8)
    psi[0] = 1
    for det in ["iopt", "I_5"]:
        est = mc.estimate_strength(psi, "2x2x2", 3000, det, seed=2)
        assert est.p_v == 0.0 and est.s_bar == 0.0


def test_white_noise_is_never_nonlocal():
    est = mc.estimate_with_noise(GHZ3, 0.0, "2x2x2", 3000, seed=2)
    assert est.p_v == 0.0


def test_bad_inputs():
    with pytest.raises(ValueError):
        mc.estimate_with_noise(GHZ3, 1.2, "2x2x2", 10)
    with pytest.raises(ValueError):
        mc.estimate_strength(GHZ3, "2x2x2x2", 10)
    with pytest.raises(ValueError):
        mc.estimate_strength(GHZ3, "2x2x2", 0)
    with pytest.raises(ValueError):
        mc.make_detector("lp,iopt", Scenario((2, 2, 2)))
    with pytest.raises(KeyError):
        mc.make_detector("I_nope", Scenario((2, 2, 2)))


@pytest.mark.parametrize("detector", ["iopt", "iopt,I_5"])
def test_thread_count_does_not_change_results(detector):
    one = mc.estimate_strength(GHZ3, "2x2x2", 5000, detector, seed=9, threads=1)
    many = mc.estimate_strength(GHZ3, "2x2x2", 5000, detector, seed=9, threads=4)
    assert one.to_dict() == many.to_dict()
    np.testing.assert_array_equal(one.histogram.counts, many.histogram.counts)


def test_thread_count_does_not_change_lp_results():
    one = mc.estimate_strength(GHZ3, "2x2x2", 150, "lp", seed=4, threads=1)
    many = mc.estimate_strength(GHZ3, "2x2x2", 150, "lp", seed=4, threads=3)
    assert one.to_dict() == many.to_dict()


def test_different_seeds_differ():
    a = mc.estimate_strength(GHZ3, "2x2x2", 3000, seed=1)
    b = mc.estimate_strength(GHZ3, "2x2x2", 3000, seed=2)
    assert a.p_v != b.p_v


def test_longer_run_extends_shorter_one():
    # whole blocks depend only on (seed, block index), so extra samples only add counts
    short = mc.estimate_strength(GHZ3, "2x2x2", mc.BLOCK, seed=5)
    long = mc.estimate_strength(GHZ3, "2x2x2", 3 * mc.BLOCK, seed=5)
    assert np.all(long.histogram.counts >= short.histogram.counts)
    assert long.histogram.counts.sum() > short.histogram.counts.sum()


def test_fraction_is_monotone_in_visibility_on_paired_samples():
    prev_p, prev_s = -1.0, -1.0
    for v in [0.0, 0.5, 0.7, 0.8, 0.9, 0.96, 1.0]:
        est = mc.estimate_with_noise(GHZ3, v, "2x2x2", 4000, seed=11)
        assert est.p_v >= prev_p
        assert est.s_bar >= prev_s
        prev_p, prev_s = est.p_v, est.s_bar


def test_family_detector_never_beats_lp():
    for state, det in [(GHZ3, "iopt"), (catalog.get_state("W3"), "iopt,I_5,I_6")]:
        fam = mc.estimate_strength(state, "2x2x2", 300, det, seed=5)
        lp = mc.estimate_strength(state, "2x2x2", 300, "lp", seed=5)
        assert fam.p_v <= lp.p_v
        assert fam.s_bar <= lp.s_bar + 1e-9


def test_union_detector_dominates_members():
    union = mc.estimate_strength(GHZ3, "2x2x2", 4000, "iopt,I_5", seed=6)
    for det in ["iopt", "I_5"]:
        single = mc.estimate_strength(GHZ3, "2x2x2", 4000, det, seed=6)
        assert single.p_v <= union.p_v
        assert single.s_bar <= union.s_bar + 1e-12


def test_biseparable_state_ignores_idle_parties():
    psi = catalog.get_state("GHZ2x00")
    runs = [mc.estimate_nonlocal_fraction(psi, sc, 20000, "iopt", seed=8) for sc in ["2x2x1x1", "2x2x2x1"]]
    gap = abs(runs[0].p_v - runs[1].p_v)
    assert gap <= 2 * math.hypot(runs[0].stderr_p_v, runs[1].stderr_p_v)
    for r in runs:
        assert r.p_v == pytest.approx(2 * (math.pi - 3), abs=0.02)


def test_lp_failures_are_discarded(monkeypatch):
    calls = {"n": 0}
    real = mc.visibility_lp

    def flaky(scenario, corr):
        calls["n"] += 1
        if calls["n"] % 10 == 0:
            raise LPFailure("synthetic")
        return real(scenario, corr)

    monkeypatch.setattr(mc, "visibility_lp", flaky)
    est = mc.estimate_strength(GHZ3, "2x2x2", 100, "lp", seed=1)
    assert est.discarded == 10
    assert est.histogram.n_samples == 90
    assert est.p_v == est.histogram.total_mass


def test_typicality_small_run():
    est = mc.estimate_typicality(3, "2x2x2", 20000, "iopt", seed=4)
    assert est.t_v == pytest.approx(0.38277, abs=0.015)
    assert 0 < est.t_s < est.t_v
    again = mc.estimate_typicality(3, "2x2x2", 20000, "iopt", seed=4, threads=2)
    assert again.to_dict() == est.to_dict()
    with pytest.raises(ValueError):
        mc.estimate_typicality(4, "2x2x2", 10)


def test_estimate_serializes():
    d = mc.estimate_strength(GHZ3, "2x2x2", 100, seed=1).to_dict()
    assert set(d) >= {"p_v", "stderr_p_v", "s_bar", "histogram", "n_samples", "seed", "detector", "discarded"}
    assert d["detector"] == "family(iopt)"
