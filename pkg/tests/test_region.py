"""Mode sweeps, rate-region hulls and mode selection."""

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from pxqama.geometry import make_channels
from pxqama.hqam import DistanceProfile, ModeConfig
from pxqama.region import (
    ModeSelectionError,
    SweepGrid,
    build_region,
    enumerate_modes,
    evaluate_mode,
    pareto_indices,
    polygon_area,
    power_grid,
    read_region_csv,
    region_summary,
    select_modes,
    size_combos,
    sweep,
    write_region_csv,
)

SMALL_SIZES = ((1, 1, 1, 1), (1, 0, 0, 1), (2, 0, 1, 0), (0, 0, 1, 1),
               (1, 1, 0, 0), (0, 0, 2, 1), (1, 2, 1, 0))


def channels(g1_db=10.0, g2_db=20.0, rho=0.8):
    return make_channels(math.sqrt(10 ** (g1_db / 10)), math.sqrt(10 ** (g2_db / 10)), rho)


def small_grid(**kw):
    base = dict(theta_points=4, power_step=0.25, sizes=SMALL_SIZES)
    base.update(kw)
    return SweepGrid(**base)


def mask(owners):
    return sum(1 << k for k, u in enumerate(owners) if u == 1)


def mode_key(m0, n0, m1, n1, theta0, a, mi, mq):
    return (m0, n0, m1, n1, round(float(theta0), 9),
            *(round(float(x), 9) for x in a), int(mi), int(mq))


def table_keys(table):
    return [mode_key(*(int(r[c]) for c in ("m0", "n0", "m1", "n1")), r["theta0"],
                     (r["a0"], r["a1"], r["a2"]), r["assignment_mask_i"],
                     r["assignment_mask_q"]) for r in table]


rate_points = st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=40)


def hull_area_oracle(pts):
    """Area of conv(points, origin, axis projections) via Qhull."""
    pts = np.asarray(pts, dtype=float)
    cloud = np.vstack([pts, [[0, 0]], np.c_[pts[:, 0], 0 * pts[:, 0]],
                       np.c_[0 * pts[:, 1], pts[:, 1]]])
    try:
        return ConvexHull(cloud).volume
    except Exception:
        return 0.0


class TestHull:
    def test_dominating_corner_point(self):
        r = build_region([(1, 0), (0, 1), (0.6, 0.6)])
        np.testing.assert_array_equal(r.points[r.frontier], [[0, 1], [0.6, 0.6], [1, 0]])

    def test_interior_point_excluded(self):
        r = build_region([(1, 0), (0, 1), (0.4, 0.4)])
        assert 2 not in r.frontier
        assert r.area == pytest.approx(0.5)

    def test_ties_at_max_rate(self):
        r = build_region([(1, 0), (1, 0.5), (0, 1)])
        np.testing.assert_array_equal(r.points[r.frontier], [[0, 1], [1, 0.5]])
        assert r.area == pytest.approx(0.75)

    def test_single_point(self):
        r = build_region([(2.0, 3.0)])
        assert r.area == pytest.approx(6.0)

    def test_empty_and_negative(self):
        with pytest.raises(ValueError):
            build_region([])
        with pytest.raises(ValueError):
            build_region([(1.0, -0.1)])

    def test_pareto_counts(self):
        pts = [(0, 1), (0.5, 0.5), (0.45, 0.45), (0.4, 0.7), (1, 0)]
        np.testing.assert_array_equal(pareto_indices(pts), [0, 1, 3, 4])
        r = build_region(pts)
        assert r.n_pareto == 4 and r.n_frontier == 3

    @settings(max_examples=200)
    @given(rate_points)
    def test_matches_qhull(self, pts):
        r = build_region(pts)
        assert r.area == pytest.approx(hull_area_oracle(pts), rel=1e-9, abs=1e-9)
        for p in pts:
            assert r.contains(*p, tol=1e-7)

    @given(rate_points)
    def test_frontier_is_convex_and_monotone(self, pts):
        r = build_region(pts)
        f = r.points[r.frontier]
        assert np.all(np.diff(f[:, 0]) > 0) and np.all(np.diff(f[:, 1]) < 0)
        for a, b, c in zip(f, f[1:], f[2:]):
            assert (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0

    @given(rate_points, rate_points)
    def test_monotone_coverage(self, pts, more):
        assert build_region(pts + more).area >= build_region(pts).area - 1e-12

    def test_polygon_area_square(self):
        assert polygon_area([(0, 0), (0, 1), (1, 1), (1, 0)]) == 1.0


class TestSelectModes:
    @pytest.fixture
    def region(self):
        t = np.linspace(0, math.pi / 2, 12)
        return build_region(np.c_[np.sin(t), np.cos(t)] * 3)

    def test_all_vertices(self, region):
        sel = select_modes(region, region.n_frontier)
        assert sel.ratio == pytest.approx(1.0)

    def test_two_corners(self, region):
        sel = select_modes(region, 2)
        np.testing.assert_array_equal(sel.indices, [region.frontier[0], region.frontier[-1]])
        assert sel.area == pytest.approx(4.5)

    @pytest.mark.parametrize("n", [0, 1])
    def test_too_few(self, region, n):
        with pytest.raises(ModeSelectionError):
            select_modes(region, n)

    def test_too_many(self, region):
        with pytest.raises(ModeSelectionError):
            select_modes(region, region.n_frontier + 1)

    def test_ratio_grows_with_n(self, region):
        ratios = [select_modes(region, n).ratio for n in range(2, region.n_frontier + 1)]
        assert np.all(np.diff(ratios) >= -1e-12)
        assert ratios[0] < ratios[-1]


class TestGrid:
    def test_default_combos(self):
        combos = size_combos(SweepGrid(iq_dedup=False))
        assert all(m0 + m1 <= 3 and n0 + n1 <= 3 for m0, n0, m1, n1 in combos)
        assert len(combos) == 99
        dedup = size_combos(SweepGrid())
        assert len(dedup) < len(combos)

    def test_families(self):
        assert all(c[:2] == (0, 0) for c in size_combos(SweepGrid(family="sdma")))
        assert all(c[2:] == (0, 0) for c in size_combos(SweepGrid(family="qama_bf")))

    def test_power_grid(self):
        p = power_grid(0.05)
        assert len(p) == 231
        np.testing.assert_allclose(p.sum(axis=1), 1.0)

    @pytest.mark.parametrize("kw", [dict(theta_points=0), dict(power_step=0.3),
                                    dict(sizes=()), dict(ratios=()), dict(ratios=(1.5,)),
                                    dict(family="rsma"), dict(sizes=((2, 0, 2, 0),))])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            size_combos(SweepGrid(**kw))


@pytest.fixture(scope="module")
def ch():
    return channels()


@pytest.fixture(scope="module")
def result(ch):
    return sweep(ch, small_grid())


class TestSweep:
    def test_batched_matches_single_mode_chain(self, ch, result):
        rejected = Counter()
        modes = list(enumerate_modes(ch, small_grid(), rejected))
        assert len(modes) == len(result)
        got = dict(zip(table_keys(result.table), result.rates))
        assert len(got) == len(result)
        for mode in modes:
            pt = evaluate_mode(mode, ch)
            s = mode.sizes
            key = mode_key(s[0], s[1], s[2], s[3], mode.theta0, mode.alphas,
                           mask(mode.assign_i), mask(mode.assign_q))
            np.testing.assert_allclose(got[key], pt.rates, atol=1e-12)
        assert rejected == result.rejected

    def test_row_mode_round_trip(self, ch, result):
        for i in range(0, len(result), 97):
            pt = evaluate_mode(result.mode(i), ch)
            np.testing.assert_allclose(pt.rates, result.rates[i], atol=1e-12)

    def test_rate_caps(self, result):
        t = result.table
        cap = t["m0"] + t["n0"] + t["m1"] + t["n1"]
        assert np.all(t["R1"] <= cap + 1e-12) and np.all(t["R2"] <= cap + 1e-12)
        assert np.all(t["R1"] >= 0) and np.all(t["R2"] >= 0)

    def test_special_cases_are_subfamilies(self, ch, result):
        full = set(table_keys(result.table))
        full_area = build_region(result).area
        for family in ("sdma", "qama_bf"):
            sub = sweep(ch, small_grid(family=family))
            assert set(table_keys(sub.table)) <= full
            assert full_area >= build_region(sub).area

    def test_mirrored_mode_swaps_rates(self):
        ch = channels(15, 15, 0.5)
        q = DistanceProfile.uniform(1, 1)
        p = DistanceProfile.uniform(1, 0)
        a = (math.sqrt(0.94), math.sqrt(0.04), math.sqrt(0.02))
        th = 0.3 * ch.theta
        mode = ModeConfig(q, p, p, th, a, (1,), (2,))
        mirror = ModeConfig(q, p, p, ch.theta - th, (a[0], a[2], a[1]), (2,), (1,))
        r = evaluate_mode(mode, ch)
        m = evaluate_mode(mirror, ch)
        assert m.r1 == pytest.approx(r.r2, abs=1e-12)
        assert m.r2 == pytest.approx(r.r1, abs=1e-12)

    def test_qpsk_mode_is_h16qam_per_user(self, ch, result):
        t = result.table
        rows = np.flatnonzero((t["m0"] == 1) & (t["n0"] == 1) & (t["m1"] == 1)
                              & (t["n1"] == 1) & (t["a1"] > 0) & (t["a2"] > 0)
                              & (t["theta0"] > 0) & (t["theta0"] < ch.theta))
        assert rows.size
        from pxqama.geometry import equivalent_channels, make_precoders
        from pxqama.hqam import compose_received_constellation
        mode = result.mode(int(rows[0]))
        eqs = equivalent_channels(ch, make_precoders(ch, mode.theta0, mode.alphas), mode)
        for u in (1, 2):
            ci, cq = compose_received_constellation(mode, eqs[u - 1], u)
            assert ci.size * cq.size == 16

    def test_workers_do_not_change_results(self, ch, result):
        par = sweep(ch, small_grid(), workers=2)
        np.testing.assert_array_equal(par.table, result.table)

    def test_free_ratios(self, ch):
        sw = sweep(ch, small_grid(ratios=(2.0, 3.0), sizes=((1, 0, 1, 0),)))
        assert set(np.unique(sw.table["ratio1"])) == {2.0, 3.0}
        np.testing.assert_allclose(evaluate_mode(sw.mode(len(sw) - 1), ch).rates,
                                   sw.rates[-1], atol=1e-12)


class TestOutput:
    def test_csv_round_trip_and_determinism(self, tmp_path):
        ch = channels(12, 12, 0.6)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_region_csv(a, build_region(sweep(ch, small_grid())))
        write_region_csv(b, build_region(sweep(ch, small_grid())))
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text().splitlines()[0].split(",")
        assert header == ["mode_id", "m0", "n0", "m1", "n1", "theta0", "a0", "a1", "a2",
                          "assignment_mask_i", "assignment_mask_q", "R1", "R2", "on_hull"]
        back = read_region_csv(a)
        orig = sweep(ch, small_grid())
        np.testing.assert_allclose(back.rates, orig.rates, rtol=1e-11)
        assert build_region(back).area == pytest.approx(build_region(orig).area, rel=1e-11)

    def test_summary(self):
        ch = channels()
        region = build_region(sweep(ch, small_grid()))
        sel = select_modes(region, min(3, region.n_frontier))
        s = region_summary(region, sel)
        assert s["n_frontier"] == len(s["hull_vertices"])
        assert s["selected_modes"]["area_ratio"] == pytest.approx(sel.ratio)
        assert {"m0", "alphas", "assignment_mask_i"} <= set(s["selected_modes"]["modes"][0])
