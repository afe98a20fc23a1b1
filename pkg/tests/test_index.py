import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from curverec import (ChecksumMismatch, CoincidentInducers, FragmentIndex,
                      Inducer, QueryTolerances, RelativeConfiguration,
                      Similarity2, SnapshotError, apply_similarity, build_index,
                      canonicalize, synth_corpus)
from oracles import scan_same_scale, scan_scale_invariant

coords = st.floats(-500.0, 500.0, allow_nan=False, allow_infinity=False)
angles = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


def random_pair(data):
    x1 = data.draw(coords)
    y1 = data.draw(coords)
    x2 = data.draw(coords)
    y2 = data.draw(coords)
    assume(math.hypot(x2 - x1, y2 - y1) > 1e-6)
    return (Inducer.of(x1, y1, data.draw(angles)),
            Inducer.of(x2, y2, data.draw(angles)))


class TestCanonicalize:
    def test_coincident_raises(self):
        with pytest.raises(CoincidentInducers):
            canonicalize(Inducer.of(2, 2, 0), Inducer.of(2, 2, 1))

    def test_axis_aligned_pair_is_its_own_canonical_form(self):
        cfg, t = canonicalize(Inducer.of(0, 0, 0), Inducer.of(5, -2, 1.0))
        assert cfg.p_x == pytest.approx(5.0)
        assert cfg.p_y == pytest.approx(-2.0)
        assert cfg.p_theta == pytest.approx(1.0)
        assert not cfg.reflected
        assert np.allclose(t.transform_points(np.array([[3.0, 4.0]])), [[3.0, 4.0]])

    def test_upper_half_plane_gets_reflected(self):
        cfg, _ = canonicalize(Inducer.of(0, 0, 0), Inducer.of(5, 2, 1.0))
        assert cfg.reflected
        assert cfg.p_y == pytest.approx(-2.0)
        assert cfg.p_theta == pytest.approx(2 * math.pi - 1.0)

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_map_sends_pair_to_configuration(self, data):
        i1, i2 = random_pair(data)
        cfg, t = canonicalize(i1, i2)
        assert cfg.p_y <= 0.0
        origin = t.transform_points(np.array([i1.xy]))[0]
        target = t.transform_points(np.array([i2.xy]))[0]
        span = max(1.0, cfg.norm)
        assert np.allclose(origin, 0.0, atol=1e-9 * span)
        assert np.allclose(target, [cfg.p_x, cfg.p_y], atol=1e-9 * span)
        assert t.transform_angle(i1.theta) in (0.0, pytest.approx(0.0, abs=1e-12))
        assert t.transform_angle(i2.theta) == pytest.approx(cfg.p_theta, abs=1e-9)

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_mirrored_pair_same_configuration(self, data):
        i1, i2 = random_pair(data)
        a, _ = canonicalize(i1, i2)
        # on the p_y = 0 boundary the normalizing reflection has no
        # purchase and mirror twins keep opposite orientations
        assume(abs(a.p_y) > 1e-9 * a.norm)
        mirror = Similarity2(reflect=True)
        m1 = apply_similarity(mirror, i1)
        m2 = apply_similarity(mirror, i2)
        b, _ = canonicalize(m1, m2)
        assert a.p_x == pytest.approx(b.p_x, abs=1e-9 * max(1.0, a.norm))
        assert a.p_y == pytest.approx(b.p_y, abs=1e-9 * max(1.0, a.norm))
        # orientation may sit on either side of the wrap seam
        d = abs(a.p_theta - b.p_theta)
        assert min(d, 2 * math.pi - d) < 1e-9

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_similarity_equivariance(self, data):
        i1, i2 = random_pair(data)
        sim = Similarity2(rotation=data.draw(angles),
                          scale=data.draw(st.floats(0.1, 10.0)),
                          translation=(data.draw(coords), data.draw(coords)),
                          reflect=data.draw(st.booleans()))
        a, _ = canonicalize(i1, i2)
        assume(abs(a.p_y) > 1e-9 * a.norm)
        b, _ = canonicalize(apply_similarity(sim, i1), apply_similarity(sim, i2))
        tol = 1e-8 * max(1.0, b.norm)
        assert b.p_x == pytest.approx(a.p_x * sim.scale, abs=tol)
        assert b.p_y == pytest.approx(a.p_y * sim.scale, abs=tol)
        d = abs(a.p_theta - b.p_theta)
        assert min(d, 2 * math.pi - d) < 1e-8


class TestRelativeConfiguration:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            RelativeConfiguration(1.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            RelativeConfiguration(0.0, 0.0, 0.0)

    def test_phi_range_and_seam(self):
        assert RelativeConfiguration(1.0, -1.0, 0.0).phi == pytest.approx(-math.pi / 4)
        assert RelativeConfiguration(-1.0, 0.0, 0.0).phi == -math.pi
        assert RelativeConfiguration(1.0, 0.0, 0.0).phi == 0.0

    def test_scaled(self):
        p = RelativeConfiguration(3.0, -4.0, 1.0)
        q = p.scaled(2.0)
        assert (q.p_x, q.p_y) == (6.0, -8.0)
        assert q.p_theta == p.p_theta
        assert q.norm == pytest.approx(10.0)


@pytest.fixture(scope="module")
def small_index():
    return build_index(synth_corpus("smoothed_random_walks", 30, seed=7))


class TestQueries:
    def test_self_match_at_zero_tolerance(self, small_index):
        idx = small_index
        tol = QueryTolerances(0.0, 0.0, 0.0)
        for i in (0, idx.n_fragments // 2, idx.n_fragments - 1):
            p = idx.config_of(i)
            got = idx.same_scale_indices(p, tol)
            assert i in got.tolist()
            matches = idx.query_same_scale(p, tol)
            align = dict((m.ref, a) for m, a in matches)[idx.fragment_ref(i)]
            assert align.rotation == pytest.approx(0.0, abs=1e-12)
            assert align.scale == pytest.approx(1.0, abs=1e-12)

    def test_scaled_query_alignment_scale(self, small_index):
        idx = small_index
        i = 17
        p = idx.config_of(i).scaled(7.0)
        hits = idx.scale_invariant_indices(p, QueryTolerances(0.05, 1e-9, 1e-9))
        assert i in hits.tolist()
        matches = idx.query_scale_invariant(p, QueryTolerances(0.05, 1e-9, 1e-9))
        align = dict((m.ref, a) for m, a in matches)[idx.fragment_ref(i)]
        assert align.scale == pytest.approx(7.0, rel=1e-12)
        assert align.rotation == pytest.approx(0.0, abs=1e-12)

    def test_alignment_lands_on_query_offset(self, small_index):
        idx = small_index
        p = idx.config_of(40).scaled(1.8)
        hits = idx.scale_invariant_indices(p)
        assert len(hits) >= 1
        stack = idx.aligned_resampled(hits, p, 16)
        assert stack.shape == (len(hits), 16, 2)
        assert np.allclose(stack[:, 0, :], 0.0, atol=1e-9 * p.norm)
        assert np.allclose(stack[:, -1, :], [p.p_x, p.p_y], atol=1e-9 * p.norm)

    def test_center_points_sit_mid_arc(self, small_index):
        idx = small_index
        p = idx.config_of(3)
        hits = idx.scale_invariant_indices(p)
        centers = idx.aligned_center_points(hits, p)
        stack = idx.aligned_resampled(hits, p, 257)
        assert np.allclose(centers, stack[:, 128, :], atol=1e-6 * p.norm)

    def test_bucketed_equals_scan_same_scale(self, small_index):
        idx = small_index
        rng = np.random.default_rng(41)
        for _ in range(8):
            i = int(rng.integers(idx.n_fragments))
            base = idx.config_of(i)
            jittered = RelativeConfiguration(
                base.p_x * (1 + rng.normal(0, 0.01)),
                base.p_y * (1 + rng.normal(0, 0.01)) - abs(rng.normal(0, 1e-6)),
                base.p_theta + rng.normal(0, 0.05),
            )
            tol = QueryTolerances(float(rng.uniform(0, 0.2)),
                                  float(rng.uniform(0, 0.2)),
                                  float(rng.uniform(0, 0.3)))
            fast = idx.same_scale_indices(jittered, tol).tolist()
            slow = scan_same_scale(idx, jittered, tol)
            full = idx.same_scale_indices(jittered, tol, exhaustive=True).tolist()
            assert fast == slow == full

    def test_bucketed_equals_scan_scale_invariant(self, small_index):
        idx = small_index
        rng = np.random.default_rng(42)
        for _ in range(8):
            i = int(rng.integers(idx.n_fragments))
            p = idx.config_of(i).scaled(float(rng.uniform(0.2, 5.0)))
            tol = QueryTolerances(0.05,
                                  float(rng.uniform(0, 0.3)),
                                  float(rng.uniform(0, 0.3)))
            fast = idx.scale_invariant_indices(p, tol).tolist()
            slow = scan_scale_invariant(idx, p, tol)
            full = idx.scale_invariant_indices(p, tol, exhaustive=True).tolist()
            assert fast == slow == full

    def test_wide_angle_tolerance_falls_back_to_scan(self, small_index):
        idx = small_index
        p = idx.config_of(5)
        tol = QueryTolerances(0.05, 2.0, 0.25)
        fast = idx.scale_invariant_indices(p, tol).tolist()
        slow = scan_scale_invariant(idx, p, tol)
        assert fast == slow

    def test_distance_threshold_location(self):
        # the match boundary sits at t1_rel_dist times the query offset
        curves = synth_corpus("lines", 5, seed=1)
        idx = build_index(curves)
        i = 0
        base = idx.config_of(i)
        shifted = RelativeConfiguration(base.p_x * 1.05, base.p_y * 1.05,
                                        base.p_theta)
        d = math.hypot(base.p_x - shifted.p_x, base.p_y - shifted.p_y)
        ratio = d / shifted.norm
        above = QueryTolerances(ratio * (1 + 1e-12), 0.0, 0.0)
        below = QueryTolerances(ratio * (1 - 1e-12), 0.0, 0.0)
        assert i in idx.same_scale_indices(shifted, above).tolist()
        assert i not in idx.same_scale_indices(shifted, below).tolist()

    def test_mirror_twin_corpus_doubles_matches(self):
        base = synth_corpus("smoothed_random_walks", 10, seed=3)
        mirror = Similarity2(reflect=True)
        twins = [type(rec)(rec.curve_id + 1000, "m-" + rec.image_id,
                           apply_similarity(mirror, rec.polyline))
                 for rec in base]
        idx = build_index(list(base) + twins)
        p = idx.config_of(0)
        hits = idx.same_scale_indices(p, QueryTolerances(1e-6, 0.0, 1e-6))
        refs = [idx.fragment_ref(int(h)) for h in hits]
        ids = {r.curve_id for r in refs}
        assert 0 in ids and 1000 in ids


class TestSnapshot:
    def test_round_trip(self, tmp_path, small_index):
        path = tmp_path / "walks.idx"
        small_index.save(path)
        loaded = FragmentIndex.load(path)
        assert loaded.n_fragments == small_index.n_fragments
        assert loaded.tolerances == small_index.tolerances
        assert loaded.config == small_index.config
        p = small_index.config_of(11)
        assert (loaded.same_scale_indices(p).tolist()
                == small_index.same_scale_indices(p).tolist())
        assert (loaded.scale_invariant_indices(p).tolist()
                == small_index.scale_invariant_indices(p).tolist())
        got = loaded.fragment_points(11)
        assert got.tolist() == small_index.fragment_points(11).tolist()

    def test_load_with_matching_corpus(self, tmp_path):
        curves = synth_corpus("lines", 8, seed=2)
        idx = build_index(curves)
        path = tmp_path / "l.idx"
        idx.save(path)
        loaded = FragmentIndex.load(path, curves=curves)
        assert loaded.n_fragments == idx.n_fragments

    def test_load_with_wrong_corpus(self, tmp_path):
        idx = build_index(synth_corpus("lines", 8, seed=2))
        path = tmp_path / "l.idx"
        idx.save(path)
        with pytest.raises(ChecksumMismatch):
            FragmentIndex.load(path, curves=synth_corpus("lines", 8, seed=3))

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.idx"
        p.write_bytes(b"not an index at all")
        with pytest.raises(SnapshotError):
            FragmentIndex.load(p)

    def test_truncated(self, tmp_path, small_index):
        path = tmp_path / "t.idx"
        small_index.save(path)
        whole = path.read_bytes()
        path.write_bytes(whole[: len(whole) - 64])
        with pytest.raises(SnapshotError):
            FragmentIndex.load(path)


class TestDiagnostics:
    def test_bucket_occupancy_counts_everything(self, small_index):
        occ = small_index.bucket_occupancy()
        for key in ("same_scale", "scale_free"):
            stats = occ[key]
            assert stats["cells"] > 0
            assert stats["max"] >= 1
            total = sum(len(v) for v in getattr(
                small_index, "_ss_grid" if key == "same_scale" else "_sf_grid").values())
            assert total == small_index.n_fragments
