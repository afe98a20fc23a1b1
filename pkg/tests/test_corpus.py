import math

import numpy as np
import pytest

from curverec import (CorpusConfig, CurveRecord, CurveSet, EmptyCorpus,
                      FragmentRef, ParseError, Polyline, corpus_checksum,
                      endpoint_inducers, enumerate_fragments, fragment_pairs,
                      load_curves, synth_corpus, window_angles, write_curves)
from curverec.corpus import MIN_CURVE_POINTS, SYNTH_FAMILIES


def make_record(cid, pts, image="img-0"):
    return CurveRecord(cid, image, Polyline(np.asarray(pts, dtype=float)))


SQUIGGLE = [[0.0, 0.0], [1.0, 0.5], [2.0, 0.0], [3.25, -0.5], [4.0, 0.25]]


class TestCanonicalFormat:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        curves = [make_record(i, rng.uniform(-50, 50, size=(6, 2)), f"im-{i % 2}")
                  for i in range(5)]
        path = tmp_path / "c.curves"
        write_curves(path, curves)
        back = load_curves(path)
        assert len(back) == 5
        assert back.skipped == 0
        for a, b in zip(curves, back):
            assert b.curve_id == a.curve_id
            assert b.image_id == a.image_id
            assert b.points.tolist() == a.points.tolist()

    def test_missing_header(self, tmp_path):
        p = tmp_path / "bad.curves"
        p.write_text("curve 0 im 2\n0 0\n1 1\n")
        with pytest.raises(ParseError) as exc:
            load_curves(p)
        assert exc.value.line == 1

    def test_bad_coordinate_reports_line(self, tmp_path):
        p = tmp_path / "bad.curves"
        p.write_text("CURVES v1\ncurve 0 im 4\n0 0\n1 0\nnope 0\n3 0\n")
        with pytest.raises(ParseError) as exc:
            load_curves(p)
        assert exc.value.line == 5

    def test_truncated_curve(self, tmp_path):
        p = tmp_path / "bad.curves"
        p.write_text("CURVES v1\ncurve 7 im 4\n0 0\n1 0\n")
        with pytest.raises(ParseError, match="truncated"):
            load_curves(p)

    def test_duplicate_id_rejected(self, tmp_path):
        p = tmp_path / "bad.curves"
        block = "curve 3 im 4\n0 0\n1 0\n2 0\n3 1\n"
        p.write_text("CURVES v1\n" + block + block)
        with pytest.raises(ParseError, match="duplicate"):
            load_curves(p)

    def test_short_curves_are_skipped_and_counted(self, tmp_path):
        p = tmp_path / "mix.curves"
        p.write_text(
            "CURVES v1\n"
            "curve 0 im 3\n0 0\n1 0\n2 0\n"          # too few points
            "curve 1 im 4\n5 5\n5 5\n5 5\n5 5\n"      # degenerate
            "curve 2 im 4\n0 0\n1 0\n2 0\n3 1\n"
        )
        got = load_curves(p)
        assert len(got) == 1
        assert got.skipped == 2
        assert got[0].curve_id == 2

    def test_all_skipped_is_empty_corpus(self, tmp_path):
        p = tmp_path / "empty.curves"
        p.write_text("CURVES v1\ncurve 0 im 2\n0 0\n1 0\n")
        with pytest.raises(EmptyCorpus):
            load_curves(p)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            load_curves(tmp_path / "x", fmt="protobuf")


class TestCemFormat:
    def test_reads_contours(self, tmp_path):
        p = tmp_path / "scene.cem"
        p.write_text(
            "# an annotation file\n"
            "width=640\n"
            "[BEGIN CONTOUR]\n"
            "0.0 0.0\n1.0 0.25\n2.0 0.0\n3.0 -0.5\n"
            "[END CONTOUR]\n"
            "[BEGIN CONTOUR]\n"
            "9.0 9.0\n9.0 9.0\n"
            "[END CONTOUR]\n"
        )
        got = load_curves(p, fmt="cem")
        assert len(got) == 1
        assert got.skipped == 1
        assert got[0].image_id == "scene"
        assert got[0].points.shape == (4, 2)

    def test_directory_of_files(self, tmp_path):
        body = "[BEGIN CONTOUR]\n0 0\n1 0\n2 1\n3 1\n[END CONTOUR]\n"
        (tmp_path / "a.cem").write_text(body)
        (tmp_path / "b.cem").write_text(body)
        got = load_curves(tmp_path, fmt="cem")
        assert len(got) == 2
        assert {rec.image_id for rec in got} == {"a", "b"}
        assert [rec.curve_id for rec in got] == [0, 1]


class TestFragmentEnumeration:
    def test_five_point_curve(self):
        i, j = fragment_pairs(5, CorpusConfig())
        assert list(zip(i.tolist(), j.tolist())) == [(0, 3), (0, 4), (1, 4)]

    def test_count_formula(self):
        # stride 1: every (i, j) with j - i >= min_points - 1
        for n in (4, 5, 9, 20):
            i, _ = fragment_pairs(n, CorpusConfig())
            w = n - (MIN_CURVE_POINTS - 1)
            assert len(i) == w * (w + 1) // 2

    def test_stride_thins_both_ends(self):
        i, j = fragment_pairs(8, CorpusConfig(fragment_stride=2))
        pairs = set(zip(i.tolist(), j.tolist()))
        # starts step by the stride; ends step by the stride from the
        # shortest fragment at each start
        assert all(a % 2 == 0 and (b - a - 3) % 2 == 0 for a, b in pairs)
        assert pairs == {(0, 3), (0, 5), (0, 7), (2, 5), (2, 7), (4, 7)}

    def test_enumerate_covers_all_curves(self):
        curves = [make_record(0, SQUIGGLE), make_record(1, SQUIGGLE[:4])]
        refs = list(enumerate_fragments(curves))
        assert refs == [FragmentRef(0, 0, 3), FragmentRef(0, 0, 4),
                        FragmentRef(0, 1, 4), FragmentRef(1, 0, 3)]

    def test_reservoir_is_deterministic_and_bounded(self):
        curves = synth_corpus("smoothed_random_walks", 40, seed=2)
        cfg = CorpusConfig(max_fragments=100, seed=9)
        first = list(enumerate_fragments(curves, cfg))
        second = list(enumerate_fragments(curves, cfg))
        assert first == second
        assert len(first) == 100
        other = list(enumerate_fragments(curves, CorpusConfig(max_fragments=100, seed=10)))
        assert other != first

    def test_reservoir_smaller_population_untouched(self):
        curves = [make_record(0, SQUIGGLE)]
        cfg = CorpusConfig(max_fragments=50)
        assert list(enumerate_fragments(curves, cfg)) == list(enumerate_fragments(curves))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CorpusConfig(min_fragment_points=1)
        with pytest.raises(ValueError):
            CorpusConfig(tangent_window=5, min_fragment_points=4)
        with pytest.raises(ValueError):
            CorpusConfig(fragment_stride=0)


class TestTangents:
    def test_window_angles_on_exact_line(self):
        ang = 0.7
        t = np.linspace(0, 20, 9)
        pts = np.stack([t * math.cos(ang), t * math.sin(ang)], axis=1)
        got = window_angles(pts, 3)
        assert got.shape == (7,)
        assert np.allclose(got, ang, atol=1e-12)

    def test_window_angles_follow_chord_direction(self):
        pts = np.array([[0, 0], [-1, 0], [-2, 0], [-3, 0]], dtype=float)
        got = window_angles(pts, 3)
        assert np.allclose(got, math.pi)

    def test_endpoint_inducers_point_inward(self):
        t = np.linspace(0, 10, 8)
        pts = np.stack([t, np.zeros_like(t)], axis=1)
        rec = make_record(0, pts)
        i1, i2 = endpoint_inducers(rec, 0, 7)
        assert i1.theta == pytest.approx(0.0, abs=1e-12)
        assert i2.theta == pytest.approx(math.pi)
        assert i1.xy == pytest.approx([0.0, 0.0])
        assert i2.xy == pytest.approx([10.0, 0.0])

    def test_endpoint_inducers_validate_range(self):
        rec = make_record(0, SQUIGGLE)
        with pytest.raises(ValueError):
            endpoint_inducers(rec, 3, 3)
        with pytest.raises(ValueError):
            endpoint_inducers(rec, 0, 9)


class TestSynthesis:
    @pytest.mark.parametrize("family", sorted(SYNTH_FAMILIES))
    def test_deterministic(self, family):
        a = synth_corpus(family, 10, seed=4)
        b = synth_corpus(family, 10, seed=4)
        assert corpus_checksum(a) == corpus_checksum(b)
        c = synth_corpus(family, 10, seed=5)
        assert corpus_checksum(c) != corpus_checksum(a)

    def test_image_grouping(self):
        curves = synth_corpus("lines", 30, seed=0)
        ids = [rec.image_id for rec in curves]
        assert ids[0] == "lines-0000"
        assert ids.count("lines-0000") == 25
        assert ids.count("lines-0001") == 5
        few = synth_corpus("lines", 6, seed=0, curves_per_image=2)
        assert len({rec.image_id for rec in few}) == 3

    def test_arcs_lie_on_circles(self):
        for rec in synth_corpus("circular_arcs", 20, seed=1):
            pts = rec.points
            # circle through 3 samples, all points equidistant from it
            ax, ay = pts[0]
            bx, by = pts[len(pts) // 2]
            cx, cy = pts[-1]
            d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
            ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
                  + (cx**2 + cy**2) * (ay - by)) / d
            uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
                  + (cx**2 + cy**2) * (bx - ax)) / d
            r = np.hypot(pts[:, 0] - ux, pts[:, 1] - uy)
            assert np.allclose(r, r[0], rtol=1e-9)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            synth_corpus("parabolas", 3)

    def test_checksum_sensitive_to_points(self):
        a = [make_record(0, SQUIGGLE)]
        bumped = np.asarray(SQUIGGLE, dtype=float)
        bumped[2, 1] += 1e-9
        b = [make_record(0, bumped)]
        assert corpus_checksum(a) != corpus_checksum(b)

    def test_curveset_protocol(self):
        cs = CurveSet([make_record(0, SQUIGGLE)], skipped=3)
        assert len(cs) == 1
        assert cs[0].curve_id == 0
        assert [rec.curve_id for rec in cs] == [0]
