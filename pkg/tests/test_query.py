"""Query layer: validation, search order, witnesses, stats, batching."""

import pytest

from squery import dsl, trace, world
from squery.compiler import translate
from squery.errors import ConfigError
from squery.query import (batch_query, correspondence_candidates,
                          match_window, query, query_source)

WITNESS = {"ego": "car2", "otherCar": "car1"}


def gappy_trace():
    def obj(x):
        return {"pos": [x, 0], "heading": 0.0, "behaviors": ["FollowLane"]}
    frames = []
    for t in range(5):
        objs = {"x1": obj(t)}
        if t < 3:
            objs["x2"] = obj(t + 50)
        frames.append({"t": float(t), "objs": objs})
    return trace.trace_from_dict({
        "hz": 1.0,
        "objects": [{"id": "x1", "class": "Car"},
                    {"id": "x2", "class": "Car"}],
        "frames": frames,
    })


class TestValidation:
    def test_duration_bounds(self, avoid_ast, two_car_trace, two_lane_map):
        with pytest.raises(ConfigError, match="at least 1"):
            query(avoid_ast, two_car_trace, 0, road_map=two_lane_map)
        with pytest.raises(ConfigError, match="exceeds the trace length"):
            query(avoid_ast, two_car_trace, 6, road_map=two_lane_map)

    def test_map_required_when_regions_are_referenced(self, avoid_ast,
                                                      two_car_trace):
        with pytest.raises(ConfigError, match="road map"):
            query(avoid_ast, two_car_trace, 5)

    def test_unknown_region(self, two_car_trace, two_lane_map):
        ast = dsl.parse("ego = new Car on Lane9\n")
        with pytest.raises(ConfigError, match="unknown regions: Lane9"):
            query(ast, two_car_trace, 1, road_map=two_lane_map)

    def test_mapless_program_needs_no_map(self, two_car_trace):
        r = query(dsl.parse("ego = new Car\n"), two_car_trace, 1)
        assert r.matched


class TestCorrespondences:
    def test_backtracking_order(self, avoid_ast, two_car_trace):
        got = list(correspondence_candidates(avoid_ast, two_car_trace, 5))
        assert got == [{"ego": "car1", "otherCar": "car2"},
                       {"ego": "car2", "otherCar": "car1"}]

    def test_presence_prefilter(self):
        tr = gappy_trace()
        # x2 is only around for the first 3 frames
        one = dsl.parse("a = new Car\n")
        assert list(correspondence_candidates(one, tr, 4)) == [{"a": "x1"}]
        assert list(correspondence_candidates(one, tr, 3)) == \
            [{"a": "x1"}, {"a": "x2"}]
        two = dsl.parse("a = new Car\nb = new Car\n")
        assert list(correspondence_candidates(two, tr, 4)) == []
        assert len(list(correspondence_candidates(two, tr, 3))) == 2

    def test_class_prefilter(self, two_car_trace):
        ast = dsl.parse("a = new Truck\n")
        assert list(correspondence_candidates(ast, two_car_trace, 1)) == []


class TestQuery:
    def test_fixture_match(self, avoid_ast, two_car_trace, two_lane_map):
        r = query(avoid_ast, two_car_trace, 5, road_map=two_lane_map)
        assert r.matched
        assert r.witness.correspondence == WITNESS
        assert r.witness.window_start == 0
        assert r.stats.correspondences_tried == 2
        assert r.stats.windows_checked == 2
        assert not r.stats.timed_out
        assert r.witnesses == []    # only populated by find_all

    def test_matching_is_monotone_in_duration(self, avoid_ast,
                                              two_car_trace, two_lane_map):
        for m in range(1, 6):
            assert query(avoid_ast, two_car_trace, m,
                         road_map=two_lane_map).matched, m

    def test_find_all_collects_every_window(self, avoid_ast, two_car_trace,
                                            two_lane_map):
        r = query(avoid_ast, two_car_trace, 3, road_map=two_lane_map,
                  find_all=True)
        assert [(w.correspondence, w.window_start) for w in r.witnesses] \
            == [(WITNESS, 0), (WITNESS, 1), (WITNESS, 2)]
        assert r.witness == r.witnesses[0]
        assert r.stats.correspondences_tried == 2
        assert r.stats.windows_checked == 6

    def test_zero_timeout_stops_before_any_window(self, avoid_ast,
                                                  two_car_trace,
                                                  two_lane_map):
        r = query(avoid_ast, two_car_trace, 5, road_map=two_lane_map,
                  timeout=0.0)
        assert not r.matched
        assert r.stats.timed_out
        assert r.stats.windows_checked == 0

    def test_result_dict_shape(self, avoid_ast, two_car_trace,
                               two_lane_map):
        d = query(avoid_ast, two_car_trace, 5,
                  road_map=two_lane_map).to_dict()
        assert set(d) == {"matched", "witness", "stats"}
        assert d["witness"] == {"correspondence": WITNESS,
                                "window_start": 0}
        assert set(d["stats"]) == {"correspondences_tried",
                                   "windows_checked", "wall_time_s",
                                   "timed_out"}


class TestMatchWindow:
    def test_single_pair_checks(self, avoid_ast, two_car_trace,
                                two_lane_map):
        bundle = translate(avoid_ast)
        cones = world.object_cones(avoid_ast)
        assert match_window(avoid_ast, bundle, two_car_trace, 0, 5,
                            WITNESS, two_lane_map, cones)
        assert not match_window(avoid_ast, bundle, two_car_trace, 0, 5,
                                {"ego": "car1", "otherCar": "car2"},
                                two_lane_map, cones)

    def test_unknown_trace_id_is_a_non_match(self, avoid_ast,
                                             two_car_trace, two_lane_map):
        bundle = translate(avoid_ast)
        corr = {"ego": "ghost", "otherCar": "car1"}
        assert not match_window(avoid_ast, bundle, two_car_trace, 0, 1,
                                corr, two_lane_map, {})


class TestConvenienceWrappers:
    def test_query_source(self, two_car_trace):
        r = query_source("ego = new Car\n", two_car_trace, 1)
        assert r.matched
        assert r.witness.correspondence == {"ego": "car1"}

    def test_batch_query_isolates_failures(self, avoid_ast, two_car_trace,
                                           two_lane_map):
        short = trace.trace_from_dict({
            "hz": 1.0,
            "objects": [{"id": "x1", "class": "Car"}],
            "frames": [{"t": 0.0, "objs": {
                "x1": {"pos": [0, 0], "heading": 0.0, "behaviors": []}}}],
        })
        out = batch_query(avoid_ast, {"hit": two_car_trace, "short": short},
                          5, road_map=two_lane_map)
        assert set(out) == {"hit", "short"}
        assert out["hit"]["matched"] is True
        assert out["short"] == {
            "error": "ConfigError: minimum duration 5 exceeds the trace "
                     "length 1"}
