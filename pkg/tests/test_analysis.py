"""The shared analysis layer: reports, range queries, sources, census."""
import numpy as np
import pytest

from posmap import analysis, zoo
from posmap.core import max_abs
from posmap.errors import ParseError, UnsupportedPattern
from posmap.mapmodel import from_matricization
from posmap.serialize import decode_map, encode_map, encode_pattern

REPORT_KEYS = ["input", "star_linear", "hill", "positivity",
               "completely_positive", "pattern", "classification", "verdict",
               "open_questions"]


def test_full_report_shape():
    rep = analysis.analyze_map(zoo.entry("toeplitz2x2").spec)
    assert list(rep.keys()) == REPORT_KEYS
    assert rep["input"]["n"] == 2 and rep["input"]["field"] == "complex"
    assert rep["star_linear"]["is_star_linear"] is True
    assert rep["hill"]["m"] == 3
    assert rep["hill"]["positions"] == [[1, 1], [1, 2], [2, 1]]
    assert rep["positivity"]["status"] == "not_positive"
    assert rep["positivity"]["witness"]["value"] < -1e-6
    assert rep["completely_positive"]["is_completely_positive"] is False
    assert rep["pattern"]["remainder"] == "single"
    assert rep["classification"]["c1"] is False
    assert rep["classification"]["sum_alpha_is_one"] is True
    assert rep["verdict"]["decision"] == "unknown"
    assert rep["verdict"]["reason"] == "independence_fails"
    # complex field, three blocks, nonzero shared remainder: the open case
    assert [o["id"] for o in rep["open_questions"]] == ["complex_2x2_m3"]


def test_report_roundtrips_input():
    sp = zoo.entry("toeplitz2x2").spec
    rep = analysis.analyze_map(sp)
    back = decode_map(rep["input"]["map"])
    assert max_abs(back.L - sp.L) == 0.0


def test_partial_report_for_non_star_linear():
    rng = np.random.default_rng(0)
    sp = from_matricization(rng.standard_normal((4, 4)), "real")
    rep = analysis.analyze_map(sp)
    assert list(rep.keys()) == ["input", "star_linear"]
    assert rep["star_linear"]["is_star_linear"] is False


def test_certified_positivity_violation_in_report():
    spec = zoo.toeplitz_2x2(field="complex", **zoo.TOEPLITZ_FLIP)
    rep = analysis.analyze_map(spec)
    pos = rep["positivity"]
    assert pos["status"] == "not_positive"
    assert pos["witness"] is not None
    assert pos["witness"]["value"] < -1e-6
    assert rep["completely_positive"]["is_completely_positive"] is False


def test_open_question_flags():
    spec = zoo.toeplitz_2x2(field="complex", **zoo.TOEPLITZ_FLIP)
    rep = analysis.analyze_map(spec)
    assert [o["id"] for o in rep["open_questions"]] == ["complex_2x2_m3"]

    # real flip map: same pattern, but the complex question does not apply
    spec_r = zoo.toeplitz_2x2(field="real", **zoo.TOEPLITZ_FLIP)
    rep_r = analysis.analyze_map(spec_r)
    assert rep_r["open_questions"] == []


def test_heterogeneous_open_question():
    rng = np.random.default_rng(13)
    g = rng.standard_normal((3, 3))
    H = g @ g.T + 3 * np.eye(3)
    G = np.zeros((3, 6))
    for c, k in ((0, 0), (2, 0), (3, 1), (5, 1), (4, 2)):
        G[k, c] = 1.0
    sp = analysis.resolve_source(
        {"kind": "choi", "n": 2, "field": "real",
         "matrix": {"field": "real", "rows": 6, "cols": 6,
                    "data": (G.T @ H.T @ G).tolist()}})
    rep = analysis.analyze_map(sp)
    assert rep["pattern"]["remainder"] == "hetero"
    assert rep["verdict"]["decision"] == "unknown"
    assert [o["id"] for o in rep["open_questions"]] == ["heterogeneous_remainder"]


def test_report_is_deterministic():
    spec = zoo.entry("embedded", seed=3).spec
    a = analysis.analyze_map(spec)
    b = analysis.analyze_map(spec)
    assert a == b


def test_convert_map():
    sp = zoo.transpose_map(2)
    out = analysis.convert_map(sp, "choi")
    assert out["kind"] == "choi" and out["n"] == 2
    with pytest.raises(ParseError):
        analysis.convert_map(sp, "kraus")


def test_hill_summary():
    out = analysis.hill_summary(zoo.entry("toeplitz2x2").spec)
    assert out["m"] == 3
    assert out["H"]["rows"] == 3
    assert (out["n"], out["q"], out["field"]) == (2, 2, "complex")


def test_range_query_construction_rung():
    out = analysis.range_query(2, 2, ((0, 0), (1, 1)), np.zeros(2), "real",
                               np.array([1.0, -2.0]))
    assert out["decision"] == "reachable"
    assert out["certified"] is True
    assert out["method"] == "construction"
    assert out["witness"]["branch"] == "a"


def test_range_query_certified_rejection():
    # exceptional real cross with both group sums zero
    positions = ((0, 1), (0, 2), (1, 0), (2, 0))
    out = analysis.range_query(3, 3, positions, np.ones(4), "real",
                               np.array([1.0, -1.0, 1.0, -1.0]))
    assert out["decision"] == "not_reachable"
    assert out["certified"] is True
    assert out["method"] == "exceptional_range_test"


def test_range_query_als_rung():
    # non-C1 pattern, reachable target: the closed forms bail out and the
    # search must pick it up
    positions = ((0, 0), (0, 1), (1, 1))
    out = analysis.range_query(2, 2, positions, np.zeros(3), "real",
                               np.array([1.0, 1.0, 1.0]))
    assert out["decision"] == "reachable"
    assert out["certified"] is True
    assert out["method"] == "als"
    assert out["witness"]["residual"] <= 1e-8


def test_range_query_grid_rung():
    positions = ((0, 0), (0, 1), (1, 1))
    out = analysis.range_query(2, 2, positions, np.zeros(3), "real",
                               np.array([1.0, 0.0, 1.0]))
    assert out["decision"] == "not_reachable"
    assert out["certified"] is False
    assert out["method"] == "grid"
    assert out["grid_resolution"] == 13
    assert out["best_residual"] > 0.1


def test_range_query_search_fallback():
    positions = ((0, 0), (0, 1), (1, 1))
    out = analysis.range_query(2, 2, positions, np.zeros(3), "complex",
                               np.array([1.0, 0.0, 1.0]))
    assert out["decision"] == "not_reachable"
    assert out["certified"] is False
    assert out["method"] == "search"


def test_range_from_source_pattern_object():
    obj = encode_pattern(2, 2, ((0, 0), (1, 1)))
    out = analysis.range_from_source(obj, [1.0, 2.0], field="real")
    assert out["decision"] == "reachable"
    assert out["method"] == "construction"


def test_range_from_source_map_object():
    out = analysis.range_from_source({"zoo": "upper2x2"}, [1.0, 1.0, 1.0])
    assert out["decision"] == "reachable"
    out = analysis.range_from_source({"zoo": "upper2x2"}, [1.0, 0.0, 1.0])
    assert out["decision"] == "not_reachable"
    assert out["certified"] is False


def test_range_from_source_guards():
    obj = encode_pattern(2, 2, ((0, 0), (1, 1)), remainder="hetero")
    with pytest.raises(UnsupportedPattern):
        analysis.range_from_source(obj, [1.0, 2.0], field="real")
    with pytest.raises(ParseError):
        analysis.range_from_source(encode_pattern(2, 2, ((0, 0), (1, 1))),
                                   [1.0, 2.0, 3.0], field="real")


def test_resolve_source_zoo():
    sp = analysis.resolve_source({"zoo": "toeplitz2x2", "field": "real",
                                  "params": {"a1": 1.0, "b2": 1.0, "b3": -2.0,
                                             "b1": 0.0, "c1": 0.0, "c3": 0.0}})
    assert sp.field == "real"
    assert sp.L[0, 0] == 1.0
    with pytest.raises(ParseError):
        analysis.resolve_source({"zoo": "toeplitz2x2",
                                 "params": {"field": "real"}})
    with pytest.raises(ParseError):
        analysis.resolve_source({"zoo": "random", "params": {"seed": 3}})
    with pytest.raises(ParseError):
        analysis.resolve_source([1, 2, 3])


def test_resolve_source_wrapped_and_bare():
    sp = zoo.transpose_map(2, "real")
    assert max_abs(analysis.resolve_source(encode_map(sp, "choi")).L - sp.L) == 0.0
    bare = {"field": "real", "rows": 4, "cols": 4, "data": sp.L.tolist()}
    assert max_abs(analysis.resolve_source(bare).L - sp.L) == 0.0
    got = analysis.resolve_source(bare, as_choi=True, n=2)
    assert max_abs(got.L - sp.L) == 0.0


def test_census_lines():
    out = analysis.census_2x2()
    lines = out["lines"]
    assert len(lines) == 9
    assert any("OPEN" in ln for ln in lines)
    assert analysis.census_2x2() == out
