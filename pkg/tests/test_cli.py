"""End to end tests of the command line front end.

Every test drives cli.main in process and captures stdout/stderr, so exit
codes and display text are pinned exactly.  Server-mode tests reroute the
httpx module-level helpers onto a TestClient, which exercises the real
HTTP layer without opening a socket.
"""

import io
import json

import pytest

from posmap import __version__, analysis, cli, zoo

HILL_TOEPLITZ_TEXT = """\
hill factorization over the complex field: 2x2 -> 2x2, m = 3
positions: (1,1) (1,2) (2,1)
H:
  [ 2      0      0 ]
  [ 0    1.5  -0.75 ]
  [ 0  -0.75      0 ]
Ahat:
  [ 1  0  0  1 ]
  [ 0  0  1  0 ]
  [ 0  1  0  0 ]
"""

ANALYZE_FLIP_REAL_TEXT = """\
map: 2x2 -> 2x2 over the real field
*-linear: yes
  deviations: hermitian 0, shuffle 0, entrywise 0 (tol 1e-09, scale 2)
factorization: m = 3; positions (1,1) (1,2) (2,1)
positivity: no violation found (min value seen 0 over 64 starts, seed 42)
completely positive: no (min eigenvalue -1.56155)
pattern: remainder single
classification: C1 fails; C2 none; sum of remainder coefficients is 1
verdict: coincidence unknown [independence fails; selections tried 2]
"""

FLIP_ARGS = ["--set", "a1=1,b2=1,b3=-2", "--field", "real"]


def run(capsys, argv):
    rc = cli.main(argv)
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def nonstar_wire():
    """A real matricization whose Choi matrix is not Hermitian."""
    data = [[1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0]]
    return {"kind": "matricization", "n": 2, "q": 2, "field": "real",
            "matrix": {"field": "real", "rows": 4, "cols": 4, "data": data}}


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


# ------------------------------------------------------------ basic text


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out == f"posmap {__version__}\n"


def test_hill_display_pinned(capsys):
    rc, out, _ = run(capsys, ["hill", "zoo:toeplitz2x2"])
    assert rc == 0
    assert out == HILL_TOEPLITZ_TEXT


def test_analyze_flip_real_display_pinned(capsys):
    rc, out, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", *FLIP_ARGS])
    assert rc == 0
    assert out == ANALYZE_FLIP_REAL_TEXT


def test_range_unreachable_display_pinned(capsys):
    rc, out, _ = run(capsys, ["range", "zoo:upper2x2", "--y", "1,0,1"])
    assert rc == 0
    assert out == "y = (1, 0, 1): not reachable (search; not certified)\n"


def test_range_reachable_shows_witness(capsys):
    rc, out, _ = run(capsys, ["range", "zoo:upper2x2", "--y", "1,1,1"])
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "y = (1, 1, 1): reachable (als; certified)"
    assert lines[1].startswith("  witness [branch als] z = (")
    assert "residual" in lines[1]


def test_convert_display(capsys):
    rc, out, _ = run(capsys, ["convert", "zoo:transpose2", "--to", "choi"])
    assert rc == 0
    assert out == ("choi form: 4x4 over the complex field (n = 2, q = 2)\n"
                   "  [ 1  0  0  0 ]\n"
                   "  [ 0  0  1  0 ]\n"
                   "  [ 0  1  0  0 ]\n"
                   "  [ 0  0  0  1 ]\n")


def test_case2x2_text_matches_census(capsys):
    rc, out, _ = run(capsys, ["case2x2"])
    assert rc == 0
    assert out.splitlines() == analysis.census_2x2()["lines"]


# ------------------------------------------------------------ json modes


def test_analyze_json_matches_library(capsys):
    rc, out, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json"])
    assert rc == 0
    want = analysis.analyze_map(zoo.entry("toeplitz2x2").spec)
    assert json.loads(out) == want


def test_json_output_deterministic(capsys):
    _, first, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json"])
    _, again, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json"])
    assert first == again


def test_set_complex_value(capsys):
    rc, out, _ = run(capsys, ["hill", "zoo:toeplitz2x2",
                              "--set", "b3=-2+1j", "--json"])
    assert rc == 0
    want = analysis.hill_summary(zoo.entry("toeplitz2x2", b3=-2 + 1j).spec)
    assert json.loads(out) == want


def test_set_seed_routed_to_zoo(capsys):
    _, a, _ = run(capsys, ["analyze", "zoo:random", "--set", "seed=7",
                           "--json"])
    _, b, _ = run(capsys, ["analyze", "zoo:random", "--set", "seed=7",
                           "--json"])
    _, c, _ = run(capsys, ["analyze", "zoo:random", "--set", "seed=8",
                           "--json"])
    assert a == b
    assert json.loads(a)["input"] != json.loads(c)["input"]


# ---------------------------------------------------------- file sources


def test_stdin_source(capsys, monkeypatch):
    wire = analysis.convert_map(zoo.transpose_map(2, "real"),
                                "matricization")
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(wire)))
    rc, out, _ = run(capsys, ["analyze", "-", "--json"])
    assert rc == 0
    want = analysis.analyze_map(zoo.transpose_map(2, "real"))
    assert json.loads(out) == want


def test_file_source_convert(capsys, tmp_path):
    wire = analysis.convert_map(zoo.transpose_map(2, "real"),
                                "matricization")
    path = write_json(tmp_path, "map.json", wire)
    rc, out, _ = run(capsys, ["convert", path, "--to", "choi", "--json"])
    assert rc == 0
    want = analysis.convert_map(zoo.transpose_map(2, "real"), "choi")
    assert json.loads(out) == want


def test_bare_matrix_with_choi_flag(capsys, tmp_path):
    choi = analysis.convert_map(zoo.transpose_map(2, "real"), "choi")
    path = write_json(tmp_path, "choi.json", choi["matrix"])
    rc, out, _ = run(capsys, ["convert", path, "--choi", "--n", "2",
                              "--field", "real", "--to", "matricization",
                              "--json"])
    assert rc == 0
    want = analysis.convert_map(zoo.transpose_map(2, "real"),
                                "matricization")
    assert json.loads(out)["matrix"] == want["matrix"]


# --------------------------------------------------------- emit-witness


def test_emit_witness_from_analyze(capsys, tmp_path):
    path = tmp_path / "witness.json"
    rc, out, err = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json",
                                "--emit-witness", str(path)])
    assert rc == 0
    assert err == ""
    report = json.loads(out)
    witness = json.loads(path.read_text(encoding="utf-8"))
    assert witness == report["positivity"]["witness"]
    assert witness["value"] < -1e-6


def test_emit_witness_when_none(capsys, tmp_path):
    path = tmp_path / "witness.json"
    rc, _, err = run(capsys, ["analyze", "zoo:toeplitz2x2", *FLIP_ARGS,
                              "--emit-witness", str(path)])
    assert rc == 0
    assert "no witness to emit" in err
    assert not path.exists()


def test_emit_witness_from_range(capsys, tmp_path):
    path = tmp_path / "witness.json"
    rc, out, _ = run(capsys, ["range", "zoo:upper2x2", "--y", "1,1,1",
                              "--json", "--emit-witness", str(path)])
    assert rc == 0
    witness = json.loads(path.read_text(encoding="utf-8"))
    assert witness == json.loads(out)["witness"]
    assert witness["residual"] <= 1e-6


# ----------------------------------------------------------- exit codes


def test_unknown_zoo_name_exits_2(capsys):
    rc, _, err = run(capsys, ["analyze", "zoo:nope"])
    assert rc == 2
    assert err.startswith("error:")


def test_missing_file_exits_2(capsys):
    rc, _, err = run(capsys, ["analyze", "/does/not/exist.json"])
    assert rc == 2
    assert "error:" in err


def test_invalid_json_file_exits_2(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    rc, _, err = run(capsys, ["analyze", str(path)])
    assert rc == 2
    assert "invalid JSON" in err


def test_non_object_json_exits_2(capsys, tmp_path):
    path = write_json(tmp_path, "list.json", [1, 2, 3])
    rc, _, err = run(capsys, ["analyze", str(path)])
    assert rc == 2
    assert "expected a JSON object" in err


def test_set_on_file_source_exits_2(capsys, tmp_path):
    path = write_json(tmp_path, "map.json", nonstar_wire())
    rc, _, err = run(capsys, ["analyze", path, "--set", "a1=1"])
    assert rc == 2
    assert "only applies to zoo:" in err


def test_set_without_equals_exits_2(capsys):
    rc, _, err = run(capsys, ["analyze", "zoo:toeplitz2x2", "--set", "a1"])
    assert rc == 2
    assert "key=value" in err


def test_set_bad_number_exits_2(capsys):
    rc, _, err = run(capsys, ["analyze", "zoo:toeplitz2x2",
                              "--set", "a1=abc"])
    assert rc == 2
    assert "is not a number" in err


def test_set_seed_must_be_integer(capsys):
    rc, _, err = run(capsys, ["analyze", "zoo:random", "--set", "seed=1.5"])
    assert rc == 2
    assert "expected an integer" in err


def test_not_star_linear_exits_3(capsys, tmp_path):
    path = write_json(tmp_path, "map.json", nonstar_wire())
    rc, _, err = run(capsys, ["analyze", path])
    assert rc == 3
    assert "not *-linear" in err
    assert "deviations:" in err


def test_not_star_linear_json_still_prints_partial(capsys, tmp_path):
    path = write_json(tmp_path, "map.json", nonstar_wire())
    rc, out, _ = run(capsys, ["analyze", path, "--json"])
    assert rc == 3
    partial = json.loads(out)
    assert list(partial) == ["input", "star_linear"]
    assert partial["star_linear"]["is_star_linear"] is False


def test_hill_not_star_linear_exits_3(capsys, tmp_path):
    path = write_json(tmp_path, "map.json", nonstar_wire())
    rc, _, err = run(capsys, ["hill", path])
    assert rc == 3
    assert "not *-linear" in err


def test_unsupported_pattern_exits_1(capsys, tmp_path):
    pattern = {"n": 2, "q": 3, "field": "real",
               "positions": [[1, 1]], "remainder": "hetero"}
    path = write_json(tmp_path, "pattern.json", pattern)
    rc, _, err = run(capsys, ["range", path, "--y", "1,0"])
    assert rc == 1
    assert "heterogeneous" in err


def test_argparse_rejects_bad_choice(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["convert", "zoo:transpose2", "--to", "bogus"])
    assert exc.value.code == 2


def test_argparse_requires_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


# ---------------------------------------------------------- server mode


@pytest.fixture()
def server(monkeypatch):
    """Route httpx.get/httpx.post onto an in-process TestClient."""
    import httpx
    from fastapi.testclient import TestClient

    from posmap.service import create_app

    client = TestClient(create_app())
    base = "http://unit.test"

    def fake_get(url, timeout=None):
        assert url.startswith(base)
        return client.get(url[len(base):])

    def fake_post(url, json=None, timeout=None):
        assert url.startswith(base)
        return client.post(url[len(base):], json=json)

    monkeypatch.setattr(httpx, "get", fake_get)
    monkeypatch.setattr(httpx, "post", fake_post)
    return base


def test_server_analyze_identical_to_local(capsys, server):
    _, local, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json"])
    rc, remote, _ = run(capsys, ["analyze", "zoo:toeplitz2x2", "--json",
                                 "--server", server])
    assert rc == 0
    assert remote == local


def test_server_hill_identical_to_local(capsys, server):
    _, local, _ = run(capsys, ["hill", "zoo:toeplitz2x2"])
    rc, remote, _ = run(capsys, ["hill", "zoo:toeplitz2x2",
                                 "--server", server])
    assert rc == 0
    assert remote == local


def test_server_range_identical_to_local(capsys, server):
    args = ["range", "zoo:upper2x2", "--y", "1,1,1", "--json"]
    _, local, _ = run(capsys, args)
    rc, remote, _ = run(capsys, [*args, "--server", server])
    assert rc == 0
    assert remote == local


def test_server_case2x2_text(capsys, server):
    rc, out, _ = run(capsys, ["case2x2", "--server", server])
    assert rc == 0
    assert out.splitlines() == analysis.census_2x2()["lines"]


def test_server_parse_error_maps_to_exit_2(capsys, server):
    rc, _, err = run(capsys, ["analyze", "zoo:nope", "--server", server])
    assert rc == 2
    assert "error:" in err


def test_server_star_failure_maps_to_exit_3(capsys, server, tmp_path):
    path = write_json(tmp_path, "map.json", nonstar_wire())
    rc, _, err = run(capsys, ["analyze", path, "--server", server])
    assert rc == 3
    assert "not *-linear" in err
    assert "deviations:" in err
