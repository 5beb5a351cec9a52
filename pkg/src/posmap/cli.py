"""Command line front end.

Subcommands mirror the HTTP routes.  By default they call the shared
handlers in posmap.analysis directly; --server forwards the same request
to a running service instead, so both paths print identical reports.
Results go to stdout (human text, or the report JSON under --json),
diagnostics to stderr.  Exit codes: 0 success, 2 for input that does not
parse, 3 for a map that is not *-linear where the analysis needs one.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, analysis
from .errors import AnalysisError, NotStarLinear, ParseError
from .mapmodel import FIELDS
from .serialize import MAP_KINDS

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_NOT_STAR_LINEAR = 3

_CASE_DISPLAY = {"case_i": "(i)", "case_ii": "(ii)", "case_iii": "(iii)"}


class _StarFailure(Exception):
    """Carries the deviation diagnostics of a map that is not *-linear."""

    def __init__(self, star: dict):
        super().__init__("the map is not *-linear")
        self.star = star


# ---------------------------------------------------------------- inputs


def _parse_scalar(raw: str, where: str):
    for cast in (int, float, complex):
        try:
            return cast(raw)
        except ValueError:
            continue
    raise ParseError(f"{where}: {raw!r} is not a number")


def _parse_sets(items) -> dict:
    """Merge repeated --set flags; each one holds comma separated k=v."""
    out = {}
    for item in items or []:
        for piece in item.split(","):
            piece = piece.strip()
            if not piece:
                continue
            key, eq, raw = piece.partition("=")
            if not eq or not key.strip():
                raise ParseError(f"--set expects key=value, got {piece!r}")
            out[key.strip()] = _parse_scalar(raw.strip(), f"--set {key.strip()}")
    return out


def _wire_value(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _source_object(args) -> dict:
    """The JSON source object shared by in-process and server calls."""
    sets = _parse_sets(getattr(args, "set", None))
    src = args.source
    if src.startswith("zoo:"):
        obj = {"zoo": src[4:], "field": args.field}
        if "seed" in sets:
            seed = sets.pop("seed")
            if not isinstance(seed, int):
                raise ParseError("--set seed: expected an integer")
            obj["seed"] = seed
        if sets:
            obj["params"] = {k: _wire_value(v) for k, v in sets.items()}
        return obj
    if sets:
        raise ParseError("--set only applies to zoo: sources")
    if src == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(src, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"{src}: {exc.strerror or exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{src}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise ParseError(f"{src}: expected a JSON object")
    return obj


def _resolve_spec(args, obj):
    return analysis.resolve_source(obj, field=args.field,
                                   as_choi=args.choi, n=args.n)


def _parse_y(raw: str) -> list:
    vals = [_parse_scalar(p.strip(), "--y") for p in raw.split(",") if p.strip()]
    if not vals:
        raise ParseError("--y: expected a comma separated vector")
    return [_wire_value(v) for v in vals]


# ---------------------------------------------------------------- output


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _fmt_float(v: float) -> str:
    return f"{v + 0.0:.6g}"


def _fmt_scalar(v) -> str:
    """Wire scalar (bare real or [re, im] pair) for human display."""
    if isinstance(v, list):
        re, im = v
        if im == 0:
            return _fmt_float(re)
        sign = "+" if im >= 0 else "-"
        return f"{_fmt_float(re)}{sign}{_fmt_float(abs(im))}i"
    return _fmt_float(v)


def _fmt_vector(v) -> str:
    return "(" + ", ".join(_fmt_scalar(x) for x in v) + ")"


def _matrix_lines(wire: dict, indent: str = "  ") -> list[str]:
    cells = [[_fmt_scalar(v) for v in row] for row in wire["data"]]
    widths = [max(len(cells[i][j]) for i in range(len(cells)))
              for j in range(len(cells[0]))]
    return [indent + "[ " + "  ".join(c.rjust(w) for c, w in zip(row, widths))
            + " ]" for row in cells]


def _positions_text(positions) -> str:
    return " ".join(f"({i},{j})" for i, j in positions)


def _star_lines(star: dict) -> list[str]:
    yes = "yes" if star["is_star_linear"] else "no"
    return [
        f"*-linear: {yes}",
        "  deviations: hermitian {}, shuffle {}, entrywise {} "
        "(tol {}, scale {})".format(
            _fmt_float(star["deviation_hermitian"]),
            _fmt_float(star["deviation_shuffle"]),
            _fmt_float(star["deviation_entrywise"]),
            _fmt_float(star["tol"]), _fmt_float(star["scale"])),
    ]


def _probe_lines(pos: dict) -> list[str]:
    if pos["status"] == "not_positive":
        w = pos["witness"]
        return [
            "positivity: certified not positive "
            f"(witness value {_fmt_float(w['value'])}, seed {pos['seed']})",
            f"  witness z = {_fmt_vector(w['z'])}, x = {_fmt_vector(w['x'])}",
        ]
    return [
        "positivity: no violation found "
        f"(min value seen {_fmt_float(pos['min_value_seen'])} over "
        f"{pos['starts_used']} starts, seed {pos['seed']})",
    ]


def _classification_text(cls: dict) -> str:
    bits = [f"C1 {'holds' if cls['c1'] else 'fails'}"]
    on = [k for k, v in cls["c2"].items() if v]
    bits.append("C2 " + (", ".join(on) if on else "none"))
    case = cls.get("case")
    if case:
        txt = "case " + _CASE_DISPLAY.get(case["kind"], case["kind"])
        if case.get("pivot"):
            txt += " pivot ({},{})".format(*case["pivot"])
        bits.append(txt)
    if cls.get("sum_alpha_is_one"):
        bits.append("sum of remainder coefficients is 1")
    return "; ".join(bits)


def _analyze_text(report: dict) -> list[str]:
    inp = report["input"]
    lines = [f"map: {inp['q']}x{inp['q']} -> {inp['n']}x{inp['n']} "
             f"over the {inp['field']} field"]
    lines += _star_lines(report["star_linear"])
    hill = report["hill"]
    lines.append(f"factorization: m = {hill['m']}; positions "
                 + _positions_text(hill["positions"]))
    lines += _probe_lines(report["positivity"])
    cp = report["completely_positive"]
    lines.append("completely positive: {} (min eigenvalue {})".format(
        "yes" if cp["is_completely_positive"] else "no",
        _fmt_float(cp["min_eigenvalue"])))
    pat = report["pattern"]
    rem = pat.get("remainder", "unknown")
    lines.append(f"pattern: remainder {rem}")
    lines.append("classification: " + _classification_text(report["classification"]))
    v = report["verdict"]
    decision = ("positivity and complete positivity coincide"
                if v["decision"] == "guaranteed_coincide"
                else "coincidence unknown")
    lines.append(f"verdict: {decision} "
                 f"[{v['reason'].replace('_', ' ')}; "
                 f"selections tried {v['selections_tried']}]")
    for oq in report["open_questions"]:
        lines.append(f"open question [{oq['id']}]: {oq['note']}")
    return lines


def _hill_text(out: dict) -> list[str]:
    lines = [f"hill factorization over the {out['field']} field: "
             f"{out['q']}x{out['q']} -> {out['n']}x{out['n']}, m = {out['m']}",
             "positions: " + _positions_text(out["positions"]),
             "H:"]
    lines += _matrix_lines(out["H"])
    lines.append("Ahat:")
    lines += _matrix_lines(out["ahat"])
    return lines


def _convert_text(out: dict) -> list[str]:
    m = out["matrix"]
    lines = [f"{out['kind']} form: {m['rows']}x{m['cols']} "
             f"over the {out['field']} field (n = {out['n']}, q = {out['q']})"]
    lines += _matrix_lines(m)
    return lines


def _range_text(out: dict) -> list[str]:
    tag = "certified" if out["certified"] else "not certified"
    head = (f"y = {_fmt_vector(out['y'])}: "
            f"{out['decision'].replace('_', ' ')} "
            f"({out['method'].replace('_', ' ')}; {tag})")
    lines = [head]
    w = out.get("witness")
    if w:
        lines.append(f"  witness [branch {w['branch']}] "
                     f"z = {_fmt_vector(w['z'])}, x = {_fmt_vector(w['x'])}, "
                     f"residual {_fmt_float(w['residual'])}")
    return lines


def _write_witness(path: str, witness) -> None:
    if witness is None:
        print("no witness to emit", file=sys.stderr)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(witness, indent=2) + "\n")


# ---------------------------------------------------------------- server


def _server_detail(resp) -> object:
    try:
        return resp.json().get("detail")
    except ValueError:
        return resp.text


def _server_call(server: str, method: str, path: str, payload=None) -> dict:
    import httpx

    url = server.rstrip("/") + path
    if method == "GET":
        resp = httpx.get(url, timeout=120.0)
    else:
        resp = httpx.post(url, json=payload, timeout=120.0)
    if resp.status_code == 400:
        raise ParseError(str(_server_detail(resp)))
    if resp.status_code == 422:
        detail = _server_detail(resp)
        if isinstance(detail, dict) and "star_linear" in detail:
            raise _StarFailure(detail["star_linear"])
        if isinstance(detail, list):
            raise ParseError(f"request rejected by the service: {detail}")
        raise AnalysisError(str(detail))
    if resp.status_code != 200:
        raise AnalysisError(f"service error {resp.status_code}: {resp.text}")
    return resp.json()


# ------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    obj = _source_object(args)
    if args.server:
        payload = {"source": obj, "field": args.field, "choi": args.choi,
                   "n": args.n, "tol": args.tol, "seed": args.seed,
                   "budget": args.budget,
                   "max_selections": args.max_selections}
        report = _server_call(args.server, "POST", "/analyze", payload)
    else:
        spec = _resolve_spec(args, obj)
        report = analysis.analyze_map(spec, tol=args.tol, seed=args.seed,
                                      budget=args.budget,
                                      max_selections=args.max_selections)
        if not report["star_linear"]["is_star_linear"]:
            if args.json:
                _emit_json(report)
            raise _StarFailure(report["star_linear"])
    if args.emit_witness:
        _write_witness(args.emit_witness, report["positivity"]["witness"])
    if args.json:
        _emit_json(report)
    else:
        print("\n".join(_analyze_text(report)))
    return EXIT_OK


def cmd_convert(args) -> int:
    obj = _source_object(args)
    if args.server:
        payload = {"source": obj, "field": args.field, "choi": args.choi,
                   "n": args.n, "to": args.to}
        out = _server_call(args.server, "POST", "/convert", payload)
    else:
        out = analysis.convert_map(_resolve_spec(args, obj), args.to)
    if args.json:
        _emit_json(out)
    else:
        print("\n".join(_convert_text(out)))
    return EXIT_OK


def cmd_hill(args) -> int:
    obj = _source_object(args)
    if args.server:
        payload = {"source": obj, "field": args.field, "choi": args.choi,
                   "n": args.n, "tol": args.tol}
        out = _server_call(args.server, "POST", "/hill", payload)
    else:
        spec = _resolve_spec(args, obj)
        try:
            out = analysis.hill_summary(spec, tol=args.tol)
        except NotStarLinear:
            raise _StarFailure(analysis._star_section(spec, args.tol))
    if args.json:
        _emit_json(out)
    else:
        print("\n".join(_hill_text(out)))
    return EXIT_OK


def cmd_range(args) -> int:
    obj = _source_object(args)
    y = _parse_y(args.y)
    if args.server:
        payload = {"source": obj, "y": y, "field": args.field,
                   "tol": args.tol, "seed": args.seed, "budget": args.budget}
        out = _server_call(args.server, "POST", "/range", payload)
    else:
        out = analysis.range_from_source(obj, y, field=args.field,
                                         tol=args.tol, seed=args.seed,
                                         budget=args.budget)
    if args.emit_witness:
        _write_witness(args.emit_witness, out.get("witness"))
    if args.json:
        _emit_json(out)
    else:
        print("\n".join(_range_text(out)))
    return EXIT_OK


def cmd_case2x2(args) -> int:
    if args.server:
        out = _server_call(args.server, "GET", "/case2x2")
    else:
        out = analysis.census_2x2()
    if args.json:
        _emit_json(out)
    else:
        print("\n".join(out["lines"]))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


# --------------------------------------------------------------- parser


def _add_source(p) -> None:
    p.add_argument("source",
                   help="JSON file path, - for stdin, or zoo:<name>")
    p.add_argument("--field", choices=FIELDS, default="complex",
                   help="scalar field for zoo builds (wrapped maps "
                        "describe their own)")
    p.add_argument("--set", action="append", default=[], metavar="K=V",
                   help="zoo parameter overrides, comma separated or repeated")
    p.add_argument("--choi", action="store_true",
                   help="read a bare matrix object as a Choi matrix")
    p.add_argument("--n", type=int, default=None,
                   help="output dimension, needed with --choi")


def _add_output(p) -> None:
    p.add_argument("--json", action="store_true",
                   help="emit the JSON report instead of text")
    p.add_argument("--server", metavar="URL", default=None,
                   help="forward the request to a running service")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posmap",
        description="Positivity structure of linear matrix maps.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser(
        "analyze", help="full report: *-linearity, factorization, "
                        "positivity, pattern verdict")
    _add_source(pa)
    _add_output(pa)
    pa.add_argument("--tol", type=float, default=1e-9)
    pa.add_argument("--seed", type=int, default=42)
    pa.add_argument("--budget", type=int, default=64,
                    help="positivity probe restarts")
    pa.add_argument("--max-selections", type=int, default=32,
                    dest="max_selections",
                    help="block selections the verdict search may try")
    pa.add_argument("--emit-witness", metavar="PATH",
                    help="write the positivity witness, when one exists")

    pc = sub.add_parser("convert",
                        help="rewrite between matricization and Choi forms")
    _add_source(pc)
    _add_output(pc)
    pc.add_argument("--to", choices=MAP_KINDS, required=True)

    ph = sub.add_parser("hill", help="minimal factorization data")
    _add_source(ph)
    _add_output(ph)
    ph.add_argument("--tol", type=float, default=1e-9)

    pr = sub.add_parser(
        "range", help="product-range membership of the structured "
                      "bilinear map")
    _add_source(pr)
    _add_output(pr)
    pr.add_argument("--y", required=True,
                    help="target vector, comma separated (complex as a+bj)")
    pr.add_argument("--tol", type=float, default=1e-9)
    pr.add_argument("--seed", type=int, default=42)
    pr.add_argument("--budget", type=int, default=64,
                    help="solver restarts")
    pr.add_argument("--emit-witness", metavar="PATH",
                    help="write the product witness, when one exists")

    p2 = sub.add_parser("case2x2", help="the 2x2 census table")
    _add_output(p2)

    ps = sub.add_parser("serve", help="run the HTTP service")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8000)

    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "convert": cmd_convert,
    "hill": cmd_hill,
    "range": cmd_range,
    "case2x2": cmd_case2x2,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _StarFailure as exc:
        print("error: the map is not *-linear", file=sys.stderr)
        for line in _star_lines(exc.star):
            print(line, file=sys.stderr)
        return EXIT_NOT_STAR_LINEAR
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotStarLinear as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_STAR_LINEAR
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main(argv=None))
