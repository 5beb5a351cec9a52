"""Report building shared by the command line and the HTTP service.

Every handler takes plain inputs, returns a JSON-safe dict, and keeps the
human-readable rendering elsewhere: the CLI and the service must agree on
the numbers because they call the same functions here.  Verdict sections
echo the seed, budget and tolerance that produced them.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from . import zoo
from .bilinear import (StructuredMap, construct_witness, membership_solve,
                       range_oracle_grid)
from .errors import NotInRange, ParseError, TooLarge, UnsupportedPattern
from .hill import HillRep, hill_from_spec
from .mapmodel import FIELDS, MapSpec, star_linearity
from .pattern import classify, detect_pattern, theorem_verdict
from .positivity import is_completely_positive, positivity_probe
from .serialize import (decode_map, decode_pattern, decode_vector, encode_map,
                        encode_matrix, encode_pattern, encode_vector)

OPEN_COMPLEX_M3 = (
    "for n = q = 2 with three independent blocks and a nonzero shared "
    "remainder block over the complex field, whether positivity implies "
    "complete positivity is open"
)
OPEN_HETEROGENEOUS = (
    "whether the shared-remainder hypothesis of the coincidence theorem "
    "can be dropped is open"
)

CENSUS_LINES = (
    "n = q = 2 census: positivity vs complete positivity by number of "
    "independent blocks",
    "1 independent block: coincide",
    "2 independent blocks in one row or column: coincide (any remainder)",
    "2 independent blocks on a diagonal, matching remainder coefficients: "
    "coincide",
    "2 independent blocks on a diagonal, mismatched remainder coefficients: "
    "coincide (reduces to the zero-remainder case)",
    "3 independent blocks, zero remainder: coincide",
    "3 independent blocks, nonzero remainder, real field: counterexample "
    "exists (Toeplitz family)",
    "3 independent blocks, nonzero remainder, complex field: OPEN",
    "4 independent blocks: counterexample exists (transpose map)",
)


def resolve_source(obj: Any, field: str = "complex", seed: int = 0,
                   as_choi: bool = False, n: int | None = None) -> MapSpec:
    """Turn a decoded JSON source into a map.

    A ``{"zoo": name, ...}`` object builds the named zoo family with the
    given field, seed and parameter overrides; anything else must be a map
    or matrix object for decode_map.  Wrapped maps carry their own field;
    the field argument applies to zoo builds only.
    """
    if isinstance(obj, dict) and "zoo" in obj:
        name = obj["zoo"]
        if not isinstance(name, str):
            raise ParseError("zoo: name must be a string")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise ParseError("zoo.params: expected an object")
        if "field" in params or "seed" in params:
            raise ParseError(
                "zoo.params: field and seed belong at the top level of "
                "the zoo object"
            )
        field = obj.get("field", field)
        if field not in FIELDS:
            raise ParseError(f"zoo.field: expected one of {FIELDS}, got {field!r}")
        seed = obj.get("seed", seed)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParseError("zoo.seed: expected an integer")
        return zoo.entry(name, field=field, seed=seed, **params).spec
    return decode_map(obj, as_choi=as_choi, n=n)


def _vec_out(v: np.ndarray | None, field: str) -> list | None:
    if v is None:
        return None
    return encode_vector(v, field)


def _star_section(spec: MapSpec, tol: float) -> dict:
    rep = star_linearity(spec, tol)
    return {
        "is_star_linear": bool(rep.is_star_linear),
        "deviation_hermitian": float(rep.dev_hermitian),
        "deviation_shuffle": float(rep.dev_shuffle),
        "deviation_entrywise": float(rep.dev_entrywise),
        "tol": float(rep.tol),
        "scale": float(rep.scale),
    }


def _hill_section(rep: HillRep) -> dict:
    return {
        "m": int(rep.m),
        "positions": [[i + 1, j + 1] for i, j in rep.positions],
        "H": encode_matrix(rep.H, rep.field),
        "ahat": encode_matrix(rep.ahat, rep.field),
        "A": [encode_matrix(a, rep.field) for a in rep.A],
    }


def _positivity_section(spec: MapSpec, tol: float, seed: int,
                        budget: int) -> dict:
    probe = positivity_probe(spec, budget=budget, seed=seed, tol=tol)
    out = {
        "status": probe.status,
        "min_value_seen": float(probe.min_value_seen),
        "starts_used": int(probe.starts_used),
        "samples_used": int(probe.samples_used),
        "budget": int(budget),
        "seed": int(seed),
        "tol": float(tol),
        "witness": None,
    }
    if probe.witness_z is not None:
        out["witness"] = {
            "z": encode_vector(probe.witness_z, spec.field),
            "x": encode_vector(probe.witness_x, spec.field),
            "value": float(probe.witness_value),
        }
    return out


def _cp_section(spec: MapSpec, tol: float) -> dict:
    res = is_completely_positive(spec, tol)
    return {
        "is_completely_positive": bool(res.is_cp),
        "min_eigenvalue": float(res.min_eigenvalue),
        "witness": _vec_out(res.witness, spec.field),
        "tol": float(tol),
    }


def _case_out(case) -> dict | None:
    if case is None:
        return None
    out = {"kind": case.kind}
    if case.pivot is not None:
        out["pivot"] = [case.pivot[0] + 1, case.pivot[1] + 1]
    if case.order is not None:
        out["order"] = [k + 1 for k in case.order]
    return out


def _pattern_section(spec: MapSpec, tol: float, max_selections: int) -> dict:
    rep = theorem_verdict(spec, rtol=tol, max_selections=max_selections)
    pat = rep.pattern
    cls = classify(pat)
    c2 = cls.c2
    return {
        "pattern": encode_pattern(pat.n, pat.q, pat.positions,
                                  remainder=pat.remainder, alpha=pat.alpha,
                                  field=spec.field),
        "classification": {
            "c1": bool(cls.c1),
            "c2": {
                "free_row": c2.free_row,
                "free_col": c2.free_col,
                "two_repeated_rows": c2.two_repeated_rows,
                "two_repeated_cols": c2.two_repeated_cols,
                "rows_distinct": c2.rows_distinct,
                "cols_distinct": c2.cols_distinct,
                "isolated": c2.isolated,
            },
            "case": _case_out(cls.case),
            "sum_alpha_is_one": cls.sum_alpha_is_one,
        },
        "verdict": {
            "decision": rep.verdict,
            "reason": rep.reason,
            "selections_tried": int(rep.selections_tried),
        },
    }


def _open_questions(spec: MapSpec, pattern_section: dict) -> list[dict]:
    out = []
    verdict = pattern_section["verdict"]["decision"]
    pat = pattern_section["pattern"]
    m = len(pat["positions"])
    remainder = pat.get("remainder")
    if (verdict == "unknown" and spec.field == "complex"
            and spec.n == 2 and spec.q == 2 and m == 3
            and remainder == "single"
            and any(np.abs(complex(*a) if isinstance(a, list) else complex(a)) > 0
                    for a in pat.get("alpha", []))):
        out.append({"id": "complex_2x2_m3", "note": OPEN_COMPLEX_M3})
    if verdict == "unknown" and remainder == "hetero":
        out.append({"id": "heterogeneous_remainder", "note": OPEN_HETEROGENEOUS})
    return out


def analyze_map(spec: MapSpec, tol: float = 1e-9, seed: int = 42,
                budget: int = 64, max_selections: int = 32) -> dict:
    """Full analysis report for a map.

    The star-linearity section is always present.  When the map fails the
    criterion the remaining sections are omitted: every other analysis
    reads structure off a Hermitian Choi matrix.
    """
    report: dict[str, Any] = {
        "input": {
            "n": int(spec.n),
            "q": int(spec.q),
            "field": spec.field,
            "map": encode_map(spec, "matricization"),
        },
        "star_linear": _star_section(spec, tol),
    }
    if not report["star_linear"]["is_star_linear"]:
        return report
    hill = hill_from_spec(spec, tol)
    report["hill"] = _hill_section(hill)
    report["positivity"] = _positivity_section(spec, tol, seed, budget)
    report["completely_positive"] = _cp_section(spec, tol)
    report.update(_pattern_section(spec, tol, max_selections))
    report["open_questions"] = _open_questions(spec, report)
    return report


def convert_map(spec: MapSpec, to: str) -> dict:
    if to not in ("matricization", "choi"):
        raise ParseError(f"convert: target must be matricization or choi, got {to!r}")
    return encode_map(spec, to)


def hill_summary(spec: MapSpec, tol: float = 1e-9) -> dict:
    """Minimal factorization data; raises NotStarLinear for unfit input."""
    rep = hill_from_spec(spec, tol)
    out = _hill_section(rep)
    out["field"] = rep.field
    out["n"] = int(rep.n)
    out["q"] = int(rep.q)
    return out


_GRID_RESOLUTION = 13
_GRID_BOX = (-2.0, 2.0)


def range_query(n: int, q: int, positions, alpha, field: str, y,
                tol: float = 1e-9, seed: int = 42, budget: int = 64) -> dict:
    """Decide whether y is a product value of the structured map.

    Three rungs: the closed-form constructions (exact, certified both
    ways), alternating least squares (certifies membership only), and for
    small real problems the exhaustive product grid (a strong check, not
    a proof).  The certified flag says which kind of answer came back.
    """
    sm = StructuredMap(n, q, tuple(positions), alpha, field)
    y_arr = np.asarray(y).reshape(-1)
    out: dict[str, Any] = {
        "n": int(n), "q": int(q),
        "positions": [[i + 1, j + 1] for i, j in sm.positions],
        "alpha": encode_vector(sm.alpha, field),
        "field": field,
        "y": encode_vector(y_arr, field),
        "seed": int(seed), "budget": int(budget), "tol": float(tol),
    }
    try:
        w = construct_witness(sm, y_arr, rtol=tol)
        out.update(decision="reachable", certified=True, method="construction",
                   witness={"z": encode_vector(w.z, field),
                            "x": encode_vector(w.x, field),
                            "residual": float(w.residual),
                            "branch": w.branch})
        return out
    except NotInRange:
        out.update(decision="not_reachable", certified=True,
                   method="exceptional_range_test", witness=None)
        return out
    except UnsupportedPattern:
        pass
    w = membership_solve(sm.matrix, n, q, y_arr, budget=budget, seed=seed)
    if w is not None:
        out.update(decision="reachable", certified=True, method="als",
                   witness={"z": encode_vector(w.z, field),
                            "x": encode_vector(w.x, field),
                            "residual": float(w.residual),
                            "branch": w.branch})
        return out
    if field == "real" and not np.iscomplexobj(y_arr):
        try:
            grid = range_oracle_grid(sm.matrix, n, q, [y_arr],
                                     resolution=_GRID_RESOLUTION,
                                     box=_GRID_BOX)[0]
            out.update(decision="not_reachable", certified=False,
                       method="grid", witness=None,
                       best_residual=float(grid.best_residual),
                       grid_resolution=_GRID_RESOLUTION,
                       grid_box=list(_GRID_BOX))
            if grid.reachable:
                out.update(decision="reachable")
            return out
        except TooLarge:
            pass
    out.update(decision="not_reachable", certified=False, method="search",
               witness=None)
    return out


def range_from_source(obj: Any, y, field: str = "complex",
                      tol: float = 1e-9, seed: int = 42,
                      budget: int = 64) -> dict:
    """Range query on a pattern object or on any map source.

    A map source is reduced to its detected block pattern first.  A
    heterogeneous remainder has no shared coefficient vector, hence no
    structured product map to query, and is rejected.
    """
    if isinstance(obj, dict) and "positions" in obj:
        n, q, positions, remainder, alpha = decode_pattern(obj)
        if remainder == "hetero":
            raise UnsupportedPattern(
                "range: a heterogeneous remainder has no shared "
                "coefficient vector"
            )
        if alpha is None:
            alpha = np.zeros(len(positions))
    else:
        spec = resolve_source(obj, field=field)
        pat = detect_pattern(spec, rtol=tol)
        if pat.alpha is None:
            raise UnsupportedPattern(
                "range: the map's remainder blocks do not share one "
                "coefficient vector"
            )
        n, q, positions, alpha = pat.n, pat.q, pat.positions, pat.alpha
        field = spec.field
    if isinstance(y, np.ndarray):
        y_arr = y.reshape(-1)
    else:
        y_arr = decode_vector(y, field, "y")
    if y_arr.size != len(positions):
        raise ParseError(
            f"y must have length m={len(positions)}, got {y_arr.size}"
        )
    return range_query(n, q, positions, alpha, field, y_arr,
                       tol=tol, seed=seed, budget=budget)


def census_2x2() -> dict:
    """The small-square census table as frozen display lines."""
    return {"lines": list(CENSUS_LINES)}
