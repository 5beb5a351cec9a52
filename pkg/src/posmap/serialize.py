"""JSON wire formats shared by the CLI and the HTTP service.

One convention everywhere: complex numbers travel as two-element
``[re, im]`` arrays, plain numbers are accepted wherever a real value is
possible.  A matrix is a dict ``{"field", "rows", "cols", "data"}`` with
``data`` nested row-major.  A map wraps a matrix together with its
interpretation: ``{"kind": "matricization"|"choi", "n", "q", "field",
"matrix"}``.  Block patterns use 1-based positions on the wire and
0-based positions in memory.  Malformed input raises ParseError with a
message naming the offending part.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import ParseError
from .mapmodel import FIELDS, MapSpec, from_choi, from_matricization

_NUMBER = (int, float)


def _decode_scalar(v: Any, where: str) -> complex:
    if isinstance(v, bool):
        raise ParseError(f"{where}: expected a number, got a boolean")
    if isinstance(v, _NUMBER):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 \
            and all(isinstance(p, _NUMBER) and not isinstance(p, bool) for p in v):
        return complex(v[0], v[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def _encode_scalar(v, field: str):
    if field == "real":
        return float(np.real(v))
    v = complex(v)
    return [v.real, v.imag]


def encode_vector(v: np.ndarray, field: str | None = None) -> list:
    v = np.asarray(v)
    if field is None:
        field = "complex" if np.iscomplexobj(v) else "real"
    return [_encode_scalar(x, field) for x in v]


def decode_vector(obj: Any, field: str = "complex",
                  where: str = "vector") -> np.ndarray:
    if not isinstance(obj, (list, tuple)):
        raise ParseError(f"{where}: expected a list")
    vals = [_decode_scalar(v, f"{where}[{k}]") for k, v in enumerate(obj)]
    arr = np.array(vals, dtype=complex)
    if field == "real":
        if np.abs(arr.imag).max(initial=0.0) > 0.0:
            raise ParseError(f"{where}: complex entries in a real-field vector")
        return arr.real
    return arr


def encode_matrix(M: np.ndarray, field: str | None = None) -> dict:
    M = np.atleast_2d(np.asarray(M))
    if field is None:
        field = "complex" if np.iscomplexobj(M) else "real"
    return {
        "field": field,
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[_encode_scalar(v, field) for v in row] for row in M],
    }


def decode_matrix(obj: Any, where: str = "matrix") -> tuple[np.ndarray, str]:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    for key in ("field", "rows", "cols", "data"):
        if key not in obj:
            raise ParseError(f"{where}: missing key {key!r}")
    field = obj["field"]
    if field not in FIELDS:
        raise ParseError(f"{where}: field must be one of {FIELDS}, got {field!r}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) \
            or isinstance(rows, bool) or isinstance(cols, bool) \
            or rows < 1 or cols < 1:
        raise ParseError(f"{where}: rows/cols must be positive integers")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != rows:
        raise ParseError(f"{where}: data must hold {rows} rows")
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"{where}: row {i} must hold {cols} entries")
        for j, v in enumerate(row):
            out[i, j] = _decode_scalar(v, f"{where}.data[{i}][{j}]")
    if field == "real":
        if np.abs(out.imag).max(initial=0.0) > 0.0:
            raise ParseError(f"{where}: complex entries in a real-field matrix")
        return out.real, field
    return out, field


MAP_KINDS = ("matricization", "choi")


def encode_map(spec: MapSpec, kind: str = "matricization") -> dict:
    if kind not in MAP_KINDS:
        raise ParseError(f"map kind must be one of {MAP_KINDS}, got {kind!r}")
    M = spec.L if kind == "matricization" else spec.choi
    return {
        "kind": kind,
        "n": spec.n,
        "q": spec.q,
        "field": spec.field,
        "matrix": encode_matrix(M, spec.field),
    }


def decode_map(obj: Any, as_choi: bool = False,
               n: int | None = None) -> MapSpec:
    """Read a map from a wrapped map object or a bare matrix object.

    A bare matrix is interpreted as a matricization unless as_choi is set,
    in which case n must be supplied (the Choi matrix alone does not
    determine the block split).  Wrapped objects are self-describing.
    """
    if not isinstance(obj, dict):
        raise ParseError("map: expected an object")
    if "kind" in obj or "matrix" in obj:
        kind = obj.get("kind")
        if kind not in MAP_KINDS:
            raise ParseError(f"map.kind must be one of {MAP_KINDS}, got {kind!r}")
        if "matrix" not in obj:
            raise ParseError("map: missing key 'matrix'")
        M, field = decode_matrix(obj["matrix"], "map.matrix")
        if kind == "matricization":
            spec = from_matricization(M, field)
        else:
            nn = obj.get("n", n)
            if not isinstance(nn, int) or isinstance(nn, bool) or nn < 1:
                raise ParseError("map: Choi input needs a positive integer 'n'")
            if M.shape[0] % nn != 0:
                raise ParseError(
                    f"map: Choi size {M.shape[0]} is not a multiple of n={nn}"
                )
            spec = from_choi(M, nn, field)
        for key in ("n", "q"):
            if key in obj and obj[key] != getattr(spec, key):
                raise ParseError(
                    f"map.{key}={obj[key]} contradicts the matrix shape "
                    f"({key}={getattr(spec, key)})"
                )
        return spec
    if "data" in obj:
        M, field = decode_matrix(obj)
        if as_choi:
            if n is None:
                raise ParseError("map: Choi input needs n")
            return from_choi(M, n, field)
        return from_matricization(M, field)
    raise ParseError("map: expected a map object or a matrix object")


REMAINDERS = ("zero", "single", "hetero")


def encode_pattern(n: int, q: int, positions: tuple[tuple[int, int], ...],
                   remainder: str | None = None,
                   alpha: np.ndarray | None = None,
                   field: str | None = None) -> dict:
    """Pattern as 1-based positions on the wire, with optional remainder."""
    out = {
        "n": int(n),
        "q": int(q),
        "positions": [[int(i) + 1, int(j) + 1] for i, j in positions],
    }
    if remainder is not None:
        out["remainder"] = remainder
    if alpha is not None:
        out["alpha"] = encode_vector(alpha, field)
    return out


def decode_pattern(obj: Any) -> tuple[int, int, tuple[tuple[int, int], ...],
                                      str | None, np.ndarray | None]:
    if not isinstance(obj, dict):
        raise ParseError("pattern: expected an object")
    for key in ("n", "q", "positions"):
        if key not in obj:
            raise ParseError(f"pattern: missing key {key!r}")
    n, q = obj["n"], obj["q"]
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1
               for v in (n, q)):
        raise ParseError("pattern: n and q must be positive integers")
    raw = obj["positions"]
    if not isinstance(raw, list) or not raw:
        raise ParseError("pattern: positions must be a nonempty list")
    seen = set()
    out = []
    for k, p in enumerate(raw):
        if not (isinstance(p, (list, tuple)) and len(p) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in p)):
            raise ParseError(f"pattern.positions[{k}]: expected a pair of integers")
        i, j = p[0] - 1, p[1] - 1
        if not (0 <= i < n and 0 <= j < q):
            raise ParseError(
                f"pattern.positions[{k}]: ({p[0]}, {p[1]}) outside the "
                f"1..{n} x 1..{q} grid"
            )
        if (i, j) in seen:
            raise ParseError(f"pattern.positions[{k}]: duplicate ({p[0]}, {p[1]})")
        seen.add((i, j))
        out.append((i, j))
    remainder = obj.get("remainder")
    if remainder is not None and remainder not in REMAINDERS:
        raise ParseError(
            f"pattern.remainder: expected one of {REMAINDERS}, got {remainder!r}")
    alpha = None
    if "alpha" in obj:
        if remainder == "hetero":
            raise ParseError(
                "pattern.alpha: no shared coefficient vector exists for a "
                "heterogeneous remainder")
        alpha = decode_vector(obj["alpha"], where="pattern.alpha")
        if alpha.size != len(out):
            raise ParseError(
                f"pattern.alpha: expected {len(out)} entries, got {alpha.size}")
        if np.abs(alpha.imag).max(initial=0.0) == 0.0:
            alpha = alpha.real
        if remainder == "zero" and np.abs(alpha).max(initial=0.0) > 0.0:
            raise ParseError(
                "pattern.alpha: nonzero coefficients contradict a zero remainder")
    return n, q, tuple(out), remainder, alpha


def encode_witness(z: np.ndarray, x: np.ndarray, residual: float,
                   branch: str, field: str) -> dict:
    return {
        "z": encode_vector(z, field),
        "x": encode_vector(x, field),
        "residual": float(residual),
        "branch": branch,
    }


def decode_witness(obj: Any, field: str = "complex"
                   ) -> tuple[np.ndarray, np.ndarray, float, str]:
    if not isinstance(obj, dict):
        raise ParseError("witness: expected an object")
    for key in ("z", "x", "residual", "branch"):
        if key not in obj:
            raise ParseError(f"witness: missing key {key!r}")
    z = decode_vector(obj["z"], field, "witness.z")
    x = decode_vector(obj["x"], field, "witness.x")
    res = obj["residual"]
    if isinstance(res, bool) or not isinstance(res, _NUMBER):
        raise ParseError("witness.residual: expected a number")
    if not isinstance(obj["branch"], str):
        raise ParseError("witness.branch: expected a string")
    return z, x, float(res), obj["branch"]


def jsonable(x: Any) -> Any:
    """Recursively turn numpy scalars/arrays into JSON-serializable values.

    Complex values become [re, im] pairs; everything else maps to the
    matching Python scalar or nested list.
    """
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        c = complex(x)
        return [c.real, c.imag]
    if isinstance(x, np.ndarray):
        if x.ndim == 0:
            return jsonable(x.item())
        return [jsonable(v) for v in x]
    return x
