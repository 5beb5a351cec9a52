"""Built-in example maps and seeded generators.

Five families, addressable by name through ``entry``:

``transpose2``
    The transpose map V -> V^T, the classic positive map that is not
    completely positive.
``upper2x2``
    2 x 2 block upper triangular matricizations with three independent
    blocks.  The block positions fail the row-or-column independence
    condition, yet positivity still implies complete positivity here.
``toeplitz2x2``
    2 x 2 block Toeplitz matricizations: the diagonal block repeats, two
    independent off-diagonal blocks.  For one parameter choice the map is
    positive but not completely positive over the reals, and not even
    positive over the complexes.
``embedded``
    A 2 x 2 sub-grid of independent blocks embedded in a larger zero
    pattern, padded with a positive definite coefficient block.  Always
    positive, never completely positive.
``random``
    Seeded generator: a prescribed block pattern, a coefficient matrix
    with a prescribed spectrum, optional shared remainder block.

Constructors return plain MapSpec values; ``entry`` wraps them together
with the parameter echo and the claims expected of the family.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Callable

import numpy as np

from .bilinear import StructuredMap
from .core import canonical_shuffle
from .errors import (FieldViolation, InfeasiblePattern, LengthMismatch,
                     ParseError, PatternViolation)
from .mapmodel import FIELDS, MapSpec, from_choi, from_matricization
from .pattern import _check_positions

_REAL_IMAG_TOL = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class ZooEntry:
    """A named example: resolved parameters, the map, and expected claims.

    expected holds only claims that are fixed by the family (or by the
    resolved parameters), e.g. {"star_linear": True, "m": 3}.  Tests and
    reports read it; nothing in the library branches on it.
    """

    name: str
    parameters: dict[str, Any]
    spec: MapSpec
    expected: dict[str, Any]


def _require_field(field: str) -> str:
    if field not in FIELDS:
        raise FieldViolation(f"unknown field {field!r}, expected one of {FIELDS}")
    return field


def _wire_scalar(name: str, value) -> complex:
    """Accept a bare number or an [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2 or any(
                isinstance(v, bool) or not isinstance(v, (int, float))
                for v in value):
            raise ParseError(
                f"parameter {name}: expected a number or an [re, im] pair, "
                f"got {value!r}"
            )
        return complex(value[0], value[1])
    return complex(value)


def _require_real(name: str, value) -> float:
    v = _wire_scalar(name, value)
    if abs(v.imag) > _REAL_IMAG_TOL * max(1.0, abs(v)):
        raise FieldViolation(f"parameter {name} must be real, got {value!r}")
    return float(v.real)


def _cast_param(name: str, value, field: str):
    if field == "real":
        return _require_real(name, value)
    return _wire_scalar(name, value)


def transpose_map(n: int = 2, field: str = "complex") -> MapSpec:
    """The transpose map on n x n matrices.

    Its matricization is the canonical shuffle, so for n = 2 both L and
    the Choi matrix equal [[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1]].
    """
    _require_field(field)
    if n < 2:
        raise PatternViolation(f"transpose map needs n >= 2, got {n}")
    return MapSpec(n, n, field, canonical_shuffle(n))


def upper_triangular_2x2(a1, b1, b2, c1, c2, c3, field: str = "complex") -> MapSpec:
    """Adjoint-compatible maps with 2 x 2 block upper triangular L.

    Free parameters are a1, b2, c3 (real) and b1, c1, c2 (field scalars);
    the remaining entries of L are forced by adjoint compatibility:

        L = [[a1, b1, conj(b1), b2      ],
             [0,  c1, 0,        c2      ],
             [0,  0,  conj(c1), conj(c2)],
             [0,  0,  0,        c3      ]].

    Raises FieldViolation when a forced-real parameter is not real or a
    complex parameter is supplied over the real field.
    """
    _require_field(field)
    a1 = _require_real("a1", a1)
    b2 = _require_real("b2", b2)
    c3 = _require_real("c3", c3)
    b1 = _cast_param("b1", b1, field)
    c1 = _cast_param("c1", c1, field)
    c2 = _cast_param("c2", c2, field)
    L = np.array([
        [a1, b1, np.conj(b1), b2],
        [0.0, c1, 0.0, c2],
        [0.0, 0.0, np.conj(c1), np.conj(c2)],
        [0.0, 0.0, 0.0, c3],
    ])
    return from_matricization(L, field)


def toeplitz_2x2(a1, b1, b2, b3, c1, c3, field: str = "complex") -> MapSpec:
    """Adjoint-compatible maps with 2 x 2 block Toeplitz L.

    The diagonal block repeats, so only three blocks are independent.
    Free parameters are a1, b2, c3 (real) and b1, b3, c1 (field scalars);
    adjoint compatibility forces the rest:

        L = [[a1,       b1,       conj(b1), b2      ],
             [c1,       a1,       conj(b3), conj(b1)],
             [conj(c1), b3,       a1,       b1      ],
             [c3,       conj(c1), c1,       a1      ]].
    """
    _require_field(field)
    a1 = _require_real("a1", a1)
    b2 = _require_real("b2", b2)
    c3 = _require_real("c3", c3)
    b1 = _cast_param("b1", b1, field)
    b3 = _cast_param("b3", b3, field)
    c1 = _cast_param("c1", c1, field)
    L = np.array([
        [a1, b1, np.conj(b1), b2],
        [c1, a1, np.conj(b3), np.conj(b1)],
        [np.conj(c1), b3, a1, b1],
        [c3, np.conj(c1), c1, a1],
    ])
    return from_matricization(L, field)


def _find_grid(positions: tuple[tuple[int, int], ...]
               ) -> tuple[int, int, int, int] | None:
    """First (r1, r2, c1, c2) whose four corner positions are all selected."""
    cols_by_row: dict[int, set[int]] = {}
    for i, j in positions:
        cols_by_row.setdefault(i, set()).add(j)
    rows = sorted(cols_by_row)
    for a, r1 in enumerate(rows):
        for r2 in rows[a + 1:]:
            common = sorted(cols_by_row[r1] & cols_by_row[r2])
            if len(common) >= 2:
                return r1, r2, common[0], common[1]
    return None


def _seeded_orthonormal(k: int, seed: int, field: str) -> np.ndarray:
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((k, k))
    if field == "complex":
        G = G + 1j * rng.standard_normal((k, k))
    Q, R = np.linalg.qr(G)
    # fix the phase so the factor is unique given the draw
    return Q * np.sign(np.where(np.abs(np.diag(R)) > 0, np.diag(R), 1.0))


def _random_pd(k: int, seed: int, field: str) -> np.ndarray:
    """Well-conditioned positive definite k x k matrix, deterministic in seed."""
    if k == 0:
        return np.zeros((0, 0), dtype=float if field == "real" else complex)
    Q = _seeded_orthonormal(k, seed, field)
    vals = np.linspace(1.0, 2.0, k)
    H = (Q * vals) @ Q.conj().T
    return (H + H.conj().T) / 2


def embedded_full_block(n: int, q: int,
                        positions: tuple[tuple[int, int], ...],
                        seed: int = 0, field: str = "complex") -> MapSpec:
    """Embed the transpose pattern inside a larger zero block pattern.

    positions must contain a full 2 x 2 sub-grid (two rows sharing two
    columns).  The four grid positions receive the transpose map's
    coefficient block; all others share a positive definite block drawn
    from seed.  The result is positive (the grid part contributes a
    squared modulus, the rest is positive semidefinite) but never
    completely positive, since the coefficient matrix keeps one negative
    eigenvalue.  Raises PatternViolation when no sub-grid exists.
    """
    _require_field(field)
    positions = _check_positions(positions, n, q)
    grid = _find_grid(positions)
    if grid is None:
        raise PatternViolation(
            "positions contain no 2 x 2 sub-grid of selected blocks"
        )
    r1, r2, c1, c2 = grid
    first = ((r1, c1), (r1, c2), (r2, c1), (r2, c2))
    ordered = first + tuple(p for p in positions if p not in first)
    m = len(ordered)
    E = np.zeros((m, n * q), dtype=float if field == "real" else complex)
    for k, (i, j) in enumerate(ordered):
        E[k, j * n + i] = 1.0
    H = np.zeros((m, m), dtype=E.dtype)
    H[:4, :4] = canonical_shuffle(2)
    H[4:, 4:] = _random_pd(m - 4, seed, field)
    C = E.conj().T @ H.T @ E
    return from_choi(C, n, field)


def random_star_linear(n: int, q: int,
                       pattern: tuple[tuple[int, int], ...],
                       spectrum, seed: int = 0, field: str = "complex",
                       remainder: str = "zero") -> MapSpec:
    """Seeded adjoint-compatible map with prescribed pattern and spectrum.

    The coefficient matrix is built by conjugating diag(spectrum) with a
    seeded orthonormal matrix, so the map is completely positive exactly
    when the spectrum is positive.  remainder selects what the unselected
    block positions hold: "zero" leaves them empty, "random" fills them
    all with one shared dependent block.  Spectrum entries must be real
    and nonzero (a zero entry would drop the rank below m).
    """
    _require_field(field)
    pattern = _check_positions(pattern, n, q)
    if remainder not in ("zero", "random"):
        raise ValueError(f"remainder must be 'zero' or 'random', got {remainder!r}")
    vals = np.asarray(spectrum)
    if np.iscomplexobj(vals):
        if np.abs(vals.imag).max(initial=0.0) > _REAL_IMAG_TOL:
            raise FieldViolation("spectrum entries must be real")
        vals = vals.real
    vals = vals.astype(float)
    m = len(pattern)
    if vals.shape != (m,):
        raise LengthMismatch(
            f"spectrum needs one entry per pattern position ({m}), got {vals.shape}"
        )
    if np.abs(vals).min() <= 1e-12:
        raise InfeasiblePattern("zero spectrum entry would make the map rank deficient")

    rng = np.random.default_rng(seed)
    if remainder == "random" and m < n * q:
        alpha = 0.5 * rng.standard_normal(m)
        if field == "complex":
            alpha = alpha + 0.5j * rng.standard_normal(m)
    else:
        alpha = np.zeros(m)
    ahat = StructuredMap(n, q, pattern, alpha, field).matrix
    Q = _seeded_orthonormal(m, seed + 1, field)
    H = (Q * vals) @ Q.conj().T
    H = (H + H.conj().T) / 2
    C = ahat.conj().T @ H.T @ ahat
    return from_choi(C, n, field)


# Parameter choice flipping the Toeplitz family: positive over the reals,
# not positive over the complexes, not completely positive either way.
TOEPLITZ_FLIP: dict[str, float] = {
    "a1": 1.0, "b1": 0.0, "b2": 1.0, "b3": -2.0, "c1": 0.0, "c3": 0.0,
}

_UPPER_DEFAULTS: dict[str, float] = {
    "a1": 1.0, "b1": 0.5, "b2": 2.0, "c1": 0.25, "c2": -0.5, "c3": 1.5,
}
_TOEPLITZ_DEFAULTS: dict[str, float] = {
    "a1": 2.0, "b1": 0.0, "b2": 1.5, "b3": -0.75, "c1": 0.0, "c3": 0.0,
}
_EMBEDDED_DEFAULT_POSITIONS: tuple[tuple[int, int], ...] = (
    (0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2),
)


def _merge(name: str, defaults: dict[str, Any],
           overrides: dict[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(overrides) - set(defaults))
    if unknown:
        raise ParseError(
            f"unknown parameter(s) {', '.join(unknown)} for zoo entry {name!r}; "
            f"expected among: {', '.join(sorted(defaults))}"
        )
    merged = dict(defaults)
    merged.update(overrides)
    return merged


def _entry_transpose2(field: str, seed: int, params: dict[str, Any]) -> ZooEntry:
    p = _merge("transpose2", {"n": 2}, params)
    n = int(p["n"])
    spec = transpose_map(n, field)
    expected = {
        "star_linear": True,
        "m": n * n,
        "c1": False,
        "positive": True,
        "completely_positive": False,
    }
    return ZooEntry("transpose2", {"n": n}, spec, expected)


def _entry_upper2x2(field: str, seed: int, params: dict[str, Any]) -> ZooEntry:
    p = _merge("upper2x2", _UPPER_DEFAULTS, params)
    spec = upper_triangular_2x2(p["a1"], p["b1"], p["b2"], p["c1"], p["c2"],
                                p["c3"], field)
    expected = {"star_linear": True, "m": 3, "c1": False,
                "positivity_implies_cp": True}
    return ZooEntry("upper2x2", p, spec, expected)


def _entry_toeplitz2x2(field: str, seed: int, params: dict[str, Any]) -> ZooEntry:
    p = _merge("toeplitz2x2", _TOEPLITZ_DEFAULTS, params)
    spec = toeplitz_2x2(p["a1"], p["b1"], p["b2"], p["b3"], p["c1"], p["c3"],
                        field)
    expected = {"star_linear": True, "m": 3, "c1": False}
    return ZooEntry("toeplitz2x2", p, spec, expected)


def _entry_embedded(field: str, seed: int, params: dict[str, Any]) -> ZooEntry:
    defaults = {"n": 3, "q": 3, "positions": _EMBEDDED_DEFAULT_POSITIONS}
    p = _merge("embedded", defaults, params)
    n, q = int(p["n"]), int(p["q"])
    positions = tuple((int(i), int(j)) for i, j in p["positions"])
    spec = embedded_full_block(n, q, positions, seed, field)
    expected = {
        "star_linear": True,
        "m": len(positions),
        "positive": True,
        "completely_positive": False,
    }
    return ZooEntry("embedded", {"n": n, "q": q, "positions": positions,
                                 "seed": seed}, spec, expected)


def _entry_random(field: str, seed: int, params: dict[str, Any]) -> ZooEntry:
    defaults = {"n": 2, "q": 2, "pattern": ((0, 0), (1, 1)),
                "spectrum": (1.0, 2.0), "remainder": "zero"}
    p = _merge("random", defaults, params)
    n, q = int(p["n"]), int(p["q"])
    pattern = tuple((int(i), int(j)) for i, j in p["pattern"])
    spectrum = tuple(float(s) for s in np.asarray(p["spectrum"]).real)
    spec = random_star_linear(n, q, pattern, spectrum, seed, field,
                              p["remainder"])
    expected = {
        "star_linear": True,
        "m": len(pattern),
        "completely_positive": min(spectrum) > 0,
    }
    return ZooEntry("random", {"n": n, "q": q, "pattern": pattern,
                               "spectrum": spectrum, "seed": seed,
                               "remainder": p["remainder"]}, spec, expected)


_BUILDERS: dict[str, Callable[[str, int, dict[str, Any]], ZooEntry]] = {
    "transpose2": _entry_transpose2,
    "upper2x2": _entry_upper2x2,
    "toeplitz2x2": _entry_toeplitz2x2,
    "embedded": _entry_embedded,
    "random": _entry_random,
}


def names() -> tuple[str, ...]:
    """Addressable entry names, in presentation order."""
    return tuple(_BUILDERS)


def entry(name: str, field: str = "complex", seed: int = 0,
          **params: Any) -> ZooEntry:
    """Build a named example with optional parameter overrides.

    Unknown names and unknown parameter keys raise ParseError so callers
    can report them as input errors.
    """
    if name not in _BUILDERS:
        raise ParseError(
            f"unknown zoo entry {name!r}; available: {', '.join(_BUILDERS)}"
        )
    _require_field(field)
    return _BUILDERS[name](field, seed, params)
