"""Block-pattern structure of a map and the coincidence verdict.

A map's structure is its set of independent block positions inside the
n x q grid of L-blocks, together with how the remaining blocks expand
over them.  Three remainder kinds matter: zero (all other blocks vanish),
single (every other block uses one shared coefficient vector), and
heterogeneous (anything else).

The independence condition on positions (i_k, j_k), k = 1..m, asks that
every position have either its row or its column unshared among the
others.  The seven escape conditions are, in order: a free row, a free
column, two distinct repeated rows, two distinct repeated columns, all
rows distinct (nontrivially when q = 1), all columns distinct
(nontrivially when n = 1), and an isolated position with m > 1.  When
the independence condition holds but every escape condition fails, the
pattern is one of exactly three shapes: a full one-column grid, a full
one-row grid, or a cross (one nearly full row and one nearly full
column meeting at an unselected pivot).
"""

from __future__ import annotations

import dataclasses
from collections import Counter

import numpy as np

from .core import max_abs
from .errors import PatternViolation, SpanViolation
from .hill import expansion_coefficients, select_blocks
from .mapmodel import MapSpec

REMAINDER_ZERO = "zero"
REMAINDER_SINGLE = "single"
REMAINDER_HETERO = "hetero"

VERDICT_COINCIDE = "guaranteed_coincide"
VERDICT_UNKNOWN = "unknown"

REASON_ROW_OR_COLUMN = "single_row_or_column"
REASON_ZERO_REMAINDER = "zero_remainder"
REASON_MAIN = "main_theorem"
REASON_EXCEPTIONAL = "exceptional_real_cross"
REASON_C1_FAILS = "independence_fails"
REASON_HETERO = "heterogeneous_remainder"

CASE_I = "case_i"
CASE_II = "case_ii"
CASE_III = "case_iii"


def _check_positions(positions, n: int, q: int) -> tuple[tuple[int, int], ...]:
    pos = tuple((int(i), int(j)) for i, j in positions)
    seen = set()
    for i, j in pos:
        if not (0 <= i < n and 0 <= j < q):
            raise PatternViolation(f"position ({i}, {j}) outside the {n} x {q} grid")
        if (i, j) in seen:
            raise PatternViolation(f"duplicate position ({i}, {j})")
        seen.add((i, j))
    return pos


def condition_c1(positions) -> bool:
    """Every position has an unshared row or an unshared column."""
    positions = tuple(positions)
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    return all(rows[i] == 1 or cols[j] == 1 for i, j in positions)


@dataclasses.dataclass(frozen=True)
class C2Flags:
    free_row: bool
    free_col: bool
    two_repeated_rows: bool
    two_repeated_cols: bool
    rows_distinct: bool
    cols_distinct: bool
    isolated: bool

    @property
    def any(self) -> bool:
        return (self.free_row or self.free_col or self.two_repeated_rows
                or self.two_repeated_cols or self.rows_distinct
                or self.cols_distinct or self.isolated)

    def ordered(self) -> tuple[bool, ...]:
        return (self.free_row, self.free_col, self.two_repeated_rows,
                self.two_repeated_cols, self.rows_distinct,
                self.cols_distinct, self.isolated)


def c2_flags(positions, n: int, q: int) -> C2Flags:
    """Evaluate the seven escape conditions for the position set."""
    positions = _check_positions(positions, n, q)
    m = len(positions)
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    repeated_rows = [i for i, c in rows.items() if c >= 2]
    repeated_cols = [j for j, c in cols.items() if c >= 2]
    rows_distinct = len(rows) == m
    cols_distinct = len(cols) == m
    return C2Flags(
        free_row=len(rows) < n,
        free_col=len(cols) < q,
        two_repeated_rows=len(repeated_rows) >= 2,
        two_repeated_cols=len(repeated_cols) >= 2,
        rows_distinct=rows_distinct and not (q == 1 and m == n),
        cols_distinct=cols_distinct and not (n == 1 and m == q),
        isolated=m > 1 and any(rows[i] == 1 and cols[j] == 1 for i, j in positions),
    )


@dataclasses.dataclass(frozen=True)
class CaseInfo:
    """One of the three no-escape shapes.

    For the cross, pivot is the unselected meeting cell (r, s) and order
    permutes the original position list into canonical order: first the
    q - 1 positions of row r by ascending column, then the n - 1
    positions of column s by ascending row.
    """

    kind: str
    pivot: tuple[int, int] | None = None
    order: tuple[int, ...] | None = None


def classify_case(positions, n: int, q: int) -> CaseInfo | None:
    """Detect the full-column, full-row, or cross shape (else None)."""
    positions = _check_positions(positions, n, q)
    m = len(positions)
    if q == 1 and m == n:
        return CaseInfo(CASE_I)
    if n == 1 and m == q:
        return CaseInfo(CASE_II)
    if n < 3 or q < 3 or m != n + q - 2:
        return None
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    cand_r = [i for i, c in rows.items() if c == q - 1]
    cand_s = [j for j, c in cols.items() if c == n - 1]
    if len(cand_r) != 1 or len(cand_s) != 1:
        return None
    r, s = cand_r[0], cand_s[0]
    if (r, s) in positions:
        return None
    row_part = [(k, p) for k, p in enumerate(positions) if p[0] == r]
    col_part = [(k, p) for k, p in enumerate(positions) if p[0] != r and p[1] == s]
    if len(row_part) != q - 1 or len(col_part) != n - 1:
        return None
    if {p[1] for _, p in row_part} != set(range(q)) - {s}:
        return None
    if {p[0] for _, p in col_part} != set(range(n)) - {r}:
        return None
    if len(row_part) + len(col_part) != m:
        return None
    row_part.sort(key=lambda kp: kp[1][1])
    col_part.sort(key=lambda kp: kp[1][0])
    order = tuple(k for k, _ in row_part) + tuple(k for k, _ in col_part)
    return CaseInfo(CASE_III, (r, s), order)


@dataclasses.dataclass(frozen=True, eq=False)
class StructurePattern:
    """Selected positions plus the remainder expansion."""

    n: int
    q: int
    positions: tuple[tuple[int, int], ...]
    remainder: str
    alpha: np.ndarray | None
    coefficients: dict[tuple[int, int], np.ndarray] | None = None

    @property
    def m(self) -> int:
        return len(self.positions)


def detect_pattern(spec: MapSpec, rtol: float = 1e-9,
                   positions=None) -> StructurePattern:
    """Detect the structure of a map's block pattern.

    With positions=None the greedy row-major selection is used; an
    explicit selection must be independent and spanning (SpanViolation
    otherwise).
    """
    n, q = spec.n, spec.q
    if positions is None:
        positions, _ = select_blocks(spec, rtol)
    positions = _check_positions(positions, n, q)
    coeffs = expansion_coefficients(spec, positions, rtol)
    m = len(positions)
    rest = [p for p in sorted(coeffs) if p not in set(positions)]
    if not rest:
        return StructurePattern(n, q, positions, REMAINDER_ZERO,
                                np.zeros(m), coeffs)
    mats = [coeffs[p] for p in rest]
    big = max(max_abs(v) for v in mats)
    ztol = max(rtol, 1e-12)
    if big <= ztol:
        return StructurePattern(n, q, positions, REMAINDER_ZERO,
                                np.zeros(m), coeffs)
    ref = mats[0]
    if all(max_abs(v - ref) <= ztol * max(1.0, big) for v in mats):
        return StructurePattern(n, q, positions, REMAINDER_SINGLE,
                                ref.copy(), coeffs)
    return StructurePattern(n, q, positions, REMAINDER_HETERO, None, coeffs)


@dataclasses.dataclass(frozen=True)
class Classification:
    """Combinatorial conditions of a detected pattern, bundled.

    sum_alpha_is_one is None when no shared coefficient vector exists
    (heterogeneous remainder).
    """

    c1: bool
    c2: C2Flags
    case: CaseInfo | None
    sum_alpha_is_one: bool | None


def classify(pattern: StructurePattern) -> Classification:
    c1 = condition_c1(pattern.positions)
    c2 = c2_flags(pattern.positions, pattern.n, pattern.q)
    case = classify_case(pattern.positions, pattern.n, pattern.q)
    unit = None
    if pattern.alpha is not None:
        s = np.sum(pattern.alpha)
        unit = bool(abs(s - 1.0) <= 1e-12 * max(1.0, abs(s)))
    return Classification(c1, c2, case, unit)


def _cross_alpha_sums(pattern: StructurePattern) -> tuple[float, float] | None:
    """Group coefficient sums (row part, column part) for a cross pattern."""
    info = classify_case(pattern.positions, pattern.n, pattern.q)
    if info is None or info.kind != CASE_III or pattern.alpha is None:
        return None
    a = pattern.alpha[list(info.order)]
    g1 = np.sum(a[: pattern.q - 1])
    g2 = np.sum(a[pattern.q - 1:])
    return float(np.real(g1)), float(np.real(g2))


def verdict_for_pattern(pattern: StructurePattern, field: str) -> tuple[str, str]:
    """Decide whether positivity and complete positivity must coincide.

    Pure pattern logic; no map data needed beyond the detected structure.
    """
    pos = pattern.positions
    if pos and (len({i for i, _ in pos}) == 1 or len({j for _, j in pos}) == 1):
        return VERDICT_COINCIDE, REASON_ROW_OR_COLUMN
    if not condition_c1(pos):
        return VERDICT_UNKNOWN, REASON_C1_FAILS
    if pattern.remainder == REMAINDER_ZERO:
        return VERDICT_COINCIDE, REASON_ZERO_REMAINDER
    if pattern.remainder == REMAINDER_HETERO:
        return VERDICT_UNKNOWN, REASON_HETERO
    if field == "real":
        sums = _cross_alpha_sums(pattern)
        if sums is not None:
            a1, a2 = sums
            if 4 * np.real(a1) * np.real(a2) > 1:
                return VERDICT_COINCIDE, REASON_EXCEPTIONAL
    return VERDICT_COINCIDE, REASON_MAIN


@dataclasses.dataclass(frozen=True, eq=False)
class VerdictReport:
    verdict: str
    reason: str
    pattern: StructurePattern
    selections_tried: int


def _alternate_selections(spec: MapSpec, base, rtol: float, limit: int):
    """Breadth-first single-block exchanges of the selection, spanning only."""
    from .core import numeric_rank, vec
    from .mapmodel import l_block

    n, q = spec.n, spec.q
    all_pos = [(i, j) for i in range(n) for j in range(q)]
    blockvec = {p: vec(l_block(spec.L, p[0], p[1], n, q)) for p in all_pos}
    m = len(base)
    seen = {frozenset(base)}
    queue = [tuple(base)]
    yielded = 0
    while queue and yielded < limit:
        sel = queue.pop(0)
        for k in range(m):
            for cand in all_pos:
                if cand in sel:
                    continue
                new = sel[:k] + (cand,) + sel[k + 1:]
                fs = frozenset(new)
                if fs in seen:
                    continue
                seen.add(fs)
                stack = np.stack([blockvec[p] for p in new], axis=1)
                if numeric_rank(stack, rtol) != m:
                    continue
                yielded += 1
                queue.append(new)
                yield new
                if yielded >= limit:
                    return


def theorem_verdict(spec: MapSpec, rtol: float = 1e-9,
                    max_selections: int = 32) -> VerdictReport:
    """Coincidence verdict for the map, retrying alternate selections.

    When the greedy selection yields an unknown verdict, up to
    max_selections - 1 alternate maximal selections (single-block
    exchanges) are examined; the first one giving a guaranteed verdict
    wins.
    """
    pattern = detect_pattern(spec, rtol)
    verdict, reason = verdict_for_pattern(pattern, spec.field)
    tried = 1
    if verdict == VERDICT_UNKNOWN and max_selections > 1:
        for alt in _alternate_selections(spec, pattern.positions, rtol,
                                         max_selections - 1):
            tried += 1
            try:
                p2 = detect_pattern(spec, rtol, positions=alt)
            except SpanViolation:
                continue
            v2, r2 = verdict_for_pattern(p2, spec.field)
            if v2 == VERDICT_COINCIDE:
                return VerdictReport(v2, r2, p2, tried)
    return VerdictReport(verdict, reason, pattern, tried)
