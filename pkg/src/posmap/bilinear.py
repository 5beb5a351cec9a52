"""Constructive surjectivity of the structured bilinear map.

For a pattern of m positions (i_k, j_k) in the n x q grid with a shared
remainder coefficient vector alpha, the structured matrix is
Ahat = E + alpha v^T, where row k of E is the unit vector at coordinate
j_k * n + i_k of F^{nq} and v marks the unselected coordinates.  Acting
on a product vector,

    Ahat (z (x) x)_k = z_{j_k} x_{i_k} + alpha_k * (sz * sx - t),

with sz = sum(z), sx = sum(x) and t the sum of the position products.
construct_witness solves Ahat (z (x) x) = y in closed form, dispatching
on the escape conditions of the pattern and on whether sum(alpha) is 1;
each branch is one constructive recipe.  The plain product system
E (z (x) x) = y and its variant with the side constraint sz * sx = 0
have their own solvers, reused by the branches.

membership_solve is an independent numerical check (alternating least
squares) and range_oracle_grid an exhaustive product-grid oracle for
small sizes; the tests hold all three against each other.
"""

from __future__ import annotations

import dataclasses
from collections import Counter

import numpy as np

from .core import max_abs
from .errors import (FieldViolation, LengthMismatch, NotInRange,
                     PatternViolation, TooLarge, UnsupportedPattern)
from .pattern import (CASE_III, c2_flags, classify_case, condition_c1,
                      _check_positions)

_DOUBLING_CAP = 60
_UNIT_SUM_TOL = 1e-12

SURJECTIVE = "surjective"
NOT_SURJECTIVE = "not_surjective"
REASON_DEPENDENT = "dependent_positions"
REASON_EXCEPTIONAL_CROSS = "exceptional_real_cross"


@dataclasses.dataclass(frozen=True, eq=False)
class StructuredMap:
    """Pattern positions plus one shared remainder coefficient vector."""

    n: int
    q: int
    positions: tuple[tuple[int, int], ...]
    alpha: np.ndarray
    field: str = "complex"

    def __post_init__(self):
        pos = _check_positions(self.positions, self.n, self.q)
        object.__setattr__(self, "positions", pos)
        a = np.asarray(self.alpha)
        if a.shape != (len(pos),):
            raise LengthMismatch(
                f"alpha must have length m={len(pos)}, got shape {a.shape}"
            )
        if self.field == "real":
            if np.iscomplexobj(a):
                if max_abs(a.imag) > 1e-12 * max(1.0, max_abs(a)):
                    raise FieldViolation("complex alpha for the real field")
                a = a.real
            a = a.astype(np.float64)
        else:
            a = a.astype(np.complex128)
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def m(self) -> int:
        return len(self.positions)

    @property
    def matrix(self) -> np.ndarray:
        """Dense m x nq matrix E + alpha v^T."""
        n, q, m = self.n, self.q, self.m
        dtype = np.float64 if self.field == "real" else np.complex128
        A = np.zeros((m, n * q), dtype=dtype)
        v = np.ones(n * q)
        for k, (i, j) in enumerate(self.positions):
            A[k, j * n + i] = 1.0
            v[j * n + i] = 0.0
        return A + np.outer(self.alpha, v)

    def value(self, z, x) -> np.ndarray:
        """Ahat (z (x) x) through the structured formula."""
        z = np.asarray(z).reshape(-1)
        x = np.asarray(x).reshape(-1)
        if z.size != self.q or x.size != self.n:
            raise LengthMismatch(
                f"need z of length {self.q} and x of length {self.n}"
            )
        prods = np.array([z[j] * x[i] for i, j in self.positions])
        corr = z.sum() * x.sum() - prods.sum()
        return prods + self.alpha * corr


@dataclasses.dataclass(frozen=True, eq=False)
class Witness:
    z: np.ndarray
    x: np.ndarray
    residual: float
    branch: str


@dataclasses.dataclass(frozen=True, eq=False)
class SurjectivityVerdict:
    decision: str
    reason: str
    counterexample: np.ndarray | None = None
    panel_size: int = 0
    max_residual: float | None = None


@dataclasses.dataclass(frozen=True)
class GridMembership:
    reachable: bool
    best_residual: float
    tau: float


@dataclasses.dataclass(frozen=True, eq=False)
class ShiftInverse:
    """Inverse data for the shift matrix I - alpha ones^T."""
    inverse: np.ndarray | None
    kernel: np.ndarray | None
    cokernel: np.ndarray | None

    @property
    def invertible(self) -> bool:
        return self.inverse is not None


def sherman_morrison(alpha) -> ShiftInverse:
    """Invert I - alpha ones^T, or report its kernel and cokernel.

    By the rank-one update formula the inverse is
    I + alpha ones^T / (1 - sum(alpha)) whenever sum(alpha) != 1.  At
    sum(alpha) == 1 the matrix is singular: the kernel is spanned by
    alpha itself and the cokernel by the all-ones vector.
    """
    a = np.asarray(alpha).reshape(-1)
    m = a.size
    s = a.sum()
    if abs(s - 1.0) <= _UNIT_SUM_TOL:
        return ShiftInverse(None, a.copy(), np.ones(m, dtype=a.dtype))
    inv = np.eye(m) + np.outer(a, np.ones(m)) / (1.0 - s)
    return ShiftInverse(inv, None, None)


def _cast_target(y, m: int, field: str) -> np.ndarray:
    y = np.asarray(y).reshape(-1)
    if y.size != m:
        raise LengthMismatch(f"target must have length m={m}, got {y.size}")
    if field == "real":
        if np.iscomplexobj(y):
            if max_abs(y.imag) > 1e-12 * max(1.0, max_abs(y)):
                raise FieldViolation("complex target for the real field")
            y = y.real
        return y.astype(np.float64)
    return y.astype(np.complex128)


def sum_is_one(alpha) -> bool:
    s = np.sum(alpha)
    return abs(s - 1.0) <= _UNIT_SUM_TOL * max(1.0, abs(s))


def _transposed(sm: StructuredMap) -> StructuredMap:
    """Swap the two factors; Ahat_T (x (x) z) = Ahat (z (x) x)."""
    return StructuredMap(n=sm.q, q=sm.n,
                         positions=tuple((j, i) for i, j in sm.positions),
                         alpha=sm.alpha, field=sm.field)


def _pick(candidates, *forbidden, tol: float = 1e-9):
    """First candidate at distance > tol from every forbidden value."""
    for c in candidates:
        if all(abs(c - f) > tol for f in forbidden):
            return c
    raise UnsupportedPattern("no admissible parameter value found")


# ---------------------------------------------------------------------------
# product system E (z (x) x) = y under the independence condition


def _c1_factor(positions, n: int, q: int, y: np.ndarray):
    """Exact solution of the plain product system.

    Positions with an unshared column get z_{j_k} = y_k, x_{i_k} = 1;
    the rest (unshared row) get x_{i_k} = y_k, z_{j_k} = 1.  The two
    assignment kinds never collide on a coordinate.
    """
    z = np.zeros(q, dtype=y.dtype)
    x = np.zeros(n, dtype=y.dtype)
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    for k, (i, j) in enumerate(positions):
        if cols[j] == 1:
            z[j] = y[k]
            x[i] = 1.0
        elif rows[i] == 1:
            x[i] = y[k]
            z[j] = 1.0
        else:
            raise UnsupportedPattern("independence condition fails")
    return z, x


def _e2_two_cols(positions, n, q, y, ca, cb):
    """Zero-product-sum solve when columns ca and cb are both repeated."""
    z, x = _c1_factor(positions, n, q, y)
    S = -(z.sum() - z[ca] - z[cb])
    t = _pick([1.0, 2.0, -1.0, 3.0], 0.0, S)
    z[ca] = t
    z[cb] = S - t
    for k, (i, j) in enumerate(positions):
        if j == ca:
            x[i] = y[k] / t
        elif j == cb:
            x[i] = y[k] / (S - t)
    return z, x


def _e2_solve(positions, n: int, q: int, y: np.ndarray):
    """Solve E (z (x) x) = y with the side constraint sum(z) * sum(x) = 0.

    Requires the independence condition plus at least one escape
    condition; dispatches on the first that holds, in their fixed order.
    """
    f = c2_flags(positions, n, q)
    if f.free_row:
        z, x = _c1_factor(positions, n, q, y)
        i0 = min(set(range(n)) - {i for i, _ in positions})
        x[i0] = -x.sum()
        return z, x
    if f.free_col:
        z, x = _c1_factor(positions, n, q, y)
        j0 = min(set(range(q)) - {j for _, j in positions})
        z[j0] = -z.sum()
        return z, x
    if f.two_repeated_rows:
        rows = Counter(i for i, _ in positions)
        rep = sorted(i for i, c in rows.items() if c >= 2)
        tpos = [(j, i) for i, j in positions]
        zt, xt = _e2_two_cols(tpos, q, n, y, rep[0], rep[1])
        return xt, zt
    if f.two_repeated_cols:
        cols = Counter(j for _, j in positions)
        rep = sorted(j for j, c in cols.items() if c >= 2)
        return _e2_two_cols(positions, n, q, y, rep[0], rep[1])
    if f.rows_distinct:
        # q >= 2 here: q = 1 with a spare row is the free-row case, and
        # q = 1 with m = n disables this flag
        z = np.ones(q, dtype=y.dtype)
        z[0] = 1.0 - q
        x = np.zeros(n, dtype=y.dtype)
        for k, (i, j) in enumerate(positions):
            x[i] = y[k] / z[j]
        return z, x
    if f.cols_distinct:
        tpos = [(j, i) for i, j in positions]
        zt, xt = _e2_solve(tpos, q, n, y)
        return xt, zt
    if f.isolated:
        rows = Counter(i for i, _ in positions)
        cols = Counter(j for _, j in positions)
        kdag = next(k for k, (i, j) in enumerate(positions)
                    if rows[i] == 1 and cols[j] == 1)
        idag, jdag = positions[kdag]
        cstar = next(j for j, c in cols.items() if c >= 2)
        z, x = _c1_factor(positions, n, q, y)
        S0 = z.sum() - z[jdag]
        if abs(S0) > 1e-9:
            z[jdag] = -S0
            x[idag] = y[kdag] / z[jdag]
        else:
            # the other columns balance already; shift weight between the
            # isolated column and a repeated one, whose x entries absorb it
            a = _pick([1.0, 2.0, -1.0], 0.0, z[cstar])
            z[jdag] = a
            x[idag] = y[kdag] / a
            newc = z[cstar] - a
            for k, (i, j) in enumerate(positions):
                if j == cstar:
                    x[i] = y[k] / newc
            z[cstar] = newc
        return z, x
    raise UnsupportedPattern("no escape condition holds")


# ---------------------------------------------------------------------------
# single row / column and the simple remainder branches


def _branch_row(sm: StructuredMap, y: np.ndarray):
    r = sm.positions[0][0]
    z = np.zeros(sm.q, dtype=y.dtype)
    x = np.zeros(sm.n, dtype=y.dtype)
    x[r] = 1.0
    for k, (_, j) in enumerate(sm.positions):
        z[j] = y[k]
    return z, x


def _branch_b(sm: StructuredMap, y: np.ndarray):
    """Remainder sum away from one, some escape condition: shift, then
    solve the zero-sum product system."""
    yh = sherman_morrison(sm.alpha).inverse @ y
    return _e2_solve(sm.positions, sm.n, sm.q, yh)


def _branch_c_direct(sm: StructuredMap, y: np.ndarray):
    """Free column j0, any remainder: solve products, fix the balance.

    Adding b to z_{j0} leaves the products alone and moves the global
    correction through (sz + b) * sx, so b makes that product match the
    sum of the targets.
    """
    positions, n, q = sm.positions, sm.n, sm.q
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    j0 = min(set(range(q)) - set(cols))
    yt = np.sum(y)
    if len(rows) == len(positions):
        z = np.ones(q, dtype=y.dtype)
        x = np.zeros(n, dtype=y.dtype)
        for k, (i, _) in enumerate(positions):
            x[i] = y[k]
        # sx equals yt, so sz = 1 works whether or not yt vanishes
        z[j0] += 1.0 - z.sum()
        return z, x
    if len(cols) == len(positions):
        x = np.ones(n, dtype=y.dtype)
        z = np.zeros(q, dtype=y.dtype)
        for k, (_, j) in enumerate(positions):
            z[j] = y[k]
        z[j0] += (yt - z.sum() * n) / n
        return z, x
    rstar = next(i for i, c in rows.items() if c >= 2)
    z, x = _c1_factor(positions, n, q, y)
    rest = x.sum() - x[rstar]
    u = max([1.0, 2.0, -1.0, 3.0], key=lambda t: abs(rest + t))
    x[rstar] = u
    for k, (i, j) in enumerate(positions):
        if i == rstar:
            z[j] = y[k] / u
    sx = x.sum()
    z[j0] += (yt - z.sum() * sx) / sx
    return z, x


def _branch_d_direct(sm: StructuredMap, y: np.ndarray):
    """Unit-sum remainder, every column used exactly once: x = ones.

    The map z -> Ahat (z (x) 1) is P + (n - 1) alpha 1^T for a
    permutation P; its determinant is plus or minus n, never zero.
    """
    positions, n, q = sm.positions, sm.n, sm.q
    dtype = np.float64 if sm.field == "real" else np.complex128
    M = np.zeros((sm.m, q), dtype=dtype)
    for k, (_, j) in enumerate(positions):
        M[k, j] = 1.0
    M = M + (n - 1) * np.outer(sm.alpha, np.ones(q))
    z = np.linalg.solve(M, y.astype(M.dtype))
    x = np.ones(n, dtype=z.dtype)
    return z, x


# ---------------------------------------------------------------------------
# grouped solver: unit-sum remainder with repeated rows and columns


def _grouped_sum1(sm: StructuredMap, y: np.ndarray, ca: int, cb: int,
                  rstar: int, rtol: float):
    """Unit-sum core: column groups at ca and cb, row group at rstar.

    Solves E (z (x) x) = w with sz * sx = lam, where lam = sum(y) is
    forced and w = y - alpha * lam (so sum(w) = 0).  Group variables
    za = z_{ca}, zb = z_{cb}, u = x_{rstar}; everything else comes from
    the plain product solve and stays fixed, contributing the constants
    l1 (x-sum beyond the groups) and l2 (z-sum beyond).  The constraint
    factors as F1 * F2 = lam with F1 = w1/za + w2/zb + u + l1 and
    F2 = za + zb + w3/u + l2.
    """
    positions, n, q = sm.positions, sm.n, sm.q
    lam = np.sum(y)
    w = y - sm.alpha * lam
    scale = max(1.0, float(max_abs(y)))
    tiny = 1e-13 * scale

    ga = [k for k, (_, j) in enumerate(positions) if j == ca]
    gb = [k for k, (_, j) in enumerate(positions) if j == cb]
    gr = [k for k, (i, j) in enumerate(positions)
          if i == rstar and j not in (ca, cb)]
    w1 = sum(w[k] for k in ga)
    w2 = sum(w[k] for k in gb)
    w3 = sum(w[k] for k in gr)
    group_rows = {positions[k][0] for k in ga + gb} | {rstar}
    group_cols = {ca, cb} | {positions[k][1] for k in gr}

    z0, x0 = _c1_factor(positions, n, q, w)

    def lam12():
        l1 = sum(x0[i] for i in range(n) if i not in group_rows)
        l2 = sum(z0[j] for j in range(q) if j not in group_cols)
        return l1, l2

    def finish(za, zb, u):
        if abs(za) <= tiny or abs(zb) <= tiny or abs(u) <= tiny:
            return None
        z, x = z0.copy(), x0.copy()
        z[ca], z[cb], x[rstar] = za, zb, u
        for k, (i, j) in enumerate(positions):
            if j == ca:
                x[i] = w[k] / za
            elif j == cb:
                x[i] = w[k] / zb
            elif i == rstar:
                z[j] = w[k] / u
        res = float(np.linalg.norm(sm.value(z, x) - y))
        if res <= 1e-7 * scale:
            return z, x
        return None

    def solve_with(l1, l2):
        if abs(lam) <= tiny:
            u = 1.0
            for za in (1.0, 2.0, 3.0):
                zb = -(za + w3 / u + l2)
                if abs(zb) > tiny:
                    got = finish(za, zb, u)
                    if got:
                        return got
            return None
        if abs(w3) <= tiny:
            t = 1.0
            for _ in range(_DOUBLING_CAP):
                F2 = 2 * t + l2
                if abs(F2) > tiny:
                    u = lam / F2 - (w1 + w2) / t - l1
                    if abs(u) > tiny:
                        got = finish(t, t, u)
                        if got:
                            return got
                t *= 2
            return None
        if abs(w1) <= tiny:
            zb, u = 1.0, 1.0
            for _ in range(_DOUBLING_CAP):
                F1 = w2 / zb + u + l1
                if abs(F1) > tiny:
                    za = lam / F1 - zb - w3 / u - l2
                    if abs(za) > tiny:
                        got = finish(za, zb, u)
                        if got:
                            return got
                u *= 2
            return None
        if abs(w2) <= tiny:
            za, u = 1.0, 1.0
            for _ in range(_DOUBLING_CAP):
                F1 = w1 / za + u + l1
                if abs(F1) > tiny:
                    zb = lam / F1 - za - w3 / u - l2
                    if abs(zb) > tiny:
                        got = finish(za, zb, u)
                        if got:
                            return got
                u *= 2
            return None

        # generic: force F1 = 1, eliminate u, solve the quadratic in za
        def try_zb(zb):
            a = zb * (1.0 - l1) - w2
            b = (zb * zb * (1.0 - l1)
                 + zb * (w3 - w1 - w2 - (1.0 - l1) * (lam - l2))
                 + w2 * (lam - l2))
            c = zb * (lam - l2) * w1 - zb * zb * w1
            if abs(a) <= tiny or abs(c) <= tiny:
                return None
            disc = b * b - 4 * a * c
            if sm.field == "real" and disc < 0:
                return None
            sq = np.sqrt(disc if sm.field == "real" else complex(disc))
            for za in sorted([(-b + sq) / (2 * a), (-b - sq) / (2 * a)],
                             key=abs, reverse=True):
                if abs(za) <= tiny:
                    continue
                u = 1.0 - l1 - w1 / za - w2 / zb
                got = finish(za, zb, u)
                if got:
                    return got
            return None

        if sm.field == "complex" or abs(1.0 - l1) > tiny:
            zb = 1.0
            for _ in range(_DOUBLING_CAP):
                got = try_zb(zb)
                if got:
                    return got
                zb *= 2
            return None
        if abs(lam - l2) > tiny:
            zb = 1.0
            for _ in range(_DOUBLING_CAP):
                got = try_zb(zb)
                if got:
                    return got
                zb /= 2
            return None
        return "deadlock"

    result = solve_with(*lam12())
    if result == "deadlock":
        # l1 = 1 and l2 = lam exactly: nudge one beyond-group variable.
        # Some beyond-group position exists because l2 = lam is nonzero,
        # and refreshing its partners keeps every product intact (their
        # other coordinates are unshared under independence).
        cols_cnt = Counter(j for _, j in positions)
        beyond = [(k, i, j) for k, (i, j) in enumerate(positions)
                  if j not in group_cols and i not in group_rows]
        xb = next((b for b in beyond if cols_cnt[b[2]] == 1), None)
        if xb is not None:
            _, i, _ = xb
            a = _pick([1.0, 2.0], 0.0, -x0[i])
            x0[i] += a
            for k, (i2, j2) in enumerate(positions):
                if i2 == i:
                    z0[j2] = w[k] / x0[i]
        elif beyond:
            _, _, j = beyond[0]
            a = _pick([1.0, 2.0], 0.0, -z0[j])
            z0[j] += a
            for k, (i2, j2) in enumerate(positions):
                if j2 == j:
                    x0[i2] = w[k] / z0[j]
        result = solve_with(*lam12()) if beyond else None
    if result is None or result == "deadlock":
        raise UnsupportedPattern("grouped construction failed to converge")
    return result


def _branch_e_direct(sm: StructuredMap, y: np.ndarray, rtol: float):
    """Two repeated columns plus, by exclusion, a repeated row."""
    cols = Counter(j for _, j in sm.positions)
    rows = Counter(i for i, _ in sm.positions)
    rep_cols = sorted(j for j, c in cols.items() if c >= 2)
    rep_rows = sorted(i for i, c in rows.items() if c >= 2)
    if len(rep_cols) < 2 or not rep_rows:
        raise UnsupportedPattern("grouped branch preconditions fail")
    return _grouped_sum1(sm, y, rep_cols[0], rep_cols[1], rep_rows[0], rtol)


def _branch_f(sm: StructuredMap, y: np.ndarray, rtol: float):
    """One repeated column, one repeated row, one isolated position.

    The isolated position's column serves as the second column group
    (with a single entry); the algebra is unchanged.
    """
    cols = Counter(j for _, j in sm.positions)
    rows = Counter(i for i, _ in sm.positions)
    rep_cols = [j for j, c in cols.items() if c >= 2]
    rep_rows = [i for i, c in rows.items() if c >= 2]
    iso = [p for p in sm.positions if rows[p[0]] == 1 and cols[p[1]] == 1]
    if len(rep_cols) != 1 or len(rep_rows) != 1 or not iso:
        raise UnsupportedPattern("grouped branch preconditions fail")
    return _grouped_sum1(sm, y, rep_cols[0], iso[0][1], rep_rows[0], rtol)


# ---------------------------------------------------------------------------
# cross patterns


def case3_real_range_test(y, q: int, tol: float = 1e-12) -> bool:
    """Attainability over the reals for a cross with 4 a1 a2 > 1.

    y must be in canonical cross order (q - 1 row-part entries first).
    Attainable iff a group sum is nonzero or a whole group vanishes.
    """
    y = np.asarray(y).reshape(-1)
    thr = tol * max(1.0, float(max_abs(y)))
    y1, y2 = y[: q - 1], y[q - 1:]
    if abs(np.sum(y1)) > thr or abs(np.sum(y2)) > thr:
        return True
    return bool(max_abs(y1) <= thr or max_abs(y2) <= thr)


def _cross_assemble(sm, info, yc, rho, ac, x_r, z_s):
    """Assign z and x from the cross recipe given the pivot values."""
    r, s = info.pivot
    ordered = [sm.positions[k] for k in info.order]
    ystar = yc + rho * ac
    z = np.zeros(sm.q, dtype=ystar.dtype)
    x = np.zeros(sm.n, dtype=ystar.dtype)
    z[s] = z_s
    x[r] = x_r
    for t in range(sm.q - 1):
        z[ordered[t][1]] = ystar[t] / x_r
    for t in range(sm.n - 1):
        x[ordered[sm.q - 1 + t][0]] = ystar[sm.q - 1 + t] / z_s
    return z, x


def _branch_g(sm: StructuredMap, y: np.ndarray, info, rtol: float):
    """Cross pattern, remainder sum away from one.

    With pivot product w = z_s x_r and balance shift rho, the constraint
    collapses to w^2 + rho w + c(rho) = 0 with
    c(rho) = (yt1 + rho at1)(yt2 + rho at2); rho is tuned to make the
    discriminant nonnegative, which is always possible over C and, over
    R, exactly on the attainable set.
    """
    q = sm.q
    perm = list(info.order)
    yc = y[perm]
    ac = sm.alpha[perm]
    at1, at2 = np.sum(ac[: q - 1]), np.sum(ac[q - 1:])
    yt1, yt2 = np.sum(yc[: q - 1]), np.sum(yc[q - 1:])
    scale = max(1.0, float(max_abs(y)))
    tiny = 1e-12 * scale
    real = sm.field == "real"
    excess = 4.0 * float(np.real(at1)) * float(np.real(at2)) - 1.0 if real else None

    if real and excess > 1e-12:
        if not case3_real_range_test(yc, q):
            raise NotInRange(
                "target outside the attainable set of the exceptional real cross"
            )
        if abs(yt1) <= tiny and abs(yt2) <= tiny:
            # a whole group vanishes; park the matching pivot factor at
            # zero and balance the other factor's sum by hand
            r, s = info.pivot
            ordered = [sm.positions[k] for k in perm]
            z = np.zeros(q, dtype=yc.dtype)
            x = np.zeros(sm.n, dtype=yc.dtype)
            if max_abs(yc[: q - 1]) <= tiny:
                x[r] = 0.0
                z[s] = 1.0
                for t in range(sm.n - 1):
                    x[ordered[q - 1 + t][0]] = yc[q - 1 + t]
                z[next(j for j in range(q) if j != s)] = -1.0
            else:
                z[s] = 0.0
                x[r] = 1.0
                for t in range(q - 1):
                    z[ordered[t][1]] = yc[t]
                x[next(i for i in range(sm.n) if i != r)] = -1.0
            return z, x

    def f_of(rho):
        return (rho * rho * (1.0 - 4.0 * at1 * at2)
                - 4.0 * rho * (yt1 * at2 + yt2 * at1)
                - 4.0 * yt1 * yt2)

    if not real:
        rho = 1.0
    elif excess > 1e-12:
        # downward parabola: the vertex is the best shot, and on the
        # attainable set the value there is nonnegative
        rho = 2.0 * (yt1 * at2 + yt2 * at1) / (1.0 - 4.0 * at1 * at2)
    elif abs(excess) <= 1e-12:
        coef = -4.0 * (yt1 * at2 + yt2 * at1)
        if abs(coef) > tiny:
            rho = (4.0 * yt1 * yt2 + 1.0) / coef
        else:
            rho = 1.0
    else:
        rho = 1.0
        for _ in range(_DOUBLING_CAP):
            if f_of(rho) >= 0:
                break
            rho *= 2

    c = (yt1 + rho * at1) * (yt2 + rho * at2)
    disc = rho * rho - 4.0 * c
    if real:
        if disc < -1e-9 * max(1.0, abs(float(c)), float(rho) ** 2):
            raise NotInRange("target outside the attainable set")
        sq = np.sqrt(max(float(disc), 0.0))
    else:
        sq = np.sqrt(complex(disc))
    w = max([(-rho + sq) / 2.0, (-rho - sq) / 2.0], key=abs)
    if abs(w) <= tiny:
        raise NotInRange("target outside the attainable set")
    return _cross_assemble(sm, info, yc, rho, ac, w, 1.0)


def _branch_h(sm: StructuredMap, y: np.ndarray, info, rtol: float):
    """Cross pattern, unit-sum remainder: the balance value is forced.

    sz * sx must equal lam = sum(y) while the shift rho stays free; the
    sub-cases pick rho to trivialize one pivot group, falling back to a
    quadratic sweep when both degenerate together.
    """
    q = sm.q
    perm = list(info.order)
    yc = y[perm]
    ac = sm.alpha[perm]
    at1, at2 = np.sum(ac[: q - 1]), np.sum(ac[q - 1:])
    yt1, yt2 = np.sum(yc[: q - 1]), np.sum(yc[q - 1:])
    lam = np.sum(yc)
    scale = max(1.0, float(max_abs(y)))
    tiny = 1e-12 * scale
    real = sm.field == "real"

    def assemble(rho, x_r, z_s):
        return _cross_assemble(sm, info, yc, rho, ac, x_r, z_s)

    if abs(at2) > 1e-9:
        g = at1 / at2
        if abs(lam) <= tiny:
            # make the column-group factor vanish against w = 1
            return assemble(-(yt2 + 1.0) / at2, 1.0, 1.0)
        if abs((yt1 - g * yt2) - lam) > tiny:
            rho = -yt2 / at2
            z_s = lam - (yt1 + rho * at1)
            return assemble(rho, 1.0, z_s)
        # degenerate direction: sweep beta over safe values
        if real and abs(1.0 - g) <= 1e-12:
            beta = -2.0 * lam
        elif real:
            beta = -np.sign(float(lam))
            for _ in range(_DOUBLING_CAP):
                full = beta * beta * (1.0 - g) ** 2 - 4.0 * beta * lam
                if full > tiny and abs(lam + beta * g) > tiny:
                    break
                beta *= 2
        else:
            beta = _pick([1.0, 2.0], 0.0,
                         *([-lam / g] if abs(g) > 1e-9 else []))
        disc = beta * beta * (1.0 + g) ** 2 / 4.0 - beta * (lam + beta * g)
        sq = (np.sqrt(max(float(np.real(disc)), 0.0)) if real
              else np.sqrt(complex(disc)))
        half = -beta * (1.0 + g) / 2.0
        x_r = max([half + sq, half - sq], key=abs)
        return assemble((beta - yt2) / at2, x_r, 1.0)

    # mirror: the row-part coefficient sum carries everything (at1 ~ 1)
    if abs(lam) <= tiny:
        return assemble(-(yt1 + 1.0) / at1, 1.0, 1.0)
    rho = -yt1 / at1
    x_r = lam - (yt2 + rho * at2)
    if abs(x_r) > tiny:
        return assemble(rho, x_r, 1.0)
    beta = (-1.0 if float(np.real(lam)) > 0 else 1.0) if real else 1.0
    disc = beta * beta - 4.0 * beta * lam
    sq = (np.sqrt(max(float(np.real(disc)), 0.0)) if real
          else np.sqrt(complex(disc)))
    z_s = max([(-beta + sq) / 2.0, (-beta - sq) / 2.0], key=abs)
    return assemble((beta - yt1) / at1, 1.0, z_s)


# ---------------------------------------------------------------------------
# main entry points


def construct_witness(sm: StructuredMap, y, rtol: float = 1e-9) -> Witness:
    """Solve Ahat (z (x) x) = y in closed form.

    Dispatch: single row or column first (any remainder), then the zero
    remainder, then the escape conditions split by whether the remainder
    sums to one, and finally the cross recipes.  Raises
    UnsupportedPattern when the pattern has no constructive route and
    NotInRange when the target is certifiably unattainable.
    """
    y = _cast_target(y, sm.m, sm.field)
    if sm.m == 0:
        dt = np.float64 if sm.field == "real" else np.complex128
        return Witness(np.zeros(sm.q, dt), np.zeros(sm.n, dt), 0.0, "empty")
    positions = sm.positions
    rows = {i for i, _ in positions}
    cols = {j for _, j in positions}

    if len(rows) == 1:
        z, x = _branch_row(sm, y)
        branch = "row"
    elif len(cols) == 1:
        tz, tx = _branch_row(_transposed(sm), y)
        z, x = tx, tz
        branch = "column"
    elif not condition_c1(positions):
        raise UnsupportedPattern(
            "independence condition fails; no constructive route"
        )
    elif max_abs(sm.alpha) <= 1e-12:
        z, x = _c1_factor(positions, sm.n, sm.q, y)
        branch = "a"
    elif not sum_is_one(sm.alpha):
        flags = c2_flags(positions, sm.n, sm.q)
        if flags.any:
            z, x = _branch_b(sm, y)
            branch = "b"
        else:
            info = classify_case(positions, sm.n, sm.q)
            if info is None or info.kind != CASE_III:
                raise UnsupportedPattern("unclassifiable pattern")
            z, x = _branch_g(sm, y, info, rtol)
            branch = "g"
    else:
        flags = c2_flags(positions, sm.n, sm.q)
        if flags.free_col:
            z, x = _branch_c_direct(sm, y)
            branch = "c"
        elif flags.free_row:
            tz, tx = _branch_c_direct(_transposed(sm), y)
            z, x = tx, tz
            branch = "c"
        elif flags.cols_distinct:
            z, x = _branch_d_direct(sm, y)
            branch = "d"
        elif flags.rows_distinct:
            tz, tx = _branch_d_direct(_transposed(sm), y)
            z, x = tx, tz
            branch = "d"
        elif flags.two_repeated_cols:
            z, x = _branch_e_direct(sm, y, rtol)
            branch = "e"
        elif flags.two_repeated_rows:
            tz, tx = _branch_e_direct(_transposed(sm), y, rtol)
            z, x = tx, tz
            branch = "e"
        elif flags.isolated:
            z, x = _branch_f(sm, y, rtol)
            branch = "f"
        else:
            info = classify_case(positions, sm.n, sm.q)
            if info is None or info.kind != CASE_III:
                raise UnsupportedPattern("unclassifiable pattern")
            z, x = _branch_h(sm, y, info, rtol)
            branch = "h"

    residual = float(np.linalg.norm(sm.value(z, x) - y))
    if residual > 1e-6 * max(1.0, float(np.linalg.norm(y))):
        raise UnsupportedPattern(
            f"construction left residual {residual:.3e} on branch {branch}"
        )
    return Witness(z, x, residual, branch)


def membership_solve(A, n: int, q: int, y, budget: int = 20,
                     iters: int = 60, seed: int = 42,
                     tol: float = 1e-8) -> Witness | None:
    """Alternating least squares search for A (z (x) x) = y.

    Heuristic: None means no witness was found, not a proof of absence.
    """
    A = np.asarray(A)
    y = np.asarray(y).reshape(-1)
    if A.shape != (y.size, n * q):
        raise LengthMismatch(
            f"matrix shape {A.shape} does not fit target length {y.size} with nq={n * q}"
        )
    rng = np.random.default_rng(seed)
    A3 = A.reshape(y.size, q, n)
    target = tol * max(1.0, float(np.linalg.norm(y)))
    cx = np.iscomplexobj(A) or np.iscomplexobj(y)
    best = None
    for restart in range(budget):
        x = rng.standard_normal(n) + (1j * rng.standard_normal(n) if cx else 0.0)
        if best is not None and restart % 4 == 3:
            x = best[1] + 0.2 * np.linalg.norm(best[1]) * x
        x = x / np.linalg.norm(x)
        for _ in range(iters):
            Mx = np.einsum("kqn,n->kq", A3, x)
            z, *_ = np.linalg.lstsq(Mx, y, rcond=None)
            Mz = np.einsum("kqn,q->kn", A3, z)
            x, *_ = np.linalg.lstsq(Mz, y, rcond=None)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
                break
            res = float(np.linalg.norm(A @ np.kron(z, x) - y))
            if best is None or res < best[2]:
                best = (z, x, res)
            if res <= target:
                return Witness(z, x, res, "als")
    return None


def dependent_counterexample(positions, n: int, q: int) -> np.ndarray:
    """Unattainable product target when independence fails.

    At a doubly shared position, demand 1 from a row mate and a column
    mate but 0 at the position itself: the mates force both factors of
    the zero product to be nonzero.
    """
    positions = _check_positions(positions, n, q)
    rows = Counter(i for i, _ in positions)
    cols = Counter(j for _, j in positions)
    for k, (i, j) in enumerate(positions):
        if rows[i] > 1 and cols[j] > 1:
            l1 = next(t for t, p in enumerate(positions) if p[0] == i and t != k)
            l2 = next(t for t, p in enumerate(positions) if p[1] == j and t != k)
            y = np.zeros(len(positions))
            y[l1] = 1.0
            y[l2] = 1.0
            return y
    raise PatternViolation("independence condition holds; no counterexample")


def _cross_counterexample(info, m: int, n: int, q: int) -> np.ndarray:
    """Zero-group-sum target with all entries nonzero, original order."""
    y = np.zeros(m)
    for t in range(q - 1):
        y[info.order[t]] = 1.0 if t < q - 2 else -(q - 2)
    for t in range(n - 1):
        y[info.order[q - 1 + t]] = 1.0 if t < n - 2 else -(n - 2)
    return y


def surjectivity_decide(sm: StructuredMap, mode: str = "ahat",
                        panel: int = 50, seed: int = 42,
                        rtol: float = 1e-9) -> SurjectivityVerdict:
    """Decide whether the structured bilinear map covers all of F^m.

    mode "ahat" treats the full map with remainder; mode "e2" treats the
    product system constrained by sum(z) * sum(x) = 0, remainder
    ignored.  Surjective verdicts are backed by a randomized target
    panel pushed through the constructive branches; negative verdicts
    carry an exact counterexample vector.
    """
    positions, n, q, m = sm.positions, sm.n, sm.q, sm.m
    if m == 0:
        return SurjectivityVerdict(SURJECTIVE, "empty_pattern")
    c1 = condition_c1(positions)
    flags = c2_flags(positions, n, q)
    rng = np.random.default_rng(seed)

    def run_panel(reason):
        worst = 0.0
        zero_map = StructuredMap(n=n, q=q, positions=positions,
                                 alpha=np.zeros(m), field=sm.field)
        for _ in range(panel):
            y = rng.standard_normal(m)
            if sm.field == "complex":
                y = y + 1j * rng.standard_normal(m)
            if mode == "e2":
                z, x = _e2_solve(positions, n, q, y)
                res = float(np.linalg.norm(zero_map.value(z, x) - y))
                res = max(res, float(abs(z.sum() * x.sum())))
            else:
                res = construct_witness(sm, y, rtol).residual
            worst = max(worst, res)
        return SurjectivityVerdict(SURJECTIVE, reason, None, panel, worst)

    if mode == "e2":
        if not c1:
            return SurjectivityVerdict(
                NOT_SURJECTIVE, REASON_DEPENDENT,
                dependent_counterexample(positions, n, q))
        if flags.any:
            return run_panel("escape_condition")
        info = classify_case(positions, n, q)
        if info is None:
            raise UnsupportedPattern("unclassifiable pattern")
        if info.kind == CASE_III:
            return SurjectivityVerdict(
                NOT_SURJECTIVE, info.kind,
                _cross_counterexample(info, m, n, q))
        return SurjectivityVerdict(NOT_SURJECTIVE, info.kind, np.ones(m))

    if mode != "ahat":
        raise ValueError(f"unknown mode {mode!r}")

    if len({i for i, _ in positions}) == 1 or len({j for _, j in positions}) == 1:
        return run_panel("single_row_or_column")
    if not c1:
        if max_abs(sm.alpha) <= 1e-12:
            return SurjectivityVerdict(
                NOT_SURJECTIVE, REASON_DEPENDENT,
                dependent_counterexample(positions, n, q))
        raise UnsupportedPattern(
            "dependent pattern with nonzero remainder: no decision route"
        )
    if max_abs(sm.alpha) <= 1e-12:
        return run_panel("zero_remainder")
    if sum_is_one(sm.alpha):
        return run_panel("unit_sum_remainder")
    if flags.any:
        return run_panel("escape_condition")
    info = classify_case(positions, n, q)
    if info is None or info.kind != CASE_III:
        # full single-column and single-row grids were caught above
        raise UnsupportedPattern("unclassifiable pattern")
    if sm.field == "complex":
        return run_panel("cross_complex")
    ac = sm.alpha[list(info.order)]
    at1 = float(np.sum(ac[: q - 1]))
    at2 = float(np.sum(ac[q - 1:]))
    if 4.0 * at1 * at2 <= 1.0 + 1e-12:
        return run_panel("cross_real_tame")
    return SurjectivityVerdict(
        NOT_SURJECTIVE, REASON_EXCEPTIONAL_CROSS,
        _cross_counterexample(info, m, n, q))


# ---------------------------------------------------------------------------
# grid oracle


def range_oracle_grid(A, n: int, q: int, ys, resolution: int = 13,
                      box: tuple[float, float] = (-2.0, 2.0),
                      tau: float | None = None,
                      cost_cap: float = 2e8) -> list[GridMembership]:
    """Exhaustive reachability check over a real product grid.

    Both factors range over a uniform grid on the box; a target counts
    as reachable when the best residual drops below tau (default: one
    grid spacing).  The minimum over the grid is exact; a decoupled fast
    path covers matrices whose rows each touch a single coordinate.
    """
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if max_abs(A.imag) > 1e-12 * max(1.0, max_abs(A)):
            raise FieldViolation("grid oracle handles real data only")
        A = A.real
    ys = [np.asarray(y, dtype=float).reshape(-1) for y in ys]
    m = A.shape[0]
    if A.shape[1] != n * q:
        raise LengthMismatch(f"matrix has {A.shape[1]} columns, expected {n * q}")
    for y in ys:
        if y.size != m:
            raise LengthMismatch("target length mismatch")
    if not ys:
        return []
    vals = np.linspace(box[0], box[1], resolution)
    if tau is None:
        tau = (box[1] - box[0]) / (resolution - 1)

    if np.all((np.abs(A) > 0).sum(axis=1) == 1):
        return _grid_fast_path(A, n, ys, vals, tau, cost_cap)
    cost = float(resolution) ** (n + q) * max(m, 1)
    if cost > cost_cap:
        raise TooLarge(
            f"grid search cost {cost:.2e} exceeds the cap {cost_cap:.2e}"
        )
    return _grid_general_path(A, n, q, ys, vals, tau)


def _grid_fast_path(A, n, ys, vals, tau, cost_cap):
    """One coordinate per row: minimize row by row for each z combo."""
    m = A.shape[0]
    coords = np.argmax(np.abs(A) > 0, axis=1)
    gains = A[np.arange(m), coords]
    pos_i = coords % n
    pos_j = coords // n
    used_cols = sorted(set(pos_j.tolist()))
    C = len(used_cols)
    if float(len(vals)) ** (C + 1) * max(m, 1) * len(ys) > cost_cap:
        raise TooLarge("grid search cost exceeds the cap")
    col_of = {j: t for t, j in enumerate(used_cols)}
    grids = np.meshgrid(*([vals] * C), indexing="ij")
    Z = np.stack([g.reshape(-1) for g in grids], axis=1)
    Y = np.stack(ys, axis=0)
    total = np.zeros((Y.shape[0], Z.shape[0]))
    for i in sorted(set(pos_i.tolist())):
        ks = [k for k in range(m) if pos_i[k] == i]
        T = np.stack([gains[k] * Z[:, col_of[pos_j[k]]] for k in ks], axis=1)
        diff = (T[None, :, :, None] * vals[None, None, None, :]
                - Y[:, None, ks, None])
        total += np.sum(diff * diff, axis=2).min(axis=2)
    best = np.sqrt(total.min(axis=1))
    return [GridMembership(bool(b < tau), float(b), float(tau)) for b in best]


def _grid_general_path(A, n, q, ys, vals, tau):
    """Dense rows: evaluate every (x, z) grid pair, chunked over x."""
    m = A.shape[0]
    R = A.reshape(m, q, n)
    xg = np.meshgrid(*([vals] * n), indexing="ij")
    X = np.stack([g.reshape(-1) for g in xg], axis=1)
    zg = np.meshgrid(*([vals] * q), indexing="ij")
    Z = np.stack([g.reshape(-1) for g in zg], axis=1)
    Y = np.stack(ys, axis=0)
    best = np.full(Y.shape[0], np.inf)
    chunk = max(1, int(2e6 // max(Z.shape[0], 1)))
    for s in range(0, X.shape[0], chunk):
        Xc = X[s:s + chunk]
        V = [(Xc @ R[k].T) @ Z.T for k in range(m)]
        for t in range(Y.shape[0]):
            acc = np.zeros((Xc.shape[0], Z.shape[0]))
            for k in range(m):
                acc += (V[k] - Y[t, k]) ** 2
            best[t] = min(best[t], float(np.sqrt(acc.min())))
    return [GridMembership(bool(b < tau), float(b), float(tau)) for b in best]
