"""Linear matrix maps between square matrix spaces.

A map takes q x q matrices to n x n matrices over F (real or complex) and
is stored through its matricization L, the n^2 x q^2 matrix acting on
column-stacked inputs: vec(map(V)) = L @ vec(V).

Two block structures matter:

- L splits into an n x q grid of n x q blocks,
  L_ij = L[i*n:(i+1)*n, j*q:(j+1)*q].  Entry (k, l) of block (i, j) is the
  coefficient of V[l, j] in map(V)[k, i].
- The Choi matrix C is nq x nq, a q x q grid of n x n blocks, where block
  (a, b) equals the map applied to the (a, b) matrix unit of F^{q x q}.

The two are entry reorderings of each other: C[a*n + k, b*n + c] =
L[c*n + k, b*q + a].  Column b*q + a of L is vec of Choi block (a, b);
column b*n + c of C is vec of L-block (c, b).

The map is adjoint-compatible (star-linear: map(V*) = map(V)* for all V)
exactly when the Choi matrix is Hermitian, equivalently when
conj(L) = S_n L S_q for the canonical shuffles, equivalently when
L_ij[k, l] == conj(L_kl[i, j]) for all indices.
"""

from __future__ import annotations

import dataclasses
from functools import cached_property

import numpy as np

from .core import is_hermitian, max_abs, shuffle_permutation, unvec, vec
from .errors import DimMismatch, FieldViolation, IndexOutOfRange

FIELDS = ("real", "complex")

_FIELD_IMAG_TOL = 1e-12


def _coerce_field_array(M: np.ndarray, field: str) -> np.ndarray:
    """Cast to float64/complex128 per field, rejecting complex data for 'real'."""
    if field not in FIELDS:
        raise FieldViolation(f"unknown field {field!r}, expected one of {FIELDS}")
    M = np.asarray(M)
    if field == "real":
        if np.iscomplexobj(M):
            scale = max(1.0, max_abs(M))
            if max_abs(M.imag) > _FIELD_IMAG_TOL * scale:
                raise FieldViolation("complex entries supplied for the real field")
            M = M.real
        return np.ascontiguousarray(M, dtype=np.float64)
    return np.ascontiguousarray(M, dtype=np.complex128)


@dataclasses.dataclass(frozen=True, eq=False)
class MapSpec:
    """A linear matrix map, held as its matricization.

    n, q are the output/input sizes, field is "real" or "complex", and L
    has shape (n*n, q*q).  The Choi matrix is computed on first access and
    cached (the instance is otherwise immutable).
    """

    n: int
    q: int
    field: str
    L: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.q < 1:
            raise DimMismatch(f"sizes must be positive, got n={self.n}, q={self.q}")
        L = _coerce_field_array(self.L, self.field)
        if L.shape != (self.n * self.n, self.q * self.q):
            raise DimMismatch(
                f"matricization shape {L.shape} does not match "
                f"(n^2, q^2) = ({self.n * self.n}, {self.q * self.q})"
            )
        L.setflags(write=False)
        object.__setattr__(self, "L", L)

    @cached_property
    def choi(self) -> np.ndarray:
        C = matricization_to_choi(self.L, self.n, self.q)
        C.setflags(write=False)
        return C

    def apply(self, V: np.ndarray) -> np.ndarray:
        return apply_via_matricization(self.L, self.n, self.q, V)


def from_matricization(L: np.ndarray, field: str = "complex") -> MapSpec:
    """Build a MapSpec from L alone; n and q are inferred from the shape."""
    L = np.asarray(L)
    if L.ndim != 2:
        raise DimMismatch("matricization must be 2-d")
    n = round(L.shape[0] ** 0.5)
    q = round(L.shape[1] ** 0.5)
    if n * n != L.shape[0] or q * q != L.shape[1]:
        raise DimMismatch(
            f"matricization shape {L.shape} is not (n^2, q^2) for integer n, q"
        )
    return MapSpec(n=n, q=q, field=field, L=L)


def from_choi(C: np.ndarray, n: int, field: str = "complex") -> MapSpec:
    """Build a MapSpec from a Choi matrix; n must be given since nq = n * q."""
    C = np.asarray(C)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimMismatch("Choi matrix must be square")
    if n < 1 or C.shape[0] % n != 0:
        raise DimMismatch(f"Choi size {C.shape[0]} is not divisible by n={n}")
    q = C.shape[0] // n
    L = choi_to_matricization(C, n, q)
    return MapSpec(n=n, q=q, field=field, L=L)


def matricization_to_choi(L: np.ndarray, n: int, q: int) -> np.ndarray:
    """Reorder the matricization into the Choi matrix."""
    L = np.asarray(L)
    if L.shape != (n * n, q * q):
        raise DimMismatch(f"expected shape ({n * n}, {q * q}), got {L.shape}")
    L4 = L.reshape(n, n, q, q)  # [c, k, b, a]: row c*n+k, column b*q+a
    return L4.transpose(3, 1, 2, 0).reshape(n * q, n * q).copy()


def choi_to_matricization(C: np.ndarray, n: int, q: int) -> np.ndarray:
    """Inverse reordering: Choi matrix back to the matricization."""
    C = np.asarray(C)
    if C.shape != (n * q, n * q):
        raise DimMismatch(f"expected shape ({n * q}, {n * q}), got {C.shape}")
    C4 = C.reshape(q, n, q, n)  # [a, k, b, c]
    return C4.transpose(3, 1, 2, 0).reshape(n * n, q * q).copy()


def l_block(L: np.ndarray, i: int, j: int, n: int, q: int) -> np.ndarray:
    """Block (i, j) of the matricization, 0-based, shape (n, q)."""
    if not (0 <= i < n and 0 <= j < q):
        raise IndexOutOfRange(f"block ({i}, {j}) out of range for grid {n} x {q}")
    return np.asarray(L)[i * n:(i + 1) * n, j * q:(j + 1) * q]


def choi_block(C: np.ndarray, a: int, b: int, n: int, q: int) -> np.ndarray:
    """Block (a, b) of the Choi matrix: the map applied to the (a, b) unit."""
    if not (0 <= a < q and 0 <= b < q):
        raise IndexOutOfRange(f"Choi block ({a}, {b}) out of range for grid {q} x {q}")
    return np.asarray(C)[a * n:(a + 1) * n, b * n:(b + 1) * n]


def apply_via_matricization(L: np.ndarray, n: int, q: int, V: np.ndarray) -> np.ndarray:
    """Evaluate the map on V through vec / unvec."""
    V = np.asarray(V)
    if V.shape != (q, q):
        raise DimMismatch(f"input must be {q} x {q}, got {V.shape}")
    return unvec(np.asarray(L) @ vec(V), n, n)


def apply_via_choi(C: np.ndarray, n: int, q: int, V: np.ndarray,
                   method: str = "blocks") -> np.ndarray:
    """Evaluate the map on V from the Choi matrix.

    method "blocks" sums V[a, b] * block(a, b).  method "hadamard" uses the
    sandwich identity (1_q (x) I_n)^T (C o (V (x) ones)) (1_q (x) I_n) with a
    plain (not conjugated) transpose; both give the same result and the
    redundancy is kept as a cross-check.
    """
    C = np.asarray(C)
    V = np.asarray(V)
    if V.shape != (q, q):
        raise DimMismatch(f"input must be {q} x {q}, got {V.shape}")
    if C.shape != (n * q, n * q):
        raise DimMismatch(f"Choi matrix must be {n * q} x {n * q}, got {C.shape}")
    if method == "blocks":
        C4 = C.reshape(q, n, q, n)
        return np.einsum("akbc,ab->kc", C4, V)
    if method == "hadamard":
        J = np.kron(np.ones((1, q)), np.eye(n)).T  # (1_q (x) I_n) as nq x n
        big = C * np.kron(V, np.ones((n, n)))
        return J.T @ big @ J
    raise ValueError(f"unknown method {method!r}")


@dataclasses.dataclass(frozen=True)
class StarLinearityReport:
    """Outcome of the three-way adjoint-compatibility test.

    All three deviations are max-abs and should agree up to roundoff; the
    redundancy is deliberate (each criterion is computed by a different
    route).
    """

    is_star_linear: bool
    dev_hermitian: float
    dev_shuffle: float
    dev_entrywise: float
    tol: float
    scale: float


def star_linearity(spec: MapSpec, tol: float = 1e-9) -> StarLinearityReport:
    """Test map(V*) = map(V)* by three equivalent criteria.

    (1) the Choi matrix is Hermitian; (2) conj(L) = S_n L S_q; (3) the
    entrywise block symmetry L_ij[k, l] = conj(L_kl[i, j]).
    """
    n, q, L = spec.n, spec.q, spec.L
    C = spec.choi
    scale = max(1.0, max_abs(L))

    dev_h = max_abs(C - C.conj().T)

    pn = shuffle_permutation(n)
    pq = shuffle_permutation(q)
    dev_s = max_abs(np.conj(L) - L[pn][:, pq])

    L4 = L.reshape(n, n, q, q)  # [i, k, j, l] = L_ij[k, l]
    dev_e = max_abs(L4 - np.conj(L4.transpose(1, 0, 3, 2)))

    ok = max(dev_h, dev_s, dev_e) <= tol * scale
    return StarLinearityReport(ok, float(dev_h), float(dev_s), float(dev_e),
                               tol, scale)


def is_star_linear(spec: MapSpec, tol: float = 1e-9) -> bool:
    return star_linearity(spec, tol).is_star_linear


def _swap_perm(dim: int, pair: tuple[int, int] | None) -> np.ndarray:
    p = np.arange(dim)
    if pair is not None:
        a, b = pair
        if not (0 <= a < dim and 0 <= b < dim):
            raise IndexOutOfRange(f"swap {pair} out of range for dim {dim}")
        p[a], p[b] = p[b], p[a]
    return p


def permute_map(spec: MapSpec,
                block_row_swap: tuple[int, int] | None = None,
                entry_row_swap: tuple[int, int] | None = None,
                block_col_swap: tuple[int, int] | None = None,
                entry_col_swap: tuple[int, int] | None = None) -> MapSpec:
    """Conjugate the map by coordinate transpositions.

    block_row_swap / entry_row_swap act on the n-sized block-row and
    inner-row indices of L; block_col_swap / entry_col_swap on the q-sized
    block-column and inner-column indices.  In map form, with P_* the
    transposition matrices, the new map is
    V -> P_entry_row map(P_entry_col V P_block_col) P_block_row.

    On the Choi side the same operation is
    C -> (P_entry_col (x) P_entry_row) C (P_block_col (x) P_block_row).
    Matched swaps (block == entry on each side) act by unitary conjugation
    of the Choi matrix and preserve star-linearity, positivity and the
    complete-positivity spectrum.
    """
    n, q = spec.n, spec.q
    pi = _swap_perm(n, block_row_swap)
    pk = _swap_perm(n, entry_row_swap)
    pj = _swap_perm(q, block_col_swap)
    pl = _swap_perm(q, entry_col_swap)
    row = (pi[:, None] * n + pk[None, :]).reshape(-1)
    col = (pj[:, None] * q + pl[None, :]).reshape(-1)
    return MapSpec(n=n, q=q, field=spec.field, L=spec.L[row][:, col])


def permute_map_matched(spec: MapSpec,
                        row_swap: tuple[int, int] | None = None,
                        col_swap: tuple[int, int] | None = None) -> MapSpec:
    """Structure-preserving permutation: same swap on block and entry indices."""
    return permute_map(spec, block_row_swap=row_swap, entry_row_swap=row_swap,
                       block_col_swap=col_swap, entry_col_swap=col_swap)


def choi_is_hermitian(spec: MapSpec, tol: float = 1e-9) -> bool:
    return is_hermitian(spec.choi, tol)
