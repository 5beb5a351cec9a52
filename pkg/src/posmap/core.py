"""Low-level matrix utilities and index conventions.

Conventions used throughout the package:

- vec() stacks columns: for M of shape (r, c), vec(M)[j*r + i] = M[i, j].
  Equivalently vec(M) = M.reshape(-1, order='F').
- kron(z, x) for vectors puts z on the outer (slow) axis:
  kron(z, x)[j*len(x) + i] = z[j] * x[i].
- The canonical shuffle S_n is the symmetric permutation with
  S_n (z (x) x) = x (x) z for z, x of length n; it equals its own
  inverse and its own transpose.
- All public indices at the I/O boundary (CLI, service, file formats)
  are 1-based; everything internal is 0-based.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, IndexOutOfRange, LengthMismatch, NotHermitian

DEFAULT_RTOL = 1e-9


def vec(M: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a 2-d array."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimMismatch(f"vec expects a 2-d array, got ndim={M.ndim}")
    return M.reshape(-1, order="F").copy()


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of vec: reshape a flat vector to (rows, cols), column-major."""
    v = np.asarray(v).reshape(-1)
    if v.size != rows * cols:
        raise LengthMismatch(
            f"cannot reshape length-{v.size} vector to ({rows}, {cols})"
        )
    return v.reshape((rows, cols), order="F").copy()


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product (thin wrapper so the convention is documented here)."""
    return np.kron(A, B)


def shuffle_permutation(n: int) -> np.ndarray:
    """Index permutation p with (S_n v)[r] = v[p[r]] for the canonical shuffle."""
    if n < 1:
        raise IndexOutOfRange(f"shuffle size must be positive, got {n}")
    r = np.arange(n * n)
    return (r % n) * n + r // n


def canonical_shuffle(n: int) -> np.ndarray:
    """Dense n^2 x n^2 canonical shuffle matrix S_n.

    S_n (z (x) x) = x (x) z; S_n is symmetric and involutive.
    """
    return np.eye(n * n)[shuffle_permutation(n)]


def transposition_matrix(dim: int, a: int, b: int) -> np.ndarray:
    """Permutation matrix swapping coordinates a and b (0-based) of F^dim."""
    if not (0 <= a < dim and 0 <= b < dim):
        raise IndexOutOfRange(f"transposition ({a}, {b}) out of range for dim {dim}")
    P = np.eye(dim)
    if a != b:
        P[[a, b]] = P[[b, a]]
    return P


def max_abs(M: np.ndarray) -> float:
    """Largest absolute value of the entries (0.0 for an empty array)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M)))


def is_hermitian(M: np.ndarray, tol: float = DEFAULT_RTOL) -> bool:
    """Check M = M* up to tol * max(1, |M|_max)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = max(1.0, max_abs(M))
    return max_abs(M - M.conj().T) <= tol * scale


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + np.asarray(M).conj().T) / 2


def min_eig_hermitian(M: np.ndarray, tol: float = DEFAULT_RTOL) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a Hermitian matrix.

    :raises NotHermitian: if M is not Hermitian at the given tolerance.
    """
    if not is_hermitian(M, tol):
        raise NotHermitian("matrix is not Hermitian at the given tolerance")
    vals, vecs = np.linalg.eigh(hermitian_part(M))
    return float(vals[0]), vecs[:, 0]


def numeric_rank(M: np.ndarray, rtol: float = DEFAULT_RTOL) -> int:
    """Rank by singular value threshold: count sigma > rtol * sigma_max."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def hadamard(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Entrywise product with a shape check."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimMismatch(f"hadamard shapes differ: {A.shape} vs {B.shape}")
    return A * B
