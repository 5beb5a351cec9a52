"""Minimal Hill-type representations of adjoint-compatible maps.

A map with Choi matrix C of rank m can be written
map(V) = sum_{k,l} (H^T)_{kl} A_k V A_l^* with m kernel matrices A_k
(each n x q) and an m x m Hermitian coefficient matrix H.  In the stored
convention the defining identities are

    C = Ahat^* H^T Ahat,      L = sum_{k,l} H_kl conj(A_k) (x) A_l,

where Ahat is the m x nq matrix whose k-th row is vec(conj(A_k))^T.  The
map is completely positive exactly when H (equivalently C) is positive
semidefinite.

Construction walks the blocks of L in row-major order and keeps each block
whose vectorization is independent of those already kept (modified
Gram-Schmidt with a relative threshold).  Every kept position contributes
the matrix A_k whose (i, j) entry is conj(alpha^{ij}_k), alpha^{ij} being
the coefficients expanding block (i, j) over the kept blocks.  H comes
from the entrywise formula H_kl = sum_ij (B_k)_ij conj((L_l)_ij), with
B_k any coefficient matrix writing the k-th kept block over all blocks
(the minimum-norm one is used; for adjoint-compatible maps the result
does not depend on that choice).  A second, independent route recovers H
from a kernel matrix as H^T = (Ahat Ahat^*)^{-1} Ahat C Ahat^*
(Ahat Ahat^*)^{-1}; the two agree and tests hold them together.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .core import max_abs, numeric_rank, unvec, vec
from .errors import (DimMismatch, KernelMismatch, NotEquivalent, NotStarLinear,
                     SpanViolation)
from .mapmodel import MapSpec, l_block, star_linearity

DEFAULT_RTOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class HillRep:
    """A minimal representation: kernel matrices, coefficient matrix, Ahat."""

    n: int
    q: int
    field: str
    positions: tuple[tuple[int, int], ...]
    A: tuple[np.ndarray, ...]
    H: np.ndarray
    ahat: np.ndarray

    @property
    def m(self) -> int:
        return len(self.A)

    def choi(self) -> np.ndarray:
        """Reconstruct the Choi matrix: Ahat^* H^T Ahat."""
        return self.ahat.conj().T @ self.H.T @ self.ahat

    def matricization(self) -> np.ndarray:
        """Reconstruct L: sum_kl H_kl conj(A_k) (x) A_l."""
        L = np.zeros((self.n * self.n, self.q * self.q), dtype=complex)
        for k in range(self.m):
            for l in range(self.m):
                L += self.H[k, l] * np.kron(np.conj(self.A[k]), self.A[l])
        if self.field == "real":
            return L.real.copy()
        return L

    def apply(self, V: np.ndarray) -> np.ndarray:
        """Evaluate the map: sum_kl (H^T)_kl A_k V A_l^*."""
        V = np.asarray(V)
        if V.shape != (self.q, self.q):
            raise DimMismatch(f"input must be {self.q} x {self.q}, got {V.shape}")
        out = np.zeros((self.n, self.n), dtype=complex)
        for k in range(self.m):
            for l in range(self.m):
                out += self.H[l, k] * (self.A[k] @ V @ self.A[l].conj().T)
        if self.field == "real" and not np.iscomplexobj(V):
            return out.real.copy()
        return out

    def is_completely_positive(self, tol: float = DEFAULT_RTOL) -> bool:
        vals = np.linalg.eigvalsh((self.H + self.H.conj().T) / 2)
        return bool(vals[0] >= -tol * max(1.0, max_abs(self.H)))


def _block_vecs(spec: MapSpec) -> np.ndarray:
    """vec of every block of L, as columns ordered row-major by (i, j)."""
    n, q = spec.n, spec.q
    cols = [vec(l_block(spec.L, i, j, n, q)) for i in range(n) for j in range(q)]
    return np.stack(cols, axis=1)


def select_blocks(spec: MapSpec, rtol: float = DEFAULT_RTOL
                  ) -> tuple[tuple[tuple[int, int], ...], np.ndarray]:
    """Greedy row-major selection of independent blocks.

    Returns the kept (i, j) positions and the matrix whose columns are the
    kept blocks' vectorizations.  A block is kept when its residual after
    projecting onto the span of already-kept blocks exceeds
    rtol * (largest block norm).
    """
    n, q = spec.n, spec.q
    V = _block_vecs(spec)
    scale = max(np.linalg.norm(V, axis=0).max(), 0.0)
    if scale == 0.0:
        return (), np.zeros((n * q, 0), dtype=V.dtype)
    kept: list[int] = []
    Q: list[np.ndarray] = []
    for idx in range(n * q):
        w = V[:, idx].copy()
        for u in Q:
            w = w - (u.conj() @ w) * u
        # second Gram-Schmidt pass for numerical hygiene
        for u in Q:
            w = w - (u.conj() @ w) * u
        if np.linalg.norm(w) > rtol * scale:
            kept.append(idx)
            Q.append(w / np.linalg.norm(w))
    positions = tuple((idx // q, idx % q) for idx in kept)
    return positions, V[:, kept]


def expansion_coefficients(spec: MapSpec,
                           positions: tuple[tuple[int, int], ...],
                           rtol: float = DEFAULT_RTOL) -> dict[tuple[int, int], np.ndarray]:
    """Coefficients alpha^{ij} expanding every block over the selected ones.

    Selected positions get exact unit vectors.  Least-squares coefficients
    within 1e-9 of an integer grid point are snapped to it when the
    snapped vector still reproduces the block, so exactly repeated or
    vanished blocks get exact coefficients.  Raises SpanViolation if a
    block falls outside the selected span at the given tolerance.
    """
    n, q = spec.n, spec.q
    m = len(positions)
    basis = np.stack([vec(l_block(spec.L, i, j, n, q)) for i, j in positions],
                     axis=1) if m else np.zeros((n * q, 0))
    scale = max(1.0, max_abs(spec.L))
    sel_index = {p: k for k, p in enumerate(positions)}
    out: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(q):
            if (i, j) in sel_index:
                e = np.zeros(m, dtype=basis.dtype if m else float)
                e[sel_index[(i, j)]] = 1.0
                out[(i, j)] = e
                continue
            b = vec(l_block(spec.L, i, j, n, q))
            if m == 0:
                coef = np.zeros(0)
                resid = np.linalg.norm(b)
            else:
                coef, *_ = np.linalg.lstsq(basis, b, rcond=None)
                resid = np.linalg.norm(basis @ coef - b)
            if resid > max(rtol * scale, 1e-13):
                raise SpanViolation(
                    f"block ({i}, {j}) lies outside the selected span "
                    f"(residual {resid:.3e})"
                )
            if m:
                g = np.round(coef.real)
                if np.iscomplexobj(coef):
                    g = g + 1j * np.round(coef.imag)
                near = np.abs(coef - g) <= 1e-9 * max(1.0, float(np.abs(coef).max(initial=0.0)))
                if near.any():
                    snapped = np.where(near, g, coef)
                    if np.linalg.norm(basis @ snapped - b) <= max(rtol * scale, 1e-13):
                        coef = snapped
            out[(i, j)] = coef
    return out


def _position_index(i: int, j: int, n: int) -> int:
    """Coordinate of block (i, j) inside vec-ordered F^{nq}: z_j x_i slot."""
    return j * n + i


def hill_from_spec(spec: MapSpec, rtol: float = DEFAULT_RTOL,
                   positions: tuple[tuple[int, int], ...] | None = None) -> HillRep:
    """Construct a minimal representation from the matricization.

    The map must be adjoint-compatible.  If positions is given it must be
    a valid independent selection spanning all blocks; otherwise the greedy
    row-major selection is used.
    """
    rep = star_linearity(spec, max(rtol, 1e-9))
    if not rep.is_star_linear:
        raise NotStarLinear(
            f"map is not adjoint-compatible (deviation {max(rep.dev_hermitian, rep.dev_shuffle):.3e})"
        )
    n, q = spec.n, spec.q
    if positions is None:
        positions, _ = select_blocks(spec, rtol)
    positions = tuple(tuple(p) for p in positions)
    m = len(positions)
    alpha = expansion_coefficients(spec, positions, rtol)

    dtype = complex if spec.field == "complex" else float
    A = []
    for k in range(m):
        Ak = np.zeros((n, q), dtype=dtype)
        for (i, j), coef in alpha.items():
            Ak[i, j] = np.conj(coef[k])
        Ak[Ak == 0] = 0  # drop IEEE negative zeros from conjugation
        A.append(Ak)
    ahat = np.zeros((m, n * q), dtype=dtype)
    for k in range(m):
        ahat[k] = vec(np.conj(A[k]))
    ahat[ahat == 0] = 0

    # H[k, l] = sum_ij (B_k)_ij conj((L_l)_ij) for any B_k whose blockwise
    # contraction of L recovers the k-th kept block.  The unit choice (one
    # at the kept position) is always valid and makes H an exact entry
    # read-off from the kept blocks, free of solver noise.
    H = np.zeros((m, m), dtype=dtype)
    for k, (ik, jk) in enumerate(positions):
        for l, (il, jl) in enumerate(positions):
            H[k, l] = np.conj(l_block(spec.L, il, jl, n, q)[ik, jk])
    H[H == 0] = 0

    out = HillRep(n=n, q=q, field=spec.field, positions=positions,
                  A=tuple(A), H=H, ahat=ahat)
    scale = max(1.0, max_abs(spec.choi))
    resid = max_abs(out.choi() - spec.choi)
    if resid > max(1e3 * rtol * scale, 1e-10 * scale):
        raise SpanViolation(
            f"representation failed to reproduce the Choi matrix (max dev {resid:.3e})"
        )
    return out


def hill_from_kernel_matrix(spec: MapSpec, ahat: np.ndarray,
                            rtol: float = DEFAULT_RTOL) -> HillRep:
    """Recover H from a given kernel matrix stack.

    ahat is m x nq with full row rank; its row span must contain the range
    of the Choi matrix.  H is the unique coefficient matrix with
    C = Ahat^* H^T Ahat, computed as
    H^T = (Ahat Ahat^*)^{-1} Ahat C Ahat^* (Ahat Ahat^*)^{-1}.
    """
    n, q = spec.n, spec.q
    ahat = np.asarray(ahat)
    if ahat.ndim != 2 or ahat.shape[1] != n * q:
        raise DimMismatch(f"kernel matrix stack must be m x {n * q}, got {ahat.shape}")
    C = spec.choi
    m_choi = numeric_rank(C, rtol)
    m = ahat.shape[0]
    if numeric_rank(ahat, rtol) != m:
        raise KernelMismatch("kernel matrix stack does not have full row rank")
    if m != m_choi:
        raise KernelMismatch(
            f"kernel stack has {m} rows but the Choi matrix has rank {m_choi}"
        )
    gram = ahat @ ahat.conj().T
    gram_inv = np.linalg.inv(gram)
    proj = ahat.conj().T @ gram_inv @ ahat
    scale = max(1.0, max_abs(C))
    leak = max_abs(C - proj @ C @ proj)
    if leak > max(1e3 * rtol * scale, 1e-9 * scale):
        raise KernelMismatch(
            f"Choi range leaks outside the kernel row span (max dev {leak:.3e})"
        )
    Ht = gram_inv @ ahat @ C @ ahat.conj().T @ gram_inv
    H = Ht.T.copy()
    A = tuple(unvec(np.conj(ahat[k]), n, q) for k in range(m))
    if spec.field == "real":
        H = H.real if max_abs(H.imag) <= 1e-9 * max(1.0, max_abs(H)) else H
    return HillRep(n=n, q=q, field=spec.field, positions=(),
                   A=A, H=H, ahat=ahat.copy())


def equivalence_transform(rep_a: HillRep, rep_b: HillRep,
                          rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Invertible Phi with H_a = Phi H_b Phi^* and Ahat_b = Phi^T Ahat_a.

    Both representations must describe the same map (same Choi matrix).
    Raises NotEquivalent when the row spans differ or the verification
    identities fail.
    """
    if rep_a.m != rep_b.m or rep_a.n != rep_b.n or rep_a.q != rep_b.q:
        raise NotEquivalent("representations have incompatible sizes")
    Aa, Ab = rep_a.ahat, rep_b.ahat
    gram = Aa @ Aa.conj().T
    try:
        psi = Ab @ Aa.conj().T @ np.linalg.inv(gram)  # Ahat_b ~ psi Ahat_a
    except np.linalg.LinAlgError as exc:
        raise NotEquivalent("kernel stack is rank deficient") from exc
    scale_a = max(1.0, max_abs(Ab))
    if max_abs(Ab - psi @ Aa) > max(1e3 * rtol * scale_a, 1e-9 * scale_a):
        raise NotEquivalent("kernel row spans differ")
    if numeric_rank(psi, rtol) != rep_a.m:
        raise NotEquivalent("linking transform is singular")
    phi = psi.T
    scale_h = max(1.0, max_abs(rep_a.H))
    if max_abs(rep_a.H - phi @ rep_b.H @ phi.conj().T) > max(1e3 * rtol * scale_h,
                                                            1e-8 * scale_h):
        raise NotEquivalent("coefficient matrices are not conjugate under the transform")
    return phi
