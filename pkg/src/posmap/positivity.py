"""Positivity and complete positivity of adjoint-compatible maps.

The map is positive iff (z (x) x)^* C (z (x) x) >= 0 for all vectors
z in F^q, x in F^n, where C is the Choi matrix; equivalently iff the
q x q compression M(x) = (I_q (x) x)^* C (I_q (x) x) is positive
semidefinite for every x.  Complete positivity is just C >= 0, which is
decidable exactly.

Positivity itself is only semi-decided here: a multistart projected
descent on the unit sphere searches for x making the least eigenvalue of
M(x) negative.  A reported violation is always re-evaluated through the
raw quadratic form before being certified, so NOT_POSITIVE outcomes are
sound; NO_VIOLATION_FOUND is exactly what it says.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .core import hermitian_part, is_hermitian, max_abs
from .errors import NotHermitian
from .mapmodel import MapSpec

NO_VIOLATION_FOUND = "no_violation_found"
NOT_POSITIVE = "not_positive"


@dataclasses.dataclass(frozen=True)
class ProbeResult:
    status: str
    witness_z: np.ndarray | None
    witness_x: np.ndarray | None
    witness_value: float | None
    min_value_seen: float
    samples_used: int
    starts_used: int


@dataclasses.dataclass(frozen=True)
class CPResult:
    is_cp: bool
    min_eigenvalue: float
    witness: np.ndarray


def evaluate_pair(choi: np.ndarray, z: np.ndarray, x: np.ndarray) -> float:
    """Raw quadratic form Re((z (x) x)^* C (z (x) x))."""
    w = np.kron(np.asarray(z), np.asarray(x))
    return float(np.real(w.conj() @ np.asarray(choi) @ w))


def pair_matrix(choi: np.ndarray, n: int, q: int, x: np.ndarray) -> np.ndarray:
    """M(x) = (I_q (x) x)^* C (I_q (x) x), a q x q Hermitian matrix."""
    C4 = np.asarray(choi).reshape(q, n, q, n)
    x = np.asarray(x)
    return np.einsum("akbc,k,c->ab", C4, np.conj(x), x)


def z_side_matrix(choi: np.ndarray, n: int, q: int, z: np.ndarray) -> np.ndarray:
    """K(z) = (z (x) I_n)^* C (z (x) I_n), an n x n Hermitian matrix."""
    C4 = np.asarray(choi).reshape(q, n, q, n)
    z = np.asarray(z)
    return np.einsum("akbc,a,b->kc", C4, np.conj(z), z)


def _unit(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    return v if nrm == 0 else v / nrm


def _random_unit(rng: np.random.Generator, n: int, field: str) -> np.ndarray:
    v = rng.standard_normal(n)
    if field == "complex":
        v = v + 1j * rng.standard_normal(n)
    return _unit(v)


def _min_eig(M: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eigh(hermitian_part(M))
    return float(vals[0]), vecs[:, 0]


def positivity_probe(spec: MapSpec, budget: int = 64, seed: int = 42,
                     tol: float = 1e-9, max_iter: int = 60) -> ProbeResult:
    """Search for a violating pair of the positivity form.

    budget counts multistart attempts (a few deterministic starts, then
    random unit vectors); samples_used counts objective evaluations, which
    is larger.  A violation is certified only after the candidate pair
    re-evaluates below -tol * max(1, |C|_max) through evaluate_pair.
    """
    n, q = spec.n, spec.q
    choi = spec.choi
    if not is_hermitian(choi, max(tol, 1e-9)):
        raise NotHermitian("positivity probe requires a Hermitian Choi matrix")
    scale = max(1.0, max_abs(choi))
    threshold = tol * scale
    rng = np.random.default_rng(seed)

    starts: list[np.ndarray] = []
    for i in range(n):
        e = np.zeros(n, dtype=complex if spec.field == "complex" else float)
        e[i] = 1.0
        starts.append(e)
    starts.append(_unit(np.ones(n, dtype=complex if spec.field == "complex" else float)))
    starts = starts[:budget]
    while len(starts) < budget:
        starts.append(_random_unit(rng, n, spec.field))

    samples = 0
    best_val = np.inf
    best_pair: tuple[np.ndarray, np.ndarray] | None = None

    for start_idx, x0 in enumerate(starts):
        x = x0
        val, z = _min_eig(pair_matrix(choi, n, q, x))
        samples += 1
        eta = 0.5
        for _ in range(max_iter):
            g = z_side_matrix(choi, n, q, z) @ x
            d = g - np.real(np.conj(x) @ g) * x
            if np.linalg.norm(d) <= 1e-12 * (1.0 + abs(val)):
                break
            improved = False
            for _ in range(5):
                xn = _unit(x - eta * d)
                valn, zn = _min_eig(pair_matrix(choi, n, q, xn))
                samples += 1
                if valn < val - 1e-14 * scale:
                    x, val, z = xn, valn, zn
                    eta = min(eta * 1.25, 4.0)
                    improved = True
                    break
                eta /= 2
            if not improved:
                break
        if val < best_val:
            best_val = val
            best_pair = (z.copy(), x.copy())
        if val < -threshold:
            value = evaluate_pair(choi, z, x)
            samples += 1
            if value < -threshold:
                return ProbeResult(NOT_POSITIVE, z.copy(), x.copy(), value,
                                   float(min(best_val, value)), samples,
                                   start_idx + 1)
    return ProbeResult(NO_VIOLATION_FOUND, None, None, None, float(best_val),
                       samples, len(starts))


def is_completely_positive(spec: MapSpec, tol: float = 1e-9) -> CPResult:
    """Exact CP decision: least eigenvalue of the Choi matrix.

    The witness vector is the corresponding eigenvector; when is_cp is
    False it certifies w^* C w < 0.
    """
    choi = spec.choi
    if not is_hermitian(choi, max(tol, 1e-9)):
        raise NotHermitian("complete positivity requires a Hermitian Choi matrix")
    vals, vecs = np.linalg.eigh(hermitian_part(choi))
    scale = max(1.0, max_abs(choi))
    return CPResult(bool(vals[0] >= -tol * scale), float(vals[0]), vecs[:, 0])
