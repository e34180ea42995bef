"""Dense complex linear algebra with explicit rank tolerances.

All rank decisions go through one rule: a singular value counts when it
exceeds ``rel * max(m, n) * scale``, where ``scale`` is the largest singular
value of the matrix (or a caller-provided reference norm when the matrix is a
product that may legitimately be pure round-off).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg as sla

from .errors import InvalidMatrix, NotAnEigenvalue, ShapeError

DEFAULT_RTOL = 1e-10
CLUSTER_RTOL = 1e-8


@dataclass(frozen=True)
class RankTolerance:
    relative_threshold: float = DEFAULT_RTOL

    def __post_init__(self):
        if not (self.relative_threshold > 0 and np.isfinite(self.relative_threshold)):
            raise ValueError("relative_threshold must be a positive finite number")


Tol = Union[RankTolerance, float, None]


def _rel(tol: Tol) -> float:
    if tol is None:
        return DEFAULT_RTOL
    if isinstance(tol, RankTolerance):
        return tol.relative_threshold
    return RankTolerance(float(tol)).relative_threshold


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D complex array."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidMatrix(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return arr


def as_square_pair(A, B) -> tuple[np.ndarray, np.ndarray]:
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise ShapeError(f"A and B must be square of equal size, got {A.shape} and {B.shape}")
    return A, B


def _threshold(shape, sigma_ref: float, tol: Tol) -> float:
    return _rel(tol) * max(shape) * sigma_ref


def numeric_rank(M, tol: Tol = None, scale: float | None = None) -> int:
    """Number of singular values above the relative threshold.

    ``scale`` replaces sigma_max as the reference magnitude; use it when ``M``
    is a derived quantity whose own norm may be round-off.
    """
    M = as_matrix(M)
    s = sla.svdvals(M)
    ref = s[0] if scale is None else float(scale)
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s > _threshold(M.shape, ref, tol)))


# ---------------------------------------------------------------------------
# Subspaces


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n stored by an orthonormal basis (n x dim)."""

    basis: np.ndarray
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ShapeError("basis must be a 2-D array")
        n = b.shape[0] if self.ambient_dim < 0 else self.ambient_dim
        if b.shape[0] != n:
            raise ShapeError("basis rows must equal ambient_dim")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "ambient_dim", n)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex), n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex), n)

    @classmethod
    def span(cls, vectors, tol: Tol = None, scale: float | None = None) -> "Subspace":
        """Column span of ``vectors`` at tolerance."""
        X = np.asarray(vectors, dtype=complex)
        if X.ndim == 1:
            X = X[:, None]
        n = X.shape[0]
        if X.shape[1] == 0:
            return cls.zero(n)
        U, s, _ = sla.svd(X, full_matrices=False)
        ref = s[0] if scale is None else float(scale)
        if ref == 0.0:
            return cls.zero(n)
        r = int(np.count_nonzero(s > _threshold(X.shape, ref, tol)))
        return cls(U[:, :r], n)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        Q, _ = sla.qr(self.basis, mode="full")
        return Subspace(Q[:, self.dim:], self.ambient_dim)

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=complex)
        r = x - self.basis @ (self.basis.conj().T @ x)
        return bool(np.linalg.norm(r) <= tol * max(np.linalg.norm(x), 1.0))

    def intersect(self, other: "Subspace", tol: Tol = None) -> "Subspace":
        # x in both  <=>  (I - P_self) x = 0 and (I - P_other) x = 0
        n = self.ambient_dim
        stacked = np.vstack([np.eye(n) - self.projector(), np.eye(n) - other.projector()])
        return kernel(stacked, tol, scale=1.0)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(np.hstack([self.basis, other.basis]), scale=1.0)


def kernel(M, tol: Tol = None, scale: float | None = None) -> Subspace:
    M = as_matrix(M)
    _, s, Vh = sla.svd(M, full_matrices=True)
    ref = (s[0] if s.size else 0.0) if scale is None else float(scale)
    if ref == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > _threshold(M.shape, ref, tol)))
    return Subspace(Vh[r:].conj().T, M.shape[1])


def image(M, V: Subspace, tol: Tol = None) -> Subspace:
    """M·V, with rank decided relative to ||M||."""
    M = as_matrix(M)
    if V.ambient_dim != M.shape[1]:
        raise ShapeError("subspace dimension does not match matrix columns")
    if V.dim == 0:
        return Subspace.zero(M.shape[0])
    return Subspace.span(M @ V.basis, tol, scale=sla.norm(M, 2))


def subspace_preimage(M, V: Subspace, tol: Tol = None) -> Subspace:
    """{x : M x in V}, as the kernel of P_{V-perp} M."""
    M = as_matrix(M)
    if V.ambient_dim != M.shape[0]:
        raise ShapeError("subspace dimension does not match matrix rows")
    P_perp = np.eye(M.shape[0]) - V.projector()
    ref = sla.norm(M, 2)
    return kernel(P_perp @ M, tol, scale=ref if ref > 0 else 1.0)


# ---------------------------------------------------------------------------
# Pencils


@dataclass(frozen=True)
class WongSequences:
    V: tuple[Subspace, ...]
    W: tuple[Subspace, ...]

    @property
    def V_star(self) -> Subspace:
        return self.V[-1]

    @property
    def W_star(self) -> Subspace:
        return self.W[-1]


def wong_sequences(A, B, tol: Tol = None) -> WongSequences:
    """Iterate V_{i+1} = A^{-1}(B V_i), W_{i+1} = B^{-1}(A W_i) to stabilization."""
    A, B = as_square_pair(A, B)
    d = A.shape[0]
    V = [Subspace.full(d)]
    while True:
        nxt = subspace_preimage(A, image(B, V[-1], tol), tol)
        if nxt.dim == V[-1].dim:
            break
        V.append(nxt)
        if len(V) > d + 1:
            break
    W = [Subspace.zero(d)]
    while True:
        nxt = subspace_preimage(B, image(A, W[-1], tol), tol)
        if nxt.dim == W[-1].dim:
            break
        W.append(nxt)
        if len(W) > d + 1:
            break
    return WongSequences(tuple(V), tuple(W))


_PROBES = (0.6180339887 + 0.7861513778j, -1.3247179572 + 0.3819660113j, 0.2207440846 - 1.1673039783j)


def pencil_is_singular(A, B, tol: Tol = None) -> bool:
    """det(A + sB) == 0 identically, tested at fixed probe points."""
    A, B = as_square_pair(A, B)
    d = A.shape[0]
    nA, nB = sla.norm(A, 2), sla.norm(B, 2)
    if nA == 0 and nB == 0:
        return True
    ratio = nA / nB if nA > 0 and nB > 0 else 1.0
    return all(numeric_rank(A + (p * ratio) * B, tol) < d for p in _PROBES)


def cluster(values, rtol: float = CLUSTER_RTOL) -> list[tuple[complex, int]]:
    """Merge values closer than rtol*(1+|v|) (single linkage); return (mean, count)."""
    vals = [complex(v) for v in values]
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= rtol * (1 + max(abs(vals[i]), abs(vals[j]))):
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(vals[i])
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


@dataclass(frozen=True)
class PencilSpectrum:
    """Roots of det(A + mu B).

    ``finite`` holds (mu, multiplicity) pairs; ``infinite`` is d - deg det.
    ``singular`` marks det(A + sB) == 0 identically, in which case the other
    fields are empty.
    """

    finite: tuple[tuple[complex, int], ...]
    infinite: int
    singular: bool = False

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.finite)


def pencil_eigenvalues(A, B, tol: Tol = None, cluster_rtol: float = CLUSTER_RTOL) -> PencilSpectrum:
    A, B = as_square_pair(A, B)
    d = A.shape[0]
    if pencil_is_singular(A, B, tol):
        return PencilSpectrum((), 0, singular=True)
    # deg det(A + sB) equals dim V*; it decides how many QZ pairs are finite.
    m = wong_sequences(A, B, tol).V_star.dim
    # Row equilibration leaves the roots unchanged.
    scale = np.sqrt(np.sum(np.abs(A) ** 2 + np.abs(B) ** 2, axis=1))
    scale[scale == 0] = 1.0
    Ae, Be = A / scale[:, None], B / scale[:, None]
    w = sla.eigvals(-Ae, Be, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    weight = np.abs(beta) / np.hypot(np.abs(alpha), np.abs(beta))
    order = np.argsort(-weight, kind="stable")[:m]
    roots = [alpha[i] / beta[i] for i in order]
    return PencilSpectrum(tuple(cluster(roots, cluster_rtol)), d - m)


def jordan_chain_length(M, lam: complex, tol: Tol = None) -> int:
    """Size of the largest Jordan block of M at lam."""
    M = as_matrix(M)
    n = M.shape[0]
    if M.shape[1] != n:
        raise ShapeError("matrix must be square")
    N = M - lam * np.eye(n)
    ref = sla.norm(N, 2)
    if ref == 0.0:
        return 1
    ranks = [n]
    P = np.eye(n, dtype=complex)
    for k in range(1, n + 2):
        P = P @ N
        ranks.append(numeric_rank(P, tol, scale=ref**k))
        if k == 1 and ranks[1] == n:
            raise NotAnEigenvalue(f"{lam} is not an eigenvalue at tolerance")
        if ranks[k] == ranks[k - 1]:
            return k - 1
    return n


def ordered_schur(M) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form M = Z U Z* with diag(U) sorted by (real, imag)."""
    M = as_matrix(M)
    U, Z = sla.schur(M, output="complex")
    n = U.shape[0]
    for p in range(n):
        diag = np.diag(U)[p:]
        j = p + min(range(n - p), key=lambda i: (round(diag[i].real, 12), round(diag[i].imag, 12)))
        if j != p:
            U, Z, info = sla.lapack.ztrexc(U, Z, j + 1, p + 1)
            if info != 0:  # pragma: no cover - LAPACK failure
                raise np.linalg.LinAlgError("ztrexc failed")
    return U, Z
