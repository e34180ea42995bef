"""Vertex boundary conditions A psi + B psi' = 0 and their calculus."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgument, IrregularPencil, PoleOfCayley, RankDeficient, ShapeError, SpecError
from .graph import MetricGraph
from .matrixcore import (
    Tol,
    as_square_pair,
    cluster,
    jordan_chain_length,
    kernel,
    numeric_rank,
    ordered_schur,
    pencil_is_singular,
    subspace_preimage,
    Subspace,
    wong_sequences,
)

POLE_CLUSTER_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class BoundaryConditions:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A, B = as_square_pair(self.A, self.B)
        A, B = A.copy(), B.copy()
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def transformed(self, C) -> "BoundaryConditions":
        """The equivalent pair (CA, CB)."""
        C = np.asarray(C, dtype=complex)
        return BoundaryConditions(C @ self.A, C @ self.B)

    def check_graph(self, graph: MetricGraph) -> None:
        if graph.d != self.d:
            raise ShapeError(f"boundary conditions have size {self.d}, graph needs d = {graph.d}")


# ---------------------------------------------------------------------------
# Presets


def dirichlet(d: int) -> BoundaryConditions:
    return BoundaryConditions(np.eye(d), np.zeros((d, d)))


def neumann(d: int) -> BoundaryConditions:
    return BoundaryConditions(np.zeros((d, d)), np.eye(d))


def _vertex_rows(slots: list[int], d: int, gamma: complex, prime: bool) -> tuple[np.ndarray, np.ndarray]:
    """Rows of a delta (or delta-prime) coupling on the given slots.

    delta:        psi continuous,  sum psi' = gamma * psi
    delta-prime:  psi' continuous, sum psi  = gamma * psi'
    """
    p = len(slots)
    cont = np.zeros((p, d), dtype=complex)
    jump = np.zeros((p, d), dtype=complex)
    for r in range(p - 1):
        cont[r, slots[r]] = 1.0
        cont[r, slots[r + 1]] = -1.0
    cont[p - 1, slots[0]] = -gamma
    jump[p - 1, slots] = 1.0
    return (jump, cont) if prime else (cont, jump)


def vertex_coupling(graph: MetricGraph, gamma: complex = 0.0, prime: bool = False) -> BoundaryConditions:
    """delta / delta-prime couplings of strength gamma at every vertex."""
    d = graph.d
    A_rows, B_rows = [], []
    for slots in graph.vertex_slots().values():
        a, b = _vertex_rows(slots, d, complex(gamma), prime)
        A_rows.append(a)
        B_rows.append(b)
    return BoundaryConditions(np.vstack(A_rows), np.vstack(B_rows))


def kirchhoff(graph: MetricGraph) -> BoundaryConditions:
    return vertex_coupling(graph, 0.0)


def delta_star(d: int, gamma: complex) -> BoundaryConditions:
    return vertex_coupling(MetricGraph.star(d), gamma)


def delta_prime_star(d: int, gamma: complex) -> BoundaryConditions:
    return vertex_coupling(MetricGraph.star(d), gamma, prime=True)


def pt_point(tau: float) -> BoundaryConditions:
    """PT-symmetric point interaction joining two endpoints."""
    e = np.exp(1j * tau)
    return BoundaryConditions([[1, -e], [0, 0]], [[0, 0], [1, 1 / e]])


def intermediate() -> BoundaryConditions:
    """psi_1(0) = 0, psi_2(0) = psi_1'(0): regular but not quasi-sectorial."""
    return BoundaryConditions(np.eye(2), [[0, 0], [-1, 0]])


def totally_degenerate() -> BoundaryConditions:
    """psi(0) = psi'(0) = 0 on the first slot, nothing on the second."""
    return BoundaryConditions([[1, 0], [0, 0]], [[0, 0], [1, 0]])


def broken_symmetry(tau: float) -> BoundaryConditions:
    """PT coupling between an external edge and an internal edge at 0, Dirichlet at the far end."""
    e = np.exp(1j * tau)
    A = [[1, -e, 0], [0, 0, 0], [0, 0, 1]]
    B = [[0, 0, 0], [1, 1 / e, 0], [0, 0, 0]]
    return BoundaryConditions(A, B)


def kuzhel_delta_prime(strength: complex) -> BoundaryConditions:
    """delta-prime type coupling on the line with complex strength."""
    s = complex(strength)
    return BoundaryConditions([[0, 0], [-1, 1]], [[-1, -1], [-s / 2, s / 2]])


def pumpkin_nilpotent(N) -> BoundaryConditions:
    """A = diag(-N, N), B = I on a pumpkin graph with n = N.shape[0] edges."""
    N = np.asarray(N, dtype=complex)
    n = N.shape[0]
    Z = np.zeros((n, n))
    return BoundaryConditions(np.block([[-N, Z], [Z, N]]), np.eye(2 * n))


def preset(name: str, graph: MetricGraph, param: complex | None = None) -> BoundaryConditions:
    """Expand a named preset to matrices of size graph.d."""
    d = graph.d
    name = name.lower()
    if name == "dirichlet":
        bc = dirichlet(d)
    elif name == "neumann":
        bc = neumann(d)
    elif name == "kirchhoff":
        bc = kirchhoff(graph)
    elif name in ("delta", "delta_prime"):
        if param is None:
            raise SpecError(f"preset {name!r} needs a coupling strength")
        bc = vertex_coupling(graph, param, prime=(name == "delta_prime"))
    elif name in ("pt_point", "intermediate", "totally_degenerate"):
        if d != 2:
            raise SpecError(f"preset {name!r} needs d = 2, graph has d = {d}")
        if name == "pt_point":
            if param is None:
                raise SpecError("preset 'pt_point' needs tau")
            bc = pt_point(float(np.real(param)))
        else:
            bc = intermediate() if name == "intermediate" else totally_degenerate()
    elif name == "kuzhel_delta_prime":
        if d != 2 or param is None:
            raise SpecError("preset 'kuzhel_delta_prime' needs d = 2 and a strength")
        bc = kuzhel_delta_prime(param)
    elif name == "broken_symmetry":
        if d != 3 or param is None:
            raise SpecError("preset 'broken_symmetry' needs d = 3 and tau")
        bc = broken_symmetry(float(np.real(param)))
    else:
        raise SpecError(f"unknown preset {name!r}")
    bc.check_graph(graph)
    return bc


# ---------------------------------------------------------------------------
# Subspace M(A, B) and its geometry


def _require_full_rank(bc: BoundaryConditions, tol: Tol) -> None:
    if numeric_rank(np.hstack([bc.A, bc.B]), tol) < bc.d:
        raise RankDeficient("rank (A B) < d: AA* + BB* is singular")


def projection_onto_M(bc: BoundaryConditions, tol: Tol = None) -> np.ndarray:
    """Orthogonal projector in C^{2d} onto M(A,B) = {(x, y) : Ax + By = 0}."""
    _require_full_rank(bc, tol)
    AB = np.hstack([bc.A, bc.B])
    gram = AB @ AB.conj().T
    P_perp = AB.conj().T @ sla.solve(gram, AB, assume_a="pos")
    return np.eye(2 * bc.d) - P_perp


def grassmann_distance(bc1: BoundaryConditions, bc2: BoundaryConditions, tol: Tol = None) -> float:
    if bc1.d != bc2.d:
        raise ShapeError("boundary conditions of different size")
    return float(sla.norm(projection_onto_M(bc1, tol) - projection_onto_M(bc2, tol), 2))


def equivalent(bc1: BoundaryConditions, bc2: BoundaryConditions, tol: float = 1e-8) -> bool:
    return grassmann_distance(bc1, bc2) <= tol


# ---------------------------------------------------------------------------
# Quasi-Weierstrass form


@dataclass(frozen=True, eq=False)
class QuasiWeierstrassForm:
    """A = F diag(L, I) G,  B = F diag(I, N_B) G,  N_B nilpotent.

    L is upper triangular with eigenvalues sorted by (real, imag); N_B is
    strictly upper triangular. ``nilpotency_index`` is the least p with
    N_B^p = 0 (0 when the nilpotent block is empty).
    """

    F: np.ndarray
    G: np.ndarray
    m: int
    L: np.ndarray
    N_B: np.ndarray
    nilpotency_index: int

    @property
    def d(self) -> int:
        return self.F.shape[0]

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        m, d = self.m, self.d
        DA = sla.block_diag(self.L, np.eye(d - m))
        DB = sla.block_diag(np.eye(m), self.N_B)
        return self.F @ DA @ self.G, self.F @ DB @ self.G

    @property
    def quasi_sectorial(self) -> bool:
        return self.nilpotency_index <= 1

    def eigenvalues_L(self, rtol: float = POLE_CLUSTER_RTOL) -> list[tuple[complex, int]]:
        return cluster(np.diag(self.L), rtol) if self.m else []


def _filtration_basis(spaces) -> tuple[np.ndarray, list[int]]:
    """Orthonormal basis adapted to a nested chain W_1 ⊂ W_2 ⊂ ..., with levels."""
    n = spaces[0].ambient_dim
    basis = np.zeros((n, 0), dtype=complex)
    levels: list[int] = []
    for lvl, W in enumerate(spaces[1:], start=1):
        if basis.shape[1]:
            resid = W.basis - basis @ (basis.conj().T @ W.basis)
        else:
            resid = W.basis
        new = Subspace.span(resid, scale=1.0).basis[:, : W.dim - basis.shape[1]]
        basis = np.hstack([basis, new])
        levels += [lvl] * new.shape[1]
    return basis, levels


def quasi_weierstrass(bc: BoundaryConditions, tol: Tol = None) -> QuasiWeierstrassForm:
    A, B = bc.A, bc.B
    d = bc.d
    if pencil_is_singular(A, B, tol):
        raise IrregularPencil("det(A + sB) vanishes identically")
    ws = wong_sequences(A, B, tol)
    V = ws.V_star.basis
    m = V.shape[1]
    Wb, levels = _filtration_basis(ws.W)
    if m + Wb.shape[1] != d:
        raise IrregularPencil("Wong limits do not span C^d; the pencil is singular at this tolerance")
    T = np.hstack([V, Wb])
    S = np.hstack([B @ V, A @ Wb])
    if numeric_rank(S, tol) < d or numeric_rank(T, tol) < d:
        raise IrregularPencil("quasi-Weierstrass transformation is singular at this tolerance")
    L = sla.solve(S, A @ V)[:m]
    N = sla.solve(S, B @ Wb)[m:]
    # N maps level i into levels < i; anything else is round-off.
    lv = np.asarray(levels)
    N[lv[:, None] >= lv[None, :]] = 0.0
    F, G = S, sla.inv(T)
    if m:
        U, Z = ordered_schur(L)
        F = F @ sla.block_diag(Z, np.eye(d - m))
        G = sla.block_diag(Z.conj().T, np.eye(d - m)) @ G
        L = U
    index = (len(ws.W) - 1) if d - m else 0
    return QuasiWeierstrassForm(F, G, m, L, N, index)


# ---------------------------------------------------------------------------
# Cayley transform


def cayley(bc: BoundaryConditions, k: complex, tol: Tol = None) -> np.ndarray:
    """S(k) = -(A + ikB)^{-1} (A - ikB)."""
    k = complex(k)
    X = bc.A + 1j * k * bc.B
    if numeric_rank(X, tol) < bc.d:
        raise PoleOfCayley(k)
    return -sla.solve(X, bc.A - 1j * k * bc.B)


def recover_from_cayley(S, k: complex) -> BoundaryConditions:
    k = complex(k)
    if k == 0:
        raise InvalidArgument("k must be nonzero")
    S = np.asarray(S, dtype=complex)
    I = np.eye(S.shape[0])
    return BoundaryConditions(-(S - I) / 2, (S + I) / (2j * k))


@dataclass(frozen=True)
class CayleyPoleReport:
    finite_poles: tuple[tuple[complex, int], ...]
    growth_order_at_infinity: int

    @property
    def is_uniformly_bounded(self) -> bool:
        return self.growth_order_at_infinity == 0


def cayley_poles(bc: BoundaryConditions, tol: Tol = None, qw: QuasiWeierstrassForm | None = None) -> CayleyPoleReport:
    """Poles of k -> S(k) and its polynomial growth order as |k| -> infinity.

    S(k) = G^{-1} diag(-(L + ik)^{-1}(L - ik), -(1 + ikN)^{-1}(1 - ikN)) G.
    The first block has poles at k = i*lambda, lambda in sigma(L), of order
    equal to the Jordan chain length, except at lambda = 0 where one order is
    cancelled by the numerator. The second block is a polynomial in k of
    degree (nilpotency index - 1).
    """
    qw = qw or quasi_weierstrass(bc, tol)
    poles = []
    scale = 1.0 + (sla.norm(qw.L, 2) if qw.m else 0.0)
    for lam, _ in qw.eigenvalues_L():
        gamma = jordan_chain_length(qw.L, lam, tol)
        if abs(lam) <= POLE_CLUSTER_RTOL * scale:
            if gamma > 1:
                poles.append((0j, gamma - 1))
        else:
            poles.append((1j * lam, gamma))
    poles.sort(key=lambda p: (p[0].real, p[0].imag))
    return CayleyPoleReport(tuple(poles), max(qw.nilpotency_index - 1, 0))


# ---------------------------------------------------------------------------
# Classification


class BCTag(enum.Enum):
    RANK_DEFICIENT = "RankDeficient"
    IRREGULAR = "Irregular"
    REGULAR_NON_QUASI_SECTORIAL = "RegularNonQuasiSectorial"
    QUASI_SECTORIAL = "QuasiSectorial"
    SELF_ADJOINT = "SelfAdjoint"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BCClass:
    tag: BCTag
    qw: Optional[QuasiWeierstrassForm] = None

    @property
    def quasi_sectorial(self) -> bool:
        return self.tag in (BCTag.QUASI_SECTORIAL, BCTag.SELF_ADJOINT)

    @property
    def regular(self) -> bool:
        return self.tag not in (BCTag.RANK_DEFICIENT, BCTag.IRREGULAR)


def is_self_adjoint(bc: BoundaryConditions, tol: float) -> bool:
    A, B = bc.A, bc.B
    gap = sla.norm(A @ B.conj().T - B @ A.conj().T, 2)
    return gap <= tol * (sla.norm(A, 2) * sla.norm(B, 2) + 1)


def classify(bc: BoundaryConditions, tol: float = 1e-10) -> BCClass:
    """Regularity class of the boundary conditions.

    Irregularity is decided on the pencil itself: with rank (A B) = d a
    common kernel of A and B makes det(A + sB) vanish identically, but for
    d >= 3 the pencil can be singular without one.
    """
    try:
        _require_full_rank(bc, tol)
    except RankDeficient:
        return BCClass(BCTag.RANK_DEFICIENT)
    try:
        qw = quasi_weierstrass(bc, tol)
    except IrregularPencil:
        return BCClass(BCTag.IRREGULAR)
    if not qw.quasi_sectorial:
        return BCClass(BCTag.REGULAR_NON_QUASI_SECTORIAL, qw)
    if is_self_adjoint(bc, tol):
        return BCClass(BCTag.SELF_ADJOINT, qw)
    return BCClass(BCTag.QUASI_SECTORIAL, qw)


def canonical_PL(bc: BoundaryConditions, tol: Tol = None) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Equivalent form A' = L + P, B' = P-perp with P an orthogonal projector.

    M(A,B) = {(x, y): Px = 0, P-perp y = -Lx}. So P-perp must project onto
    X = {x : Ax in Ran B} and Ker B must equal X-perp; L is then read off
    from any solution of Ax + By = 0 with x in X.
    """
    if pencil_is_singular(bc.A, bc.B, tol):
        raise IrregularPencil("det(A + sB) vanishes identically")
    A, B = bc.A, bc.B
    d = bc.d
    ranB = Subspace.span(B, tol)
    X = subspace_preimage(A, ranB, tol)
    Y0 = kernel(B, tol)
    if X.dim + Y0.dim != d:
        return None
    if X.dim and Y0.dim and sla.norm(X.basis.conj().T @ Y0.basis, 2) > 1e-8:
        return None
    P_perp = X.projector()
    P = np.eye(d) - P_perp
    if X.dim == 0:
        return P, np.zeros((d, d), dtype=complex)
    Y = sla.lstsq(B, -(A @ X.basis))[0]
    L = -P_perp @ Y @ X.basis.conj().T
    return P, L
