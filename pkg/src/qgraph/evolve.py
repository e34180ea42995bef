"""Finite-difference time evolution on a graph with vertex conditions.

Two spatial discretizations share one interface:

* ``stencil``: 3-point interior stencil; the boundary values are eliminated
  row-by-row through the conditions A u + B u' = 0 with the one-sided O(h^2)
  derivative used by :func:`qgraph.graph.trace`. Works for every regular pair.
* ``form``: lumped P1 elements on the quadratic form
  int |u'|^2 - <L u, u>, with boundary values constrained to Ran P-perp.
  Available when the conditions admit the (P, L) representation. Hermitian
  for self-adjoint conditions, so Crank-Nicolson is exactly unitary.

External edges are truncated at radius R with a Dirichlet cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .boundary import BoundaryConditions, canonical_PL
from .errors import GridError, InvalidArgument, IrregularPencil, SingularStep
from .graph import EdgeFunction, MetricGraph, uniform_grid
from .matrixcore import Subspace, pencil_is_singular

DEFAULT_RADIUS = 20.0
BLOWUP = 1e200

Scheme = Literal["auto", "stencil", "form"]


@dataclass(eq=False)
class DiscreteLaplacian:
    """Reduced discrete operator K ~ -Delta(A,B) acting on free unknowns z.

    Full nodal values are ``U = E @ z``; the semi-discrete problems read
    ``M z' = -K z`` (heat), ``M z' = -iK z`` (Schrodinger), ``M z'' = -K z``
    (wave). ``G = E^H W E`` is the Gram matrix of the trapezoid L^2 norm.
    """

    bc: BoundaryConditions
    graph: MetricGraph
    h: float = 1e-3
    radius: float = DEFAULT_RADIUS
    scheme: Scheme = "auto"
    grids: tuple = field(init=False)
    K: sp.csr_matrix = field(init=False)
    M: sp.csr_matrix = field(init=False)
    G: sp.csr_matrix = field(init=False)
    E: sp.csr_matrix = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        self.bc.check_graph(self.graph)
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidArgument("h must be positive")
        if pencil_is_singular(self.bc.A, self.bc.B):
            raise IrregularPencil("irregular boundary conditions cannot be discretized")
        PL = None
        if self.scheme in ("auto", "form"):
            PL = canonical_PL(self.bc)
            if PL is None and self.scheme == "form":
                raise InvalidArgument("boundary conditions have no (P, L) form; use scheme='stencil'")
        self.scheme = "form" if PL is not None else "stencil"

        self.grids = tuple(uniform_grid(L, self.h) for L in self.graph.edge_extents(self.radius))
        if min(x.size for x in self.grids) < 5:
            raise GridError("each edge needs at least 4 cells; decrease h")
        self._offsets = np.cumsum([0] + [x.size for x in self.grids])
        self.n_nodes = int(self._offsets[-1])
        self.weights = np.concatenate([_trapezoid_weights(x) for x in self.grids])
        self._locate_slots()
        if self.scheme == "form":
            self._build_form(*PL)
        else:
            self._build_stencil()
        W = sp.diags(self.weights)
        self.G = (self.E.conj().T @ W @ self.E).tocsr()

    # -- layout ---------------------------------------------------------------

    def _locate_slots(self):
        """Boundary node index and its two inward neighbours for each trace slot."""
        g = self.graph
        nE, nI = g.n_external, g.n_internal
        node, n1, n2, hs = [], [], [], []
        for j in range(nE + nI):
            o = self._offsets[j]
            node.append(o), n1.append(o + 1), n2.append(o + 2)
            hs.append(self.grids[j][1] - self.grids[j][0])
        for i in range(nI):
            j = nE + i
            last = self._offsets[j + 1] - 1
            node.append(last), n1.append(last - 1), n2.append(last - 2)
            hs.append(self.grids[j][1] - self.grids[j][0])
        self._bnode = np.array(node)
        self._n1, self._n2 = np.array(n1), np.array(n2)
        self._hs = np.array(hs)
        capped = [self._offsets[j + 1] - 1 for j in range(nE)]
        fixed = np.zeros(self.n_nodes, dtype=bool)
        fixed[self._bnode] = True
        fixed[capped] = True
        self._free = np.flatnonzero(~fixed)

    def _interior_embedding(self, extra_cols: int) -> sp.lil_matrix:
        E = sp.lil_matrix((self.n_nodes, self._free.size + extra_cols), dtype=complex)
        E[self._free, np.arange(self._free.size)] = 1.0
        return E

    def _build_stencil(self):
        A, B = self.bc.A, self.bc.B
        D1 = np.diag(1.0 / (2.0 * self._hs))
        Cb = A - 3.0 * B @ D1
        try:
            lu = sla.lu_factor(Cb)
        except (ValueError, sla.LinAlgError) as exc:
            raise SingularStep(f"boundary block is singular at h={self.h}") from exc
        if np.linalg.cond(Cb) > 1e14:
            raise SingularStep(f"boundary block is singular at h={self.h}; perturb h")
        Mb = -sla.lu_solve(lu, B @ D1)  # u_b = Mb (4 f1 - f2)
        E = self._interior_embedding(0)
        col = {int(n): c for c, n in enumerate(self._free)}
        for s, row in enumerate(self._bnode):
            for t in range(self.bc.d):
                for nb, w in ((self._n1[t], 4.0), (self._n2[t], -1.0)):
                    c = col.get(int(nb))
                    if c is None:
                        raise GridError("edge too short for the boundary stencil")
                    E[row, c] += w * Mb[s, t]
        self.E = E.tocsr()
        lap = _second_difference(self.grids, self._offsets)[self._free]
        self.K = (-(lap @ self.E)).tocsr()
        self.M = sp.identity(self._free.size, dtype=complex, format="csr")

    def _build_form(self, P, L):
        d = self.bc.d
        Pperp = np.eye(d) - P
        Q = Subspace.span(Pperp).basis  # orthonormal basis of Ran P-perp
        r = Q.shape[1]
        E = self._interior_embedding(r)
        nz = self._free.size
        for s, row in enumerate(self._bnode):
            for c in range(r):
                E[row, nz + c] = Q[s, c]
        self.E = E.tocsr()
        S = _stiffness(self.grids, self._offsets)
        K = self.E.conj().T @ S @ self.E
        if r:
            corr = sp.lil_matrix((nz + r, nz + r), dtype=complex)
            corr[nz:, nz:] = -(Q.conj().T @ L @ Q)
            K = K + corr.tocsr()
        self.K = sp.csr_matrix(K)
        self.M = (self.E.conj().T @ sp.diags(self.weights) @ self.E).tocsr()

    # -- conversions ----------------------------------------------------------

    @property
    def size(self) -> int:
        return self.K.shape[0]

    def restrict(self, psi) -> np.ndarray:
        """Reduced coordinates of a callable ``f(j, x)`` or an EdgeFunction."""
        if isinstance(psi, EdgeFunction):
            vals = [np.interp(xg, x, v.real) + 1j * np.interp(xg, x, v.imag)
                    for xg, x, v in zip(self.grids, psi.grids, psi.values)]
        elif callable(psi):
            vals = [np.broadcast_to(np.asarray(psi(j, x), dtype=complex), x.shape) for j, x in enumerate(self.grids)]
        else:
            raise InvalidArgument("initial data must be an EdgeFunction or a callable f(j, x)")
        U = np.concatenate(vals)
        # weighted least squares; exact for data that satisfy the conditions
        rhs = self.E.conj().T @ (self.weights * U)
        return np.asarray(spla.spsolve(sp.csc_matrix(self.G), rhs), dtype=complex)

    def full(self, z: np.ndarray) -> np.ndarray:
        return self.E @ z

    def to_edge_function(self, z: np.ndarray) -> EdgeFunction:
        U = self.full(z)
        return EdgeFunction(self.graph, self.grids, tuple(np.split(U, self._offsets[1:-1])))

    def norm(self, z: np.ndarray) -> float:
        U = self.full(z)
        return float(np.sqrt(max(np.real(np.vdot(U, self.weights * U)), 0.0)))

    def integral(self, z: np.ndarray) -> complex:
        return complex(self.weights @ self.full(z))

    def eigenvalues(self, n: int | None = None) -> np.ndarray:
        """Eigenvalues of the generalized problem K z = lam M z, sorted by real part."""
        lam = sla.eigvals(self.K.toarray(), self.M.toarray())
        lam = lam[np.isfinite(lam)]
        lam = lam[np.argsort(lam.real)]
        return lam if n is None else lam[:n]


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def _second_difference(grids, offsets) -> sp.csr_matrix:
    n = offsets[-1]
    rows, cols, vals = [], [], []
    for j, x in enumerate(grids):
        h2 = (x[1] - x[0]) ** 2
        idx = offsets[j] + np.arange(1, x.size - 1)
        for shift, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            rows.append(idx), cols.append(idx + shift), vals.append(np.full(idx.size, w / h2))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def _stiffness(grids, offsets) -> sp.csr_matrix:
    n = offsets[-1]
    rows, cols, vals = [], [], []
    for j, x in enumerate(grids):
        h = x[1] - x[0]
        a = offsets[j] + np.arange(x.size - 1)
        b = a + 1
        for r, c, w in ((a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)):
            rows.append(r), cols.append(c), vals.append(np.full(a.size, w / h))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


# ---------------------------------------------------------------------------
# Time stepping


@dataclass
class EvolutionResult:
    times: np.ndarray
    norms: np.ndarray
    integrals: np.ndarray
    energies: Optional[np.ndarray] = None
    snapshots: list = field(default_factory=list)
    blowup_step: Optional[int] = None
    final: Optional[np.ndarray] = None

    def growth(self) -> float:
        n0 = self.norms[0]
        return float(np.max(self.norms) / n0) if n0 > 0 else 0.0

    def to_csv(self) -> str:
        lines = ["t,norm,re_integral,im_integral" + (",energy" if self.energies is not None else "")]
        for i, t in enumerate(self.times):
            row = f"{t:.10g},{self.norms[i]:.16e},{self.integrals[i].real:.16e},{self.integrals[i].imag:.16e}"
            if self.energies is not None:
                row += f",{self.energies[i]:.16e}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def _factor(mat) -> Callable[[np.ndarray], np.ndarray]:
    try:
        lu = spla.splu(sp.csc_matrix(mat, dtype=complex))
    except RuntimeError as exc:
        raise SingularStep(f"implicit step matrix is singular: {exc}") from exc
    return lu.solve


def _check_step(dt: float, n_steps: int):
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidArgument("dt must be positive")
    if n_steps < 0:
        raise InvalidArgument("n_steps must be nonnegative")


def _run_first_order(dl: DiscreteLaplacian, z: np.ndarray, dt: float, n_steps: int, gen, snapshot_every):
    lhs = _factor(dl.M + 0.5 * dt * gen)
    rhs = (dl.M - 0.5 * dt * gen).tocsr()
    norms, ints, snaps = [dl.norm(z)], [dl.integral(z)], []
    blow = None
    if snapshot_every:
        snaps.append(dl.to_edge_function(z))
    for n in range(1, n_steps + 1):
        z = lhs(rhs @ z)
        nz = dl.norm(z)
        norms.append(nz)
        ints.append(dl.integral(z))
        if snapshot_every and n % snapshot_every == 0:
            snaps.append(dl.to_edge_function(z))
        if not math.isfinite(nz) or nz > BLOWUP:
            blow = n
            break
    times = dt * np.arange(len(norms))
    return EvolutionResult(times, np.array(norms), np.array(ints), None, snaps, blow, z)


def _initial(dl: DiscreteLaplacian, psi0) -> np.ndarray:
    if isinstance(psi0, np.ndarray) and psi0.shape == (dl.size,):
        return psi0.astype(complex)
    return dl.restrict(psi0)


def step_heat(dl: DiscreteLaplacian, psi0, dt: float, n_steps: int, snapshot_every: int = 0) -> EvolutionResult:
    """Crank-Nicolson for u_t = Delta u."""
    _check_step(dt, n_steps)
    return _run_first_order(dl, _initial(dl, psi0), dt, n_steps, dl.K, snapshot_every)


def step_schrodinger(dl: DiscreteLaplacian, psi0, dt: float, n_steps: int, snapshot_every: int = 0) -> EvolutionResult:
    """Crank-Nicolson for i u_t = -Delta u."""
    _check_step(dt, n_steps)
    return _run_first_order(dl, _initial(dl, psi0), dt, n_steps, 1j * dl.K, snapshot_every)


def step_wave(dl: DiscreteLaplacian, psi0, v0, dt: float, n_steps: int, snapshot_every: int = 0) -> EvolutionResult:
    """Newmark average-acceleration scheme (beta=1/4, gamma=1/2) for u_tt = Delta u.

    ``energies`` holds sqrt(|v|^2 + |<K u, u>|), an energy-like norm.
    """
    _check_step(dt, n_steps)
    beta = 0.25
    u = _initial(dl, psi0)
    v = _initial(dl, v0) if v0 is not None else np.zeros_like(u)
    Msolve = _factor(dl.M)
    a = Msolve(-(dl.K @ u))
    lhs = _factor(dl.M + beta * dt * dt * dl.K)

    def energy(u, v):
        vn = dl.norm(v)
        return math.sqrt(vn * vn + abs(np.vdot(u, dl.K @ u)))

    norms, ints, ens, snaps = [dl.norm(u)], [dl.integral(u)], [energy(u, v)], []
    blow = None
    if snapshot_every:
        snaps.append(dl.to_edge_function(u))
    for n in range(1, n_steps + 1):
        pred = u + dt * v + (0.5 - beta) * dt * dt * a
        a_new = lhs(-(dl.K @ pred))
        u = pred + beta * dt * dt * a_new
        v = v + 0.5 * dt * (a + a_new)
        a = a_new
        nu = dl.norm(u)
        norms.append(nu)
        ints.append(dl.integral(u))
        ens.append(energy(u, v))
        if snapshot_every and n % snapshot_every == 0:
            snaps.append(dl.to_edge_function(u))
        if not math.isfinite(nu) or nu > BLOWUP:
            blow = n
            break
    times = dt * np.arange(len(norms))
    return EvolutionResult(times, np.array(norms), np.array(ints), np.array(ens), snaps, blow, u)


# ---------------------------------------------------------------------------
# Diagnostics


def truncation_check(
    bc: BoundaryConditions,
    graph: MetricGraph,
    psi0,
    dt: float,
    n_steps: int,
    h: float = 1e-2,
    radius: float = DEFAULT_RADIUS,
    kind: Literal["heat", "schrodinger"] = "heat",
) -> float:
    """Max change in recorded norms when the truncation radius is doubled."""
    step = step_heat if kind == "heat" else step_schrodinger
    runs = [step(DiscreteLaplacian(bc, graph, h, R), psi0, dt, n_steps).norms for R in (radius, 2 * radius)]
    n = min(len(r) for r in runs)
    return float(np.max(np.abs(runs[0][:n] - runs[1][:n])))


def _gram_root(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eigh((G + G.conj().T) / 2)
    w = np.clip(w, 1e-300, None)
    return (V * np.sqrt(w)) @ V.conj().T, (V / np.sqrt(w)) @ V.conj().T


@dataclass(frozen=True)
class GrowthFit:
    h: float
    C: float
    mu: float
    times: np.ndarray
    norms: np.ndarray  # operator norms of the propagator at ``times``


def propagator_growth(dl: DiscreteLaplacian, t_max: float = 0.5, n_times: int = 60, dt: float | None = None) -> GrowthFit:
    """Fit ||e^{tDelta_h}|| <= C e^{mu t} for the Crank-Nicolson heat propagator.

    Operator norms are measured in the discrete L^2 norm. mu is the spectral
    abscissa of the generator (clipped at 0) and C = max_t ||P(t)|| e^{-mu t}.
    """
    if dl.size > 4000:
        raise InvalidArgument("growth fit uses dense matrices; use a coarser grid")
    K = dl.K.toarray()
    M = dl.M.toarray()
    Gh, Gih = _gram_root(dl.G.toarray())
    gen = -np.linalg.solve(M, K)
    mu = max(float(np.max(np.linalg.eigvals(gen).real)), 0.0)
    dt = dl.h * dl.h if dt is None else dt
    I = np.eye(dl.size)
    step = np.linalg.solve(I - 0.5 * dt * gen, I + 0.5 * dt * gen)
    n_total = max(1, int(round(t_max / dt)))
    marks = np.unique(np.round(np.geomspace(1, n_total, n_times)).astype(int))
    P = I.astype(complex)
    done = 0
    norms, times = [], []
    for m in marks:
        P = np.linalg.matrix_power(step, m - done) @ P
        done = m
        norms.append(np.linalg.norm(Gh @ P @ Gih, 2))
        times.append(m * dt)
    times, norms = np.array(times), np.array(norms)
    C = float(np.max(norms * np.exp(-mu * times)))
    return GrowthFit(dl.h, max(C, 1.0), mu, times, norms)


def refinement_growth(
    bc: BoundaryConditions,
    graph: MetricGraph,
    h0: float = 1 / 20,
    refinements: int = 3,
    t_max: float = 0.5,
    radius: float = 5.0,
    scheme: Scheme = "stencil",
    dt: float = 1e-4,
) -> list[GrowthFit]:
    """Growth constants on grids h0, h0/2, ... (``refinements`` halvings).

    Only the grid is refined; the run (dt, window) stays fixed.
    """
    return [
        propagator_growth(DiscreteLaplacian(bc, graph, h0 / 2**r, radius, scheme), t_max, dt=dt)
        for r in range(refinements + 1)
    ]


def refinement_ratios(fits: list[GrowthFit]) -> np.ndarray:
    C = np.array([f.C for f in fits])
    return C[1:] / C[:-1]
