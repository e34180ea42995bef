"""Spectra, resolvents and spectral projections of -Laplacian(A, B) on a metric graph.

Eigenvalues are lambda = k^2. On an internal edge every solution of
-psi'' = k^2 psi is  alpha e^{ikx} + beta e^{ik(a-x)}, on an external edge
only alpha e^{ikx} is square integrable (Im k > 0). Stacking the
coefficients into c in C^d gives psi = (1 + T)c, psi' = ik(1 - T)c, so the
boundary conditions read Z(k) c = 0 with

    Z(k) = (A + ikB) + (A - ikB) T(k) = (A + ikB)(1 - S(k) T(k)).

Root finding works with det Z, which is entire in k, instead of the
secular function det(1 - S T), which has the Cayley poles.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.integrate import cumulative_simpson, simpson

from .boundary import BCTag, BoundaryConditions, cayley, cayley_poles, classify
from .errors import (
    ContourThroughZero,
    ContourTooClose,
    InvalidArgument,
    IrregularPencil,
    KappaTooSmall,
    NoConvergence,
    OnSpectrum,
    PoleOfCayley,
    ScopeError,
    WrongClass,
    ZeroK,
)
from .graph import EdgeFunction, MetricGraph, edge_slices, uniform_grid
from .matrixcore import kernel, numeric_rank, pencil_eigenvalues, pencil_is_singular

NODES_PER_SIDE = 128
MAX_PHASE_STEP = 0.6  # radians between neighbouring contour samples
NEWTON_RTOL = 1e-14


def sqrt_upper(z: complex) -> complex:
    """Square root on the sheet Im sqrt(z) >= 0 (positive reals map to k > 0)."""
    k = complex(np.sqrt(complex(z)))
    if k.imag < 0 or (k.imag == 0 and k.real < 0):
        k = -k
    return k


# ---------------------------------------------------------------------------
# Secular matrices


def T_matrix(graph: MetricGraph, k) -> np.ndarray:
    """T(k, a) for scalar k, or a stack (n, d, d) for an array of k."""
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    d = graph.d
    _, i0, ia = edge_slices(graph)
    T = np.zeros((ks.size, d, d), dtype=complex)
    if graph.n_internal:
        e = np.exp(1j * ks[:, None] * graph.lengths[None, :])
        r0 = np.arange(i0.start, i0.stop)
        ra = np.arange(ia.start, ia.stop)
        T[:, r0, ra] = e
        T[:, ra, r0] = e
    return T[0] if np.ndim(k) == 0 else T


def _dT(graph: MetricGraph, k: complex) -> np.ndarray:
    d = graph.d
    _, i0, ia = edge_slices(graph)
    dT = np.zeros((d, d), dtype=complex)
    if graph.n_internal:
        a = graph.lengths
        e = 1j * a * np.exp(1j * k * a)
        r0 = np.arange(i0.start, i0.stop)
        ra = np.arange(ia.start, ia.stop)
        dT[r0, ra] = e
        dT[ra, r0] = e
    return dT


def Z_matrix(bc: BoundaryConditions, graph: MetricGraph, k) -> np.ndarray:
    """(A + ikB) + (A - ikB) T(k); vectorised over an array of k."""
    bc.check_graph(graph)
    ks = np.asarray(k, dtype=complex)
    A, B = bc.A, bc.B
    if ks.ndim == 0:
        return (A + 1j * ks * B) + (A - 1j * ks * B) @ T_matrix(graph, ks)
    kk = ks.reshape(-1)[:, None, None]
    Z = (A + 1j * kk * B) + (A - 1j * kk * B) @ T_matrix(graph, ks.reshape(-1))
    return Z.reshape(ks.shape + (bc.d, bc.d))


def det_Z(bc: BoundaryConditions, graph: MetricGraph, k) -> np.ndarray:
    return np.linalg.det(Z_matrix(bc, graph, k))


def log_derivative(bc: BoundaryConditions, graph: MetricGraph, k: complex) -> complex:
    """(d/dk) log det Z(k) = tr(Z^{-1} Z')."""
    k = complex(k)
    A, B = bc.A, bc.B
    T = T_matrix(graph, k)
    Z = (A + 1j * k * B) + (A - 1j * k * B) @ T
    dZ = 1j * B - 1j * B @ T + (A - 1j * k * B) @ _dT(graph, k)
    return complex(np.trace(np.linalg.solve(Z, dZ)))


def secular(bc: BoundaryConditions, graph: MetricGraph, k: complex) -> complex:
    """det(1 - S(k) T(k, a))."""
    if graph.n_internal == 0:
        raise ScopeError("secular function needs internal edges; use star_point_spectrum")
    bc.check_graph(graph)
    S = cayley(bc, k)
    return complex(np.linalg.det(np.eye(bc.d) - S @ T_matrix(graph, complex(k))))


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Eigenvalue:
    k: complex
    lam: complex
    multiplicity: int
    physical: bool = True  # False for resonances (Im k < 0 with external edges)


@dataclass(frozen=True)
class EnclosureRegion:
    """Region of the lambda-plane containing the point spectrum.

    parabola: Re z >= c (Im z)^2 - C, with c = 1/(4 t^2), C = t^2
    sector:   k = sqrt(z) satisfies Im k < max(C |Re k|, c)
    ``threshold`` is the Im-k cutoff t* used to derive the parameters.
    """

    kind: str
    c: float
    C: float
    threshold: float

    def contains(self, lam: complex, slack: float = 1e-9) -> bool:
        lam = complex(lam)
        if self.kind == "parabola":
            return lam.real >= self.c * lam.imag**2 - self.C - slack * (1 + abs(lam))
        k = sqrt_upper(lam)
        return k.imag < max(self.C * abs(k.real), self.c) + slack * (1 + abs(k))


@dataclass(frozen=True)
class SpectralReport:
    point_spectrum: tuple[Eigenvalue, ...]
    essential: Optional[tuple[float, float]]
    search_region: Optional[tuple[float, float, float, float]] = None
    total_winding: Optional[int] = None
    resonances: tuple[Eigenvalue, ...] = ()
    whole_plane: bool = False
    enclosure: Optional[EnclosureRegion] = None


# ---------------------------------------------------------------------------
# Argument principle


def _side_winding(F: Callable[[np.ndarray], np.ndarray], za: complex, zb: complex, n: int) -> float:
    t = np.linspace(0.0, 1.0, n + 1)
    v = F(za + (zb - za) * t)
    for _ in range(48):
        if not np.all(np.isfinite(v)) or np.any(v == 0):
            raise ContourThroughZero("function vanishes on the contour")
        dphi = np.angle(v[1:] / v[:-1])
        bad = np.flatnonzero(np.abs(dphi) > MAX_PHASE_STEP)
        if bad.size == 0:
            return float(dphi.sum())
        tm = 0.5 * (t[bad] + t[bad + 1])
        vm = F(za + (zb - za) * tm)
        t = np.insert(t, bad + 1, tm)
        v = np.insert(v, bad + 1, vm)
    raise ContourThroughZero("phase does not resolve along a contour side (zero on or near the contour)")


def winding_number(F, rect, n: int = NODES_PER_SIDE) -> int:
    """Zeros of F inside rect = (x0, x1, y0, y1), counted with multiplicity."""
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = sum(_side_winding(F, corners[i], corners[(i + 1) % 4], n) for i in range(4))
    w = total / (2 * math.pi)
    if abs(w - round(w)) > 1e-3:  # pragma: no cover - sum of increments is integral by construction
        raise ContourThroughZero(f"winding {w} is not an integer")
    return int(round(w))


def _newton(logder, k0: complex, mult: int, maxit: int = 80) -> tuple[complex, bool]:
    k = complex(k0)
    step = math.inf
    for _ in range(maxit):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                ld = logder(k)
        except (np.linalg.LinAlgError, ZeroDivisionError):
            return k, True  # landed exactly on the zero
        if not np.isfinite(ld) or ld == 0:
            return k, False
        step = mult / ld
        k -= step
        if abs(step) <= NEWTON_RTOL * (1 + abs(k)):
            return k, True
    # Round-off can stall the last digits; accept a small final step.
    return k, abs(step) <= 1e-10 * (1 + abs(k))


_SPLITS = (0.5361, 0.4617, 0.5873, 0.4129, 0.6347)


def _inside(k: complex, rect, margin: float) -> bool:
    x0, x1, y0, y1 = rect
    return x0 - margin <= k.real <= x1 + margin and y0 - margin <= k.imag <= y1 + margin


def find_zeros(F, logder, rect, threads: int = 1, max_depth: int = 64) -> tuple[list[tuple[complex, int]], int]:
    """Zeros of an entire function in a rectangle by recursive bisection.

    Returns ([(root, multiplicity)], total winding number of rect).
    """
    total = winding_number(F, rect)
    work = [(tuple(map(float, rect)), total, 0)]
    roots: list[tuple[complex, int]] = []

    def process(item):
        r, n, depth = item
        x0, x1, y0, y1 = r
        centre = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        size = max(x1 - x0, y1 - y0)
        tiny = size < 1e-7 * (1 + abs(centre))
        if n == 1 or tiny:
            k, ok = _newton(logder, centre, n)
            if ok and _inside(k, r, 1e-9 * (1 + abs(k))):
                return [(k, n)], []
            if tiny:
                raise NoConvergence(f"Newton failed near {centre} (winding {n})")
        if depth >= max_depth:
            raise NoConvergence("rectangle subdivision did not separate the zeros")
        last: Exception | None = None
        for frac in _SPLITS:
            split_x = (x1 - x0) >= (y1 - y0)
            if split_x:
                xm = x0 + frac * (x1 - x0)
                kids = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
            else:
                ym = y0 + frac * (y1 - y0)
                kids = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
            try:
                ws = [winding_number(F, kr) for kr in kids]
            except ContourThroughZero as exc:
                last = exc
                continue
            if sum(ws) != n:
                last = ContourThroughZero("child windings do not add up")
                continue
            return [], [(kr, w, depth + 1) for kr, w in zip(kids, ws) if w > 0]
        raise last  # type: ignore[misc]

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while work:
            results = list(pool.map(process, work)) if pool else [process(w) for w in work]
            work = []
            for found, more in results:
                roots.extend(found)
                work.extend(more)
    finally:
        if pool:
            pool.shutdown()
    roots.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return roots, total


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def compact_spectrum(
    bc: BoundaryConditions,
    graph: MetricGraph,
    region: tuple[float, float, float, float],
    tol: float = 1e-8,
    threads: int | None = None,
) -> SpectralReport:
    """Zeros k of det Z in the k-rectangle region = (re0, re1, im0, im1).

    On a compact graph every zero k != 0 gives the eigenvalue k^2. With
    external edges only zeros with Im k >= -tol are eigenvalues (real k are
    embedded eigenvalues); the others are listed as resonances.
    """
    if graph.n_internal == 0:
        raise ScopeError("graph has no internal edges; use star_point_spectrum")
    bc.check_graph(graph)
    if pencil_is_singular(bc.A, bc.B):
        raise IrregularPencil("spectrum may be empty or all of C for irregular boundary conditions")
    x0, x1, y0, y1 = map(float, region)
    if not (x0 < x1 and y0 < y1):
        raise InvalidArgument("region must satisfy re0 < re1 and im0 < im1")
    if x0 <= 0 <= x1 and y0 <= 0 <= y1:
        raise InvalidArgument("region must exclude k = 0")

    def F(ks):
        return det_Z(bc, graph, ks)

    def logder(k):
        return log_derivative(bc, graph, k)

    try:
        roots, total = find_zeros(F, logder, (x0, x1, y0, y1), threads or _threads())
    except ContourThroughZero:
        eps = 1e-7 * max(x1 - x0, y1 - y0)
        roots, total = find_zeros(F, logder, (x0 - eps, x1 + eps, y0 - eps, y1 + eps), threads or _threads())
    eig, res = [], []
    for k, n in roots:
        physical = graph.is_compact or k.imag >= -tol
        (eig if physical else res).append(Eigenvalue(k, k * k, n, physical))
    return SpectralReport(
        tuple(eig),
        None if graph.is_compact else (0.0, math.inf),
        (x0, x1, y0, y1),
        total,
        tuple(res),
    )


def star_point_spectrum(bc: BoundaryConditions, graph: MetricGraph | None = None, tol: float = 1e-10) -> SpectralReport:
    """Eigenvalues on a star graph: roots mu = ik of det(A + mu B) with Im k > 0."""
    if graph is not None:
        if graph.n_internal:
            raise ScopeError("star_point_spectrum needs a graph without internal edges")
        bc.check_graph(graph)
    ps = pencil_eigenvalues(bc.A, bc.B)
    if ps.singular:
        return SpectralReport((), (0.0, math.inf), whole_plane=True)
    eig = []
    for mu, mult in ps.finite:
        k = -1j * mu
        if k.imag > tol * (1 + abs(k)):
            eig.append(Eigenvalue(k, k * k, mult))
    return SpectralReport(tuple(eig), (0.0, math.inf))


# ---------------------------------------------------------------------------
# Green's function


def _chunk_stops(n: int, h: float, k: complex) -> list[int]:
    """Index boundaries so that |Im k| * chunk length stays below ~15."""
    per = n if k.imag == 0 else max(2, int(15.0 / (abs(k.imag) * h)))
    stops = list(range(0, n, per)) + [n]
    if len(stops) > 2 and stops[-1] - stops[-2] < 2:
        stops.pop(-2)
    return stops


def exp_convolution(x: np.ndarray, f: np.ndarray, k: complex) -> np.ndarray:
    """J(x) = int_0^x e^{ik(x-y)} f(y) dy on a uniform grid (cumulative Simpson)."""
    n = x.size - 1
    h = x[1] - x[0]
    J = np.zeros(x.size, dtype=complex)
    stops = _chunk_stops(n, h, k)
    for s, e in zip(stops[:-1], stops[1:]):
        xs = x[s : e + 1] - x[s]
        integrand = np.exp(-1j * k * xs) * f[s : e + 1]
        if e - s >= 2:
            # cumulative_simpson silently drops imaginary parts
            loc = cumulative_simpson(integrand.real, x=xs, initial=0) + 1j * cumulative_simpson(
                integrand.imag, x=xs, initial=0
            )
        else:
            loc = np.concatenate([[0], 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(xs)])
        J[s : e + 1] = np.exp(1j * k * xs) * (J[s] + loc)
    return J


def _fwd_bwd(x: np.ndarray, f: np.ndarray, k: complex) -> tuple[np.ndarray, np.ndarray]:
    fwd = exp_convolution(x, f, k)
    L = x[-1]
    bwd = exp_convolution(L - x[::-1], f[::-1], k)[::-1]
    return fwd, bwd


@dataclass(frozen=True, eq=False)
class GreensKernel:
    """Resolvent kernel of -Laplacian(A,B) at lambda = k^2.

    r(x, y) = (i/2k) diag(e^{ik|x_j - y_j|}) - (i/2k) Phi(x) Z^{-1}(A - ikB) Phi(y)^T,
    which equals the textbook form with [1 - ST]^{-1} S but stays finite at
    Cayley poles.
    """

    bc: BoundaryConditions
    graph: MetricGraph
    k: complex
    _coupling: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = complex(self.k)
        object.__setattr__(self, "k", k)
        self.bc.check_graph(self.graph)
        if k == 0:
            raise ZeroK("k must be nonzero")
        if self.graph.n_external and k.imag <= 0:
            raise InvalidArgument("graphs with external edges need Im k > 0")
        Z = Z_matrix(self.bc, self.graph, k)
        if numeric_rank(Z) < self.bc.d:
            raise OnSpectrum(f"k^2 = {k * k} lies in the spectrum")
        M = -np.linalg.solve(Z, self.bc.A - 1j * k * self.bc.B)
        object.__setattr__(self, "_coupling", M)

    @property
    def lam(self) -> complex:
        return self.k * self.k

    def phi(self, x) -> np.ndarray:
        """Phi(x): n_edges x d matrix of the exponential edge solutions."""
        g = self.graph
        x = np.asarray(x, dtype=float)
        k = self.k
        nE, nI = g.n_external, g.n_internal
        P = np.zeros((g.n_edges, g.d), dtype=complex)
        for j in range(nE):
            P[j, j] = np.exp(1j * k * x[j])
        for i in range(nI):
            a = g.lengths[i]
            P[nE + i, nE + i] = np.exp(1j * k * x[nE + i])
            P[nE + i, nE + nI + i] = np.exp(1j * k * (a - x[nE + i]))
        return P

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        c = 1j / (2 * self.k)
        r0 = np.diag(c * np.exp(1j * self.k * np.abs(x - y)))
        return r0 + c * self.phi(x) @ self._coupling @ self.phi(y).T

    def _solve(self, f: EdgeFunction):
        g = self.graph
        if f.graph != g:
            raise InvalidArgument("edge function belongs to a different graph")
        nE, nI = g.n_external, g.n_internal
        k = self.k
        fb = [_fwd_bwd(x, v, k) for x, v in zip(f.grids, f.values)]
        gvec = np.zeros(g.d, dtype=complex)
        for j in range(nE):
            gvec[j] = fb[j][1][0]
        for i in range(nI):
            gvec[nE + i] = fb[nE + i][1][0]
            gvec[nE + nI + i] = fb[nE + i][0][-1]
        coeff = (1j / (2 * k)) * (self._coupling @ gvec)
        return fb, gvec, coeff

    def apply(self, f: EdgeFunction) -> EdgeFunction:
        g = self.graph
        nE, nI = g.n_external, g.n_internal
        k = self.k
        fb, _, c = self._solve(f)
        out = []
        for j, x in enumerate(f.grids):
            u = (1j / (2 * k)) * (fb[j][0] + fb[j][1])
            if j < nE:
                u = u + c[j] * np.exp(1j * k * x)
            else:
                i = j - nE
                a = g.lengths[i]
                u = u + c[nE + i] * np.exp(1j * k * x) + c[nE + nI + i] * np.exp(1j * k * (a - x))
            out.append(u)
        return f.with_values(out)

    def traces(self, f: EdgeFunction) -> tuple[np.ndarray, np.ndarray]:
        """Trace vectors of R f evaluated from the kernel representation."""
        k = self.k
        _, gvec, c = self._solve(f)
        T = T_matrix(self.graph, k)
        I = np.eye(self.graph.d)
        return (1j / (2 * k)) * gvec + (I + T) @ c, 0.5 * gvec + 1j * k * (I - T) @ c


def greens_apply(kern: GreensKernel, f: EdgeFunction) -> EdgeFunction:
    return kern.apply(f)


def resolvent_quotient(bc: BoundaryConditions, graph: MetricGraph, k: complex, f: EdgeFunction) -> float:
    """||R(k^2) f|| / ||f||, a lower bound for the resolvent norm."""
    return GreensKernel(bc, graph, k).apply(f).norm() / f.norm()


def volterra_resolvent(f: EdgeFunction, k: complex) -> EdgeFunction:
    """Edgewise solution of -u'' - k^2 u = f with u(0) = u'(0) = 0.

    This is the resolvent for the totally degenerate interval conditions.
    """
    k = complex(k)
    if k == 0:
        raise ZeroK("k must be nonzero")
    out = []
    for x, v in zip(f.grids, f.values):
        # -int_0^x sin(k(x-y))/k f(y) dy
        out.append(-(exp_convolution(x, v, k) - exp_convolution(x, v, -k)) / (2j * k))
    return f.with_values(out)


# ---------------------------------------------------------------------------
# Spectral projection


def spectral_projection(
    bc: BoundaryConditions,
    graph: MetricGraph,
    center: complex,
    radius: float,
    f: EdgeFunction,
    n_quad: int = 64,
    max_quad: int = 4096,
    rtol: float = 1e-8,
) -> EdgeFunction:
    """Riesz projection  -(1/2 pi i) oint_{|z - center| = radius} R(z) f dz.

    The minus sign makes this the projector itself: R(z) = (-Laplacian - z)^{-1}
    has residue -P at an isolated eigenvalue.
    """
    if radius <= 0:
        raise InvalidArgument("radius must be positive")
    center = complex(center)

    def node_term(theta: float) -> EdgeFunction:
        z = center + radius * np.exp(1j * theta)
        k = sqrt_upper(z)
        try:
            Z = Z_matrix(bc, graph, k)
            s = sla.svdvals(Z)
            if s[-1] <= 1e-8 * s[0]:
                raise OnSpectrum("")
            kern = GreensKernel(bc, graph, k)
        except (OnSpectrum, ZeroK, InvalidArgument) as exc:
            raise ContourTooClose(f"contour passes too close to the spectrum at z = {z}") from exc
        return kern.apply(f) * np.exp(1j * theta)

    n = n_quad
    acc = node_term(0.0)
    for j in range(1, n):
        acc = acc + node_term(2 * math.pi * j / n)
    prev = acc * (-radius / n)
    fn = max(f.norm(), 1e-300)
    while n < max_quad:
        for j in range(n):
            acc = acc + node_term(2 * math.pi * (j + 0.5) / n)
        n *= 2
        cur = acc * (-radius / n)
        if (cur - prev).norm() < rtol * fn:
            return cur
        prev = cur
    raise NoConvergence(f"contour quadrature did not converge with {max_quad} nodes")


# ---------------------------------------------------------------------------
# Enclosures


def _sup_norm_S(bc: BoundaryConditions, t: float, xs: np.ndarray) -> float:
    best = 0.0
    for x in xs:
        try:
            best = max(best, sla.norm(cayley(bc, complex(x, t)), 2))
        except PoleOfCayley:
            return math.inf
    return best


def enclosure(bc: BoundaryConditions, graph: MetricGraph, cone_slope: float = 1.0) -> EnclosureRegion:
    """Region containing the point spectrum, from ||S(k) T(k)|| <= ||S(k)|| e^{-Im k a_min}.

    Where that bound is below 1/2, 1 - S T is invertible and k is no
    eigenvalue. On a star graph a_min = 1 is used (any positive value is
    admissible) and the threshold is kept above all Cayley poles.
    """
    bc.check_graph(graph)
    cls = classify(bc)
    if not cls.regular:
        raise IrregularPencil("enclosure needs regular boundary conditions")
    poles = cayley_poles(bc, qw=cls.qw)
    a = graph.a_min if graph.n_internal else 1.0
    t_lo = max([p.imag for p, _ in poles.finite_poles] + [0.0])
    step = 0.01 / a
    scale = 1.0 + (sla.norm(cls.qw.L, 2) if cls.qw.m else 0.0) + 1.0 / a
    xs = np.concatenate([-np.geomspace(1e-3, 1e4, 120) * scale, [0.0], np.geomspace(1e-3, 1e4, 120) * scale])

    if cls.quasi_sectorial:
        t = (math.floor(t_lo / step) + 1) * step
        for _ in range(100000):
            M = _sup_norm_S(bc, t, xs)
            if M * math.exp(-t * a) < 0.5:
                return EnclosureRegion("parabola", 1.0 / (4 * t * t), t * t, t)
            t += step
        raise NoConvergence("no threshold found for the parabola enclosure")

    # Polynomial bound ||S(k)|| <= alpha + beta |k|^g above the poles.
    g = poles.growth_order_at_infinity
    t0 = t_lo + step
    ys = t0 + np.concatenate([[0.0], np.geomspace(1e-2, 1e4, 60) * scale])
    ratio = 0.0
    for y in ys:
        for x in xs[::4]:
            k = complex(x, y)
            ratio = max(ratio, sla.norm(cayley(bc, k), 2) / (1 + abs(k) ** g))
    alpha = beta = ratio
    widen = math.sqrt(1 + 1 / cone_slope**2)
    taus = t0 + step * np.arange(0, 200000)
    hvals = (alpha + beta * (widen * taus) ** g) * np.exp(-taus * a)
    above = np.flatnonzero(hvals >= 0.5)
    c = float(taus[above[-1] + 1]) if above.size else float(taus[0])
    return EnclosureRegion("sector", c, float(cone_slope), c)


# ---------------------------------------------------------------------------
# Resolvent growth witnesses


def H_matrix(graph: MetricGraph, kappa: float) -> np.ndarray:
    """Gram-type matrix int Phi(y, i kappa)^T Phi(y, i kappa) dy."""
    d = graph.d
    nE, nI = graph.n_external, graph.n_internal
    H = np.zeros((d, d))
    H[:nE, :nE] = np.eye(nE) / (2 * kappa)
    if nI:
        a = graph.lengths
        diag = (1 - np.exp(-2 * kappa * a)) / (2 * kappa)
        off = a * np.exp(-kappa * a)
        i0 = np.arange(nE, nE + nI)
        ia = np.arange(nE + nI, nE + 2 * nI)
        H[i0, i0] = diag
        H[ia, ia] = diag
        H[i0, ia] = off
        H[ia, i0] = off
    return H


def exponential_witness(graph: MetricGraph, coeff: np.ndarray, kappa: float, h: float, radius: float) -> EdgeFunction:
    """Edge function Phi(x, i kappa) coeff."""
    nE, nI = graph.n_external, graph.n_internal

    def fn(j, x):
        if j < nE:
            return coeff[j] * np.exp(-kappa * x)
        i = j - nE
        a = graph.lengths[i]
        return coeff[nE + i] * np.exp(-kappa * x) + coeff[nE + nI + i] * np.exp(-kappa * (a - x))

    return EdgeFunction.sample(graph, fn, h=h, radius=radius)


@dataclass(frozen=True)
class NQSWitness:
    kappa: float
    quotient: float
    alpha: np.ndarray
    beta: np.ndarray
    v: np.ndarray
    leading_term: complex
    rayleigh: float  # ||R phi_alpha|| / ||phi_alpha||, an upper bound for the quotient


def resolvent_witness_nqs(
    bc: BoundaryConditions, graph: MetricGraph, kappa: float, h: float | None = None
) -> NQSWitness:
    """Lower bound |<R phi_a, phi_b>| / (||phi_a|| ||phi_b||) for ||R(-kappa^2)||."""
    bc.check_graph(graph)
    cls = classify(bc)
    if cls.tag is not BCTag.REGULAR_NON_QUASI_SECTORIAL:
        raise WrongClass(f"needs RegularNonQuasiSectorial conditions, got {cls.tag}")
    kappa = float(kappa)
    k = 1j * kappa
    qw = cls.qw
    try:
        S = cayley(bc, k)
    except PoleOfCayley as exc:
        raise KappaTooSmall(f"i*{kappa} is a Cayley pole") from exc
    if sla.norm(S @ T_matrix(graph, k), 2) >= 0.5:
        raise KappaTooSmall(f"||S T|| >= 1/2 at kappa = {kappa}")
    m, d = qw.m, qw.d
    N = qw.N_B
    K2 = kernel(N @ N, scale=max(sla.norm(N, 2) ** 2, 1.0))
    _, _, Vh = sla.svd(N @ K2.basis)
    vN = K2.basis @ Vh[0].conj()
    v = np.concatenate([np.zeros(m), vN])
    Nv = np.concatenate([np.zeros(m), N @ vN])
    H = H_matrix(graph, kappa)
    alpha = np.linalg.solve(H, np.linalg.solve(qw.G, v))
    beta = np.linalg.solve(H, qw.G.conj().T @ Nv)
    h = h or min(1e-3, 0.02 / kappa)
    radius = max(40.0 / kappa, 1.0)
    fa = exponential_witness(graph, alpha, kappa, h, radius)
    fb = exponential_witness(graph, beta, kappa, h, radius)
    u = GreensKernel(bc, graph, k).apply(fa)
    quotient = abs(u.inner(fb)) / (fa.norm() * fb.norm())
    lead = -(np.vdot(Nv, v + 2 * kappa * Nv)) / (2 * kappa)
    return NQSWitness(kappa, float(quotient), alpha, beta, v, complex(lead), u.norm() / fa.norm())


@dataclass(frozen=True)
class IrregularWitness:
    quotient: float
    everything_is_spectrum: bool
    witness: Optional[EdgeFunction] = None
    rhs: Optional[EdgeFunction] = None


def _psi_a(x: np.ndarray, k: complex, a: float) -> np.ndarray:
    return np.where(x <= a, (np.cos(k * (a - x)) - 1) / (k * k), 0.0)


def resolvent_witness_irregular(
    bc: BoundaryConditions, graph: MetricGraph, k: complex, h: float | None = None
) -> IrregularWitness:
    """||psi_v|| / ||phi_v|| with (-Laplacian - k^2) psi_v = phi_v, psi_v in the domain."""
    bc.check_graph(graph)
    k = complex(k)
    if k.imag <= 0:
        raise InvalidArgument("needs Im k > 0")
    cls = classify(bc)
    if cls.tag is not BCTag.IRREGULAR:
        raise WrongClass(f"needs Irregular conditions, got {cls.tag}")
    if graph.n_internal == 0:
        return IrregularWitness(math.inf, True)
    common = kernel(np.vstack([bc.A, bc.B]))
    if common.dim == 0:
        raise ScopeError("Ker A ∩ Ker B is trivial; the witness construction does not apply")
    v = common.basis[:, 0]
    a = graph.a_min / 2
    h = h or min(1e-3, a / 200)
    nE, nI = graph.n_external, graph.n_internal

    def build(profile):
        def fn(j, x):
            if j < nE:
                return v[j] * profile(x)
            i = j - nE
            L = graph.lengths[i]
            return v[nE + i] * profile(x) + v[nE + nI + i] * profile(L - x)

        return fn

    radius = max(2 * a, 1.0)
    psi = EdgeFunction.sample(graph, build(lambda x: _psi_a(x, k, a)), h=h, radius=radius)
    rhs = EdgeFunction.sample(graph, build(lambda x: (x <= a).astype(float)), h=h, radius=radius)
    # Both profiles live on [0, a]; their pieces on different slots do not
    # overlap, so the norms reduce to one-dimensional integrals.
    xg = uniform_grid(a, h)
    n_psi = math.sqrt(simpson(np.abs(_psi_a(xg, k, a)) ** 2, x=xg))
    n_phi = math.sqrt(a)
    return IrregularWitness(n_psi / n_phi, False, psi, rhs)
