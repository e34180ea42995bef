"""Finite metric graphs, trace vectors and sampled edge functions.

Trace-vector layout (length d = |E| + 2|I|): all external edges at 0, then
all internal edges at 0, then all internal edges at their far end. The
derivative slot of an internal edge at x = a_i carries -psi'(a_i), so every
derivative slot is an outward-pointing-into-the-edge derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

import numpy as np
from scipy.integrate import simpson

from .errors import GraphError, GridError

DEFAULT_H = 1e-3


@dataclass(frozen=True)
class InternalEdge:
    id: Hashable
    initial: Hashable
    terminal: Hashable
    length: float


@dataclass(frozen=True)
class ExternalEdge:
    id: Hashable
    initial: Hashable


@dataclass(frozen=True)
class TraceSlot:
    edge: Hashable
    endpoint: str  # "initial" or "terminal"
    vertex: Hashable


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple
    internal_edges: tuple[InternalEdge, ...] = ()
    external_edges: tuple[ExternalEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "internal_edges", tuple(self.internal_edges))
        object.__setattr__(self, "external_edges", tuple(self.external_edges))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        ids = [e.id for e in self.external_edges] + [e.id for e in self.internal_edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge ids")
        for e in self.internal_edges:
            a = float(e.length)
            if not (math.isfinite(a) and a > 0):
                raise GraphError(f"edge {e.id!r}: length must be positive and finite, got {e.length!r}")
            for v in (e.initial, e.terminal):
                if v not in vs:
                    raise GraphError(f"edge {e.id!r} references unknown vertex {v!r}")
        for e in self.external_edges:
            if e.initial not in vs:
                raise GraphError(f"edge {e.id!r} references unknown vertex {e.initial!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def interval(cls, length: float = 1.0) -> "MetricGraph":
        return cls((0, 1), (InternalEdge("e0", 0, 1, float(length)),))

    @classmethod
    def star(cls, n: int) -> "MetricGraph":
        return cls((0,), (), tuple(ExternalEdge(f"x{j}", 0) for j in range(n)))

    @classmethod
    def pumpkin(cls, n: int, length: float = 1.0) -> "MetricGraph":
        """n parallel edges of equal length between two vertices."""
        return cls((0, 1), tuple(InternalEdge(f"e{j}", 0, 1, float(length)) for j in range(n)))

    @classmethod
    def from_dict(cls, data: dict) -> "MetricGraph":
        try:
            vertices = tuple(data["vertices"])
            internal = tuple(
                InternalEdge(e["id"], e["initial"], e["terminal"], float(e["length"]))
                for e in data.get("internal_edges", [])
            )
            external = tuple(ExternalEdge(e["id"], e["initial"]) for e in data.get("external_edges", []))
        except KeyError as exc:
            raise GraphError(f"graph description is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph description: {exc}") from None
        return cls(vertices, internal, external)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "internal_edges": [
                {"id": e.id, "initial": e.initial, "terminal": e.terminal, "length": e.length}
                for e in self.internal_edges
            ],
            "external_edges": [{"id": e.id, "initial": e.initial} for e in self.external_edges],
        }

    # -- derived quantities -------------------------------------------------

    @property
    def n_internal(self) -> int:
        return len(self.internal_edges)

    @property
    def n_external(self) -> int:
        return len(self.external_edges)

    @property
    def n_edges(self) -> int:
        return self.n_internal + self.n_external

    @property
    def d(self) -> int:
        return self.n_external + 2 * self.n_internal

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.internal_edges], dtype=float)

    @property
    def a_min(self) -> float:
        """Shortest internal edge; +inf when there are none."""
        return float(self.lengths.min()) if self.n_internal else math.inf

    @property
    def is_compact(self) -> bool:
        return self.n_external == 0

    @property
    def has_internal_edges(self) -> bool:
        return self.n_internal > 0

    def default_radius(self) -> float:
        return 10.0 * max(float(self.lengths.max()) if self.n_internal else 1.0, 1.0)

    def trace_index(self) -> tuple[TraceSlot, ...]:
        slots = [TraceSlot(e.id, "initial", e.initial) for e in self.external_edges]
        slots += [TraceSlot(e.id, "initial", e.initial) for e in self.internal_edges]
        slots += [TraceSlot(e.id, "terminal", e.terminal) for e in self.internal_edges]
        return tuple(slots)

    def vertex_slots(self) -> dict:
        """Trace slots incident to each vertex (vertices without edges omitted)."""
        groups: dict = {}
        for i, s in enumerate(self.trace_index()):
            groups.setdefault(s.vertex, []).append(i)
        return {v: groups[v] for v in self.vertices if v in groups}

    def edge_extents(self, radius: float | None = None) -> list[float]:
        """Edge lengths in EdgeFunction order (externals truncated at radius)."""
        R = self.default_radius() if radius is None else float(radius)
        return [R] * self.n_external + [float(a) for a in self.lengths]


def deficiency_index(g: MetricGraph) -> int:
    return g.d


# ---------------------------------------------------------------------------
# Edge functions


def uniform_grid(length: float, h: float) -> np.ndarray:
    """Uniform grid on [0, length] with an even number of cells (Simpson-ready)."""
    n = max(2, math.ceil(length / h - 1e-9))
    n += n % 2
    return np.linspace(0.0, length, n + 1)


@dataclass(frozen=True, eq=False)
class EdgeFunction:
    """Samples of a function on each edge, externals first then internals."""

    graph: MetricGraph
    grids: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]

    def __post_init__(self):
        grids = tuple(np.asarray(x, dtype=float) for x in self.grids)
        values = tuple(np.asarray(v, dtype=complex) for v in self.values)
        if len(grids) != self.graph.n_edges or len(values) != self.graph.n_edges:
            raise GridError("one grid and one value array per edge are required")
        for x, v in zip(grids, values):
            if x.ndim != 1 or x.shape != v.shape:
                raise GridError("grid and values must be matching 1-D arrays")
            if x.size < 2:
                raise GridError("each edge needs at least 2 samples")
            if np.any(np.diff(x) <= 0):
                raise GridError("grids must be strictly increasing")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(
        cls,
        graph: MetricGraph,
        func: Callable[[int, np.ndarray], np.ndarray] | None = None,
        h: float = DEFAULT_H,
        radius: float | None = None,
    ) -> "EdgeFunction":
        """Sample ``func(edge_index, x)`` on uniform grids (zero if func is None)."""
        grids = tuple(uniform_grid(L, h) for L in graph.edge_extents(radius))
        if func is None:
            vals = tuple(np.zeros_like(x, dtype=complex) for x in grids)
        else:
            vals = tuple(np.broadcast_to(np.asarray(func(j, x), dtype=complex), x.shape).copy()
                         for j, x in enumerate(grids))
        return cls(graph, grids, vals)

    def with_values(self, values: Iterable[np.ndarray]) -> "EdgeFunction":
        return EdgeFunction(self.graph, self.grids, tuple(values))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(x[1] - x[0]) for x in self.grids)

    def _check_compatible(self, other: "EdgeFunction"):
        if other.graph != self.graph or any(
            a.shape != b.shape or not np.array_equal(a, b) for a, b in zip(self.grids, other.grids)
        ):
            raise GridError("edge functions live on different grids")

    def __add__(self, other: "EdgeFunction") -> "EdgeFunction":
        self._check_compatible(other)
        return self.with_values(a + b for a, b in zip(self.values, other.values))

    def __sub__(self, other: "EdgeFunction") -> "EdgeFunction":
        self._check_compatible(other)
        return self.with_values(a - b for a, b in zip(self.values, other.values))

    def __mul__(self, c: complex) -> "EdgeFunction":
        return self.with_values(c * v for v in self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "EdgeFunction":
        return self * -1

    def inner(self, other: "EdgeFunction") -> complex:
        """<self, other> = sum over edges of  int self * conj(other)."""
        self._check_compatible(other)
        return complex(sum(simpson(a * np.conj(b), x=x) for x, a, b in zip(self.grids, self.values, other.values)))

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(v)) for v in self.values))


def _endpoint_weights(x: np.ndarray, npts: int) -> np.ndarray:
    """Finite-difference weights for f'(x[0]) using x[0..npts-1]."""
    dx = x[:npts] - x[0]
    V = np.vander(dx, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def endpoint_derivatives(x: np.ndarray, v: np.ndarray, order: int = 2) -> tuple[complex, complex]:
    """One-sided derivatives f'(x_0) and f'(x_end) of accuracy O(h^order)."""
    npts = order + 1
    if x.size < npts:
        raise GridError(f"need at least {npts} samples per edge for order-{order} endpoint derivatives")
    w0 = _endpoint_weights(x, npts)
    wend = _endpoint_weights(x[::-1], npts)
    return complex(w0 @ v[:npts]), complex(wend @ v[::-1][:npts])


def trace(g: MetricGraph, f: EdgeFunction, order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Trace vectors (values, signed derivatives) of ``f`` in TraceIndex order."""
    if f.graph != g:
        raise GridError("edge function belongs to a different graph")
    nE, nI = g.n_external, g.n_internal
    val = np.zeros(g.d, dtype=complex)
    der = np.zeros(g.d, dtype=complex)
    for j in range(nE + nI):
        x, v = f.grids[j], f.values[j]
        d0, d1 = endpoint_derivatives(x, v, order)
        val[j] = v[0]
        der[j] = d0
        if j >= nE:
            i = j - nE
            val[nE + nI + i] = v[-1]
            der[nE + nI + i] = -d1
    return val, der


def edge_slices(g: MetricGraph) -> tuple[slice, slice, slice]:
    """Trace-vector slices: externals, internals at 0, internals at a."""
    nE, nI = g.n_external, g.n_internal
    return slice(0, nE), slice(nE, nE + nI), slice(nE + nI, nE + 2 * nI)

