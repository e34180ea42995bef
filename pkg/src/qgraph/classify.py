"""Well-posedness and similarity verdicts, plus the aggregated report."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .boundary import BCClass, BoundaryConditions, cayley_poles, classify
from .errors import NotAStarGraph, QGraphError
from .graph import MetricGraph
from .matrixcore import jordan_chain_length


@dataclass(frozen=True)
class GeneratorVerdict:
    """Heat, wave and Schrodinger-type well-posedness all coincide."""

    generates_c0_semigroup: bool
    generates_analytic_semigroup: bool
    generates_cosine_family: bool
    reason: BCClass


def generator_verdict(bc: BoundaryConditions, tol: float = 1e-10) -> GeneratorVerdict:
    cls = classify(bc, tol)
    ok = cls.quasi_sectorial
    return GeneratorVerdict(ok, ok, ok, cls)


class Obstruction(enum.Enum):
    NONE = "None"
    NOT_QUASI_SECTORIAL = "NotQuasiSectorial"
    EIGENVALUE_IN_FORBIDDEN_REGION = "EigenvalueInForbiddenRegion"
    CYCLIC_VECTOR_ON_HALF_AXIS = "CyclicVectorOnHalfAxis"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SimilarityVerdict:
    is_similar_to_selfadjoint: bool
    obstruction: Obstruction = Obstruction.NONE
    eigenvalue: Optional[complex] = None  # the offending eigenvalue of L, if any


def similarity_verdict_star(
    bc: BoundaryConditions, graph: MetricGraph | None = None, tol: float = 1e-9
) -> SimilarityVerdict:
    """Similarity of -Laplacian(A,B) on a star graph to a self-adjoint operator.

    Needs quasi-sectorial conditions with sigma(L) inside {Re < 0} ∪ [0, inf)
    and semisimple eigenvalues on [0, inf). Points within ``tol`` of the
    imaginary axis but off the real axis are rejected.
    """
    if graph is not None:
        if graph.n_internal:
            raise NotAStarGraph("similarity criterion only covers graphs without internal edges")
        bc.check_graph(graph)
    cls = classify(bc)
    if not cls.quasi_sectorial:
        return SimilarityVerdict(False, Obstruction.NOT_QUASI_SECTORIAL)
    qw = cls.qw
    for lam, _ in qw.eigenvalues_L():
        on_half_axis = abs(lam.imag) <= tol * (1 + abs(lam)) and lam.real >= -tol
        if on_half_axis:
            if jordan_chain_length(qw.L, lam) > 1:
                return SimilarityVerdict(False, Obstruction.CYCLIC_VECTOR_ON_HALF_AXIS, lam)
        elif not lam.real < -tol:
            return SimilarityVerdict(False, Obstruction.EIGENVALUE_IN_FORBIDDEN_REGION, lam)
    return SimilarityVerdict(True)


# ---------------------------------------------------------------------------
# Report


def cnum(z: complex) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass
class ReportOptions:
    spectrum_region: Optional[tuple[float, float, float, float]] = None
    tol: float = 1e-10
    extra: dict = field(default_factory=dict)


def _section(fn) -> dict:
    try:
        return fn()
    except QGraphError as exc:
        return {"error": type(exc).__name__, "message": str(exc)}
    except (np.linalg.LinAlgError, ValueError) as exc:
        return {"error": type(exc).__name__, "message": str(exc)}


def eigen_rows(report) -> list[dict]:
    return [
        {"k": cnum(e.k), "lambda": cnum(e.lam), "multiplicity": e.multiplicity, "physical": e.physical}
        for e in report.point_spectrum
    ]


def report(bc: BoundaryConditions, graph: MetricGraph, options: ReportOptions | None = None) -> dict[str, Any]:
    """All analyses in one JSON-ready document; failures stay local to a section."""
    from .spectral import compact_spectrum, enclosure, star_point_spectrum

    opts = options or ReportOptions()
    bc.check_graph(graph)
    cls = classify(bc, opts.tol)
    doc: dict[str, Any] = {
        "d": bc.d,
        "graph": {"internal_edges": graph.n_internal, "external_edges": graph.n_external},
        "class": str(cls.tag),
    }
    if cls.qw is not None:
        doc["quasi_weierstrass"] = {
            "m": cls.qw.m,
            "sigma_L": [{"value": cnum(l), "multiplicity": n} for l, n in cls.qw.eigenvalues_L()],
            "nilpotency_index": cls.qw.nilpotency_index,
        }

    def poles():
        rep = cayley_poles(bc, qw=cls.qw)
        return {
            "finite_poles": [{"k": cnum(k), "order": o} for k, o in rep.finite_poles],
            "growth_order_at_infinity": rep.growth_order_at_infinity,
            "is_uniformly_bounded": rep.is_uniformly_bounded,
        }

    doc["cayley"] = _section(poles) if cls.regular else {"error": "IrregularPencil", "message": str(cls.tag)}
    gv = generator_verdict(bc, opts.tol)
    doc["generator"] = {
        "c0_semigroup": gv.generates_c0_semigroup,
        "analytic_semigroup": gv.generates_analytic_semigroup,
        "cosine_family": gv.generates_cosine_family,
    }

    def enc():
        e = enclosure(bc, graph)
        return {"kind": e.kind, "c": e.c, "C": e.C, "threshold": e.threshold}

    doc["enclosure"] = _section(enc)

    spec_doc: dict[str, Any] | None = None
    nonreal = False
    if graph.n_internal == 0:

        def star():
            rep = star_point_spectrum(bc, graph)
            return {"whole_plane": rep.whole_plane, "essential": [0.0, "inf"], "eigenvalues": eigen_rows(rep)}

        spec_doc = _section(star)
    elif opts.spectrum_region is not None:

        def comp():
            rep = compact_spectrum(bc, graph, opts.spectrum_region)
            out = {
                "region": list(rep.search_region),
                "total_winding": rep.total_winding,
                "eigenvalues": eigen_rows(rep),
                "resonances": [{"k": cnum(e.k), "multiplicity": e.multiplicity} for e in rep.resonances],
            }
            if rep.essential:
                out["essential"] = [0.0, "inf"]
            return out

        spec_doc = _section(comp)
    if spec_doc is not None:
        rows = spec_doc.get("eigenvalues", [])
        nonreal = any(abs(r["lambda"]["im"]) > 1e-8 * (1 + abs(complex(r["lambda"]["re"], r["lambda"]["im"]))) for r in rows)
        spec_doc["nonreal_eigenvalues_found"] = nonreal
        doc["spectrum"] = spec_doc

    if graph.n_internal == 0:

        def sim():
            v = similarity_verdict_star(bc, graph)
            out = {"applicable": True, "similar": v.is_similar_to_selfadjoint, "obstruction": str(v.obstruction)}
            if v.eigenvalue is not None:
                out["eigenvalue"] = cnum(v.eigenvalue)
            return out

        doc["similarity"] = _section(sim)
    else:
        doc["similarity"] = {
            "applicable": False,
            "reason": "graph has internal edges",
            "necessary_condition_only": True,
            "necessary_condition_violated": nonreal,
        }
    return doc
