import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_complex, random_self_adjoint
from qgraph import boundary as bd
from qgraph.boundary import BoundaryConditions
from qgraph.classify import Obstruction, ReportOptions, generator_verdict, report, similarity_verdict_star
from qgraph.cli import load_schema
from qgraph.errors import NotAStarGraph
from qgraph.graph import MetricGraph

TAU = np.pi / 4


def in_similarity_region(z: complex, tol: float = 1e-9) -> bool:
    return z.real > 0 or (abs(z.imag) <= tol and z.real <= 0)


@pytest.mark.parametrize(
    "bc, expected",
    [(bd.pt_point(TAU), True), (bd.intermediate(), False), (bd.dirichlet(2), True), (bd.totally_degenerate(), False)],
)
def test_generator_verdict(bc, expected):
    v = generator_verdict(bc)
    assert v.generates_c0_semigroup == v.generates_analytic_semigroup == v.generates_cosine_family == expected


@given(st.integers(0, 2**31 - 1))
def test_generator_verdict_invariant_under_equivalence(seed):
    rng = np.random.default_rng(seed)
    A = random_complex(rng, 3, 3)
    B = random_complex(rng, 3, 1) @ random_complex(rng, 1, 3)
    bc = BoundaryConditions(A, B)
    C = random_complex(rng, 3, 3) + 3 * np.eye(3)
    assert generator_verdict(bc).generates_c0_semigroup == generator_verdict(bc.transformed(C)).generates_c0_semigroup


@pytest.mark.parametrize("gamma, expected", [(1 + 2j, True), (2j, False), (-3.0, True), (-1.0, True), (-1 + 0.5j, False)])
def test_similarity_complex_delta(gamma, expected):
    v = similarity_verdict_star(bd.delta_star(3, gamma), MetricGraph.star(3))
    assert v.is_similar_to_selfadjoint is expected
    if expected:
        assert v.obstruction is Obstruction.NONE
    else:
        assert v.obstruction is Obstruction.EIGENVALUE_IN_FORBIDDEN_REGION


@pytest.mark.parametrize("gamma", [1 + 2j, 2j, -3.0, 1.0, -1 + 1j, 0.5 - 2j])
def test_similarity_complex_delta_prime(gamma):
    v = similarity_verdict_star(bd.delta_prime_star(3, gamma), MetricGraph.star(3))
    assert v.is_similar_to_selfadjoint is in_similarity_region(complex(gamma))


@pytest.mark.parametrize("s", [1.0, -2.0, 0.0, 1j, -1 + 1j, 1 + 1j, -0.5 - 3j])
def test_similarity_kuzhel_delta_prime(s):
    v = similarity_verdict_star(bd.kuzhel_delta_prime(s), MetricGraph.star(2))
    s = complex(s)
    assert v.is_similar_to_selfadjoint is (s.real < 0 or (s.imag == 0 and s.real >= 0))


@pytest.mark.parametrize("tau", [0.1, TAU, 1.4])
def test_similarity_pt(tau):
    assert similarity_verdict_star(bd.pt_point(tau)).is_similar_to_selfadjoint


def test_similarity_obstructions():
    v = similarity_verdict_star(bd.intermediate())
    assert not v.is_similar_to_selfadjoint and v.obstruction is Obstruction.NOT_QUASI_SECTORIAL
    # L with a Jordan block at 0 on the half axis: A = L, B = I
    L = np.array([[0, 1], [0, 0]])
    v = similarity_verdict_star(BoundaryConditions(L, np.eye(2)))
    assert v.obstruction is Obstruction.CYCLIC_VECTOR_ON_HALF_AXIS
    with pytest.raises(NotAStarGraph):
        similarity_verdict_star(bd.dirichlet(2), MetricGraph.interval())


@given(st.integers(0, 2**31 - 1))
def test_similarity_implies_generation(seed):
    rng = np.random.default_rng(seed)
    bc = BoundaryConditions(random_complex(rng, 2, 2), np.eye(2))
    if similarity_verdict_star(bc).is_similar_to_selfadjoint:
        assert generator_verdict(bc).generates_c0_semigroup


@given(st.integers(0, 2**31 - 1))
def test_self_adjoint_always_similar(seed):
    rng = np.random.default_rng(seed)
    assert similarity_verdict_star(random_self_adjoint(rng, 3)).is_similar_to_selfadjoint


def test_similar_star_has_real_eigenvalues():
    from qgraph.spectral import star_point_spectrum

    for gamma in (-3.0, -1.0, 2 + 1j):
        bc = bd.delta_star(3, gamma)
        assert similarity_verdict_star(bc).is_similar_to_selfadjoint
        for e in star_point_spectrum(bc).point_spectrum:
            assert abs(e.lam.imag) <= 1e-8 * (1 + abs(e.lam))


# -- report --------------------------------------------------------------------

schema = load_schema("report")


def test_report_pt_star():
    doc = report(bd.pt_point(TAU), MetricGraph.star(2))
    jsonschema.validate(doc, schema)
    assert doc["class"] == "QuasiSectorial"
    assert doc["generator"]["c0_semigroup"]
    assert doc["similarity"]["similar"]


def test_report_broken_symmetry(half_line_plus_edge):
    opts = ReportOptions(spectrum_region=(0.1, 10, -1, 1))
    doc = report(bd.broken_symmetry(np.pi / 3), half_line_plus_edge, opts)
    jsonschema.validate(doc, schema)
    assert doc["generator"]["c0_semigroup"]
    assert doc["similarity"]["applicable"] is False
    assert doc["similarity"]["necessary_condition_only"]
    assert doc["spectrum"]["nonreal_eigenvalues_found"]
    assert doc["similarity"]["necessary_condition_violated"]


@pytest.mark.parametrize("graph", [MetricGraph.interval(), MetricGraph.star(3), MetricGraph.pumpkin(2)])
def test_report_dirichlet_all_green(graph):
    opts = ReportOptions(spectrum_region=(0.1, 10, -1, 1))
    doc = report(bd.dirichlet(graph.d), graph, opts)
    jsonschema.validate(doc, schema)
    assert doc["class"] == "SelfAdjoint"
    assert all(doc["generator"].values())
    assert doc["cayley"]["is_uniformly_bounded"]
    assert "error" not in doc["enclosure"]
    assert "error" not in doc["spectrum"]


def test_report_keeps_going_on_irregular(interval):
    doc = report(bd.totally_degenerate(), interval, ReportOptions(spectrum_region=(0.1, 5, -1, 1)))
    jsonschema.validate(doc, schema)
    assert doc["class"] == "Irregular"
    assert doc["cayley"]["error"] == "IrregularPencil"
    assert doc["enclosure"]["error"] == "IrregularPencil"
    assert doc["spectrum"]["error"] == "IrregularPencil"
