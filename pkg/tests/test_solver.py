import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgvertex.couplings import build_s_from_t, recover_t_from_s, unitary_residual
from qgvertex.errors import InvalidInputError, ResonanceError
from qgvertex.families import KappaFamilySpec, build_family
from qgvertex.realization import compile_coupling
from qgvertex.solver import (
    MetricGraph,
    convergence_study,
    halving_schedule,
    scatter,
    scatter_retry,
)

wavenumbers = st.floats(0.05, 20.0)


def triangle(chi=(0.0, 0.0, 0.0), v=(0.3, -0.7, 1.1)):
    edges = [(0, 1, 1.0, chi[0]), (1, 2, 0.7, chi[1]), (2, 0, 1.3, chi[2])]
    return MetricGraph(strengths=v, edges=edges, leads=(0, 1, 2))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_free_vertex_is_kirchhoff(n):
    g = MetricGraph(strengths=(0.0,), edges=(), leads=(0,) * n)
    s = scatter(g, 1.3)
    np.testing.assert_allclose(s, 2.0 / n * np.ones((n, n)) - np.eye(n), atol=1e-13)


@given(wavenumbers, st.floats(-10, 10))
def test_delta_vertex_with_two_leads(k, v):
    s = scatter(MetricGraph(strengths=(v,), edges=(), leads=(0, 0)), k)
    t = 2j * k / (2j * k - v)
    r = v / (2j * k - v)
    np.testing.assert_allclose(s, [[r, t], [t, r]], atol=1e-12)
    assert abs(abs(r) ** 2 + abs(t) ** 2 - 1.0) <= 1e-12


@given(wavenumbers, st.tuples(*[st.floats(-np.pi, np.pi)] * 3))
def test_scattering_is_unitary(k, chi):
    try:
        s = scatter(triangle(chi), k)
    except ResonanceError:
        return
    assert unitary_residual(s) <= 1e-10


@given(wavenumbers)
def test_zero_flux_gives_symmetric_matrix(k):
    try:
        s = scatter(triangle(), k)
    except ResonanceError:
        return
    assert np.max(np.abs(s - s.T)) <= 1e-10


@given(wavenumbers, st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_gauge_transformation_keeps_probabilities(k, a, b):
    # Vertex gauge phases theta = (0, a, b) shift edge i->j by theta_j - theta_i.
    theta = (0.0, a, b)
    chi = (0.4, -1.0, 2.0)
    g0 = triangle(chi)
    g1 = MetricGraph(
        strengths=g0.strengths,
        edges=[(i, j, length, c + theta[j] - theta[i]) for i, j, length, c in g0.edges],
        leads=g0.leads,
    )
    try:
        s0, s1 = scatter(g0, k), scatter(g1, k)
    except ResonanceError:
        return
    assert np.max(np.abs(np.abs(s0) ** 2 - np.abs(s1) ** 2)) <= 1e-10


def test_flux_breaks_reciprocity():
    s = scatter(triangle((0.4, -1.0, 2.0)), 1.1)
    assert np.max(np.abs(np.abs(s) - np.abs(s.T))) > 1e-3


def test_resonance_is_detected_and_retried():
    # Two parallel edges of length pi between lead-free vertices carry the
    # antisymmetric bound state sin(kx) at k = 1, which vanishes at both ends.
    g =MetricGraph(strengths=(0.0, 0.0, 0.0), edges=[(0, 1, 1.0, 0.0), (1, 2, np.pi, 0.0), (2, 1, np.pi, 0.0)],
                    leads=(0,))
    with pytest.raises(ResonanceError):
        scatter(g, 1.0)
    s, k_used = scatter_retry(g, 1.0)
    assert k_used != 1.0 and unitary_residual(s) <= 1e-6


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(strengths=(0.0,), edges=[(0, 1, 1.0, 0.0)], leads=(0,)),
        dict(strengths=(0.0, 0.0), edges=[(0, 0, 1.0, 0.0)], leads=(0,)),
        dict(strengths=(0.0, 0.0), edges=[(0, 1, 0.0, 0.0)], leads=(0,)),
        dict(strengths=(0.0,), edges=[], leads=()),
        dict(strengths=(0.0,), edges=[], leads=(3,)),
    ],
)
def test_invalid_graphs_raise(kwargs):
    with pytest.raises(InvalidInputError):
        MetricGraph(**kwargs)


def test_non_positive_wavenumber_raises():
    with pytest.raises(InvalidInputError):
        scatter(triangle(), 0.0)


def test_graph_json_round_trip():
    g = triangle((0.1, 0.2, 0.3))
    assert MetricGraph.from_dict(g.to_dict()) == g
    with pytest.raises(InvalidInputError):
        MetricGraph.from_dict({"edges": []})


@pytest.mark.parametrize("n,kappas", [(3, None), (5, [1.0, 0.5 + 0.5j]), (6, [0.8 - 0.3j, 1.2]), (8, None), (9, None)])
def test_blueprints_converge_to_target(n, kappas):
    c, _ = recover_t_from_s(build_family(KappaFamilySpec.default(n, kappas=kappas)))
    study = convergence_study(c, 1.0, halving_schedule(0.1, 5))
    assert study.tail_decreasing(3)
    assert study.errors[-1] < 0.05
    assert np.max(study.unitarity) <= 1e-10
    # first order in d: halving d roughly halves the error
    ratios = study.errors[:-1] / study.errors[1:]
    assert np.all((ratios > 1.6) & (ratios < 2.4))


def test_blueprint_graph_maps_edges_and_leads():
    c, _ = recover_t_from_s(build_family(KappaFamilySpec.default(7)))
    g = MetricGraph.from_blueprint(compile_coupling(c, d=0.01))
    assert len(g.edges) == 10 and g.leads == tuple(range(7))
    target = build_s_from_t(c).entries
    assert np.max(np.abs(scatter(g, 1.0) - target)) < 0.05


def test_convergence_study_validates_and_tabulates():
    c, _ = recover_t_from_s(build_family(KappaFamilySpec.default(3)))
    with pytest.raises(InvalidInputError):
        convergence_study(c, 1.0, [0.1, 0.2])
    study = convergence_study(c, 1.0, [0.1, 0.05], workers=2)
    assert len(study.rows()) == 2 and len(study.rows()[0]) == 4
