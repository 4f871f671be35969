import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgvertex.couplings import VertexCoupling, random_coupling, recover_t_from_s
from qgvertex.errors import InvalidInputError
from qgvertex.families import KappaFamilySpec, build_family
from qgvertex.realization import (
    RealizationBlueprint,
    bipartite_strengths,
    build_q,
    compile_coupling,
    export_dot,
)

R2 = 1.0 / np.sqrt(2.0)


def family_coupling(n, kappas=None):
    c, perm = recover_t_from_s(build_family(KappaFamilySpec.default(n, kappas=kappas)))
    assert perm.tolist() == list(range(n))
    return c


def connected_pairs(b):
    return {(i + 1, j + 1): length for i, j, length, _ in b.edges()}


def test_q_of_single_edge_pair():
    np.testing.assert_allclose(build_q(VertexCoupling(2, 1, [[1.0]])), [[-1, 1], [-1, 1]])


def test_q_of_unitary_t():
    c = family_coupling(8)
    q = build_q(c)
    np.testing.assert_allclose(q[:4, :4], -np.eye(4), atol=1e-14)
    np.testing.assert_allclose(q[:4, 4:], c.t, atol=1e-15)
    np.testing.assert_allclose(q[4:, :4], -c.t.conj().T, atol=1e-15)


@given(st.integers(2, 9), st.integers(0, 2**32 - 1), st.floats(1e-3, 10.0))
def test_read_back_of_ratios_and_phases(n, seed, d):
    c = random_coupling(np.random.default_rng(seed), n)
    b = compile_coupling(c, d=d)
    q = build_q(c)
    iu = np.triu_indices(n, 1)
    back = b.ratios * np.exp(1j * b.phases)
    assert np.max(np.abs(back[iu] - q[iu])) <= 1e-12
    assert np.array_equal(b.phases, -b.phases.T)
    for i, j, length, chi in b.edges():
        assert abs(length - d / b.ratios[i, j]) <= 1e-12 * length
    r = np.abs(q)
    np.testing.assert_allclose(b.strengths, np.diag((2 * np.eye(n) - np.ones((n, n))) @ r) / d, atol=1e-12)


def test_n7_blueprint_matches_worked_example():
    b = compile_coupling(family_coupling(7), d=1.0)
    pairs = {k: 1.0 / v for k, v in connected_pairs(b).items()}
    assert len(pairs) == 10
    for key, ratio in pairs.items():
        expected = R2 if key in {(1, 6), (1, 7)} else 0.5
        assert abs(ratio - expected) <= 1e-12, key
    expected_v = [1 - np.sqrt(2), -1, -1, 0, 0, -R2, -R2]
    assert np.max(np.abs(b.strengths - expected_v)) <= 1e-12
    assert b.is_bipartite()


def test_n8_blueprint_matches_worked_example():
    b = compile_coupling(family_coupling(8), d=1.0)
    pairs = {k: 1.0 / v for k, v in connected_pairs(b).items()}
    for key, ratio in pairs.items():
        expected = R2 if key in {(1, 7), (1, 8), (4, 5), (4, 6)} else 0.5
        assert abs(ratio - expected) <= 1e-12, key
    expected_v = [1 - np.sqrt(2), -1, -1, 1 - np.sqrt(2), -R2, -R2, -R2, -R2]
    assert np.max(np.abs(b.strengths - expected_v)) <= 1e-12
    assert b.is_bipartite()


def test_frustrated_edges_carry_phase_pi():
    b = compile_coupling(family_coupling(7))
    chis = sorted({round(abs(chi), 12) for *_, chi in b.edges()})
    assert chis == [0.0, round(np.pi, 12)]


@pytest.mark.parametrize("n", [6, 7, 8, 10, 11, 12])
def test_bipartite_sums_equal_general_strengths_for_co_isometries(n):
    c = family_coupling(n)
    assert np.max(np.abs(c.t @ c.t.conj().T - np.eye(c.m))) <= 1e-12
    b = compile_coupling(c, d=0.5)
    assert b.is_bipartite()
    assert np.max(np.abs(b.strengths - bipartite_strengths(c.t, d=0.5))) <= 1e-12


@pytest.mark.parametrize("n", [5, 9])
def test_4p_plus_1_family_is_an_isometry_not_a_co_isometry(n):
    c = family_coupling(n)
    assert c.m == (n + 1) // 2
    assert np.max(np.abs(c.t.conj().T @ c.t - np.eye(c.n - c.m))) <= 1e-12
    assert np.max(np.abs(c.t @ c.t.conj().T - np.eye(c.m))) > 0.4
    assert not compile_coupling(c).is_bipartite()


def test_scaling_keeps_ratios_and_rescales_strengths():
    b = compile_coupling(family_coupling(7), d=1.0)
    b2 = b.with_scale(0.01)
    assert np.array_equal(b2.ratios, b.ratios)
    np.testing.assert_allclose(b2.strengths, 100 * b.strengths)


def test_dot_export():
    b = compile_coupling(family_coupling(7))
    text = export_dot(b)
    assert text.count(" -- ") == 10
    assert sum(1 for line in text.splitlines() if "[label=\"" in line and " -- " not in line) == 7
    assert "cluster_left" in text and "cluster_right" in text
    assert text == export_dot(b)
    empty = RealizationBlueprint(n=3, d=1.0, ratios=np.zeros((3, 3)), phases=np.zeros((3, 3)), strengths=np.zeros(3))
    text = export_dot(empty)
    assert " -- " not in text and text.count("[label=") == 3


def test_n8_dot_has_four_plus_four_layout():
    text = export_dot(compile_coupling(family_coupling(8)))
    assert "cluster_left { rank=same; v1; v2; v3; v4; }" in text
    assert "cluster_right { rank=same; v5; v6; v7; v8; }" in text


def test_blueprint_json_round_trip_and_validation():
    b = compile_coupling(family_coupling(9), d=0.25)
    b2 = RealizationBlueprint.from_dict(b.to_dict())
    assert np.array_equal(b2.ratios, b.ratios) and np.array_equal(b2.strengths, b.strengths)
    assert sorted(b.to_dict()) == ["d", "n", "phases", "ratios", "strengths"]
    with pytest.raises(InvalidInputError):
        compile_coupling(family_coupling(7), d=0.0)
    with pytest.raises(InvalidInputError):
        RealizationBlueprint(n=2, d=1.0, ratios=[[0, 1], [0, 0]], phases=np.zeros((2, 2)), strengths=[0, 0])
    with pytest.raises(InvalidInputError):
        RealizationBlueprint.from_dict({"n": 2})
