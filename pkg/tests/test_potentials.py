import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgvertex.couplings import build_s_from_t, random_coupling, recover_t_from_s, unitary_residual
from qgvertex.errors import InvalidInputError, ThresholdError
from qgvertex.families import KappaFamilySpec, build_a_block, build_family
from qgvertex.potentials import (
    ChannelPotentials,
    f1,
    f2,
    f2_printed,
    first_column_closed_form,
    first_column_printed,
    first_column_report,
    general_first_column,
    quartic_factors,
    s_with_potentials,
    sweep,
    sweep_matrix,
)

SQ2 = np.sqrt(2.0)
# |f1(2U)|^2 with t = 1/sqrt(2): ((sqrt2 - 1)/(sqrt2 + 1))^2 = (sqrt2 - 1)^4 = 17 - 12 sqrt2
F1SQ_AT_2U = 17.0 - 12.0 * SQ2

energies_off_threshold = st.floats(0.01, 20.0).filter(lambda e: abs(e - 1.0) > 1e-6)


def test_filter_functions_without_potential():
    assert f1(1.7, 0.0) == 0
    assert abs(f2(1.7, 0.0) - 1.0) <= 1e-15


def test_filter_spot_values_at_twice_the_potential():
    assert abs(abs(f1(2.0, 1.0)) ** 2 - F1SQ_AT_2U) <= 1e-14
    assert abs(abs(f1(2.0, 1.0)) ** 2 - 0.0294373) <= 1e-6
    assert abs(abs(f2(2.0, 1.0)) ** 2 - (1 - F1SQ_AT_2U)) <= 1e-14


@given(energies_off_threshold)
def test_filter_functions_conserve_probability(e):
    a, b = abs(f1(e, 1.0)) ** 2, abs(f2(e, 1.0)) ** 2
    if e < 1.0:
        assert abs(a - 1.0) <= 1e-12 and b == 0
    else:
        assert abs(a + b - 1.0) <= 1e-12


def test_square_root_numerator_violates_conservation():
    a, b = abs(f1(2.0, 1.0)) ** 2, abs(f2_printed(2.0, 1.0)) ** 2
    assert abs(a + b - 1.0) > 1e-2


def test_threshold_and_bad_energies_raise():
    for e, u in ((1.0, 1.0), (0.0, 1.0), (-1.0, 1.0)):
        with pytest.raises(InvalidInputError):
            f1(e, u)
    with pytest.raises(ThresholdError):
        ChannelPotentials([0.0, 1.0], 1.0)
    with pytest.raises(InvalidInputError):
        ChannelPotentials([0.0, 1.0], -2.0)


def test_quartic_factor_branch_for_closed_channels():
    q = quartic_factors([3.0], 1.0)[0]
    np.testing.assert_allclose(q, 2.0**0.25 * np.exp(1j * np.pi / 4), atol=1e-15)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_no_potential_returns_base_matrix(n, seed, e):
    c = random_coupling(np.random.default_rng(seed), n)
    s = s_with_potentials(c, ChannelPotentials(np.zeros(n), e)).entries
    assert np.max(np.abs(s - build_s_from_t(c).entries)) <= 1e-12


@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(0.05, 6.0))
def test_open_channel_block_is_unitary(n, seed, e):
    rng = np.random.default_rng(seed)
    c = random_coupling(rng, n)
    v = rng.uniform(0.0, 4.0, size=n)
    if np.any(np.abs(v - e) < 1e-6):
        return
    p = ChannelPotentials(v, e)
    s = s_with_potentials(c, p).entries
    o = p.open_mask
    if o.any():
        assert unitary_residual(s[np.ix_(o, o)]) <= 1e-10
    assert np.all(s[~o, :] == 0) and np.all(s[:, ~o] == 0)


def test_large_energy_limit_approaches_base_linearly():
    # The quartic factors are 1 - V/(4E) + ..., so the deviation is first order in V/E.
    c = random_coupling(np.random.default_rng(3), 5)
    v = np.array([1.0, 0.0, 0.5, 0.0, 1.0])
    base = build_s_from_t(c).entries
    dev = [np.max(np.abs(s_with_potentials(c, ChannelPotentials(v, e)).entries - base)) for e in (1e4, 1e6, 1e8)]
    assert dev[1] <= 1e-6
    assert dev[2] <= 1e-8
    assert 50 < dev[0] / dev[1] < 200 and 50 < dev[1] / dev[2] < 200


def test_continuity_under_grid_refinement():
    c = random_coupling(np.random.default_rng(5), 4)
    v = np.array([0.0, 1.0, 0.0, 0.0])
    jumps = []
    for h in (1e-2, 1e-3, 1e-4):
        res = sweep(c, v, np.arange(1.5, 1.5 + 10 * h, h))
        jumps.append(np.max(np.abs(np.diff(res.probabilities, axis=0))))
    assert jumps[0] > jumps[1] > jumps[2]
    assert jumps[2] < 1e-3


def test_even_family_matches_block_display():
    # Oracle: the block display with f2 carrying the fourth-root numerator.
    r, u, e = 3, 1.0, 2.0
    a = build_a_block(r, [1.0, 0.5 + 0.5j])
    s0 = np.block([[np.zeros((r, r)), a], [a.conj().T, np.zeros((r, r))]])
    c, perm = recover_t_from_s(s0)
    assert perm.tolist() == list(range(2 * r))
    v = np.zeros(2 * r)
    v[-1] = u
    s = s_with_potentials(c, ChannelPotentials(v, e)).entries
    ar = a[:, -1]
    expected = s0.copy()
    expected[:r, :r] = np.outer(ar, ar.conj()) * f1(e, u)
    expected[:r, -1] = ar * f2(e, u)
    expected[-1, :r] = ar.conj() * f2(e, u)
    expected[-1, -1] = -f1(e, u)
    assert np.max(np.abs(s - expected)) <= 1e-12
    assert abs(abs(s[-1, -1]) ** 2 - F1SQ_AT_2U) <= 1e-12


@pytest.mark.parametrize("e", [0.3, 2.0, 7.0])
def test_even_family_zeros_of_a_stay_zero(e):
    spec = KappaFamilySpec.default(8)
    base = build_family(spec).entries
    r = 4
    v = np.zeros(8)
    v[-1] = 1.0
    p = sweep_matrix(base, v, [e]).probabilities[0]
    a_zero = np.zeros((8, 8), dtype=bool)
    a_zero[:r, r:] = np.abs(base[:r, r:]) <= 1e-9
    a_zero[r:, :r] = a_zero[:r, r:].T
    assert a_zero.sum() == 8
    assert np.all(p[a_zero] <= 1e-24)


@pytest.mark.parametrize("n", [7, 9, 11])
def test_odd_family_first_column_zeros_stay_zero(n):
    # Rows 4..n-2 of the first column are zero before and after the potential;
    # rows 1-3 are zero only without it.
    base = build_family(KappaFamilySpec.default(n)).entries
    v = np.zeros(n)
    v[-1] = 1.0
    res = sweep_matrix(base, v, [0.4, 1.6, 5.0])
    zero_rows = np.zeros(n, dtype=bool)
    zero_rows[3 : n - 2] = True
    assert np.all(np.abs(base[zero_rows, 0]) <= 1e-9)
    assert np.all(res.probabilities[:, zero_rows, 0] <= 1e-24)


@pytest.mark.parametrize("n", [5, 7, 9])
def test_flat_band_below_threshold(n):
    spec = KappaFamilySpec.default(n)
    es = np.linspace(0.01, 0.99, 100)
    col = np.array([np.abs(general_first_column(spec, 1.0, e)) ** 2 for e in es])
    assert np.max(np.ptp(col, axis=0)) <= 1e-10
    expected = np.zeros(n)
    expected[[0, 1, 2, n - 2]] = (0.25, 0.125, 0.125, 0.5)
    np.testing.assert_allclose(col[0], expected, atol=1e-12)


def test_three_edge_star_is_not_flat():
    spec = KappaFamilySpec.default(3)
    p = np.array([np.abs(general_first_column(spec, 1.0, e)) ** 2 for e in (0.2, 0.8)])
    assert np.max(np.abs(p[0] - p[1])) > 1e-2


@given(st.integers(0, 3), energies_off_threshold,
       st.complex_numbers(min_magnitude=0.3, max_magnitude=3.0, allow_nan=False, allow_infinity=False))
def test_closed_form_column_matches_general_formula(idx, e, k1):
    n = (3, 5, 7, 9)[idx]
    q = (n - 1) // 2
    spec = KappaFamilySpec.default(n, kappas=[k1] + [1.0 - 0.5j] * (q - 1))
    gen = general_first_column(spec, 1.0, e)
    closed = first_column_closed_form(spec, 1.0, e)
    assert np.max(np.abs(np.abs(closed) - np.abs(gen))) <= 1e-10


def test_n3_closed_form_matches_with_phase():
    spec = KappaFamilySpec.default(3, kappas=[0.7 + 0.4j])
    for e in (0.5, 2.5):
        np.testing.assert_allclose(first_column_closed_form(spec, 1.0, e), general_first_column(spec, 1.0, e), atol=1e-12)


def test_printed_form_deviates_only_in_row_two():
    spec = KappaFamilySpec.default(7)
    rep = first_column_report(spec, 1.0, np.linspace(0.1, 3.0, 20))
    assert rep["printed_discrepant_rows"] == [2]
    assert rep["corrected_discrepant_rows"] == []
    printed = first_column_printed(spec, 1.0, 2.0)
    assert abs(np.sum(np.abs(printed) ** 2) - 1.0) > 1e-3


def test_closed_forms_need_odd_family():
    with pytest.raises(InvalidInputError):
        first_column_closed_form(KappaFamilySpec.default(6), 1.0, 2.0)


def test_sweep_columns_and_csv_layout():
    c = random_coupling(np.random.default_rng(9), 3)
    res = sweep(c, [0.0, 0.0, 1.0], [0.5, 2.0])
    sums = res.column_sums()
    assert np.isnan(sums[0, 2]) and not np.isnan(sums[1, 2])
    np.testing.assert_allclose(sums[~np.isnan(sums)], 1.0, atol=1e-12)
    assert res.header()[:3] == ["E", "open_mask", "P1_1"]
    assert res.to_rows()[0][1] == "110"
