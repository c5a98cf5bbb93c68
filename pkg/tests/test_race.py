import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egtbench.race import (
    SWEEP_COLUMNS,
    RacePayoffMatrix,
    RaceParams,
    Region,
    Strategy,
    analytic_region_ii,
    classify_region,
    fixation_matrix,
    fixation_probability,
    matrix_to_json,
    race_payoff_matrix,
    region_of,
    stationary_distribution,
    sweep_race,
    sweep_to_csv,
)

from oracles import birth_death_fixation

AS, AU, CS = Strategy.AS, Strategy.AU, Strategy.CS


# -- parameters and payoffs ------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [{"B": 0}, {"c": -1}, {"b": -1}, {"s": 0.9}, {"W": 0.5}, {"p_r": 1.1}, {"N": 1}, {"N": 2.5}, {"beta_sel": -1}],
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        RaceParams(**kw)


def test_params_dict_round_trip():
    p = RaceParams(s=2.5, p_r=0.3, N=50)
    assert RaceParams.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError, match="unknown"):
        RaceParams.from_dict({"speed": 2})


def test_from_omega():
    assert RaceParams.from_omega(0.75).W == pytest.approx(4.0)
    assert RaceParams.from_omega(0.0).W == 1.0
    with pytest.raises(ValueError):
        RaceParams.from_omega(1.0)


def test_payoff_example():
    pm = race_payoff_matrix(RaceParams(s=2, p_r=0.5, B=1, W=1, b=0, c=0))
    assert pm[AS, AS] == 0.5
    assert pm[AU, AU] == 0.5
    assert pm[AU, AS] == 1.0
    assert pm[AS, AU] == 0.0


def test_certain_disaster_zeroes_unsafe_payoffs():
    pm = race_payoff_matrix(RaceParams(s=2.5, p_r=1.0, W=3, b=0.2))
    assert pm[AU, AS] == pm[AU, AU] == 0.0
    # CS meets AU only in the first round safely, later rounds are unsafe and destroyed
    assert pm[AU, CS] == 0.0


def test_unit_speed_makes_unsafe_look_safe():
    pm = race_payoff_matrix(RaceParams(s=1, p_r=0, c=0, b=0, B=2, W=4))
    assert pm[AU, AU] == pm[AS, AS] == pytest.approx(2 / (2 * 4))


def test_safe_strategies_are_interchangeable_among_themselves():
    pm = race_payoff_matrix(RaceParams(s=2.2, p_r=0.4, W=3, c=0.01, b=0.1))
    safe = [AS, CS]
    vals = {pm[i, j] for i in safe for j in safe}
    assert len(vals) == 1
    assert pm[CS, CS] == pm[AS, AS]


def test_conditional_strategy_modes():
    p = RaceParams(s=2, p_r=0.3, W=4, c=0.01)
    opens = race_payoff_matrix(p)
    mirror = race_payoff_matrix(RaceParams(**{**p.to_dict(), "cs_opens_safe": False}))
    uu = opens[AU, AU]
    assert mirror[CS, AU] == mirror[AU, CS] == uu
    # one sucker round then unsafe parity
    assert opens[CS, AU] == pytest.approx((opens[AS, AU] + 3 * uu) / 4)
    assert opens[AU, CS] == pytest.approx((opens[AU, AS] + 3 * uu) / 4)
    # with a single round CS is indistinguishable from AS
    one = race_payoff_matrix(RaceParams(s=2, p_r=0.3, W=1))
    np.testing.assert_array_equal(one.values[CS], one.values[AS])


def test_matrix_shape_checked():
    with pytest.raises(ValueError):
        RacePayoffMatrix(np.zeros((2, 3)))


def test_matrix_json():
    doc = json.loads(matrix_to_json(race_payoff_matrix(RaceParams())))
    assert doc["strategies"] == ["AS", "AU", "CS"]
    assert np.array(doc["payoffs"]).shape == (3, 3)


# -- fixation --------------------------------------------------------------


def random_matrix(seed):
    return RacePayoffMatrix(np.random.default_rng(seed).standard_normal((3, 3)))


@pytest.mark.parametrize("N", [2, 5, 100])
def test_neutral_fixation_is_exact(N):
    pm = random_matrix(0)
    for i, j in itertools.permutations(Strategy, 2):
        assert fixation_probability(pm, i, j, N, 0.0) == 1.0 / N


def test_identical_payoffs_are_neutral():
    pm = RacePayoffMatrix(np.full((3, 3), 0.7))
    for beta in (0.5, 3.0):
        assert fixation_probability(pm, AS, AU, 10, beta) == pytest.approx(0.1, abs=1e-15)


def test_two_player_closed_form():
    v = np.zeros((3, 3))
    v[AS, AU] = math.log(3)
    pm = RacePayoffMatrix(v)
    assert fixation_probability(pm, AS, AU, 2, 1.0) == pytest.approx(0.75, abs=1e-15)


@pytest.mark.parametrize("N", range(2, 9))
@pytest.mark.parametrize("beta", [0.0, 0.5, 2.0])
def test_fixation_matches_birth_death_chain(N, beta):
    for pm in (random_matrix(N), race_payoff_matrix(RaceParams(s=2, p_r=0.3, W=3, c=0.01))):
        for i, j in itertools.permutations(Strategy, 2):
            exact = birth_death_fixation(pm.values, i, j, N, beta)
            assert abs(fixation_probability(pm, i, j, N, beta) - exact) <= 1e-10


def test_fixation_input_checks():
    pm = random_matrix(1)
    with pytest.raises(ValueError):
        fixation_probability(pm, AS, AS, 10, 1.0)
    with pytest.raises(ValueError):
        fixation_probability(pm, AS, AU, 1, 1.0)
    with pytest.raises(ValueError):
        fixation_probability(pm, AS, AU, 10, -1.0)


def test_strong_selection_stays_finite():
    pm = race_payoff_matrix(RaceParams(s=3, p_r=0.1))
    rho = fixation_matrix(pm, 100, 500.0)
    assert np.all(np.isfinite(rho)) and np.all(rho >= 0) and np.all(rho <= 1)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 10_000),
    st.sampled_from(list(itertools.permutations(range(3), 2))),
    st.sampled_from([(0, 1), (0, 0)]),
    st.floats(0.0, 2.0),
    st.integers(2, 30),
    st.floats(0.1, 3.0),
)
def test_fixation_monotone_in_invader_payoffs(seed, pair, which, bump, N, beta):
    inv, res = pair
    v = np.random.default_rng(seed).standard_normal((3, 3))
    w = v.copy()
    entry = (inv, res) if which == (0, 1) else (inv, inv)
    w[entry] += bump
    lo = fixation_probability(RacePayoffMatrix(v), inv, res, N, beta)
    hi = fixation_probability(RacePayoffMatrix(w), inv, res, N, beta)
    assert hi >= lo - 1e-15


# -- stationary distribution -----------------------------------------------


def test_symmetric_matrix_uniform_distribution():
    res = stationary_distribution(RacePayoffMatrix(np.ones((3, 3))), 100, 1.0)
    np.testing.assert_allclose(res.distribution, [1 / 3] * 3, atol=1e-14)


def test_neutral_selection_uniform_distribution():
    res = stationary_distribution(race_payoff_matrix(RaceParams(s=2.7, p_r=0.2)), 100, 0.0)
    np.testing.assert_allclose(res.distribution, [1 / 3] * 3, atol=1e-14)


def test_unsafe_dominates_fast_low_risk_race():
    p = RaceParams(s=3, p_r=0.1, b=0, c=0.01, B=1, W=1, N=100, beta_sel=1)
    res = stationary_distribution(race_payoff_matrix(p), p.N, p.beta_sel)
    assert int(np.argmax(res.distribution)) == AU
    assert res.unsafe_frequency == res.distribution[AU]


@pytest.mark.parametrize("seed", range(10))
def test_stationary_properties(seed):
    pm = random_matrix(seed)
    res = stationary_distribution(pm, 30, 1.5)
    pi, T = res.distribution, res.transition_matrix
    assert np.all(pi >= 0) and abs(pi.sum() - 1) < 1e-15
    np.testing.assert_allclose(T.sum(axis=1), 1.0, atol=1e-15)
    assert np.max(np.abs(pi @ T - pi)) <= 1e-12
    # off-diagonal transitions are half the fixation probability
    rho = res.fixation_matrix
    for i, j in itertools.permutations(range(3), 2):
        assert T[j, i] == rho[i, j] / 2


def test_reducible_chain_is_resolved():
    # extreme selection underflows every escape from AU
    p = RaceParams(s=3, p_r=0.0, N=100, beta_sel=1e4, c=0.0)
    res = stationary_distribution(race_payoff_matrix(p), p.N, p.beta_sel)
    assert np.all(np.isfinite(res.distribution))
    assert abs(res.distribution.sum() - 1) < 1e-12
    assert res.distribution[AU] > 0.99


def test_stationary_to_dict():
    doc = stationary_distribution(race_payoff_matrix(RaceParams()), 10, 1.0).to_dict()
    assert set(doc["distribution"]) == {"AS", "AU", "CS"}
    assert doc["unsafe_frequency"] == doc["distribution"]["AU"]


# -- regions ---------------------------------------------------------------


@pytest.mark.parametrize(
    "s,p_r,region",
    [(1.5, 0.5, Region.II), (2, 0.9, Region.I), (2, 0.1, Region.III)],
)
def test_classify_examples(s, p_r, region):
    assert classify_region(RaceParams(s=s, p_r=p_r, b=0, c=1e-6)) == region


def test_region_of_table():
    assert region_of(True, True) == Region.I
    assert region_of(True, False) == Region.II
    assert region_of(False, False) == Region.III
    assert region_of(False, True) == Region.ANOMALOUS


def test_analytic_region_predicate():
    assert analytic_region_ii(1.5, 0.5)
    assert not analytic_region_ii(2, 0.9)
    assert not analytic_region_ii(2, 0.1)


def test_payoff_boundaries_match_analytic_band():
    # at b = c = 0: SS > UU iff p_r > 1 - 1/s; AU risk-dominates AS iff p_r < 1 - 1/(3s)
    for s in (1.2, 2.0, 2.9):
        for p_r in np.linspace(0.01, 0.99, 37):
            pm = race_payoff_matrix(RaceParams(s=s, p_r=p_r, b=0, c=0))
            assert (pm[AS, AS] > pm[AU, AU]) == (p_r > 1 - 1 / s)
            dominates = pm[AU, AS] + pm[AU, AU] > pm[AS, AU] + pm[AS, AS]
            assert dominates == (p_r < 1 - 1 / (3 * s))


# -- sweeps ----------------------------------------------------------------


def test_single_point_sweep_matches_direct_calls():
    base = RaceParams()
    (row,) = sweep_race([2.0], [0.4], base)
    p = RaceParams(s=2.0, p_r=0.4)
    res = stationary_distribution(race_payoff_matrix(p), p.N, p.beta_sel)
    assert row.freq_AU == res.distribution[AU]
    assert row.unsafe_frequency == res.unsafe_frequency
    assert row.region == classify_region(p)


def test_sweep_monotone_in_risk_and_regular():
    s_vals = [1.01, 1.5, 2.0, 3.0]
    pr_vals = np.linspace(0, 1, 21).tolist()
    rows = sweep_race(s_vals, pr_vals, RaceParams())
    assert len(rows) == len(s_vals) * len(pr_vals)
    assert not any(r.region == Region.ANOMALOUS for r in rows)
    for k in range(len(s_vals)):
        f = [r.unsafe_frequency for r in rows[k * 21 : (k + 1) * 21]]
        assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))


def test_sweep_csv():
    rows = sweep_race([1.5, 2.0], [0.2, 0.8], RaceParams())
    lines = sweep_to_csv(rows).splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 5
    fields = lines[1].split(",")
    assert float(fields[3]) == rows[0].freq_AU
    assert fields[-1] == rows[0].region.value
