from collections import Counter

import numpy as np
import pytest

from rideshare_bce.bayes import BayesianGame
from rideshare_bce.equilibria import analyze_equilibria, full_info_optimum
from rideshare_bce.lp import vertex_oracle
from rideshare_bce.signaling import (
    PolicyError, SignalingPolicy, bce_poa, build_bce_lp, is_symmetric,
    point_mass_policy, policy_from_entries, policy_value, sample_recommendation,
    solve_bce, symmetrize, verify_ic,
)

import gen

PUBLISHED = [("0", "D,D", 1.0), ("1", "C,C", 0.06),
             ("1", "C,D", 0.47), ("1", "D,C", 0.47)]


@pytest.fixture
def published(example_bg):
    return policy_from_entries(example_bg, PUBLISHED)


def test_lp_layout(example_bg):
    lp = build_bce_lp(example_bg)
    assert lp.n == 8
    assert lp.A_eq.shape == (2, 8) and lp.A_le.shape == (4, 8)
    assert lp.var_names[3] == "s_x0_D_D" and lp.var_names[4] == "s_x1_C_C"
    assert lp.c[3] == 16
    assert lp.le_names == ["ic_p1_C_to_D", "ic_p1_D_to_C",
                           "ic_p2_C_to_D", "ic_p2_D_to_C"]


def test_obedience_row_coefficients(example_bg):
    lp = build_bce_lp(example_bg)
    row = dict(zip(lp.var_names, lp.A_le[0]))
    # player 1 told C, considering D
    assert row["s_x0_C_C"] == 2 and row["s_x0_C_D"] == 2
    assert row["s_x1_C_C"] == 0.5 and row["s_x1_C_D"] == -0.5
    assert all(v == 0 for k, v in row.items() if "_D_" in k)


def test_optimal_policy(example_bg):
    sol = solve_bce(example_bg)
    assert sol.value == pytest.approx(82 / 3, abs=1e-9)
    assert sol.value == pytest.approx(vertex_oracle(sol.lp).objective_value,
                                      abs=1e-9)
    p = sol.policy
    assert p.prob("0", (1, 1)) == pytest.approx(1)
    for prof in [(0, 0), (0, 1), (1, 0)]:
        assert p.prob("1", prof) == pytest.approx(1 / 3)
    assert verify_ic(example_bg, p).feasible


def test_dropping_obedience_reaches_full_info(example_bg):
    assert solve_bce(example_bg, include_ic=False).value == pytest.approx(26)


def test_published_policy(example_bg, published):
    rep = verify_ic(example_bg, published)
    assert rep.feasible
    assert rep.slacks[(0, 0, 1)] == pytest.approx(0.205)
    assert rep.slacks[(0, 1, 0)] == pytest.approx(2.235)
    assert policy_value(example_bg, published) == pytest.approx(27.88)
    assert bce_poa(example_bg, 27.88) == pytest.approx(1.0723, abs=1e-4)


def test_point_mass_cc_not_obedient(example_bg):
    rep = verify_ic(example_bg, point_mass_policy(example_bg, "C,C"))
    assert not rep.feasible
    assert rep.min_slack == pytest.approx(-2.5)
    assert (0, 0, 1) in rep.violations()


def test_benchmark_values(example_bg):
    assert policy_value(example_bg, point_mass_policy(example_bg, (1, 1))) == 32
    fi = point_mass_policy(example_bg, per_state=["D,D", "C,C"])
    assert policy_value(example_bg, fi) == 26
    assert bce_poa(example_bg) == pytest.approx(1.0513, abs=1e-4)


def test_sampler_degenerate_state(published):
    assert {sample_recommendation(published, "0", s) for s in range(500)} == {(1, 1)}


def test_sampler_frequencies(published):
    n = 100_000
    counts = Counter(sample_recommendation(published, "1", s) for s in range(n))
    for prof, p in [((0, 0), 0.06), ((0, 1), 0.47), ((1, 0), 0.47), ((1, 1), 0)]:
        sd = np.sqrt(p * (1 - p) / n)
        assert abs(counts[prof] / n - p) <= 4 * sd + 1e-12


def test_sampler_reproducible(published):
    assert [sample_recommendation(published, "1", 9) for _ in range(5)] == \
        [sample_recommendation(published, "1", 9)] * 5


def test_bad_policy_rejected(example_bg):
    bad = policy_from_entries(example_bg, [("0", "D,D", 0.9), ("1", "C,C", 1.0)])
    with pytest.raises(PolicyError, match="sums to 0.9"):
        verify_ic(example_bg, bad)
    with pytest.raises(PolicyError):
        verify_ic(example_bg, SignalingPolicy(("0",), np.full((1, 2, 2), 0.25)))


def test_symmetrize_keeps_value_and_obedience(example_bg, published):
    assert is_symmetric(example_bg)
    skew = policy_from_entries(example_bg, [("0", "D,D", 1), ("1", "C,D", 0.6),
                                          ("1", "D,C", 0.4)])
    for p in (published, skew, solve_bce(example_bg).policy):
        sym = symmetrize(example_bg, p)
        assert policy_value(example_bg, sym) == pytest.approx(policy_value(example_bg, p))
        if verify_ic(example_bg, p).feasible:
            assert verify_ic(example_bg, sym).feasible


def test_symmetrize_rejects_asymmetric():
    bg = BayesianGame.from_matrices([[[[1, 2], [3, 4]], [[5, 6], [7, 8]]]], [1.0])
    with pytest.raises(PolicyError):
        symmetrize(bg, point_mass_policy(bg, (0, 0)))


def test_correlated_beats_every_pure_equilibrium():
    rng = np.random.default_rng(17)
    seen = 0
    for _ in range(150):
        bg = gen.random_bayesian_game(rng, max_states=1)
        rep = analyze_equilibria(bg)
        if not rep.pure_bne:
            continue
        seen += 1
        value = solve_bce(bg).value
        assert all(value <= c + 1e-6 for c in rep.bne_system_costs)
    assert seen >= 50


def test_value_sandwich_and_recheck():
    rng = np.random.default_rng(23)
    seen = 0
    while seen < 120:
        bg = gen.random_bayesian_game(rng, n_players=int(rng.integers(1, 4)))
        rep = analyze_equilibria(bg)
        if not rep.pure_bne:
            continue
        seen += 1
        sol = solve_bce(bg)
        assert full_info_optimum(bg).value - 1e-6 <= sol.value
        assert sol.value <= min(rep.bne_system_costs) + 1e-6
        assert verify_ic(bg, sol.policy).feasible
        assert policy_value(bg, sol.policy) == pytest.approx(sol.value, abs=1e-9)
        relaxed = solve_bce(bg, include_ic=False).value
        assert relaxed <= sol.value + 1e-9


def test_policy_entries_round_trip(published, example_bg):
    again = policy_from_entries(example_bg, published.entries())
    assert np.array_equal(again.probabilities, published.probabilities)
