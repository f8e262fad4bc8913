import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rideshare_bce.lp import (
    LinearProgram, LPDimensionError, LPStatus, OracleScaleError, solve_lp,
    to_lp_format, vertex_oracle,
)
from rideshare_bce.signaling import build_bce_lp

import gen


def test_lower_bound():
    lp = LinearProgram([1], A_le=[[-1]], b_le=[-3])
    for solver in (solve_lp, vertex_oracle):
        sol = solver(lp)
        assert sol.status is LPStatus.OPTIMAL
        assert sol.x.tolist() == [3.0]


def test_bland_picks_lowest_index():
    lp = LinearProgram([-1, -1], A_le=[[1, 1]], b_le=[1])
    sol = solve_lp(lp)
    assert sol.objective_value == -1
    assert sol.x.tolist() == [1.0, 0.0]
    assert vertex_oracle(lp).objective_value == -1


def test_unbounded():
    lp = LinearProgram([-1])
    assert solve_lp(lp).status is LPStatus.UNBOUNDED
    assert vertex_oracle(lp).status is LPStatus.UNBOUNDED


def test_infeasible():
    lp = LinearProgram([1], A_le=[[1]], b_le=[-1])
    assert solve_lp(lp).status is LPStatus.INFEASIBLE
    assert vertex_oracle(lp).status is LPStatus.INFEASIBLE


def test_equalities_and_redundant_rows():
    # x + y = 2 stated twice, minimize x - y
    lp = LinearProgram([1, -1], A_eq=[[1, 1], [2, 2]], b_eq=[2, 4])
    sol = solve_lp(lp)
    assert sol.status is LPStatus.OPTIMAL
    assert sol.x.tolist() == [0.0, 2.0]


def test_dimension_mismatch():
    with pytest.raises(LPDimensionError):
        solve_lp(LinearProgram([1, 2], A_le=[[1, 2, 3]], b_le=[1]))
    with pytest.raises(LPDimensionError):
        solve_lp(LinearProgram([1], A_eq=[[1]], b_eq=[1, 2]))


def test_oracle_scale_guard():
    with pytest.raises(OracleScaleError):
        vertex_oracle(LinearProgram(np.ones(9)))


def test_example_bce_lp_oracle(example_bg):
    lp = build_bce_lp(example_bg)
    ref = vertex_oracle(lp)
    assert ref.status is LPStatus.OPTIMAL
    assert ref.objective_value == pytest.approx(82 / 3, abs=1e-9)
    assert solve_lp(lp).objective_value == pytest.approx(82 / 3, abs=1e-9)


def test_beale_cycling_example_terminates():
    # classic degenerate instance on which Dantzig's rule cycles
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    b = [0, 0, 1]
    lp = LinearProgram(c, A_le=A, b_le=b)
    sol = solve_lp(lp)
    assert sol.status is LPStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(-0.05)
    assert sol.objective_value == pytest.approx(vertex_oracle(lp).objective_value)


def test_random_agreement():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        lp = gen.random_lp(rng)
        a, b = solve_lp(lp), vertex_oracle(lp)
        assert a.status == b.status
        if a.optimal:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-6)
            assert lp.max_violation(a.x) <= 1e-9


lp_data = st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n),
    st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), max_size=6),
    st.lists(st.integers(0, 9), min_size=6, max_size=6),
))


def _lp(data):
    c, rows, rhs = data
    n = len(c)
    # a box keeps every instance bounded and feasible
    A = rows + [[1 if j == k else 0 for j in range(n)] for k in range(n)]
    b = rhs[:len(rows)] + [5] * n
    return LinearProgram(c, A_le=A, b_le=b)


@settings(max_examples=80, deadline=None)
@given(lp_data, st.integers(2, 50))
def test_objective_scaling_keeps_vertex(data, k):
    lp = _lp(data)
    a = solve_lp(lp)
    b = solve_lp(lp.with_objective(lp.c * k))
    assert a.status is b.status is LPStatus.OPTIMAL
    assert np.array_equal(a.x, b.x)


@settings(max_examples=80, deadline=None)
@given(lp_data)
def test_deterministic_and_feasible(data):
    lp = _lp(data)
    a, b = solve_lp(lp), solve_lp(lp)
    assert np.array_equal(a.x, b.x) and a.objective_value == b.objective_value
    assert lp.max_violation(a.x) <= 1e-9
    assert a.objective_value == pytest.approx(float(lp.c @ a.x), abs=1e-9)
    assert a.objective_value == pytest.approx(vertex_oracle(lp).objective_value,
                                              abs=1e-6)


def test_lp_format(example_bg):
    text = to_lp_format(build_bce_lp(example_bg), "example")
    lines = text.splitlines()
    assert lines[:3] == ["\\ example", "Minimize",
                         " obj: 20 s_x0_C_C + 18 s_x0_C_D + 18 s_x0_D_C + "
                         "16 s_x0_D_D + 10 s_x1_C_C + 12 s_x1_C_D + "
                         "12 s_x1_D_C + 16 s_x1_D_D"]
    assert " ic_p1_C_to_D: 2 s_x0_C_C + 2 s_x0_C_D + 0.5 s_x1_C_C - 0.5 s_x1_C_D <= 0" \
        in lines
    assert lines[-1] == "End"
