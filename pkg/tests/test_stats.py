import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core.errors import UnreachableEndpoint, ZeroOccupation
from core.generator import builtin_generator, stationary_time
from core.path import Path, concatenate_paths
from stages.stats.expectations import (
    expected_stats_conditional,
    expected_stats_uniform_closed_form,
    integral_I,
    integral_I_quadrature,
)
from stages.stats.sufficient_stats import (
    SufficientStats,
    accumulate,
    ensemble_mean,
    mle_from_stats,
    stats_from_csv,
    zero_stats,
)


# =====================================================
# SUFFICIENT STATISTICS
# =====================================================
def test_accumulate_example():
    s = accumulate(Path(0, [0.4, 0.9], [1, 0], 1.5), 3)

    assert_array_equal(s.N, [[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    assert_allclose(s.R, [1.0, 0.5, 0.0])
    assert s.n_jumps == 2
    assert s.horizon == 1.5


def test_accumulate_constant_path():
    s = accumulate(Path.constant(2, 0.7), 3)
    assert s.n_jumps == 0
    assert_allclose(s.R, [0.0, 0.0, 0.7])


def test_accumulate_rejects_small_state_space():
    with pytest.raises(ValueError):
        accumulate(Path(0, [0.5], [3], 1.0), 3)


def test_stats_are_additive_over_concatenation():
    a = Path(0, [0.2, 0.6], [2, 1], 1.0)
    b = Path(1, [0.3], [0], 0.5)

    joined = accumulate(concatenate_paths([a, b]), 3)
    summed = accumulate(a, 3) + accumulate(b, 3)

    assert_array_equal(joined.N, summed.N)
    assert_allclose(joined.R, summed.R)
    assert_allclose(summed.R.sum(), 1.5)


def test_add_rejects_mismatched_sizes():
    with pytest.raises(ValueError):
        zero_stats(3) + zero_stats(4)


def test_ensemble_mean():
    s1 = SufficientStats(np.array([[0, 2], [1, 0]]), np.array([1.0, 2.0]), 3.0)
    s2 = SufficientStats(np.array([[0, 1], [0, 0]]), np.array([2.0, 1.0]), 3.0)

    mean = ensemble_mean([s1, s2])
    assert_allclose(mean.N, [[0, 1.5], [0.5, 0]])
    assert_allclose(mean.R, [1.5, 1.5])
    assert not mean.integral

    with pytest.raises(ValueError):
        ensemble_mean([])


def test_mle_from_stats():
    s = SufficientStats(np.array([[0, 2, 1], [1, 0, 3], [0, 2, 0]]), np.array([1.5, 2.0, 4.0]), 7.5)
    rates = mle_from_stats(s)

    assert_allclose(rates[0, 1:], [2 / 1.5, 1 / 1.5])
    assert_allclose(rates[2, 1], 0.5)
    assert_allclose(rates.sum(axis=1), 0.0, atol=1e-15)


def test_mle_zero_occupation():
    s = SufficientStats(np.zeros((3, 3)), np.array([1.0, 0.0, 2.0]), 3.0)

    with pytest.raises(ZeroOccupation, match="state 2"):
        mle_from_stats(s)


def test_stats_csv_round_trip(tmp_path):
    s = accumulate(Path(0, [0.4, 0.9, 1.2], [1, 2, 0], 1.5), 3)

    text = s.to_csv(tmp_path / "stats.csv")
    assert text.splitlines()[0] == "# T=1.5"
    assert "1,2,1" in text.splitlines()

    back = stats_from_csv(tmp_path / "stats.csv")
    assert_array_equal(back.N, s.N)
    assert_allclose(back.R, s.R)
    assert back.horizon == 1.5
    assert back.integral


def test_stats_csv_requires_header():
    with pytest.raises(ValueError):
        stats_from_csv("1,2,1\n1,0.5\n2,0.5\n")


# =====================================================
# EXPECTATIONS
# =====================================================
@pytest.mark.parametrize("x, y, i, j", [(0, 1, 0, 2), (1, 0, 2, 0), (2, 2, 1, 1), (0, 0, 2, 1)])
def test_integral_matches_quadrature(model2, x, y, i, j):
    t = 0.8
    assert_allclose(
        integral_I(model2, t, x, y, i, j),
        integral_I_quadrature(model2, t, x, y, i, j),
        atol=1e-8,
    )


def test_integral_at_zero(model2):
    assert integral_I(model2, 0.0, 0, 0, 0, 0) == 0.0
    assert integral_I_quadrature(model2, 0.0, 0, 0, 0, 0) == 0.0


@pytest.mark.parametrize("n, t, x, y", [(3, 3.25, 0, 1), (3, 0.4, 2, 2), (5, 1.7, 1, 4)])
def test_uniform_closed_form(n, t, x, y):
    g = builtin_generator("uniform", n)

    E_N, E_R = expected_stats_conditional(g, x, y, t)
    C_N, C_R = expected_stats_uniform_closed_form(n, t, x, y)

    assert_allclose(E_N, C_N, atol=1e-8)
    assert_allclose(E_R, C_R, atol=1e-8)


@pytest.mark.parametrize("x, y, t", [(0, 1, 1.0), (1, 1, 0.3), (2, 0, 5.0)])
def test_expected_holding_times_sum_to_horizon(model2, x, y, t):
    E_N, E_R = expected_stats_conditional(model2, x, y, t)

    assert_allclose(E_R.sum(), t, rtol=1e-10)
    assert np.all(E_N >= 0)
    assert_array_equal(np.diag(E_N), 0.0)
    # state 2 never jumps to state 1
    assert E_N[1, 0] == 0.0


def test_expected_jumps_short_constant_bridge(uniform3):
    E_N, E_R = expected_stats_conditional(uniform3, 1, 1, 1e-6)
    assert E_N.sum() < 1e-10
    assert_allclose(E_R[1], 1e-6)


def test_expected_stats_unreachable(model2):
    # 2 -> 1 takes two jumps; the probability underflows
    with pytest.raises(UnreachableEndpoint):
        expected_stats_conditional(model2, 1, 0, 1e-170)


def test_uniform_closed_form_rejects_bad_input():
    with pytest.raises(ValueError):
        expected_stats_uniform_closed_form(2, 1.0, 0, 1)
    with pytest.raises(ValueError):
        expected_stats_uniform_closed_form(3, 0.0, 0, 1)


@pytest.mark.parametrize("n", [3, 10, 20])
def test_uniform_closed_form_at_stationary_time(n):
    g = builtin_generator("uniform", n)
    t = stationary_time(g)

    # same endpoint, distinct endpoints, and the reverse pair
    for x, y in ((0, 0), (0, n - 1), (n - 1, 0)):
        E_N, E_R = expected_stats_conditional(g, x, y, t)
        C_N, C_R = expected_stats_uniform_closed_form(n, t, x, y)

        assert np.abs(E_N - C_N).max() < 1e-8
        assert np.abs(E_R - C_R).max() < 1e-8
