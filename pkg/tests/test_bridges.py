import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import poisson

from core.errors import (
    AttemptsExhausted,
    NotDiagonalizable,
    RecursionDepthExceeded,
    SeriesTruncation,
)
from core.generator import transition_matrix
from core.path import Path
from core.rng import substream
from evaluation.oracles import bridge_law_pvalue, state_counts, two_sample_pvalue, within_sigma
from stages.bridges import time_reverse
from stages.bridges.bisection import holding_integral, sample_bisection, single_jump_time
from stages.bridges.direct import sample_direct
from stages.bridges.dispatch import SAMPLERS, sample_bridge
from stages.bridges.modified_rejection import sample_modified_rejection, truncated_first_jump_time
from stages.bridges.problem import DEFAULT_MAX_ATTEMPTS, METHODS, BridgeProblem
from stages.bridges.rejection import sample_rejection
from stages.bridges.time_reverse import (
    first_meeting_time,
    resolve_tir_mode,
    sample_time_reverse,
    splice,
)
from stages.bridges.uniformization import (
    jump_count_distribution,
    sample_uniformization,
    uniformization_matrix,
)
from stages.stats.expectations import expected_stats_conditional
from stages.stats.sufficient_stats import accumulate


ALPHA = 1e-3
EXACT_METHODS = ("rej", "mor", "dir", "uni", "bis")


def _bridges(g, a, b, T, method, m, seed=0, **options):
    prob = BridgeProblem(a, b, T, method)
    rng = substream(seed, "bridges", method, a, b, T)
    return [sample_bridge(g, prob, rng, **options) for _ in range(m)]


# =====================================================
# PROBLEM
# =====================================================
def test_bridge_problem_validation(model2):
    with pytest.raises(ValueError):
        BridgeProblem(0, 1, 0.0)

    with pytest.raises(ValueError):
        BridgeProblem(0, 1, 1.0, "xyz")

    with pytest.raises(ValueError):
        BridgeProblem(0, 1, 1.0, max_attempts=0)

    with pytest.raises(ValueError):
        BridgeProblem(0, 3, 1.0).check(model2)


# =====================================================
# INVERSE CDFS
# =====================================================
def test_truncated_first_jump_time_value():
    tau = truncated_first_jump_time(2.0, 1.0, 0.5)
    assert_allclose(tau, -np.log(1 - 0.5 * (1 - np.exp(-2.0))) / 2.0, rtol=1e-14)
    assert_allclose(tau, 0.2831096, atol=1e-6)


def test_truncated_first_jump_time_limits():
    assert 0 < truncated_first_jump_time(2.0, 1.0, 1e-12) < 1e-9
    assert 1.0 - 1e-6 < truncated_first_jump_time(2.0, 1.0, 1 - 1e-12) < 1.0

    u = 0.3
    assert_allclose(truncated_first_jump_time(1.0, 200.0, u), -np.log(1 - u), rtol=1e-12)


def test_truncated_first_jump_time_rejects_bad_input():
    with pytest.raises(ValueError):
        truncated_first_jump_time(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        truncated_first_jump_time(1.0, 1.0, 1.0)


def test_single_jump_time():
    assert single_jump_time(1.5, 1.5, 2.0, 0.25) == 0.5
    assert_allclose(single_jump_time(3.0, 1.0, 1.0, 0.5), 0.2831096, atol=1e-6)

    tau = single_jump_time(1.0, 10.0, 0.5, 0.9)
    assert 0 < tau < 0.5


def test_holding_integral_series_branch_is_continuous():
    exact = holding_integral(2.0, 2.0 + 1e-6, 1.3)
    series = holding_integral(2.0, 2.0 + 1e-9, 1.3)
    assert_allclose(series, exact, rtol=1e-6)
    assert_allclose(holding_integral(2.0, 2.0, 1.3), 1.3 * np.exp(-2.6), rtol=1e-12)


# =====================================================
# UNIFORMIZATION
# =====================================================
def test_uniformization_matrix(model2, uniform3):
    assert_allclose(uniformization_matrix(model2), [[0.8, 0.1, 0.1], [0, 0, 1], [0.4, 0.1, 0.5]])

    gamma = uniformization_matrix(uniform3)
    assert_allclose(np.diag(gamma), 0.0)
    assert_allclose(gamma[0, 1:], 0.5)
    assert_allclose(gamma.sum(axis=1), 1.0, atol=1e-15)


def test_uniformization_reconstructs_transition_probs(model2):
    T = 1.0
    gamma = uniformization_matrix(model2)
    mu_t = model2.mu * T

    total = np.zeros((3, 3))
    power = np.eye(3)
    for m in range(int(mu_t + 20 * np.sqrt(mu_t) + 50) + 1):
        total += poisson.pmf(m, mu_t) * power
        power = power @ gamma

    assert_allclose(total, transition_matrix(model2, T).probs, atol=1e-8)


def test_jump_count_distribution_normalized(model2):
    probs, _, _ = jump_count_distribution(model2, 0, 0, 1.0)
    assert_allclose(probs.sum(), 1.0)
    assert np.all(probs >= 0)


def test_uniformization_series_truncation(model2):
    with pytest.raises(SeriesTruncation):
        sample_uniformization(model2, BridgeProblem(0, 1, 1.0, "uni"), substream(0, "u"), mass_tol=-1e-3)


# =====================================================
# ENDPOINTS AND ATTEMPTS
# =====================================================
@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("a, b, T", [(0, 1, 1.0), (1, 1, 0.5), (2, 0, 3.0)])
def test_endpoint_exactness(model2, method, a, b, T):
    for s in _bridges(model2, a, b, T, method, 150):
        assert s.path.initial_state == a
        assert s.path.end_state == b
        assert s.path.horizon == T
        assert 1 <= s.attempts <= DEFAULT_MAX_ATTEMPTS
        assert s.method == method


@pytest.mark.parametrize("method", ["dir", "uni", "bis"])
def test_single_attempt_methods(uniform3, method):
    assert all(s.attempts == 1 for s in _bridges(uniform3, 0, 2, 3.25, method, 100))


def test_rejection_constant_bridge_short_horizon(uniform3):
    s = sample_rejection(uniform3, BridgeProblem(0, 0, 1e-6, "rej"), substream(0, "short"))
    assert s.attempts == 1
    assert s.path.n_jumps == 0


def test_rejection_acceptance_matches_transition_probability(model2):
    T = 1.0
    p = transition_matrix(model2, T).probs[0, 1]
    attempts = [s.attempts for s in _bridges(model2, 0, 1, T, "rej", 3000)]

    # attempts are geometric with success probability p
    rate = len(attempts) / np.sum(attempts)
    se = np.sqrt(p * (1 - p) / np.sum(attempts))
    assert abs(rate - p) < 4 * se


def test_rejection_attempts_exhausted(model2):
    prob = BridgeProblem(0, 1, 0.01, "rej", max_attempts=1)
    rng = substream(0, "exhaust")

    with pytest.raises(AttemptsExhausted, match="AttemptsExhausted") as info:
        for _ in range(50):
            sample_rejection(model2, prob, rng)

    assert info.value.acceptance == pytest.approx(transition_matrix(model2, 0.01).probs[0, 1])


def test_modified_rejection_forces_a_jump(uniform3):
    assert all(s.path.n_jumps >= 1 for s in _bridges(uniform3, 0, 1, 0.05, "mor", 200))


def test_modified_rejection_first_jump_from_fast_state(model2):
    # state 2 only jumps to state 3
    for s in _bridges(model2, 1, 2, 0.1, "mor", 200):
        assert s.path.states[0] == 2


def test_modified_rejection_same_endpoint_defers_to_rejection(model2):
    prob = BridgeProblem(0, 0, 1.0, "mor")
    s1 = sample_modified_rejection(model2, prob, substream(5, "same"))
    s2 = sample_rejection(model2, prob, substream(5, "same"))
    assert s1.path.equals(s2.path)
    assert s1.method == "mor"


def test_direct_not_diagonalizable(model2):
    prob = BridgeProblem(0, 1, 1.0, "dir")
    with pytest.raises(NotDiagonalizable):
        sample_direct(model2, prob, substream(0, "d"), cond_cap=0.5)


def test_bisection_depth_cap(uniform3):
    prob = BridgeProblem(0, 1, 3.25, "bis")
    rng = substream(0, "depth")

    with pytest.raises(RecursionDepthExceeded):
        for _ in range(50):
            sample_bisection(uniform3, prob, rng, max_depth=0)


def test_uniformization_constant_bridge(uniform3):
    s = sample_uniformization(uniform3, BridgeProblem(1, 1, 1e-8, "uni"), substream(0, "c"))
    assert s.path.n_jumps == 0


# =====================================================
# TIME REVERSE
# =====================================================
def test_first_meeting_time_and_splice():
    x1 = Path(0, [0.5, 1.5], [1, 2], 2.0)
    x2 = Path(2, [0.8, 1.2], [1, 0], 2.0)

    # at 0.8 both are in state 1
    tau = first_meeting_time(x1, x2)
    assert tau == 0.8

    z = splice(x1, x2, tau)
    assert z.initial_state == 0
    assert_allclose(z.times, [0.5, 1.2])
    assert list(z.states) == [1, 0]


def test_disjoint_constant_paths_never_meet():
    assert first_meeting_time(Path.constant(0, 1.0), Path.constant(1, 1.0)) is None


def test_meeting_at_shared_jump_uses_right_limits():
    x1 = Path(0, [0.5], [1], 1.0)
    x2 = Path(2, [0.5], [1], 1.0)
    assert first_meeting_time(x1, x2) == 0.5


def test_time_reverse_unknown_mode(model2):
    with pytest.raises(ValueError):
        sample_time_reverse(model2, BridgeProblem(0, 1, 1.0), substream(0, "m"), mode="other")


def test_time_reverse_mode_alias(uniform3):
    assert resolve_tir_mode("forward") == "paper"
    assert resolve_tir_mode("paper") == "paper"
    assert resolve_tir_mode("reversed") == "reversed"

    prob = BridgeProblem(0, 1, 3.25)
    a = sample_time_reverse(uniform3, prob, substream(4, "alias"), mode="forward")
    b = sample_time_reverse(uniform3, prob, substream(4, "alias"), mode="paper")
    assert a.path.equals(b.path)


@pytest.mark.parametrize("mode", ["paper", "reversed"])
def test_time_reverse_short_horizon_warns_once(model2, caplog, mode):
    time_reverse._WARNED.clear()
    prob = BridgeProblem(0, 1, 0.2)
    rng = substream(0, "warn")

    with caplog.at_level(logging.WARNING):
        for _ in range(3):
            sample_time_reverse(model2, prob, rng, mode=mode)

    warnings = [r for r in caplog.records if "below the stationary time" in r.getMessage()]
    assert len(warnings) == 1
    assert f"{mode} mode" in warnings[0].getMessage()


def test_time_reverse_long_horizon_does_not_warn(uniform3, caplog):
    time_reverse._WARNED.clear()

    with caplog.at_level(logging.WARNING):
        sample_time_reverse(uniform3, BridgeProblem(0, 1, 4.0), substream(0, "quiet"))

    assert not [r for r in caplog.records if "below the stationary time" in r.getMessage()]


# =====================================================
# DISPATCH
# =====================================================
def test_dispatch_is_transparent(model2):
    prob = BridgeProblem(0, 1, 1.0, "rej")
    a = sample_bridge(model2, prob, substream(9, "d"))
    b = sample_rejection(model2, prob, substream(9, "d"))
    assert a.path.equals(b.path)
    assert a.attempts == b.attempts


def test_dispatch_propagates_errors(model2):
    with pytest.raises(NotDiagonalizable):
        sample_bridge(model2, BridgeProblem(0, 1, 1.0, "dir"), substream(0, "e"), cond_cap=0.5)


def test_dispatch_covers_all_methods():
    assert set(SAMPLERS) == set(METHODS)


# =====================================================
# BRIDGE LAW
# =====================================================
@pytest.mark.parametrize("method", METHODS)
def test_midpoint_law_uniform3(uniform3, method):
    paths = [s.path for s in _bridges(uniform3, 0, 1, 3.25, method, 2000, seed=1)]
    assert bridge_law_pvalue(paths, uniform3, 0, 1, 3.25) > ALPHA


@pytest.mark.parametrize("method", METHODS)
def test_midpoint_law_model2(model2, method):
    paths = [s.path for s in _bridges(model2, 0, 1, 1.0, method, 2000, seed=2)]
    assert bridge_law_pvalue(paths, model2, 0, 1, 1.0) > ALPHA


@pytest.mark.parametrize("method", EXACT_METHODS)
@pytest.mark.parametrize("name", ["uniform3", "model2"])
def test_bridge_law_short_horizon(request, name, method):
    g = request.getfixturevalue(name)
    T = 0.5
    paths = [s.path for s in _bridges(g, 0, 1, T, method, 2000, seed=5)]

    for t in (0.25 * T, 0.5 * T, 0.75 * T):
        assert bridge_law_pvalue(paths, g, 0, 1, T, t) > ALPHA


def test_time_reverse_paper_mode_on_reversible_generator(uniform3):
    paths = [s.path for s in _bridges(uniform3, 0, 1, 3.25, "tir", 2000, seed=3, mode="paper")]
    assert bridge_law_pvalue(paths, uniform3, 0, 1, 3.25) > ALPHA


@pytest.mark.parametrize("method", METHODS)
def test_jump_counts_match_expectation(model2, method):
    # about twice the stationary time of model2 (0.95)
    a, b, T = 0, 2, 2.0
    E_N, E_R = expected_stats_conditional(model2, a, b, T)

    stats = [accumulate(s.path, 3) for s in _bridges(model2, a, b, T, method, 2000, seed=4)]
    jumps = np.array([s.n_jumps for s in stats])
    R = np.array([s.R for s in stats])

    assert within_sigma(jumps, E_N.sum(), k=4)
    assert within_sigma(R, E_R, k=4)


# =====================================================
# LONG RUNS
# =====================================================
@pytest.mark.slow
@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("name, T", [("uniform3", 3.25), ("model2", 1.0)])
def test_bridge_law_long(request, name, T, method):
    g = request.getfixturevalue(name)
    bridges = _bridges(g, 0, 1, T, method, 10_000, seed=10)

    assert bridge_law_pvalue([s.path for s in bridges], g, 0, 1, T) > 0.01

    E_N, E_R = expected_stats_conditional(g, 0, 1, T)
    stats = [accumulate(s.path, g.n) for s in bridges]
    assert within_sigma(np.array([s.n_jumps for s in stats]), E_N.sum(), k=4)
    assert within_sigma(np.array([s.R for s in stats]), E_R, k=4)


@pytest.mark.slow
def test_time_reverse_modes_agree_on_reversible_generator(uniform3):
    counts = []
    for seed, mode in ((12, "paper"), (13, "reversed")):
        paths = [s.path for s in _bridges(uniform3, 0, 1, 3.25, "tir", 10_000, seed=seed, mode=mode)]
        counts.append(state_counts(paths, 1.625, 3))

    assert two_sample_pvalue(*counts) > 0.01


@pytest.mark.slow
@pytest.mark.parametrize("method", EXACT_METHODS)
@pytest.mark.parametrize("name", ["uniform3", "model2"])
def test_bridge_law_short_horizon_long(request, name, method):
    g = request.getfixturevalue(name)
    bridges = _bridges(g, 0, 1, 0.5, method, 10_000, seed=14)

    assert bridge_law_pvalue([s.path for s in bridges], g, 0, 1, 0.5) > 0.01

    E_N, E_R = expected_stats_conditional(g, 0, 1, 0.5)
    stats = [accumulate(s.path, g.n) for s in bridges]
    assert within_sigma(np.array([s.n_jumps for s in stats]), E_N.sum(), k=4)
    assert within_sigma(np.array([s.R for s in stats]), E_R, k=4)


@pytest.mark.slow
def test_time_reverse_deviates_below_stationary_time(uniform3):
    # documented limitation: the splice is not the bridge law at short horizons
    E_N, _ = expected_stats_conditional(uniform3, 0, 1, 0.5)
    bridges = _bridges(uniform3, 0, 1, 0.5, "tir", 20_000, seed=15)

    jumps = np.array([s.path.n_jumps for s in bridges])
    assert not within_sigma(jumps, E_N.sum(), k=4)
    assert jumps.mean() > E_N.sum()
