import math

import numpy as np
import pytest

import oracles
from coopmac.ensemble import EffectiveGains, Ensemble, build_uniform_grid
from coopmac.policy import (
    P10, P12, PU1, P20, P21, PU2,
    PowerPolicy,
    PowerVector,
    support_matrix,
    zero_policy,
)
from coopmac.rates import (
    RateBounds,
    corner_rate_pair,
    log_coherent_arg,
    log_decode_arg,
    rate_bounds,
    weighted_objective,
)


def single_state_ensemble(s10, s20, s12, s21, budgets=(1.0, 1.0)):
    return Ensemble([[s10, s20, s12, s21]], [1.0], budgets=budgets)


def random_reduced_policy(ens, rng, slack=1.0):
    """Random feasible policy supported on the case reduction."""
    mask = support_matrix(ens)
    matrix = rng.uniform(0.05, 1.0, size=(ens.n_states, 6))
    matrix[~mask] = 0.0
    for cols, budget in (((P10, P12, PU1), ens.budgets[0]),
                         ((P20, P21, PU2), ens.budgets[1])):
        avg = float(ens.probs @ matrix[:, cols].sum(axis=1))
        matrix[:, cols] *= slack * budget / avg
    return PowerPolicy(ens, matrix)


class TestMinArguments:
    def test_coherent_arg_symmetric_unit_case(self):
        # only the cooperative parts transmit: 1 + 1 + 1 + 2 = 5
        gains = EffectiveGains(s10=1.0, s20=1.0, s12=3.0, s21=3.0)
        powers = PowerVector(pU1=1.0, pU2=1.0)
        assert log_coherent_arg(gains, powers) == pytest.approx(math.log(5.0), rel=1e-12)

    def test_decode_arg_routed_only(self):
        # p12 = 1 at s12 = 3 and silence elsewhere: log 4
        gains = EffectiveGains(s10=1.0, s20=1.0, s12=3.0, s21=3.0)
        powers = PowerVector(p12=1.0)
        assert log_decode_arg(gains, powers) == pytest.approx(math.log(4.0), rel=1e-12)

    def test_decode_arg_direct_collapses_when_gains_tie(self):
        # with s12 = s10 and only p10 active the decode argument is log(1 + s10 p10)
        gains = EffectiveGains(s10=0.4, s20=0.2, s12=0.4, s21=0.3)
        powers = PowerVector(p10=0.7)
        expected = math.log(1.0 + 0.4 * 0.7)
        assert log_decode_arg(gains, powers) == pytest.approx(expected, rel=1e-12)

    def test_matches_oracle_on_random_states(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s = tuple(rng.uniform(0.05, 2.0, size=4))
            p = tuple(rng.uniform(0.0, 1.5, size=6))
            la, lbc = oracles.state_log_args(s, p)
            gains = EffectiveGains(*s)
            powers = PowerVector(*p)
            np.testing.assert_allclose(log_coherent_arg(gains, powers), la, rtol=1e-12)
            np.testing.assert_allclose(log_decode_arg(gains, powers), lbc, rtol=1e-12)


class TestRateBounds:
    def test_single_state_routed_bounds(self):
        # user 1 routes one unit at s12 = 3; user 2 silent
        ens = single_state_ensemble(1.0, 1.0, 3.0, 3.0)
        matrix = np.zeros((1, 6))
        matrix[0, P12] = 1.0
        bounds = rate_bounds(PowerPolicy(ens, matrix))
        assert bounds.r1_bound == pytest.approx(math.log(4.0), rel=1e-12)
        assert bounds.r2_bound == 0.0
        assert bounds.coherent_arg == pytest.approx(math.log(2.0), rel=1e-12)
        assert bounds.decode_arg == pytest.approx(math.log(4.0), rel=1e-12)
        assert bounds.sum_bound == pytest.approx(math.log(2.0), rel=1e-12)

    def test_direct_only_arguments_coincide(self):
        # with only p10, p20 active both min arguments equal the plain MAC bound
        rng = np.random.default_rng(3)
        ens = build_uniform_grid([0.1, 0.25], [0.3, 0.4], budgets=(2.0, 2.0))
        matrix = np.zeros((ens.n_states, 6))
        matrix[:, P10] = rng.uniform(0.0, 2.0, ens.n_states) * 0.9
        matrix[:, P20] = rng.uniform(0.0, 2.0, ens.n_states) * 0.9
        matrix *= 0.5
        bounds = rate_bounds(PowerPolicy(ens, matrix))
        np.testing.assert_allclose(bounds.coherent_arg, bounds.decode_arg, rtol=1e-12)

    def test_zero_policy_all_zero(self):
        ens = build_uniform_grid([0.1, 0.2], [0.3])
        bounds = rate_bounds(zero_policy(ens))
        assert bounds == RateBounds(0.0, 0.0, 0.0, 0.0, 0.0)

    def test_expectation_against_oracle(self):
        rng = np.random.default_rng(11)
        ens = build_uniform_grid([0.1, 0.2, 0.3], [0.25, 0.35])
        policy = random_reduced_policy(ens, rng, slack=0.95)
        bounds = rate_bounds(policy)
        ea = ebc = er1 = er2 = 0.0
        for i in range(ens.n_states):
            s = (ens.s10[i], ens.s20[i], ens.s12[i], ens.s21[i])
            p = tuple(policy.matrix[i])
            la, lbc = oracles.state_log_args(s, p)
            ea += ens.probs[i] * la
            ebc += ens.probs[i] * lbc
            er1 += ens.probs[i] * oracles.state_r1(s, p)
            er2 += ens.probs[i] * oracles.state_r2(s, p)
        np.testing.assert_allclose(bounds.coherent_arg, ea, rtol=1e-12)
        np.testing.assert_allclose(bounds.decode_arg, ebc, rtol=1e-12)
        np.testing.assert_allclose(bounds.r1_bound, er1, rtol=1e-12)
        np.testing.assert_allclose(bounds.r2_bound, er2, rtol=1e-12)

    def test_monotone_in_active_components(self):
        # adding power to any active component never lowers the coherent
        # argument; adding routed power never lowers the decode argument
        rng = np.random.default_rng(5)
        ens = build_uniform_grid([0.1, 0.3], [0.2, 0.45], budgets=(10.0, 10.0))
        mask = support_matrix(ens)
        policy = random_reduced_policy(ens, rng, slack=0.2)
        base = rate_bounds(policy)
        for _ in range(50):
            i = rng.integers(ens.n_states)
            active = np.flatnonzero(mask[i])
            j = active[rng.integers(active.size)]
            bumped = policy.matrix.copy()
            bumped[i, j] += 0.3
            bounds = rate_bounds(PowerPolicy(ens, bumped))
            assert bounds.coherent_arg >= base.coherent_arg - 1e-15
            if j in (P12, P21):
                assert bounds.decode_arg >= base.decode_arg - 1e-15

    def test_scale_consistency(self):
        # doubling all gains and all noise variances changes nothing
        from coopmac.ensemble import NoiseVariances
        rng = np.random.default_rng(9)
        base = build_uniform_grid([0.1, 0.2], [0.3, 0.4])
        scaled = Ensemble(2.0 * np.asarray(base.gains), base.probs,
                          noise=NoiseVariances(2.0, 2.0, 2.0))
        policy = random_reduced_policy(base, rng, slack=0.9)
        twin = PowerPolicy(scaled, policy.matrix)
        a = rate_bounds(policy)
        b = rate_bounds(twin)
        np.testing.assert_allclose(
            (a.r1_bound, a.r2_bound, a.sum_bound),
            (b.r1_bound, b.r2_bound, b.sum_bound), rtol=1e-12)


class TestWeightedObjective:
    def test_symmetric_weights_give_sum_bound(self):
        ens = single_state_ensemble(1.0, 1.0, 3.0, 3.0)
        matrix = np.zeros((1, 6))
        matrix[0, P12] = 0.5
        matrix[0, PU1] = 0.5
        matrix[0, P21] = 0.5
        matrix[0, PU2] = 0.5
        policy = PowerPolicy(ens, matrix)
        bounds = rate_bounds(policy)
        assert weighted_objective(policy, (1.0, 1.0)) == pytest.approx(
            bounds.sum_bound, rel=1e-12)

    def test_weighted_decomposition(self):
        rng = np.random.default_rng(21)
        ens = build_uniform_grid([0.1, 0.2], [0.3, 0.4])
        policy = random_reduced_policy(ens, rng, slack=0.9)
        bounds = rate_bounds(policy)
        for mu in [(2.0, 1.0), (1.0, 2.0), (0.3, 0.1), (1.0, 0.0), (0.0, 1.0)]:
            expected = (min(mu) * bounds.sum_bound
                        + abs(mu[0] - mu[1])
                        * (bounds.r1_bound if mu[0] >= mu[1] else bounds.r2_bound))
            assert weighted_objective(policy, mu) == pytest.approx(expected, rel=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(23)
        ens = build_uniform_grid([0.1, 0.2], [0.15, 0.4])
        policy = random_reduced_policy(ens, rng, slack=0.8)
        s_rows = [(ens.s10[i], ens.s20[i], ens.s12[i], ens.s21[i])
                  for i in range(ens.n_states)]
        for mu in [(1.0, 1.0), (2.0, 1.0), (0.5, 1.5)]:
            expected = oracles.ensemble_objective(
                s_rows, ens.probs, policy.matrix, mu)
            np.testing.assert_allclose(weighted_objective(policy, mu),
                                       expected, rtol=1e-12)

    def test_invalid_weights_rejected(self):
        ens = build_uniform_grid([0.1], [0.3])
        policy = zero_policy(ens)
        with pytest.raises(ValueError):
            weighted_objective(policy, (0.0, 0.0))
        with pytest.raises(ValueError):
            weighted_objective(policy, (-1.0, 1.0))


class TestCornerRatePair:
    def test_pentagon_corner(self):
        bounds = RateBounds(r1_bound=1.0, r2_bound=1.0, sum_bound=1.5,
                            coherent_arg=1.5, decode_arg=1.6)
        point = corner_rate_pair(bounds, (2.0, 1.0))
        assert (point.r1, point.r2) == (1.0, 0.5)
        point = corner_rate_pair(bounds, (1.0, 2.0))
        assert (point.r1, point.r2) == (0.5, 1.0)

    def test_sum_bound_caps_heavy_user(self):
        bounds = RateBounds(2.0, 2.0, 1.0, 1.0, 1.2)
        point = corner_rate_pair(bounds, (2.0, 1.0))
        assert (point.r1, point.r2) == (1.0, 0.0)

    def test_rectangle_when_sum_bound_slack(self):
        bounds = RateBounds(1.0, 1.0, 3.0, 3.0, 3.5)
        point = corner_rate_pair(bounds, (2.0, 1.0))
        assert (point.r1, point.r2) == (1.0, 1.0)

    def test_tie_leans_on_user_1(self):
        bounds = RateBounds(1.0, 1.0, 1.5, 1.5, 1.6)
        point = corner_rate_pair(bounds, (1.0, 1.0))
        assert (point.r1, point.r2) == (1.0, 0.5)

    def test_weighted_value_agrees_inside_pentagon(self):
        bounds = RateBounds(1.0, 1.0, 1.5, 1.5, 1.7)
        point = corner_rate_pair(bounds, (2.0, 1.0))
        from coopmac.rates import weighted_value
        assert 2.0 * point.r1 + 1.0 * point.r2 == pytest.approx(
            weighted_value(bounds, (2.0, 1.0)), rel=1e-12)
