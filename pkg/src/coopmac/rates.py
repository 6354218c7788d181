"""Achievable-rate functionals for a policy under an ensemble.

All rates are in nats. The sum-rate bound is the smaller of two
expectations evaluated state by state:

  coherent argument   log(1 + s10 p1 + s20 p2 + 2 sqrt(s10 s20 pU1 pU2))
                      with p_i the user's total power, the bound seen by
                      the destination when the cooperative parts add
                      coherently, and

  decode argument     log of (1 + s10 p10 + s20 p20)
                      / ((1 + s12 p10)(1 + s21 p20))
                      * (1 + s12 (p10 + p12)) (1 + s21 (p20 + p21)),
                      the bound from each user having to decode the
                      partner's routed information.

The individual-rate bounds are

  r1 = E[log(1 + s12 p12 / (1 + s12 p10)) + log(1 + s10 p10)]

and symmetrically for r2. On a case-reduced policy one of p10, p12 is
zero per state, so r1 collapses to the routed or the direct term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import EffectiveGains, Ensemble
from .policy import P10, P12, PU1, P20, P21, PU2, PowerPolicy, PowerVector

__all__ = [
    "RateBounds",
    "RatePoint",
    "log_coherent_arg",
    "log_decode_arg",
    "rate_bounds",
    "weighted_objective",
    "corner_rate_pair",
]


@dataclass(frozen=True)
class RateBounds:
    """Expected rate bounds of a policy; all entries in nats.

    ``coherent_arg`` and ``decode_arg`` are the two expectations whose
    minimum is ``sum_bound``.
    """

    r1_bound: float
    r2_bound: float
    sum_bound: float
    coherent_arg: float
    decode_arg: float


@dataclass(frozen=True)
class RatePoint:
    """One achievable (r1, r2) pair and the weights that produced it."""

    r1: float
    r2: float
    mu: tuple[float, float]
    mode: str = ""


class StateTerms:
    """Per-state evaluation cache shared by rates and solver.

    Holds the per-state values of both min arguments and both
    individual bounds, plus the denominators their derivatives reuse.
    """

    __slots__ = ("coherent", "decode", "r1", "r2", "a_value",
                 "den_mac", "den_10", "den_20",
                 "den_12", "den_12t", "den_21", "den_21t")

    def __init__(self, gain_columns, matrix: np.ndarray):
        # gain_columns: anything with s10, s20, s12, s21 arrays (an Ensemble)
        s10, s20 = gain_columns.s10, gain_columns.s20
        s12, s21 = gain_columns.s12, gain_columns.s21
        p10 = matrix[:, P10]
        p12 = matrix[:, P12]
        pu1 = matrix[:, PU1]
        p20 = matrix[:, P20]
        p21 = matrix[:, P21]
        pu2 = matrix[:, PU2]

        total1 = p10 + p12 + pu1
        total2 = p20 + p21 + pu2
        # sqrt factors clamped at zero separately so exact zeros stay exact
        coherent_part = 2.0 * np.sqrt(s10 * s20) * (
            np.sqrt(np.maximum(pu1, 0.0)) * np.sqrt(np.maximum(pu2, 0.0)))
        a_increment = s10 * total1 + s20 * total2 + coherent_part

        inc_mac = s10 * p10 + s20 * p20
        inc_12 = s12 * p10
        inc_12t = s12 * (p10 + p12)
        inc_21 = s21 * p20
        inc_21t = s21 * (p20 + p21)

        self.a_value = 1.0 + a_increment
        self.den_mac = 1.0 + inc_mac
        self.den_10 = 1.0 + s10 * p10
        self.den_20 = 1.0 + s20 * p20
        self.den_12 = 1.0 + inc_12
        self.den_12t = 1.0 + inc_12t
        self.den_21 = 1.0 + inc_21
        self.den_21t = 1.0 + inc_21t

        log_12 = np.log1p(inc_12)
        log_12t = np.log1p(inc_12t)
        log_21 = np.log1p(inc_21)
        log_21t = np.log1p(inc_21t)

        self.coherent = np.log1p(a_increment)
        self.decode = np.log1p(inc_mac) - log_12 - log_21 + log_12t + log_21t
        self.r1 = log_12t - log_12 + np.log1p(s10 * p10)
        self.r2 = log_21t - log_21 + np.log1p(s20 * p20)


def state_terms(ensemble: Ensemble, matrix: np.ndarray) -> StateTerms:
    """Evaluate all per-state rate terms of a raw (n, 6) power matrix."""
    return StateTerms(ensemble, np.asarray(matrix, dtype=float))


def bounds_from_terms(ensemble: Ensemble, terms: StateTerms) -> RateBounds:
    probs = ensemble.probs
    coherent = float(probs @ terms.coherent)
    decode = float(probs @ terms.decode)
    return RateBounds(
        r1_bound=float(probs @ terms.r1),
        r2_bound=float(probs @ terms.r2),
        sum_bound=min(coherent, decode),
        coherent_arg=coherent,
        decode_arg=decode,
    )


class _GainColumns:
    """Adapter exposing one state's gains through the array interface."""

    __slots__ = ("s10", "s20", "s12", "s21")

    def __init__(self, gains: EffectiveGains):
        self.s10 = np.array([gains.s10])
        self.s20 = np.array([gains.s20])
        self.s12 = np.array([gains.s12])
        self.s21 = np.array([gains.s21])


def _single_state_terms(gains: EffectiveGains, powers: PowerVector) -> StateTerms:
    return StateTerms(_GainColumns(gains), powers.as_array()[None, :])


def log_coherent_arg(gains: EffectiveGains, powers: PowerVector) -> float:
    """Coherent-combining min argument of one state, in nats."""
    return float(_single_state_terms(gains, powers).coherent[0])


def log_decode_arg(gains: EffectiveGains, powers: PowerVector) -> float:
    """Partner-decoding min argument of one state, in nats."""
    return float(_single_state_terms(gains, powers).decode[0])


def rate_bounds(policy: PowerPolicy) -> RateBounds:
    """Expected bounds (r1, r2, sum) of a policy."""
    return bounds_from_terms(policy.ensemble,
                             state_terms(policy.ensemble, policy.matrix))


def check_weights(mu) -> tuple[float, float]:
    mu1, mu2 = float(mu[0]), float(mu[1])
    if not (np.isfinite(mu1) and np.isfinite(mu2)) or mu1 < 0.0 or mu2 < 0.0:
        raise ValueError(f"weights must be nonnegative and finite, got {mu!r}")
    if mu1 == 0.0 and mu2 == 0.0:
        raise ValueError("weights must not both be zero")
    return mu1, mu2


def weighted_value(bounds: RateBounds, mu) -> float:
    """mu-weighted objective from precomputed bounds."""
    mu1, mu2 = check_weights(mu)
    w_min = min(mu1, mu2)
    w_diff = abs(mu1 - mu2)
    lead = bounds.r1_bound if mu1 >= mu2 else bounds.r2_bound
    return w_min * bounds.sum_bound + w_diff * lead


def weighted_objective(policy: PowerPolicy, mu) -> float:
    """min(mu) * sum_bound + |mu1 - mu2| * r_i with i the heavier user.

    On a case-reduced policy this equals the weighted value of the
    dominant-corner rate pair whenever the corner is inside the
    per-user bounds; ties in mu lean on user 1.
    """
    return weighted_value(rate_bounds(policy), mu)


def corner_rate_pair(bounds: RateBounds, mu, mode: str = "") -> RatePoint:
    """Dominant corner of the pentagon for the given weights.

    The heavier user takes its full bound first (capped by the sum
    bound), the other user keeps the remainder. Ties lean on user 1.
    """
    mu1, mu2 = check_weights(mu)
    if mu1 >= mu2:
        r1 = min(bounds.r1_bound, bounds.sum_bound)
        r2 = min(bounds.r2_bound, max(bounds.sum_bound - r1, 0.0))
    else:
        r2 = min(bounds.r2_bound, bounds.sum_bound)
        r1 = min(bounds.r1_bound, max(bounds.sum_bound - r2, 0.0))
    return RatePoint(r1=float(r1), r2=float(r2), mu=(mu1, mu2), mode=mode)
