"""Structural checks on solved power policies.

A converged policy for the cooperative channel is expected to show four
kinds of structure, and this module measures how closely a given policy
matches each of them:

* the two averaged log terms entering the min of the weighted objective
  agree (``min_gap``),
* within a slice of states sharing the same direct gains, the relay
  powers follow a single-user waterfilling profile over the inter-user
  gain (``waterfilling_fit``),
* within such a slice the two coherent powers are proportional to each
  other (``coupling_check``),
* the stationarity system for the relay-only operating regime holds up
  to small residuals once consistent shadow prices are fitted
  (``fit_multipliers`` / ``kkt_residuals``).

None of these checks certify global optimality; they quantify how far a
numerical solution sits from the expected first-order structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble
from .policy import (
    P10, P12, PU1, P20, P21, PU2,
    CoopCase,
    PowerPolicy,
    classify_states,
)
from .rates import rate_bounds, state_terms

# Powers below this fraction of the user's budget count as "off" in all
# structural checks, absorbing finite-iteration solver residue.
ACTIVE_FRAC = 1e-4


class NotApplicableError(RuntimeError):
    """A structural check has no qualifying data to work with."""


def _as_policy(policy: PowerPolicy) -> PowerPolicy:
    if not isinstance(policy, PowerPolicy):
        raise TypeError("expected a PowerPolicy")
    return policy


def min_gap(policy: PowerPolicy) -> float:
    """Absolute gap between the two averaged arguments of the rate min.

    At an optimum the gap is zero: were one argument strictly smaller,
    power could be shifted between the coherent and relay components to
    raise it at no budget cost.
    """
    bounds = rate_bounds(_as_policy(policy))
    return abs(bounds.coherent_arg - bounds.decode_arg)


def slice_indices(ensemble: Ensemble, s10: float, s20: float,
                  rtol: float = 1e-9) -> np.ndarray:
    """Indices of states whose direct gains match (s10, s20).

    Matching is relative to ``rtol`` so that grid values reconstructed
    through parsing or arithmetic still hit their slice.
    """
    close1 = np.isclose(ensemble.s10, s10, rtol=rtol, atol=0.0)
    close2 = np.isclose(ensemble.s20, s20, rtol=rtol, atol=0.0)
    return np.flatnonzero(close1 & close2)


@dataclass(frozen=True)
class WaterfillingFit:
    """Fitted waterfilling profile for the two relay components.

    ``level_i`` is the fitted fill height: active relay powers satisfy
    p = level - 1/s up to the residual. ``threshold_i`` is its
    reciprocal; states with inter-user gain below the threshold carry no
    relay power.
    """

    level1: float
    level2: float
    residual: float
    abs_residual1: float
    abs_residual2: float
    mean_active1: float
    mean_active2: float
    n_active1: int
    n_active2: int

    @property
    def threshold1(self) -> float:
        return 1.0 / self.level1

    @property
    def threshold2(self) -> float:
        return 1.0 / self.level2


def _fit_one_level(powers: np.ndarray, gains: np.ndarray,
                   budget: float) -> tuple[float, float, float, int]:
    active = powers > ACTIVE_FRAC * budget
    if not np.any(active):
        raise NotApplicableError("no active relay powers in slice")
    level = float(np.mean(powers[active] + 1.0 / gains[active]))
    deviation = np.abs((level - 1.0 / gains[active]) - powers[active])
    return (level, float(deviation.max()),
            float(powers[active].mean()), int(active.sum()))


def waterfilling_fit(policy: PowerPolicy,
                     indices: np.ndarray) -> WaterfillingFit:
    """Fit fill levels to the relay powers on a fixed-direct-gain slice.

    For each user, states whose relay power exceeds the activity
    threshold contribute p + 1/s to the level estimate; the residual is
    the worst absolute deviation from the fitted profile, reported
    relative to the larger budget so it is comparable across runs.

    Raises NotApplicableError when a user has no active state in the
    slice.
    """
    policy = _as_policy(policy)
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise NotApplicableError("empty slice")
    ens = policy.ensemble
    p12 = policy.matrix[indices, P12]
    p21 = policy.matrix[indices, P21]
    level1, abs1, mean1, n1 = _fit_one_level(p12, ens.s12[indices],
                                             ens.budgets[0])
    level2, abs2, mean2, n2 = _fit_one_level(p21, ens.s21[indices],
                                             ens.budgets[1])
    residual = max(abs1 / ens.budgets[0], abs2 / ens.budgets[1])
    return WaterfillingFit(level1=level1, level2=level2, residual=residual,
                           abs_residual1=abs1, abs_residual2=abs2,
                           mean_active1=mean1, mean_active2=mean2,
                           n_active1=n1, n_active2=n2)


def coupling_check(policy: PowerPolicy, indices: np.ndarray) -> float:
    """Coefficient of variation of pU1/pU2 over a slice.

    With the direct gains fixed across the slice, stationarity ties the
    two coherent powers together linearly, so their ratio should be
    constant; the coefficient of variation measures the spread.

    Raises NotApplicableError with fewer than two states having both
    coherent powers active.
    """
    policy = _as_policy(policy)
    indices = np.asarray(indices, dtype=int)
    ens = policy.ensemble
    pu1 = policy.matrix[indices, PU1]
    pu2 = policy.matrix[indices, PU2]
    both = ((pu1 > ACTIVE_FRAC * ens.budgets[0])
            & (pu2 > ACTIVE_FRAC * ens.budgets[1]))
    if int(both.sum()) < 2:
        raise NotApplicableError("need at least two states with both "
                                 "coherent powers active")
    ratio = pu1[both] / pu2[both]
    return float(ratio.std() / ratio.mean())


@dataclass(frozen=True)
class Multipliers:
    """Fitted shadow prices for the relay-only stationarity system.

    ``budget_price_i`` prices user i's average-power constraint;
    ``coupling_price`` (negative at a maximum) prices the equality
    tying the coherent-sum term to the relay-rate term.
    """

    budget_price_1: float
    budget_price_2: float
    coupling_price: float

    @property
    def price_ratio(self) -> float:
        return self.budget_price_1 / self.budget_price_2


def _require_relay_only(ensemble: Ensemble) -> None:
    cases = classify_states(ensemble)
    if not np.all(cases == CoopCase.BOTH_RELAY):
        raise NotApplicableError("stationarity checks need every state "
                                 "in the both-relay regime")


def fit_multipliers(policy: PowerPolicy) -> Multipliers:
    """Fit consistent shadow prices from a converged relay-only policy.

    The fit inverts the active stationarity equalities on states where
    the corresponding power is on:

    * the price ratio comes from the linear coupling of the coherent
      powers, averaged over states with both active;
    * the relay equalities pin budget_price_1 / (1 + coupling_price);
    * the coherent equalities pin budget_price_1 / (-coupling_price).

    Both users' equalities are averaged so neither side is privileged,
    and the two pinned combinations are solved for the prices.
    """
    policy = _as_policy(policy)
    ens = policy.ensemble
    _require_relay_only(ens)
    matrix = policy.matrix
    thr1 = ACTIVE_FRAC * ens.budgets[0]
    thr2 = ACTIVE_FRAC * ens.budgets[1]
    pu_on = (matrix[:, PU1] > thr1) & (matrix[:, PU2] > thr2)
    if not np.any(pu_on):
        raise NotApplicableError("no states with both coherent powers "
                                 "active")
    s10, s20 = ens.s10, ens.s20

    # price ratio t = budget_price_1 / budget_price_2 from the coupling
    # relation t^2 * s20 * pU1 = s10 * pU2
    t = float(np.mean(np.sqrt(
        s10[pu_on] * matrix[pu_on, PU2]
        / (s20[pu_on] * matrix[pu_on, PU1]))))

    # relay equalities: budget_price_1/(1 + coupling_price) equals the
    # relay marginal rate scaled by (s10 + t s20)/(t s20) on active
    # states (and symmetrically for user 2, mapped through t)
    estimates = []
    on1 = matrix[:, P12] > thr1
    if np.any(on1):
        s12 = ens.s12[on1]
        marginal = s12 / (1.0 + s12 * matrix[on1, P12])
        estimates.append(np.mean(
            marginal * (s10[on1] + t * s20[on1]) / (t * s20[on1])))
    on2 = matrix[:, P21] > thr2
    if np.any(on2):
        s21 = ens.s21[on2]
        marginal = s21 / (1.0 + s21 * matrix[on2, P21])
        estimates.append(t * np.mean(
            marginal * (s10[on2] + t * s20[on2]) / s10[on2]))
    if not estimates:
        raise NotApplicableError("no states with an active relay power")
    relay_pin = float(np.mean(estimates))

    # coherent equalities: budget_price_1/(-coupling_price) equals the
    # coherent marginal (s10 + t s20)/D averaged over active states
    terms = state_terms(ens, matrix)
    rho1 = np.mean((s10[pu_on] + t * s20[pu_on]) / terms.a_value[pu_on])
    rho2 = np.mean((s20[pu_on] + s10[pu_on] / t) / terms.a_value[pu_on])
    coherent_pin = float(0.5 * (rho1 + t * rho2))

    gamma = -relay_pin / (coherent_pin + relay_pin)
    price1 = coherent_pin * relay_pin / (coherent_pin + relay_pin)
    return Multipliers(budget_price_1=price1,
                       budget_price_2=price1 / t,
                       coupling_price=gamma)


KKT_CONDITIONS = ("relay_power_1", "relay_power_2",
                  "coherent_power_1", "coherent_power_2")


def kkt_residuals(policy: PowerPolicy,
                  multipliers: Multipliers | None = None) -> dict[str, float]:
    """Worst-state residual of each stationarity condition.

    Each condition is an inequality that must hold with equality when
    the matching power component is on, so the per-state residual is the
    absolute equality defect on active states and only the one-sided
    overshoot on inactive ones. Requires every state to be in the
    both-relay regime; multipliers are fitted from the policy when not
    supplied.
    """
    policy = _as_policy(policy)
    ens = policy.ensemble
    _require_relay_only(ens)
    if multipliers is None:
        multipliers = fit_multipliers(policy)
    lam1 = multipliers.budget_price_1
    lam2 = multipliers.budget_price_2
    gamma = multipliers.coupling_price
    t = multipliers.price_ratio
    matrix = policy.matrix
    s10, s20, s12, s21 = ens.s10, ens.s20, ens.s12, ens.s21
    terms = state_terms(ens, matrix)
    thr1 = ACTIVE_FRAC * ens.budgets[0]
    thr2 = ACTIVE_FRAC * ens.budgets[1]

    def condition(lhs, rhs, active):
        gap = lhs - rhs
        residual = np.where(active, np.abs(gap), np.maximum(gap, 0.0))
        return float(residual.max())

    mix = lam2 * s10 + lam1 * s20
    out = {
        "relay_power_1": condition(
            s12 / (1.0 + s12 * matrix[:, P12]),
            lam1 * lam1 * s20 / ((1.0 + gamma) * mix),
            matrix[:, P12] > thr1),
        "relay_power_2": condition(
            s21 / (1.0 + s21 * matrix[:, P21]),
            lam2 * lam2 * s10 / ((1.0 + gamma) * mix),
            matrix[:, P21] > thr2),
        "coherent_power_1": condition(
            -lam1,
            gamma * (s10 + t * s20) / terms.a_value,
            matrix[:, PU1] > thr1),
        "coherent_power_2": condition(
            -lam2,
            gamma * (s20 + s10 / t) / terms.a_value,
            matrix[:, PU2] > thr2),
    }
    return out


@dataclass
class StructureReport:
    """Bundle of structural-check outcomes for one policy.

    Checks that could not run (no qualifying slice data, or states
    outside the both-relay regime) are None and serialize as "n/a".
    """

    min_gap: float
    slice_gains: tuple[float, float] | None = None
    n_slice_states: int = 0
    water: WaterfillingFit | None = None
    coupling_ratio_cv: float | None = None
    multipliers: Multipliers | None = None
    kkt: dict[str, float] | None = None

    def to_text(self) -> str:
        def fmt(value) -> str:
            return "n/a" if value is None else format(value, ".12g")

        lines = [f"min_gap = {fmt(self.min_gap)}"]
        if self.slice_gains is not None:
            lines.append(f"slice_s10 = {fmt(self.slice_gains[0])}")
            lines.append(f"slice_s20 = {fmt(self.slice_gains[1])}")
            lines.append(f"slice_states = {self.n_slice_states}")
        water = self.water
        lines.append(f"water_level_1 = {fmt(water and water.level1)}")
        lines.append(f"water_level_2 = {fmt(water and water.level2)}")
        lines.append(
            f"water_threshold_1 = {fmt(water and water.threshold1)}")
        lines.append(
            f"water_threshold_2 = {fmt(water and water.threshold2)}")
        lines.append(f"water_residual = {fmt(water and water.residual)}")
        lines.append(
            f"coupling_ratio_cv = {fmt(self.coupling_ratio_cv)}")
        mult = self.multipliers
        lines.append(
            f"budget_price_1 = {fmt(mult and mult.budget_price_1)}")
        lines.append(
            f"budget_price_2 = {fmt(mult and mult.budget_price_2)}")
        lines.append(
            f"coupling_price = {fmt(mult and mult.coupling_price)}")
        for name in KKT_CONDITIONS:
            value = None if self.kkt is None else self.kkt[name]
            lines.append(f"kkt_{name} = {fmt(value)}")
        return "\n".join(lines) + "\n"


def structure_report(policy: PowerPolicy,
                     slice_gains: tuple[float, float] | None = None,
                     ) -> StructureReport:
    """Run every applicable structural check and collect the results.

    The slice-based checks (waterfilling fit, coupling ratio) run only
    when ``slice_gains`` selects a nonempty set of states; the
    stationarity residuals run only when the whole ensemble is in the
    both-relay regime.
    """
    policy = _as_policy(policy)
    report = StructureReport(min_gap=min_gap(policy))
    if slice_gains is not None:
        s10, s20 = float(slice_gains[0]), float(slice_gains[1])
        report.slice_gains = (s10, s20)
        indices = slice_indices(policy.ensemble, s10, s20)
        report.n_slice_states = int(indices.size)
        try:
            report.water = waterfilling_fit(policy, indices)
        except NotApplicableError:
            report.water = None
        try:
            report.coupling_ratio_cv = coupling_check(policy, indices)
        except NotApplicableError:
            report.coupling_ratio_cv = None
    try:
        report.multipliers = fit_multipliers(policy)
        report.kkt = kkt_residuals(policy, report.multipliers)
    except NotApplicableError:
        report.multipliers = None
        report.kkt = None
    return report
