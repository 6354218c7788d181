"""Rate-region sweeps and baseline comparisons.

A rate region is traced by maximizing the weighted rate objective for a
fan of weight vectors, extracting the corner point each weight favors,
and taking the upper-right convex hull of the collected points. Four
scheme modes reproduce the standard comparison curves: full cooperation
with power control, cooperation with a static power split, conventional
power control without cooperation, and the fixed-power baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ensemble import Ensemble
from .policy import P10, P20, PowerPolicy, constant_policy
from .rates import RatePoint, check_weights, corner_rate_pair, rate_bounds
from .solver import SolveResult, SolverConfig, optimize


class SchemeMode(Enum):
    """The four transmission schemes compared against each other."""

    COOP_POWER_CONTROL = "CoopPowerControl"
    COOP_FIXED_POWER = "CoopFixedPower"
    POWER_CONTROL_ONLY = "PowerControlOnly"
    FIXED_POWER_ONLY = "FixedPowerOnly"


_DIRECT_MASK = np.zeros(6, dtype=bool)
_DIRECT_MASK[[P10, P20]] = True


@dataclass(frozen=True)
class ModeSpec:
    """How a scheme mode constrains the optimization.

    ``mask`` limits the usable components (None means the per-state
    reduced support), ``state_dependent`` allows the split to adapt to
    the channel state, and ``optimized`` is False for the baseline whose
    policy is fully determined without solving.
    """

    mask: np.ndarray | None
    state_dependent: bool
    optimized: bool


def apply_mode(mode: SchemeMode) -> ModeSpec:
    if mode is SchemeMode.COOP_POWER_CONTROL:
        return ModeSpec(mask=None, state_dependent=True, optimized=True)
    if mode is SchemeMode.COOP_FIXED_POWER:
        return ModeSpec(mask=np.ones(6, dtype=bool), state_dependent=False,
                        optimized=True)
    if mode is SchemeMode.POWER_CONTROL_ONLY:
        return ModeSpec(mask=_DIRECT_MASK.copy(), state_dependent=True,
                        optimized=True)
    if mode is SchemeMode.FIXED_POWER_ONLY:
        return ModeSpec(mask=_DIRECT_MASK.copy(), state_dependent=False,
                        optimized=False)
    raise ValueError(f"unknown scheme mode: {mode!r}")


def fixed_power_policy(ensemble: Ensemble) -> PowerPolicy:
    """The no-adaptation baseline: each user sends its full budget on
    the direct component in every state."""
    vector = np.zeros(6)
    vector[P10] = ensemble.budgets[0]
    vector[P20] = ensemble.budgets[1]
    return constant_policy(ensemble, vector)


def solve_mode(ensemble: Ensemble, mode: SchemeMode,
               mu: tuple[float, float],
               config: SolverConfig | None = None,
               ) -> tuple[PowerPolicy, SolveResult | None]:
    """Produce the mode's policy for one weight vector.

    Returns the policy together with the solver result, which is None
    for the fixed-power baseline (nothing to optimize there).
    """
    spec = apply_mode(mode)
    if not spec.optimized:
        return fixed_power_policy(ensemble), None
    result = optimize(ensemble, mu, config, support=spec.mask,
                      constant_across_states=not spec.state_dependent)
    return result.best_policy, result


def default_weights(n: int = 17) -> list[tuple[float, float]]:
    """Weight fan (cos phi, sin phi) on a uniform grid over the first
    quadrant, endpoints snapped to the exact axis weights."""
    if n < 1:
        raise ValueError("need at least one weight")
    phi = np.linspace(0.0, np.pi / 2.0, n)
    raw = np.column_stack([np.cos(phi), np.sin(phi)])
    raw[np.abs(raw) < 1e-12] = 0.0
    return [(float(a), float(b)) for a, b in raw]


def convex_hull(points) -> np.ndarray:
    """Upper-right boundary of the convex hull of rate points.

    The two axis projections (0, max r2) and (max r1, 0) are always
    part of the boundary, reflecting that either user may stay silent.
    Returns the boundary polyline ordered by increasing r1; collinear
    interior points are dropped.
    """
    pairs = _as_pairs(points)
    if pairs.shape[0] == 0:
        raise ValueError("convex hull needs at least one point")
    augmented = np.vstack([pairs,
                           [0.0, pairs[:, 1].max()],
                           [pairs[:, 0].max(), 0.0]])
    unique = np.unique(augmented, axis=0)
    # order by r1 ascending, then r2 descending, and walk the upper
    # chain: pop the middle point whenever the turn is not clockwise
    order = np.lexsort((-unique[:, 1], unique[:, 0]))
    chain: list[np.ndarray] = []
    for row in unique[order]:
        while len(chain) >= 2:
            o, a = chain[-2], chain[-1]
            cross = ((a[0] - o[0]) * (row[1] - o[1])
                     - (a[1] - o[1]) * (row[0] - o[0]))
            if cross >= 0.0:
                chain.pop()
            else:
                break
        chain.append(row)
    return np.array(chain)


def _as_pairs(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        pairs = np.atleast_2d(np.asarray(points, dtype=float))
    else:
        pairs = np.array([[p.r1, p.r2] for p in points], dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("points must be (n, 2) rate pairs")
    if np.any(pairs < 0.0) or not np.all(np.isfinite(pairs)):
        raise ValueError("rate pairs must be finite and nonnegative")
    return pairs


def points_below_hull(points, hull: np.ndarray, tol: float = 1e-9) -> bool:
    """True when every point lies on or below the hull polyline."""
    pairs = _as_pairs(points)
    # drop the vertical tail segment so interpolation sees the upper
    # boundary value at the rightmost r1
    keep = np.concatenate([[True], np.diff(hull[:, 0]) > 0.0])
    r1, r2 = hull[keep, 0], hull[keep, 1]
    for x, y in pairs:
        if x > r1[-1] + tol:
            return False
        boundary = float(np.interp(x, r1, r2))
        if y > boundary + tol:
            return False
    return True


@dataclass
class RegionResult:
    """Swept rate points for one scheme plus their hull boundary."""

    mode: SchemeMode
    points: list[RatePoint]
    hull: np.ndarray
    on_hull: list[bool] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def max_sum_rate(self) -> float:
        return max(p.r1 + p.r2 for p in self.points)


def sweep(ensemble: Ensemble, mode: SchemeMode,
          weights=None, config: SolverConfig | None = None) -> RegionResult:
    """Trace one scheme's rate region over a fan of weights.

    Each weight vector is solved under the mode's restrictions, the
    corner of the resulting rate pentagon favored by that weight is
    collected, and the upper-right hull of all corners is returned with
    per-point hull membership flags.
    """
    if weights is None:
        weights = default_weights()
    weights = [check_weights(mu) for mu in weights]
    if not weights:
        raise ValueError("weight sweep needs at least one weight pair")
    points: list[RatePoint] = []
    values: list[float] = []
    for mu in weights:
        policy, result = solve_mode(ensemble, mode, mu, config)
        bounds = rate_bounds(policy)
        points.append(corner_rate_pair(bounds, mu, mode=mode.value))
        values.append(result.best_value if result is not None
                      else mu[0] * points[-1].r1 + mu[1] * points[-1].r2)
    hull = convex_hull(points)
    on_hull = [bool(np.any(np.all(np.isclose(hull, [p.r1, p.r2],
                                             rtol=1e-12, atol=1e-12),
                                  axis=1)))
               for p in points]
    return RegionResult(mode=mode, points=points, hull=hull,
                        on_hull=on_hull, values=values)
