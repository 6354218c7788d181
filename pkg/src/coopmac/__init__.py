"""Power allocation and achievable rate regions for the two-user
cooperative fading multiple-access channel.

The package is organized around a small pipeline:

* :mod:`coopmac.ensemble` builds finite fading-state ensembles and the
  effective channel gains seen by the receivers.
* :mod:`coopmac.policy` holds per-state power allocations and the
  cooperation-case bookkeeping that zeroes dominated components.
* :mod:`coopmac.rates` evaluates the achievable-rate bounds and the
  weighted objective for a policy.
* :mod:`coopmac.solver` maximizes the objective with a projected
  supergradient ascent over the per-user average power budgets.
* :mod:`coopmac.verify` checks the structural optimality properties of
  a solved policy (waterfilling levels, multiplier consistency).
* :mod:`coopmac.region` sweeps weight vectors to trace rate regions
  for the cooperative and baseline schemes.
* :mod:`coopmac.scenario` and :mod:`coopmac.artifacts` cover the
  experiment configuration files and the deterministic CSV outputs
  used by the command-line interface in :mod:`coopmac.cli`.
"""

from .artifacts import read_policy_csv
from .ensemble import (
    ChannelState,
    EffectiveGains,
    Ensemble,
    NoiseVariances,
    build_rayleigh_mc,
    build_uniform_grid,
    effective_gains,
)
from .policy import (
    CoopCase,
    PowerPolicy,
    PowerVector,
    classify_case,
    classify_states,
    constant_policy,
    zero_policy,
)
from .rates import (
    RateBounds,
    RatePoint,
    corner_rate_pair,
    rate_bounds,
    weighted_value,
)
from .region import (
    RegionResult,
    SchemeMode,
    convex_hull,
    default_weights,
    points_below_hull,
    solve_mode,
    sweep,
)
from .scenario import Scenario, load_scenario, preset_names
from .solver import SolveResult, SolverConfig, optimize
from .verify import StructureReport, structure_report

__all__ = [
    "ChannelState",
    "CoopCase",
    "EffectiveGains",
    "Ensemble",
    "NoiseVariances",
    "PowerPolicy",
    "PowerVector",
    "RateBounds",
    "RatePoint",
    "RegionResult",
    "Scenario",
    "SchemeMode",
    "SolveResult",
    "SolverConfig",
    "StructureReport",
    "build_rayleigh_mc",
    "build_uniform_grid",
    "classify_case",
    "classify_states",
    "constant_policy",
    "convex_hull",
    "corner_rate_pair",
    "default_weights",
    "effective_gains",
    "load_scenario",
    "optimize",
    "points_below_hull",
    "preset_names",
    "rate_bounds",
    "read_policy_csv",
    "solve_mode",
    "structure_report",
    "sweep",
    "weighted_value",
    "zero_policy",
]
