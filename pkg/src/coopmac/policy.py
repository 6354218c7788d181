"""Per-state transmit power policies and the case reduction.

Each user splits its transmit power three ways per state. For user 1:
p10 carries fresh information straight to the destination, p12 routes
it through the partner, and pU1 is the cooperative part that the
destination combines coherently with the partner's pU2. User 2 has
p20, p21, pU2 symmetrically.

Comparing each inter-user effective gain with the matching direct gain
splits the states into four cases. At a weighted-rate optimum the
losing path of each comparison carries no power, so only four of the
six components per state can be active. When neither inter-user link
wins, the relay components are the ones pinned to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .ensemble import EffectiveGains, Ensemble

__all__ = [
    "P10", "P12", "PU1", "P20", "P21", "PU2",
    "COMPONENT_NAMES", "USER1_COMPONENTS", "USER2_COMPONENTS",
    "CoopCase", "classify_case", "classify_states",
    "active_support", "support_matrix",
    "PowerVector", "PowerPolicy", "zero_policy", "constant_policy",
]

# column order of every policy matrix
P10, P12, PU1, P20, P21, PU2 = range(6)
COMPONENT_NAMES = ("p10", "p12", "pU1", "p20", "p21", "pU2")
USER1_COMPONENTS = (P10, P12, PU1)
USER2_COMPONENTS = (P20, P21, PU2)

BUDGET_TOL = 1e-9


class CoopCase(IntEnum):
    """Which components may carry power at an optimum of a state."""

    BOTH_RELAY = 1       # s12 > s10 and s21 > s20
    RELAY1_DIRECT2 = 2   # s12 > s10, s21 <= s20
    DIRECT1_RELAY2 = 3   # s12 <= s10, s21 > s20
    BOTH_DIRECT = 4      # neither strict comparison favors the partner route


_SUPPORTS = {
    CoopCase.BOTH_RELAY:     (False, True, True, False, True, True),
    CoopCase.RELAY1_DIRECT2: (False, True, True, True, False, True),
    CoopCase.DIRECT1_RELAY2: (True, False, True, False, True, True),
    CoopCase.BOTH_DIRECT:    (True, False, True, True, False, True),
}


def classify_case(gains: EffectiveGains) -> CoopCase:
    """Classify one state; strict comparisons pick the partner route."""
    relay1 = gains.s12 > gains.s10
    relay2 = gains.s21 > gains.s20
    if relay1 and relay2:
        return CoopCase.BOTH_RELAY
    if relay1:
        return CoopCase.RELAY1_DIRECT2
    if relay2:
        return CoopCase.DIRECT1_RELAY2
    return CoopCase.BOTH_DIRECT


def classify_states(ensemble: Ensemble) -> np.ndarray:
    """Vector of case ids (ints 1..4), one per state."""
    relay1 = ensemble.s12 > ensemble.s10
    relay2 = ensemble.s21 > ensemble.s20
    cases = np.full(ensemble.n_states, int(CoopCase.BOTH_DIRECT))
    cases[relay1 & relay2] = int(CoopCase.BOTH_RELAY)
    cases[relay1 & ~relay2] = int(CoopCase.RELAY1_DIRECT2)
    cases[~relay1 & relay2] = int(CoopCase.DIRECT1_RELAY2)
    return cases


def active_support(case: CoopCase) -> np.ndarray:
    """Boolean mask over COMPONENT_NAMES of the components kept active."""
    return np.array(_SUPPORTS[CoopCase(case)], dtype=bool)


def support_matrix(ensemble: Ensemble) -> np.ndarray:
    """Per-state (n, 6) active-support mask from the case reduction."""
    relay1 = ensemble.s12 > ensemble.s10
    relay2 = ensemble.s21 > ensemble.s20
    mask = np.empty((ensemble.n_states, 6), dtype=bool)
    mask[:, P10] = ~relay1
    mask[:, P12] = relay1
    mask[:, PU1] = True
    mask[:, P20] = ~relay2
    mask[:, P21] = relay2
    mask[:, PU2] = True
    return mask


@dataclass(frozen=True)
class PowerVector:
    """One state's power split, in COMPONENT_NAMES order."""

    p10: float = 0.0
    p12: float = 0.0
    pU1: float = 0.0
    p20: float = 0.0
    p21: float = 0.0
    pU2: float = 0.0

    def __post_init__(self):
        for name in COMPONENT_NAMES:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be nonnegative and finite, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p10, self.p12, self.pU1,
                         self.p20, self.p21, self.pU2])


class PowerPolicy:
    """Nonnegative (n, 6) power matrix aligned with an ensemble.

    Construction checks alignment, nonnegativity and the per-user
    average budgets E[p_i0 + p_ij + p_Ui] <= budget_i (tolerance
    ``BUDGET_TOL``). Columns follow COMPONENT_NAMES.
    """

    def __init__(self, ensemble: Ensemble, matrix):
        matrix = np.array(matrix, dtype=float)
        n = ensemble.n_states
        if matrix.shape != (n, 6):
            raise ValueError(f"policy matrix must have shape ({n}, 6), got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("policy matrix must be finite")
        if np.any(matrix < 0.0):
            raise ValueError("policy components must be nonnegative")
        user1 = float(ensemble.probs @ matrix[:, USER1_COMPONENTS].sum(axis=1))
        user2 = float(ensemble.probs @ matrix[:, USER2_COMPONENTS].sum(axis=1))
        budget1, budget2 = ensemble.budgets
        if user1 > budget1 + BUDGET_TOL:
            raise ValueError(
                f"user 1 average power {user1!r} exceeds budget {budget1!r}")
        if user2 > budget2 + BUDGET_TOL:
            raise ValueError(
                f"user 2 average power {user2!r} exceeds budget {budget2!r}")
        matrix.setflags(write=False)
        self.ensemble = ensemble
        self.matrix = matrix

    def average_powers(self) -> tuple[float, float]:
        """Expected total transmit power per user."""
        probs = self.ensemble.probs
        return (
            float(probs @ self.matrix[:, USER1_COMPONENTS].sum(axis=1)),
            float(probs @ self.matrix[:, USER2_COMPONENTS].sum(axis=1)),
        )

    def is_reduced(self) -> bool:
        """True when every component outside the case support is exactly 0."""
        return not np.any(self.matrix[~support_matrix(self.ensemble)])


def zero_policy(ensemble: Ensemble) -> PowerPolicy:
    """All-silent policy; feasible for any budgets."""
    return PowerPolicy(ensemble, np.zeros((ensemble.n_states, 6)))


def constant_policy(ensemble: Ensemble, vector) -> PowerPolicy:
    """Broadcast one power split (PowerVector or length-6 array) to
    every state."""
    row = vector.as_array() if isinstance(vector, PowerVector) \
        else np.asarray(vector, dtype=float)
    matrix = np.tile(row, (ensemble.n_states, 1))
    return PowerPolicy(ensemble, matrix)
