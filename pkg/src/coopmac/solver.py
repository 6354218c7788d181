"""Projected supergradient ascent for the weighted-rate problem.

The objective min(mu) * sum_bound + |mu1 - mu2| * r_i is concave on the
case-reduced support. Each iteration takes one supergradient step, with
the min resolved by differentiating through whichever expectation is
currently smaller, then projects each user's components back onto

    { p >= 0,  E[p_i0 + p_ij + p_Ui] <= budget_i }.

Steps follow the diminishing schedule a / (b + sqrt(k)) scaled by
1 / ||g||, so iterates are not monotone; the best one seen is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble
from .policy import (
    P10, P12, PU1, P20, P21, PU2,
    USER1_COMPONENTS, USER2_COMPONENTS,
    PowerPolicy, support_matrix,
)
from .rates import StateTerms, check_weights

__all__ = [
    "SolverConfig",
    "SolveResult",
    "step_size",
    "project_user_budget",
    "supergradient",
    "optimize",
]

PROJECTION_TOL = 1e-12
MAX_BISECT_ITERS = 200


@dataclass(frozen=True)
class SolverConfig:
    """Step schedule and iteration budget.

    ``step_a`` and ``step_b`` are the constants of a / (b + sqrt(k)).
    ``eps_sqrt`` clamps the cooperative powers inside derivative
    formulas only, keeping the square-root slope finite at zero.
    """

    step_a: float = 50.0
    step_b: float = 5.0
    max_iters: int = 1000
    eps_sqrt: float = 1e-9
    grad_tol: float = 1e-12

    def __post_init__(self):
        if not np.isfinite(self.step_a) or self.step_a <= 0.0:
            raise ValueError(f"step_a must be positive, got {self.step_a!r}")
        if not np.isfinite(self.step_b) or self.step_b < 0.0:
            raise ValueError(f"step_b must be nonnegative, got {self.step_b!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters!r}")
        if self.eps_sqrt <= 0.0:
            raise ValueError(f"eps_sqrt must be positive, got {self.eps_sqrt!r}")
        if self.grad_tol < 0.0:
            raise ValueError(f"grad_tol must be nonnegative, got {self.grad_tol!r}")


@dataclass
class SolveResult:
    """Best iterate of one ascent run plus its per-iteration trace.

    Trace arrays are aligned: entry k describes the iterate produced by
    update k (objective value, running best, step length used, and
    whether the coherent argument was the smaller one there).
    """

    best_policy: PowerPolicy
    best_value: float
    iterations_run: int
    mu: tuple[float, float]
    objective_trace: np.ndarray
    best_trace: np.ndarray
    step_trace: np.ndarray
    branch_trace: np.ndarray


def step_size(k: int, a: float, b: float, grad_norm: float) -> float:
    """Diminishing step a / (b + sqrt(k)) / grad_norm."""
    if k < 0:
        raise ValueError(f"iteration index must be nonnegative, got {k!r}")
    if a <= 0.0 or b < 0.0:
        raise ValueError(f"need a > 0 and b >= 0, got a={a!r}, b={b!r}")
    denom = b + math.sqrt(k)
    if denom <= 0.0:
        raise ValueError("step denominator is zero; use b > 0 when starting at k = 0")
    if grad_norm <= 0.0:
        raise ValueError(f"grad_norm must be positive, got {grad_norm!r}")
    return a / denom / grad_norm


def project_user_budget(values, probs, budget: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum_h probs_h * sum_c x_hc <= budget}.

    ``values`` is one user's raw components, shape (n,) or (n, k) with
    one row per state. Negative entries clip to zero; if the weighted
    total still exceeds the budget, every entry shifts down by theta
    times its state probability, theta found by bisection (absolute
    tolerance ``PROJECTION_TOL``) on the clipped budget equation.
    """
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if values.ndim == 1:
        flat = values
        weights = probs
    elif values.ndim == 2:
        if values.shape[0] != probs.shape[0]:
            raise ValueError(
                f"values rows {values.shape[0]} do not match probs {probs.shape[0]}")
        flat = np.ascontiguousarray(values).ravel()
        weights = np.repeat(probs, values.shape[1])
    else:
        raise ValueError(f"values must be 1-D or 2-D, got shape {values.shape}")
    if not np.isfinite(budget) or budget <= 0.0:
        raise ValueError(f"budget must be positive, got {budget!r}")

    clipped = np.maximum(flat, 0.0)
    if float(weights @ clipped) <= budget:
        return clipped.reshape(values.shape)

    positive = flat > 0.0
    hi = float(np.max(flat[positive] / weights[positive]))
    lo = 0.0
    buf = np.empty_like(flat)
    for _ in range(MAX_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        np.multiply(weights, -mid, out=buf)
        buf += flat
        np.maximum(buf, 0.0, out=buf)
        if float(weights @ buf) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= PROJECTION_TOL:
            break
    # theta = hi keeps the result on the feasible side
    np.multiply(weights, -hi, out=buf)
    buf += flat
    np.maximum(buf, 0.0, out=buf)
    return buf.reshape(values.shape)


def _resolve_support(ensemble: Ensemble, support) -> np.ndarray:
    """Support mask as float 0/1 matrix, defaulting to the case reduction."""
    if support is None:
        mask = support_matrix(ensemble)
    else:
        mask = np.asarray(support, dtype=bool)
        if mask.shape == (6,):
            mask = np.broadcast_to(mask, (ensemble.n_states, 6))
        elif mask.shape != (ensemble.n_states, 6):
            raise ValueError(
                f"support must have shape (6,) or ({ensemble.n_states}, 6), "
                f"got {mask.shape}")
    return mask.astype(float)


def _weighted_gradient(ensemble: Ensemble, matrix, terms: StateTerms,
                       w_min: float, w_diff: float, lead: int,
                       branch_coherent: bool, support_f: np.ndarray,
                       eps_sqrt: float) -> np.ndarray:
    """Supergradient of the expectation objective, zero off support."""
    n = ensemble.n_states
    s10, s20 = ensemble.s10, ensemble.s20
    s12, s21 = ensemble.s12, ensemble.s21
    g = np.zeros((n, 6))
    if w_min > 0.0:
        if branch_coherent:
            ga = w_min / terms.a_value
            pu1 = np.maximum(matrix[:, PU1], eps_sqrt)
            pu2 = np.maximum(matrix[:, PU2], eps_sqrt)
            root = np.sqrt(s10 * s20)
            g[:, P10] = ga * s10
            g[:, P12] = ga * s10
            g[:, PU1] = ga * (s10 + root * np.sqrt(pu2 / pu1))
            g[:, P20] = ga * s20
            g[:, P21] = ga * s20
            g[:, PU2] = ga * (s20 + root * np.sqrt(pu1 / pu2))
        else:
            g[:, P10] = w_min * (s10 / terms.den_mac - s12 / terms.den_12
                                 + s12 / terms.den_12t)
            g[:, P12] = w_min * (s12 / terms.den_12t)
            g[:, P20] = w_min * (s20 / terms.den_mac - s21 / terms.den_21
                                 + s21 / terms.den_21t)
            g[:, P21] = w_min * (s21 / terms.den_21t)
    if w_diff > 0.0:
        if lead == 1:
            g[:, P10] += w_diff * (s12 / terms.den_12t - s12 / terms.den_12
                                   + s10 / terms.den_10)
            g[:, P12] += w_diff * (s12 / terms.den_12t)
        else:
            g[:, P20] += w_diff * (s21 / terms.den_21t - s21 / terms.den_21
                                   + s20 / terms.den_20)
            g[:, P21] += w_diff * (s21 / terms.den_21t)
    g *= ensemble.probs[:, None]
    g *= support_f
    return g


def supergradient(policy: PowerPolicy, mu, support=None,
                  eps_sqrt: float = 1e-9) -> np.ndarray:
    """Supergradient of the weighted objective at a policy, shape (n, 6).

    The min over the two sum-rate arguments is resolved by the branch
    whose expectation is currently smaller, the coherent one on ties.
    Entries outside the active support are zero.
    """
    mu1, mu2 = check_weights(mu)
    ensemble = policy.ensemble
    terms = StateTerms(ensemble, policy.matrix)
    coherent = float(ensemble.probs @ terms.coherent)
    decode = float(ensemble.probs @ terms.decode)
    return _weighted_gradient(
        ensemble, policy.matrix, terms,
        w_min=min(mu1, mu2), w_diff=abs(mu1 - mu2),
        lead=1 if mu1 >= mu2 else 2,
        branch_coherent=coherent <= decode,
        support_f=_resolve_support(ensemble, support),
        eps_sqrt=eps_sqrt)


def _uniform_split_init(ensemble: Ensemble, support_f: np.ndarray) -> np.ndarray:
    """Each user's budget split evenly over its active components, per state."""
    matrix = np.zeros((ensemble.n_states, 6))
    for cols, budget in ((USER1_COMPONENTS, ensemble.budgets[0]),
                         (USER2_COMPONENTS, ensemble.budgets[1])):
        cols = list(cols)
        counts = support_f[:, cols].sum(axis=1)
        share = np.divide(budget, counts, out=np.zeros_like(counts),
                          where=counts > 0.0)
        matrix[:, cols] = share[:, None] * support_f[:, cols]
    return matrix


def _evaluate(ensemble: Ensemble, matrix, w_min, w_diff, lead):
    terms = StateTerms(ensemble, matrix)
    probs = ensemble.probs
    coherent = float(probs @ terms.coherent)
    decode = float(probs @ terms.decode)
    if lead == 1:
        lead_rate = float(probs @ terms.r1)
    else:
        lead_rate = float(probs @ terms.r2)
    value = w_min * min(coherent, decode) + w_diff * lead_rate
    return terms, value, coherent <= decode


def _warm_start(ensemble: Ensemble, initial,
                support_f: np.ndarray) -> np.ndarray:
    """Start matrix from a caller-supplied policy: masked and re-projected."""
    if isinstance(initial, PowerPolicy):
        matrix = initial.matrix
    else:
        matrix = np.asarray(initial, dtype=float)
    if matrix.shape != (ensemble.n_states, 6):
        raise ValueError(
            f"initial policy must have shape ({ensemble.n_states}, 6), "
            f"got {matrix.shape}")
    matrix = matrix * support_f
    matrix[:, :3] = project_user_budget(matrix[:, :3], ensemble.probs,
                                        ensemble.budgets[0])
    matrix[:, 3:] = project_user_budget(matrix[:, 3:], ensemble.probs,
                                        ensemble.budgets[1])
    return matrix


def optimize(ensemble: Ensemble, mu, config: SolverConfig | None = None,
             support=None, constant_across_states: bool = False,
             initial=None) -> SolveResult:
    """Maximize the weighted rate objective by projected supergradient ascent.

    Parameters
    ----------
    mu : pair of nonnegative weights, not both zero.
    support : optional component mask, shape (6,) or (n, 6). When given
        it replaces the per-state case reduction, which is how the
        restricted baseline schemes are run.
    constant_across_states : optimize one power split broadcast to all
        states instead of per-state powers. Requires a state-independent
        support mask (default: all six components).
    initial : optional warm start, a PowerPolicy or (n, 6) array. It is
        masked to the active support and re-projected onto the budgets
        before the first update. Useful for running a coarse schedule
        first and polishing with smaller steps afterwards.

    By default starts from the uniform split of each budget over the
    active components, runs ``max_iters`` updates (stopping early only
    when the supergradient norm falls below ``grad_tol``) and returns
    the best iterate seen together with the full trace.
    """
    mu1, mu2 = check_weights(mu)
    if config is None:
        config = SolverConfig()
    if config.step_b == 0.0:
        raise ValueError("step_b must be positive: the first step uses k = 0")
    w_min = min(mu1, mu2)
    w_diff = abs(mu1 - mu2)
    lead = 1 if mu1 >= mu2 else 2

    support_f = _resolve_support(ensemble, support)
    if constant_across_states:
        if initial is not None:
            raise ValueError(
                "initial warm starts apply to per-state optimization only")
        if support is None:
            support_f = np.ones((ensemble.n_states, 6))
        if not np.all(support_f == support_f[0]):
            raise ValueError(
                "constant_across_states requires a state-independent support")
        return _optimize_constant(ensemble, (mu1, mu2), config,
                                  support_f[0], w_min, w_diff, lead)

    probs = ensemble.probs
    budget1, budget2 = ensemble.budgets
    if initial is None:
        current = _uniform_split_init(ensemble, support_f)
    else:
        current = _warm_start(ensemble, initial, support_f)
    terms, value, branch_coherent = _evaluate(ensemble, current, w_min, w_diff, lead)

    max_iters = config.max_iters
    objective_trace = np.empty(max_iters)
    step_trace = np.empty(max_iters)
    branch_trace = np.empty(max_iters, dtype=bool)
    best_value = -np.inf
    best_matrix = current
    rows = 0

    for k in range(max_iters):
        grad = _weighted_gradient(ensemble, current, terms, w_min, w_diff, lead,
                                  branch_coherent, support_f, config.eps_sqrt)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < config.grad_tol:
            break
        alpha = step_size(k, config.step_a, config.step_b, grad_norm)
        current = current + alpha * grad
        current[:, :3] = project_user_budget(current[:, :3], probs, budget1)
        current[:, 3:] = project_user_budget(current[:, 3:], probs, budget2)
        terms, value, branch_coherent = _evaluate(ensemble, current,
                                                  w_min, w_diff, lead)
        objective_trace[rows] = value
        step_trace[rows] = alpha
        branch_trace[rows] = branch_coherent
        if value > best_value:
            best_value = value
            best_matrix = current.copy()
        rows += 1

    if rows == 0:
        # converged before the first update; fall back to the start point
        best_value = value
        best_matrix = current
    return SolveResult(
        best_policy=PowerPolicy(ensemble, best_matrix),
        best_value=float(best_value),
        iterations_run=rows,
        mu=(mu1, mu2),
        objective_trace=objective_trace[:rows].copy(),
        best_trace=np.maximum.accumulate(objective_trace[:rows]),
        step_trace=step_trace[:rows].copy(),
        branch_trace=branch_trace[:rows].copy(),
    )


def _optimize_constant(ensemble: Ensemble, mu, config: SolverConfig,
                       mask_row: np.ndarray, w_min: float, w_diff: float,
                       lead: int) -> SolveResult:
    """Ascent on one power split shared by all states."""
    n = ensemble.n_states
    budget1, budget2 = ensemble.budgets
    support_f = np.broadcast_to(mask_row, (n, 6))
    one = np.ones(1)

    split = np.zeros(6)
    for cols, budget in ((USER1_COMPONENTS, budget1), (USER2_COMPONENTS, budget2)):
        cols = list(cols)
        count = mask_row[cols].sum()
        if count > 0.0:
            split[cols] = budget / count * mask_row[cols]

    def broadcast(q):
        return np.broadcast_to(q, (n, 6))

    terms, value, branch_coherent = _evaluate(ensemble, broadcast(split),
                                              w_min, w_diff, lead)
    max_iters = config.max_iters
    objective_trace = np.empty(max_iters)
    step_trace = np.empty(max_iters)
    branch_trace = np.empty(max_iters, dtype=bool)
    best_value = -np.inf
    best_split = split
    rows = 0

    for k in range(max_iters):
        grad_states = _weighted_gradient(ensemble, broadcast(split), terms,
                                         w_min, w_diff, lead, branch_coherent,
                                         support_f, config.eps_sqrt)
        grad = grad_states.sum(axis=0)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < config.grad_tol:
            break
        alpha = step_size(k, config.step_a, config.step_b, grad_norm)
        split = split + alpha * grad
        split[:3] = project_user_budget(split[None, :3], one, budget1)[0]
        split[3:] = project_user_budget(split[None, 3:], one, budget2)[0]
        terms, value, branch_coherent = _evaluate(ensemble, broadcast(split),
                                                  w_min, w_diff, lead)
        objective_trace[rows] = value
        step_trace[rows] = alpha
        branch_trace[rows] = branch_coherent
        if value > best_value:
            best_value = value
            best_split = split.copy()
        rows += 1

    if rows == 0:
        best_value = value
        best_split = split
    return SolveResult(
        best_policy=PowerPolicy(ensemble, np.tile(best_split, (n, 1))),
        best_value=float(best_value),
        iterations_run=rows,
        mu=(float(mu[0]), float(mu[1])),
        objective_trace=objective_trace[:rows].copy(),
        best_trace=np.maximum.accumulate(objective_trace[:rows]),
        step_trace=step_trace[:rows].copy(),
        branch_trace=branch_trace[:rows].copy(),
    )
