"""Channel-state ensembles for the two-user cooperative fading MAC.

A channel state holds the four link power gains of the network: h10 and
h20 from each user to the destination, h12 and h21 between the users.
Rates depend on gains only through the effective gains

    s_ij = h_ij / sigma_j^2

where sigma_j^2 is the noise variance at the receiver of link i -> j
(the destination is receiver 0).

An ensemble is a finite probability mass function over states together
with the per-user average power budgets. Every rate or power quantity
elsewhere in the package is an expectation under an ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseVariances",
    "ChannelState",
    "EffectiveGains",
    "Ensemble",
    "effective_gains",
    "build_uniform_grid",
    "build_rayleigh_mc",
]

PROB_TOL = 1e-12


@dataclass(frozen=True)
class NoiseVariances:
    """Receiver noise variances: destination, user 1, user 2."""

    sigma0_sq: float = 1.0
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0

    def __post_init__(self):
        for name in ("sigma0_sq", "sigma1_sq", "sigma2_sq"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ChannelState:
    """Link power gains of one fading state."""

    h10: float
    h20: float
    h12: float
    h21: float
    index: int = 0

    def __post_init__(self):
        for name in ("h10", "h20", "h12", "h21"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be nonnegative and finite, got {value!r}")


@dataclass(frozen=True)
class EffectiveGains:
    """Noise-normalized gains s_ij = h_ij / sigma_j^2 of one state."""

    s10: float
    s20: float
    s12: float
    s21: float


def effective_gains(state: ChannelState, noise: NoiseVariances) -> EffectiveGains:
    """Normalize the gains of one state by the receiving-end noise."""
    return EffectiveGains(
        s10=state.h10 / noise.sigma0_sq,
        s20=state.h20 / noise.sigma0_sq,
        s12=state.h12 / noise.sigma2_sq,
        s21=state.h21 / noise.sigma1_sq,
    )


class Ensemble:
    """Finite channel-state distribution plus noise and power budgets.

    Parameters
    ----------
    gains : array_like, shape (n, 4)
        Link gains per state, columns ordered h10, h20, h12, h21.
    probs : array_like, shape (n,)
        Strictly positive masses summing to 1 within ``PROB_TOL``.
    noise : NoiseVariances
    budgets : (float, float)
        Average power budgets (p1bar, p2bar), both positive.
    """

    def __init__(self, gains, probs, noise: NoiseVariances | None = None,
                 budgets=(1.0, 1.0)):
        gains = np.array(gains, dtype=float)
        probs = np.array(probs, dtype=float)
        if gains.ndim != 2 or gains.shape[1] != 4:
            raise ValueError(f"gains must have shape (n, 4), got {gains.shape}")
        n = gains.shape[0]
        if n == 0:
            raise ValueError("ensemble must contain at least one state")
        if probs.shape != (n,):
            raise ValueError(f"probs must have shape ({n},), got {probs.shape}")
        if not np.all(np.isfinite(gains)) or np.any(gains < 0.0):
            raise ValueError("gains must be nonnegative and finite")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise ValueError("probs must be strictly positive and finite")
        total = probs.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probs must sum to 1 within {PROB_TOL}, got {total!r}")
        budget1, budget2 = float(budgets[0]), float(budgets[1])
        if not np.isfinite(budget1) or budget1 <= 0.0:
            raise ValueError(f"budget1 must be positive and finite, got {budget1!r}")
        if not np.isfinite(budget2) or budget2 <= 0.0:
            raise ValueError(f"budget2 must be positive and finite, got {budget2!r}")
        if noise is None:
            noise = NoiseVariances()

        gains.setflags(write=False)
        probs.setflags(write=False)
        self.gains = gains
        self.probs = probs
        self.noise = noise
        self.budgets = (budget1, budget2)
        # effective gain columns, cached because every rate evaluation uses them
        self.s10 = np.ascontiguousarray(gains[:, 0]) / noise.sigma0_sq
        self.s20 = np.ascontiguousarray(gains[:, 1]) / noise.sigma0_sq
        self.s12 = np.ascontiguousarray(gains[:, 2]) / noise.sigma2_sq
        self.s21 = np.ascontiguousarray(gains[:, 3]) / noise.sigma1_sq
        for arr in (self.s10, self.s20, self.s12, self.s21):
            arr.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.gains.shape[0]

    def state(self, i: int) -> ChannelState:
        h10, h20, h12, h21 = self.gains[i]
        return ChannelState(h10=h10, h20=h20, h12=h12, h21=h21, index=int(i))

    def states(self) -> list[ChannelState]:
        return [self.state(i) for i in range(self.n_states)]

    def gains_at(self, i: int) -> EffectiveGains:
        return EffectiveGains(s10=self.s10[i], s20=self.s20[i],
                              s12=self.s12[i], s21=self.s21[i])

    def expectation(self, per_state_values) -> float:
        """Probability-weighted mean of a per-state vector."""
        values = np.asarray(per_state_values, dtype=float)
        if values.shape != (self.n_states,):
            raise ValueError(
                f"expected {self.n_states} per-state values, got shape {values.shape}")
        return float(self.probs @ values)


def build_uniform_grid(direct_values, inter_values, noise: NoiseVariances | None = None,
                       budgets=(1.0, 1.0), tie_inter_links: bool = False) -> Ensemble:
    """Equiprobable product-grid ensemble.

    The two direct links draw i.i.d. from ``direct_values`` and the two
    inter-user links draw i.i.d. from ``inter_values``; with
    ``tie_inter_links`` the inter-user links share one draw (h21 = h12).
    State order is the C-order product h10 outermost, h21 innermost, so
    a rebuild with the same value lists reproduces the ensemble exactly.
    """
    direct = np.asarray(direct_values, dtype=float)
    inter = np.asarray(inter_values, dtype=float)
    for name, values in (("direct_values", direct), ("inter_values", inter)):
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"{name} must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError(f"{name} must be nonnegative and finite")
    if tie_inter_links:
        h10, h20, h12 = np.meshgrid(direct, direct, inter, indexing="ij")
        columns = [h10.ravel(), h20.ravel(), h12.ravel(), h12.ravel()]
    else:
        h10, h20, h12, h21 = np.meshgrid(direct, direct, inter, inter, indexing="ij")
        columns = [h10.ravel(), h20.ravel(), h12.ravel(), h21.ravel()]
    gains = np.column_stack(columns)
    n = gains.shape[0]
    probs = np.full(n, 1.0 / n)
    return Ensemble(gains, probs, noise=noise, budgets=budgets)


def build_rayleigh_mc(mean_direct: float, mean_inter: float, n_samples: int,
                      seed: int, noise: NoiseVariances | None = None,
                      budgets=(1.0, 1.0), tie_inter_links: bool = False) -> Ensemble:
    """Equiprobable Monte Carlo ensemble of Rayleigh-fading power gains.

    Power gains are exponential with the given means. Sampling is
    pinned for reproducibility: a PCG64 generator seeded with ``seed``
    yields one uniform block of shape (n_samples, 4), columns ordered
    h10, h20, h12, h21, and each entry maps through the inverse CDF
    h = -mean * ln(1 - u). With ``tie_inter_links`` the block has three
    columns and h21 copies h12.
    """
    if not np.isfinite(mean_direct) or mean_direct <= 0.0:
        raise ValueError(f"mean_direct must be positive, got {mean_direct!r}")
    if not np.isfinite(mean_inter) or mean_inter <= 0.0:
        raise ValueError(f"mean_inter must be positive, got {mean_inter!r}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples!r}")
    gen = np.random.Generator(np.random.PCG64(seed))
    n_links = 3 if tie_inter_links else 4
    u = gen.random((int(n_samples), n_links))
    means = np.array([mean_direct, mean_direct, mean_inter, mean_inter][:n_links])
    h = -means * np.log1p(-u)
    if tie_inter_links:
        h = np.column_stack([h, h[:, 2]])
    probs = np.full(int(n_samples), 1.0 / int(n_samples))
    return Ensemble(h, probs, noise=noise, budgets=budgets)
