"""Involutive MCMC samplers for the sequence and multiset model families.

A chain alternates the two moves of :mod:`pathnets.moves` (edit allocation
with probability ``beta``, whole-path insertion/deletion otherwise).  The
multiset sampler runs on an extended space of orderings: the stored canonical
order stands in for the arbitrary ordering, and the acceptance ratio carries
the ordering-count correction ``A(E)/A(E')``.

Proposals leaving the bounded space (or producing an empty path or an empty
collection) get acceptance probability zero; this keeps the chain stationary
on the bounded space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Observation, canonicalize, in_bounds, multiplicity_profile
from .models import SIMParams, SISParams
from .moves import MoveConfig, propose


@dataclass(frozen=True)
class ChainConfig:
    """Sample size, burn-in and lag of one chain, plus the move tuning."""

    iterations: int
    burn_in: int = 0
    lag: int = 1
    move: MoveConfig = field(default_factory=MoveConfig)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.iterations < 1 or self.burn_in < 0 or self.lag < 1:
            raise ValueError(f"invalid chain configuration {self}")

    @property
    def total_steps(self) -> int:
        return self.burn_in + (self.iterations - 1) * self.lag + 1


@dataclass
class ChainResult:
    """Recorded states with their distances to the mode and move diagnostics."""

    samples: list
    distances: list
    proposed: dict
    accepted: dict
    final_state: Observation

    def acceptance_rates(self) -> dict:
        return {
            kind: (self.accepted[kind] / self.proposed[kind]) if self.proposed[kind] else 0.0
            for kind in self.proposed
        }


def a_count(E: Observation) -> int:
    """Number of distinct orderings of a multiset of paths (multinomial)."""
    n = len(E)
    out = math.factorial(n)
    for _, w in multiplicity_profile(E):
        out //= math.factorial(w)
    return out


def log_a_count(E: Observation) -> float:
    """log of :func:`a_count`, safe for large collections."""
    total = math.lgamma(len(E) + 1)
    for _, w in multiplicity_profile(E):
        total -= math.lgamma(w + 1)
    return total


def _supported(obs: Observation, bounds) -> bool:
    return len(obs) > 0 and all(len(p) > 0 for p in obs) and in_bounds(obs, bounds)


def _run_chain(params, chain: ChainConfig, init, rng, multiset: bool) -> ChainResult:
    if rng is None:
        rng = np.random.default_rng(chain.seed)
    bounds = params.bounds
    metric = params.metric
    cfg = chain.move
    state = params.mode if init is None else tuple(tuple(p) for p in init)
    if multiset:
        state = canonicalize(state)
    if not _supported(state, bounds):
        raise ValueError("initial state lies outside the bounded space")
    dist = metric.distance(state, params.mode)
    log_a = log_a_count(state) if multiset else 0.0

    samples, distances = [], []
    proposed = {"edit_alloc": 0, "path_id": 0}
    accepted = {"edit_alloc": 0, "path_id": 0}
    for step in range(1, chain.total_steps + 1):
        prop, log_ratio, kind = propose(state, bounds.V, cfg, rng)
        proposed[kind] += 1
        if _supported(prop, bounds):
            if multiset:
                prop = canonicalize(prop)
            d_prop = metric.distance(prop, params.mode)
            log_h = -params.gamma * (d_prop - dist) + log_ratio
            if multiset:
                log_a_prop = log_a_count(prop)
                log_h += log_a - log_a_prop
            if log_h >= 0 or rng.random() < math.exp(log_h):
                state, dist = prop, d_prop
                if multiset:
                    log_a = log_a_prop
                accepted[kind] += 1
        if step > chain.burn_in and (step - chain.burn_in - 1) % chain.lag == 0:
            samples.append(state)
            distances.append(dist)
    return ChainResult(samples, distances, proposed, accepted, state)


def run_sis_chain(
    params: SISParams, chain: ChainConfig, init=None, rng=None
) -> ChainResult:
    """Run the sequence-model sampler, returning samples plus diagnostics."""
    return _run_chain(params, chain, init, rng, multiset=False)


def run_sim_chain(
    params: SIMParams, chain: ChainConfig, init=None, rng=None
) -> ChainResult:
    """Run the multiset-model sampler; recorded states are canonical."""
    return _run_chain(params, chain, init, rng, multiset=True)


def sis_mcmc_sample(params: SISParams, chain: ChainConfig, init=None, rng=None) -> list:
    """Approximate draws from the sequence model (see :func:`run_sis_chain`)."""
    return run_sis_chain(params, chain, init, rng).samples


def sim_mcmc_sample(params: SIMParams, chain: ChainConfig, init=None, rng=None) -> list:
    """Approximate draws from the multiset model (see :func:`run_sim_chain`)."""
    return run_sim_chain(params, chain, init, rng).samples
