"""Doubly-intractable posterior inference for the sequence/multiset models.

The posterior over (mode, dispersion) carries a parameter-dependent
normalising constant, so plain Metropolis-Hastings is unavailable.  The
component-wise sampler here alternates

* an exchange update for the dispersion: propose uniformly on an
  eps-neighbourhood with reflection at zero, draw an auxiliary dataset at the
  proposed value, and let the auxiliary likelihood cancel the constants;
* an involutive exchange update for the mode: propose through one of the two
  involutive moves, draw auxiliary data at the proposed mode, accept with the
  closed-form ratio (auxiliary q-ratio included, plus the ordering-count
  correction in the multiset case).

Auxiliary data comes either from the inner MCMC samplers (approximate, with
their own burn-in and lag) or, on spaces small enough to enumerate, from the
exact pmf -- in which case the whole scheme is exact-approximate and is tested
against brute-force enumeration of the posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset, Observation, SpaceBounds, canonicalize, in_bounds
from .distances import DatasetDistances, MetricSpec, frechet_mean
from .models import (
    DEFAULT_ENUM_CAP,
    SIMParams,
    SISParams,
    enumerate_multisets,
    enumerate_sequences,
    space_size,
)
from .moves import MoveConfig, propose
from .samplers import ChainConfig, log_a_count, run_sim_chain, run_sis_chain

MODEL_KINDS = ("sis", "sim")

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class GammaPrior:
    """Gamma prior with an explicit rate (use :meth:`with_scale` for scale)."""

    shape: float
    rate: float

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("Gamma prior needs positive shape and rate")

    @classmethod
    def with_scale(cls, shape: float, scale: float) -> "GammaPrior":
        return cls(shape, 1.0 / scale)

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -math.inf
        return (
            self.shape * math.log(self.rate)
            - math.lgamma(self.shape)
            + (self.shape - 1.0) * math.log(x)
            - self.rate * x
        )

    def mean(self) -> float:
        return self.shape / self.rate


@dataclass(frozen=True)
class UniformPrior:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError("uniform prior needs 0 <= lo < hi")

    def logpdf(self, x: float) -> float:
        if self.lo <= x <= self.hi:
            return -math.log(self.hi - self.lo)
        return -math.inf

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)


DispersionPrior = Union[GammaPrior, UniformPrior]


@dataclass(frozen=True)
class PriorSpec:
    """Mode prior (location + strength) and dispersion prior.

    ``mode0=None`` resolves to the sample Fréchet mean at fit time;
    ``gamma0`` near zero gives an effectively flat mode prior.
    """

    dispersion: DispersionPrior
    mode0: Optional[Observation] = None
    gamma0: float = 0.1

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError("mode prior strength must be non-negative")
        if self.mode0 is not None:
            object.__setattr__(
                self, "mode0", tuple(tuple(p) for p in self.mode0)
            )


@dataclass(frozen=True)
class PosteriorConfig:
    """Everything the component-wise sampler needs besides the data."""

    prior: PriorSpec
    iterations: int = 100
    burn_in: int = 0
    lag: int = 1
    gamma_step: float = 0.5
    move: MoveConfig = field(default_factory=MoveConfig)
    aux_burn_in: int = 100
    aux_lag: int = 1
    aux_exact: bool = False
    seed: Optional[int] = None
    gamma_init: Optional[float] = None
    mode_init: Optional[Observation] = None

    def __post_init__(self):
        if self.gamma_step <= 0:
            raise ValueError("gamma proposal half-width must be positive")
        if self.iterations < 1 or self.burn_in < 0 or self.lag < 1:
            raise ValueError("invalid outer chain configuration")

    @property
    def total_steps(self) -> int:
        return self.burn_in + (self.iterations - 1) * self.lag + 1


class ExactAuxSampler:
    """Exact model draws by enumerating the bounded space (tiny spaces only)."""

    def __init__(self, kind: str, bounds: SpaceBounds, inner: str, cap: int = DEFAULT_ENUM_CAP):
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}")
        size = space_size(bounds, ordered=(kind == "sis"))
        if size > cap:
            raise ValueError(f"space of {size} states is too large to enumerate")
        self.kind = kind
        self.bounds = bounds
        self.inner = inner
        self.metric = MetricSpec("edit" if kind == "sis" else "matching", inner)
        states = (
            enumerate_sequences(bounds) if kind == "sis" else enumerate_multisets(bounds)
        )
        self.states = list(states)
        self._dvecs: dict = {}

    def _distances(self, mode: Observation) -> np.ndarray:
        key = canonicalize(mode) if self.kind == "sim" else mode
        if key not in self._dvecs:
            self._dvecs[key] = np.array(
                [self.metric.distance(s, key) for s in self.states], dtype=np.int64
            )
        return self._dvecs[key]

    def draw(self, mode, gamma, size, rng) -> tuple:
        d = self._distances(mode)
        w = np.exp(-gamma * (d - d.min()))
        w /= w.sum()
        idx = rng.choice(len(self.states), size=size, p=w)
        return [self.states[i] for i in idx], d[idx]


class MCMCAuxSampler:
    """Approximate model draws through the inner involutive samplers."""

    def __init__(self, kind, bounds, inner, move: MoveConfig, burn_in: int, lag: int):
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}")
        self.kind = kind
        self.bounds = bounds
        self.inner = inner
        self.metric = MetricSpec("edit" if kind == "sis" else "matching", inner)
        self.move = move
        self.burn_in = burn_in
        self.lag = lag

    def draw(self, mode, gamma, size, rng) -> tuple:
        chain = ChainConfig(size, self.burn_in, self.lag, self.move)
        if self.kind == "sis":
            params = SISParams(mode, gamma, self.bounds, self.inner)
            result = run_sis_chain(params, chain, rng=rng)
        else:
            params = SIMParams(mode, gamma, self.bounds, self.inner)
            result = run_sim_chain(params, chain, rng=rng)
        return result.samples, np.asarray(result.distances, dtype=np.int64)


def _aux_sampler(kind, bounds, inner, cfg: PosteriorConfig):
    if cfg.aux_exact:
        return ExactAuxSampler(kind, bounds, inner)
    return MCMCAuxSampler(kind, bounds, inner, cfg.move, cfg.aux_burn_in, cfg.aux_lag)


def reflected_gamma_proposal(gamma: float, eps: float, rng) -> float:
    """Uniform on an eps-neighbourhood of gamma with reflection at zero."""
    prop = rng.uniform(gamma - eps, gamma + eps)
    return abs(prop)


def gamma_exchange_step(
    mode,
    gamma,
    data,
    prior: DispersionPrior,
    eps,
    aux_sampler,
    rng,
    aux_rng=None,
    obs_sum: Optional[float] = None,
    metric: Optional[MetricSpec] = None,
) -> tuple:
    """One exchange update of the dispersion; returns ``(gamma, accepted)``.

    The proposal is symmetric so only the prior ratio and the exponent of
    observed-minus-auxiliary distance sums appear.
    """
    n = len(data)
    if obs_sum is None:
        obs_sum = float(sum(metric.distance(o, mode) for o in data))
    prop = reflected_gamma_proposal(gamma, eps, rng)
    if prop <= 0:
        return gamma, False
    lp_ratio = prior.logpdf(prop) - prior.logpdf(gamma)
    if lp_ratio == -math.inf:
        return gamma, False
    _, aux_d = aux_sampler.draw(mode, prop, n, aux_rng if aux_rng is not None else rng)
    log_h = -(prop - gamma) * (obs_sum - float(aux_d.sum())) + lp_ratio
    if log_h >= 0 or rng.random() < math.exp(log_h):
        return prop, True
    return gamma, False


def _mode_step(
    kind,
    mode,
    gamma,
    prior: PriorSpec,
    mode0,
    dd: DatasetDistances,
    obs_sum,
    prior_dist,
    cfg_move: MoveConfig,
    bounds,
    aux_sampler,
    rng,
    aux_rng,
):
    """One iExchange update of the mode; returns state plus cached sums."""
    metric = dd.metric
    n = len(dd.observations)
    prop, log_ratio, move_kind = propose(mode, bounds.V, cfg_move, rng)
    if len(prop) == 0 or any(len(p) == 0 for p in prop) or not in_bounds(prop, bounds):
        return mode, obs_sum, prior_dist, move_kind, False
    if kind == "sim":
        prop_canon = canonicalize(prop)
    else:
        prop_canon = prop
    aux, aux_to_prop = aux_sampler.draw(prop_canon, gamma, n, aux_rng)
    aux_to_cur = float(sum(metric.distance(s, mode) for s in aux))
    obs_sum_prop = float(dd.total_to(prop_canon))
    prior_dist_prop = float(metric.distance(prop_canon, mode0))
    log_h = (
        -gamma * (obs_sum_prop - obs_sum)
        - gamma * (aux_to_cur - float(aux_to_prop.sum()))
        - prior.gamma0 * (prior_dist_prop - prior_dist)
        + log_ratio
    )
    if kind == "sim":
        log_h += log_a_count(mode) - log_a_count(prop_canon)
    if log_h >= 0 or rng.random() < math.exp(log_h):
        return prop_canon, obs_sum_prop, prior_dist_prop, move_kind, True
    return mode, obs_sum, prior_dist, move_kind, False


def mode_iexchange_step_sis(
    mode, gamma, data, prior: PriorSpec, cfg_move, bounds, aux_sampler, rng, aux_rng=None
):
    """One mode update for the sequence model; returns ``(mode, accepted)``."""
    dd = DatasetDistances(data, aux_sampler.metric)
    mode0 = prior.mode0 if prior.mode0 is not None else frechet_mean(list(data), dd.metric)[0]
    obs_sum = float(dd.total_to(mode))
    prior_dist = float(dd.metric.distance(mode, mode0))
    new_mode, _, _, _, accepted = _mode_step(
        "sis", mode, gamma, prior, mode0, dd, obs_sum, prior_dist,
        cfg_move, bounds, aux_sampler, rng, aux_rng if aux_rng is not None else rng,
    )
    return new_mode, accepted


def mode_iexchange_step_sim(
    mode, gamma, data, prior: PriorSpec, cfg_move, bounds, aux_sampler, rng, aux_rng=None
):
    """One mode update for the multiset model; returns ``(mode, accepted)``."""
    data = tuple(canonicalize(o) for o in data)
    mode = canonicalize(mode)
    dd = DatasetDistances(data, aux_sampler.metric)
    mode0 = prior.mode0 if prior.mode0 is not None else frechet_mean(list(data), dd.metric)[0]
    mode0 = canonicalize(mode0)
    obs_sum = float(dd.total_to(mode))
    prior_dist = float(dd.metric.distance(mode, mode0))
    new_mode, _, _, _, accepted = _mode_step(
        "sim", mode, gamma, prior, mode0, dd, obs_sum, prior_dist,
        cfg_move, bounds, aux_sampler, rng, aux_rng if aux_rng is not None else rng,
    )
    return new_mode, accepted


@dataclass
class PosteriorChain:
    """Posterior sample of (mode, dispersion) pairs with run diagnostics."""

    kind: str
    inner: str
    bounds: SpaceBounds
    modes: list
    gammas: list
    reference: Observation
    diagnostics: dict

    @property
    def samples(self) -> list:
        return list(zip(self.modes, self.gammas))

    @property
    def metric(self) -> MetricSpec:
        return MetricSpec("edit" if self.kind == "sis" else "matching", self.inner)

    def __len__(self) -> int:
        return len(self.modes)


def fit(
    data: Sequence,
    kind: str,
    bounds: SpaceBounds,
    inner: str,
    cfg: PosteriorConfig,
) -> PosteriorChain:
    """Component-wise posterior sampling: one dispersion exchange update then
    one mode iExchange update per outer iteration.

    Auxiliary draws use fresh RNG streams derived from the seed and the step
    counter, so runs are reproducible regardless of scheduling.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    if isinstance(data, Dataset):
        if kind == "sis" and not data.ordered:
            raise ValueError("unordered dataset cannot be fitted with the sequence model")
        data = data.observations
    data = tuple(tuple(tuple(p) for p in o) for o in data)
    if len(data) == 0:
        raise ValueError("cannot fit on an empty sample")
    for o in data:
        if not in_bounds(o, bounds):
            raise ValueError(f"observation {o} violates bounds {bounds}")
    if kind == "sim":
        data = tuple(canonicalize(o) for o in data)

    metric = MetricSpec("edit" if kind == "sis" else "matching", inner)
    move = cfg.move
    if move.insertion == "informed" and move.cooccurrence is None:
        move = move.with_data(data, bounds.V)
    dd = DatasetDistances(data, metric)
    mode0 = cfg.prior.mode0
    if mode0 is None:
        mode0 = frechet_mean(list(data), metric)[0]
    elif kind == "sim":
        mode0 = canonicalize(mode0)

    mode = cfg.mode_init if cfg.mode_init is not None else mode0
    mode = canonicalize(mode) if kind == "sim" else tuple(tuple(p) for p in mode)
    if not in_bounds(mode, bounds):
        raise ValueError("initial mode violates the space bounds")
    gamma = cfg.gamma_init if cfg.gamma_init is not None else cfg.prior.dispersion.mean()
    if gamma <= 0:
        raise ValueError("initial dispersion must be positive")

    base = cfg.seed if cfg.seed is not None else int(np.random.SeedSequence().entropy % (2**32))
    rng = np.random.default_rng(np.random.SeedSequence((base, 0)))
    aux_sampler = _aux_sampler(kind, bounds, inner, replace(cfg, move=move))

    obs_sum = float(dd.total_to(mode))
    prior_dist = float(metric.distance(mode, mode0))
    n = len(data)

    modes, gammas, trace = [], [], []
    diag = {
        "gamma_proposed": 0, "gamma_accepted": 0,
        "edit_alloc_proposed": 0, "edit_alloc_accepted": 0,
        "path_id_proposed": 0, "path_id_accepted": 0,
    }
    for step in range(1, cfg.total_steps + 1):
        gamma_rng = np.random.default_rng(np.random.SeedSequence((base, step, 1)))
        new_gamma, acc = gamma_exchange_step(
            mode, gamma, data, cfg.prior.dispersion, cfg.gamma_step,
            aux_sampler, rng, aux_rng=gamma_rng, obs_sum=obs_sum, metric=metric,
        )
        diag["gamma_proposed"] += 1
        diag["gamma_accepted"] += int(acc)
        gamma = new_gamma

        mode_rng = np.random.default_rng(np.random.SeedSequence((base, step, 2)))
        mode, obs_sum, prior_dist, move_kind, acc = _mode_step(
            kind, mode, gamma, cfg.prior, mode0, dd, obs_sum, prior_dist,
            move, bounds, aux_sampler, rng, mode_rng,
        )
        diag[f"{move_kind}_proposed"] += 1
        diag[f"{move_kind}_accepted"] += int(acc)

        if step > cfg.burn_in and (step - cfg.burn_in - 1) % cfg.lag == 0:
            modes.append(mode)
            gammas.append(gamma)
            trace.append(prior_dist)

    diagnostics = {
        "acceptance": {
            "gamma": diag["gamma_accepted"] / max(diag["gamma_proposed"], 1),
            "edit_alloc": diag["edit_alloc_accepted"] / max(diag["edit_alloc_proposed"], 1),
            "path_id": diag["path_id_accepted"] / max(diag["path_id_proposed"], 1),
        },
        "counts": diag,
        "mode_trace_dist": trace,
    }
    return PosteriorChain(kind, inner, bounds, modes, gammas, mode0, diagnostics)


def point_estimates(chain: PosteriorChain) -> tuple:
    """Fréchet mean of the mode samples and arithmetic mean dispersion."""
    if len(chain) == 0:
        raise ValueError("empty posterior chain")
    mode_hat, _ = frechet_mean(chain.modes, chain.metric)
    gamma_hat = float(np.mean(chain.gammas))
    return mode_hat, gamma_hat


def _filled(obs: Observation, position: tuple, value: int) -> Observation:
    i, j = position
    path = obs[i]
    new_path = path[:j] + (value,) + path[j + 1 :]
    return obs[:i] + (new_path,) + obs[i + 1 :]


def _check_position(obs, position) -> None:
    i, j = position
    if not (0 <= i < len(obs) and 0 <= j < len(obs[i])):
        raise ValueError(f"position {position} out of range for the observation")


def true_predictive(params, obs: Observation, position: tuple) -> np.ndarray:
    """Distribution over vertices for one entry, at known model parameters.

    Entry ``position=(path, offset)`` of ``obs`` is treated as missing; the
    result is ``softmax(-gamma * d(obs_x, mode))`` over fill-ins x.
    """
    _check_position(obs, position)
    V = params.bounds.V
    metric = params.metric
    logw = np.empty(V)
    for x in range(V):
        logw[x] = -params.gamma * metric.distance(_filled(obs, position, x), params.mode)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def posterior_predictive(chain: PosteriorChain, obs: Observation, position: tuple) -> np.ndarray:
    """Average of the per-sample predictives over a posterior chain."""
    if len(chain) == 0:
        raise ValueError("empty posterior chain")
    _check_position(obs, position)
    V = chain.bounds.V
    metric = chain.metric
    cache: dict = {}
    total = np.zeros(V)
    for mode, gamma in zip(chain.modes, chain.gammas):
        key = (mode, gamma)
        if key not in cache:
            logw = np.empty(V)
            for x in range(V):
                logw[x] = -gamma * metric.distance(_filled(obs, position, x), mode)
            w = np.exp(logw - logw.max())
            cache[key] = w / w.sum()
        total += cache[key]
    return total / len(chain)


def map_fill(probs: np.ndarray) -> int:
    """Most probable vertex; ties break to the smallest index."""
    return int(np.argmax(probs))


def grid_posterior(
    data: Sequence,
    kind: str,
    prior: PriorSpec,
    bounds: SpaceBounds,
    inner: str,
    lo: float,
    hi: float,
    bins: int,
    fine_per_bin: int = 16,
    cap: int = DEFAULT_ENUM_CAP,
) -> tuple:
    """Brute-force joint posterior over (mode, dispersion-bin) by enumeration.

    The dispersion axis is integrated per bin with the trapezoid rule on a
    fine uniform grid.  Returns ``(states, bin_edges, mass)`` where ``mass``
    has one row per state and one column per bin and sums to one.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    size = space_size(bounds, ordered=(kind == "sis"))
    if size > cap:
        raise ValueError(f"space of {size} states is too large to enumerate")
    metric = MetricSpec("edit" if kind == "sis" else "matching", inner)
    states = list(
        enumerate_sequences(bounds) if kind == "sis" else enumerate_multisets(bounds)
    )
    data = tuple(tuple(tuple(p) for p in o) for o in data)
    if kind == "sim":
        data = tuple(canonicalize(o) for o in data)
    mode0 = prior.mode0
    if mode0 is None:
        mode0 = frechet_mean(list(data), metric)[0]
    if kind == "sim":
        mode0 = canonicalize(mode0)

    n_states = len(states)
    D = np.zeros((n_states, n_states), dtype=np.int64)
    for i in range(n_states):
        for j in range(i + 1, n_states):
            D[i, j] = D[j, i] = metric.distance(states[i], states[j])
    obs_idx = [states.index(o) for o in data]
    obs_sum = D[:, obs_idx].sum(axis=1)
    prior_d = D[:, states.index(mode0)]

    edges = np.linspace(lo, hi, bins + 1)
    n = len(data)
    grids = [np.linspace(edges[b], edges[b + 1], fine_per_bin) for b in range(bins)]
    log_posts = []
    for grid in grids:
        logz = np.empty((n_states, fine_per_bin))
        for g, gamma in enumerate(grid):
            logz[:, g] = np.log(np.exp(-gamma * D).sum(axis=1))
        lp = np.array([prior.dispersion.logpdf(g) for g in grid])
        log_posts.append(
            -n * logz
            - np.outer(obs_sum, grid)
            - prior.gamma0 * prior_d[:, None]
            + lp[None, :]
        )
    shift = max(block.max() for block in log_posts)
    mass = np.zeros((n_states, bins))
    for b, (grid, block) in enumerate(zip(grids, log_posts)):
        mass[:, b] = _trapezoid(np.exp(block - shift), grid, axis=1)
    total = mass.sum()
    if total <= 0:
        raise ValueError("posterior mass vanished; check the dispersion grid")
    return states, edges, mass / total
