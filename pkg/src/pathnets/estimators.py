"""scikit-learn style estimators wrapping the posterior fits and baselines.

Observations are ragged (lists of lists of vertex indices), so these
estimators validate structure themselves instead of using ``check_array``;
they otherwise follow the fit/attributes convention and work with
``sklearn.base.clone`` and ``get_params``/``set_params``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .core import SpaceBounds, check_observations
from .distances import MetricSpec, frechet_mean, graph_distance
from .graphs import (
    SNFPosteriorConfig,
    majority_vote,
    rounded_mean,
    snf_fit,
    snf_point_estimates,
)
from .models import TrPoisson
from .moves import MoveConfig
from .posterior import (
    GammaPrior,
    PosteriorConfig,
    PriorSpec,
    UniformPrior,
    fit,
    map_fill,
    point_estimates,
    posterior_predictive,
)


def infer_bounds(X, V: Optional[int] = None, K: Optional[int] = None, L: Optional[int] = None) -> SpaceBounds:
    """Tightest bounds covering a sample, with optional overrides."""
    max_v = max(x for obs in X for p in obs for x in p)
    return SpaceBounds(
        V if V is not None else max_v + 1,
        K if K is not None else max(len(p) for obs in X for p in obs),
        L if L is not None else max(len(obs) for obs in X),
    )


class _CollectionPosterior(BaseEstimator):
    """Shared machinery of the sequence/multiset posterior estimators."""

    _kind = None  # set by subclasses

    def __init__(
        self,
        inner="lsp",
        V=None,
        K=None,
        L=None,
        dispersion_prior="gamma",
        prior_shape=3.0,
        prior_rate=1.0,
        prior_lo=0.1,
        prior_hi=10.0,
        gamma0=0.1,
        mode0=None,
        iterations=100,
        burn_in=100,
        lag=1,
        gamma_step=0.5,
        nu_ed=2,
        nu_td=2,
        beta=0.5,
        insertion="uniform",
        alpha_smooth=0.1,
        path_length_lambda=3.0,
        aux_burn_in=100,
        aux_lag=1,
        aux_exact=False,
        seed=None,
    ):
        self.inner = inner
        self.V = V
        self.K = K
        self.L = L
        self.dispersion_prior = dispersion_prior
        self.prior_shape = prior_shape
        self.prior_rate = prior_rate
        self.prior_lo = prior_lo
        self.prior_hi = prior_hi
        self.gamma0 = gamma0
        self.mode0 = mode0
        self.iterations = iterations
        self.burn_in = burn_in
        self.lag = lag
        self.gamma_step = gamma_step
        self.nu_ed = nu_ed
        self.nu_td = nu_td
        self.beta = beta
        self.insertion = insertion
        self.alpha_smooth = alpha_smooth
        self.path_length_lambda = path_length_lambda
        self.aux_burn_in = aux_burn_in
        self.aux_lag = aux_lag
        self.aux_exact = aux_exact
        self.seed = seed

    def _dispersion(self):
        if self.dispersion_prior == "gamma":
            return GammaPrior(self.prior_shape, self.prior_rate)
        if self.dispersion_prior == "uniform":
            return UniformPrior(self.prior_lo, self.prior_hi)
        raise ValueError(f"unknown dispersion prior {self.dispersion_prior!r}")

    def fit(self, X, y=None):
        X = check_observations(X, V=self.V)
        bounds = infer_bounds(X, self.V, self.K, self.L)
        move = MoveConfig(
            nu_ed=self.nu_ed,
            nu_td=self.nu_td,
            beta=self.beta,
            path_length=TrPoisson(self.path_length_lambda, 1, bounds.K),
            insertion=self.insertion,
            alpha_smooth=self.alpha_smooth,
        )
        cfg = PosteriorConfig(
            prior=PriorSpec(self._dispersion(), mode0=self.mode0, gamma0=self.gamma0),
            iterations=self.iterations,
            burn_in=self.burn_in,
            lag=self.lag,
            gamma_step=self.gamma_step,
            move=move,
            aux_burn_in=self.aux_burn_in,
            aux_lag=self.aux_lag,
            aux_exact=self.aux_exact,
            seed=self.seed,
        )
        self.chain_ = fit(X, self._kind, bounds, self.inner, cfg)
        self.mode_, self.gamma_ = point_estimates(self.chain_)
        self.bounds_ = bounds
        self.diagnostics_ = self.chain_.diagnostics
        return self

    def _check_fitted(self):
        if not hasattr(self, "chain_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def predict_proba_missing(self, obs, position) -> np.ndarray:
        """Posterior-predictive distribution over fill-ins for one entry."""
        self._check_fitted()
        obs = tuple(tuple(p) for p in obs)
        return posterior_predictive(self.chain_, obs, position)

    def predict_missing(self, obs, position) -> int:
        """MAP fill-in for one entry; ties break to the smallest vertex."""
        return map_fill(self.predict_proba_missing(obs, position))


class SISPosterior(_CollectionPosterior):
    """Posterior over (mode sequence, dispersion) for ordered observations."""

    _kind = "sis"


class SIMPosterior(_CollectionPosterior):
    """Posterior over (mode multiset, dispersion) for unordered observations."""

    _kind = "sim"


class SNFPosterior(BaseEstimator):
    """Posterior over (mode multigraph, dispersion) for adjacency samples."""

    def __init__(
        self,
        phi="identity",
        dispersion_prior="gamma",
        prior_shape=3.0,
        prior_rate=1.0,
        prior_lo=0.1,
        prior_hi=10.0,
        gamma0=0.1,
        gamma_step=0.5,
        edge_step=1,
        iterations=100,
        burn_in=50,
        lag=1,
        aux_burn_in=50,
        aux_lag=1,
        seed=None,
    ):
        self.phi = phi
        self.dispersion_prior = dispersion_prior
        self.prior_shape = prior_shape
        self.prior_rate = prior_rate
        self.prior_lo = prior_lo
        self.prior_hi = prior_hi
        self.gamma0 = gamma0
        self.gamma_step = gamma_step
        self.edge_step = edge_step
        self.iterations = iterations
        self.burn_in = burn_in
        self.lag = lag
        self.aux_burn_in = aux_burn_in
        self.aux_lag = aux_lag
        self.seed = seed

    def fit(self, X, y=None):
        if self.dispersion_prior == "gamma":
            prior = GammaPrior(self.prior_shape, self.prior_rate)
        elif self.dispersion_prior == "uniform":
            prior = UniformPrior(self.prior_lo, self.prior_hi)
        else:
            raise ValueError(f"unknown dispersion prior {self.dispersion_prior!r}")
        cfg = SNFPosteriorConfig(
            dispersion=prior,
            gamma0=self.gamma0,
            gamma_step=self.gamma_step,
            edge_step=self.edge_step,
            iterations=self.iterations,
            burn_in=self.burn_in,
            lag=self.lag,
            aux_burn_in=self.aux_burn_in,
            aux_lag=self.aux_lag,
            phi=self.phi,
            seed=self.seed,
        )
        self.chain_ = snf_fit(X, cfg)
        self.mode_, self.gamma_ = snf_point_estimates(self.chain_)
        self.diagnostics_ = self.chain_.diagnostics
        return self


class MajorityVoteGraph(BaseEstimator):
    """Model-free summary of binary graphs: edge iff present in half or more."""

    def fit(self, X, y=None):
        self.mode_ = majority_vote(X)
        return self


class RoundedMeanGraph(BaseEstimator):
    """Model-free summary of multigraphs: entry-wise rounded mean, halves up."""

    def fit(self, X, y=None):
        self.mode_ = rounded_mean(X)
        return self


class FrechetMean(BaseEstimator):
    """Sample Fréchet mean under a collection metric or the graph L1 metric."""

    def __init__(self, level="matching", inner="lsp"):
        self.level = level
        self.inner = inner

    def fit(self, X, y=None):
        if len(X) == 0:
            raise ValueError("empty sample")
        if self.level == "graph":
            metric = lambda a, b: graph_distance(a, b, "l1")  # noqa: E731
        else:
            metric = MetricSpec(self.level, self.inner)
            X = check_observations(X)
        self.estimate_, self.index_ = frechet_mean(list(X), metric)
        return self
