"""Graph aggregation and graph-level baselines.

Aggregating a collection of paths to a directed (multi)graph counts the
consecutive-vertex traversals inside each path; it is order-free across paths
and loses the within-path structure (it is not injective).  On aggregated
samples we provide the model-free majority-vote and rounded-mean summaries,
and a multigraph spherical family ``p(G) ∝ exp(-gamma * phi(d1(G, mode)))``
with an exchange-based posterior sampler (dispersion by exchange, mode by
exchange-within-Gibbs over edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .distances import graph_distance
from .posterior import DispersionPrior, reflected_gamma_proposal

PHI = {"identity": lambda d: float(d), "square": lambda d: float(d) ** 2}


def aggregate(obs, V: int, kind: str = "multigraph") -> np.ndarray:
    """Adjacency matrix of traversal counts (or their indicator for graphs)."""
    if kind not in ("multigraph", "graph"):
        raise ValueError(f"unknown aggregation kind {kind!r}")
    A = np.zeros((V, V), dtype=np.int64)
    for path in obs:
        for a, b in zip(path, path[1:]):
            A[a, b] += 1
    if kind == "graph":
        A = (A > 0).astype(np.int64)
    return A


def _stack(graphs) -> np.ndarray:
    if len(graphs) == 0:
        raise ValueError("empty graph sample")
    arr = np.stack([np.asarray(g, dtype=np.int64) for g in graphs])
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError("graphs must be square adjacency matrices of equal size")
    return arr


def majority_vote(graphs: Sequence) -> np.ndarray:
    """Edge present iff present in at least half of the binary graphs."""
    arr = _stack(graphs)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("majority vote requires binary graphs")
    return (arr.mean(axis=0) >= 0.5).astype(np.int64)


def rounded_mean(multigraphs: Sequence) -> np.ndarray:
    """Entry-wise mean multiplicity rounded to the nearest integer, halves up."""
    arr = _stack(multigraphs)
    mean = arr.mean(axis=0)
    floor = np.floor(mean)
    return (floor + (mean - floor >= 0.5)).astype(np.int64)


@dataclass(frozen=True)
class SNFParams:
    """Multigraph spherical family: mode, dispersion and distance transform."""

    mode: np.ndarray
    gamma: float
    phi: str = "identity"

    def __post_init__(self):
        mode = np.asarray(self.mode, dtype=np.int64)
        if mode.ndim != 2 or mode.shape[0] != mode.shape[1]:
            raise ValueError("mode must be a square adjacency matrix")
        if (mode < 0).any():
            raise ValueError("multiplicities must be non-negative")
        mode.setflags(write=False)
        object.__setattr__(self, "mode", mode)
        if self.gamma <= 0:
            raise ValueError("dispersion must be positive")
        if self.phi not in PHI:
            raise ValueError(f"unknown phi {self.phi!r}; expected one of {tuple(PHI)}")

    @property
    def V(self) -> int:
        return self.mode.shape[0]

    def phi_fn(self) -> Callable:
        return PHI[self.phi]


def snf_log_kernel(G, params: SNFParams) -> float:
    """Unnormalised log-probability ``-gamma * phi(d1(G, mode))``."""
    return -params.gamma * params.phi_fn()(graph_distance(G, params.mode, "l1"))


def propose_multiplicity(x: int, nu: int, rng) -> int:
    """Uniform on the nu-neighbourhood of x excluding x, reflected at zero.

    Reflection can land back on x (e.g. x=1, draw -1 with nu=2), so
    self-proposals have positive probability.
    """
    offsets = [j for j in range(-nu, nu + 1) if j != 0]
    prop = x + offsets[int(rng.integers(0, len(offsets)))]
    return -prop if prop < 0 else prop


def multiplicity_logq(x: int, x_new: int, nu: int) -> float:
    """log q(x_new | x) of the reflected neighbourhood proposal.

    Despite first appearances this kernel is not symmetric at pairs involving
    zero (q(1|0) is twice q(0|1) for nu=1: both draws -1 and +1 reflect onto
    1), so acceptance ratios must carry the exact ratio rather than assuming
    the q-terms cancel.
    """
    count = 0
    if x_new != x and abs(x_new - x) <= nu:
        count += 1  # direct draw
    if x_new > 0 and x + x_new <= nu:
        count += 1  # reflected draw -x_new (covers the self-proposal x_new == x)
    if count == 0:
        return -math.inf
    return math.log(count / (2.0 * nu))


@dataclass
class SNFChainResult:
    samples: list
    distances: list
    proposed: int
    accepted: int
    final_state: np.ndarray


def snf_mcmc_sample(
    params: SNFParams,
    iterations: int,
    burn_in: int = 0,
    lag: int = 1,
    nu: int = 1,
    rng=None,
    init: Optional[np.ndarray] = None,
    cap: Optional[int] = None,
) -> SNFChainResult:
    """Random-sweep Gibbs sampler for the multigraph family.

    Each step updates one uniformly chosen directed edge via the reflected
    nu-neighbourhood proposal.  ``cap`` (entries above it rejected) restricts
    the support to a finite space, used when testing against enumeration.
    """
    if rng is None:
        rng = np.random.default_rng()
    phi = params.phi_fn()
    V = params.V
    state = params.mode.copy() if init is None else np.asarray(init, dtype=np.int64).copy()
    if cap is not None and (state > cap).any():
        raise ValueError("initial state violates the multiplicity cap")
    dist = graph_distance(state, params.mode, "l1")
    total = burn_in + (iterations - 1) * lag + 1
    samples, distances = [], []
    proposed = accepted = 0
    for step in range(1, total + 1):
        i, j = divmod(int(rng.integers(0, V * V)), V)
        x = int(state[i, j])
        x_new = propose_multiplicity(x, nu, rng)
        proposed += 1
        if cap is None or x_new <= cap:
            d_new = dist - abs(x - int(params.mode[i, j])) + abs(x_new - int(params.mode[i, j]))
            log_h = -params.gamma * (phi(d_new) - phi(dist))
            log_h += multiplicity_logq(x_new, x, nu) - multiplicity_logq(x, x_new, nu)
            if log_h >= 0 or rng.random() < math.exp(log_h):
                state[i, j] = x_new
                dist = d_new
                accepted += 1
        if step > burn_in and (step - burn_in - 1) % lag == 0:
            frozen = state.copy()
            frozen.setflags(write=False)
            samples.append(frozen)
            distances.append(dist)
    return SNFChainResult(samples, distances, proposed, accepted, state)


def snf_exact_pmf(params: SNFParams, cap: int) -> dict:
    """Exact pmf on the capped space (all entries in [0, cap])."""
    phi = params.phi_fn()
    V = params.V
    n_cells = V * V
    if (cap + 1) ** n_cells > 10**6:
        raise ValueError("capped space too large to enumerate")
    states = []
    logw = []
    from itertools import product

    for entries in product(range(cap + 1), repeat=n_cells):
        G = np.array(entries, dtype=np.int64).reshape(V, V)
        states.append(tuple(entries))
        logw.append(-params.gamma * phi(graph_distance(G, params.mode, "l1")))
    w = np.exp(np.array(logw) - max(logw))
    w /= w.sum()
    return {s: float(p) for s, p in zip(states, w)}


@dataclass(frozen=True)
class SNFPosteriorConfig:
    """Priors, proposal widths and chain settings for the multigraph fit."""

    dispersion: DispersionPrior
    mode0: Optional[np.ndarray] = None
    gamma0: float = 0.1
    gamma_step: float = 0.5
    edge_step: int = 1
    iterations: int = 100
    burn_in: int = 0
    lag: int = 1
    aux_burn_in: int = 50
    aux_lag: int = 1
    phi: str = "identity"
    seed: Optional[int] = None
    gamma_init: Optional[float] = None

    def __post_init__(self):
        if self.edge_step < 1:
            raise ValueError("edge proposal half-width must be at least 1")
        if self.gamma_step <= 0:
            raise ValueError("gamma proposal half-width must be positive")

    @property
    def total_steps(self) -> int:
        return self.burn_in + (self.iterations - 1) * self.lag + 1


@dataclass
class SNFPosteriorChain:
    modes: list
    gammas: list
    reference: np.ndarray
    diagnostics: dict

    def __len__(self) -> int:
        return len(self.modes)


def _snf_aux(mode, gamma, size, phi, cfg: SNFPosteriorConfig, rng) -> list:
    params = SNFParams(mode, gamma, phi)
    res = snf_mcmc_sample(
        params, size, cfg.aux_burn_in, cfg.aux_lag, cfg.edge_step, rng
    )
    return res.samples


def snf_fit(multigraphs: Sequence, cfg: SNFPosteriorConfig) -> SNFPosteriorChain:
    """Exchange-based posterior for the multigraph family.

    Per outer iteration: one dispersion exchange update, then an
    exchange-within-Gibbs sweep over all directed edges, each edge proposal
    judged against fresh auxiliary data of size n drawn at the proposed mode.
    """
    data = _stack(multigraphs)
    n, V, _ = data.shape
    phi_fn = PHI[cfg.phi]
    mode0 = cfg.mode0
    if mode0 is None:
        graphs = [data[k] for k in range(n)]
        from .distances import frechet_mean

        mode0, _ = frechet_mean(graphs, lambda a, b: graph_distance(a, b, "l1"))
    mode0 = np.asarray(mode0, dtype=np.int64)

    base = cfg.seed if cfg.seed is not None else int(np.random.SeedSequence().entropy % (2**32))
    rng = np.random.default_rng(np.random.SeedSequence((base, 0)))

    mode = mode0.copy()
    gamma = cfg.gamma_init if cfg.gamma_init is not None else cfg.dispersion.mean()

    def obs_phi_sum(G):
        return sum(phi_fn(graph_distance(data[k], G, "l1")) for k in range(n))

    obs_sum = obs_phi_sum(mode)
    modes, gammas = [], []
    diag = {"gamma_proposed": 0, "gamma_accepted": 0, "edge_proposed": 0, "edge_accepted": 0}
    for step in range(1, cfg.total_steps + 1):
        aux_rng = np.random.default_rng(np.random.SeedSequence((base, step, 1)))
        prop = reflected_gamma_proposal(gamma, cfg.gamma_step, rng)
        diag["gamma_proposed"] += 1
        if prop > 0:
            lp_ratio = cfg.dispersion.logpdf(prop) - cfg.dispersion.logpdf(gamma)
            if lp_ratio > -math.inf:
                aux = _snf_aux(mode, prop, n, cfg.phi, cfg, aux_rng)
                aux_sum = sum(phi_fn(graph_distance(a, mode, "l1")) for a in aux)
                log_h = -(prop - gamma) * (obs_sum - aux_sum) + lp_ratio
                if log_h >= 0 or rng.random() < math.exp(log_h):
                    gamma = prop
                    diag["gamma_accepted"] += 1

        for i in range(V):
            for j in range(V):
                edge_rng = np.random.default_rng(
                    np.random.SeedSequence((base, step, 2, i * V + j))
                )
                x = int(mode[i, j])
                x_new = propose_multiplicity(x, cfg.edge_step, rng)
                diag["edge_proposed"] += 1
                if x_new == x:
                    diag["edge_accepted"] += 1
                    continue
                mode_prop = mode.copy()
                mode_prop[i, j] = x_new
                aux = _snf_aux(mode_prop, gamma, n, cfg.phi, cfg, edge_rng)
                obs_sum_prop = obs_phi_sum(mode_prop)
                aux_cur = sum(phi_fn(graph_distance(a, mode, "l1")) for a in aux)
                aux_prop = sum(phi_fn(graph_distance(a, mode_prop, "l1")) for a in aux)
                log_h = (
                    -gamma * (obs_sum_prop - obs_sum)
                    - gamma * (aux_cur - aux_prop)
                    - cfg.gamma0
                    * (
                        phi_fn(graph_distance(mode_prop, mode0, "l1"))
                        - phi_fn(graph_distance(mode, mode0, "l1"))
                    )
                    + multiplicity_logq(x_new, x, cfg.edge_step)
                    - multiplicity_logq(x, x_new, cfg.edge_step)
                )
                if log_h >= 0 or rng.random() < math.exp(log_h):
                    mode = mode_prop
                    obs_sum = obs_sum_prop
                    diag["edge_accepted"] += 1

        if step > cfg.burn_in and (step - cfg.burn_in - 1) % cfg.lag == 0:
            frozen = mode.copy()
            frozen.setflags(write=False)
            modes.append(frozen)
            gammas.append(gamma)

    diagnostics = {
        "acceptance": {
            "gamma": diag["gamma_accepted"] / max(diag["gamma_proposed"], 1),
            "edge": diag["edge_accepted"] / max(diag["edge_proposed"], 1),
        },
        "counts": diag,
    }
    return SNFPosteriorChain(modes, gammas, mode0, diagnostics)


def snf_point_estimates(chain: SNFPosteriorChain) -> tuple:
    """Fréchet mean of the mode samples (under d1) and mean dispersion."""
    from .distances import frechet_mean

    mode_hat, _ = frechet_mean(chain.modes, lambda a, b: graph_distance(a, b, "l1"))
    return mode_hat, float(np.mean(chain.gammas))


def write_multigraph_csv(G, path) -> None:
    """Adjacency CSV: header ``i,j,count``, zero-count rows omitted."""
    A = np.asarray(G, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write("i,j,count\n")
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                if A[i, j] != 0:
                    fh.write(f"{i},{j},{A[i, j]}\n")


def read_multigraph_csv(path, V: Optional[int] = None) -> np.ndarray:
    """Read the ``i,j,count`` format; V defaults to the largest index + 1."""
    entries = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "i,j,count":
            raise ValueError(f"unexpected multigraph CSV header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 3 columns")
            entries.append(tuple(int(x) for x in parts))
    size = V if V is not None else (max((max(i, j) for i, j, _ in entries), default=-1) + 1)
    A = np.zeros((size, size), dtype=np.int64)
    for i, j, count in entries:
        A[i, j] = count
    return A
