"""Simulation studies: posterior concentration, mode-structure effects, and
posterior-predictive convergence, at configurable desk scale.

Each study loops over a grid of generating parameters, repeats every cell R
times with seeds derived from the master seed and the cell coordinates, and
emits one CSV row per repetition.  Cells are independent, so they can be
dispatched to a process pool; results are identical for any worker count.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .core import SpaceBounds
from .models import HollywoodParams, SISParams, TrPoisson, hollywood_sample
from .moves import MoveConfig
from .posterior import (
    PosteriorConfig,
    PriorSpec,
    UniformPrior,
    fit,
    map_fill,
    posterior_predictive,
    true_predictive,
)
from .samplers import ChainConfig, run_sis_chain

CONC_HEADER = ("gamma_true", "n", "rep", "d_bar", "gamma_bar")
STRUCT_HEADER = ("alpha", "n", "rep", "d_bar", "gamma_bar")
PRED_HEADER = ("gamma_true", "n", "rep", "acc_posterior", "acc_true")


@dataclass(frozen=True)
class StudyConfig:
    """Grids, model set-up and chain settings for the simulation studies.

    Defaults are desk scale: small space, short chains, minutes not days.
    The reference setup (V=20, K=10, L=20, n up to 100, R=100, long chains)
    is reachable by editing the corresponding fields.
    """

    V: int = 6
    K: int = 4
    L: int = 6
    inner: str = "lcs"
    gamma_true: tuple = (2.0, 3.5)
    n_values: tuple = (10, 40)
    alphas: tuple = (-1.35, -0.35, -0.03)
    repetitions: int = 10
    posterior_samples: int = 100
    n_test: int = 5
    predictive_alpha: float = -0.35
    structure_gamma: float = 3.0
    mode_paths: int = 3
    hollywood_alpha: float = -0.3
    length_lambda: float = 3.0
    gamma_prior_lo: float = 0.5
    gamma_prior_hi: float = 7.0
    gamma0: float = 0.1
    data_burn_in: int = 3000
    data_lag: int = 50
    outer_burn_in: int = 150
    outer_lag: int = 2
    gamma_step: float = 0.75
    aux_burn_in: int = 60
    aux_lag: int = 3
    nu_ed: int = 2
    nu_td: int = 2
    beta: float = 0.5
    seed: int = 0
    workers: int = 1

    @property
    def bounds(self) -> SpaceBounds:
        return SpaceBounds(self.V, self.K, self.L)

    def move_config(self) -> MoveConfig:
        return MoveConfig(
            nu_ed=self.nu_ed,
            nu_td=self.nu_td,
            beta=self.beta,
            path_length=TrPoisson(self.length_lambda, 1, self.K),
        )

    def length_dist(self) -> TrPoisson:
        return TrPoisson(self.length_lambda, 1, self.K)

    @classmethod
    def from_dict(cls, payload: dict) -> "StudyConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in payload.items():
            if key not in known:
                raise ValueError(f"unknown study config key {key!r}")
            if isinstance(value, list):
                value = tuple(value)
            kwargs[key] = value
        return cls(**kwargs)

    def to_toml(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                rendered = "[" + ", ".join(repr(v) for v in value) + "]"
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, str):
                rendered = f'"{value}"'
            else:
                rendered = repr(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"


def _cell_seed(master: int, study: int, *coords: int) -> int:
    ss = np.random.SeedSequence((master, study) + coords)
    return int(ss.generate_state(1)[0])


def _draw_mode(cfg: StudyConfig, alpha: float, seed: int):
    params = HollywoodParams(alpha, cfg.V, cfg.length_dist())
    rng = np.random.default_rng(seed)
    mode = hollywood_sample(params, cfg.mode_paths, rng)
    # keep the mode inside the bounded space
    return tuple(p[: cfg.K] for p in mode[: cfg.L])


def _sample_data(cfg: StudyConfig, mode, gamma, n, seed: int):
    params = SISParams(mode, gamma, cfg.bounds, cfg.inner)
    chain = ChainConfig(n, cfg.data_burn_in, cfg.data_lag, cfg.move_config())
    rng = np.random.default_rng(seed)
    return run_sis_chain(params, chain, rng=rng).samples


def _posterior_config(cfg: StudyConfig, seed: int) -> PosteriorConfig:
    prior = PriorSpec(
        UniformPrior(cfg.gamma_prior_lo, cfg.gamma_prior_hi), mode0=None, gamma0=cfg.gamma0
    )
    return PosteriorConfig(
        prior=prior,
        iterations=cfg.posterior_samples,
        burn_in=cfg.outer_burn_in,
        lag=cfg.outer_lag,
        gamma_step=cfg.gamma_step,
        move=cfg.move_config(),
        aux_burn_in=cfg.aux_burn_in,
        aux_lag=cfg.aux_lag,
        seed=seed,
    )


def _mode_distance_mean(chain, mode_true) -> float:
    metric = chain.metric
    cache: dict = {}
    total = 0.0
    for mode in chain.modes:
        if mode not in cache:
            cache[mode] = metric.distance(mode, mode_true)
        total += cache[mode]
    return total / len(chain.modes)


def _concentration_cell(payload) -> tuple:
    cfg, mode_true, gamma, n, rep, label = payload
    data_seed = _cell_seed(cfg.seed, 10, label, n, rep)
    fit_seed = _cell_seed(cfg.seed, 11, label, n, rep)
    data = _sample_data(cfg, mode_true, gamma, n, data_seed)
    chain = fit(data, "sis", cfg.bounds, cfg.inner, _posterior_config(cfg, fit_seed))
    return (
        (gamma, n, rep, _mode_distance_mean(chain, mode_true), float(np.mean(chain.gammas))),
        chain.diagnostics["acceptance"],
    )


def _structure_cell(payload) -> tuple:
    cfg, alpha, alpha_idx, n, rep, _ = payload
    mode_seed = _cell_seed(cfg.seed, 20, alpha_idx, n, rep)
    data_seed = _cell_seed(cfg.seed, 21, alpha_idx, n, rep)
    fit_seed = _cell_seed(cfg.seed, 22, alpha_idx, n, rep)
    mode_true = _draw_mode(cfg, alpha, mode_seed)
    data = _sample_data(cfg, mode_true, cfg.structure_gamma, n, data_seed)
    chain = fit(data, "sis", cfg.bounds, cfg.inner, _posterior_config(cfg, fit_seed))
    return (
        (alpha, n, rep, _mode_distance_mean(chain, mode_true), float(np.mean(chain.gammas))),
        chain.diagnostics["acceptance"],
    )


def _predictive_cell(payload) -> tuple:
    cfg, gamma, gamma_idx, n, rep, _ = payload
    mode_seed = _cell_seed(cfg.seed, 30, gamma_idx, n, rep)
    data_seed = _cell_seed(cfg.seed, 31, gamma_idx, n, rep)
    fit_seed = _cell_seed(cfg.seed, 32, gamma_idx, n, rep)
    mode_true = _draw_mode(cfg, cfg.predictive_alpha, mode_seed)
    data = _sample_data(cfg, mode_true, gamma, n + cfg.n_test, data_seed)
    train, test = data[:n], data[n:]
    chain = fit(train, "sis", cfg.bounds, cfg.inner, _posterior_config(cfg, fit_seed))
    true_params = SISParams(mode_true, gamma, cfg.bounds, cfg.inner)

    hits_post = hits_true = trials = 0
    for obs in test:
        for i, path in enumerate(obs):
            for j in range(len(path)):
                actual = path[j]
                hits_post += int(map_fill(posterior_predictive(chain, obs, (i, j))) == actual)
                hits_true += int(map_fill(true_predictive(true_params, obs, (i, j))) == actual)
                trials += 1
    return (
        (gamma, n, rep, hits_post / trials, hits_true / trials),
        chain.diagnostics["acceptance"],
    )


def _run_cells(worker, payloads, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, payloads))
    return [worker(p) for p in payloads]


def _write_outputs(out_dir, cfg: StudyConfig, header, rows, diagnostics) -> None:
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    with open(os.path.join(out_dir, "config.echo.toml"), "w") as fh:
        fh.write(cfg.to_toml())
    with open(os.path.join(out_dir, "diagnostics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header[:3] + ("accept_gamma", "accept_edit_alloc", "accept_path_id"))
        for row, diag in zip(rows, diagnostics):
            writer.writerow(row[:3] + (diag["gamma"], diag["edit_alloc"], diag["path_id"]))


def run_concentration(cfg: StudyConfig, out_dir=None) -> list:
    """Fixed mode, varying true dispersion and sample size; one row per rep."""
    mode_true = _draw_mode(cfg, cfg.hollywood_alpha, _cell_seed(cfg.seed, 1))
    payloads = [
        (cfg, mode_true, gamma, n, rep, gi)
        for gi, gamma in enumerate(cfg.gamma_true)
        for n in cfg.n_values
        for rep in range(cfg.repetitions)
    ]
    results = _run_cells(_concentration_cell, payloads, cfg.workers)
    rows = [r for r, _ in results]
    _write_outputs(out_dir, cfg, CONC_HEADER, rows, [d for _, d in results])
    return rows


def run_structure(cfg: StudyConfig, out_dir=None) -> list:
    """Mode re-drawn per repetition from the urn at each alpha; fixed gamma."""
    payloads = [
        (cfg, alpha, ai, n, rep, 0)
        for ai, alpha in enumerate(cfg.alphas)
        for n in cfg.n_values
        for rep in range(cfg.repetitions)
    ]
    results = _run_cells(_structure_cell, payloads, cfg.workers)
    rows = [r for r, _ in results]
    _write_outputs(out_dir, cfg, STRUCT_HEADER, rows, [d for _, d in results])
    return rows


def run_predictive(cfg: StudyConfig, out_dir=None) -> list:
    """Missing-entry prediction accuracy of the posterior vs true predictive."""
    payloads = [
        (cfg, gamma, gi, n, rep, 0)
        for gi, gamma in enumerate(cfg.gamma_true)
        for n in cfg.n_values
        for rep in range(cfg.repetitions)
    ]
    results = _run_cells(_predictive_cell, payloads, cfg.workers)
    rows = [r for r, _ in results]
    _write_outputs(out_dir, cfg, PRED_HEADER, rows, [d for _, d in results])
    return rows


def select_alphas(
    targets: Sequence[float],
    cfg: StudyConfig,
    alpha_grid: Optional[Sequence[float]] = None,
    n_sims: int = 200,
) -> list:
    """Pick urn parameters hitting target mean 95%-quantiles of vertex counts.

    Simulates the quantile at each grid alpha, then inverts the resulting
    monotone table by linear interpolation.  Targets outside the simulated
    range raise.
    """
    if alpha_grid is None:
        alpha_grid = (-2.0, -1.0, -0.5, -0.25, -0.1, -0.05, -0.02, -0.01)
    alpha_grid = sorted(alpha_grid)
    if any(a >= 0 for a in alpha_grid):
        raise ValueError("urn parameters must be negative in the finite regime")
    rng = np.random.default_rng(_cell_seed(cfg.seed, 40))
    table = []
    for alpha in alpha_grid:
        params = HollywoodParams(alpha, cfg.V, cfg.length_dist())
        quants = []
        for _ in range(n_sims):
            obs = hollywood_sample(params, cfg.mode_paths, rng)
            counts = np.zeros(cfg.V, dtype=np.int64)
            for p in obs:
                for x in p:
                    counts[x] += 1
            positive = counts[counts > 0]
            quants.append(np.quantile(positive, 0.95))
        table.append(float(np.mean(quants)))
    diffs = np.diff(table)
    if (diffs < 0).any():
        raise ValueError(
            "simulated quantile table is not monotone; increase n_sims or widen the grid"
        )
    lo, hi = table[0], table[-1]
    for t in targets:
        if not lo <= t <= hi:
            raise ValueError(f"target {t} outside the simulated range [{lo}, {hi}]")
    return [float(a) for a in np.interp(targets, table, alpha_grid)]


def summarize(csv_path) -> str:
    """Median of each summary column per grid cell, as a printable table."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    param, nval = header[0], header[1]
    value_cols = header[3:]
    cells: dict = {}
    for row in rows:
        cells.setdefault((row[0], row[1]), []).append(row[3:])
    lines = [f"{param:>12} {nval:>6} " + " ".join(f"median_{c:>14}" for c in value_cols)]
    for key in sorted(cells):
        medians = np.median(np.array(cells[key]), axis=0)
        lines.append(
            f"{key[0]:>12g} {int(key[1]):>6d} "
            + " ".join(f"{m:>21.4f}" for m in medians)
        )
    return "\n".join(lines)
