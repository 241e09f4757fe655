"""Command-line interface binding all modules.

See README.md for the dataset JSON, multigraph CSV and config TOML formats.
"""

from __future__ import annotations

import csv
import json
import os
import shutil
import sys

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import FORMAT_VERSION, Dataset, SpaceBounds, as_observation
from .distances import MetricSpec
from .experiments import (
    StudyConfig,
    run_concentration,
    run_predictive,
    run_structure,
    summarize,
)
from .graphs import (
    SNFParams,
    SNFPosteriorConfig,
    aggregate,
    majority_vote,
    read_multigraph_csv,
    rounded_mean,
    snf_fit,
    snf_mcmc_sample,
    snf_point_estimates,
    write_multigraph_csv,
)
from .ingest import IngestConfig, ingest as ingest_tsv, load_category_map, select_subset
from .models import HollywoodParams, SIMParams, SISParams, TrPoisson, hollywood_sample
from .moves import MoveConfig
from .posterior import (
    GammaPrior,
    PosteriorConfig,
    PriorSpec,
    UniformPrior,
    fit as fit_posterior,
    point_estimates,
)
from .samplers import ChainConfig, run_sim_chain, run_sis_chain


def _load_observation(path):
    """A single observation: bare JSON array of arrays, or a one-observation dataset."""
    with open(path) as fh:
        payload = json.load(fh)
    if isinstance(payload, list):
        return as_observation(payload), None
    dataset = Dataset.from_json(json.dumps(payload))
    if len(dataset) != 1:
        raise click.ClickException(
            f"{path} holds {len(dataset)} observations; expected exactly one "
            "(use distmatrix for pairwise distances)"
        )
    return dataset.observations[0], dataset


def _load_toml(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _dispersion_prior(section: dict):
    dist = section.get("dist", "gamma")
    if dist == "gamma":
        if "rate" in section and "scale" in section:
            raise click.ClickException("give exactly one of rate/scale for the gamma prior")
        shape = float(section["shape"])
        if "scale" in section:
            return GammaPrior.with_scale(shape, float(section["scale"]))
        return GammaPrior(shape, float(section["rate"]))
    if dist == "uniform":
        return UniformPrior(float(section["lo"]), float(section["hi"]))
    raise click.ClickException(f"unknown dispersion prior {dist!r}")


def _posterior_config_from_toml(payload: dict, bounds: SpaceBounds):
    prior_section = payload.get("prior", {})
    dispersion = _dispersion_prior(prior_section.get("dispersion", {"dist": "gamma", "shape": 3.0, "rate": 1.0}))
    mode0 = prior_section.get("mode0")
    if mode0 is not None:
        mode0 = as_observation(mode0, bounds.V)
    prior = PriorSpec(dispersion, mode0=mode0, gamma0=float(prior_section.get("gamma0", 0.1)))

    moves = payload.get("moves", {})
    move = MoveConfig(
        nu_ed=int(moves.get("nu_ed", 2)),
        nu_td=int(moves.get("nu_td", 2)),
        beta=float(moves.get("beta", 0.5)),
        path_length=TrPoisson(
            float(moves.get("path_length_lambda", 3.0)),
            int(moves.get("path_length_min", 1)),
            int(moves.get("path_length_max", bounds.K)),
        ),
        insertion=moves.get("insertion", "uniform"),
        alpha_smooth=float(moves.get("alpha_smooth", 0.1)),
    )
    chain = payload.get("chain", {})
    aux = payload.get("aux", {})
    return PosteriorConfig(
        prior=prior,
        iterations=int(chain.get("iterations", 100)),
        burn_in=int(chain.get("burn_in", 0)),
        lag=int(chain.get("lag", 1)),
        gamma_step=float(chain.get("gamma_step", 0.5)),
        move=move,
        aux_burn_in=int(aux.get("burn_in", 100)),
        aux_lag=int(aux.get("lag", 1)),
        aux_exact=bool(aux.get("exact", False)),
        seed=chain.get("seed"),
    ), payload.get("inner", "lsp")


@click.group()
def main():
    """Bayesian modelling of populations of interaction networks."""


@main.command("ingest")
@click.option("--tsv", required=True, type=click.Path(exists=True))
@click.option("--category-map", "category_map", required=True, type=click.Path(exists=True))
@click.option("--min-path-len", default=2, show_default=True)
@click.option("--min-paths", default=10, show_default=True)
@click.option("--subset", default=None, type=int, help="Keep the tightest Steinhaus neighbourhood of this size.")
@click.option("--inner", default="lsp", type=click.Choice(["lsp", "lcs"]), show_default=True)
@click.option("--out", required=True, type=click.Path())
def ingest_cmd(tsv, category_map, min_path_len, min_paths, subset, inner, out):
    """Convert a check-in TSV into the dataset JSON format."""
    cfg = IngestConfig(load_category_map(category_map), min_path_len, min_paths)
    try:
        dataset = ingest_tsv(tsv, cfg)
        if subset is not None:
            dataset = select_subset(dataset, subset, inner)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    dataset.save(out)
    click.echo(f"wrote {len(dataset)} observations to {out}")


@main.command("distance")
@click.option("--metric", default="matching", type=click.Choice(["edit", "matching"]), show_default=True)
@click.option("--inner", default="lsp", type=click.Choice(["lsp", "lcs"]), show_default=True)
@click.option("--a", "file_a", required=True, type=click.Path(exists=True))
@click.option("--b", "file_b", required=True, type=click.Path(exists=True))
def distance_cmd(metric, inner, file_a, file_b):
    """Distance between two single-observation files."""
    obs_a, _ = _load_observation(file_a)
    obs_b, _ = _load_observation(file_b)
    click.echo(MetricSpec(metric, inner).distance(obs_a, obs_b))


@main.command("distmatrix")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--metric", default="matching", type=click.Choice(["edit", "matching"]), show_default=True)
@click.option("--inner", default="lsp", type=click.Choice(["lsp", "lcs"]), show_default=True)
@click.option("--out", default="-", type=click.Path(allow_dash=True), show_default=True)
def distmatrix_cmd(data, metric, inner, out):
    """Pairwise distance matrix of a dataset, as CSV."""
    dataset = Dataset.load(data)
    spec = MetricSpec(metric, inner)
    obs = dataset.observations
    n = len(obs)
    D = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = spec.distance(obs[i], obs[j])
    target = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.writer(target)
        writer.writerows(D.tolist())
    finally:
        if target is not sys.stdout:
            target.close()


@main.group("sample")
def sample_group():
    """Draw from the generative models."""


@sample_group.command("hollywood")
@click.option("--alpha", required=True, type=float)
@click.option("--v", "v_size", required=True, type=int)
@click.option("--lam", required=True, type=float, help="Truncated-Poisson rate for path lengths.")
@click.option("--lmin", default=1, show_default=True)
@click.option("--lmax", required=True, type=int)
@click.option("--paths", required=True, type=int, help="Paths per observation.")
@click.option("--reps", default=1, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
def sample_hollywood(alpha, v_size, lam, lmin, lmax, paths, reps, seed, out):
    """Draw interaction sequences from the rich-get-richer urn."""
    try:
        params = HollywoodParams(alpha, v_size, TrPoisson(lam, lmin, lmax))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    rng = np.random.default_rng(seed)
    observations = tuple(hollywood_sample(params, paths, rng) for _ in range(reps))
    Dataset(observations, SpaceBounds(v_size, lmax, paths), ordered=True).save(out)
    click.echo(f"wrote {reps} observations to {out}")


def _sample_model(kind, mode_file, gamma, inner, iters, burnin, lag, seed,
                  nu_ed, nu_td, beta, out, diagnostics):
    obs, dataset = _load_observation(mode_file)
    if dataset is None:
        raise click.ClickException("--mode must be a dataset JSON so bounds are known")
    bounds = dataset.bounds
    move = MoveConfig(nu_ed=nu_ed, nu_td=nu_td, beta=beta,
                      path_length=TrPoisson(3.0, 1, bounds.K))
    chain = ChainConfig(iters, burnin, lag, move, seed)
    if kind == "sis":
        params = SISParams(obs, gamma, bounds, inner)
        result = run_sis_chain(params, chain)
    else:
        params = SIMParams(obs, gamma, bounds, inner)
        result = run_sim_chain(params, chain)
    Dataset(tuple(result.samples), bounds, ordered=(kind == "sis"), labels=dataset.labels).save(out)
    if diagnostics:
        rates = result.acceptance_rates()
        with open(diagnostics, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_index", "distance_to_mode",
                             "accept_rate_edit_alloc", "accept_rate_path_id"])
            for i, d in enumerate(result.distances):
                writer.writerow([i, d, rates["edit_alloc"], rates["path_id"]])
    click.echo(f"wrote {iters} samples to {out}")


def _model_sample_options(f):
    for option in reversed([
        click.option("--mode", "mode_file", required=True, type=click.Path(exists=True)),
        click.option("--gamma", required=True, type=float),
        click.option("--inner", default="lsp", type=click.Choice(["lsp", "lcs"]), show_default=True),
        click.option("--iters", default=100, show_default=True),
        click.option("--burnin", default=0, show_default=True),
        click.option("--lag", default=1, show_default=True),
        click.option("--seed", default=None, type=int),
        click.option("--nu-ed", default=2, show_default=True),
        click.option("--nu-td", default=2, show_default=True),
        click.option("--beta", default=0.5, show_default=True),
        click.option("--out", required=True, type=click.Path()),
        click.option("--diagnostics", default=None, type=click.Path()),
    ]):
        f = option(f)
    return f


@sample_group.command("sis")
@_model_sample_options
def sample_sis(mode_file, gamma, inner, iters, burnin, lag, seed, nu_ed, nu_td, beta, out, diagnostics):
    """Approximate draws from a sequence model."""
    _sample_model("sis", mode_file, gamma, inner, iters, burnin, lag, seed,
                  nu_ed, nu_td, beta, out, diagnostics)


@sample_group.command("sim")
@_model_sample_options
def sample_sim(mode_file, gamma, inner, iters, burnin, lag, seed, nu_ed, nu_td, beta, out, diagnostics):
    """Approximate draws from a multiset model."""
    _sample_model("sim", mode_file, gamma, inner, iters, burnin, lag, seed,
                  nu_ed, nu_td, beta, out, diagnostics)


@sample_group.command("snf")
@click.option("--mode", "mode_file", required=True, type=click.Path(exists=True),
              help="Adjacency CSV (i,j,count).")
@click.option("--v", "v_size", default=None, type=int)
@click.option("--gamma", required=True, type=float)
@click.option("--phi", default="identity", type=click.Choice(["identity", "square"]), show_default=True)
@click.option("--nu", default=1, show_default=True)
@click.option("--iters", default=100, show_default=True)
@click.option("--burnin", default=0, show_default=True)
@click.option("--lag", default=1, show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
def sample_snf(mode_file, v_size, gamma, phi, nu, iters, burnin, lag, seed, out):
    """Approximate draws from a multigraph model; JSON list of adjacencies."""
    mode = read_multigraph_csv(mode_file, v_size)
    params = SNFParams(mode, gamma, phi)
    result = snf_mcmc_sample(params, iters, burnin, lag, nu, np.random.default_rng(seed))
    payload = {
        "format_version": FORMAT_VERSION,
        "V": params.V,
        "samples": [g.tolist() for g in result.samples],
    }
    with open(out, "w") as fh:
        json.dump(payload, fh)
    click.echo(f"wrote {iters} samples to {out}")


@main.group("fit")
def fit_group():
    """Posterior inference."""


def _fit_model(kind, data, config, out):
    dataset = Dataset.load(data)
    if kind == "sim" and dataset.ordered:
        click.echo("note: dataset is marked ordered; treating observations as multisets", err=True)
    if kind == "sis" and not dataset.ordered:
        raise click.ClickException("dataset is unordered; fit the multiset model instead")
    payload = _load_toml(config) if config else {}
    cfg, inner = _posterior_config_from_toml(payload, dataset.bounds)
    chain = fit_posterior(dataset.observations, kind, dataset.bounds, inner, cfg)
    mode_hat, gamma_hat = point_estimates(chain)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "chain.json"), "w") as fh:
        json.dump(
            {
                "format_version": FORMAT_VERSION,
                "model": kind,
                "inner": inner,
                "V": dataset.bounds.V,
                "K": dataset.bounds.K,
                "L": dataset.bounds.L,
                "modes": [[list(p) for p in m] for m in chain.modes],
                "gammas": chain.gammas,
            },
            fh,
        )
    with open(os.path.join(out, "diagnostics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "gamma", "dist_mode_to_prior",
                         "accept_gamma", "accept_edit_alloc", "accept_path_id"])
        acc = chain.diagnostics["acceptance"]
        for i, (g, d) in enumerate(zip(chain.gammas, chain.diagnostics["mode_trace_dist"])):
            writer.writerow([i, g, d, acc["gamma"], acc["edit_alloc"], acc["path_id"]])
    with open(os.path.join(out, "point_estimate.json"), "w") as fh:
        json.dump(
            {
                "format_version": FORMAT_VERSION,
                "model": kind,
                "mode": [list(p) for p in mode_hat],
                "gamma": gamma_hat,
            },
            fh,
        )
    if config:
        shutil.copyfile(config, os.path.join(out, "config.echo.toml"))
    click.echo(f"wrote chain of {len(chain)} samples to {out}")


@fit_group.command("sis")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def fit_sis(data, config, out):
    """Fit the sequence model posterior."""
    _fit_model("sis", data, config, out)


@fit_group.command("sim")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def fit_sim(data, config, out):
    """Fit the multiset model posterior."""
    _fit_model("sim", data, config, out)


@main.group("baseline")
def baseline_group():
    """Graph-aggregation baselines."""


def _aggregated(data, kind):
    dataset = Dataset.load(data)
    return [aggregate(o, dataset.bounds.V, kind) for o in dataset.observations]


@baseline_group.command("mv")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def baseline_mv(data, out):
    """Majority vote over aggregated binary graphs."""
    write_multigraph_csv(majority_vote(_aggregated(data, "graph")), out)
    click.echo(f"wrote majority-vote graph to {out}")


@baseline_group.command("rm")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def baseline_rm(data, out):
    """Rounded mean over aggregated multigraphs."""
    write_multigraph_csv(rounded_mean(_aggregated(data, "multigraph")), out)
    click.echo(f"wrote rounded-mean multigraph to {out}")


@baseline_group.command("snf")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def baseline_snf(data, config, out):
    """Multigraph model fit on aggregated data; writes the mode estimate."""
    graphs = _aggregated(data, "multigraph")
    payload = _load_toml(config) if config else {}
    cfg = SNFPosteriorConfig(
        dispersion=_dispersion_prior(payload.get("dispersion", {"dist": "gamma", "shape": 3.0, "rate": 1.0})),
        gamma0=float(payload.get("gamma0", 0.1)),
        gamma_step=float(payload.get("gamma_step", 0.5)),
        edge_step=int(payload.get("edge_step", 1)),
        iterations=int(payload.get("iterations", 100)),
        burn_in=int(payload.get("burn_in", 0)),
        lag=int(payload.get("lag", 1)),
        aux_burn_in=int(payload.get("aux_burn_in", 50)),
        aux_lag=int(payload.get("aux_lag", 1)),
        phi=payload.get("phi", "identity"),
        seed=payload.get("seed"),
    )
    chain = snf_fit(graphs, cfg)
    mode_hat, gamma_hat = snf_point_estimates(chain)
    write_multigraph_csv(mode_hat, out)
    click.echo(f"wrote multigraph mode estimate to {out} (gamma_hat={gamma_hat:.4f})")


@main.group("simulate")
def simulate_group():
    """Run the simulation studies."""


def _study_config(config) -> StudyConfig:
    if config is None:
        return StudyConfig()
    return StudyConfig.from_dict(_load_toml(config))


@simulate_group.command("concentration")
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def simulate_concentration(config, out):
    """Posterior concentration over (true dispersion, sample size)."""
    rows = run_concentration(_study_config(config), out)
    click.echo(f"wrote {len(rows)} rows to {out}/results.csv")


@simulate_group.command("structure")
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def simulate_structure(config, out):
    """Mode-structure effect: concentration across urn parameters."""
    rows = run_structure(_study_config(config), out)
    click.echo(f"wrote {len(rows)} rows to {out}/results.csv")


@simulate_group.command("predictive")
@click.option("--config", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def simulate_predictive(config, out):
    """Missing-entry accuracy of the posterior vs true predictive."""
    rows = run_predictive(_study_config(config), out)
    click.echo(f"wrote {len(rows)} rows to {out}/results.csv")


@main.command("summarize")
@click.option("--results", required=True, type=click.Path(exists=True))
def summarize_cmd(results):
    """Median trends per grid cell of a results.csv."""
    click.echo(summarize(results))


if __name__ == "__main__":
    main()
