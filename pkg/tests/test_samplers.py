import math

import numpy as np
import pytest

from pathnets.core import SpaceBounds, canonicalize, in_bounds
from pathnets.models import SIMParams, SISParams, TrPoisson, exact_pmf
from pathnets.moves import MoveConfig
from pathnets.samplers import (
    ChainConfig,
    a_count,
    log_a_count,
    run_sim_chain,
    run_sis_chain,
    sim_mcmc_sample,
    sis_mcmc_sample,
)

from oracles import empirical_dist, tv_distance

TINY = SpaceBounds(2, 2, 2)


def tiny_move_cfg():
    return MoveConfig(nu_ed=2, nu_td=2, beta=0.5, path_length=TrPoisson(2.0, 1, 2))


def test_a_count_examples():
    assert a_count(((0,), (1,), (0, 1))) == 6
    assert a_count(((0,), (0,), (1,))) == 3
    assert a_count(((0, 1),)) == 1
    big = tuple(((i % 3,),) * 1 for i in range(30))
    assert log_a_count(big) == pytest.approx(math.log(a_count(big)), rel=1e-12)


def test_chain_bookkeeping():
    params = SISParams(((0, 1),), 1.0, TINY, "lsp")
    for m, b, lag in [(5, 0, 1), (7, 13, 3), (1, 4, 2)]:
        chain = ChainConfig(m, b, lag, tiny_move_cfg(), seed=0)
        result = run_sis_chain(params, chain)
        assert len(result.samples) == m
        assert sum(result.proposed.values()) == b + (m - 1) * lag + 1


def test_all_samples_supported_and_deterministic():
    params = SISParams(((0, 1), (1,)), 1.2, TINY, "lcs")
    chain = ChainConfig(200, 50, 1, tiny_move_cfg(), seed=42)
    r1 = run_sis_chain(params, chain)
    r2 = run_sis_chain(params, chain)
    assert r1.samples == r2.samples
    assert all(in_bounds(s, TINY) for s in r1.samples)
    metric = params.metric
    assert r1.distances == [metric.distance(s, params.mode) for s in r1.samples]


def test_large_gamma_concentrates_on_mode():
    params = SISParams(((0, 1),), 50.0, TINY, "lsp")
    samples = sis_mcmc_sample(params, ChainConfig(500, 100, 1, tiny_move_cfg(), seed=7))
    share = sum(s == params.mode for s in samples) / len(samples)
    assert share >= 0.99


def test_sis_chain_matches_exact_pmf():
    gamma = 1.5
    params = SISParams(((0, 1), (1,)), gamma, TINY, "lsp")
    pmf = exact_pmf(params)
    samples = sis_mcmc_sample(params, ChainConfig(30_000, 2_000, 1, tiny_move_cfg(), seed=3))
    assert tv_distance(empirical_dist(samples), pmf) < 0.08


def test_sim_chain_matches_exact_pmf():
    gamma = 1.5
    params = SIMParams(((0, 1), (1,)), gamma, TINY, "lsp")
    pmf = exact_pmf(params)
    samples = sim_mcmc_sample(params, ChainConfig(30_000, 2_000, 1, tiny_move_cfg(), seed=4))
    assert all(canonicalize(s) == s for s in samples[:50])
    assert tv_distance(empirical_dist(samples), pmf) < 0.08


def test_sim_states_are_canonical_multisets():
    params = SIMParams(((1, 0), (0,)), 1.0, TINY, "lsp")
    assert params.mode == canonicalize(params.mode)
    result = run_sim_chain(params, ChainConfig(50, 10, 1, tiny_move_cfg(), seed=9))
    assert all(canonicalize(s) == s for s in result.samples)


def test_init_must_be_supported():
    params = SISParams(((0, 1),), 1.0, TINY, "lsp")
    with pytest.raises(ValueError):
        run_sis_chain(params, ChainConfig(5, 0, 1, tiny_move_cfg(), seed=0),
                      init=((0, 1, 0),))


def test_acceptance_rates_reported():
    params = SISParams(((0, 1),), 1.0, TINY, "lsp")
    result = run_sis_chain(params, ChainConfig(300, 0, 1, tiny_move_cfg(), seed=1))
    rates = result.acceptance_rates()
    assert set(rates) == {"edit_alloc", "path_id"}
    assert all(0.0 <= r <= 1.0 for r in rates.values())
    assert result.proposed["edit_alloc"] + result.proposed["path_id"] == 300
