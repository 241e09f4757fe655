import math

import numpy as np
import pytest

from pathnets.core import SpaceBounds, canonicalize
from pathnets.models import (
    HollywoodParams,
    SIMParams,
    SISParams,
    TrPoisson,
    enumerate_multisets,
    enumerate_sequences,
    exact_entropy,
    exact_partition,
    exact_pmf,
    hollywood_sample,
    log_kernel,
    space_size,
)

from oracles import brute_seq_distance

TINY = SpaceBounds(2, 2, 2)


def test_space_enumeration_counts():
    assert space_size(SpaceBounds(2, 1, 1), ordered=True) == 2
    assert space_size(TINY, ordered=True) == 42
    assert len(list(enumerate_sequences(TINY))) == 42
    multisets = list(enumerate_multisets(TINY))
    assert len(multisets) == space_size(TINY, ordered=False) == 27
    assert all(canonicalize(m) == m for m in multisets)


def test_log_kernel():
    params = SISParams(((0, 1),), 2.0, SpaceBounds(2, 4, 2), "lsp")
    assert log_kernel(((0, 1),), params) == 0.0
    # d_edit(((0,0,0,0),), ((0,1),)) = 4 + 2 - 2*min... pin via oracle
    obs = ((0, 0, 0, 0),)
    d = brute_seq_distance(obs, ((0, 1),), "lsp")
    assert log_kernel(obs, params) == -2.0 * d
    with pytest.raises(ValueError):
        log_kernel(((0, 0, 0, 0, 0),), params)


def test_exact_partition_examples():
    one = SISParams(((0,),), 3.7, SpaceBounds(1, 1, 1), "lsp")
    assert exact_partition(one) == pytest.approx(1.0)
    for gamma in (0.5, 1.0, 2.0):
        two = SISParams(((0,),), gamma, SpaceBounds(2, 1, 1), "lsp")
        assert exact_partition(two) == pytest.approx(1.0 + math.exp(-2.0 * gamma))
    big_gamma = SISParams(((0,),), 40.0, SpaceBounds(2, 1, 1), "lsp")
    assert exact_partition(big_gamma) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        exact_partition(SISParams(((0,),), 1.0, SpaceBounds(5, 5, 5), "lsp"), cap=1000)


def test_exact_pmf():
    one = SISParams(((0,),), 1.0, SpaceBounds(1, 1, 1), "lsp")
    assert exact_pmf(one) == {((0,),): 1.0}
    gamma = 1.3
    two = SISParams(((0,),), gamma, SpaceBounds(2, 1, 1), "lsp")
    pmf = exact_pmf(two)
    z = 1.0 + math.exp(-2.0 * gamma)
    assert pmf[((0,),)] == pytest.approx(1.0 / z)
    assert pmf[((1,),)] == pytest.approx(math.exp(-2.0 * gamma) / z)
    params = SISParams(((0, 1), (1,)), 0.8, TINY, "lcs")
    pmf = exact_pmf(params)
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-12)
    assert max(pmf, key=pmf.get) == params.mode
    # probability non-increasing in distance to the mode
    metric = params.metric
    pairs = sorted(pmf.items(), key=lambda kv: metric.distance(kv[0], params.mode))
    dists = [metric.distance(s, params.mode) for s, _ in pairs]
    probs = [p for _, p in pairs]
    for (d1, p1), (d2, p2) in zip(zip(dists, probs), zip(dists[1:], probs[1:])):
        if d1 < d2:
            assert p1 >= p2


def test_exact_entropy_limits_and_monotonicity():
    near_point = SISParams(((0,),), 50.0, SpaceBounds(2, 1, 1), "lsp")
    assert exact_entropy(near_point) == pytest.approx(0.0, abs=1e-8)
    near_uniform = SISParams(((0,),), 1e-9, SpaceBounds(2, 1, 1), "lsp")
    assert exact_entropy(near_uniform) == pytest.approx(math.log(2), abs=1e-6)
    h1 = exact_entropy(SISParams(((0, 1), (1,)), 1.0, TINY, "lcs"))
    h2 = exact_entropy(SISParams(((0, 1), (1,)), 2.0, TINY, "lcs"))
    assert h1 > h2
    hm1 = exact_entropy(SIMParams(((0, 1), (1,)), 1.0, TINY, "lcs"))
    hm2 = exact_entropy(SIMParams(((0, 1), (1,)), 2.0, TINY, "lcs"))
    assert hm1 > hm2


def test_trpoisson():
    degenerate = TrPoisson(2.0, 1, 1)
    assert degenerate.pmf(1) == pytest.approx(1.0)
    dist = TrPoisson(3.0, 1, 10)
    assert sum(dist.pmf(k) for k in range(1, 11)) == pytest.approx(1.0)
    assert dist.pmf(0) == 0.0 and dist.pmf(11) == 0.0
    ratio = TrPoisson(3.0, 1, 2)
    assert ratio.pmf(2) / ratio.pmf(1) == pytest.approx(1.5)
    rng = np.random.default_rng(0)
    draws = [dist.sample(rng) for _ in range(500)]
    assert all(1 <= k <= 10 for k in draws)
    with pytest.raises(ValueError):
        TrPoisson(0.0, 1, 2)
    with pytest.raises(ValueError):
        TrPoisson(1.0, 3, 2)


def test_hollywood_finite_regime_checks():
    with pytest.raises(ValueError):
        HollywoodParams(0.3, 5, TrPoisson(3.0, 1, 5))
    with pytest.raises(ValueError):
        HollywoodParams(-0.3, 5, TrPoisson(3.0, 1, 5), theta=2.0)
    HollywoodParams(-0.3, 5, TrPoisson(3.0, 1, 5), theta=1.5)  # = -alpha*V


def test_hollywood_single_vertex(rng):
    params = HollywoodParams(-0.5, 1, TrPoisson(2.0, 1, 4))
    obs = hollywood_sample(params, 5, rng)
    assert all(x == 0 for p in obs for x in p)


def test_hollywood_draw_properties(rng):
    params = HollywoodParams(-0.3, 6, TrPoisson(3.0, 2, 5))
    for _ in range(200):
        obs = hollywood_sample(params, 4, rng)
        assert len(obs) == 4
        assert all(2 <= len(p) <= 5 for p in obs)
        assert len({x for p in obs for x in p}) <= 6
