import math

import numpy as np
import pytest

from pathnets.models import TrPoisson
from pathnets.moves import (
    CoOccurrence,
    EditAllocAux,
    MoveConfig,
    PathEdit,
    PathIDAux,
    build_cooccurrence,
    edit_alloc_aux_logpdf,
    edit_alloc_involution,
    edit_alloc_log_ratio,
    edit_alloc_sample_aux,
    informed_entry_dist,
    insert_path_logp,
    path_id_aux_logpdf,
    path_id_involution,
    path_id_log_ratio,
    path_id_sample_aux,
)

from oracles import random_obs

V = 4


def cfg_uniform(**kw):
    defaults = dict(nu_ed=3, nu_td=2, beta=0.5, path_length=TrPoisson(2.0, 1, 4))
    defaults.update(kw)
    return MoveConfig(**defaults)


def cfg_informed(rng, **kw):
    data = [random_obs(rng, V, 4, 3) for _ in range(6)]
    coocc = build_cooccurrence(data, V)
    return MoveConfig(
        nu_ed=3, nu_td=2, beta=0.5, path_length=TrPoisson(2.0, 1, 4),
        insertion="informed", alpha_smooth=0.3, cooccurrence=coocc, **kw
    )


def test_edit_alloc_forced_cases(rng):
    cfg = cfg_uniform(nu_ed=1)
    for _ in range(50):
        S = random_obs(rng, V, 4, 3)
        aux = edit_alloc_sample_aux(S, V, cfg, rng)
        assert aux.delta == 1 and sum(aux.z) == 1
        for z_i, e in zip(aux.z, aux.edits):
            if z_i == 0:
                assert e.d == 0 and e.v == () and e.y == ()


def test_edit_alloc_delta_uniform(rng):
    cfg = cfg_uniform(nu_ed=4)
    S = ((0, 1, 2), (3, 2))
    n = 10_000
    counts = np.zeros(4)
    for _ in range(n):
        counts[edit_alloc_sample_aux(S, V, cfg, rng).delta - 1] += 1
    p = 0.25
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sigma)


def test_edit_alloc_involution_roundtrip(rng):
    cfg = cfg_uniform()
    for _ in range(2000):
        S = random_obs(rng, V, 4, 4)
        aux = edit_alloc_sample_aux(S, V, cfg, rng)
        S2, aux2 = edit_alloc_involution(S, aux)
        S3, aux3 = edit_alloc_involution(S2, aux2)
        assert S3 == S and aux3 == aux


def test_edit_alloc_logpdf_matches_hand_computation(rng):
    cfg = cfg_uniform(nu_ed=3)
    for _ in range(300):
        S = random_obs(rng, V, 4, 3)
        aux = edit_alloc_sample_aux(S, V, cfg, rng)
        lp = edit_alloc_aux_logpdf(S, aux, V, cfg)
        # independent factorised computation, uniform insertions
        N = len(S)
        expected = math.log(1 / 3) + math.log(
            math.factorial(aux.delta)
            / math.prod(math.factorial(z) for z in aux.z)
            * (1 / N) ** aux.delta
        )
        for path, z_i, e in zip(S, aux.z, aux.edits):
            n_i = len(path)
            a_i = z_i - e.d
            m_i = n_i - e.d + a_i
            expected += math.log(
                1
                / (min(n_i, z_i) + 1)
                / math.comb(n_i, e.d)
                / math.comb(m_i, a_i)
                * (1 / V) ** a_i
            )
        assert lp == pytest.approx(expected, abs=1e-12)
        assert lp > -math.inf


def test_edit_alloc_ratio_antisymmetric_and_consistent(rng):
    for make_cfg in (lambda: cfg_uniform(), lambda: cfg_informed(rng)):
        cfg = make_cfg()
        for _ in range(400):
            S = random_obs(rng, V, 4, 3)
            aux = edit_alloc_sample_aux(S, V, cfg, rng)
            S2, aux2 = edit_alloc_involution(S, aux)
            ratio = edit_alloc_log_ratio(S, S2, aux, aux2, V, cfg)
            back = edit_alloc_log_ratio(S2, S, aux2, aux, V, cfg)
            assert ratio == pytest.approx(-back, abs=1e-10)
            if all(len(p) > 0 for p in S2):
                direct = edit_alloc_aux_logpdf(S2, aux2, V, cfg) - edit_alloc_aux_logpdf(
                    S, aux, V, cfg
                )
                assert ratio == pytest.approx(direct, abs=1e-10)


def test_edit_alloc_balanced_uniform_ratio_zero(rng):
    cfg = cfg_uniform()
    S = ((0, 1, 2), (3, 2, 1))
    # balanced: d_i = a_i for every path, so n_i = m_i
    aux = EditAllocAux(2, (2, 0), (PathEdit(1, (1,), (2,), (3,)), PathEdit(0, (), (), ())))
    S2, aux2 = edit_alloc_involution(S, aux)
    assert edit_alloc_log_ratio(S, S2, aux, aux2, V, cfg) == pytest.approx(0.0)


def test_edit_alloc_unbalanced_ratio_value():
    # n1=3, z1=2, d1=2, a1=0: ratio = log[(min(3,2)+1)/(min(1,2)+1)] + 2*log(1/V)
    cfg = cfg_uniform()
    S = ((0, 1, 2),)
    aux = EditAllocAux(2, (2,), (PathEdit(2, (0, 2), (), ()),))
    S2, aux2 = edit_alloc_involution(S, aux)
    assert S2 == ((1,),)
    expected = math.log(3 / 2) + 2 * math.log(1 / V)
    got = edit_alloc_log_ratio(S, S2, aux, aux2, V, cfg)
    assert got == pytest.approx(expected, abs=1e-12)
    direct = edit_alloc_aux_logpdf(S2, aux2, V, cfg) - edit_alloc_aux_logpdf(S, aux, V, cfg)
    assert got == pytest.approx(direct, abs=1e-12)


def test_edit_alloc_can_empty_a_path(rng):
    cfg = cfg_uniform()
    S = ((0,),)
    aux = EditAllocAux(1, (1,), (PathEdit(1, (0,), (), ()),))
    S2, aux2 = edit_alloc_involution(S, aux)
    assert S2 == ((),)  # representable; samplers reject it as out of support
    S3, _ = edit_alloc_involution(S2, aux2)
    assert S3 == S


def test_path_id_sample_and_epsilon_uniform(rng):
    cfg = cfg_uniform(nu_td=3)
    S = ((0, 1), (2,))
    n = 10_000
    counts = np.zeros(3)
    for _ in range(n):
        counts[path_id_sample_aux(S, V, cfg, rng).epsilon - 1] += 1
    p = 1 / 3
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sigma)


def test_path_id_boundaries(rng):
    cfg = cfg_uniform(nu_td=1)
    S = ((0, 1),)
    seen_insert = seen_delete = False
    for _ in range(200):
        aux = path_id_sample_aux(S, V, cfg, rng)
        assert aux.epsilon == 1
        if aux.d == 0:
            assert len(aux.inserted) == 1
            seen_insert = True
        else:
            prop, _ = path_id_involution(S, aux)
            assert prop == ()  # empty proposal representable, rejected downstream
            seen_delete = True
    assert seen_insert and seen_delete


def test_path_id_involution_roundtrip(rng):
    cfg = cfg_uniform()
    for _ in range(2000):
        S = random_obs(rng, V, 4, 4)
        aux = path_id_sample_aux(S, V, cfg, rng)
        S2, aux2 = path_id_involution(S, aux)
        S3, aux3 = path_id_involution(S2, aux2)
        assert S3 == S and aux3 == aux


def test_path_id_logpdf_matches_hand_computation(rng):
    cfg = cfg_uniform(nu_td=2)
    for _ in range(300):
        S = random_obs(rng, V, 4, 3)
        aux = path_id_sample_aux(S, V, cfg, rng)
        lp = path_id_aux_logpdf(S, aux, V, cfg)
        N = len(S)
        a = aux.epsilon - aux.d
        M = N - aux.d + a
        expected = -math.log(2) - math.log(min(N, aux.epsilon) + 1)
        expected -= math.log(math.comb(N, aux.d))
        expected -= math.log(math.comb(M, a))
        for p in aux.inserted:
            expected += cfg.path_length.logpmf(len(p)) + len(p) * math.log(1 / V)
        assert lp == pytest.approx(expected, abs=1e-12)


def test_path_id_ratio_antisymmetric_and_consistent(rng):
    for make_cfg in (lambda: cfg_uniform(), lambda: cfg_informed(rng)):
        cfg = make_cfg()
        for _ in range(400):
            S = random_obs(rng, V, 4, 3)
            aux = path_id_sample_aux(S, V, cfg, rng)
            S2, aux2 = path_id_involution(S, aux)
            ratio = path_id_log_ratio(S, S2, aux, aux2, V, cfg)
            back = path_id_log_ratio(S2, S, aux2, aux, V, cfg)
            assert ratio == pytest.approx(-back, abs=1e-10)
            if len(S2) > 0:
                direct = path_id_aux_logpdf(S2, aux2, V, cfg) - path_id_aux_logpdf(S, aux, V, cfg)
                assert ratio == pytest.approx(direct, abs=1e-10)


def test_path_id_symmetric_swap_ratio_zero():
    cfg = cfg_uniform()
    S = ((0, 1), (2, 3))
    # delete path 0 and insert a path of the same length: densities cancel
    aux = PathIDAux(2, 1, (0,), (1,), ((1, 0),))
    S2, aux2 = path_id_involution(S, aux)
    assert path_id_log_ratio(S, S2, aux, aux2, V, cfg) == pytest.approx(0.0, abs=1e-12)


def test_cooccurrence_definition():
    coocc = build_cooccurrence([((1, 2),)], V=3)
    assert coocc.counts[1, 2] == 1 and coocc.counts[2, 1] == 1
    assert coocc.counts[1, 1] == 0 and coocc.counts[2, 2] == 0
    coocc = build_cooccurrence([((1, 1),)], V=3)
    assert coocc.counts[1, 1] == 1
    # counted per observation, not per path
    coocc = build_cooccurrence([((1, 2), (2, 1)), ((1, 2),)], V=3)
    assert coocc.counts[1, 2] == 2
    assert coocc.vertex_counts[1] == 2 and coocc.vertex_counts[0] == 0


def test_smoothed_rows_approach_uniform():
    coocc = build_cooccurrence([((0, 1), (1, 2))], V=3)
    rows = coocc.smoothed_rows(1e9)
    assert np.allclose(rows, 1.0 / 3.0, atol=1e-6)
    assert np.allclose(coocc.row_probs().sum(axis=1), 1.0)


def test_informed_entry_dist():
    coocc = build_cooccurrence([((0, 1), (1, 2))], V=3)
    alpha = 0.2
    rows = coocc.smoothed_rows(alpha)
    single = informed_entry_dist(coocc, (1,), alpha)
    assert np.allclose(single, rows[1] / rows[1].sum())
    pair = informed_entry_dist(coocc, (0, 2), alpha)
    mix = (rows[0] + rows[2]) / 2
    assert np.allclose(pair, mix / mix.sum())
    empty = informed_entry_dist(coocc, (), alpha)
    assert np.allclose(empty, 1.0 / 3.0)
    # repeated preserved vertices collapse to the unique set
    assert np.allclose(informed_entry_dist(coocc, (1, 1), alpha), single)


def test_zero_count_rows_fall_back_to_uniform():
    coocc = build_cooccurrence([((0, 1),)], V=4)
    rows = coocc.row_probs()
    assert np.allclose(rows[2], 0.25) and np.allclose(rows[3], 0.25)


def test_insert_path_logp_informed(rng):
    cfg = cfg_informed(rng)
    path = (0, 1)
    weights = cfg.cooccurrence.vertex_weights(cfg.alpha_smooth)
    expected = cfg.path_length.logpmf(2) + math.log(weights[0]) + math.log(weights[1])
    assert insert_path_logp(cfg, V, path) == pytest.approx(expected, abs=1e-12)


def test_aux_validation_errors():
    S = ((0, 1),)
    with pytest.raises(ValueError):
        edit_alloc_involution(S, EditAllocAux(1, (2,), (PathEdit(0, (), (), ()),)))
    with pytest.raises(ValueError):
        edit_alloc_involution(S, EditAllocAux(1, (1,), (PathEdit(2, (0, 1), (), ()),)))
    with pytest.raises(ValueError):
        path_id_involution(S, PathIDAux(1, 2, (0, 0), (), ()))
    with pytest.raises(ValueError):
        path_id_involution(S, PathIDAux(1, 0, (), (0,), (((),))))
