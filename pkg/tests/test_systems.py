import numpy as np
import pytest

from conftest import random_ds
from rdcn import analytics as an
from rdcn.matrix import make_mv, make_mvu, make_perm, make_uniform, perm_matrix
from rdcn.schedule import (completion_time, link_loads, skewness, total_traffic,
                           verify_complete, verify_epsilon, verify_feasible)
from rdcn.systems import (NotDerangement, SystemConfig, UnknownSystem, evaluate_dcts,
                          evaluate_plus_dcts, pivot, pivot_plus, rr_cycle_configurations,
                          rr_upper, rr_upper_plus, run, schedule_bvn_direct,
                          schedule_rr_direct, schedule_rr_mulp, schedule_rr_oneperm)


def check(res, M, cfg, exact=True):
    assert verify_feasible(res.topology, res.traffic, cfg.r)
    if exact:
        assert verify_complete(M, res.traffic)
    else:
        assert verify_epsilon(M, res.traffic, cfg.eps)
    assert res.claimed_dct == pytest.approx(completion_time(res.topology), abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 5, 9, 16])
def test_rr_cycle_covers_complete_graph(n):
    C = rr_cycle_configurations(n)
    assert C.shape == (n - 1, n)
    pairs = {(k, int(C[c, k])) for c in range(n - 1) for k in range(n)}
    assert len(pairs) == n * (n - 1)
    assert all((k, k) not in pairs for k in range(n))


def test_bvn_direct():
    cfg = SystemConfig(R_b=0.015)
    res = schedule_bvn_direct(make_uniform(64), cfg)
    assert res.claimed_dct == pytest.approx(1.945, abs=1e-9)
    M = make_perm(8, seed=1)
    res = schedule_bvn_direct(M, SystemConfig(R_b=0.2))
    assert res.claimed_dct == pytest.approx(1.2)
    check(res, M, cfg)
    M = make_mv(16, 5, seed=1)
    res = schedule_bvn_direct(M, cfg)
    assert res.claimed_dct == pytest.approx(1 + 5 * 0.015)
    assert skewness(res.traffic) == 1


def test_rr_direct():
    res = schedule_rr_direct(make_uniform(64))
    assert res.claimed_dct == pytest.approx(1.0)
    M = make_perm(64, seed=0)
    res = schedule_rr_direct(M)
    assert res.claimed_dct == pytest.approx(63)
    check(res, M, SystemConfig())
    for v in (1, 3, 17, 40):
        assert schedule_rr_direct(make_mv(64, v, seed=v)).claimed_dct == pytest.approx(63 / v)
    res = schedule_rr_direct(make_uniform(64), SystemConfig(eta=0.9))
    assert res.claimed_dct == pytest.approx(1 / 0.9)


@pytest.mark.parametrize("delta,quantize", [(0.01, False), (0.013, False), (0.013, True)])
def test_fixed_delta_modes(delta, quantize):
    M = make_mv(16, 3, seed=2)
    R_r = 0.002
    cfg = SystemConfig(delta=delta, eta=delta / (delta + R_r), quantize=quantize)
    res = schedule_rr_direct(M, cfg)
    check(res, M, cfg)
    formula = an.dct_rr_direct(16, M.max(), cfg.eta)
    assert np.allclose(res.topology.reconf, R_r) or not quantize
    if quantize:
        assert res.claimed_dct >= formula - 1e-12
        assert np.all(res.topology.alpha == delta)
    else:
        assert res.claimed_dct == pytest.approx(formula, abs=1e-9)
    res = schedule_rr_mulp(M, cfg)
    check(res, M, cfg)
    formula = an.dct_rr_mulp(16, M.sum(), cfg.eta)
    if quantize:
        assert res.claimed_dct >= formula - 1e-12
    else:
        assert res.claimed_dct == pytest.approx(formula, abs=1e-9)


def test_oneperm():
    res = schedule_rr_oneperm(make_perm(64, seed=3))
    assert res.claimed_dct == pytest.approx(1.96875, abs=1e-12)
    assert len(res.topology) == 2 * 63
    M = make_perm(5, seed=3)
    res = schedule_rr_oneperm(M)
    assert res.claimed_dct == pytest.approx(1.6)
    loads = link_loads(res.traffic)
    off = ~np.eye(5, dtype=bool)
    np.testing.assert_allclose(loads[:4].sum(0)[off], 1 / 5)
    np.testing.assert_allclose(loads[4:].sum(0)[off], 1 / 5)
    half = schedule_rr_oneperm(0.5 * M)
    assert half.claimed_dct == pytest.approx(0.8)
    with pytest.raises(NotDerangement):
        schedule_rr_oneperm(make_mv(5, 2))


def test_mulp():
    cfg = SystemConfig(eps=1e-12)
    P = make_perm(12, seed=4)
    assert schedule_rr_mulp(P, cfg).claimed_dct == pytest.approx(
        schedule_rr_oneperm(P, cfg).claimed_dct, abs=1e-12)
    M = make_mv(5, 2, seed=1)
    res = schedule_rr_mulp(M, cfg)
    assert res.claimed_dct == pytest.approx(1.6)
    check(res, M, cfg)
    M = random_ds(64, 6, np.random.default_rng(1))
    res = schedule_rr_mulp(M, cfg)
    assert res.claimed_dct == pytest.approx(1.96875, abs=1e-9)
    check(res, M, cfg)
    assert skewness(res.traffic) == pytest.approx(2 / 64, abs=1e-12)


def test_rr_upper_matches_piecewise_formula():
    n = 32
    cfg = SystemConfig(eps=1e-12)
    for v in range(1, n):
        M = make_mv(n, v, seed=v)
        res = rr_upper(M, cfg)
        expect = 2 - 2 / n if v < n / 2 else (n - 1) / v
        assert res.claimed_dct == pytest.approx(expect, abs=1e-9)
        assert res.claimed_dct == pytest.approx(an.dct_rr_upper_mv(n, v), abs=1e-9)
        check(res, M, cfg)
    assert rr_upper(make_uniform(n)).claimed_dct == pytest.approx(1)


def test_rr_sandwich_on_mv():
    n = 16
    for v in range(1, n):
        M = make_mv(n, v, seed=v)
        sim = rr_upper(M, SystemConfig(eps=1e-12)).claimed_dct
        low = an.dct_rr_lower(n, n, 1, 1, an.skew_upper_mv(n, v, 1), 1)
        assert low - 1e-12 <= sim <= an.dct_rr_mulp(n, n) + 1e-12


def test_claim_one_rr_lower_bound(rng):
    for n in (5, 8, 16):
        M = random_ds(n, 4, rng)
        for res in (schedule_rr_direct(M), schedule_rr_mulp(M, SystemConfig(eps=1e-12))):
            hat = total_traffic(res.traffic)
            assert res.claimed_dct >= (n - 1) * hat.max() - 1e-12


def test_pivot_on_mv():
    cfg = SystemConfig(R_b=0.015, eps=1e-12)
    for v in (1, 10, 39, 40, 63):
        M = make_mv(64, v, seed=v)
        res = pivot(M, cfg)
        assert res.claimed_dct == pytest.approx(an.dct_comp_mv(v, 64, 0.015), abs=1e-9)
        assert res.split.f in (0, v)
    assert pivot(make_mv(64, 39), cfg).claimed_dct == pytest.approx(1.585)
    assert pivot(make_mv(64, 40), cfg).claimed_dct == pytest.approx(1.575)
    assert an.system_dct_mvu("comp", 64, 0.015)[2] >= 1.585


def test_pivot_mixed_split(rng):
    # a few heavy terms plus many light ones: the split lands strictly inside
    n = 16
    heavy = random_ds(n, 2, rng, 0.8)
    light = random_ds(n, 40, rng, 0.2)
    M = heavy + light
    cfg = SystemConfig(R_b=0.01, eps=1e-12)
    res = pivot(M, cfg)
    check(res, M, cfg, exact=False)
    assert 0 < res.split.f < len(res.decomposition)
    np.testing.assert_allclose(res.split.M_bvn + res.split.M_rr, M, atol=1e-9)
    b = schedule_bvn_direct(M, cfg).claimed_dct
    u = rr_upper(M, cfg).claimed_dct
    assert res.claimed_dct <= min(b, u) + 1e-12
    assert res.claimed_dct < min(b, u) - 1e-3


def test_pivot_plus():
    cfg = SystemConfig(R_b=0.015, eps=1e-12)
    M = make_mvu(32, 5, 0.3, seed=1)
    res = pivot_plus(M, cfg)
    assert res.uniform_load == pytest.approx(0.3)
    check(res, M, cfg)
    assert res.claimed_dct == pytest.approx(an.dct_comp_mvu(5, 0.3, 32, 0.015), abs=1e-9)
    M = make_mv(32, 5, seed=1)
    assert pivot_plus(M, cfg).claimed_dct == pytest.approx(pivot(M, cfg).claimed_dct)


def test_fast_evaluators_match_schedules(rng):
    cfg = SystemConfig(R_b=0.01, eta=0.8)
    for n in (6, 12, 20):
        M = random_ds(n, n, rng)
        d = evaluate_dcts(M, cfg)
        assert d.bvn == pytest.approx(schedule_bvn_direct(M, cfg).claimed_dct, abs=1e-9)
        assert d.rr == pytest.approx(rr_upper(M, cfg).claimed_dct, abs=1e-9)
        assert d.comp == pytest.approx(pivot(M, cfg).claimed_dct, abs=1e-9)
        M = make_mvu(n, 3, 0.4, seed=n)
        rp, cp = evaluate_plus_dcts(M, cfg)
        assert rp == pytest.approx(rr_upper_plus(M, cfg).claimed_dct, abs=1e-9)
        assert cp == pytest.approx(pivot_plus(M, cfg).claimed_dct, abs=1e-9)


def test_run_dispatch():
    M = make_perm(6, seed=0)
    assert run("rr-oneperm", M).label == "rr-oneperm"
    with pytest.raises(UnknownSystem):
        run("nope", M)


def test_zero_matrix():
    Z = np.zeros((5, 5))
    for name in ("bvn-direct", "rr-direct", "rr-mulp", "rr-upper", "comp-pivot",
                 "comp-pivot-plus"):
        assert run(name, Z).claimed_dct == 0
