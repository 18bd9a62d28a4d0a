import numpy as np
import pytest

from rdcn.matrix import is_doubly_stochastic, metrics
from rdcn.traffic import InvalidParams, TmParams, generate_tm, raw_tm, sinkhorn


def test_all_large_no_noise_is_exact():
    p = TmParams(1.0, 10, 0.7, 16, noise=0.0, seed=1)
    M = generate_tm(p)
    assert is_doubly_stochastic(M, 1e-12)
    vals = np.unique(np.round(M[M > 0] * 10, 9))
    assert np.all(vals == np.round(vals))   # multiples of 1/n_f


def test_raw_weight_without_noise():
    p = TmParams(0.2, 50, 0.7, 20, noise=0.0, seed=2)
    assert raw_tm(p).sum() == pytest.approx(20)


def test_output_doubly_stochastic_and_zero_diagonal():
    for nf in (4, 64, 3000):
        M = generate_tm(TmParams(0.2, nf, 0.7, 64, seed=nf))
        assert is_doubly_stochastic(M, 1e-6)
        assert np.all(np.diag(M) == 0)


def test_determinism():
    p = TmParams(0.2, 100, 0.7, 16, seed=5)
    assert np.array_equal(generate_tm(p), generate_tm(p))
    q = TmParams(0.2, 100, 0.7, 16, seed=6)
    assert not np.array_equal(generate_tm(p), generate_tm(q))


def test_flow_counts():
    p = TmParams(0.2, 64, 0.7, 8)
    assert (p.n_l, p.n_s) == (13, 51)


def test_literal_weights_differ():
    a = raw_tm(TmParams(0.2, 64, 0.7, 16, noise=0.0, seed=1))
    b = raw_tm(TmParams(0.2, 64, 0.7, 16, noise=0.0, seed=1, literal=True))
    assert not np.allclose(a, b)
    assert b.sum() == pytest.approx(16)


def test_trend_over_flows():
    spars, maxes = [], []
    for nf in (16, 256, 4096):
        ms = [metrics(generate_tm(TmParams(0.2, nf, 0.7, 64, seed=s))) for s in range(30)]
        spars.append(np.mean([m.sparsity for m in ms]))
        maxes.append(np.mean([m.max_entry for m in ms]))
    assert spars[0] > spars[1] > spars[2]
    assert maxes[0] > maxes[1] > maxes[2]


def test_bad_params():
    with pytest.raises(InvalidParams):
        generate_tm(TmParams(1.5, 10, 0.5, 8))
    with pytest.raises(InvalidParams):
        generate_tm(TmParams(0.99, 10, 0.5, 8))


def test_sinkhorn():
    rng = np.random.default_rng(0)
    A = rng.random((6, 6))
    np.fill_diagonal(A, 0)
    B = sinkhorn(A)
    np.testing.assert_allclose(B.sum(0), 1, atol=1e-9)
    np.testing.assert_allclose(B.sum(1), 1, atol=1e-9)
