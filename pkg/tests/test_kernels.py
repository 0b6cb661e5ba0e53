import numpy as np
import pytest

from rumourseq import _pure, kernels
from rumourseq.embeddings import EmbeddingConfig, train_embeddings

compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")


@pytest.fixture
def python_backend():
    before = kernels.backend_name()
    kernels.use_backend("python")
    yield
    kernels.use_backend(before)


@compiled
@pytest.mark.parametrize("n", [1, 2, 17, 300])
def test_chain_kernels_agree(n):
    from rumourseq import _kernels

    rng = np.random.default_rng(n)
    unary = rng.normal(scale=3, size=(n, 2))
    trans = rng.normal(size=(2, 2))
    np.testing.assert_allclose(_kernels.forward(unary, trans), _pure.forward(unary, trans), rtol=0, atol=1e-12)
    np.testing.assert_allclose(_kernels.backward(unary, trans), _pure.backward(unary, trans), rtol=0, atol=1e-12)
    d1, b1 = _kernels.viterbi_forward(unary, trans)
    d2, b2 = _pure.viterbi_forward(unary, trans)
    np.testing.assert_array_equal(d1, d2)
    np.testing.assert_array_equal(b1, b2)


@compiled
def test_sgns_kernels_agree():
    from rumourseq import _kernels

    rng = np.random.default_rng(0)
    v, d, p = 30, 8, 200
    w_in = rng.normal(scale=0.1, size=(v, d))
    w_out = rng.normal(scale=0.1, size=(v, d))
    centers = rng.integers(0, v, size=p)
    contexts = rng.integers(0, v, size=p)
    negatives = rng.integers(0, v, size=(p, 3))
    rates = np.linspace(0.05, 0.001, p)
    a_in, a_out, b_in, b_out = w_in.copy(), w_out.copy(), w_in.copy(), w_out.copy()
    _kernels.sgns_update(a_in, a_out, centers, contexts, negatives, rates)
    _pure.sgns_update(b_in, b_out, centers, contexts, negatives, rates)
    np.testing.assert_allclose(a_in, b_in, atol=1e-12)
    np.testing.assert_allclose(a_out, b_out, atol=1e-12)


@compiled
def test_training_agrees_across_backends(python_backend):
    corpus = [["a", "b", "c", "d"], ["b", "c", "e"], ["a", "e", "d", "c"]] * 5
    cfg = EmbeddingConfig(dim=10, window=2, negatives=3, epochs=3, seed=4)
    slow = train_embeddings(corpus, cfg)
    kernels.use_backend("compiled")
    fast = train_embeddings(corpus, cfg)
    np.testing.assert_allclose(fast.matrix, slow.matrix, atol=1e-10)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("gpu")
