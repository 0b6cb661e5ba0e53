import numpy as np
import pytest

from rumourseq.embeddings import EmbeddingConfig, EmbeddingModel, build_vocabulary, train_embeddings, tweet_vector

SMALL = EmbeddingConfig(dim=20, window=2, negatives=5, epochs=30, seed=3)


def cosine(u, v):
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def topic_corpus(seed=0, n=150):
    rng = np.random.default_rng(seed)
    left, right = ["a", "b", "c", "d"], ["z", "w", "v", "u"]
    out = []
    for _ in range(n):
        words = left if rng.random() < 0.5 else right
        out.append(list(rng.choice(words, size=5)))
    return out


def test_cooccurring_tokens_are_closer():
    model = train_embeddings(topic_corpus(), SMALL)
    a, b, z = (model.vector(t) for t in "abz")
    assert cosine(a, b) > cosine(a, z)


def test_deterministic_for_fixed_seed():
    m1 = train_embeddings(topic_corpus(), SMALL)
    m2 = train_embeddings(topic_corpus(), SMALL)
    np.testing.assert_array_equal(m1.matrix, m2.matrix)
    m3 = train_embeddings(topic_corpus(), EmbeddingConfig(**{**SMALL.__dict__, "seed": 4}))
    assert not np.array_equal(m1.matrix, m3.matrix)


def test_vocabulary_order_and_min_count():
    vocab, counts = build_vocabulary([["b", "a", "b"], ["c", "a", "b"]], min_count=2)
    assert vocab == {"b": 0, "a": 1}
    assert list(counts) == [3, 2]
    model = train_embeddings([["b", "a", "b"], ["c", "a", "b"]], EmbeddingConfig(dim=4, min_count=2))
    assert "c" not in model


def test_tweet_vector_examples():
    model = EmbeddingModel({"x": 0, "y": 1}, np.array([[1.0, 0.0], [0.0, 3.0]]), EmbeddingConfig(dim=2))
    np.testing.assert_array_equal(tweet_vector(model, ["x", "y", "oov"]), [0.5, 1.5])
    np.testing.assert_array_equal(tweet_vector(model, ["oov"]), [0.0, 0.0])
    np.testing.assert_array_equal(tweet_vector(model, []), [0.0, 0.0])


def test_tweet_vector_ignores_token_order():
    model = train_embeddings(topic_corpus(), SMALL)
    tokens = ["a", "z", "b", "c", "u", "a"]
    rng = np.random.default_rng(0)
    base = tweet_vector(model, tokens)
    for _ in range(20):
        np.testing.assert_array_equal(tweet_vector(model, list(rng.permutation(tokens))), base)


def test_save_load_exact(tmp_path):
    model = train_embeddings(topic_corpus(), SMALL)
    model.save(tmp_path / "emb.txt")
    back = EmbeddingModel.load(tmp_path / "emb.txt")
    assert back.vocabulary == model.vocabulary
    assert back.config == model.config
    np.testing.assert_array_equal(back.matrix, model.matrix)


def test_load_rejects_other_files(tmp_path):
    (tmp_path / "x.txt").write_text("word 1 2 3\n")
    with pytest.raises(ValueError):
        EmbeddingModel.load(tmp_path / "x.txt")


def test_invalid_config():
    with pytest.raises(ValueError):
        EmbeddingConfig(dim=0)
