import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from oracles import scalar
from rankmem import DimensionError, EmbedderConfig, HashingEmbedder, cosine_similarity, embed_text
from rankmem.embedder import normalize
from rankmem.exceptions import ConfigError

CFG = EmbedderConfig(dim=64, seed=42, feature_buckets=4096)

# frozen from tests/oracles/scalar.py (loop implementation of the hashing scheme)
COS_AB_ABC = 0.8355099778440247
COS_AB_XYZ = -0.08660254037844387


def test_deterministic():
    assert np.array_equal(embed_text("aa bb", CFG), embed_text("aa bb", CFG))


@pytest.mark.parametrize("text", ["", "   ", "\t\n  "])
def test_empty_text_is_first_basis_vector(text):
    v = embed_text(text, CFG)
    expected = np.zeros(64)
    expected[0] = 1.0
    assert np.array_equal(v, expected)


def test_cosine_fixture_matches_scalar_oracle():
    ab, abc, xyz = (embed_text(t, CFG) for t in ("aa bb", "aa bb cc", "xx yy zz"))
    assert cosine_similarity(ab, abc) == pytest.approx(COS_AB_ABC, abs=1e-12)
    assert cosine_similarity(ab, xyz) == pytest.approx(COS_AB_XYZ, abs=1e-12)
    assert cosine_similarity(ab, abc) > cosine_similarity(ab, xyz)


@pytest.mark.parametrize("text", ["Hello World", "a a a b", "naïve café ß"])
def test_matches_oracle_vector(text):
    cfg = EmbedderConfig(dim=16, seed=7, feature_buckets=64)
    ref = scalar.embed(text, 7, 16, 64)
    assert np.allclose(embed_text(text, cfg), ref, atol=1e-12)


def test_lowercase_and_whitespace_rule():
    assert np.array_equal(embed_text("AA  Bb\tcc", CFG), embed_text("aa bb cc", CFG))


def test_cosine_basics():
    v = embed_text("some words here", CFG)
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)
    e0, e1 = np.eye(64)[0], np.eye(64)[1]
    assert cosine_similarity(e0, e1) == 0.0
    a = normalize([1.0, 1.0] + [0.0] * 62)
    assert cosine_similarity(a, e0) == pytest.approx(0.7071, abs=1e-4)


def test_cosine_clamped_and_symmetric():
    a = np.full(4, 0.5 + 1e-15)
    assert cosine_similarity(a, a) <= 1.0
    b = embed_text("x y", CFG)
    c = embed_text("y z w", CFG)
    assert cosine_similarity(b, c) == cosine_similarity(c, b)


def test_cosine_dimension_mismatch():
    with pytest.raises(DimensionError):
        cosine_similarity(np.ones(3), np.ones(4))


@pytest.mark.parametrize("kw", [dict(dim=1), dict(dim=64, feature_buckets=32), dict(seed=-1), dict(seed=2**64)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        EmbedderConfig(**kw)


@settings(max_examples=60, deadline=None)
@given(st.text(max_size=80))
def test_unit_norm_and_finite(text):
    v = embed_text(text, CFG)
    assert v.shape == (64,)
    assert np.all(np.isfinite(v))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-6


def test_seed_sensitivity():
    rng = np.random.default_rng(0)
    alphabet = list("abcdefghij ")
    differ = 0
    for _ in range(100):
        text = "".join(rng.choice(alphabet, size=12)).strip() or "z"
        a = embed_text(text, EmbedderConfig(64, 1, 4096))
        b = embed_text(text, EmbedderConfig(64, 2, 4096))
        differ += not np.array_equal(a, b)
    assert differ >= 99


def test_hashing_embedder_transformer():
    est = HashingEmbedder(dim=64, seed=42, feature_buckets=4096)
    X = est.fit_transform(["aa bb", "", "xx yy zz"])
    assert X.shape == (3, 64)
    assert np.array_equal(X[0], embed_text("aa bb", CFG))
    assert est.get_params() == {"dim": 64, "seed": 42, "feature_buckets": 4096}
    assert clone(est).get_params() == est.get_params()


def test_hashing_embedder_in_pipeline():
    pipe = make_pipeline(HashingEmbedder(dim=16, feature_buckets=64),
                         FunctionTransformer(lambda X: X @ X.T))
    gram = pipe.fit_transform(["a b", "a b", "c"])
    assert gram[0, 1] == pytest.approx(1.0)


def test_hashing_embedder_rejects_bare_string():
    with pytest.raises(TypeError):
        HashingEmbedder(dim=16, feature_buckets=64).fit().transform("abc")
