import gzip
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moralframe.embeddings import (
    DimensionMismatchError,
    EmbeddingFileError,
    EmptyEmbeddingFileError,
    NonNumericError,
    cosine,
    load_embeddings,
    lookup,
    write_embeddings,
)


def write(tmp_path, text, name="emb.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_minimal_file(tmp_path):
    t = load_embeddings(write(tmp_path, "cat 1.0 0.0\ndog 0.0 1.0\n"))
    assert t.dimension == 2
    assert t.token_count == 2


def test_duplicate_first_wins(tmp_path):
    t = load_embeddings(write(tmp_path, "cat 1.0 0.0\ncat 9.9 9.9\n"))
    assert t.token_count == 1
    assert tuple(lookup(t, "cat")) == (1.0, 0.0)
    assert t.duplicate_count == 1


def test_duplicate_after_case_folding(tmp_path):
    t = load_embeddings(write(tmp_path, "Cat 1.0 0.0\nCAT 2.0 0.0\n"))
    assert t.token_count == 1 and t.duplicate_count == 1


def test_inconsistent_dimension_names_line(tmp_path):
    with pytest.raises(DimensionMismatchError, match="line 2"):
        load_embeddings(write(tmp_path, "cat 1.0 0.0\ndog 0.5\n"))


def test_non_numeric(tmp_path):
    with pytest.raises(NonNumericError, match="line 1"):
        load_embeddings(write(tmp_path, "cat 1.0 x\n"))


def test_non_finite_rejected(tmp_path):
    with pytest.raises(NonNumericError):
        load_embeddings(write(tmp_path, "cat 1.0 nan\n"))


def test_expected_dim_mismatch(tmp_path):
    with pytest.raises(DimensionMismatchError, match="expected_dim 3"):
        load_embeddings(write(tmp_path, "cat 1.0 0.0\n"), expected_dim=3)


def test_empty_file(tmp_path):
    with pytest.raises(EmptyEmbeddingFileError):
        load_embeddings(write(tmp_path, ""))


def test_missing_file(tmp_path):
    with pytest.raises(EmbeddingFileError):
        load_embeddings(tmp_path / "nope.txt")


def test_gzip_detected_by_magic(tmp_path):
    p = tmp_path / "emb.bin"  # extension deliberately uninformative
    with gzip.open(p, "wt", encoding="utf-8") as fh:
        fh.write("cat 1.0 0.0\ndog 0.0 1.0\n")
    t = load_embeddings(p)
    assert t.token_count == 2


def test_restrict_to(tmp_path):
    t = load_embeddings(write(tmp_path, "cat 1 0\ndog 0 1\ncat 5 5\n"), restrict_to={"dog"})
    assert t.token_count == 1 and "dog" in t and t.duplicate_count == 1


def test_lookup_case_folding(toy_table, tmp_path):
    t = load_embeddings(write(tmp_path, "cat 1.0 0.0\ndog 0.0 1.0\n"))
    assert tuple(lookup(t, "CAT")) == (1.0, 0.0)
    assert lookup(t, "zzz") is None
    assert tuple(lookup(t, "dog")) == (0.0, 1.0)


def test_cosine_examples():
    assert cosine((1, 0), (1, 0)) == 1.0
    assert cosine((1, 0), (0, 1)) == 0.0
    # 4 / (sqrt5 * sqrt5)
    assert cosine((1, 2), (2, 1)) == pytest.approx(0.8, abs=1e-15)


def test_cosine_errors():
    with pytest.raises(ValueError):
        cosine((0, 0), (1, 0))
    with pytest.raises(ValueError):
        cosine((1, 0), (1, 0, 0))


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: math.sqrt(sum(x * x for x in v)) > 1e-3
)


@given(vec, vec)
def test_cosine_symmetry(u, v):
    assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-15)
    assert -1.0 <= cosine(u, v) <= 1.0


@given(vec, vec, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_cosine_scale_invariance(u, v, a, b):
    su = [a * x for x in u]
    sv = [b * x for x in v]
    assert cosine(su, sv) == pytest.approx(cosine(u, v), abs=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_bit_exact(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    d = tmp_path_factory.mktemp("rt")
    lines = [f"w{i} " + " ".join(repr(float(x)) for x in rng.normal(size=4)) for i in range(6)]
    t1 = load_embeddings(write(d, "\n".join(lines) + "\n"))
    write_embeddings(t1, d / "out.txt")
    t2 = load_embeddings(d / "out.txt")
    assert t1.tokens == t2.tokens
    assert np.array_equal(t1.vectors, t2.vectors)


def test_table_is_read_only(toy_table):
    with pytest.raises(ValueError):
        toy_table.vectors[0, 0] = 5.0
