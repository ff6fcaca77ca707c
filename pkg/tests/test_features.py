import random

import numpy as np
import pytest

from complexity_lens.features import (
    LEXICAL_DIM,
    NGRAM_SEP,
    Lexicon,
    Vocabulary,
    build_vocabulary,
    design_matrix,
    feature_dim,
    featurize,
    featurize_lexical,
    featurize_ngrams,
    load_aoa_lexicon,
    mean_feature_vector,
)
from conftest import make_instance, toks


def write_lexicon(tmp_path, body, header="Word,Rating.Mean"):
    path = tmp_path / "aoa.csv"
    path.write_text(header + "\n" + body, encoding="utf-8")
    return path


class TestLoadAoaLexicon:
    def test_single_row(self, tmp_path):
        lex = load_aoa_lexicon(write_lexicon(tmp_path, "dog,3.5\n"))
        assert lex.ratings == {"dog": 3.5}
        assert lex.skipped == 0

    def test_non_numeric_rating_skipped(self, tmp_path):
        lex = load_aoa_lexicon(write_lexicon(tmp_path, "dog,3.5\ncat,n/a\n"))
        assert lex.ratings == {"dog": 3.5}
        assert lex.skipped == 1

    def test_words_lowercased_and_first_kept(self, tmp_path):
        lex = load_aoa_lexicon(write_lexicon(tmp_path, "Dog,3.5\nDOG,9.9\n"))
        assert lex.ratings == {"dog": 3.5}

    def test_missing_column(self, tmp_path):
        path = write_lexicon(tmp_path, "dog,3.5\n", header="Token,Score")
        with pytest.raises(ValueError, match="missing columns"):
            load_aoa_lexicon(path)

    def test_custom_columns(self, tmp_path):
        path = write_lexicon(tmp_path, "dog,x,4.25\n", header="w,junk,r")
        lex = load_aoa_lexicon(path, word_col="w", rating_col="r")
        assert lex.ratings == {"dog": 4.25}

    def test_negative_rating_skipped(self, tmp_path):
        lex = load_aoa_lexicon(write_lexicon(tmp_path, "dog,-1\n"))
        assert lex.ratings == {} and lex.skipped == 1

    def test_invalid_ratings_rejected_on_construction(self):
        with pytest.raises(ValueError):
            Lexicon(ratings={"dog": float("nan")})


class TestBuildVocabulary:
    def test_bigram_vocab(self):
        vocab = build_vocabulary([make_instance("a b", 1)], max_n=2, min_df=1)
        assert set(vocab.entries) == {"a", "b", f"a{NGRAM_SEP}b"}
        assert sorted(vocab.entries.values()) == [0, 1, 2]

    def test_min_df_excludes_rare(self):
        instances = [make_instance("a b", 1), make_instance("a c", 0)]
        vocab = build_vocabulary(instances, max_n=1, min_df=2)
        assert set(vocab.entries) == {"a"}

    def test_determinism(self):
        instances = [make_instance("c a b a", 1), make_instance("b c", 0)]
        first = build_vocabulary(instances, max_n=3, min_df=1)
        second = build_vocabulary(instances, max_n=3, min_df=1)
        assert first.entries == second.entries
        assert first.fingerprint == second.fingerprint

    def test_empty_training_set(self):
        with pytest.raises(ValueError):
            build_vocabulary([], max_n=2, min_df=1)

    def test_ids_are_dense_bijection(self):
        rng = random.Random(9)
        instances = [
            make_instance(" ".join(rng.choices("defgh", k=rng.randint(1, 7))), 1)
            for _ in range(30)
        ]
        vocab = build_vocabulary(instances, max_n=3, min_df=1)
        ids = sorted(vocab.entries.values())
        assert ids == list(range(len(vocab)))

    def test_document_frequency_is_per_instance(self):
        # "a" twice in one instance still counts as document frequency 1.
        instances = [make_instance("a a", 1), make_instance("b", 0)]
        vocab = build_vocabulary(instances, max_n=1, min_df=2)
        assert set(vocab.entries) == set()

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocabulary([make_instance("a b", 1)], max_n=2, min_df=1)
        vocab.save(tmp_path / "vocab.json")
        loaded = Vocabulary.load(tmp_path / "vocab.json")
        assert loaded.entries == vocab.entries
        assert loaded.fingerprint == vocab.fingerprint


class TestFeaturizeNgrams:
    def test_counts(self):
        vocab = build_vocabulary([make_instance("a b", 1)], max_n=2, min_df=1)
        vec = featurize_ngrams(toks("a b"), vocab)
        assert vec == {
            vocab.entries["a"]: 1.0,
            vocab.entries["b"]: 1.0,
            vocab.entries[f"a{NGRAM_SEP}b"]: 1.0,
        }

    def test_oov_dropped(self):
        vocab = build_vocabulary([make_instance("a b", 1)], max_n=2, min_df=1)
        assert featurize_ngrams(toks("z"), vocab) == {}

    def test_repeated_token_counted(self):
        vocab = build_vocabulary([make_instance("a b", 1)], max_n=1, min_df=1)
        assert featurize_ngrams(toks("a a"), vocab) == {vocab.entries["a"]: 2.0}

    def test_unigram_sum_property(self):
        rng = random.Random(2)
        corpus = [
            make_instance(" ".join(rng.choices("mnopq", k=rng.randint(1, 8))), 1)
            for _ in range(20)
        ]
        vocab = build_vocabulary(corpus, max_n=2, min_df=1)
        unigram_ids = {
            fid for key, fid in vocab.entries.items() if NGRAM_SEP not in key
        }
        for _ in range(30):
            sent = toks(" ".join(rng.choices("mnopqrs", k=rng.randint(1, 9))))
            vec = featurize_ngrams(sent, vocab)
            assert all(v > 0 and v == int(v) for v in vec.values())
            in_vocab = sum(1 for t in sent if t.norm in vocab.entries)
            assert sum(v for f, v in vec.items() if f in unigram_ids) == in_vocab


class TestFeaturizeLexical:
    def test_covered_token(self):
        vec = featurize_lexical(toks("dog"), Lexicon(ratings={"dog": 3.5}))
        assert vec[3] == 3.5  # mean AoA
        assert vec[4] == 3.5  # max AoA
        assert vec[6] == 1.0  # coverage

    def test_empty_lexicon_zeroes_aoa(self):
        vec = featurize_lexical(toks("dog house"), None)
        assert set(vec) == {0, 1, 2}  # only count/char features stored

    def test_char_statistics(self):
        vec = featurize_lexical(toks("a bb ccc"), None)
        assert vec[0] == 3.0
        assert vec[1] == 2.0
        assert vec[2] == 3.0

    def test_hard_word_count_threshold(self):
        lex = Lexicon(ratings={"abstruse": 12.0, "dog": 3.0})
        vec = featurize_lexical(toks("abstruse dog"), lex)
        assert vec[5] == 1.0
        vec = featurize_lexical(toks("abstruse dog"), lex, hard_aoa_threshold=3.0)
        assert vec[5] == 2.0

    def test_base_offset(self):
        vec = featurize_lexical(toks("dog"), None, base=100)
        assert set(vec) <= set(range(100, 100 + LEXICAL_DIM))

    def test_coverage_bounds_property(self):
        rng = random.Random(4)
        lex = Lexicon(ratings={w: rng.uniform(1, 15) for w in "abcde"})
        for _ in range(60):
            sent = toks(" ".join(rng.choices("abcdefgh", k=rng.randint(1, 9))))
            vec = featurize_lexical(sent, lex)
            coverage = vec.get(6, 0.0)
            assert 0.0 <= coverage <= 1.0
            if coverage > 0:
                assert vec.get(3, 0.0) <= vec.get(4, 0.0) + 1e-12

    def test_no_zero_entries_stored(self):
        assert 5 not in featurize_lexical(toks("dog"), Lexicon(ratings={"dog": 3.0}))


class TestDesignMatrix:
    def test_shapes_and_means(self):
        instances = [make_instance("a b", 1), make_instance("a", 0)]
        vocab = build_vocabulary(instances, max_n=1, min_df=1)
        X = design_matrix(instances, vocab)
        assert X.shape == (2, feature_dim(vocab))
        mu = mean_feature_vector(instances, vocab)
        assert mu.shape == (feature_dim(vocab),)
        assert mu[vocab.entries["a"]] == 1.0  # present once in each row
        np.testing.assert_allclose(np.asarray(X.mean(axis=0)).ravel(), mu)

    def test_combined_featurize_offsets_lexical_block(self):
        instances = [make_instance("a b", 1)]
        vocab = build_vocabulary(instances, max_n=1, min_df=1)
        vec = featurize(toks("a b"), vocab)
        assert vec[len(vocab) + 0] == 2.0  # token count lives after n-gram ids
