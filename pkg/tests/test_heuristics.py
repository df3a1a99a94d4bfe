import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divkit.corpus import Corpus, Document, TokenizerKind
from divkit.heuristics import (
    MetricError,
    NGramConfig,
    compression_ratio,
    context_length,
    ngram_diversity,
    self_repetition,
)

from conftest import random_corpus
from oracles import (
    oracle_compression_ratio,
    oracle_context_length,
    oracle_ngram_diversity,
    oracle_self_repetition,
)

WS = TokenizerKind.WHITESPACE


def corpus_of(*texts: str) -> Corpus:
    return Corpus.from_documents([Document(id=f"d{i}", text=t) for i, t in enumerate(texts)])


class TestContextLength:
    def test_mean_of_token_counts(self):
        assert context_length(corpus_of("a b", "a b c d"), WS).value == 3.0

    def test_single_doc(self):
        assert context_length(corpus_of("a b c d e f g"), WS).value == 7.0

    def test_empty_corpus_errors(self):
        with pytest.raises(MetricError):
            context_length(Corpus(source="<none>", fmt="memory", count=0, docs=[]), WS)

    def test_matches_oracle_on_random_fixture(self):
        corpus = random_corpus(5, 100)
        docs = list(corpus)
        got = context_length(corpus, WS).value
        want = oracle_context_length(docs, WS)
        assert got == pytest.approx(want, rel=1e-12)


class TestSelfRepetition:
    def test_single_doc_no_repetition(self):
        # "a b c d e" at n=4: two 4-grams, no other documents.
        result = self_repetition(corpus_of("a b c d e"), NGramConfig(n_max=4, tokenizer=WS))
        assert result.value == pytest.approx(math.log(4), abs=1e-12)

    def test_two_identical_docs(self):
        result = self_repetition(
            corpus_of("a b c d e", "a b c d e"), NGramConfig(n_max=4, tokenizer=WS)
        )
        assert result.value == pytest.approx(math.log(8), abs=1e-12)

    def test_short_docs_skipped_not_padded(self):
        cfg = NGramConfig(n_max=4, tokenizer=WS)
        with_short = self_repetition(corpus_of("a b c d e", "x y"), cfg)
        alone = self_repetition(corpus_of("a b c d e"), cfg)
        assert with_short.value == alone.value
        assert with_short.params["docs_skipped"] == "1"

    def test_all_docs_too_short_errors(self):
        with pytest.raises(MetricError):
            self_repetition(corpus_of("a b", "c"), NGramConfig(n_max=4, tokenizer=WS))

    def test_matches_all_pairs_oracle(self):
        corpus = random_corpus(11, 50, min_len=2, max_len=30)
        got = self_repetition(corpus, NGramConfig(n_max=3, tokenizer=WS)).value
        want = oracle_self_repetition(list(corpus), 3, WS)
        assert got == pytest.approx(want, rel=1e-12)

    def test_permutation_invariant(self):
        docs = list(random_corpus(13, 30, min_len=4))
        cfg = NGramConfig(n_max=3, tokenizer=WS)
        forward = self_repetition(Corpus.from_documents(docs), cfg).value
        backward = self_repetition(Corpus.from_documents(docs[::-1]), cfg).value
        assert forward == pytest.approx(backward, rel=1e-12)


class TestNgramDiversity:
    def test_unigram_only(self):
        cfg = NGramConfig(n_min=1, n_max=1, tokenizer=WS)
        assert ngram_diversity(corpus_of("a a a a"), cfg).value == 0.25

    def test_orders_one_to_four_hand_count(self):
        cfg = NGramConfig(n_min=1, n_max=4, tokenizer=WS)
        value = ngram_diversity(corpus_of("a a a a"), cfg).value
        assert value == pytest.approx(1 / 4 + 1 / 3 + 1 / 2 + 1 / 1, rel=1e-12)

    def test_empty_order_contributes_zero_and_flagged(self):
        cfg = NGramConfig(n_min=1, n_max=4, tokenizer=WS)
        result = ngram_diversity(corpus_of("a b"), cfg)
        assert result.params["empty_orders"] == "3,4"
        assert result.value == pytest.approx(2 / 2 + 1 / 1, rel=1e-12)

    def test_matches_hash_set_oracle(self):
        corpus = random_corpus(17, 100)
        cfg = NGramConfig(n_min=1, n_max=4, tokenizer=WS)
        got = ngram_diversity(corpus, cfg).value
        want = oracle_ngram_diversity(list(corpus), 1, 4, WS)
        assert got == pytest.approx(want, rel=1e-12)

    def test_all_distinct_docs_give_one_per_order(self):
        # No shared tokens anywhere: every order term is exactly 1.
        texts = [f"w{i}a w{i}b w{i}c w{i}d" for i in range(10)]
        cfg = NGramConfig(n_min=1, n_max=3, tokenizer=WS)
        result = ngram_diversity(corpus_of(*texts), cfg)
        assert result.value == pytest.approx(3.0, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_per_order_terms_in_unit_interval(self, seed):
        corpus = random_corpus(seed, 12, min_len=1, max_len=20)
        result = ngram_diversity(corpus, NGramConfig(n_min=1, n_max=4, tokenizer=WS))
        for n in range(1, 5):
            raw = result.params[f"order_{n}"]
            if "no n-grams" in raw:
                continue
            assert 0.0 < float(raw) <= 1.0


class TestCompressionRatio:
    def test_highly_repetitive_corpus(self):
        corpus = corpus_of("abc" * 10_000)
        assert compression_ratio(corpus, level=6).value > 50

    def test_tiny_corpus_ratio_below_one(self):
        assert compression_ratio(corpus_of("a"), level=6).value < 1

    def test_matches_reference_gzip(self):
        corpus = random_corpus(23, 80)
        for level in (1, 6, 9):
            got = compression_ratio(corpus, level=level).value
            assert got == oracle_compression_ratio(list(corpus), level)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_duplicating_corpus_never_lowers_ratio(self, seed):
        docs = list(random_corpus(seed, 10, min_len=1, max_len=30))
        doubled = docs + [Document(id=f"{d.id}+", text=d.text) for d in docs]
        base = compression_ratio(Corpus.from_documents(docs), 6).value
        dup = compression_ratio(Corpus.from_documents(doubled), 6).value
        assert dup >= base

    def test_bad_level(self):
        with pytest.raises(MetricError):
            compression_ratio(corpus_of("a"), level=0)


def test_ngram_config_validation():
    with pytest.raises(ValueError):
        NGramConfig(n_min=0)
    with pytest.raises(ValueError):
        NGramConfig(n_min=3, n_max=2)
    with pytest.raises(ValueError):
        NGramConfig(n_max=9)


def test_params_record_knobs():
    corpus = corpus_of("a b c d e")
    assert compression_ratio(corpus, 6).params["level"] == "6"
    assert context_length(corpus, WS).params["tokenizer"] == "whitespace"
    sr = self_repetition(corpus, NGramConfig(n_max=2, tokenizer=WS))
    assert sr.params["log_base"] == "e"
    assert sr.params["neighbor_counting"] == "documents"
