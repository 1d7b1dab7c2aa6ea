import json
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repsumm.errors import DimMismatch, EmptyCorpus
from repsumm.textproc import (
    CharNgramTokenizer,
    TermVector,
    TfidfVectorizer,
    WhitespaceTokenizer,
    cjk_ratio,
    cosine,
    segment,
    select_tokenizer,
    tokenizer_from_spec,
)


class TestSegment:
    def test_two_terminated_sentences(self):
        assert [s.text for s in segment("A。B。")] == ["A。", "B。"]

    def test_empty_input(self):
        assert segment("") == []

    def test_trailing_fragment_kept(self):
        assert [s.text for s in segment("abc")] == ["abc"]

    def test_ascii_terminator_needs_following_whitespace(self):
        assert [s.text for s in segment("3.14 is pi. Yes.")] == ["3.14 is pi.", "Yes."]

    def test_terminator_runs_stay_attached(self):
        assert [s.text for s in segment("A！！B。")] == ["A！！", "B。"]

    def test_inter_sentence_whitespace_dropped(self):
        assert [s.text for s in segment("A。 \n B。")] == ["A。", "B。"]

    def test_provenance_and_indices(self):
        sentences = segment("一。二。三。", source_doc="doc-1")
        assert [s.index for s in sentences] == [0, 1, 2]
        assert all(s.source_doc == "doc-1" for s in sentences)

    def test_whitespace_only_input(self):
        assert segment(" \n\t ") == []

    @given(st.text(alphabet="ab 。.！x\n", max_size=60))
    @settings(max_examples=300)
    def test_reconstruction_property(self, text):
        sentences = segment(text)
        pos = 0
        for s in sentences:
            assert s.text
            while pos < len(text) and text[pos].isspace():
                pos += 1
            assert text[pos : pos + len(s.text)] == s.text
            pos += len(s.text)
        assert text[pos:].strip() == ""


class TestTokenizers:
    def test_char_bigram_window(self):
        assert CharNgramTokenizer(2).tokenize("abcd") == ["ab", "bc", "cd"]

    def test_short_text_fallback(self):
        assert CharNgramTokenizer(2).tokenize("a") == ["a"]

    def test_whitespace_run_collapse(self):
        assert WhitespaceTokenizer().tokenize("a  b") == ["a", "b"]

    def test_char_ngram_strips_whitespace(self):
        assert CharNgramTokenizer(2).tokenize("a b\nc") == ["ab", "bc"]

    def test_char_ngram_empty(self):
        assert CharNgramTokenizer(2).tokenize("  ") == []

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            CharNgramTokenizer(0)

    def test_spec_round_trip(self):
        for tok in (WhitespaceTokenizer(), CharNgramTokenizer(3)):
            assert tokenizer_from_spec(tok.spec) == tok
        with pytest.raises(ValueError):
            tokenizer_from_spec("morpheme")

    def test_auto_selection(self):
        assert isinstance(select_tokenizer("金利が低下しました。"), CharNgramTokenizer)
        assert isinstance(select_tokenizer("rates went down"), WhitespaceTokenizer)
        assert cjk_ratio("") == 0.0


def brute_force_tfidf(docs, tokenize):
    """Independent recomputation of the tf*idf weights from first principles."""
    vocab = []
    df = Counter()
    for doc in docs:
        terms = tokenize(doc)
        for t in terms:
            if t not in vocab:
                vocab.append(t)
        df.update(set(terms))
    n = len(docs)
    idf = {t: math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab}

    def weights(text):
        counts = Counter(t for t in tokenize(text) if t in idf)
        w = {t: c * idf[t] for t, c in counts.items()}
        norm = math.sqrt(sum(v * v for v in w.values()))
        return {t: v / norm for t, v in w.items()} if norm else {}

    return vocab, idf, weights


class TestTfidf:
    def test_idf_values(self):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["a b", "a c"])
        assert model.idf_[model.vocabulary_["a"]] == pytest.approx(1.0, abs=1e-12)
        assert model.idf_[model.vocabulary_["b"]] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)

    def test_single_doc(self):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["x"])
        assert set(model.vocabulary_) == {"x"}
        assert model.idf_[0] == pytest.approx(1.0, abs=1e-12)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit([])

    def test_column_order_follows_first_occurrence(self):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["b a", "c a"])
        assert model.vocabulary_ == {"b": 0, "a": 1, "c": 2}

    def test_single_active_term_normalizes_to_one(self):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["a b", "a c"])
        v = model.vector("a a")
        assert v.entries == {model.vocabulary_["a"]: pytest.approx(1.0)}

    def test_out_of_vocabulary_gives_zero_vector(self):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["a b", "a c"])
        assert model.vector("z").entries == {}

    def test_transform_frozen_values(self):
        # Oracle: idf = (1.0, ln(3/2)+1); normalize (1.0, 1.4054651081).
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["a b", "a c"])
        v = model.vector("a b")
        assert v.entries[model.vocabulary_["a"]] == pytest.approx(0.5797386715376657, abs=1e-9)
        assert v.entries[model.vocabulary_["b"]] == pytest.approx(0.8148024746671689, abs=1e-9)

    @given(
        st.lists(
            st.lists(st.sampled_from("abcdef"), min_size=1, max_size=8).map(" ".join),
            min_size=1,
            max_size=5,
        ),
        st.lists(st.sampled_from("abcdefgh"), min_size=0, max_size=8).map(" ".join),
    )
    @settings(max_examples=200)
    def test_matches_brute_force(self, docs, query):
        tok = WhitespaceTokenizer()
        model = TfidfVectorizer(tokenizer=tok).fit(docs)
        _, idf, weights = brute_force_tfidf(docs, tok.tokenize)
        for col, got in model.vector(query).entries.items():
            term = next(t for t, c in model.vocabulary_.items() if c == col)
            assert got == pytest.approx(weights(query)[term], abs=1e-12)
        assert len(model.vector(query).entries) == len(weights(query))
        for t, v in idf.items():
            assert model.idf_[model.vocabulary_[t]] == pytest.approx(v, abs=1e-12)

    @given(st.text(alphabet="abcdef ", max_size=30))
    @settings(max_examples=200)
    def test_unit_norm_or_zero(self, query):
        model = TfidfVectorizer(tokenizer=WhitespaceTokenizer()).fit(["a b c", "c d e"])
        v = model.vector(query)
        assert v.norm() == pytest.approx(1.0, abs=1e-9) or v.entries == {}

    def test_save_load_round_trip(self, tmp_path):
        model = TfidfVectorizer(tokenizer=CharNgramTokenizer(2)).fit(["金利低下", "株価上昇"])
        path = tmp_path / "tfidf.json"
        model.save(path)
        loaded = TfidfVectorizer.load(path)
        assert loaded.vocabulary_ == model.vocabulary_
        assert list(loaded.idf_) == list(model.idf_)
        assert loaded.n_docs_ == model.n_docs_
        assert loaded.vector("金利").entries == model.vector("金利").entries
        assert json.loads(path.read_text())["tokenizer"] == "char:2"

    def test_get_params(self):
        tok = CharNgramTokenizer(2)
        assert TfidfVectorizer(tokenizer=tok).get_params() == {"tokenizer": tok}


class TestCosine:
    def test_self_similarity(self):
        v = TermVector({0: 0.3, 2: 0.9}, dim=4)
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports(self):
        assert cosine(TermVector({0: 1.0}, 3), TermVector({1: 1.0}, 3)) == 0.0

    def test_analytic_value(self):
        a = TermVector({0: 1.0, 1: 1.0}, 2)
        b = TermVector({0: 1.0}, 2)
        assert cosine(a, b) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_zero_norm_defined(self):
        assert cosine(TermVector({}, 2), TermVector({0: 1.0}, 2)) == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine(TermVector({0: 1.0}, 2), TermVector({0: 1.0}, 3))

    @given(
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.lists(st.floats(-5, 5), min_size=3, max_size=3),
        st.floats(0.01, 100),
    )
    @settings(max_examples=200)
    def test_symmetry_and_scale_invariance(self, xs, ys, lam):
        a = TermVector.from_dense(xs)
        b = TermVector.from_dense(ys)
        assert cosine(a, b) == cosine(b, a)
        scaled = TermVector.from_dense([lam * x for x in xs])
        assert cosine(scaled, b) == pytest.approx(cosine(a, b), abs=1e-9)
        assert -1.0 - 1e-12 <= cosine(a, b) <= 1.0 + 1e-12

    def test_entry_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            TermVector({3: 1.0}, dim=3)
