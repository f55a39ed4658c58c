import itertools
import math
import random
from collections import Counter

import pytest

from newsim.augment import (
    AugmentedPair,
    bm25_score,
    build_index,
    canonical,
    distribution_report,
    index_terms,
    make_translation_plan,
    pair_exclusions,
    read_augmented_pairs,
    read_translation_plan,
    sample_bm25_pairs,
    sample_random_pairs,
    self_label,
    write_augmented_pairs,
    write_translation_plan,
)
from newsim.corpus import Document

from conftest import make_doc, make_pair


def doc_of(doc_id, text, title=""):
    return Document(id=doc_id, lang="en", title=title, body=text)


def toy_docs():
    return {
        "d1": doc_of("d1", "apple banana apple"),
        "d2": doc_of("d2", "banana cherry"),
        "d3": doc_of("d3", "cherry cherry durian apple"),
        "d4": doc_of("d4", "elderberry"),
    }


def reference_bm25(docs, query_terms, doc_id, k1=1.2, b=0.75):
    """Independent direct-formula evaluation from raw token lists."""
    token_lists = {i: index_terms(d) for i, d in docs.items()}
    n = len(docs)
    avgdl = sum(len(t) for t in token_lists.values()) / n
    tf = Counter(token_lists[doc_id])
    score = 0.0
    for term in query_terms:
        df = sum(1 for tokens in token_lists.values() if term in tokens)
        if tf[term] == 0:
            continue
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf[term] * (k1 + 1) / (tf[term] + k1 * (1 - b + b * len(token_lists[doc_id]) / avgdl))
    return score


class TestIndex:
    def test_single_term_docs(self):
        docs = {f"d{i}": doc_of(f"d{i}", f"term{i}") for i in range(3)}
        index = build_index(docs)
        assert index.n_docs == 3
        assert index.avgdl == 1.0

    def test_deterministic_rebuild(self):
        docs = toy_docs()
        a = build_index(docs)
        b = build_index(docs)
        assert a == b

    def test_postings_match_hand_enumeration(self):
        index = build_index(toy_docs())
        # hand-built inverted index for the 4-document toy corpus
        assert index.postings["apple"] == {"d1": 2, "d3": 1}
        assert index.postings["banana"] == {"d1": 1, "d2": 1}
        assert index.postings["cherry"] == {"d2": 1, "d3": 2}
        assert index.postings["durian"] == {"d3": 1}
        assert index.postings["elderberry"] == {"d4": 1}
        assert index.doc_len == {"d1": 3, "d2": 2, "d3": 4, "d4": 1}
        assert index.avgdl == 2.5

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_index({})

    def test_title_indexed_with_body(self):
        docs = {"d1": doc_of("d1", "body words", title="Title Here"),
                "d2": doc_of("d2", "other")}
        index = build_index(docs)
        assert "title" in index.postings


class TestScore:
    def test_no_matching_terms(self):
        index = build_index(toy_docs())
        assert bm25_score(index, ["zebra", "yak"], "d1") == 0.0

    def test_single_doc_closed_form(self):
        docs = {"solo": doc_of("solo", "alpha beta alpha")}
        index = build_index(docs)
        got = bm25_score(index, ["alpha"], "solo")
        # N=1, df=1, tf=2, len=avgdl=3
        idf = math.log(1 + (1 - 1 + 0.5) / (1 + 0.5))
        expected = idf * 2 * (1.2 + 1) / (2 + 1.2 * (1 - 0.75 + 0.75 * 1.0))
        assert abs(got - expected) < 1e-12

    def test_rare_term_scores_higher(self):
        docs = {
            "q": doc_of("q", "common rare"),
            "a": doc_of("a", "common filler"),
            "b": doc_of("b", "common filler"),
            "c": doc_of("c", "common filler"),
        }
        index = build_index(docs)
        assert bm25_score(index, ["rare"], "q") > bm25_score(index, ["common"], "q")

    def test_oracle_equivalence_ten_docs(self):
        rng = random.Random(12)
        vocab = [f"w{i}" for i in range(15)]
        docs = {f"d{i}": doc_of(f"d{i}", " ".join(rng.choices(vocab, k=rng.randint(3, 12))))
                for i in range(10)}
        index = build_index(docs)
        for doc_id in docs:
            for _ in range(5):
                query = rng.choices(vocab, k=rng.randint(1, 4))
                got = bm25_score(index, query, doc_id)
                want = reference_bm25(docs, query, doc_id)
                assert abs(got - want) < 1e-9


class TestBM25Sampling:
    def test_k_larger_than_corpus(self):
        index = build_index(toy_docs())
        out = sample_bm25_pairs(index, [("d1", ["apple"])], k=100)
        assert len(out) == 3
        assert ("d1", "d1") not in out

    def test_never_self_pair(self):
        index = build_index(toy_docs())
        out = sample_bm25_pairs(index, [(d, ["apple", "cherry"]) for d in toy_docs()], k=4)
        assert all(q != d for q, d in out)

    def test_exclusions_respected(self):
        index = build_index(toy_docs())
        excl = frozenset({canonical("d1", "d3")})
        out = sample_bm25_pairs(index, [("d1", ["apple"])], k=10, exclusions=excl)
        assert ("d1", "d3") not in out

    def test_sorted_by_score_with_id_tiebreak(self):
        index = build_index(toy_docs())
        out = sample_bm25_pairs(index, [("d4", ["apple"])], k=10)
        scores = [bm25_score(index, ["apple"], d) for _, d in out]
        assert scores == sorted(scores, reverse=True)
        # zero-score ties are ordered by doc id
        zero_ids = [d for (_, d), s in zip(out, scores) if s == 0.0]
        assert zero_ids == sorted(zero_ids)

    def test_randomized_trials_never_emit_excluded_or_self(self):
        rng = random.Random(77)
        vocab = [f"w{i}" for i in range(12)]
        docs = {f"d{i:02d}": doc_of(f"d{i:02d}", " ".join(rng.choices(vocab, k=6)))
                for i in range(30)}
        index = build_index(docs)
        ids = sorted(docs)
        for _ in range(2000):
            qid = rng.choice(ids)
            excl = frozenset(canonical(*rng.sample(ids, 2)) for _ in range(4))
            out = sample_bm25_pairs(index, [(qid, rng.choices(vocab, k=3))],
                                    k=rng.randint(1, 8), exclusions=excl)
            for q, d in out:
                assert q != d
                assert canonical(q, d) not in excl


class TestRandomSampling:
    def test_two_docs_single_pair(self):
        assert sample_random_pairs(["a", "b"], 1, seed=0) == [("a", "b")]

    def test_deterministic(self):
        ids = [f"d{i}" for i in range(10)]
        assert sample_random_pairs(ids, 12, seed=9) == sample_random_pairs(ids, 12, seed=9)

    def test_exhaustive(self):
        ids = ["a", "b", "c", "d"]
        excl = frozenset({canonical("a", "b")})
        out = sample_random_pairs(ids, 5, seed=3, exclusions=excl)
        assert sorted(out) == sorted(
            canonical(x, y) for x, y in itertools.combinations(ids, 2)
            if canonical(x, y) not in excl)

    def test_count_too_large(self):
        with pytest.raises(ValueError):
            sample_random_pairs(["a", "b", "c"], 4, seed=0)

    def test_no_duplicates_and_no_excluded(self):
        ids = [f"d{i}" for i in range(12)]
        excl = frozenset({canonical("d0", "d1"), canonical("d2", "d3")})
        out = sample_random_pairs(ids, 30, seed=5, exclusions=excl)
        keys = [canonical(a, b) for a, b in out]
        assert len(set(keys)) == len(keys) == 30
        assert not set(keys) & excl


class TestSelfLabel:
    def test_constant_stub_model(self):
        out = self_label(lambda a, b: 0.5, [("a", "b", "random"), ("c", "d", "random")])
        assert [p.pseudo_label for p in out] == [0.5, 0.5]

    def test_duplicates_labeled_once(self):
        out = self_label(lambda a, b: 0.5,
                         [("a", "b", "random"), ("b", "a", "bm25_intra"),
                          ("a", "b", "random")])
        assert len(out) == 1
        assert out[0].source == "random"

    def test_labels_clipped(self):
        out = self_label(lambda a, b: 7.5, [("a", "b", "random")])
        assert out[0].pseudo_label == 1.0
        out = self_label(lambda a, b: -2.0, [("a", "b", "random")])
        assert out[0].pseudo_label == 0.0

    def test_unresolvable_candidate_skipped(self, caplog):
        def model(a, b):
            if a == "bad":
                raise KeyError("no embedding stored for document id 'bad'")
            return 0.25

        with caplog.at_level("WARNING"):
            out = self_label(model, [("bad", "b", "random"), ("c", "d", "random")])
        assert len(out) == 1
        assert "bad" in caplog.text

    def test_training_pairs_excluded(self):
        excl = frozenset({canonical("a", "b")})
        out = self_label(lambda a, b: 0.5, [("a", "b", "random"), ("c", "d", "random")],
                         exclusions=excl)
        assert [(p.doc_a, p.doc_b) for p in out] == [("c", "d")]


class TestTranslationPlan:
    def eligible_pair(self, pair_id, overall):
        return make_pair(pair_id, overall=overall, lang1="en", lang2="en")

    def test_single_target(self):
        pairs = [self.eligible_pair("a_b", 1.5)]
        plan = make_translation_plan(pairs, {("de", "fr"): 1.0}, per_source=5, seed=0)
        assert len(plan) == 5
        assert all(e.target_lang_pair == ("de", "fr") for e in plan)
        assert all(e.status == "planned" for e in plan)

    def test_low_similarity_excluded(self):
        # raw 2.8 -> normalized 0.4, below the [0.5, 1] band
        pairs = [self.eligible_pair("a_b", 2.8)]
        assert make_translation_plan(pairs, {("de", "fr"): 1.0}, seed=0) == []

    def test_boundary_half_included(self):
        pairs = [self.eligible_pair("a_b", 2.5)]  # normalized exactly 0.5
        assert len(make_translation_plan(pairs, {("de", "fr"): 1.0}, seed=0)) == 5

    def test_non_english_excluded(self):
        pairs = [make_pair("a_b", overall=1.0, lang1="de", lang2="de")]
        assert make_translation_plan(pairs, {("de", "fr"): 1.0}, seed=0) == []

    def test_count_arithmetic(self):
        pairs = [self.eligible_pair(f"a{i}_b{i}", 1.2) for i in range(3)]
        plan = make_translation_plan(pairs, {("de", "fr"): 2.0, ("es", "tr"): 1.0},
                                     per_source=5, seed=4)
        assert len(plan) == 15

    def test_weights_validated(self):
        pairs = [self.eligible_pair("a_b", 1.0)]
        with pytest.raises(ValueError):
            make_translation_plan(pairs, {}, seed=0)
        with pytest.raises(ValueError):
            make_translation_plan(pairs, {("de", "fr"): 0.0}, seed=0)

    def test_deterministic(self):
        pairs = [self.eligible_pair(f"a{i}_b{i}", 1.2) for i in range(4)]
        dist = {("de", "fr"): 1.0, ("es", "tr"): 3.0, ("pl", "ru"): 2.0}
        p1 = make_translation_plan(pairs, dist, seed=6)
        p2 = make_translation_plan(pairs, dist, seed=6)
        assert p1 == p2


class TestDistribution:
    def test_single_bin_entropy_zero(self):
        report = distribution_report([0.05] * 10, bins=5)
        assert report.entropy == 0.0
        assert report.counts == [10, 0, 0, 0, 0]

    def test_uniform_entropy_one(self):
        labels = [0.1, 0.3, 0.5, 0.7, 0.9]
        report = distribution_report(labels, bins=5)
        assert abs(report.entropy - 1.0) < 1e-12

    def test_binning_example(self):
        report = distribution_report([0.1, 0.1, 0.9], bins=5)
        assert report.counts == [2, 0, 0, 0, 1]

    def test_one_point_zero_lands_in_last_bin(self):
        report = distribution_report([1.0], bins=5)
        assert report.counts == [0, 0, 0, 0, 1]

    def test_bins_validated(self):
        with pytest.raises(ValueError):
            distribution_report([0.5], bins=1)


class TestFiles:
    def test_augmented_pairs_round_trip(self, tmp_path):
        path = tmp_path / "aug.csv"
        pairs = [AugmentedPair("a", "b", 0.625, "bm25_intra"),
                 AugmentedPair("c", "d", 0.0, "random")]
        write_augmented_pairs(path, pairs)
        assert read_augmented_pairs(path) == pairs

    def test_translation_plan_round_trip(self, tmp_path):
        from newsim.augment import TranslationPlanEntry
        path = tmp_path / "plan.csv"
        plan = [TranslationPlanEntry("a_b", ("de", "fr"), "planned"),
                TranslationPlanEntry("c_d", ("es", "tr"), "fulfilled")]
        write_translation_plan(path, plan)
        assert read_translation_plan(path) == plan

    def test_pair_exclusions_helper(self):
        pairs = [make_pair("a_b"), make_pair("d_c")]
        excl = pair_exclusions(pairs)
        assert canonical("b", "a") in excl
        assert canonical("c", "d") in excl
