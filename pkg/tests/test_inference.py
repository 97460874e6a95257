import numpy as np
import pytest
from oracles import (
    oracle_marginals,
    parents_from_paths,
    random_taxonomy_paths,
    valid_subsets_by_filter,
)

from finetype.corpus import Document, Mention, Token
from finetype.errors import InferenceError
from finetype.features import FeatureDictionary
from finetype.inference import (
    MarginalScorer,
    assign,
    predict_mentions,
    probs_vector,
    refine,
    refine_conditional,
    refine_independent,
    refine_marginal,
)
from finetype.models import TrainingInstance, train_local
from finetype.taxonomy import Taxonomy

SMALL = Taxonomy(["a/c", "b"])
SMALL_P = {"a": 0.8, "a/c": 0.6, "b": 0.3}


class TestHandComputedFixture:
    # configurations: {a} 0.8*0.4*0.7, {a,a/c} 0.8*0.6*0.7, {b} 0.2*0.4*0.3
    # z = 0.224 + 0.336 + 0.024 = 0.584
    def test_marginals(self):
        got = refine_marginal(SMALL_P, SMALL)
        assert got["a"] == pytest.approx(70 / 73, abs=1e-12)
        assert got["a/c"] == pytest.approx(42 / 73, abs=1e-12)
        assert got["b"] == pytest.approx(3 / 73, abs=1e-12)

    def test_conditional(self):
        got = refine_conditional(SMALL_P, SMALL)
        assert got == pytest.approx({"a": 0.8, "a/c": 0.48, "b": 0.3})

    def test_independent_passes_through(self):
        assert refine_independent(SMALL_P, SMALL) == pytest.approx(SMALL_P)

    def test_assignments_at_half(self):
        assert assign(refine(SMALL_P, SMALL, "independent"), 0.5) == {"a", "a/c"}
        assert assign(refine(SMALL_P, SMALL, "conditional"), 0.5) == {"a"}
        assert assign(refine(SMALL_P, SMALL, "marginal"), 0.5) == {"a", "a/c"}


class TestMarginalAgainstOracle:
    def test_random_taxonomies(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            paths = random_taxonomy_paths(rng)
            tax = Taxonomy(paths)
            parents = parents_from_paths(paths)
            assert sorted(parents) == sorted(tax.names)
            for _ in range(3):
                probs = {t: float(p) for t, p in zip(tax.names, rng.random(len(tax)))}
                fast = refine_marginal(probs, tax)
                slow = oracle_marginals(parents, probs)
                for t in tax.names:
                    assert abs(fast[t] - slow[t]) <= 1e-9

    def test_configurations_match_subset_filter(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            paths = random_taxonomy_paths(rng, max_depth=3, max_labels=8)
            tax = Taxonomy(paths)
            assert set(tax.valid_configurations()) == valid_subsets_by_filter(
                parents_from_paths(paths)
            )


class TestStructuralProperties:
    tax = Taxonomy(
        ["p/a/x", "p/a/y", "p/b", "q/c", "q/d/z", "r"]
    )

    def random_probs(self, rng):
        return {t: float(v) for t, v in zip(self.tax.names, rng.random(len(self.tax)))}

    def test_closure_under_thresholding(self):
        rng = np.random.default_rng(5)
        scorer = MarginalScorer(self.tax)
        for _ in range(300):
            probs = self.random_probs(rng)
            for strategy in ("conditional", "marginal"):
                refined = refine(probs, self.tax, strategy, scorer)
                for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
                    picked = assign(refined, theta)
                    closed = self.tax.closure(picked) if picked else frozenset()
                    assert picked == closed, (strategy, theta)

    def test_depth1_marginals_sum_to_one(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            refined = refine_marginal(self.random_probs(rng), self.tax)
            total = sum(refined[t] for t in self.tax.at_depth(1))
            assert abs(total - 1.0) <= 1e-9

    def test_scores_shrink_with_depth(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            probs = self.random_probs(rng)
            for strategy in ("conditional", "marginal"):
                refined = refine(probs, self.tax, strategy)
                for label in self.tax.names:
                    parent = self.tax.parent(label)
                    if parent is not None:
                        assert refined[label] <= refined[parent] + 1e-12


class TestValidation:
    def test_missing_label_score(self):
        with pytest.raises(InferenceError, match="missing score"):
            probs_vector({"a": 0.5}, SMALL)

    def test_out_of_range_score(self):
        with pytest.raises(InferenceError, match="0, 1"):
            probs_vector({"a": 1.5, "a/c": 0.5, "b": 0.5}, SMALL)

    def test_unknown_strategy(self):
        with pytest.raises(InferenceError, match="strategy"):
            refine(SMALL_P, SMALL, "viterbi")

    def test_all_zero_probabilities(self):
        tax = Taxonomy(["a"])
        with pytest.raises(InferenceError, match="zero probability"):
            refine_marginal({"a": 0.0}, tax)


class TestPredictMentions:
    def make_model_and_docs(self):
        tax = Taxonomy(["person", "location"])
        fd = FeatureDictionary(features=("HEAD:Alice", "HEAD:Paris"))
        instances = [
            TrainingInstance(x=(0,), labels=frozenset({"person"})),
            TrainingInstance(x=(1,), labels=frozenset({"location"})),
        ] * 4
        model = train_local(instances, tax, fd, l2=0.1)
        doc = Document(
            id="d1",
            split="test",
            sentences=((Token("Alice", -1, "root"), Token("Paris", 0, "obj")),),
            mentions=(
                Mention(id="m1", sentence=0, start=0, end=1, head=0),
                Mention(id="m2", sentence=0, start=1, end=2, head=1, kind="pronominal"),
            ),
        )
        return model, tax, [doc]

    def test_end_to_end_scoring(self):
        model, tax, docs = self.make_model_and_docs()
        preds = predict_mentions(model, docs, tax, strategy="independent", threshold=0.5)
        # pronominal mentions are excluded by the default kinds filter
        assert [p.mention_id for p in preds] == ["m1"]
        assert preds[0].doc_id == "d1"
        assert preds[0].labels == {"person"}
        assert set(preds[0].scores) == {"location", "person"}

    def test_split_and_kind_filters(self):
        model, tax, docs = self.make_model_and_docs()
        assert predict_mentions(model, docs, tax, split="train") == []
        both = predict_mentions(
            model, docs, tax, kinds=("named", "pronominal"), strategy="marginal"
        )
        assert [p.mention_id for p in both] == ["m1", "m2"]

    def test_unknown_strategy_rejected(self):
        model, tax, docs = self.make_model_and_docs()
        with pytest.raises(InferenceError):
            predict_mentions(model, docs, tax, strategy="beam")
