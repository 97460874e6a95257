import pytest

from finetype.coarse import depth1_targets, predict_coarse, train_coarse
from finetype.corpus import Document, Mention, Token
from finetype.errors import ModelError
from finetype.features import FeatureDictionary
from finetype.models import TrainingInstance, train_local
from finetype.taxonomy import Taxonomy

TAX = Taxonomy(["person", "location", "organization", "other"])

CUES = {
    "person": ["Alice", "Bob", "Carol"],
    "location": ["Paris", "Berlin", "Oslo"],
    "organization": ["Acme", "Initech", "Globex"],
    "other": ["storm", "measles", "rugby"],
}


def cue_docs() -> list[Document]:
    docs = []
    for root, words in CUES.items():
        for i, word in enumerate(words):
            docs.append(
                Document(
                    id=f"{root}-{i}",
                    split="train",
                    sentences=((Token(word, -1, "root"),),),
                    mentions=(
                        Mention(
                            id="m", sentence=0, start=0, end=1, head=0,
                            gold_labels=frozenset({root}),
                        ),
                    ),
                )
            )
    return docs


class TestTrainCoarse:
    def test_predicts_held_out_cues(self):
        model = train_coarse(cue_docs(), TAX, l2=0.1)
        assert model.kind == "coarse"
        assert model.labels == TAX.at_depth(1)
        for root, words in CUES.items():
            dist = predict_coarse(model, [f"HEAD:{words[0]}"])
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
            assert max(dist, key=dist.get) == root

    def test_unseen_features_give_valid_distribution(self):
        model = train_coarse(cue_docs(), TAX, l2=0.1)
        dist = predict_coarse(model, ["HEAD:Zanzibar"])
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        assert set(dist) == {"location", "organization", "other", "person"}

    def test_missing_class_rejected(self):
        docs = [d for d in cue_docs() if not d.id.startswith("other")]
        with pytest.raises(ModelError, match="other"):
            train_coarse(docs, TAX, l2=0.1)

    def test_wrong_kind_rejected(self):
        fd = FeatureDictionary(features=("a",))
        instances = [
            TrainingInstance(x=(0,), labels=frozenset({"person"})),
            TrainingInstance(x=(), labels=frozenset({"location"})),
        ]
        local = train_local(instances, TAX, fd)
        with pytest.raises(ModelError, match="coarse"):
            predict_coarse(local, ["a"])


class TestDepth1Targets:
    def test_expands_multiroot_gold(self):
        tax = Taxonomy(["location", "organization"])
        instances = [
            TrainingInstance(x=(1,), labels=frozenset({"location", "organization"}))
        ]
        rows, targets = depth1_targets(instances, tax)
        assert rows == [(1,), (1,)]
        assert targets == [0, 1]

    def test_ignores_deeper_labels(self):
        tax = Taxonomy(["person/artist"])
        instances = [
            TrainingInstance(x=(0,), labels=frozenset({"person", "person/artist"}))
        ]
        rows, targets = depth1_targets(instances, tax)
        assert len(rows) == 1 and targets == [0]
