"""Structure and determinism checks for the generated corpus."""

import json

import pytest

from finetype.corpus import document_to_obj, map_raw_types
from finetype.synthetic import TAXONOMY_PATHS, TOPICS, generate, write_corpus_files
from finetype.taxonomy import Taxonomy


@pytest.fixture(scope="module")
def corpus():
    return generate(seed=7, n_train_docs=40, n_dev_docs=8, n_test_docs=8,
                    n_coarse_docs=8, mentions_per_doc=10)


class TestShape:
    def test_taxonomy_has_three_levels(self):
        tax = Taxonomy(TAXONOMY_PATHS)
        assert len(tax.at_depth(1)) == 4
        assert tax.at_depth(2) and tax.at_depth(3)

    def test_document_counts(self, corpus):
        assert len(corpus.train) == 40
        assert len(corpus.dev) == 8
        assert len(corpus.test) == 8
        assert len(corpus.coarse_train) == 8
        assert all(len(d.mentions) == 10 for d in corpus.train)

    def test_splits_are_labeled(self, corpus):
        assert {d.split for d in corpus.train} == {"train"}
        assert {d.split for d in corpus.dev} == {"dev"}
        assert {d.split for d in corpus.test} == {"test"}

    def test_topics_come_from_fixed_inventory(self, corpus):
        for doc in corpus.train + corpus.dev + corpus.test:
            assert doc.topic in TOPICS

    def test_train_mentions_carry_raw_types_not_gold(self, corpus):
        for doc in corpus.train:
            for m in doc.mentions:
                assert m.raw_types
                assert not m.gold_labels

    def test_eval_mentions_carry_closed_gold(self, corpus):
        tax = corpus.taxonomy
        for doc in corpus.dev + corpus.test:
            for m in doc.mentions:
                assert m.gold_labels
                assert m.gold_labels == tax.closure(m.gold_labels)

    def test_coarse_docs_hold_single_root_labels(self, corpus):
        roots = set(corpus.taxonomy.at_depth(1))
        for doc in corpus.coarse_train:
            for m in doc.mentions:
                assert len(m.gold_labels) == 1
                assert set(m.gold_labels) <= roots

    def test_mapping_covers_every_raw_type(self, corpus):
        tax = corpus.taxonomy
        for doc in corpus.train:
            for m in doc.mentions:
                mapped = map_raw_types(m.raw_types, corpus.mapping, tax)
                assert mapped, m.raw_types
                assert mapped == tax.closure(mapped)

    def test_clusters_cover_every_head(self, corpus):
        for doc in corpus.train + corpus.dev + corpus.test:
            for m in doc.mentions:
                head = doc.head_token(m).text
                assert head in corpus.clusters


class TestNoise:
    def test_spurious_fraction_at_default_scale(self):
        stats = generate(seed=0).stats
        assert stats["train_mentions"] >= 5000
        assert stats["noisy_fraction"] >= 0.40

    def test_kb_extras_fall_outside_own_chain(self, corpus):
        tax = corpus.taxonomy
        for pool in corpus.entities.values():
            for e in pool:
                chain = set(tax.closure([e.primary]))
                for extra in e.kb_types:
                    if extra in chain:
                        continue
                    # anything else is junk: a foreign subtree or a descendant
                    assert (
                        extra.split("/")[0] != e.primary.split("/")[0]
                        or extra.startswith(e.primary + "/")
                    )


class TestDeterminism:
    def test_same_seed_same_corpus(self):
        a = generate(seed=3, n_train_docs=12, n_dev_docs=4, n_test_docs=4,
                     n_coarse_docs=4, mentions_per_doc=8)
        b = generate(seed=3, n_train_docs=12, n_dev_docs=4, n_test_docs=4,
                     n_coarse_docs=4, mentions_per_doc=8)
        dump = lambda docs: json.dumps([document_to_obj(d) for d in docs], sort_keys=True)
        assert dump(a.train) == dump(b.train)
        assert dump(a.dev) == dump(b.dev)
        assert dump(a.test) == dump(b.test)
        assert a.clusters == b.clusters
        assert a.mapping == b.mapping

    def test_different_seed_differs(self):
        a = generate(seed=3, n_train_docs=12, n_dev_docs=4, n_test_docs=4,
                     n_coarse_docs=4, mentions_per_doc=8)
        b = generate(seed=4, n_train_docs=12, n_dev_docs=4, n_test_docs=4,
                     n_coarse_docs=4, mentions_per_doc=8)
        dump = lambda docs: json.dumps([document_to_obj(d) for d in docs], sort_keys=True)
        assert dump(a.train) != dump(b.train)

    def test_written_files_round_trip(self, corpus, tmp_path):
        paths = write_corpus_files(corpus, str(tmp_path))
        from finetype.corpus import load_corpus, load_mapping
        from finetype.features import load_clusters
        from finetype.taxonomy import load_taxonomy_file

        tax = load_taxonomy_file(paths["taxonomy"])
        assert tax.names == corpus.taxonomy.names
        docs = load_corpus(paths["corpus"])
        assert len(docs) == len(corpus.train) + len(corpus.dev) + len(corpus.test)
        mapping = load_mapping(paths["mapping"], tax)
        assert mapping == corpus.mapping
        clusters = load_clusters(paths["clusters"])
        assert clusters == corpus.clusters
