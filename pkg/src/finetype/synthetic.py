"""Deterministic synthetic corpus generator for pipeline-scale checks.

Real distantly supervised corpora are huge and proprietary; this module
fabricates one small enough to train on in seconds but shaped like the real
problem. The heart of the shape is an entity inventory: every entity has one
context-true type plus, sometimes, extra knowledge-base types fixed for life.
Distant labels for a mention are the entity's whole inventory entry, so the
same head word always drags in the same wrong labels, mention after mention.
That systematic noise is what the pruning heuristics exist to cut, one kind
each:

* two sibling leaves under one foreign-root branch (an internal
  contradiction the sibling collapse detects);
* a stray type under a different foreign root (contradicts the document's
  coarse sense);
* a descendant chain below the true type (more specific than any single
  document supports, so its in-document support count stays at one).

Some entities are additionally recorded only to an ancestor of their true
type. That underspecification is not prunable noise, but it separates
negative-pool policies: treating every unlabeled mention as a negative
example turns those mentions into false negatives for the deep types.

Head words are opaque identifiers, so nothing about the surface form leaks
the type; the usable evidence is the head itself (memorizable), context
words keyed to the context-true type, and a document topic aligned with the
document's theme root. Generic-word and topic noise keep either channel from
being perfectly separable on its own. Development and test mentions carry
the clean closure of the context-true type. Everything is driven by one
seeded generator: identical seeds, identical corpora.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Document, Mention, Token
from .taxonomy import Taxonomy

TAXONOMY_PATHS = [
    "person/artist/actor",
    "person/artist/musician",
    "person/athlete/sprinter",
    "person/athlete/keeper",
    "person/leader/mayor",
    "person/leader/senator",
    "location/city/metropolis",
    "location/city/harbor",
    "location/venue/stadium",
    "location/venue/theatre",
    "location/region/valley",
    "location/region/coast",
    "organization/company/startup",
    "organization/company/conglomerate",
    "organization/team/squad",
    "organization/team/franchise",
    "organization/agency/bureau",
    "organization/agency/ministry",
    "other/event/storm",
    "other/event/contest",
    "other/product/gadget",
    "other/product/vehicle",
]

TOPICS = (
    "arts", "business", "entertainment", "health",
    "mayhem", "politics", "scitech", "sport",
)

TOPIC_BY_ROOT = {
    "person": "politics",
    "location": "mayhem",
    "organization": "business",
    "other": "sport",
}

ROLES = ("nsubj", "obj", "obl")

EXTERNAL_PREFIX = "ext:"

GENERIC_WORDS = [f"g{i}" for i in range(16)]

NONHEAD_WORDS = ("Md", "Dr", "St", "La")

VERBS = tuple(f"v{j}" for j in range(6))

N_CLUSTERS = 64


def leaf_of(label: str) -> str:
    return label.split("/")[-1]


def context_pools(label: str) -> tuple[list[str], list[str]]:
    slug = leaf_of(label)
    return (
        [f"{slug}-b{j}" for j in range(3)],
        [f"{slug}-a{j}" for j in range(3)],
    )


@dataclass(frozen=True)
class Entity:
    head: str
    primary: str
    # what the knowledge base records: possibly truncated to an ancestor,
    # possibly polluted with extra types
    kb_types: frozenset[str]


@dataclass
class SyntheticCorpus:
    taxonomy: Taxonomy
    entities: dict[str, list[Entity]]
    train: list[Document]
    train_clean: list[Document]
    dev: list[Document]
    test: list[Document]
    coarse_train: list[Document]
    mapping: dict[str, frozenset[str]]
    clusters: dict[str, str]
    stats: dict = field(default_factory=dict)


def _build_entities(
    tax: Taxonomy,
    rng: np.random.Generator,
    p_sibling: float,
    p_crossroot: float,
    p_overspecific: float,
    p_shallow: float,
) -> dict[str, list[Entity]]:
    """Entity inventory keyed by primary type, noise baked in per entity.

    Extra knowledge-base types are drawn once per entity and never change,
    so every mention of a tainted entity repeats the same wrong labels. The
    three draws mirror the three pruning targets, and each lands entirely
    outside the entity's own chain so removal never costs a true label:

    * both leaves of one foreign-root branch (a sibling contradiction
      confined to the junk subtree);
    * one stray deep type under a different foreign root;
    * a chain of descendants below the true type, too specific for any
      single document to support.

    Independently, some entities are recorded only to an ancestor of their
    true type (``p_shallow``): the knowledge base knows the person exists
    but not what kind. That is underspecification rather than contradiction,
    so no pruning heuristic touches it.
    """
    roots = list(tax.at_depth(1))
    deep_by_root = {
        r: [n for n in tax.names if n.startswith(r + "/")] for r in roots
    }
    branches_by_root = {r: tax.children(r) for r in roots}
    out: dict[str, list[Entity]] = {}
    serial = 0
    for label in tax.names:
        count = int(rng.integers(20, 61))
        entities = []
        for _ in range(count):
            depth = tax.depth(label)
            recorded = label
            if depth >= 2 and rng.random() < p_shallow:
                keep = int(rng.integers(1, depth))
                recorded = "/".join(label.split("/")[:keep])
            kb = {recorded}
            own_root = label.split("/")[0]
            others = [r for r in roots if r != own_root]
            if rng.random() < p_sibling:
                pick = others[int(rng.integers(len(others)))]
                branches = branches_by_root[pick]
                branch = branches[int(rng.integers(len(branches)))]
                twins = tax.children(branch)
                if len(twins) >= 2:
                    kb.update(twins[:2])
                else:
                    kb.add(branch)
            if rng.random() < p_crossroot:
                pick = others[int(rng.integers(len(others)))]
                pool = deep_by_root[pick]
                kb.add(pool[int(rng.integers(len(pool)))])
            children = tax.children(label)
            if children and rng.random() < p_overspecific:
                child = children[int(rng.integers(len(children)))]
                kb.add(child)
                grand = tax.children(child)
                if grand and rng.random() < 0.5:
                    kb.add(grand[int(rng.integers(len(grand)))])
            entities.append(
                Entity(
                    head=f"N{serial:04d}",
                    primary=label,
                    kb_types=frozenset(kb),
                )
            )
            serial += 1
        out[label] = entities
    return out


def _true_type_weights(tax: Taxonomy) -> dict[str, float]:
    by_depth = {1: 0.10, 2: 0.30, 3: 0.60}
    weights = {}
    for name in tax.names:
        depth = tax.depth(name)
        weights[name] = by_depth[depth] / len(tax.at_depth(depth))
    return weights


def generate(
    seed: int = 0,
    n_train_docs: int = 350,
    n_dev_docs: int = 40,
    n_test_docs: int = 60,
    n_coarse_docs: int = 60,
    mentions_per_doc: int = 15,
    p_sibling: float = 0.25,
    p_crossroot: float = 0.25,
    p_overspecific: float = 0.40,
    p_shallow: float = 0.25,
    p_generic_context: float = 0.50,
) -> SyntheticCorpus:
    rng = np.random.default_rng(seed)
    tax = Taxonomy(TAXONOMY_PATHS)
    roots = list(tax.at_depth(1))
    types_by_root = {
        r: [n for n in tax.names if n == r or n.startswith(r + "/")] for r in roots
    }
    weights = _true_type_weights(tax)
    entities = _build_entities(
        tax, rng, p_sibling, p_crossroot, p_overspecific, p_shallow
    )

    clusters = {
        e.head: f"cl:{int(e.head[1:]) % N_CLUSTERS}"
        for pool in entities.values()
        for e in pool
    }
    mapping = {EXTERNAL_PREFIX + label: frozenset({label}) for label in tax.names}

    total_train_mentions = 0
    noisy_mentions = 0

    def weighted_pick(pool: list[str]) -> str:
        w = np.array([weights[n] for n in pool])
        return pool[int(rng.choice(len(pool), p=w / w.sum()))]

    def pick_context_word(pool: list[str]) -> str:
        if rng.random() < p_generic_context:
            return GENERIC_WORDS[int(rng.integers(len(GENERIC_WORDS)))]
        return pool[int(rng.integers(len(pool)))]

    def make_sentence(true_type: str, entity: Entity):
        before_pool, after_pool = context_pools(true_type)
        with_nonhead = rng.random() < 0.3
        words = [pick_context_word(before_pool)]
        if with_nonhead:
            words.append(NONHEAD_WORDS[int(rng.integers(len(NONHEAD_WORDS)))])
        head_idx = len(words)
        words.append(entity.head)
        words.append(pick_context_word(after_pool))
        verb_idx = len(words)
        words.append(VERBS[int(rng.integers(len(VERBS)))])
        role = ROLES[int(rng.integers(len(ROLES)))]
        tokens = []
        for i, text in enumerate(words):
            if i == verb_idx:
                tokens.append(Token(text, dep_head=-1, dep_label="root"))
            elif i == head_idx:
                tokens.append(Token(text, dep_head=verb_idx, dep_label=role))
            elif with_nonhead and i == head_idx - 1:
                tokens.append(Token(text, dep_head=head_idx, dep_label="compound"))
            else:
                tokens.append(Token(text, dep_head=verb_idx, dep_label="advmod"))
        start = head_idx - 1 if with_nonhead else head_idx
        return tokens, start, head_idx + 1, head_idx

    def make_doc(doc_id: str, split: str, noisy: bool, coarse_only: bool = False):
        nonlocal total_train_mentions, noisy_mentions
        theme = roots[int(rng.integers(len(roots)))]
        actives = [weighted_pick(types_by_root[theme]) for _ in range(3)]
        foreign_roots = [r for r in roots if r != theme]
        foreign = weighted_pick(
            types_by_root[foreign_roots[int(rng.integers(len(foreign_roots)))]]
        )
        topic = TOPIC_BY_ROOT[theme]
        if rng.random() < 0.2:
            topic = TOPICS[int(rng.integers(len(TOPICS)))]
        sentences, mentions, clean_mentions = [], [], []
        for m in range(mentions_per_doc):
            if rng.random() < 0.88:
                true_type = actives[int(rng.integers(len(actives)))]
            else:
                true_type = foreign
            pool = entities[true_type]
            entity = pool[int(rng.integers(len(pool)))]
            tokens, start, end, head = make_sentence(true_type, entity)
            sentences.append(tuple(tokens))
            base = dict(
                id=f"m{m:02d}", sentence=len(sentences) - 1,
                start=start, end=end, head=head, kind="named",
                entity_id=entity.head,
            )
            closure = tax.closure([true_type])
            if coarse_only:
                mentions.append(
                    Mention(**base, gold_labels=frozenset({true_type.split("/")[0]}))
                )
            elif noisy:
                total_train_mentions += 1
                if len(entity.kb_types) > 1:
                    noisy_mentions += 1
                raw = tuple(EXTERNAL_PREFIX + t for t in sorted(entity.kb_types))
                mentions.append(Mention(**base, raw_types=raw))
                clean_mentions.append(Mention(**base, gold_labels=closure))
            else:
                mentions.append(Mention(**base, gold_labels=closure))
        doc = Document(
            id=doc_id, split=split, sentences=tuple(sentences),
            mentions=tuple(mentions), topic=topic,
        )
        clean = (
            Document(
                id=doc_id, split=split, sentences=tuple(sentences),
                mentions=tuple(clean_mentions), topic=topic,
            )
            if noisy
            else doc
        )
        return doc, clean

    train, train_clean, dev, test, coarse_train = [], [], [], [], []
    for i in range(n_train_docs):
        doc, clean = make_doc(f"train-{i:04d}", "train", noisy=True)
        train.append(doc)
        train_clean.append(clean)
    for i in range(n_dev_docs):
        doc, _ = make_doc(f"dev-{i:04d}", "dev", noisy=False)
        dev.append(doc)
    for i in range(n_test_docs):
        doc, _ = make_doc(f"test-{i:04d}", "test", noisy=False)
        test.append(doc)
    for i in range(n_coarse_docs):
        doc, _ = make_doc(f"coarse-{i:04d}", "train", noisy=False, coarse_only=True)
        coarse_train.append(doc)

    return SyntheticCorpus(
        taxonomy=tax,
        entities=entities,
        train=train,
        train_clean=train_clean,
        dev=dev,
        test=test,
        coarse_train=coarse_train,
        mapping=mapping,
        clusters=clusters,
        stats={
            "train_mentions": total_train_mentions,
            "noisy_mentions": noisy_mentions,
            "noisy_fraction": noisy_mentions / max(1, total_train_mentions),
        },
    )


def write_corpus_files(corpus: SyntheticCorpus, directory: str) -> dict[str, str]:
    """Dump the corpus as the file set the command line tools consume."""
    import os

    from .corpus import save_corpus

    paths = {
        "taxonomy": os.path.join(directory, "taxonomy.txt"),
        "corpus": os.path.join(directory, "corpus.jsonl"),
        "coarse_corpus": os.path.join(directory, "coarse_corpus.jsonl"),
        "mapping": os.path.join(directory, "mapping.tsv"),
        "clusters": os.path.join(directory, "clusters.tsv"),
    }
    with open(paths["taxonomy"], "w", encoding="utf-8") as handle:
        handle.write(corpus.taxonomy.serialize())
    save_corpus(corpus.train + corpus.dev + corpus.test, paths["corpus"])
    save_corpus(corpus.coarse_train, paths["coarse_corpus"])
    with open(paths["mapping"], "w", encoding="utf-8") as handle:
        for source in sorted(corpus.mapping):
            for label in sorted(corpus.mapping[source]):
                handle.write(f"{source}\t{label}\n")
    with open(paths["clusters"], "w", encoding="utf-8") as handle:
        for token in sorted(corpus.clusters):
            handle.write(f"{token}\t{corpus.clusters[token]}\n")
    return paths
