"""Mention feature extraction and the supporting lookup tables.

Features are plain namespaced strings ("HEAD:Obama", "CONTEXT:B:who"). A
mention's feature bag is produced by :func:`extract_features`; a frozen
:class:`FeatureDictionary` then encodes bags as sorted index tuples for the
linear models. Unknown features are dropped at encode time, never added.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Document, Mention
from .errors import FeatureError

TRIGRAM_PAD = ":"


def word_shape(token: str) -> str:
    """Collapse a token to its character-class shape.

    Uppercase runs become ``A``, lowercase runs ``a``, digit runs ``0``;
    any other character is kept verbatim and never collapsed.
    """
    classes = []
    for ch in token:
        if ch.isupper():
            classes.append("A")
        elif ch.islower():
            classes.append("a")
        elif ch.isdigit():
            classes.append("0")
        else:
            classes.append(ch)
    out = []
    for cls in classes:
        if cls in ("A", "a", "0") and out and out[-1] == cls:
            continue
        out.append(cls)
    return "".join(out)


def char_trigrams(token: str) -> list[str]:
    """Lowercased character trigrams, padded with ``:`` at both ends."""
    padded = TRIGRAM_PAD + token.lower() + TRIGRAM_PAD
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def load_clusters(path: str) -> dict[str, str]:
    """Read a token-to-cluster table (two tab-separated columns)."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise FeatureError(f"{path}:{lineno}: expected two tab-separated columns")
            token, cluster = parts
            if table.get(token, cluster) != cluster:
                raise FeatureError(f"{path}:{lineno}: conflicting cluster for {token!r}")
            table[token] = cluster
    return table


class TopicModel:
    """Multinomial naive Bayes document topic classifier.

    Stores raw integer counts (add-one smoothing is applied at scoring time)
    so serialization is exact and training is reproducible bit for bit.
    Tokens are lowercased; tokens outside the training vocabulary are skipped
    when scoring. Ties break toward the first topic in sorted order.
    """

    def __init__(
        self,
        topics: Sequence[str],
        vocab: Sequence[str],
        doc_counts: Sequence[int],
        token_counts: Sequence[Sequence[int]],
    ):
        self.topics = tuple(topics)
        self.vocab = tuple(vocab)
        self.doc_counts = tuple(int(c) for c in doc_counts)
        self.token_counts = tuple(tuple(int(c) for c in row) for row in token_counts)
        self._vocab_index = {w: i for i, w in enumerate(self.vocab)}
        if len(self.token_counts) != len(self.topics):
            raise FeatureError("token_counts rows must match topics")
        if any(len(row) != len(self.vocab) for row in self.token_counts):
            raise FeatureError("token_counts columns must match vocab")

    @classmethod
    def train(cls, docs: Iterable[Document]) -> "TopicModel":
        doc_counts: dict[str, int] = {}
        counts: dict[str, dict[str, int]] = {}
        vocab: set[str] = set()
        for doc in docs:
            if doc.topic is None:
                continue
            doc_counts[doc.topic] = doc_counts.get(doc.topic, 0) + 1
            row = counts.setdefault(doc.topic, {})
            for sentence in doc.sentences:
                for token in sentence:
                    word = token.text.lower()
                    vocab.add(word)
                    row[word] = row.get(word, 0) + 1
        if not doc_counts:
            raise FeatureError("no documents carry a topic field")
        topics = tuple(sorted(doc_counts))
        vocab_t = tuple(sorted(vocab))
        token_counts = [
            [counts[t].get(w, 0) for w in vocab_t] for t in topics
        ]
        return cls(topics, vocab_t, [doc_counts[t] for t in topics], token_counts)

    def log_scores(self, tokens: Iterable[str]) -> list[float]:
        total_docs = sum(self.doc_counts)
        totals = [sum(row) for row in self.token_counts]
        v = len(self.vocab)
        scores = [
            math.log(self.doc_counts[i] / total_docs) for i in range(len(self.topics))
        ]
        for raw in tokens:
            j = self._vocab_index.get(raw.lower())
            if j is None:
                continue
            for i in range(len(self.topics)):
                scores[i] += math.log(
                    (self.token_counts[i][j] + 1) / (totals[i] + v)
                )
        return scores

    def predict(self, tokens: Iterable[str]) -> str:
        scores = self.log_scores(tokens)
        best = max(range(len(self.topics)), key=lambda i: (scores[i], -i))
        return self.topics[best]

    def predict_document(self, doc: Document) -> str:
        tokens = [t.text for sentence in doc.sentences for t in sentence]
        return self.predict(tokens)

    def to_obj(self) -> dict:
        return {
            "topics": list(self.topics),
            "vocab": list(self.vocab),
            "doc_counts": list(self.doc_counts),
            "token_counts": [list(row) for row in self.token_counts],
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "TopicModel":
        return cls(obj["topics"], obj["vocab"], obj["doc_counts"], obj["token_counts"])


def resolve_topic(doc: Document, topic_model: TopicModel | None) -> str | None:
    """The document's declared topic, else the model's prediction, else None."""
    if doc.topic is not None:
        return doc.topic
    if topic_model is not None:
        return topic_model.predict_document(doc)
    return None


def extract_features(
    doc: Document,
    mention: Mention,
    clusters: Mapping[str, str] | None = None,
    topic_model: TopicModel | None = None,
    context_width: int = 1,
) -> list[str]:
    """Feature bag for one mention.

    Families, in emission order: HEAD (head token), NONHEAD (every other
    span token), CLUSTER (head token's cluster id, if mapped), TRIGRAM
    (head token character trigrams), SHAPE (whole-span shape, one shape per
    token joined by spaces), ROLE (head token's dependency label), CONTEXT
    (window tokens before/after the span, B:/A: prefixed, clipped at the
    sentence), PARENT (head token's syntactic head, omitted at the root),
    TOPIC (declared or predicted document topic, omitted when unavailable).
    """
    sentence = doc.sentences[mention.sentence]
    span = doc.mention_tokens(mention)
    head = doc.head_token(mention)

    out: list[str] = [f"HEAD:{head.text}"]
    for i, token in enumerate(span, start=mention.start):
        if i != mention.head:
            out.append(f"NONHEAD:{token.text}")
    if clusters is not None:
        cluster = clusters.get(head.text)
        if cluster is not None:
            out.append(f"CLUSTER:{cluster}")
    for gram in char_trigrams(head.text):
        out.append(f"TRIGRAM:{gram}")
    out.append("SHAPE:" + " ".join(word_shape(t.text) for t in span))
    out.append(f"ROLE:{head.dep_label}")
    for i in range(max(0, mention.start - context_width), mention.start):
        out.append(f"CONTEXT:B:{sentence[i].text}")
    for i in range(mention.end, min(len(sentence), mention.end + context_width)):
        out.append(f"CONTEXT:A:{sentence[i].text}")
    if head.dep_head >= 0:
        out.append(f"PARENT:{sentence[head.dep_head].text}")
    topic = resolve_topic(doc, topic_model)
    if topic is not None:
        out.append(f"TOPIC:{topic}")
    return out


@dataclass(frozen=True)
class FeatureDictionary:
    """Frozen feature-string-to-index table; ids follow sorted order."""

    features: tuple[str, ...]

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "FeatureDictionary":
        return cls(features=tuple(sorted(set(strings))))

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {f: i for i, f in enumerate(self.features)}
        )
        if len(self._index) != len(self.features):
            raise FeatureError("duplicate feature strings")

    def __len__(self) -> int:
        return len(self.features)

    def index(self, feature: str) -> int | None:
        return self._index.get(feature)

    def encode(self, bag: Iterable[str]) -> tuple[int, ...]:
        """Sorted unique indices for the known features of a bag."""
        found = {self._index[f] for f in bag if f in self._index}
        return tuple(sorted(found))
