"""Corpus model and JSON-lines serialization.

A corpus file holds one document object per line. Each document carries
dependency-parsed sentences (lists of token objects) and entity mentions that
point into them by sentence index and token span. Mentions may carry
``raw_types`` (identifiers from an external source inventory, resolved through
a mapping file) and ``gold_labels`` (taxonomy label paths, for supervised
splits and evaluation).

All writers emit sorted keys and sorted label lists so that re-serializing an
unchanged corpus is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import CorpusError
from .taxonomy import Taxonomy

MENTION_KINDS = ("named", "nominal", "pronominal")
SPLITS = ("train", "dev", "test")

ROOT_HEAD = -1


@dataclass(frozen=True)
class Token:
    """One token: surface form plus a dependency edge to its head.

    ``dep_head`` is the index of the head token within the same sentence, or
    ``-1`` for the syntactic root.
    """

    text: str
    dep_head: int = ROOT_HEAD
    dep_label: str = "dep"


@dataclass(frozen=True)
class Mention:
    """An entity mention: a token span ``[start, end)`` in one sentence."""

    id: str
    sentence: int
    start: int
    end: int
    head: int
    kind: str = "named"
    entity_id: str | None = None
    raw_types: tuple[str, ...] = ()
    gold_labels: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Document:
    id: str
    split: str
    sentences: tuple[tuple[Token, ...], ...]
    mentions: tuple[Mention, ...] = ()
    topic: str | None = None

    def mention_tokens(self, mention: Mention) -> tuple[Token, ...]:
        sentence = self.sentences[mention.sentence]
        return sentence[mention.start : mention.end]

    def head_token(self, mention: Mention) -> Token:
        return self.sentences[mention.sentence][mention.head]

    def mention(self, mention_id: str) -> Mention:
        for m in self.mentions:
            if m.id == mention_id:
                return m
        raise CorpusError(f"document {self.id!r} has no mention {mention_id!r}")


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise CorpusError(f"{where}: missing field {key!r}")
    return obj[key]


def _parse_token(obj: Mapping, where: str, sentence_len: int) -> Token:
    text = _require(obj, "text", where)
    dep_head = int(obj.get("dep_head", ROOT_HEAD))
    if not (ROOT_HEAD <= dep_head < sentence_len):
        raise CorpusError(f"{where}: dep_head {dep_head} out of range")
    return Token(text=str(text), dep_head=dep_head, dep_label=str(obj.get("dep_label", "dep")))


def _parse_mention(obj: Mapping, where: str, sentences: tuple[tuple[Token, ...], ...]) -> Mention:
    mid = str(_require(obj, "id", where))
    where = f"{where} mention {mid!r}"
    sent_idx = int(_require(obj, "sentence", where))
    if not (0 <= sent_idx < len(sentences)):
        raise CorpusError(f"{where}: sentence index {sent_idx} out of range")
    n = len(sentences[sent_idx])
    start = int(_require(obj, "start", where))
    end = int(_require(obj, "end", where))
    head = int(_require(obj, "head", where))
    if not (0 <= start < end <= n):
        raise CorpusError(f"{where}: span [{start}, {end}) invalid for {n} tokens")
    if not (start <= head < end):
        raise CorpusError(f"{where}: head {head} outside span [{start}, {end})")
    kind = str(obj.get("kind", "named"))
    if kind not in MENTION_KINDS:
        raise CorpusError(f"{where}: unknown kind {kind!r}")
    raw_types = tuple(str(t) for t in obj.get("raw_types", ()))
    gold = frozenset(str(l) for l in obj.get("gold_labels", ()))
    entity_id = obj.get("entity_id")
    return Mention(
        id=mid,
        sentence=sent_idx,
        start=start,
        end=end,
        head=head,
        kind=kind,
        entity_id=None if entity_id is None else str(entity_id),
        raw_types=raw_types,
        gold_labels=gold,
    )


def document_from_obj(obj: Mapping, where: str = "document") -> Document:
    doc_id = str(_require(obj, "id", where))
    where = f"document {doc_id!r}"
    split = str(_require(obj, "split", where))
    if split not in SPLITS:
        raise CorpusError(f"{where}: unknown split {split!r}")
    sentences = []
    for s_idx, sent in enumerate(_require(obj, "sentences", where)):
        sentences.append(
            tuple(
                _parse_token(tok, f"{where} sentence {s_idx} token {t_idx}", len(sent))
                for t_idx, tok in enumerate(sent)
            )
        )
    sentences_t = tuple(sentences)
    mentions = tuple(
        _parse_mention(m, where, sentences_t) for m in obj.get("mentions", ())
    )
    seen: set[str] = set()
    for m in mentions:
        if m.id in seen:
            raise CorpusError(f"{where}: duplicate mention id {m.id!r}")
        seen.add(m.id)
    topic = obj.get("topic")
    return Document(
        id=doc_id,
        split=split,
        sentences=sentences_t,
        mentions=mentions,
        topic=None if topic is None else str(topic),
    )


def document_to_obj(doc: Document) -> dict:
    obj: dict = {
        "id": doc.id,
        "split": doc.split,
        "sentences": [
            [
                {"text": t.text, "dep_head": t.dep_head, "dep_label": t.dep_label}
                for t in sent
            ]
            for sent in doc.sentences
        ],
        "mentions": [],
    }
    if doc.topic is not None:
        obj["topic"] = doc.topic
    for m in doc.mentions:
        mo: dict = {
            "id": m.id,
            "sentence": m.sentence,
            "start": m.start,
            "end": m.end,
            "head": m.head,
            "kind": m.kind,
        }
        if m.entity_id is not None:
            mo["entity_id"] = m.entity_id
        if m.raw_types:
            mo["raw_types"] = list(m.raw_types)
        if m.gold_labels:
            mo["gold_labels"] = sorted(m.gold_labels)
        obj["mentions"].append(mo)
    return obj


def load_corpus(path: str) -> list[Document]:
    """Read a JSON-lines corpus file, validating structure as it goes."""
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            try:
                doc = document_from_obj(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
            if doc.id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate document id {doc.id!r}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


def save_corpus(docs: Iterable[Document], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps(document_to_obj(doc), sort_keys=True))
            handle.write("\n")


def validate_gold_labels(docs: Iterable[Document], tax: Taxonomy) -> None:
    """Check that every gold label exists and every set is ancestor-closed."""
    for doc in docs:
        for m in doc.mentions:
            if not m.gold_labels:
                continue
            closed = tax.closure(m.gold_labels)
            if closed != m.gold_labels:
                missing = sorted(closed - m.gold_labels)
                raise CorpusError(
                    f"document {doc.id!r} mention {m.id!r}: gold labels not "
                    f"ancestor-closed, missing {missing}"
                )


def close_gold_labels(doc: Document, tax: Taxonomy) -> Document:
    """Return a copy with every mention's gold set closed under ancestors."""
    mentions = tuple(
        replace(m, gold_labels=tax.closure(m.gold_labels)) if m.gold_labels else m
        for m in doc.mentions
    )
    return replace(doc, mentions=mentions)


def load_mapping(path: str, tax: Taxonomy | None = None) -> dict[str, frozenset[str]]:
    """Read a source-type mapping file.

    Tab-separated, two columns: source type identifier, taxonomy label path.
    A source type may appear on several lines; its targets accumulate. Lines
    starting with ``#`` are comments.
    """
    table: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise CorpusError(f"{path}:{lineno}: expected two tab-separated columns")
            source, label = parts
            if tax is not None and label not in tax:
                raise CorpusError(f"{path}:{lineno}: unknown taxonomy label {label!r}")
            table.setdefault(source, set()).add(label)
    return {source: frozenset(labels) for source, labels in table.items()}


def map_raw_types(
    raw_types: Iterable[str], mapping: Mapping[str, frozenset[str]], tax: Taxonomy
) -> frozenset[str]:
    """Resolve source types to an ancestor-closed taxonomy label set.

    Source types absent from the mapping are skipped: coverage of external
    inventories is never total and partial signal is still useful.
    """
    labels: set[str] = set()
    for raw in raw_types:
        labels.update(mapping.get(raw, ()))
    if not labels:
        return frozenset()
    return tax.closure(labels)
