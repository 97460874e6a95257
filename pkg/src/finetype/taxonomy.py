"""Tree-structured type label set and hierarchy queries.

Labels are slash-separated paths such as ``person/artist/actor``. The set of
labels is always closed under path prefixes: loading ``person/artist/actor``
guarantees ``person`` and ``person/artist`` exist too. The tree root is an
implicit default node and is never itself a label, so depth-1 labels form the
top level of the forest.

Most query methods accept label names (path strings); :class:`TypeLabel`
records carry the stable integer id used to index model parameters. Ids are
assigned by lexicographic order of the segment tuple, so identical label sets
always produce identical ids.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import TaxonomyError, UnknownLabelError

SEPARATOR = "/"
_COMMENT = "#"


@dataclass(frozen=True)
class TypeLabel:
    """One node of the taxonomy: a path of name segments plus a stable id."""

    path: tuple[str, ...]
    id: int

    @property
    def name(self) -> str:
        return SEPARATOR.join(self.path)

    @property
    def depth(self) -> int:
        return len(self.path)

    @property
    def parent_name(self) -> str | None:
        if len(self.path) == 1:
            return None
        return SEPARATOR.join(self.path[:-1])


def split_path(name: str) -> tuple[str, ...]:
    """Split a label path into segments, rejecting empty segments."""
    segments = tuple(name.split(SEPARATOR))
    if not segments or any(not s for s in segments):
        raise TaxonomyError(f"malformed label path: {name!r}")
    return segments


class Taxonomy:
    """Immutable forest of type labels closed under path prefixes."""

    def __init__(self, paths: Iterable[str]):
        seen: set[tuple[str, ...]] = set()
        for name in paths:
            segments = split_path(name)
            for k in range(1, len(segments) + 1):
                seen.add(segments[:k])
        if not seen:
            raise TaxonomyError("empty taxonomy")
        ordered = sorted(seen)
        self._labels = tuple(
            TypeLabel(path=path, id=i) for i, path in enumerate(ordered)
        )
        self._by_name = {label.name: label for label in self._labels}
        self._children: dict[str | None, list[str]] = {}
        for label in self._labels:
            self._children.setdefault(label.parent_name, []).append(label.name)

    @property
    def labels(self) -> tuple[TypeLabel, ...]:
        return self._labels

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(label.name for label in self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[TypeLabel]:
        return iter(self._labels)

    def label(self, name: str) -> TypeLabel:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownLabelError(f"unknown label: {name!r}") from None

    def id_of(self, name: str) -> int:
        return self.label(name).id

    def depth(self, name: str) -> int:
        return self.label(name).depth

    def parent(self, name: str) -> str | None:
        return self.label(name).parent_name

    def children(self, name: str) -> tuple[str, ...]:
        self.label(name)
        return tuple(self._children.get(name, ()))

    def roots(self) -> tuple[str, ...]:
        return tuple(self._children[None])

    def at_depth(self, depth: int) -> tuple[str, ...]:
        return tuple(l.name for l in self._labels if l.depth == depth)

    def ancestors(self, name: str) -> list[str]:
        """Proper ancestors of ``name``, ordered from depth 1 downward."""
        path = self.label(name).path
        return [SEPARATOR.join(path[:k]) for k in range(1, len(path))]

    def closure(self, names: Iterable[str]) -> frozenset[str]:
        """The input labels together with all of their ancestors."""
        out: set[str] = set()
        for name in names:
            path = self.label(name).path
            for k in range(1, len(path) + 1):
                out.add(SEPARATOR.join(path[:k]))
        return frozenset(out)

    def descendants(self, name: str) -> frozenset[str]:
        """Proper descendants of ``name`` (labels having it as a prefix)."""
        path = self.label(name).path
        n = len(path)
        return frozenset(
            l.name for l in self._labels if l.depth > n and l.path[:n] == path
        )

    def siblings(self, name: str) -> frozenset[str]:
        """Other labels sharing ``name``'s parent.

        Depth-1 labels are mutual siblings under the implicit root.
        """
        label = self.label(name)
        return frozenset(
            n for n in self._children[label.parent_name] if n != name
        )

    def is_ancestor(self, ancestor: str, descendant: str) -> bool:
        """Whether ``ancestor`` is a proper prefix of ``descendant``."""
        a = self.label(ancestor).path
        d = self.label(descendant).path
        return len(a) < len(d) and d[: len(a)] == a

    @lru_cache(maxsize=1)
    def valid_configurations(self) -> tuple[frozenset[str], ...]:
        """All root-to-node chains, one per label, in label id order.

        The empty (root-only) assignment is excluded: every configuration
        commits to at least one label.
        """
        return tuple(self.closure([l.name]) for l in self._labels)

    def serialize(self) -> str:
        """Canonical text form: one label path per line, in id order."""
        return "".join(label.name + "\n" for label in self._labels)

    def content_hash(self) -> str:
        """SHA-256 of the canonical serialization; stored in model files."""
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def __hash__(self) -> int:  # lru_cache support; identity is fine
        return id(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return self.names == other.names


def load_taxonomy(source: Iterable[str]) -> Taxonomy:
    """Load a taxonomy from lines of label paths.

    One path per line, segments separated by ``/``. Lines starting with ``#``
    are comments. Duplicate paths are allowed and ignored; missing ancestor
    labels are inserted automatically. A line with an empty segment (including
    a blank line) is a parse error.
    """
    paths: list[str] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.lstrip().startswith(_COMMENT):
            continue
        try:
            split_path(line.strip())
        except TaxonomyError as exc:
            raise TaxonomyError(f"line {lineno}: {exc}") from None
        paths.append(line.strip())
    if not paths:
        raise TaxonomyError("empty taxonomy")
    return Taxonomy(paths)


def load_taxonomy_file(path: str) -> Taxonomy:
    with open(path, encoding="utf-8") as handle:
        return load_taxonomy(handle)


def default_taxonomy() -> Taxonomy:
    """The 92-label tree bundled with the package."""
    from importlib.resources import files

    text = files("finetype").joinpath("data/default_taxonomy.txt").read_text("utf-8")
    return load_taxonomy(text.splitlines())
