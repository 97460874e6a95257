"""Heuristic pruning of distantly supervised label sets.

Label sets mapped from an external type inventory overshoot: they carry every
type an entity has globally, not the one its mention means in context. Three
per-document heuristics cut them down, always applied in this order:

1. ``sibling``: inside one mention, labels that are siblings under a common
   present parent contradict each other; drop them (and everything below
   them) and keep the parent. Depth-1 labels have no parent label to fall
   back to, so top-level conflicts are left for the coarse heuristic.
2. ``coarse``: an independently trained coarse classifier picks the most
   plausible depth-1 type for the mention; labels under every other root are
   dropped.
3. ``min-count``: a label that appears on fewer than ``k`` of the document's
   mentions is too rare to be what the document is about; drop it everywhere
   in the document.

Every heuristic maps ancestor-closed sets to ancestor-closed sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

from .corpus import Document, map_raw_types
from .errors import PruningError
from .taxonomy import Taxonomy

# Tie order for the coarse argmax; roots outside this list follow in label
# id order.
COARSE_PRIORITY = ("person", "location", "organization", "other")

HEURISTICS = ("sibling", "coarse", "min-count")


def prune_sibling(labels: frozenset[str], tax: Taxonomy) -> frozenset[str]:
    """Collapse same-parent conflicts to the parent, cascading upward."""
    current = set(labels)
    changed = True
    while changed:
        changed = False
        for parent in sorted(current, key=lambda l: -tax.depth(l)):
            if parent not in current:
                continue
            present_children = [c for c in tax.children(parent) if c in current]
            if len(present_children) >= 2:
                current -= tax.descendants(parent)
                changed = True
    return frozenset(current)


def coarse_tie_order(tax: Taxonomy) -> tuple[str, ...]:
    roots = tax.at_depth(1)
    preferred = [r for r in COARSE_PRIORITY if r in roots]
    return tuple(preferred) + tuple(r for r in roots if r not in COARSE_PRIORITY)


def prune_coarse(
    labels: frozenset[str], coarse_dist: Mapping[str, float], tax: Taxonomy
) -> frozenset[str]:
    """Keep only the branch under the classifier's best depth-1 type."""
    order = coarse_tie_order(tax)
    best = max(order, key=lambda root: coarse_dist.get(root, 0.0))
    return frozenset(l for l in labels if l == best or l.startswith(best + "/"))


def prune_min_count(
    label_sets: Mapping[str, frozenset[str]], threshold: int
) -> dict[str, frozenset[str]]:
    """Drop labels carried by fewer than ``threshold`` mentions of a document.

    Counting is by mention membership, so a parent always counts at least as
    often as its children and closure survives.
    """
    counts: dict[str, int] = {}
    for labels in label_sets.values():
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
    return {
        mid: frozenset(l for l in labels if counts[l] >= threshold)
        for mid, labels in label_sets.items()
    }


@dataclass(frozen=True)
class PruningConfig:
    sibling: bool = True
    coarse: bool = True
    min_count: bool = True
    min_count_threshold: int = 2


@dataclass
class PruningStats:
    """Label tokens removed by each heuristic, accumulated over documents."""

    labels_in: int = 0
    labels_out: int = 0
    removed: dict[str, int] = field(
        default_factory=lambda: {h: 0 for h in HEURISTICS}
    )
    mentions_emptied: int = 0

    def merge(self, other: "PruningStats") -> None:
        self.labels_in += other.labels_in
        self.labels_out += other.labels_out
        self.mentions_emptied += other.mentions_emptied
        for key, value in other.removed.items():
            self.removed[key] = self.removed.get(key, 0) + value


def prune_document(
    label_sets: Mapping[str, frozenset[str]],
    tax: Taxonomy,
    config: PruningConfig = PruningConfig(),
    coarse_dists: Mapping[str, Mapping[str, float]] | None = None,
) -> tuple[dict[str, frozenset[str]], PruningStats]:
    """Run the enabled heuristics, in their fixed order, over one document."""
    if config.coarse and coarse_dists is None:
        raise PruningError("coarse pruning enabled but no coarse scores given")
    if config.min_count and config.min_count_threshold < 1:
        raise PruningError("min-count threshold must be at least 1")
    current = {mid: labels for mid, labels in label_sets.items()}
    stats = PruningStats(labels_in=sum(len(v) for v in current.values()))

    def count():
        return sum(len(v) for v in current.values())

    if config.sibling:
        before = count()
        current = {mid: prune_sibling(labels, tax) for mid, labels in current.items()}
        stats.removed["sibling"] = before - count()
    if config.coarse:
        before = count()
        out = {}
        for mid, labels in current.items():
            if mid not in coarse_dists:
                raise PruningError(f"no coarse scores for mention {mid!r}")
            out[mid] = prune_coarse(labels, coarse_dists[mid], tax)
        current = out
        stats.removed["coarse"] = before - count()
    if config.min_count:
        before = count()
        current = prune_min_count(current, config.min_count_threshold)
        stats.removed["min-count"] = before - count()

    stats.labels_out = count()
    stats.mentions_emptied = sum(
        1 for mid in label_sets if label_sets[mid] and not current[mid]
    )
    return current, stats


def prune_corpus(
    docs: Iterable[Document],
    tax: Taxonomy,
    mapping: Mapping[str, frozenset[str]],
    config: PruningConfig = PruningConfig(),
    coarse_scores: Callable[[Document], dict[str, dict[str, float]]] | None = None,
) -> tuple[list[Document], PruningStats]:
    """Map each mention's raw types and prune, document by document.

    ``coarse_scores`` turns a document into per-mention depth-1 distributions
    (kept as a callable so the classifier and its feature inputs stay the
    caller's concern). Pruned sets are written to ``gold_labels``.
    """
    total = PruningStats()
    out: list[Document] = []
    for doc in docs:
        label_sets = {
            m.id: map_raw_types(m.raw_types, mapping, tax) for m in doc.mentions
        }
        dists = coarse_scores(doc) if config.coarse and coarse_scores else None
        pruned, stats = prune_document(label_sets, tax, config, dists)
        total.merge(stats)
        out.append(
            replace(
                doc,
                mentions=tuple(
                    replace(m, gold_labels=pruned[m.id]) for m in doc.mentions
                ),
            )
        )
    return out, total
