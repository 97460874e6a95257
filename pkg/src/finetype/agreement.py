"""Multi-annotator consensus, agreement scoring, and disagreement analysis.

An annotation record is one annotator's label set for one mention. Records
arrive in order; a later record from the same annotator for the same mention
replaces the earlier one. Label sets are closed under ancestors on ingestion,
so support counting and set comparison always see consistent sets.

Consensus keeps the labels at least ``min_support`` annotators agree on, over
the mentions at least ``min_support`` annotators touched at all. Agreement is
each annotator scored against that consensus, per depth. Disagreements are
classified per label pair: SPECIFICITY when one label is an ancestor of the
other (the annotators stopped at different depths of one branch), TYPE when
the labels sit on different branches.

Disagreement counting works on frontier labels (an annotator's deepest
commitments: labels with no present descendant). A pair is counted once per
mention when any two annotators' frontiers exhibit it, no matter how many
annotator pairs repeat it there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

from .errors import EvaluationError
from .evaluation import PRF, label_depth, prf_from_pairs
from .taxonomy import Taxonomy

MentionKey = tuple[str, str]

SPECIFICITY = "SPECIFICITY"
TYPE = "TYPE"


@dataclass(frozen=True)
class AnnotationRecord:
    annotator: str
    document: str
    mention: str
    labels: frozenset[str]


def latest_annotations(
    records: Iterable[AnnotationRecord], tax: Taxonomy
) -> dict[MentionKey, dict[str, frozenset[str]]]:
    """Per mention, each annotator's latest label set, ancestor-closed."""
    out: dict[MentionKey, dict[str, frozenset[str]]] = {}
    for record in records:
        key = (record.document, record.mention)
        labels = tax.closure(record.labels) if record.labels else frozenset()
        out.setdefault(key, {})[record.annotator] = labels
    return out


def consensus_sets(
    records: Iterable[AnnotationRecord], tax: Taxonomy, min_support: int = 2
) -> dict[MentionKey, frozenset[str]]:
    """Labels supported by at least ``min_support`` annotators, per mention.

    Mentions touched by fewer than ``min_support`` annotators are out of the
    consensus domain entirely; inside the domain an empty set is a real
    outcome (everyone disagreed).
    """
    if min_support < 1:
        raise EvaluationError("min_support must be at least 1")
    out: dict[MentionKey, frozenset[str]] = {}
    for key, by_annotator in latest_annotations(records, tax).items():
        if len(by_annotator) < min_support:
            continue
        support: dict[str, int] = {}
        for labels in by_annotator.values():
            for label in labels:
                support[label] = support.get(label, 0) + 1
        out[key] = frozenset(l for l, n in support.items() if n >= min_support)
    return out


@dataclass
class AgreementReport:
    per_annotator: dict[str, dict[int, PRF]]
    average: dict[int, PRF]
    n_mentions: int

    def render(self) -> str:
        lines = [f"{'depth':<8}{'P':>8}{'R':>8}{'F1':>8}   (mean over annotators)"]
        for depth in sorted(self.average):
            prf = self.average[depth]
            lines.append(
                f"{depth:<8}{prf.precision:>8.2f}{prf.recall:>8.2f}{prf.f1:>8.2f}"
            )
        lines.append(f"consensus mentions: {self.n_mentions}")
        for annotator in sorted(self.per_annotator):
            for depth in sorted(self.per_annotator[annotator]):
                prf = self.per_annotator[annotator][depth]
                lines.append(
                    f"{annotator} depth {depth}: "
                    f"P={prf.precision:.2f} R={prf.recall:.2f} F1={prf.f1:.2f}"
                )
        return "\n".join(lines)


def annotator_agreement(
    records: Iterable[AnnotationRecord], tax: Taxonomy, min_support: int = 2
) -> AgreementReport:
    """Score each annotator against the consensus, depth by depth.

    An annotator is scored only on consensus-domain mentions they annotated.
    The summary row is the unweighted mean over annotators; tp/fp/fn are
    summed so the counts stay meaningful.
    """
    records = list(records)
    latest = latest_annotations(records, tax)
    consensus = consensus_sets(records, tax, min_support)
    depths = {
        label_depth(l)
        for labels in consensus.values()
        for l in labels
    } | {
        label_depth(l)
        for key in consensus
        for labels in latest[key].values()
        for l in labels
    }
    annotators = sorted({r.annotator for r in records})
    per_annotator: dict[str, dict[int, PRF]] = {}
    for annotator in annotators:
        keys = [k for k in consensus if annotator in latest[k]]
        per_depth: dict[int, PRF] = {}
        for depth in sorted(depths):
            gold = {
                (k, l) for k in keys for l in consensus[k] if label_depth(l) == depth
            }
            pred = {
                (k, l)
                for k in keys
                for l in latest[k][annotator]
                if label_depth(l) == depth
            }
            per_depth[depth] = prf_from_pairs(gold, pred, warn=False)
        per_annotator[annotator] = per_depth
    average: dict[int, PRF] = {}
    for depth in sorted(depths):
        rows = [per_annotator[a][depth] for a in annotators]
        n = len(rows)
        average[depth] = PRF(
            precision=sum(r.precision for r in rows) / n,
            recall=sum(r.recall for r in rows) / n,
            f1=sum(r.f1 for r in rows) / n,
            tp=sum(r.tp for r in rows),
            fp=sum(r.fp for r in rows),
            fn=sum(r.fn for r in rows),
        )
    return AgreementReport(
        per_annotator=per_annotator, average=average, n_mentions=len(consensus)
    )


def classify_disagreement(label_a: str, label_b: str, tax: Taxonomy) -> str:
    """SPECIFICITY when one label is an ancestor of the other, else TYPE."""
    if label_a == label_b:
        raise EvaluationError(f"{label_a!r} is not a disagreement with itself")
    if tax.is_ancestor(label_a, label_b) or tax.is_ancestor(label_b, label_a):
        return SPECIFICITY
    return TYPE


def frontier(labels: frozenset[str], tax: Taxonomy) -> frozenset[str]:
    """The deepest commitments of a closed set: labels with no present child."""
    return frozenset(
        l for l in labels if not any(d in labels for d in tax.children(l))
    )


@dataclass(frozen=True)
class DisagreementRow:
    category: str
    labels: tuple[str, str]
    count: int


def disagreement_table(
    records: Iterable[AnnotationRecord], tax: Taxonomy, min_support: int = 2
) -> list[DisagreementRow]:
    """Ranked label pairs annotators disagreed on, most frequent first.

    SPECIFICITY pairs are reported ancestor first; TYPE pairs in label id
    order. Rows sort by count descending, then by pair.
    """
    records = list(records)
    latest = latest_annotations(records, tax)
    domain = consensus_sets(records, tax, min_support)
    counts: dict[tuple[str, tuple[str, str]], int] = {}
    for key in domain:
        by_annotator = latest[key]
        pairs: set[tuple[str, str]] = set()
        fronts = [frontier(labels, tax) for _, labels in sorted(by_annotator.items())]
        for fa, fb in combinations(fronts, 2):
            for la in fa:
                for lb in fb:
                    if la == lb:
                        continue
                    if tax.is_ancestor(la, lb):
                        pairs.add((la, lb))
                    elif tax.is_ancestor(lb, la):
                        pairs.add((lb, la))
                    else:
                        pairs.add(
                            tuple(sorted((la, lb), key=lambda l: l.split("/")))
                        )
        for pair in pairs:
            item = (classify_disagreement(pair[0], pair[1], tax), pair)
            counts[item] = counts.get(item, 0) + 1
    rows = [
        DisagreementRow(category=cat, labels=pair, count=n)
        for (cat, pair), n in counts.items()
    ]
    rows.sort(key=lambda r: (-r.count, r.category, r.labels))
    return rows


def render_disagreements(rows: Iterable[DisagreementRow]) -> str:
    lines = [f"{'count':<8}{'category':<14}labels"]
    for row in rows:
        lines.append(
            f"{row.count:<8}{row.category:<14}({row.labels[0]}, {row.labels[1]})"
        )
    return "\n".join(lines)
