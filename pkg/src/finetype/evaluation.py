"""Micro-averaged scoring, PR curves, and dev-set threshold tuning.

The unit of account everywhere is the (mention, label) pair, where a mention
is keyed by ``(document id, mention id)``. Gold and predicted label sets are
compared as pair sets; per-level scores restrict both sides to labels at one
exact depth. Label depth is read off the path string, so nothing here needs
the taxonomy object itself.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Document
from .errors import EvaluationError
from .inference import Prediction

MentionKey = tuple[str, str]


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def prf_from_pairs(gold: set, pred: set, warn: bool = True) -> PRF:
    """Micro precision/recall/F1 over two pair sets.

    Empty denominators score zero; that is a degenerate evaluation, so it
    warns unless told not to (the tuning sweep hits it on purpose).
    """
    tp = len(gold & pred)
    if not pred and warn:
        warnings.warn("no predicted pairs; precision defaults to 0", stacklevel=2)
    if not gold and warn:
        warnings.warn("no gold pairs; recall defaults to 0", stacklevel=2)
    precision = tp / len(pred) if pred else 0.0
    recall = tp / len(gold) if gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return PRF(precision, recall, f1, tp, len(pred) - tp, len(gold) - tp)


def label_depth(label: str) -> int:
    return label.count("/") + 1


def gold_label_map(
    docs: Iterable[Document],
    kinds: Sequence[str] = ("named", "nominal"),
    split: str | None = None,
) -> dict[MentionKey, frozenset[str]]:
    out: dict[MentionKey, frozenset[str]] = {}
    for doc in docs:
        if split is not None and doc.split != split:
            continue
        for mention in doc.mentions:
            if mention.kind in kinds:
                out[(doc.id, mention.id)] = mention.gold_labels
    return out


def predicted_label_map(
    predictions: Iterable[Prediction],
) -> dict[MentionKey, frozenset[str]]:
    out: dict[MentionKey, frozenset[str]] = {}
    for p in predictions:
        key = (p.doc_id, p.mention_id)
        if key in out:
            raise EvaluationError(f"duplicate prediction for mention {key}")
        out[key] = p.labels
    return out


def _pairs(label_map: Mapping[MentionKey, frozenset[str]], depth: int | None = None):
    return {
        (key, label)
        for key, labels in label_map.items()
        for label in labels
        if depth is None or label_depth(label) == depth
    }


@dataclass
class EvalReport:
    overall: PRF
    per_level: dict[int, PRF] = field(default_factory=dict)
    n_mentions: int = 0
    auc: float | None = None
    notes: dict = field(default_factory=dict)

    def render(self) -> str:
        def row(name: str, prf: PRF) -> str:
            return (
                f"{name:<10}{100 * prf.precision:>10.2f}{100 * prf.recall:>10.2f}"
                f"{100 * prf.f1:>10.2f}"
            )

        lines = [f"{'':<10}{'P':>10}{'R':>10}{'F1':>10}", row("overall", self.overall)]
        for depth in sorted(self.per_level):
            lines.append(row(f"level {depth}", self.per_level[depth]))
        if self.auc is not None:
            lines.append(f"{'PR-AUC':<10}{100 * self.auc:>10.2f}")
        lines.append(f"mentions: {self.n_mentions}")
        return "\n".join(lines)


def evaluate(
    gold: Mapping[MentionKey, frozenset[str]],
    predicted: Mapping[MentionKey, frozenset[str]],
    per_level: bool = True,
) -> EvalReport:
    """Score predicted label sets against gold ones, mention for mention.

    The two maps must cover exactly the same mentions; a mismatch means the
    predictions came from a different corpus slice and the numbers would be
    silently wrong.
    """
    if set(gold) != set(predicted):
        missing = sorted(set(gold) - set(predicted))[:3]
        extra = sorted(set(predicted) - set(gold))[:3]
        raise EvaluationError(
            f"gold and predictions cover different mentions "
            f"(missing e.g. {missing}, unexpected e.g. {extra})"
        )
    report = EvalReport(
        overall=prf_from_pairs(_pairs(gold), _pairs(predicted)),
        n_mentions=len(gold),
    )
    if per_level:
        depths = {
            label_depth(l)
            for labels in list(gold.values()) + list(predicted.values())
            for l in labels
        }
        for depth in sorted(depths):
            report.per_level[depth] = prf_from_pairs(
                _pairs(gold, depth), _pairs(predicted, depth), warn=False
            )
    return report


def pr_curve(
    gold: Mapping[MentionKey, frozenset[str]],
    scores: Mapping[MentionKey, Mapping[str, float]],
) -> list[tuple[float, float, float]]:
    """Precision-recall sweep over every distinct score value.

    Thresholds run from 1.0 down through each distinct score to 0.0, keeping
    pairs scored strictly above the threshold. Points with no predicted pairs
    are dropped. Returns ``(threshold, recall, precision)`` rows with recall
    non-decreasing.
    """
    if set(gold) != set(scores):
        raise EvaluationError("gold and scores cover different mentions")
    gold_pairs = _pairs(gold)
    if not gold_pairs:
        raise EvaluationError("no gold labels to rank against")
    ranked = sorted(
        (
            (-s, key, label)
            for key, label_scores in scores.items()
            for label, s in label_scores.items()
        )
    )
    thresholds = sorted({1.0, 0.0} | {-s for s, _, _ in ranked}, reverse=True)
    points = []
    i = tp = n_pred = 0
    for theta in thresholds:
        # pairs are score-descending; absorb everything strictly above theta
        while i < len(ranked) and -ranked[i][0] > theta:
            n_pred += 1
            if (ranked[i][1], ranked[i][2]) in gold_pairs:
                tp += 1
            i += 1
        if n_pred == 0:
            continue
        points.append((theta, tp / len(gold_pairs), tp / n_pred))
    return points


def pr_auc(points: Sequence[tuple[float, float, float]]) -> float:
    """Trapezoidal area under the precision-recall points.

    The curve is anchored at (recall 0, first precision); recall the sweep
    never reaches contributes nothing.
    """
    if not points:
        return 0.0
    area = 0.0
    prev_r, prev_p = 0.0, points[0][2]
    for _, r, p in points:
        area += (r - prev_r) * (p + prev_p) / 2
        prev_r, prev_p = r, p
    return area


def pr_curve_auc(
    gold: Mapping[MentionKey, frozenset[str]],
    scores: Mapping[MentionKey, Mapping[str, float]],
) -> tuple[float, list[tuple[float, float, float]]]:
    points = pr_curve(gold, scores)
    return pr_auc(points), points


def tune_threshold(
    gold: Mapping[MentionKey, frozenset[str]],
    scores: Mapping[MentionKey, Mapping[str, float]],
    step: float = 0.01,
) -> tuple[float, float]:
    """Grid-search the decision threshold for best micro F1.

    The grid is ``0, step, 2*step, ... , 1``; candidates are compared by F1
    and ties go to the smallest threshold, so results never depend on dict
    order. Returns ``(threshold, f1)``.
    """
    if set(gold) != set(scores):
        raise EvaluationError("gold and scores cover different mentions")
    if not 0 < step <= 1:
        raise EvaluationError(f"grid step must be in (0, 1], got {step}")
    gold_pairs = _pairs(gold)
    pairs = [
        ((key, label), s)
        for key, label_scores in sorted(scores.items())
        for label, s in sorted(label_scores.items())
    ]
    n_steps = round(1 / step)
    best_theta, best_f1 = 0.0, -1.0
    for i in range(n_steps + 1):
        theta = i / n_steps
        pred = {pair for pair, s in pairs if s > theta}
        f1 = prf_from_pairs(gold_pairs, pred, warn=False).f1
        if f1 > best_f1:
            best_theta, best_f1 = theta, f1
    return best_theta, best_f1
