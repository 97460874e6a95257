"""Training and scoring of the per-label and flat classifiers.

Two model families share one container shape:

* ``local``: one L2-regularized binary logistic classifier per taxonomy
  label, trained one-vs-negatives where the negative pool is chosen by a
  strategy (``all``, ``sibling``, ``depth``).
* ``flat``: a single softmax over every taxonomy label, trained with
  multi-label instances expanded to one row per gold label.

Scores from ``local`` models are independent per-label probabilities;
scores from ``flat`` models form one distribution over all labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.special import expit, logsumexp

from .corpus import Document
from .errors import DegenerateLabelError, ModelError
from .features import FeatureDictionary, TopicModel, extract_features
from .optim import binary_logistic_loss_grad, fit_params, softmax_loss_grad
from .taxonomy import Taxonomy

NEGATIVE_STRATEGIES = ("all", "sibling", "depth")

# Decision bias for labels whose training pool is one-sided: large enough to
# saturate the sigmoid well past any threshold grid, small enough to stay
# comfortably inside float range.
SATURATED_BIAS = 20.0


@dataclass(frozen=True)
class TrainingInstance:
    """One mention encoded for training: feature ids plus its gold label set."""

    x: tuple[int, ...]
    labels: frozenset[str]
    doc_id: str = ""
    mention_id: str = ""


def instances_from_docs(
    docs: Iterable[Document],
    tax: Taxonomy,
    dictionary: FeatureDictionary,
    clusters: Mapping[str, str] | None = None,
    topic_model: TopicModel | None = None,
    split: str | None = None,
    kinds: Sequence[str] = ("named", "nominal"),
    context_width: int = 1,
    require_labels: bool = True,
) -> list[TrainingInstance]:
    """Encode mention feature bags against a frozen dictionary.

    Gold label sets must be ancestor-closed; mentions without gold labels are
    skipped when ``require_labels`` is set, kept with an empty set otherwise.
    """
    out: list[TrainingInstance] = []
    for doc in docs:
        if split is not None and doc.split != split:
            continue
        for mention in doc.mentions:
            if mention.kind not in kinds:
                continue
            if require_labels and not mention.gold_labels:
                continue
            labels = mention.gold_labels
            if labels and tax.closure(labels) != labels:
                raise ModelError(
                    f"document {doc.id!r} mention {mention.id!r}: gold labels "
                    "not ancestor-closed"
                )
            bag = extract_features(
                doc, mention, clusters=clusters, topic_model=topic_model,
                context_width=context_width,
            )
            out.append(
                TrainingInstance(
                    x=dictionary.encode(bag),
                    labels=frozenset(labels),
                    doc_id=doc.id,
                    mention_id=mention.id,
                )
            )
    return out


def collect_feature_strings(
    docs: Iterable[Document],
    clusters: Mapping[str, str] | None = None,
    topic_model: TopicModel | None = None,
    split: str | None = None,
    kinds: Sequence[str] = ("named", "nominal"),
    context_width: int = 1,
) -> FeatureDictionary:
    """First pass over a corpus: gather every feature string into a dictionary."""
    seen: set[str] = set()
    for doc in docs:
        if split is not None and doc.split != split:
            continue
        for mention in doc.mentions:
            if mention.kind not in kinds:
                continue
            seen.update(
                extract_features(
                    doc, mention, clusters=clusters, topic_model=topic_model,
                    context_width=context_width,
                )
            )
    return FeatureDictionary.from_strings(seen)


def build_matrix(rows: Sequence[tuple[int, ...]], n_features: int) -> csr_matrix:
    """Binary CSR matrix from per-instance sorted feature id tuples."""
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, row in enumerate(rows):
        indptr[i + 1] = indptr[i] + len(row)
    indices = np.fromiter(
        (j for row in rows for j in row), dtype=np.int64, count=int(indptr[-1])
    )
    data = np.ones(int(indptr[-1]))
    return csr_matrix((data, indices, indptr), shape=(len(rows), n_features))


def negatives_for(
    label: str, instances: Sequence[TrainingInstance], tax: Taxonomy, strategy: str
) -> list[int]:
    """Indices of the instances that count as negatives for ``label``.

    ``all``: every instance not gold-labeled with it. ``sibling``: those
    additionally labeled with one of its siblings (ancestor closure makes a
    sibling's descendants imply the sibling itself). ``depth``: those
    additionally labeled with some other label at the same depth.
    """
    if strategy not in NEGATIVE_STRATEGIES:
        raise ModelError(f"unknown negative strategy {strategy!r}")
    sibs = tax.siblings(label)
    depth = tax.depth(label)
    out = []
    for i, inst in enumerate(instances):
        if label in inst.labels:
            continue
        if strategy == "all":
            out.append(i)
        elif strategy == "sibling":
            if inst.labels & sibs:
                out.append(i)
        else:
            if any(l != label and tax.depth(l) == depth for l in inst.labels):
                out.append(i)
    return out


def positives_for(label: str, instances: Sequence[TrainingInstance]) -> list[int]:
    return [i for i, inst in enumerate(instances) if label in inst.labels]


@dataclass
class LinearModel:
    """Shared container for trained classifiers of any kind."""

    kind: str
    taxonomy_hash: str
    dictionary: FeatureDictionary
    labels: tuple[str, ...]
    weights: np.ndarray
    bias: np.ndarray
    metadata: dict = field(default_factory=dict)

    def scores(self, x: tuple[int, ...]) -> np.ndarray:
        """Per-label scores for one encoded mention.

        Local models give independent sigmoid probabilities; flat models give
        one softmax distribution over all labels.
        """
        idx = list(x)
        z = self.weights[:, idx].sum(axis=1) + self.bias if idx else self.bias.copy()
        if self.kind in ("flat", "coarse"):
            return np.exp(z - logsumexp(z))
        return expit(z)

    def score_map(self, x: tuple[int, ...]) -> dict[str, float]:
        s = self.scores(x)
        return {label: float(s[i]) for i, label in enumerate(self.labels)}


def train_binary_logistic(
    pos_rows: Sequence[tuple[int, ...]],
    neg_rows: Sequence[tuple[int, ...]],
    n_features: int,
    l2: float,
) -> tuple[np.ndarray, float]:
    """Fit one binary classifier; either side empty is the caller's error."""
    if not pos_rows or not neg_rows:
        raise DegenerateLabelError("one-sided training pool")
    X = build_matrix(list(pos_rows) + list(neg_rows), n_features)
    y = np.concatenate([np.ones(len(pos_rows)), -np.ones(len(neg_rows))])
    params = fit_params(binary_logistic_loss_grad, n_features + 1, (X, y, l2))
    return params[:-1], float(params[-1])


def train_local(
    instances: Sequence[TrainingInstance],
    tax: Taxonomy,
    dictionary: FeatureDictionary,
    negatives: str = "all",
    l2: float = 1.0,
) -> LinearModel:
    """One binary classifier per taxonomy label.

    Labels whose pool is one-sided get a saturated constant decision instead
    of a fit: no positives pins the score near zero, no negatives near one.
    They are listed under ``metadata["degenerate_labels"]``.
    """
    n_features = len(dictionary)
    weights = np.zeros((len(tax), n_features))
    bias = np.zeros(len(tax))
    degenerate: list[list[str]] = []
    for label in tax.names:
        lid = tax.id_of(label)
        pos = positives_for(label, instances)
        neg = negatives_for(label, instances, tax, negatives)
        if not pos:
            bias[lid] = -SATURATED_BIAS
            degenerate.append([label, "no-positives"])
            continue
        if not neg:
            bias[lid] = SATURATED_BIAS
            degenerate.append([label, "no-negatives"])
            continue
        w, b = train_binary_logistic(
            [instances[i].x for i in pos],
            [instances[i].x for i in neg],
            n_features,
            l2,
        )
        weights[lid] = w
        bias[lid] = b
    return LinearModel(
        kind="local",
        taxonomy_hash=tax.content_hash(),
        dictionary=dictionary,
        labels=tax.names,
        weights=weights,
        bias=bias,
        metadata={
            "negatives": negatives,
            "l2": l2,
            "n_instances": len(instances),
            "degenerate_labels": degenerate,
        },
    )


def expand_multilabel(
    instances: Sequence[TrainingInstance], tax: Taxonomy
) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """One training row per (instance, gold label) pair, labels in id order."""
    rows: list[tuple[int, ...]] = []
    targets: list[int] = []
    for inst in instances:
        for label in sorted(inst.labels, key=tax.id_of):
            rows.append(inst.x)
            targets.append(tax.id_of(label))
    return rows, np.array(targets, dtype=np.int64)


def train_flat(
    instances: Sequence[TrainingInstance],
    tax: Taxonomy,
    dictionary: FeatureDictionary,
    l2: float = 1.0,
) -> LinearModel:
    """Single softmax over all labels with multi-label expansion."""
    rows, targets = expand_multilabel(instances, tax)
    if not rows:
        raise ModelError("no labeled training instances")
    n_features = len(dictionary)
    k = len(tax)
    X = build_matrix(rows, n_features)
    params = fit_params(softmax_loss_grad, k * n_features + k, (X, targets, k, l2))
    return LinearModel(
        kind="flat",
        taxonomy_hash=tax.content_hash(),
        dictionary=dictionary,
        labels=tax.names,
        weights=params[: k * n_features].reshape(k, n_features),
        bias=params[k * n_features :],
        metadata={"l2": l2, "n_instances": len(instances), "n_rows": len(rows)},
    )
