"""Turning per-label scores into consistent label-set decisions.

Three strategies, all thresholding with strict ``>``:

* ``independent``: keep every label whose raw score clears the threshold.
  Nothing ties a child to its parent, so the result may violate the tree.
* ``conditional``: rescore each label as the product of raw scores along its
  root path. Path products only shrink with depth, so thresholded sets are
  always ancestor-closed.
* ``marginal``: treat raw scores as independent Bernoulli beliefs, restrict
  to the valid assignments (one root-to-node chain per taxonomy label),
  renormalize, and read off per-label marginals. Marginals also shrink with
  depth, and the depth-1 marginals of a distribution sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document
from .errors import InferenceError
from .features import TopicModel, extract_features
from .models import LinearModel
from .taxonomy import Taxonomy

STRATEGIES = ("independent", "conditional", "marginal")


def probs_vector(probs: Mapping[str, float], tax: Taxonomy) -> np.ndarray:
    """Per-label probabilities in label id order; every label must be scored."""
    out = np.empty(len(tax))
    for label in tax.labels:
        try:
            out[label.id] = probs[label.name]
        except KeyError:
            raise InferenceError(f"missing score for label {label.name!r}") from None
    if np.any((out < 0) | (out > 1)):
        raise InferenceError("scores must lie in [0, 1]")
    return out


class MarginalScorer:
    """Exact marginalization over the valid chain assignments of a taxonomy.

    Precomputes the configuration membership matrix once; each scoring call
    is then two vectorized passes over a ``(n_configs, n_labels)`` table.
    """

    def __init__(self, tax: Taxonomy):
        self.tax = tax
        configs = tax.valid_configurations()
        self.members = np.zeros((len(configs), len(tax)), dtype=bool)
        for ci, config in enumerate(configs):
            for name in config:
                self.members[ci, tax.id_of(name)] = True

    def config_scores(self, p: np.ndarray) -> np.ndarray:
        """Unnormalized probability of each valid assignment."""
        return np.where(self.members, p, 1.0 - p).prod(axis=1)

    def marginals(self, p: np.ndarray) -> np.ndarray:
        scores = self.config_scores(p)
        z = scores.sum()
        if z <= 0.0:
            raise InferenceError(
                "every valid assignment has zero probability; cannot normalize"
            )
        return (self.members.T @ scores) / z


def refine_independent(probs: Mapping[str, float], tax: Taxonomy) -> dict[str, float]:
    vec = probs_vector(probs, tax)
    return {label.name: float(vec[label.id]) for label in tax.labels}


def refine_conditional(probs: Mapping[str, float], tax: Taxonomy) -> dict[str, float]:
    vec = probs_vector(probs, tax)
    out: dict[str, float] = {}
    for label in tax.labels:
        product = 1.0
        for k in range(1, label.depth + 1):
            product *= vec[tax.id_of("/".join(label.path[:k]))]
        out[label.name] = product
    return out


def refine_marginal(
    probs: Mapping[str, float], tax: Taxonomy, scorer: MarginalScorer | None = None
) -> dict[str, float]:
    scorer = scorer if scorer is not None else MarginalScorer(tax)
    vec = probs_vector(probs, tax)
    marg = scorer.marginals(vec)
    return {label.name: float(marg[label.id]) for label in tax.labels}


def refine(
    probs: Mapping[str, float],
    tax: Taxonomy,
    strategy: str,
    scorer: MarginalScorer | None = None,
) -> dict[str, float]:
    if strategy == "independent":
        return refine_independent(probs, tax)
    if strategy == "conditional":
        return refine_conditional(probs, tax)
    if strategy == "marginal":
        return refine_marginal(probs, tax, scorer)
    raise InferenceError(f"unknown inference strategy {strategy!r}")


def assign(scores: Mapping[str, float], threshold: float) -> frozenset[str]:
    """Labels whose score strictly exceeds the threshold."""
    return frozenset(t for t, s in scores.items() if s > threshold)


@dataclass(frozen=True)
class Prediction:
    """Decided labels plus the refined scores they were decided from."""

    doc_id: str
    mention_id: str
    labels: frozenset[str]
    scores: Mapping[str, float]


def predict_mentions(
    model: LinearModel,
    docs: Iterable[Document],
    tax: Taxonomy,
    strategy: str = "marginal",
    threshold: float = 0.5,
    clusters: Mapping[str, str] | None = None,
    topic_model: TopicModel | None = None,
    split: str | None = None,
    kinds: Sequence[str] = ("named", "nominal"),
    context_width: int = 1,
) -> list[Prediction]:
    """Score and decide every selected mention of a corpus."""
    if strategy not in STRATEGIES:
        raise InferenceError(f"unknown inference strategy {strategy!r}")
    scorer = MarginalScorer(tax) if strategy == "marginal" else None
    out: list[Prediction] = []
    for doc in docs:
        if split is not None and doc.split != split:
            continue
        for mention in doc.mentions:
            if mention.kind not in kinds:
                continue
            bag = extract_features(
                doc, mention, clusters=clusters, topic_model=topic_model,
                context_width=context_width,
            )
            raw = model.score_map(model.dictionary.encode(bag))
            refined = refine(raw, tax, strategy, scorer)
            out.append(
                Prediction(
                    doc_id=doc.id,
                    mention_id=mention.id,
                    labels=assign(refined, threshold),
                    scores=refined,
                )
            )
    return out
