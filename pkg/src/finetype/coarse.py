"""Coarse mention classifier over the depth-1 types.

A softmax over the taxonomy roots, trained on a separately annotated corpus
whose mentions carry depth-1 gold labels. The coarse pruning heuristic uses
its argmax to discard implausible fine-grained branches, so training refuses
to proceed when a root has no training mentions at all: a class the model has
never seen would silently prune every label under it.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .corpus import Document
from .errors import ModelError
from .features import FeatureDictionary, TopicModel
from .models import (
    LinearModel,
    TrainingInstance,
    build_matrix,
    collect_feature_strings,
    instances_from_docs,
)
from .optim import fit_params, softmax_loss_grad
from .taxonomy import Taxonomy


def depth1_targets(
    instances: Iterable[TrainingInstance], tax: Taxonomy
) -> tuple[list[tuple[int, ...]], list[int]]:
    """Expand instances to one row per depth-1 gold label."""
    roots = tax.at_depth(1)
    root_index = {name: i for i, name in enumerate(roots)}
    rows: list[tuple[int, ...]] = []
    targets: list[int] = []
    for inst in instances:
        coarse = sorted(l for l in inst.labels if l in root_index)
        for label in coarse:
            rows.append(inst.x)
            targets.append(root_index[label])
    return rows, targets


def train_coarse(
    docs: Iterable[Document],
    tax: Taxonomy,
    clusters: Mapping[str, str] | None = None,
    topic_model: TopicModel | None = None,
    l2: float = 1.0,
    split: str | None = "train",
    context_width: int = 1,
) -> LinearModel:
    docs = list(docs)
    dictionary = collect_feature_strings(
        docs, clusters=clusters, topic_model=topic_model, split=split,
        context_width=context_width,
    )
    instances = instances_from_docs(
        docs, tax, dictionary, clusters=clusters, topic_model=topic_model,
        split=split,
    )
    rows, targets = depth1_targets(instances, tax)
    roots = tax.at_depth(1)
    missing = [roots[i] for i in range(len(roots)) if i not in set(targets)]
    if missing:
        raise ModelError(f"no training mentions for coarse classes: {missing}")
    k = len(roots)
    n_features = len(dictionary)
    X = build_matrix(rows, n_features)
    params = fit_params(
        softmax_loss_grad, k * n_features + k,
        (X, np.array(targets, dtype=np.int64), k, l2),
    )
    return LinearModel(
        kind="coarse",
        taxonomy_hash=tax.content_hash(),
        dictionary=dictionary,
        labels=roots,
        weights=params[: k * n_features].reshape(k, n_features),
        bias=params[k * n_features :],
        metadata={"l2": l2, "n_rows": len(rows)},
    )


def predict_coarse(model: LinearModel, bag: Iterable[str]) -> dict[str, float]:
    """Distribution over the depth-1 types for one mention feature bag."""
    if model.kind != "coarse":
        raise ModelError(f"expected a coarse model, got kind {model.kind!r}")
    return model.score_map(model.dictionary.encode(bag))
