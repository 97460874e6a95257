"""Versioned on-disk model container.

A model file is a single JSON object with sorted keys, so saving the same
model twice produces identical bytes. Loading verifies the format version and
that the model was trained against the same taxonomy (by content hash);
either mismatch is a hard error, silently proceeding would mis-index every
weight row.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ModelFileError
from .features import FeatureDictionary, TopicModel
from .models import LinearModel
from .taxonomy import Taxonomy

FORMAT_VERSION = 1

MODEL_KINDS = ("local", "flat", "coarse")


def model_to_obj(model: LinearModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "taxonomy_hash": model.taxonomy_hash,
        "features": list(model.dictionary.features),
        "labels": list(model.labels),
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
        "metadata": model.metadata,
    }


def save_model(model: LinearModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_obj(model), handle, sort_keys=True)
        handle.write("\n")


def model_from_obj(obj: dict, tax: Taxonomy) -> LinearModel:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(
            f"unsupported model format version {version!r}, expected {FORMAT_VERSION}"
        )
    kind = obj.get("kind")
    if kind not in MODEL_KINDS:
        raise ModelFileError(f"unknown model kind {kind!r}")
    stored_hash = obj.get("taxonomy_hash")
    if stored_hash != tax.content_hash():
        raise ModelFileError(
            "model was trained against a different taxonomy "
            f"(hash {stored_hash!r}, current {tax.content_hash()!r})"
        )
    labels = tuple(obj["labels"])
    if kind == "coarse":
        if labels != tax.at_depth(1):
            raise ModelFileError("coarse model labels do not match the taxonomy roots")
    elif labels != tax.names:
        raise ModelFileError("model labels do not match the taxonomy")
    weights = np.array(obj["weights"], dtype=np.float64)
    bias = np.array(obj["bias"], dtype=np.float64)
    if weights.shape != (len(labels), len(obj["features"])) or bias.shape != (len(labels),):
        raise ModelFileError("weight shapes do not match labels and features")
    return LinearModel(
        kind=kind,
        taxonomy_hash=stored_hash,
        dictionary=FeatureDictionary(features=tuple(obj["features"])),
        labels=labels,
        weights=weights,
        bias=bias,
        metadata=obj.get("metadata", {}),
    )


def load_model(path: str, tax: Taxonomy) -> LinearModel:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"{path}: not a JSON model file: {exc}") from None
    return model_from_obj(obj, tax)


def save_topic_model(model: TopicModel, path: str) -> None:
    obj = {"format_version": FORMAT_VERSION, "kind": "topic"}
    obj.update(model.to_obj())
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(obj, handle, sort_keys=True)
        handle.write("\n")


def load_topic_model(path: str) -> TopicModel:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"{path}: not a JSON model file: {exc}") from None
    if obj.get("format_version") != FORMAT_VERSION:
        raise ModelFileError(
            f"unsupported model format version {obj.get('format_version')!r}"
        )
    if obj.get("kind") != "topic":
        raise ModelFileError(f"expected a topic model, got kind {obj.get('kind')!r}")
    return TopicModel.from_obj(obj)
