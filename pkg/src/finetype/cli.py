"""Command-line front end binding the pipeline stages together.

Every subcommand is a pure function of its inputs: no clocks, no random
state, no environment dependence (except FINETYPE_STORE for ``serve``).
Running the same invocation twice produces byte-identical output files.

Exit codes: 0 success, 1 runtime failure (bad data, missing file), 2 usage.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from importlib import resources
from typing import Sequence

from .agreement import (
    annotator_agreement,
    consensus_sets,
    disagreement_table,
    render_disagreements,
)
from .coarse import predict_coarse, train_coarse
from .corpus import Document, load_corpus, load_mapping, save_corpus
from .errors import FinetypeError
from .evaluation import (
    evaluate,
    gold_label_map,
    pr_curve_auc,
    tune_threshold,
)
from .features import TopicModel, extract_features, load_clusters
from .inference import STRATEGIES, predict_mentions
from .modelfile import (
    load_model,
    load_topic_model,
    save_model,
    save_topic_model,
)
from .models import collect_feature_strings, instances_from_docs, train_flat, train_local
from .pruning import HEURISTICS, PruningConfig, prune_corpus
from .taxonomy import Taxonomy, load_taxonomy_file

NEGATIVE_MODES = ("all", "sibling", "depth")


def default_taxonomy_path() -> str:
    return str(resources.files("finetype").joinpath("data/default_taxonomy.txt"))


def _load_taxonomy(args: argparse.Namespace) -> Taxonomy:
    return load_taxonomy_file(args.taxonomy or default_taxonomy_path())


def _load_docs(args: argparse.Namespace) -> list[Document]:
    docs = load_corpus(args.corpus)
    split = getattr(args, "split", None)
    if split is not None:
        docs = [d for d in docs if d.split == split]
    return docs


def _load_side_inputs(args) -> tuple[dict[str, str] | None, TopicModel | None]:
    clusters = load_clusters(args.clusters) if args.clusters else None
    topic = load_topic_model(args.topic_model) if args.topic_model else None
    return clusters, topic


def _load_predictions(path: str):
    """Read a predictions file back into label and score maps."""
    labels: dict[tuple[str, str], frozenset[str]] = {}
    scores: dict[tuple[str, str], dict[str, float]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                key = (str(obj["document"]), str(obj["mention"]))
                labels[key] = frozenset(str(l) for l in obj["labels"])
                scores[key] = {str(l): float(s) for l, s in obj["scores"].items()}
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FinetypeError(f"{path}:{lineno}: bad prediction record: {exc}")
    return labels, scores


# ---------------------------------------------------------------- taxonomy

def cmd_taxonomy(args: argparse.Namespace) -> int:
    tax = _load_taxonomy(args)
    print(f"labels\t{len(tax)}")
    depth = 1
    while tax.at_depth(depth):
        print(f"depth {depth}\t{len(tax.at_depth(depth))}")
        depth += 1
    if args.tree:
        def walk(name: str, indent: int):
            print("  " * indent + name.rsplit("/", 1)[-1])
            for child in sorted(tax.children(name)):
                walk(child, indent + 1)

        for root in sorted(tax.roots()):
            walk(root, 0)
    return 0


# ------------------------------------------------------------------- prune

def cmd_prune(args: argparse.Namespace) -> int:
    tax = _load_taxonomy(args)
    docs = _load_docs(args)
    mapping = load_mapping(args.mapping, tax)
    clusters, topic = _load_side_inputs(args)

    config = PruningConfig(
        sibling=args.sibling,
        coarse=args.coarse,
        min_count=args.min_count is not None,
        min_count_threshold=args.min_count if args.min_count is not None else 2,
    )

    coarse_scores = None
    if config.coarse:
        coarse_model = load_model(args.coarse_model, tax)

        def coarse_scores(doc: Document) -> dict[str, dict[str, float]]:
            out = {}
            for m in doc.mentions:
                bag = extract_features(doc, m, clusters=clusters, topic_model=topic)
                out[m.id] = predict_coarse(coarse_model, bag)
            return out

    pruned, stats = prune_corpus(docs, tax, mapping, config, coarse_scores)
    save_corpus(pruned, args.output)

    # mirrors the removal-per-heuristic accounting of the training-set table
    print(f"{'stage':<12}{'removed':>10}{'remaining':>12}")
    print(f"{'(input)':<12}{'-':>10}{stats.labels_in:>12}")
    remaining = stats.labels_in
    enabled = [
        h for h in HEURISTICS
        if getattr(config, h.replace("-", "_"))
    ]
    for heuristic in enabled:
        removed = stats.removed[heuristic]
        remaining -= removed
        print(f"{heuristic:<12}{removed:>10}{remaining:>12}")
    print(f"mentions emptied\t{stats.mentions_emptied}")
    return 0


# ------------------------------------------------------------------- train

def cmd_train(args: argparse.Namespace) -> int:
    tax = _load_taxonomy(args)
    docs = _load_docs(args)
    clusters, topic = _load_side_inputs(args)

    if args.model == "topic":
        tm = TopicModel.train(docs)
        save_topic_model(tm, args.output)
        print(f"topics\t{len(tm.topics)}")
        print(f"vocabulary\t{len(tm.vocab)}")
        return 0

    if args.model == "coarse":
        model = train_coarse(
            docs, tax, clusters=clusters, topic_model=topic, l2=args.l2, split=None,
        )
    else:
        dictionary = collect_feature_strings(docs, clusters=clusters, topic_model=topic)
        instances = instances_from_docs(
            docs, tax, dictionary, clusters=clusters, topic_model=topic,
        )
        if args.model == "local":
            model = train_local(
                instances, tax, dictionary, negatives=args.negatives, l2=args.l2,
            )
        else:
            model = train_flat(instances, tax, dictionary, l2=args.l2)
    save_model(model, args.output)
    print(f"kind\t{model.kind}")
    print(f"features\t{len(model.dictionary)}")
    print(f"labels\t{len(model.labels)}")
    return 0


# ----------------------------------------------------------------- predict

def cmd_predict(args: argparse.Namespace) -> int:
    tax = _load_taxonomy(args)
    docs = _load_docs(args)
    clusters, topic = _load_side_inputs(args)
    model = load_model(args.model, tax)

    predictions = predict_mentions(
        model, docs, tax,
        strategy=args.inference,
        threshold=args.threshold,
        clusters=clusters,
        topic_model=topic,
    )
    with open(args.output, "w", encoding="utf-8") as handle:
        for p in predictions:
            obj = {
                "document": p.doc_id,
                "mention": p.mention_id,
                "labels": sorted(p.labels),
                "scores": {l: p.scores[l] for l in sorted(p.scores)},
            }
            handle.write(json.dumps(obj, sort_keys=True))
            handle.write("\n")
    print(f"mentions\t{len(predictions)}")
    return 0


# ---------------------------------------------------------- tune-threshold

def cmd_tune_threshold(args: argparse.Namespace) -> int:
    gold = gold_label_map(_load_docs(args))
    _labels, scores = _load_predictions(args.predictions)
    theta, f1 = tune_threshold(gold, scores, step=args.step)
    print(f"threshold\t{theta:.6g}")
    print(f"f1\t{f1:.6f}")
    return 0


# ---------------------------------------------------------------- evaluate

def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = gold_label_map(_load_docs(args))
    labels, scores = _load_predictions(args.predictions)
    if args.threshold is not None:
        labels = {
            key: frozenset(l for l, s in label_scores.items() if s > args.threshold)
            for key, label_scores in scores.items()
        }
    report = evaluate(gold, labels, per_level=args.per_level)
    if args.auc:
        report.auc, _points = pr_curve_auc(gold, scores)
    print(report.render())
    return 0


# --------------------------------------------------------------- agreement

def cmd_agreement(args: argparse.Namespace) -> int:
    from .service import load_annotation_records

    tax = _load_taxonomy(args)
    records = load_annotation_records(args.store)
    consensus = consensus_sets(records, tax, min_support=args.min_support)

    if args.consensus_out:
        if not args.corpus:
            raise FinetypeError("--consensus-out needs --corpus for the documents")
        docs = load_corpus(args.corpus)
        out_docs = []
        for doc in docs:
            mentions = tuple(
                dataclasses.replace(
                    m, gold_labels=consensus.get((doc.id, m.id), frozenset())
                )
                for m in doc.mentions
            )
            out_docs.append(dataclasses.replace(doc, mentions=mentions))
        save_corpus(out_docs, args.consensus_out)

    report = annotator_agreement(records, tax, min_support=args.min_support)
    print(report.render())
    print()
    rows = disagreement_table(records, tax, min_support=args.min_support)
    print(render_disagreements(rows))
    return 0


# ------------------------------------------------------------------- serve

def cmd_serve(args: argparse.Namespace) -> int:
    from .service import run_server

    tax = _load_taxonomy(args)
    docs = load_corpus(args.corpus)
    return run_server(
        docs, tax, host=args.host, port=args.port, store_path=args.store,
    )


# ------------------------------------------------------------------ parser

def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _unit_float(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def _step_float(text: str) -> float:
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finetype",
        description="Context-sensitive fine-grained entity type tagging toolkit.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    def add(name: str, handler, help_text: str, taxonomy: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=handler)
        if taxonomy:
            p.add_argument(
                "--taxonomy", metavar="FILE", default=None,
                help="label tree file (default: the packaged tree)",
            )
        return p

    def add_side_inputs(p):
        p.add_argument("--clusters", metavar="FILE", help="token cluster map (TSV)")
        p.add_argument("--topic-model", metavar="FILE", help="trained topic model")

    p = add("taxonomy", cmd_taxonomy, "print label tree statistics")
    p.add_argument("--tree", action="store_true", help="also print the tree itself")

    p = add("prune", cmd_prune, "resolve raw types and prune noisy training labels")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--mapping", required=True, metavar="FILE")
    p.add_argument("--output", required=True, metavar="FILE")
    p.add_argument("--split", default=None, help="only documents in this split")
    p.add_argument("--sibling", action="store_true",
                   help="drop branches that contradict a sibling")
    p.add_argument("--coarse", action="store_true",
                   help="drop branches the coarse classifier rejects")
    p.add_argument("--coarse-model", metavar="FILE",
                   help="trained coarse model (required with --coarse)")
    p.add_argument("--min-count", type=int, default=None, metavar="N",
                   help="drop labels seen on fewer than N mentions of a document")
    add_side_inputs(p)

    p = add("train", cmd_train, "fit a model and write it to disk")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--output", required=True, metavar="FILE")
    p.add_argument("--split", default=None, help="only documents in this split")
    p.add_argument("--model", choices=("local", "flat", "coarse", "topic"),
                   default="local")
    p.add_argument("--negatives", choices=NEGATIVE_MODES, default=None,
                   help="negative pool for per-label classifiers (local only)")
    p.add_argument("--l2", type=_positive_float, default=1.0,
                   help="L2 regularization strength")
    add_side_inputs(p)

    p = add("predict", cmd_predict, "label mentions with a trained model")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--output", required=True, metavar="FILE")
    p.add_argument("--split", default=None, help="only documents in this split")
    p.add_argument("--inference", choices=STRATEGIES, default="marginal")
    p.add_argument("--threshold", type=_unit_float, default=0.5)
    add_side_inputs(p)

    p = add("tune-threshold", cmd_tune_threshold,
            "grid-search the decision threshold on held-out data", taxonomy=False)
    p.add_argument("--corpus", required=True, metavar="FILE", help="gold documents")
    p.add_argument("--predictions", required=True, metavar="FILE")
    p.add_argument("--split", default=None, help="only documents in this split")
    p.add_argument("--step", type=_step_float, default=0.01)

    p = add("evaluate", cmd_evaluate, "score predictions against gold labels",
            taxonomy=False)
    p.add_argument("--corpus", required=True, metavar="FILE", help="gold documents")
    p.add_argument("--predictions", required=True, metavar="FILE")
    p.add_argument("--split", default=None, help="only documents in this split")
    p.add_argument("--per-level", action="store_true",
                   help="also report each depth separately")
    p.add_argument("--auc", action="store_true",
                   help="also report area under the precision-recall curve")
    p.add_argument("--threshold", type=_unit_float, default=None,
                   help="re-decide labels from stored scores at this threshold")

    p = add("agreement", cmd_agreement,
            "consensus and disagreement reports over an annotation store")
    p.add_argument("--store", required=True, metavar="FILE")
    p.add_argument("--min-support", type=int, default=2, metavar="N")
    p.add_argument("--corpus", metavar="FILE",
                   help="documents to attach consensus labels to")
    p.add_argument("--consensus-out", metavar="FILE",
                   help="write consensus gold as a corpus file")

    p = add("serve", cmd_serve, "serve the annotation API and interface")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8710)
    p.add_argument("--store", default="annotations.jsonl", metavar="FILE",
                   help="annotation store path (FINETYPE_STORE overrides)")

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # cross-flag constraints that argparse cannot express declaratively
    if args.subcommand == "train":
        if args.negatives is not None and args.model != "local":
            parser.error("--negatives only applies to --model local")
        if args.negatives is None:
            args.negatives = "all"
    if args.subcommand == "prune":
        if args.coarse and not args.coarse_model:
            parser.error("--coarse requires --coarse-model")
        if args.min_count is not None and args.min_count < 1:
            parser.error("--min-count must be at least 1")
    if args.subcommand == "agreement" and args.min_support < 1:
        parser.error("--min-support must be at least 1")

    try:
        return args.func(args)
    except FinetypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(run())
