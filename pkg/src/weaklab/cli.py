"""Command-line driver: expand, pseudo-label, train, selftrain, predict,
evaluate, merge, and fixture generation.

Exit codes: 0 ok, 2 input error, 3 external-service error, 4 internal error.
Every command writes its outputs atomically plus a manifest recording the
effective config, seed, and input digests, so reruns are byte-reproducible
with the builtin provider.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Callable

import numpy as np

from . import __version__
from .classifier import LinearClassifier, TrainConfig, multi_hot, one_hot, train
from .corpus import CorpusError, Dataset, LabelSet, extract_ngrams, load_corpus, save_corpus
from .embedding import EmbeddingError, embed_batch, make_provider
from .ensemble import (
    EnsembleConfig,
    merge_predictions,
    prediction_from_json,
    prediction_to_json,
)
from .expansion import expand_labels, load_vocabulary_file, vocabularies_to_json
from .metrics import evaluate_multi_label, evaluate_single_label
from .pseudo import compute_epsilon, pseudo_label_corpus
from .selftrain import SelfTrainConfig, self_train, traces_to_csv
from .synthetic import make_benchmark

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SERVICE = 3
EXIT_INTERNAL = 4

DEFAULT_EMBED_URL_ENV = "WEAKLAB_EMBED_URL"


class InputError(ValueError):
    pass


def _atomic_write(path: str, content: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(content)
    os.replace(tmp, path)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path: str, config: dict, inputs: list[str]) -> None:
    manifest = {
        "version": __version__,
        "config": config,
        "inputs": {p: _digest(p) for p in sorted(inputs)},
    }
    _atomic_write(out_path + ".manifest.json", json.dumps(manifest, indent=1, sort_keys=True))


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise InputError(f"missing input file: {path}")
    return path


def _load_inputs(args) -> tuple[Dataset, LabelSet]:
    label_set = LabelSet.from_file(_require(args.labels))
    fmt = "tsv" if args.corpus.endswith(".tsv") else "jsonl"
    dataset = load_corpus(_require(args.corpus), fmt, label_set, args.mode)
    return dataset, label_set


def _provider_of(args):
    spec = args.provider or os.environ.get(DEFAULT_EMBED_URL_ENV) or "builtin"
    return make_provider(spec, seed=args.seed)


def cmd_expand(args) -> int:
    dataset, label_set = _load_inputs(args)
    provider = _provider_of(args)
    index = extract_ngrams(dataset)
    vocabs, _ = expand_labels(
        label_set, index, provider, tau=args.tau, rare_filter=not args.no_rare_filter
    )
    payload = vocabularies_to_json(vocabs, label_set, provider.name)
    _atomic_write(args.out, json.dumps(payload, indent=1, sort_keys=True))
    _write_manifest(
        args.out,
        {"command": "expand", "tau": args.tau, "seed": args.seed, "mode": args.mode},
        [args.corpus, args.labels],
    )
    return EXIT_OK


def cmd_pseudo_label(args) -> int:
    dataset, label_set = _load_inputs(args)
    vocabs, vocab_data = load_vocabulary_file(_require(args.vocab))
    index = extract_ngrams(dataset)
    epsilon = args.epsilon if args.epsilon is not None else compute_epsilon(vocabs, label_set.n)
    examples, residual = pseudo_label_corpus(dataset, index, vocabs, args.mode, epsilon=epsilon)
    lines = [
        json.dumps(
            {"id": e.document_id, "labels": sorted(e.assigned_labels), "scores": list(e.scores)}
        )
        for e in examples
    ]
    _atomic_write(args.out, "\n".join(lines) + ("\n" if lines else ""))
    residual_path = args.out + ".residual.jsonl"
    _atomic_write(residual_path, "".join(json.dumps({"id": rid}) + "\n" for rid in residual))
    _write_manifest(
        args.out,
        {
            "command": "pseudo-label",
            "epsilon": epsilon,
            "seed": args.seed,
            "mode": args.mode,
            "provider": vocab_data.get("provider", ""),
        },
        [args.corpus, args.labels, args.vocab],
    )
    return EXIT_OK


def _read_pseudo_labels(path: str) -> list[dict]:
    out = []
    with open(_require(path), encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
    return out


def cmd_train(args) -> int:
    dataset, label_set = _load_inputs(args)
    provider = _provider_of(args)
    records = _read_pseudo_labels(args.pseudo)
    if not records:
        raise InputError(f"no pseudo-labelled examples in {args.pseudo}")
    docmap = {d.id: d for d in dataset.documents}
    texts = [docmap[r["id"]].text for r in records]
    X = embed_batch(provider, texts)
    mode = "softmax" if args.mode == "single-label" else "sigmoid"
    if mode == "softmax":
        targets = one_hot(np.array([r["labels"][0] for r in records]), label_set.n)
    else:
        targets = multi_hot([set(r["labels"]) for r in records], label_set.n)
    config = TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch_size, seed=args.seed
    )
    model = train(X, targets, mode, config, provider_name=provider.name)
    model.manifest = {"command": "train", "seed": args.seed, "examples": len(records)}
    _atomic_write(args.out, json.dumps(model.to_json(), indent=1, sort_keys=True))
    _write_manifest(
        args.out,
        {"command": "train", "seed": args.seed, "lr": args.lr, "epochs": args.epochs,
         "batch_size": args.batch_size, "mode": args.mode},
        [args.corpus, args.labels, args.pseudo],
    )
    return EXIT_OK


def cmd_selftrain(args) -> int:
    dataset, _ = _load_inputs(args)
    provider = _provider_of(args)
    model = LinearClassifier.load(_require(args.model))
    X = embed_batch(provider, [d.text for d in dataset.documents])
    config = SelfTrainConfig(
        batch_size=args.batch_size,
        update_interval=args.update_interval,
        passes=args.passes,
        learning_rate=args.lr,
        seed=args.seed,
    )
    refined, traces = self_train(model, X, config)
    refined.manifest = {"command": "selftrain", "seed": args.seed, "passes": args.passes}
    _atomic_write(args.out, json.dumps(refined.to_json(), indent=1, sort_keys=True))
    _atomic_write(args.out + ".trace.csv", traces_to_csv(traces))
    _write_manifest(
        args.out,
        {"command": "selftrain", "seed": args.seed, "passes": args.passes,
         "batch_size": args.batch_size, "update_interval": args.update_interval, "lr": args.lr},
        [args.corpus, args.labels, args.model],
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    dataset, _ = _load_inputs(args)
    provider = _provider_of(args)
    model = LinearClassifier.load(_require(args.model))
    X = embed_batch(provider, [d.text for d in dataset.documents])
    probs = model.predict_proba(X)
    lines = []
    for doc, row in zip(dataset.documents, probs):
        if model.mode == "softmax":
            labels = [int(np.argmax(row))]
        else:
            labels = sorted(int(i) for i in np.nonzero(row > args.threshold)[0])
        lines.append(
            json.dumps({"id": doc.id, "labels": labels, "probs": [float(p) for p in row]})
        )
    _atomic_write(args.out, "\n".join(lines) + "\n")
    _write_manifest(
        args.out,
        {"command": "predict", "seed": args.seed, "threshold": args.threshold},
        [args.corpus, args.labels, args.model],
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset, label_set = _load_inputs(args)
    records = _read_pseudo_labels(args.predictions)
    pred_map = {r["id"]: r["labels"] for r in records}
    gold_docs = [d for d in dataset.documents if d.gold_labels is not None]
    missing = [d.id for d in gold_docs if d.id not in pred_map]
    if missing:
        raise InputError(f"predictions missing for {len(missing)} documents (e.g. {missing[0]!r})")
    if args.mode == "single-label":
        pred = [pred_map[d.id][0] for d in gold_docs]
        gold = [next(iter(d.gold_labels)) for d in gold_docs]
        report = evaluate_single_label(pred, gold, label_set.n)
    else:
        pred_sets = [frozenset(pred_map[d.id]) for d in gold_docs]
        gold_sets = [d.gold_labels for d in gold_docs]
        report = evaluate_multi_label(pred_sets, gold_sets, label_set.n)
    _atomic_write(args.out, json.dumps(report.to_json(), indent=1, sort_keys=True))
    _atomic_write(args.out + ".txt", report.to_text())
    _write_manifest(
        args.out,
        {"command": "evaluate", "mode": args.mode},
        [args.corpus, args.labels, args.predictions],
    )
    return EXIT_OK


def cmd_merge(args) -> int:
    config = EnsembleConfig(
        info_strategy=args.strategy_it,
        priority_strategy=args.strategy_pri,
        combine_lambda=args.combine_lambda,
    )
    per_file = []
    for path in args.predictions:
        preds = [prediction_from_json(r) for r in _read_pseudo_labels(path)]
        per_file.append({p.document_id: p for p in preds})
    ids = list(per_file[0])
    for other in per_file[1:]:
        if set(other) != set(ids):
            raise InputError("prediction files cover different document ids")
    grouped = [[pf[doc_id] for pf in per_file] for doc_id in ids]
    merged = merge_predictions(grouped, config)
    _atomic_write(args.out, "\n".join(json.dumps(prediction_to_json(p)) for p in merged) + "\n")
    _write_manifest(
        args.out,
        {"command": "merge", "strategy_it": args.strategy_it,
         "strategy_pri": args.strategy_pri, "lambda": args.combine_lambda},
        list(args.predictions),
    )
    return EXIT_OK


def cmd_fixture(args) -> int:
    corpus, test = make_benchmark(args.seed)
    os.makedirs(args.out, exist_ok=True)
    save_corpus(corpus, os.path.join(args.out, "corpus.jsonl"))
    save_corpus(test, os.path.join(args.out, "test.jsonl"))
    labels_path = os.path.join(args.out, "labels.json")
    _atomic_write(labels_path, json.dumps({"labels": list(corpus.label_set.names)}, indent=1))
    return EXIT_OK


def _common_flags(p: argparse.ArgumentParser, corpus: bool = True) -> None:
    if corpus:
        p.add_argument("--corpus", required=True, help="JSONL or TSV corpus path")
        p.add_argument("--labels", required=True, help="label set JSON path")
        p.add_argument("--mode", default="single-label",
                       choices=["single-label", "multi-label"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--provider", default=None,
                   help="'builtin' or sidecar base URL (default: $WEAKLAB_EMBED_URL or builtin)")
    p.add_argument("--out", required=True, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weaklab")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="expand label names into vocabularies")
    _common_flags(p)
    p.add_argument("--tau", type=float, default=0.7)
    p.add_argument("--no-rare-filter", action="store_true")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("pseudo-label", help="assign pseudo-labels by vocabulary matching")
    _common_flags(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_pseudo_label)

    p = sub.add_parser("train", help="train the classifier on pseudo-labels")
    _common_flags(p)
    p.add_argument("--pseudo", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("selftrain", help="refine a model by soft-label self-training")
    _common_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--update-interval", type=int, default=50)
    p.add_argument("--passes", type=int, default=1)
    p.set_defaults(func=cmd_selftrain)

    p = sub.add_parser("predict", help="predict labels for a corpus")
    _common_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    _common_flags(p)
    p.add_argument("--predictions", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("merge", help="merge triage predictions from several predictors")
    p.add_argument("predictions", nargs="+", help="prediction JSONL files")
    p.add_argument("--strategy-it", default="union", choices=["union", "intersection"])
    p.add_argument("--strategy-pri", default="highest",
                   choices=["highest", "average", "lowest"])
    p.add_argument("--lambda", dest="combine_lambda", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("fixture", help="generate the synthetic benchmark corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CorpusError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmbeddingError as exc:
        print(f"embedding service error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
