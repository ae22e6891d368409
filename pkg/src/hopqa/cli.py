"""Operator command line: one subcommand per pipeline stage.

Configuration precedence everywhere: flags beat HOPQA_* environment
variables, which beat the JSON config file. Exit codes: 0 success, 1 stage
failure (with a diagnostic on stderr), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .checkpoint import entity_fingerprint, load_checkpoint, load_encoder, save_checkpoint, save_classifier, save_encoder
from .errors import ConfigError, DataError, HopQAError
from .kg import load_kg, split_triples
from .kge import TrainConfig, train_kge
from .pipeline import PipelineConfig, load_config, load_pipeline, require_paths
from .qa import QATrainConfig, answer_question, evaluate_qa, train_qa
from .qagen import generate_qa, parse_templates, read_qa, split_qa, write_qa
from .questions import ClassifierConfig, TokenVocabulary, accuracy, train_classifier
from .ranking import evaluate_link_prediction
from .synth import write_synthetic_dataset


def _ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"ratios must be three comma-separated numbers, got {text!r}")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"ratios must be numeric, got {text!r}") from None
    return (a, b, c)


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict[str, object] = {}
    for key in ("triples", "nodes", "synonyms", "kge", "classifier", "top_k", "host", "port"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    encoders = {
        hop: value
        for hop in (1, 2, 3)
        if (value := getattr(args, f"encoder_{hop}", None)) is not None
    }
    if encoders:
        overrides["encoders"] = encoders
    return load_config(getattr(args, "config", None), overrides=overrides)


def _load_graph(cfg: PipelineConfig):
    require_paths(cfg, "triples")
    return load_kg(cfg.triples, cfg.nodes)


def cmd_synth(args) -> int:
    paths = write_synthetic_dataset(args.out, args.entities)
    for name in ("triples", "nodes", "templates"):
        print(f"{name}: {paths[name]}")
    return 0


def cmd_ingest(args) -> int:
    kg = _load_graph(_config_from_args(args))
    print(kg.summary)
    return 0


def cmd_train_kge(args) -> int:
    cfg = _config_from_args(args)
    kg = _load_graph(cfg)
    train, valid, test = split_triples(kg, _ratios(args.ratios), args.seed)
    train_config = TrainConfig(
        d=args.d,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        negatives_per_positive=args.negatives,
        l2_weight=args.l2,
        patience=args.patience,
        eval_every=args.eval_every,
        seed=args.seed,
    )
    model = train_kge(train, valid, kg, train_config)
    save_checkpoint(model, kg, args.out)
    print(f"saved {args.out}")
    report = evaluate_link_prediction(model, sorted(test), kg.triples)
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
    return 0


def cmd_eval_kge(args) -> int:
    cfg = _config_from_args(args)
    require_paths(cfg, "triples", "kge")
    kg = load_kg(cfg.triples, cfg.nodes)
    model = load_checkpoint(cfg.kge, kg)
    _, _, test = split_triples(kg, _ratios(args.ratios), args.seed)
    report = evaluate_link_prediction(model, sorted(test), kg.triples, ks=(1, 3, 10))
    if args.json:
        print(report.to_json())
    else:
        print(report.to_text())
    return 0


def cmd_gen_qa(args) -> int:
    cfg = _config_from_args(args)
    kg = _load_graph(cfg)
    templates = parse_templates(args.templates, kg)
    examples = generate_qa(kg, templates, max_per_template=args.max_per_template, seed=args.seed)
    write_qa(examples, kg, args.out)
    print(f"wrote {len(examples)} questions to {args.out}")
    if args.split:
        stem = args.out[:-4] if args.out.endswith(".tsv") else args.out
        parts = split_qa(examples, _ratios(args.ratios), args.seed)
        for name, part in zip(("train", "valid", "test"), parts):
            path = f"{stem}-{name}.tsv"
            write_qa(part, kg, path)
            print(f"wrote {len(part)} questions to {path}")
    return 0


def cmd_train_classifier(args) -> int:
    cfg = _config_from_args(args)
    kg = _load_graph(cfg)
    train_examples = read_qa(args.qa, kg)
    vocab = TokenVocabulary.build(ex.question for ex in train_examples)
    data = [(vocab.encode_text(ex.question), ex.hops) for ex in train_examples]
    valid_data = None
    if args.valid:
        valid_data = [
            (vocab.encode_text(ex.question), ex.hops) for ex in read_qa(args.valid, kg)
        ]
    clf = train_classifier(
        data,
        ClassifierConfig(
            m=args.m,
            epochs=args.epochs,
            batch_size=args.batch_size,
            learning_rate=args.lr,
            weight_decay=args.weight_decay,
            seed=args.seed,
        ),
        valid=valid_data,
        vocab=vocab,
    )
    save_classifier(clf, args.out)
    print(f"saved {args.out}")
    if valid_data:
        print(f"validation accuracy: {accuracy(clf, valid_data):.4f}")
    return 0


def cmd_train_qa(args) -> int:
    cfg = _config_from_args(args)
    require_paths(cfg, "triples", "kge")
    kg = load_kg(cfg.triples, cfg.nodes)
    model = load_checkpoint(cfg.kge, kg)
    all_train = read_qa(args.qa, kg)
    vocab = TokenVocabulary.build(ex.question for ex in all_train)
    train_examples = [ex for ex in all_train if ex.hops == args.hops]
    if not train_examples:
        raise DataError(f"no {args.hops}-hop examples in {args.qa}")
    valid_examples = []
    if args.valid:
        valid_examples = [ex for ex in read_qa(args.valid, kg) if ex.hops == args.hops]
    qa_config = QATrainConfig(
        m=args.m,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        label_smoothing=args.label_smoothing,
        patience=args.patience,
        eval_every=args.eval_every,
        seed=args.seed,
    )
    encoder = train_qa(model, train_examples, valid_examples, qa_config, vocab)
    save_encoder(encoder, entity_fingerprint(kg), args.out)
    print(f"saved {args.out}")
    if valid_examples:
        print(f"validation hits@10: {evaluate_qa(model, encoder, valid_examples):.4f}")
    return 0


def cmd_eval_qa(args) -> int:
    cfg = _config_from_args(args)
    require_paths(cfg, "triples", "kge")
    kg = load_kg(cfg.triples, cfg.nodes)
    model = load_checkpoint(cfg.kge, kg)
    examples = read_qa(args.qa, kg)
    rows = []
    for hop in (1, 2, 3):
        subset = [ex for ex in examples if ex.hops == hop]
        if not subset:
            continue
        if hop not in cfg.encoders:
            raise ConfigError(f"no encoder configured for {hop}-hop questions")
        encoder, _ = load_encoder(cfg.encoders[hop], kg)
        rows.append((hop, len(subset), evaluate_qa(model, encoder, subset, k=args.k)))
    if args.json:
        payload = {
            str(hop): {"questions": n, f"hits@{args.k}": hits} for hop, n, hits in rows
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"{'hops':>4}  {'questions':>9}  hits@{args.k}")
        for hop, n, hits in rows:
            print(f"{hop:>4}  {n:>9}  {hits:.4f}")
    return 0


def cmd_ask(args) -> int:
    pipeline = load_pipeline(_config_from_args(args))
    result = answer_question(pipeline, args.question, top_k=args.top_k)
    print(f"head: {result.head_name} ({result.head_id})  span {result.span[0]}:{result.span[1]}")
    probs = "  ".join(f"p{i}={p:.3f}" for i, p in enumerate(result.hop_probs, start=1))
    print(f"hops: {result.hops}  ({probs})")
    print(f"{'rank':>4}  {'score':>10}  answer")
    for rank, answer in enumerate(result.answers, start=1):
        kind = f" [{answer.kind}]" if answer.kind else ""
        print(f"{rank:>4}  {answer.score:>10.4f}  {answer.name} ({answer.entity_id}){kind}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _config_from_args(args)
    pipeline = load_pipeline(cfg)
    uvicorn.run(create_app(pipeline), host=cfg.host, port=cfg.port, log_level="info")
    return 0


def _add_config_flags(p: argparse.ArgumentParser, *names: str):
    p.add_argument("--config", metavar="FILE", help="JSON config file (default: $HOPQA_CONFIG)")
    flags = {
        "triples": "triples TSV",
        "nodes": "nodes TSV",
        "synonyms": "extra synonyms TSV",
        "kge": "embedding checkpoint",
        "classifier": "hop classifier checkpoint",
    }
    for name in names:
        if name == "encoders":
            for hop in (1, 2, 3):
                p.add_argument(f"--encoder-{hop}", metavar="FILE",
                               help=f"{hop}-hop question encoder checkpoint")
        else:
            p.add_argument(f"--{name}", metavar="FILE", help=flags[name])


def _add_seed(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopqa",
        description="Multi-hop question answering over a knowledge graph.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="write a synthetic benchmark graph and templates")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--entities", type=int, default=200)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="load a graph and print its summary")
    _add_config_flags(p, "triples", "nodes")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-kge", help="train entity/relation embeddings")
    _add_config_flags(p, "triples", "nodes")
    p.add_argument("--out", required=True, metavar="FILE", help="checkpoint to write")
    p.add_argument("--d", type=int, default=64, help="embedding dimension")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--negatives", type=int, default=8, help="negatives per positive")
    p.add_argument("--l2", type=float, default=0.05, help="weight decay strength")
    p.add_argument("--patience", type=int, default=20, help="stagnant evaluations before stopping")
    p.add_argument("--eval-every", type=int, default=1, help="epochs between validations")
    p.add_argument("--ratios", default="0.8,0.1,0.1", help="train,valid,test split")
    p.add_argument("--json", action="store_true", help="machine-readable test metrics")
    _add_seed(p)
    p.set_defaults(func=cmd_train_kge)

    p = sub.add_parser("eval-kge", help="filtered ranking metrics on the test split")
    _add_config_flags(p, "triples", "nodes", "kge")
    p.add_argument("--ratios", default="0.8,0.1,0.1", help="split used at training time")
    p.add_argument("--json", action="store_true")
    _add_seed(p)
    p.set_defaults(func=cmd_eval_kge)

    p = sub.add_parser("gen-qa", help="generate questions from templates")
    _add_config_flags(p, "triples", "nodes")
    p.add_argument("--templates", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE", help="QA TSV to write")
    p.add_argument("--max-per-template", type=int, default=None)
    p.add_argument("--split", action="store_true",
                   help="also write grouped -train/-valid/-test files")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    _add_seed(p)
    p.set_defaults(func=cmd_gen_qa)

    p = sub.add_parser("train-classifier", help="train the hop-count classifier")
    _add_config_flags(p, "triples", "nodes")
    p.add_argument("--qa", required=True, metavar="FILE", help="training questions TSV")
    p.add_argument("--valid", metavar="FILE", help="validation questions TSV")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--m", type=int, default=128, help="token embedding width")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    _add_seed(p)
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("train-qa", help="train one hop class's question encoder")
    _add_config_flags(p, "triples", "nodes", "kge")
    p.add_argument("--hops", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--qa", required=True, metavar="FILE", help="training questions TSV")
    p.add_argument("--valid", metavar="FILE", help="validation questions TSV")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--m", type=int, default=128, help="token embedding width")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--weight-decay", type=float, default=1e-5)
    p.add_argument("--label-smoothing", type=float, default=0.1)
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--eval-every", type=int, default=1)
    _add_seed(p)
    p.set_defaults(func=cmd_train_qa)

    p = sub.add_parser("eval-qa", help="per-hop hits@k on a questions file")
    _add_config_flags(p, "triples", "nodes", "kge", "encoders")
    p.add_argument("--qa", required=True, metavar="FILE")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval_qa)

    p = sub.add_parser("ask", help="answer one question from the command line")
    _add_config_flags(p, "triples", "nodes", "synonyms", "kge", "classifier", "encoders")
    p.add_argument("--question", required=True)
    p.add_argument("--top-k", type=int, default=None, help="answers to show")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_config_flags(p, "triples", "nodes", "synonyms", "kge", "classifier", "encoders")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--top-k", type=int, dest="top_k", help="default answers per request")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except HopQAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
