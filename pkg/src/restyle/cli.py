"""Command-line surface.

Subcommands: gen-corpus, build-data, train, transfer, eval, distill,
experiment, bridge-check. Exit codes: 0 success, 1 usage error, 2 data
error, 3 backend/bridge error. RESTYLE_CONFIG names the default experiment
config path.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys

from .backends import (
    BackendError,
    BridgeBackend,
    BridgeError,
    GenMode,
    GenOptions,
    NeuralHyper,
    backend_train,
)
from .classifier import train_classifier
from .embedder import fit_embedder
from .experiment import ExperimentConfig, run_experiment
from .metrics import (
    EvalRecord,
    GMode,
    SemanticMode,
    evaluate,
    read_test_set,
    train_lm,
)
from .noising import MaskMode, MaskSpec, NoisingError
from .persist import load_model, save_model
from .pipeline import (
    Fallback,
    SelectionPolicy,
    TransferRequest,
    build_denoising_data,
    build_student_data,
    transfer,
    write_student_jsonl,
)
from .rng import mix
from .textcore import (
    DataError,
    build_vocab,
    detokenize,
    make_label_set,
    read_jsonl_corpus,
    tokenize,
)
from .toydata import ToyCorpusSpec, default_spec, gen_toy_corpus, write_jsonl

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _mask_args(parser):
    parser.add_argument("--ratio", type=float, default=0.4)
    parser.add_argument("--span-mean", type=float, default=3.0)
    parser.add_argument("--mode", choices=["hard", "soft"], default="hard")
    parser.add_argument("--blend", type=float, default=0.5)


def _mask_from(args) -> MaskSpec:
    return MaskSpec(
        ratio=args.ratio, span_mean=args.span_mean, mode=MaskMode(args.mode), blend=args.blend
    )


def _policy_args(parser):
    parser.add_argument("--threshold", type=float, default=0.5)
    parser.add_argument("--fallback", choices=["best_prob", "copy_source"], default="best_prob")
    parser.add_argument("--similarity-floor", type=float, default=None)


def _policy_from(args) -> SelectionPolicy:
    return SelectionPolicy(
        threshold=args.threshold,
        fallback=Fallback(args.fallback),
        similarity_floor=args.similarity_floor,
    )


def _load_corpus(path, label_names):
    labels = make_label_set(label_names)
    return labels, read_jsonl_corpus(path, labels)


def cmd_gen_corpus(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as handle:
            spec = ToyCorpusSpec.from_json(json.load(handle))
    else:
        spec = default_spec(seed=args.seed)
    train, test = gen_toy_corpus(spec, n_test_per_label=args.test_per_label)
    write_jsonl(train, args.train)
    write_jsonl(test, args.test)
    print(f"wrote {len(train)} train lines to {args.train}, {len(test)} test lines to {args.test}")
    return EXIT_OK


def cmd_build_data(args) -> int:
    labels, corpus = _load_corpus(args.corpus, args.labels)
    clf = train_classifier(corpus, labels)
    pairs = build_denoising_data(
        corpus, clf, _mask_from(args), args.variants, args.seed, use_gold_labels=args.gold
    )
    with open(args.out, "w", encoding="utf-8") as handle:
        for pair in pairs:
            masked = sorted(pair.variant.masked_positions)
            handle.write(
                json.dumps(
                    {
                        "control": pair.control.name,
                        "source": detokenize(pair.source),
                        "masked_positions": masked,
                        "mode": pair.variant.kind.value,
                        "blend": args.blend if pair.variant.kind is MaskMode.SOFT else None,
                    }
                )
                + "\n"
            )
    print(f"wrote {len(pairs)} training pairs to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    labels, corpus = _load_corpus(args.corpus, args.labels)
    if args.component == "classifier":
        save_model(train_classifier(corpus, labels, alpha=args.alpha), args.out)
    elif args.component == "embedder":
        save_model(fit_embedder(corpus), args.out)
    elif args.component == "lm":
        save_model(train_lm(corpus, add_k=args.add_k), args.out)
    else:  # backend
        clf = train_classifier(corpus, labels)
        vocab = build_vocab(corpus, labels)
        pairs = build_denoising_data(
            corpus, clf, _mask_from(args), args.variants, args.seed, use_gold_labels=args.gold
        )
        hyper = NeuralHyper(dim=args.dim, window=args.window, lr=args.lr, epochs=args.epochs)
        save_model(backend_train(args.kind, pairs, vocab, hyper, args.seed), args.out)
    print(f"saved {args.component} to {args.out}")
    return EXIT_OK


def _transfer_one(model, clf, index, labels_by_name, source_text, target_name, args):
    req = TransferRequest(
        source=tokenize(source_text),
        target_label=labels_by_name[target_name],
        k=args.k,
        mask=_mask_from(args),
        gen=GenOptions(
            n=1,
            temperature=args.temperature,
            mode=GenMode(args.gen_mode),
            seed=args.seed,
            max_len=args.max_len,
        ),
        policy=_policy_from(args),
    )
    return transfer(model, clf, index, req)


def cmd_transfer(args) -> int:
    model = load_model(args.model)
    clf = load_model(args.classifier)
    index = load_model(args.embedder)
    by_name = {lab.name: lab for lab in clf.labels}
    if args.target not in by_name:
        raise DataError(f"unknown target label: {args.target!r}")
    if args.input is not None:
        result = _transfer_one(model, clf, index, by_name, args.input, args.target, args)
        print(detokenize(result.output))
        return EXIT_OK
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        with open(args.batch, "r", encoding="utf-8") as handle:
            for item_index, line in enumerate(handle):
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                target = obj.get("target_label", args.target)
                item_args = argparse.Namespace(**vars(args))
                item_args.seed = mix(args.seed, item_index)
                result = _transfer_one(
                    model, clf, index, by_name, obj["source"], target, item_args
                )
                chosen = result.chosen_index
                out.write(
                    json.dumps(
                        {
                            "source": obj["source"],
                            "output": detokenize(result.output),
                            "target_label": target,
                            "target_prob": None
                            if chosen is None
                            else result.candidates[chosen][1],
                            "similarity": None
                            if chosen is None
                            else result.candidates[chosen][2],
                        }
                    )
                    + "\n"
                )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_eval(args) -> int:
    clf = load_model(args.classifier)
    index = load_model(args.embedder)
    lm = load_model(args.lm)
    test = read_test_set(args.test, clf.labels)
    outputs = []
    with open(args.outputs, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                outputs.append(json.loads(line))
    if len(outputs) != len(test):
        raise DataError(f"{len(outputs)} outputs for {len(test)} test items")
    records = [
        EvalRecord(
            source=source,
            output=tokenize(obj["output"]),
            reference=reference,
            target_label=target,
        )
        for (source, reference, target), obj in zip(test, outputs)
    ]
    report = evaluate(
        records, clf, index, lm, GMode(args.g_mode), SemanticMode(args.semantic_mode)
    )
    with open(args.report, "w", encoding="utf-8") as handle:
        json.dump(report.to_json(), handle, indent=2)
    report.write_csv(args.report_csv)
    print(
        f"accuracy={report.accuracy:.4f} semantic={report.semantic:.4f} "
        f"g={report.g:.4f} s_bleu={report.s_bleu:.2f} fluency={report.fluency:.2f}"
    )
    return EXIT_OK


def cmd_distill(args) -> int:
    labels, corpus = _load_corpus(args.corpus, args.labels)
    model = load_model(args.model)
    clf = load_model(args.classifier)
    index = load_model(args.embedder)
    pairs = build_student_data(
        model,
        clf,
        index,
        corpus,
        _mask_from(args),
        GenOptions(temperature=args.temperature, seed=args.seed),
        policy=_policy_from(args),
        k=args.k,
        seed=args.seed,
    )
    write_student_jsonl(pairs, args.pairs_out)
    if args.student_out:
        from .pipeline import student_pairs_to_training

        vocab = build_vocab(corpus, labels)
        hyper = NeuralHyper(dim=args.dim, window=args.window, lr=args.lr, epochs=args.epochs)
        from .backends import train_neural

        student = train_neural(student_pairs_to_training(pairs), vocab, hyper, args.seed)
        save_model(student, args.student_out)
        print(f"wrote {len(pairs)} teacher pairs; student saved to {args.student_out}")
    else:
        print(f"wrote {len(pairs)} teacher pairs to {args.pairs_out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    path = args.config or os.environ.get("RESTYLE_CONFIG")
    if not path:
        print("error: no config given and RESTYLE_CONFIG unset", file=sys.stderr)
        return EXIT_USAGE
    with open(path, "r", encoding="utf-8") as handle:
        config = ExperimentConfig.from_json(json.load(handle))
    if args.workers is not None:
        from dataclasses import replace

        config = replace(config, workers=args.workers)
    results = run_experiment(config)
    print(f"results written to {results}")
    return EXIT_OK


def cmd_bridge_check(args) -> int:
    from .bridge_check import run_bridge_check

    failures = run_bridge_check(shlex.split(args.cmd), timeout=args.timeout)
    return EXIT_OK if failures == 0 else EXIT_BACKEND


def build_parser() -> _Parser:
    parser = _Parser(prog="restyle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a synthetic slot-template corpus")
    p.add_argument("--spec", help="JSON ToyCorpusSpec; omit for the built-in default")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-per-label", type=int, default=25)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("build-data", help="write controlled-denoising training pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--variants", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gold", action="store_true", help="use gold labels for controls")
    _mask_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_data)

    p = sub.add_parser("train", help="train a component and save it")
    p.add_argument("component", choices=["classifier", "embedder", "lm", "backend"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--add-k", type=float, default=0.1)
    p.add_argument("--kind", choices=["count", "neural"], default="count")
    p.add_argument("--variants", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gold", action="store_true")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5)
    _mask_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("transfer", help="rewrite one input or a JSONL batch")
    p.add_argument("--model", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--embedder", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--input")
    group.add_argument("--batch")
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--gen-mode", choices=["greedy", "sample"], default="sample")
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    _mask_args(p)
    _policy_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("eval", help="score outputs against a test set")
    p.add_argument("--classifier", required=True)
    p.add_argument("--embedder", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--outputs", required=True)
    p.add_argument("--g-mode", choices=["corpus", "per_example"], default="corpus")
    p.add_argument(
        "--semantic-mode", choices=["vs_reference", "vs_source"], default="vs_reference"
    )
    p.add_argument("--report", required=True)
    p.add_argument("--report-csv", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distill", help="build teacher outputs and train a student")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--embedder", required=True)
    p.add_argument("--k", type=int, default=32)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5)
    _mask_args(p)
    _policy_args(p)
    p.add_argument("--pairs-out", required=True)
    p.add_argument("--student-out")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("experiment", help="run a full experiment from a JSON config")
    p.add_argument("--config", help="defaults to $RESTYLE_CONFIG")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bridge-check", help="protocol conformance of an external backend")
    p.add_argument("--cmd", required=True, help="command line that starts the backend")
    p.add_argument("--timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_bridge_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (DataError, NoisingError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BridgeError,) as exc:
        print(f"bridge error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    raise SystemExit(main())
