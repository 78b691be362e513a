"""Command-line entry point.

Exit codes: 0 on success, 1 on bad input, 2 when a verification fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    InstanceSpec,
    jaccard_experiment,
    sweep_oracle,
    sweep_prop1,
    sweep_prop2,
    synthetic_corpus,
)
from .engine import DEFAULT_EPSILON, enumerate_anchors, evaluate, select
from .errors import AnchorsError, HypothesisViolated
from .models import LinearModel, TrainConfig, read_labeled_corpus, train_logistic
from .perturbation import PerturbationSampler
from .precision import (
    ApproxPrecision,
    EmpiricalPrecision,
    ExactPrecision,
    besseen_bound,
    coverage,
)
from .text import Anchor, local_stats, read_corpus, to_positional, tokenize
from .vectorizer import TfIdfVectorizer, fit_idf


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# Settings that cannot change any reported value stay out of the echoed config,
# so serial and parallel runs produce byte-identical files.
_NOT_ECHOED = {"func", "jobs", "out", "json", "csv"}


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _header(args: argparse.Namespace) -> str:
    return "# config: " + json.dumps(_config(args), sort_keys=True) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_vectorizer(path: str) -> TfIdfVectorizer:
    try:
        return TfIdfVectorizer.load(path)
    except FileNotFoundError:
        raise InputError(f"--vectorizer: file not found: {path}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"--vectorizer: cannot parse {path}: {exc}")


def _load_model(path: str, vectorizer: TfIdfVectorizer) -> LinearModel:
    try:
        return LinearModel.load(path, vectorizer)
    except FileNotFoundError:
        raise InputError(f"--model: file not found: {path}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"--model: cannot parse {path}: {exc}")


def _read(flag: str, reader, path: str):
    try:
        return reader(path)
    except FileNotFoundError:
        raise InputError(f"{flag}: file not found: {path}")
    except (AnchorsError, ValueError) as exc:
        raise InputError(f"{flag}: {exc}")


# -- commands -------------------------------------------------------------------


def cmd_fit_vectorizer(args) -> int:
    docs = _read("--corpus", read_corpus, args.corpus)
    vec = fit_idf(docs)
    vec.save(args.out)
    print(f"vocabulary of {vec.dim} words fitted on {vec.corpus_size} documents -> {args.out}")
    return 0


def cmd_train(args) -> int:
    docs, labels = _read("--corpus", read_labeled_corpus, args.corpus)
    vec = _load_vectorizer(args.vectorizer)
    config = TrainConfig(args.lr, args.iterations, args.l2)
    model = train_logistic(docs, labels, vec, config)
    model.save(args.out)
    accuracy = sum(model.predict(d) == y for d, y in zip(docs, labels)) / len(docs)
    print(f"training accuracy {accuracy:.4f} -> {args.out}")
    return 0


def _evaluator(args, model, doc, stats):
    if args.eval == "exact":
        return ExactPrecision(model, stats)
    if args.eval == "approx":
        return ApproxPrecision(model, stats)
    return EmpiricalPrecision(model, doc, stats, args.n, args.seed)


def cmd_explain(args) -> int:
    vec = _load_vectorizer(args.vectorizer)
    model = _load_model(args.model, vec)
    corpus = _read("--corpus", read_corpus, args.corpus) if args.corpus else None
    try:
        doc = tokenize(args.doc)
    except AnchorsError as exc:
        raise InputError(f"--doc: {exc}")
    stats = local_stats(doc)
    anchors = enumerate_anchors(stats)
    p = _evaluator(args, model, doc, stats)
    values = evaluate(p, anchors, args.jobs)
    result = select(p, anchors, args.epsilon, tie=args.tie, seed=args.seed, values=values)

    label = model.predict(doc)
    chosen = result.chosen
    anchor_tokens = [doc.tokens[k] for k in to_positional(chosen, doc, stats).positions]
    words = sorted(chosen.words(stats), key=stats.words.index)
    cov = coverage(chosen.requirement(stats), corpus) if corpus else None
    try:
        bound = besseen_bound(model, stats)
    except HypothesisViolated:
        bound = None

    lines = [
        _header(args),
        f"document: {doc.text()}\n",
        f"prediction: {label} (score {model.score(doc)!r})\n",
        f"anchor: {' '.join(anchor_tokens)}\n",
        f"words: {{{', '.join(words)}}}\n",
        f"length: {chosen.length}\n",
        f"precision ({args.eval}): {result.p_value!r}\n",
    ]
    if cov is not None:
        lines.append(f"coverage: {cov!r}\n")
    if result.fallback:
        lines.append(f"warning: no anchor reaches precision {1 - args.epsilon!r}; best available returned\n")
    payload = {
        "config": _config(args),
        "prediction": label,
        "anchor_words": words,
        "coverage": cov,
        "result": result.to_dict(),
    }
    report = "".join(lines)
    as_json = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.json:
        Path(args.json).write_text(as_json, encoding="utf-8")
        sys.stdout.write(report)
    else:
        sys.stdout.write(report + "\n" + as_json)
    if args.csv:
        rows = []
        for anchor, value in zip(anchors, values):
            stderr = (value * (1.0 - value) / args.n) ** 0.5 if args.eval == "empirical" else 0.0
            rows.append([" ".join(map(str, anchor.counts)), anchor.length, repr(value), repr(stderr), "" if bound is None else repr(bound)])
        Path(args.csv).write_text(_header(args) + _csv(["anchor", "length", "value", "stderr", "bound"], rows), encoding="utf-8")
    return 0


def _instance_spec(args, target: str) -> InstanceSpec:
    return InstanceSpec(
        d_range=(args.d_min, args.d_max),
        m_range=(args.m_min, args.m_max),
        target=target,
        idf=args.idf,
        seed=args.seed,
    )


def cmd_verify(args) -> int:
    if args.which == "prop1":
        rows = sweep_prop1(_instance_spec(args, "prop1"), args.trials, args.jobs)
        table = _csv(
            ["instance", "anchor", "length", "lhs", "rhs", "holds"],
            [[r.instance, " ".join(map(str, r.anchor)), r.length, repr(r.lhs), repr(r.rhs), r.holds] for r in rows],
        )
        failed = sorted({r.instance for r in rows if not r.holds})
        summary = f"{args.trials - len(failed)}/{args.trials} hold ({len(rows)} anchors checked)"
    elif args.which == "prop2":
        rows = sweep_prop2(_instance_spec(args, "prop2"), args.trials, args.epsilon, args.jobs)
        table = _csv(
            ["instance", "d", "multiplicities", "chosen", "prefix_valid", "in_A_plus", "j0"],
            [
                [r.instance, r.d, " ".join(map(str, r.multiplicities)), " ".join(map(str, r.chosen)), r.prefix_valid, r.in_A_plus, "" if r.j0 is None else r.j0]
                for r in rows
            ],
        )
        failed = [r.instance for r in rows if not (r.prefix_valid and r.in_A_plus)]
        summary = f"{args.trials - len(failed)}/{args.trials} prefix-structured in A+"
    else:
        rows = sweep_oracle(_instance_spec(args, "oracle"), args.trials, args.n, 4.0, args.jobs)
        table = _csv(
            ["instance", "anchor", "exact", "empirical", "stderr", "agree"],
            [[r.instance, " ".join(map(str, r.anchor)), repr(r.exact), repr(r.empirical), repr(r.stderr), r.agree] for r in rows],
        )
        failed = sorted({r.instance for r in rows if not r.agree})
        summary = f"{args.trials - len(failed)}/{args.trials} agree within 4 stderr ({len(rows)} anchors checked)"
    _emit(args.out, _header(args) + table)
    verdict = "PASS" if not failed else "FAIL"
    print(f"{verdict} verify {args.which}: {summary}", file=sys.stderr if not args.out else sys.stdout)
    return 0 if not failed else 2


def cmd_benchmark(args) -> int:
    docs = _read("--corpus", read_corpus, args.corpus)
    if args.model or args.vectorizer:
        if not (args.model and args.vectorizer):
            raise InputError("--model and --vectorizer must be given together")
        model = _load_model(args.model, _load_vectorizer(args.vectorizer))
    else:
        if not args.labels:
            raise InputError("--labels is required when no --model is given")
        labels = _read("--labels", _read_labels, args.labels)
        if len(labels) != len(docs):
            raise InputError(f"--labels: {len(labels)} labels for {len(docs)} documents")
        model = train_logistic(docs, labels, fit_idf(docs))
    buckets = jaccard_experiment(
        docs,
        model,
        thresholds=tuple(args.thresholds),
        repetitions=args.reps,
        evaluator=args.eval,
        n=args.n,
        epsilon=args.epsilon,
        seed=args.seed,
        jobs=args.jobs,
    )
    table = _csv(
        ["bucket", "documents", "runs", "mean", "sd"],
        [[b.label, b.documents, b.runs, repr(b.mean), repr(b.sd)] for b in buckets],
    )
    _emit(args.out, _header(args) + table)
    for b in buckets:
        print(f"{b.label}: {b.mean:.2f} +/- {b.sd:.2f} ({b.documents} documents)", file=sys.stderr if not args.out else sys.stdout)
    return 0


def _read_labels(path: str) -> list[int]:
    labels = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip() not in ("0", "1"):
            raise ValueError(f"line {lineno}: label must be 0 or 1")
        labels.append(int(line))
    return labels


def cmd_synth(args) -> int:
    docs, labels = synthetic_corpus(args.docs, args.seed, args.positive_rate)
    Path(args.out_corpus).write_text("".join(d.text() + "\n" for d in docs), encoding="utf-8")
    if args.out_labels:
        Path(args.out_labels).write_text("".join(f"{y}\n" for y in labels), encoding="utf-8")
    if args.out_labeled:
        Path(args.out_labeled).write_text("".join(f"{y}\t{d.text()}\n" for d, y in zip(docs, labels)), encoding="utf-8")
    print(f"{len(docs)} documents -> {args.out_corpus}")
    return 0


def cmd_sample(args) -> int:
    try:
        doc = tokenize(args.doc)
    except AnchorsError as exc:
        raise InputError(f"--doc: {exc}")
    anchor = Anchor(tuple(args.anchor)) if args.anchor else None
    try:
        sampler = PerturbationSampler(doc, anchor, args.seed)
    except AnchorsError as exc:
        raise InputError(f"--anchor: {exc}")
    _emit(args.out, "".join(d.text() + "\n" for d in sampler.sample(args.n)))
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="textanchors", description="Exhaustive anchors for linear TF-IDF text classifiers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit-vectorizer", help="fit TF-IDF weights on a corpus (one document per line)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_vectorizer)

    p = sub.add_parser("train", help="train a logistic model on 'label<TAB>text' lines")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vectorizer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--l2", type=float, default=1e-4)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="select an anchor for one document")
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer", required=True)
    p.add_argument("--doc", required=True)
    p.add_argument("--eval", choices=("exact", "empirical", "approx"), default="exact")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tie", choices=("lex", "random"), default="lex")
    p.add_argument("--corpus")
    p.add_argument("--json", help="write the selection result here instead of stdout")
    p.add_argument("--csv", help="write every evaluated anchor here")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("verify", help="check the theoretical results on random instances")
    p.add_argument("which", choices=("prop1", "prop2", "oracle"))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-min", type=int, default=None)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--idf", choices=("unit", "fitted"), default="unit")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("benchmark", help="Jaccard agreement between anchors and top-weighted words")
    p.add_argument("which", choices=("jaccard",))
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels")
    p.add_argument("--model")
    p.add_argument("--vectorizer")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--eval", choices=("exact", "empirical", "approx"), default="approx")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--thresholds", type=float, nargs="*", default=[0.85, 0.75])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("synth", help="write a synthetic labeled review corpus")
    p.add_argument("--docs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--positive-rate", type=float, default=0.5)
    p.add_argument("--out-corpus", required=True)
    p.add_argument("--out-labels")
    p.add_argument("--out-labeled")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sample", help="print perturbed copies of a document, UNK written literally")
    p.add_argument("--doc", required=True)
    p.add_argument("--anchor", type=int, nargs="*", help="token positions to keep")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return parser


_VERIFY_DEFAULTS = {
    "prop1": {"trials": 1000, "d_min": 2, "d_max": 6},
    "prop2": {"trials": 500, "d_min": 2, "d_max": 6},
    "oracle": {"trials": 200, "d_min": 1, "d_max": 4},
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        for key, value in _VERIFY_DEFAULTS[args.which].items():
            if getattr(args, key) is None:
                setattr(args, key, value)
    try:
        epsilon = getattr(args, "epsilon", None)
        if epsilon is not None and not 0.0 < epsilon < 1.0:
            raise InputError(f"--epsilon must lie in (0, 1), got {args.epsilon}")
        return args.func(args)
    except (InputError, AnchorsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
