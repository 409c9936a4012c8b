"""Command-line entry point: one binary, one subcommand per pipeline
stage, plus evaluation, agreement, statistics, and a reproducible
end-to-end experiment driver.

Exit codes: 0 success, 1 usage error, 2 data or model error.  Outputs are
written to a temporary file and atomically renamed, so failures never
leave partial files behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .corpus import (
    Corpus,
    Sentence,
    Token,
    corpus_stats,
    ilmt_chunk_tagset,
    ilmt_pos_tagset,
    load_tagset,
    split_corpus,
)
from .crf import LabelAlphabet, TrainConfig, load_model, save_model, train
from .errors import ShallowlabError
from .evaluation import confusion_report, eval_chunks, eval_pos, fleiss_kappa
from .features import ChunkTemplateConfig, PosTemplateConfig
from .pipeline import (
    ShallowParser,
    _chunk_examples,
    _pos_examples,
    parse,
    predict_chunks_corpus,
    predict_pos_corpus,
    tag_pos,
    train_pipeline,
)
from .ssf import parse_ssf, serialize_ssf
from .tokenizer import load_abbreviations, tokenize

REPORT_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _atomic_write(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_tagsets(args):
    pos = load_tagset(args.pos_tagset, "pos") if args.pos_tagset else ilmt_pos_tagset()
    chk = (
        load_tagset(args.chunk_tagset, "chunk") if args.chunk_tagset else ilmt_chunk_tagset()
    )
    return pos, chk


def _read_corpus(path, pos_tagset, chunk_tagset) -> Corpus:
    return parse_ssf(Path(path).read_bytes(), pos_tagset, chunk_tagset)


def _tagset_args(sub) -> None:
    sub.add_argument("--pos-tagset", help="POS tagset file (default: bundled ILMT 27)")
    sub.add_argument("--chunk-tagset", help="chunk tagset file (default: bundled ILMT 11)")


def _template_args(sub) -> None:
    sub.add_argument("--prefix-max", type=int, default=4, help="max prefix length (default 4)")
    sub.add_argument("--suffix-max", type=int, default=7, help="max suffix length (default 7)")
    sub.add_argument("--window", type=int, default=1, help="token context radius (default 1)")
    sub.add_argument(
        "--chunk-word-window", type=int, default=1, help="chunker word window (default 1)"
    )
    sub.add_argument(
        "--chunk-pos-window", type=int, default=1, help="chunker POS window (default 1)"
    )


def _trainer_args(sub) -> None:
    sub.add_argument("--sigma", type=float, default=1.0, help="L2 prior sigma (default 1.0)")
    sub.add_argument(
        "--max-iterations", type=int, default=200, help="optimizer iteration cap (default 200)"
    )
    sub.add_argument(
        "--tolerance",
        type=float,
        default=1e-5,
        help="relative objective-change stop tolerance (default 1e-5)",
    )
    sub.add_argument(
        "--cutoff", type=int, default=0, help="drop features seen <= this often (default 0)"
    )


def _report_arg(sub) -> None:
    sub.add_argument(
        "--report", choices=("text", "json"), default="text", help="report format"
    )


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_tokenize(args) -> int:
    abbreviations = load_abbreviations(args.abbrev) if args.abbrev else frozenset()
    sentences = tokenize(Path(args.input).read_bytes(), abbreviations)
    out = "".join(" ".join(tokens) + "\n" for tokens in sentences)
    _atomic_write(args.output, out.encode("utf-8"))
    return 0


def _cmd_train(args) -> int:
    pos_tagset, chunk_tagset = _load_tagsets(args)
    corpus = _read_corpus(args.train, pos_tagset, chunk_tagset)
    cfg = TrainConfig(args.sigma, args.max_iterations, args.tolerance, args.cutoff)
    if args.task == "pos":
        template = PosTemplateConfig(args.prefix_max, args.suffix_max, args.window)
        examples, labels = _pos_examples(corpus, template)
    else:
        template = ChunkTemplateConfig(args.chunk_word_window, args.chunk_pos_window)
        examples, labels = _chunk_examples(corpus, template)
    model = train(examples, LabelAlphabet(labels), cfg, template=template, task=args.task)
    _atomic_write(args.model, save_model(model))
    return 0


def _read_tokenized(path) -> list[list[str]]:
    text = Path(path).read_bytes().decode("utf-8")
    return [line.split() for line in text.splitlines() if line.strip()]


def _cmd_tag(args) -> int:
    pos_tagset, chunk_tagset = _load_tagsets(args)
    model = load_model(Path(args.model).read_bytes())
    sentences = []
    for i, tokens in enumerate(_read_tokenized(args.input), start=1):
        tags = tag_pos(model, tokens)
        sentences.append(Sentence(i, tuple(Token(w, p) for w, p in zip(tokens, tags))))
    out = serialize_ssf(Corpus(tuple(sentences), pos_tagset, chunk_tagset))
    _atomic_write(args.output, out.encode("utf-8"))
    return 0


def _cmd_chunk(args) -> int:
    if bool(args.gold_pos) == bool(args.pos_model):
        raise _UsageError("chunk needs exactly one of --gold-pos or --pos-model")
    pos_tagset, chunk_tagset = _load_tagsets(args)
    corpus = _read_corpus(args.input, pos_tagset, chunk_tagset)
    chunk_model = load_model(Path(args.model).read_bytes())
    pos_model = None if args.gold_pos else load_model(Path(args.pos_model).read_bytes())
    predicted = predict_chunks_corpus(chunk_model, corpus, pos_model)
    _atomic_write(args.output, serialize_ssf(predicted).encode("utf-8"))
    return 0


def _cmd_parse(args) -> int:
    pos_tagset, chunk_tagset = _load_tagsets(args)
    parser = ShallowParser(
        pos_model=load_model(Path(args.pos_model).read_bytes()),
        chunk_model=load_model(Path(args.chunk_model).read_bytes()),
        pos_tagset=pos_tagset,
        chunk_tagset=chunk_tagset,
        abbreviations=load_abbreviations(args.abbrev) if args.abbrev else frozenset(),
    )
    corpus = parse(parser, Path(args.input).read_bytes())
    _atomic_write(args.output, serialize_ssf(corpus).encode("utf-8"))
    return 0


def _format_eval_report(report, confusion=None, top_k=10) -> str:
    lines = [
        f"{'label':<12}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}",
    ]
    for label, score in report.per_label.items():
        lines.append(
            f"{label:<12}{score.precision:>8.4f}{score.recall:>8.4f}"
            f"{score.f1:>8.4f}{score.support:>9}"
        )
    lines.append(
        f"{'macro' if report.accuracy is not None else 'micro':<12}"
        f"{report.precision:>8.4f}{report.recall:>8.4f}{report.f1:>8.4f}"
    )
    if report.accuracy is not None:
        lines.append(f"accuracy    {report.accuracy:.4f}")
    if report.zero_division_labels:
        lines.append("zero-division labels: " + " ".join(report.zero_division_labels))
    if confusion is not None:
        top = confusion_report(confusion, top_k)
        if top:
            lines.append("top confusions (gold -> predicted):")
            for gold, pred, count in top:
                lines.append(f"  {gold} -> {pred}: {count}")
    return "\n".join(lines) + "\n"


def _eval_report_dict(report) -> dict:
    data = {
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "per_label": {
            label: {
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
                "support": s.support,
            }
            for label, s in report.per_label.items()
        },
        "zero_division_labels": list(report.zero_division_labels),
    }
    if report.accuracy is not None:
        data["accuracy"] = report.accuracy
    return data


def _cmd_eval(args) -> int:
    pos_tagset, chunk_tagset = _load_tagsets(args)
    gold = _read_corpus(args.gold, pos_tagset, chunk_tagset)
    pred = _read_corpus(args.pred, pos_tagset, chunk_tagset)
    if args.task == "pos":
        report, confusion = eval_pos(gold, pred)
    else:
        report, confusion = eval_chunks(gold, pred, per_token=args.per_token), None
    if args.report == "json":
        payload = {"report_version": REPORT_VERSION, "task": args.task}
        payload.update(_eval_report_dict(report))
        if confusion is not None:
            payload["top_confusions"] = [
                {"gold": g, "predicted": p, "count": c}
                for g, p, c in confusion_report(confusion, 10)
            ]
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))
    else:
        sys.stdout.write(_format_eval_report(report, confusion))
    return 0


def _cmd_kappa(args) -> int:
    text = Path(args.input).read_bytes().decode("utf-8")
    rows = [line.split("\t") for line in text.splitlines() if line.strip()]
    report = fleiss_kappa(rows)
    if args.report == "json":
        print(
            json.dumps(
                {
                    "report_version": REPORT_VERSION,
                    "kappa": report.kappa,
                    "observed_agreement": report.observed_agreement,
                    "expected_agreement": report.expected_agreement,
                    "raters": report.raters,
                    "items": report.items,
                },
                sort_keys=True,
                indent=2,
            )
        )
    else:
        print(f"items               {report.items}")
        print(f"raters              {report.raters}")
        print(f"observed agreement  {report.observed_agreement:.6f}")
        print(f"expected agreement  {report.expected_agreement:.6f}")
        print(f"fleiss kappa        {report.kappa:.6f}")
    return 0


def _cmd_stats(args) -> int:
    pos_tagset, chunk_tagset = _load_tagsets(args)
    stats = corpus_stats(_read_corpus(args.input, pos_tagset, chunk_tagset))
    if args.report == "json":
        print(
            json.dumps(
                {
                    "report_version": REPORT_VERSION,
                    "sentences": stats.sentences,
                    "tokens": stats.tokens,
                    "chunks": stats.chunks,
                    "untagged_tokens": stats.untagged_tokens,
                    "pos_counts": stats.pos_counts,
                    "chunk_counts": stats.chunk_counts,
                },
                ensure_ascii=False,
                sort_keys=True,
                indent=2,
            )
        )
    else:
        print(f"sentences {stats.sentences}")
        print(f"tokens    {stats.tokens}")
        print(f"chunks    {stats.chunks}")
        for label, count in stats.pos_counts.items():
            print(f"pos {label:<8} {count}")
        for label, count in stats.chunk_counts.items():
            print(f"chunk {label:<8} {count}")
    return 0


# ---------------------------------------------------------------------------
# Experiment driver

_EXPERIMENT_DEFAULTS = {
    "pos_tagset": "",
    "chunk_tagset": "",
    "prefix_max": "4",
    "suffix_max": "7",
    "window": "1",
    "chunk_word_window": "1",
    "chunk_pos_window": "1",
    "sigma": "1.0",
    "max_iterations": "200",
    "tolerance": "1e-5",
    "cutoff": "0",
    "report": "text",
}
_EXPERIMENT_REQUIRED = ("corpus", "train_count", "output_dir")


def _parse_config(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve_config(values: dict[str, str]) -> dict[str, str]:
    unknown = set(values) - set(_EXPERIMENT_DEFAULTS) - set(_EXPERIMENT_REQUIRED)
    if unknown:
        raise _UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in _EXPERIMENT_REQUIRED:
        if key not in values or not values[key]:
            raise _UsageError(f"config is missing required key {key!r}")
    resolved = dict(_EXPERIMENT_DEFAULTS)
    resolved.update(values)
    return resolved


def _config_number(resolved: dict[str, str], key: str, convert):
    try:
        return convert(resolved[key])
    except ValueError:
        raise _UsageError(f"config key {key!r} has invalid value {resolved[key]!r}") from None


def run_experiment(config: dict[str, str]) -> dict:
    """Split, train both models, evaluate three ways, and return the
    report payload (deterministic for identical inputs)."""
    resolved = _resolve_config(config)

    pos_tagset = (
        load_tagset(resolved["pos_tagset"], "pos")
        if resolved["pos_tagset"]
        else ilmt_pos_tagset()
    )
    chunk_tagset = (
        load_tagset(resolved["chunk_tagset"], "chunk")
        if resolved["chunk_tagset"]
        else ilmt_chunk_tagset()
    )
    corpus = _read_corpus(resolved["corpus"], pos_tagset, chunk_tagset)
    train_corpus, test_corpus = split_corpus(
        corpus, _config_number(resolved, "train_count", int)
    )

    parser = train_pipeline(
        train_corpus,
        PosTemplateConfig(
            _config_number(resolved, "prefix_max", int),
            _config_number(resolved, "suffix_max", int),
            _config_number(resolved, "window", int),
        ),
        ChunkTemplateConfig(
            _config_number(resolved, "chunk_word_window", int),
            _config_number(resolved, "chunk_pos_window", int),
        ),
        TrainConfig(
            _config_number(resolved, "sigma", float),
            _config_number(resolved, "max_iterations", int),
            _config_number(resolved, "tolerance", float),
            _config_number(resolved, "cutoff", int),
        ),
    )

    out_dir = Path(resolved["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "pos.model", save_model(parser.pos_model))
    _atomic_write(out_dir / "chunk.model", save_model(parser.chunk_model))

    pos_pred = predict_pos_corpus(parser.pos_model, test_corpus)
    pos_report, _ = eval_pos(test_corpus, pos_pred)
    gold_pos_chunks = predict_chunks_corpus(parser.chunk_model, test_corpus)
    chunk_report = eval_chunks(test_corpus, gold_pos_chunks)
    pipeline_chunks = predict_chunks_corpus(
        parser.chunk_model, test_corpus, parser.pos_model
    )
    pipeline_report = eval_chunks(test_corpus, pipeline_chunks)

    return {
        "report_version": REPORT_VERSION,
        "config": resolved,
        "split": {"train": len(train_corpus), "test": len(test_corpus)},
        "rows": [
            {
                "model": "pos-tagging",
                "precision": pos_report.precision,
                "recall": pos_report.recall,
                "f1": pos_report.f1,
            },
            {
                "model": "chunking",
                "precision": chunk_report.precision,
                "recall": chunk_report.recall,
                "f1": chunk_report.f1,
            },
            {
                "model": "shallow-parsing",
                "precision": pipeline_report.precision,
                "recall": pipeline_report.recall,
                "f1": pipeline_report.f1,
            },
        ],
        "pos_accuracy": pos_report.accuracy,
        "pipeline_per_token_f1": eval_chunks(test_corpus, pipeline_chunks, per_token=True).f1,
    }


def _render_experiment_text(payload: dict) -> str:
    lines = [f"{'model':<16}{'P':>8}{'R':>8}{'F1':>8}"]
    for row in payload["rows"]:
        lines.append(
            f"{row['model']:<16}{row['precision']:>8.4f}{row['recall']:>8.4f}{row['f1']:>8.4f}"
        )
    lines.append(f"pos accuracy    {payload['pos_accuracy']:.4f}")
    lines.append(f"train/test split {payload['split']['train']}/{payload['split']['test']}")
    lines.append("config:")
    for key, value in sorted(payload["config"].items()):
        lines.append(f"  {key} = {value}")
    return "\n".join(lines) + "\n"


def _cmd_experiment(args) -> int:
    config = _parse_config(Path(args.config).read_bytes().decode("utf-8"))
    payload = run_experiment(config)
    out_dir = Path(payload["config"]["output_dir"])
    if payload["config"]["report"] == "json":
        rendered = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
        _atomic_write(out_dir / "report.json", rendered.encode("utf-8"))
    else:
        rendered = _render_experiment_text(payload)
        _atomic_write(out_dir / "report.txt", rendered.encode("utf-8"))
    sys.stdout.write(rendered)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="shallowlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"shallowlab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("tokenize", help="tokenize raw text, one sentence per line")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--abbrev", help="abbreviation list file")
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("train", help="train a POS or chunk CRF model")
    p.add_argument("--task", choices=("pos", "chunk"), required=True)
    p.add_argument("--train", required=True, help="training corpus (SSF)")
    p.add_argument("--model", required=True, help="output model path")
    _template_args(p)
    _trainer_args(p)
    _tagset_args(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("tag", help="POS-tag tokenized text (one sentence per line)")
    p.add_argument("--model", required=True, help="POS model path")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output SSF path")
    _tagset_args(p)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("chunk", help="chunk an SSF corpus")
    p.add_argument("--model", required=True, help="chunk model path")
    p.add_argument("--input", required=True, help="input SSF with tokens")
    p.add_argument("--output", required=True)
    p.add_argument(
        "--gold-pos",
        action="store_true",
        help="consume the SSF POS column instead of running a tagger",
    )
    p.add_argument("--pos-model", help="POS model used to retag the input")
    _tagset_args(p)
    p.set_defaults(func=_cmd_chunk)

    p = sub.add_parser("parse", help="tokenize + tag + chunk raw text")
    p.add_argument("--pos-model", required=True)
    p.add_argument("--chunk-model", required=True)
    p.add_argument("--input", required=True, help="raw text file")
    p.add_argument("--output", required=True, help="output SSF path")
    p.add_argument("--abbrev", help="abbreviation list file")
    _tagset_args(p)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--task", choices=("pos", "chunk"), required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument(
        "--per-token", action="store_true", help="score chunks per token (BIO) instead of spans"
    )
    _report_arg(p)
    _tagset_args(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("kappa", help="Fleiss' kappa from a ratings TSV")
    p.add_argument("--input", required=True, help="TSV: one item per row, one rater per column")
    _report_arg(p)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--input", required=True)
    _report_arg(p)
    _tagset_args(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("experiment", help="run the split/train/evaluate experiment")
    p.add_argument("--config", required=True, help="key = value config file")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"shallowlab: error: {exc}", file=sys.stderr)
        return 1
    except ShallowlabError as exc:
        print(f"shallowlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"shallowlab: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
