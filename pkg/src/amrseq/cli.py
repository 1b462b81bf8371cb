"""Command-line entry point: ``amrseq <command> ...``.

Every command reads and writes UTF-8 files; ``-o`` defaults to stdout.
Scoring commands need a seed, given with ``--seed`` or in a JSON config
file (``--config`` or the ``AMRSEQ_CONFIG`` environment variable).

Exit status is 0 on success, 1 when input data is invalid and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Iterator, Sequence, TextIO

from . import augment as aug
from . import codec, ensemble, evaluate, graph, postprocess, smatch
from .errors import AmrError, ParseError

log = logging.getLogger("amrseq")

CONFIG_ENV = "AMRSEQ_CONFIG"
DEFAULT_EDGES = (10, 20, 30, 40, 50, 60)


@dataclass
class PipelineConfig:
    """Defaults shared by all commands; command-line flags take precedence."""

    corpus: str | None = None
    alignments: str | None = None
    pos: str | None = None
    wiki_table: str | None = None
    runs: dict[str, str] = field(default_factory=dict)
    threshold: float = postprocess.WIKI_THRESHOLD
    restarts: int = smatch.DEFAULT_RESTARTS
    seed: int | None = None
    cap: int = 1000
    bucket_edges: tuple[int, ...] = DEFAULT_EDGES

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.cap < 1:
            raise ValueError(f"cap must be >= 1, got {self.cap}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        self.bucket_edges = tuple(int(e) for e in self.bucket_edges)

    @classmethod
    def load(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"{path}: unknown config keys {unknown}")
        return cls(**data)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _where(path: str, err: Exception) -> str:
    line = getattr(err, "line", None)
    return f"{path}:{line}: {err}" if line else f"{path}: {err}"


class Reporter:
    """Collects data errors so a command can finish and still exit 1."""

    def __init__(self):
        self.count = 0

    def error(self, message: str) -> None:
        self.count += 1
        print(f"amrseq: {message}", file=sys.stderr)


def _corpus(path: str, report: Reporter, gold: bool = False) -> graph.Corpus:
    corpus = graph.read_corpus(path, gold)
    for err in corpus.errors:
        report.error(_where(path, err))
    return corpus


def _strict_corpus(path: str, gold: bool = False) -> graph.Corpus:
    """Corpora that are scored must parse completely."""
    corpus = graph.read_corpus(path, gold)
    if corpus.errors:
        raise AmrError(_where(path, corpus.errors[0]) + f" ({len(corpus.errors)} bad block(s))")
    return corpus


def _tree_blocks(path: str) -> Iterator[graph.Block]:
    with open(path, encoding="utf-8") as fh:
        for block in graph.iter_blocks(fh):
            if block.body.strip():
                yield block


def _write_tree(out: TextIO, block: graph.Block, text: str) -> None:
    for key, value in block.metadata:
        out.write(f"# ::{key} {value}".rstrip() + "\n")
    out.write(text + "\n\n")


def _runs(specs: Sequence[str], config: PipelineConfig) -> dict[str, str]:
    runs = dict(config.runs)
    for spec in specs or ():
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--run expects NAME=PATH, got {spec!r}")
        runs[name] = path
    if not runs:
        raise UsageError("at least one --run NAME=PATH is required")
    return runs


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _seed(args, config: PipelineConfig) -> int:
    seed = args.seed if args.seed is not None else config.seed
    if seed is None:
        raise UsageError("--seed is required for scoring commands (no default seed)")
    return seed


def _restarts(args, config: PipelineConfig) -> int:
    restarts = args.restarts if args.restarts is not None else config.restarts
    if restarts < 1:
        raise UsageError("--restarts must be >= 1")
    return restarts


# ---------------------------------------------------------------------------
# amr-core


def cmd_validate(args, config, report):
    ok = 0
    for path in args.files:
        for item in graph.iter_corpus(path):
            if isinstance(item, ParseError):
                report.error(_where(path, item))
                continue
            problems = graph.validate(item.graph)
            for v in problems:
                report.error(f"{path}:{item.line}: {item.id}: {v}")
            ok += not problems
    print(f"{ok} valid, {report.count} problem(s)")


def cmd_triples(args, config, report):
    with _output(args.output) as out:
        for item in graph.iter_corpus(args.corpus):
            if isinstance(item, ParseError):
                report.error(_where(args.corpus, item))
                continue
            ts = graph.to_triples(item.graph)
            out.write(f"# ::id {item.id}\n")
            for var, concept in ts.instances:
                out.write(f"instance\t{var}\t{concept}\n")
            for a, rel, b in ts.attributes:
                out.write(f"attribute\t{a}\t{rel}\t{b}\n")
            for a, rel, b in ts.relations:
                out.write(f"relation\t{a}\t{rel}\t{b}\n")
            out.write(f"top\t{ts.top[0]}\t{ts.top[1]}\n\n")


# ---------------------------------------------------------------------------
# seq-codec


def cmd_anonymize(args, config, report):
    with _output(args.output) as out:
        for item in graph.iter_corpus(args.corpus):
            if isinstance(item, ParseError):
                report.error(_where(args.corpus, item))
                continue
            body = codec.tree_to_text(codec.anonymize(item.graph), indent=args.indent)
            out.write(graph.format_document(item, body=body) + "\n")


def _tree_or_fallback(text: str, block: graph.Block, args, path: str, report: Reporter) -> codec.SeqTree:
    if args.repair:
        tree, fell_back = postprocess.repair_or_default(text)
        if fell_back:
            log.warning("%s:%d: unrepairable, using %s", path, block.line, postprocess.DEFAULT_CONCEPT)
    else:
        tree = codec.text_to_tree(text)
    return postprocess.prune(tree) if args.prune else tree


def cmd_restore(args, config, report):
    with _output(args.output) as out:
        for n, block in enumerate(_tree_blocks(args.input), 1):
            try:
                tree = _tree_or_fallback(block.body, block, args, args.input, report)
            except ParseError as err:
                report.error(_where(args.input, err.at_line(block.line_of(err.pos))))
                continue
            g = codec.restore(tree)
            meta = dict(block.metadata)
            doc = graph.Document(meta.get("id") or f"doc-{n}", meta.get("snt", ""), g, metadata=meta)
            out.write(graph.format_document(doc, indent=not args.flat) + "\n")


def cmd_prune(args, config, report):
    with _output(args.output) as out:
        for block in _tree_blocks(args.input):
            try:
                tree = codec.text_to_tree(block.body)
            except ParseError as err:
                report.error(_where(args.input, err.at_line(block.line_of(err.pos))))
                continue
            _write_tree(out, block, codec.tree_to_text(postprocess.prune(tree)))


def cmd_repair(args, config, report):
    fallbacks = 0
    with _output(args.output) as out:
        for block in _tree_blocks(args.input):
            try:
                text = postprocess.repair(block.body)
            except AmrError:
                fallbacks += 1
                text = codec.tree_to_text(postprocess.default_amr())
            _write_tree(out, block, text)
    if fallbacks:
        log.warning("%d block(s) replaced by the default tree", fallbacks)


def cmd_encode(args, config, report):
    vocab = codec.Vocab.load(args.vocab)
    unknown = 0
    with open(args.input, encoding="utf-8") as fh, _output(args.output) as out:
        for line in fh:
            seq = codec.encode(line.rstrip("\n"), vocab)
            unknown += seq.unknown
            out.write(" ".join(map(str, seq.ids)) + "\n")
    if unknown:
        log.warning("%d unknown character(s) mapped to %s", unknown, codec.UNK)


def cmd_build_vocab(args, config, report):
    corpus = _corpus(_need(args.corpus or config.corpus, "--corpus"), report)
    tags: list[str] = []
    pos_path = args.pos or config.pos
    if pos_path:
        tags = sorted({tag for sent in codec.read_pos_file(pos_path) for _, tag in sent})
    vocab = codec.build_vocab(corpus, tags)
    if args.output in (None, "-"):
        for tok in vocab.tokens:
            print(codec._escape_vocab(tok))
    else:
        vocab.save(args.output)
    log.info("vocabulary of %d tokens", len(vocab))


def cmd_pos_annotate(args, config, report):
    corpus = _corpus(_need(args.corpus or config.corpus, "--corpus"), report)
    tags = codec.read_pos_file(_need(args.pos or config.pos, "--pos"))
    if len(tags) != len(corpus):
        raise AmrError(f"{len(corpus)} documents but {len(tags)} tagged sentences")
    with _output(args.output) as out:
        for doc, sent in zip(corpus, tags):
            try:
                out.write(codec.pos_annotate(doc.sentence, sent) + "\n")
            except AmrError as err:
                raise AmrError(f"{args.corpus}:{doc.line}: {doc.id}: {err}") from None


def cmd_emit_trainer_config(args, config, report):
    cfg = codec.TrainerConfig()
    if args.set:
        text = cfg.to_text() + "\n".join(args.set) + "\n"
        cfg = codec.TrainerConfig.from_text(text)
    with _output(args.output) as out:
        out.write(cfg.to_text())


# ---------------------------------------------------------------------------
# augment


def cmd_augment(args, config, report):
    corpus = _corpus(_need(args.corpus or config.corpus, "--corpus"), report)
    lines = list(aug.read_alignment_lines(_need(args.alignments or config.alignments, "--alignments")))
    if len(lines) != len(corpus):
        raise AmrError(f"{len(corpus)} documents but {len(lines)} alignment lines")
    cap = args.cap if args.cap is not None else config.cap
    pairs = []
    for doc, line in zip(corpus, lines):
        tree = codec.anonymize(doc.graph)
        try:
            alignment = aug.parse_alignments(line, tree, len(doc.sentence.split()) or None)
        except AmrError as err:
            raise AmrError(f"{args.alignments}: document {doc.id}: {err}") from None
        pairs.append((doc, tree, alignment))
    with _output(args.output) as out:
        if args.all_orderings:
            for doc, tree, _ in pairs:
                for k, t in enumerate(aug.enumerate_orderings(tree, cap)):
                    out.write(f"# ::id {doc.id}.{k}\n{codec.tree_to_text(t)}\n\n")
        else:
            graph.write_corpus(aug.augment_corpus((d, a) for d, _, a in pairs), out)


# ---------------------------------------------------------------------------
# post-process


def cmd_build_wiki_table(args, config, report):
    corpus = _corpus(_need(args.gold or config.corpus, "--gold"), report, gold=True)
    table = postprocess.build_wiki_table(corpus)
    with _output(args.output) as out:
        table.save(out)


def cmd_wikify(args, config, report):
    table = postprocess.WikiTable.load(_need(args.table or config.wiki_table, "--table"))
    threshold = args.threshold if args.threshold is not None else config.threshold
    if not 0.0 <= threshold <= 1.0:
        raise UsageError("--threshold must be in [0, 1]")
    path = _need(args.corpus or config.corpus, "--corpus")
    with _output(args.output) as out:
        for item in graph.iter_corpus(path):
            if isinstance(item, ParseError):
                report.error(_where(path, item))
                continue
            out.write(graph.format_document(item.with_graph(postprocess.wikify(item.graph, table, threshold))))
            out.write("\n")


# ---------------------------------------------------------------------------
# metrics


def _score_line(score: smatch.SmatchScore, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(score.as_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return ("precision,recall,f,matched,gold_total,test_total\n"
                f"{score.precision:.4f},{score.recall:.4f},{score.f:.4f},"
                f"{score.matched},{score.gold_total},{score.test_total}\n")
    return f"P {score.precision:.4f}\nR {score.recall:.4f}\nF {score.f:.4f}\n"


def cmd_smatch(args, config, report):
    gold = _strict_corpus(args.gold, gold=True)
    test = _strict_corpus(args.test)
    pairs = evaluate.align_by_id(gold, test)
    scores = smatch.map_pairs([(g.graph, t.graph) for g, t in pairs], _restarts(args, config),
                              _seed(args, config), args.jobs)
    total = sum(scores, smatch.ZERO)
    with _output(args.output) as out:
        if args.per_doc:
            for (g, _), s in zip(pairs, scores):
                out.write(f"{g.id}\t{s.matched}\t{s.gold_total}\t{s.test_total}\t{s.f:.4f}\n")
        out.write(_score_line(total, args.format))


def cmd_evaluate(args, config, report):
    gold = _strict_corpus(args.gold, gold=True)
    test = _strict_corpus(args.test)
    result = evaluate.fine_grained(gold, test, _restarts(args, config), seed=_seed(args, config), jobs=args.jobs)
    with _output(args.output) as out:
        out.write(result.to_json() if args.format == "json" else result.to_csv())


def cmd_length_report(args, config, report):
    gold = _strict_corpus(args.gold, gold=True)
    test = _strict_corpus(args.test)
    edges = config.bucket_edges
    if args.edges:
        try:
            edges = tuple(int(e) for e in args.edges.split(","))
        except ValueError:
            raise UsageError(f"--edges expects comma-separated integers, got {args.edges!r}") from None
    rows = evaluate.length_buckets(gold, test, edges, _restarts(args, config), seed=_seed(args, config),
                                   jobs=args.jobs)
    with _output(args.output) as out:
        out.write(evaluate.length_rows_json(rows) if args.format == "json" else evaluate.length_rows_csv(rows))


# ---------------------------------------------------------------------------
# ensemble


def _load_runs(args, config) -> dict[str, graph.Corpus]:
    return {name: _strict_corpus(path) for name, path in _runs(args.run, config).items()}


def cmd_ensemble(args, config, report):
    runs = _load_runs(args, config)
    chosen, rows = ensemble.ensemble_corpus(runs, _restarts(args, config), seed=_seed(args, config),
                                            max_vars=args.max_vars, jobs=args.jobs)
    with _output(args.output) as out:
        graph.write_corpus(chosen, out)
    if args.choices:
        with _output(args.choices) as out:
            if args.format == "json":
                data = [{"id": r.id, "chosen": r.chosen, "row_sums": dict(zip(runs, r.row_sums))} for r in rows]
                out.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
            else:
                out.write(ensemble.ensemble_rows_csv(rows, list(runs)))


def cmd_oracle(args, config, report):
    gold = _strict_corpus(args.gold, gold=True)
    runs = _load_runs(args, config)
    rows, total = ensemble.oracle_corpus(gold, runs, _restarts(args, config), seed=_seed(args, config),
                                         max_vars=args.max_vars, jobs=args.jobs)
    with _output(args.output) as out:
        if args.format == "json":
            data = {"documents": [{"id": r.id, "chosen": r.chosen, "f": r.f} for r in rows],
                    "oracle": total.as_dict()}
            out.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
        else:
            out.write("id,chosen,f\n")
            for r in rows:
                out.write(f"{r.id},{r.chosen},{r.f:.4f}\n")
            out.write(f"oracle,,{total.f:.4f}\n")


def cmd_compare(args, config, report):
    gold = _strict_corpus(args.gold, gold=True)
    runs = _load_runs(args, config)
    result = ensemble.compare_parsers(gold, runs, _restarts(args, config), seed=_seed(args, config),
                                      max_vars=args.max_vars, jobs=args.jobs)
    with _output(args.output) as out:
        if args.format == "json":
            out.write(result.to_json())
        else:
            out.write(result.to_csv())
            out.write("\n")
            out.write(result.summary_csv())


# ---------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amrseq", description="AMR graph, tree codec, evaluation and ensemble tools.")
    parser.add_argument("--config", help=f"JSON pipeline config (default: ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    def output(p):
        p.add_argument("-o", "--output", help="output file (default: stdout)")

    def scoring(p, fmt=("csv", "json"), default="csv"):
        p.add_argument("--seed", type=int, help="random seed (required, here or in the config)")
        p.add_argument("--restarts", type=_positive, help=f"hill-climbing restarts (default {smatch.DEFAULT_RESTARTS})")
        p.add_argument("--jobs", type=_positive, default=1, help="worker processes")
        p.add_argument("--format", choices=fmt, default=default)
        output(p)

    p = command("validate", cmd_validate, "check corpus files for parse errors and invariant violations")
    p.add_argument("files", nargs="+")

    p = command("triples", cmd_triples, "list the Smatch triples of every graph")
    p.add_argument("corpus")
    output(p)

    p = command("anonymize", cmd_anonymize, "write the variable-free tree form of every graph")
    p.add_argument("corpus")
    p.add_argument("--indent", action="store_true", help="one relation per line")
    output(p)

    p = command("restore", cmd_restore, "rebuild Penman graphs from tree text")
    p.add_argument("input")
    p.add_argument("--repair", action="store_true", help="repair malformed trees, falling back to the default")
    p.add_argument("--prune", action="store_true", help="drop repeated relation-concept pairs first")
    p.add_argument("--flat", action="store_true", help="write each graph on one line")
    output(p)

    p = command("augment", cmd_augment, "double a corpus with best word-order copies")
    p.add_argument("--corpus")
    p.add_argument("--alignments")
    p.add_argument("--all-orderings", action="store_true", help="write every branch ordering as tree text instead")
    p.add_argument("--cap", type=_positive, help="maximum orderings per tree (default 1000)")
    output(p)

    p = command("prune", cmd_prune, "remove repeated relation-concept pairs from tree text")
    p.add_argument("input")
    output(p)

    p = command("repair", cmd_repair, "make tree text parseable")
    p.add_argument("input")
    output(p)

    p = command("wikify", cmd_wikify, "add :wiki links from a gold frequency table")
    p.add_argument("--corpus")
    p.add_argument("--table")
    p.add_argument("--threshold", type=float, help="minimum link share, exclusive (default 0.5)")
    output(p)

    p = command("build-wiki-table", cmd_build_wiki_table, "count name to wiki link annotations in gold data")
    p.add_argument("--gold")
    output(p)

    p = command("smatch", cmd_smatch, "corpus Smatch of a test file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--per-doc", action="store_true", help="also list per-document counts")
    scoring(p, ("text", "csv", "json"), "text")

    p = command("evaluate", cmd_evaluate, "fine-grained evaluation report")
    p.add_argument("--gold", required=True)
    p.add_argument("--test", required=True)
    scoring(p)

    p = command("length-report", cmd_length_report, "Smatch by maximum sentence length")
    p.add_argument("--gold", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--edges", help="comma-separated bucket edges (default 10,20,...,60)")
    scoring(p)

    for name, func, help_text in (
        ("ensemble", cmd_ensemble, "pick one parse per sentence by pairwise Smatch"),
        ("oracle", cmd_oracle, "best achievable pick per sentence against gold"),
        ("compare", cmd_compare, "per-sentence winners against gold"),
    ):
        p = command(name, func, help_text)
        if name != "ensemble":
            p.add_argument("--gold", required=True)
        p.add_argument("--run", action="append", metavar="NAME=PATH", help="candidate corpus, repeatable")
        p.add_argument("--max-vars", type=_positive, default=smatch.DEFAULT_MAX_VARS,
                       help="use the exact scorer up to this many variables")
        if name == "ensemble":
            p.add_argument("--choices", help="CSV/JSON log of the choice per document")
        scoring(p)

    p = command("encode", cmd_encode, "encode text lines into vocabulary ids")
    p.add_argument("input")
    p.add_argument("--vocab", required=True)
    output(p)

    p = command("build-vocab", cmd_build_vocab, "build a super-character vocabulary")
    p.add_argument("--corpus")
    p.add_argument("--pos", help="POS file whose tags become super characters")
    output(p)

    p = command("pos-annotate", cmd_pos_annotate, "interleave sentences with POS super characters")
    p.add_argument("--corpus")
    p.add_argument("--pos")
    output(p)

    p = command("emit-trainer-config", cmd_emit_trainer_config, "write the seq2seq trainer settings")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override one setting")
    output(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="amrseq: %(levelname)s: %(message)s")
    config_path = args.config or os.environ.get(CONFIG_ENV)
    try:
        config = PipelineConfig.load(config_path) if config_path else PipelineConfig()
    except (OSError, ValueError, TypeError) as err:
        parser.error(f"--config: {err}")
    report = Reporter()
    try:
        args.func(args, config, report)
    except UsageError as err:
        parser.error(str(err))
    except (AmrError, ValueError) as err:
        print(f"amrseq: error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"amrseq: error: {err}", file=sys.stderr)
        return 1
    return 1 if report.count else 0


if __name__ == "__main__":
    sys.exit(main())
