"""Command-line entry point.

Exit codes: 0 success, 2 usage or input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusFormatError, IndexFormatError, build_index, ingest, load_index, save_index
from .crf import CrfFormatError, CrfModel, TrainingDivergenceError, decode, read_conll, train
from .evaluation import EvalFormatError, ndcg_at_k, precision_at_k, read_qrels, read_queries
from .fuzzy import ConfigFormatError, FuzzyConfig
from .rank import Bm25Params, EmptyQueryError, TierMode
from .resources import FIXTURES, default_model, fixture_text
from .text import LexiconFormatError, OpinionLexicon

log = logging.getLogger("opinrank")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

_LEVEL_TEXT = {
    3: "aspect + orientation + strength",
    2: "aspect + orientation",
    1: "aspect only",
    0: "absent",
}

# keys accepted in --config files, mapped to argparse dests
_CONFIG_KEYS = {
    "k1": float,
    "b": float,
    "tier_mode": str,
    "strength_tolerance": int,
    "top": int,
    "lexicon": str,
    "fuzzy_config": str,
    "model": str,
    "seed": int,
    "verbose": int,
}


class InputError(Exception):
    """User-facing input problem (exit code 2)."""


def _read_cli_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        key = key.replace("-", "_")
        if not sep or key not in _CONFIG_KEYS:
            raise InputError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise InputError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists() or p.is_dir():
        raise InputError(f"{what} not found: {path}")
    return p


def _lexicon(args) -> OpinionLexicon:
    if getattr(args, "lexicon", None):
        return OpinionLexicon.load(_require_file(args.lexicon, "lexicon"))
    return OpinionLexicon.default()


def _fuzzy(args) -> FuzzyConfig:
    if getattr(args, "fuzzy_config", None):
        return FuzzyConfig.load(_require_file(args.fuzzy_config, "fuzzy config"))
    return FuzzyConfig()


def _bm25(args) -> Bm25Params:
    try:
        return Bm25Params(args.k1, args.b)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# -- commands -------------------------------------------------------------------

def cmd_train_crf(args, out) -> int:
    corpus = read_conll(_require_file(args.annotations, "annotation file"))
    if not corpus:
        raise InputError(f"no sentences in {args.annotations}")
    model = train(
        corpus,
        l2=args.l2,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        seed=args.seed,
        lexicon=_lexicon(args),
    )
    model.save(args.output)
    total = sum(len(s.labels) for s in corpus)
    hits = sum(
        p == g for s in corpus for p, g in zip(decode(model, model.tag_words(s.tokens)), s.labels)
    )
    print(f"sentences\t{len(corpus)}", file=out)
    print(f"objective\t{model.hyperparams['final_objective']:.6f}", file=out)
    print(f"train_accuracy\t{hits / total:.4f}", file=out)
    print(f"model\t{args.output}", file=out)
    return EXIT_OK


def cmd_index(args, out) -> int:
    corpus_path = _require_file(args.corpus, "corpus file")
    problems: list = []
    records = ingest(corpus_path, strict=args.strict, problems=problems)
    if args.model:
        model = CrfModel.load(_require_file(args.model, "model file"))
    else:
        log.info("no --model given; training on the bundled annotations")
        model = default_model()
    lexicon = _lexicon(args) if args.lexicon else None
    index = build_index(records, model, _fuzzy(args), lexicon)
    save_index(index, args.output)
    report = index.report
    skipped = len(problems) + len(report.skipped)
    print(f"records\t{len(records) + len(problems)}", file=out)
    print(f"indexed\t{report.indexed}", file=out)
    print(f"skipped\t{skipped}", file=out)
    for lineno, msg in problems:
        print(f"skip\t{corpus_path}:{msg}", file=out)
    for eid, rid, why in report.skipped:
        print(f"skip\t{eid}/{rid}\t{why}", file=out)
    print(f"entities\t{index.n}", file=out)
    print(f"index\t{args.output}", file=out)
    if index.n == 0:
        print("warning: corpus is empty; the index will not match any query", file=sys.stderr)
    return EXIT_OK


def _run_query(index, text, args, use_tiers=True):
    try:
        query = index.parse_query(text)
    except EmptyQueryError as exc:
        raise InputError(str(exc)) from None
    return query, index.search(query, _bm25(args), args.tier_mode, args.strength_tolerance, use_tiers)


def cmd_query(args, out) -> int:
    if not args.query.strip():
        raise InputError("query is empty")
    index = load_index(_require_file(args.index, "index file"))
    query, results = _run_query(index, args.query, args, use_tiers=not args.baseline)
    if args.top is not None:
        results = results[: args.top]
    if args.porcelain:
        for i, r in enumerate(results, start=1):
            print(f"{i}\t{r.entity_id}\t{r.tier.label}\t{r.bm25:.6f}", file=out)
        return EXIT_OK
    if args.explain:
        parts = []
        for qa in query.aspects:
            pol = qa.orientation.value if qa.orientation else "any"
            gran = qa.granularity.value if qa.granularity else "any strength"
            parts.append(f"{qa.aspect} ({pol}, {gran})")
        print("query: " + "; ".join(parts), file=out)
        print("terms: " + " ".join(query.terms), file=out)
    if not results:
        print("no matching entities", file=out)
        return EXIT_OK
    width = max(len("entity"), *(len(r.entity_id) for r in results))
    print(f"{'rank':>4}  {'entity':<{width}}  {'tier':<8}  {'bm25':>9}", file=out)
    for i, r in enumerate(results, start=1):
        print(f"{i:>4}  {r.entity_id:<{width}}  {r.tier.label:<8}  {r.bm25:>9.4f}", file=out)
        if args.explain:
            profile = index.profiles.get(r.entity_id)
            for aspect, level in r.matched_aspects:
                summary = profile.aspects.get(aspect) if profile else None
                detail = ""
                if summary is not None:
                    detail = (
                        f" [{summary.orientation.value}, {summary.granularity.value},"
                        f" mean {summary.mean_strength:.2f}, {summary.mention_count} mention(s)]"
                    )
                print(f"{'':>6}{aspect}: level {level} ({_LEVEL_TEXT[level]}){detail}", file=out)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    index = load_index(_require_file(args.index, "index file"))
    queries = read_queries(_require_file(args.queries, "queries file"))
    qrels = read_qrels(_require_file(args.qrels, "qrels file"))
    if not qrels:
        raise InputError(f"no relevance judgments in {args.qrels}")
    unmatched = sorted((set(qrels) - set(queries)) | (set(queries) - set(qrels)))
    if unmatched:
        raise InputError("query ids without a match between queries and qrels: " + ", ".join(unmatched))
    try:
        ks = sorted({int(k) for k in args.k.split(",")})
    except ValueError:
        raise InputError(f"--k must be a comma-separated list of integers, got {args.k!r}") from None
    if not ks or ks[0] < 1:
        raise InputError("--k values must be >= 1")

    systems = [("system", True)] + ([("baseline", False)] if args.baseline else [])
    totals = {name: {m: 0.0 for k in ks for m in (f"P@{k}", f"NDCG@{k}")} for name, _ in systems}
    per_query = []
    for qid in sorted(queries):
        row = [qid]
        for name, use_tiers in systems:
            _, results = _run_query(index, queries[qid], args, use_tiers)
            ranked = [r.entity_id for r in results]
            for k in ks:
                p, n = precision_at_k(ranked, qrels[qid], k), ndcg_at_k(ranked, qrels[qid], k)
                totals[name][f"P@{k}"] += p
                totals[name][f"NDCG@{k}"] += n
            row.append(ranked[0] if ranked else "-")
        per_query.append(row)

    nq = len(queries)
    header = "metric\tsystem" + ("\tbaseline" if args.baseline else "")
    print(header, file=out)
    for k in ks:
        for metric in (f"P@{k}", f"NDCG@{k}"):
            vals = [totals[name][metric] / nq for name, _ in systems]
            print(metric + "".join(f"\t{v:.4f}" for v in vals), file=out)
    if args.verbose:
        print("query\ttop(system)" + ("\ttop(baseline)" if args.baseline else ""), file=out)
        for row in per_query:
            print("\t".join(row), file=out)
    return EXIT_OK


def cmd_fixture(args, out) -> int:
    if args.list or not args.name:
        for name in FIXTURES:
            print(name, file=out)
        return EXIT_OK
    try:
        out.write(fixture_text(args.name))
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser(settings: dict | None = None) -> argparse.ArgumentParser:
    """``settings`` (from a --config file) become defaults under explicit flags."""
    settings = dict(settings or {})
    parser = argparse.ArgumentParser(
        prog="opinrank",
        description="Rank entities by how well fuzzy-graded review opinions match an aspect query.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value settings file; explicit flags override it")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)

    p = sub.add_parser("train-crf", parents=[common], help="train the aspect tagger on CoNLL annotations")
    p.add_argument("annotations", help="token<TAB>label lines, blank line between sentences")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("--l2", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--learning-rate", "--lr", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon", help="opinion lexicon TSV (default: bundled)")
    p.set_defaults(func=cmd_train_crf)

    p = sub.add_parser("index", parents=[common], help="build an entity index from a review corpus")
    p.add_argument("corpus", help="entity_id<TAB>review_id<TAB>text lines")
    p.add_argument("-o", "--output", required=True, help="index file to write")
    p.add_argument("--model", help="trained tagger (default: train on bundled annotations)")
    p.add_argument("--lexicon", help="opinion lexicon TSV (default: model's lexicon)")
    p.add_argument("--fuzzy-config", help="fuzzy partitions/rules file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", action="store_true", help="fail on the first malformed corpus line")
    mode.add_argument("--lenient", dest="strict", action="store_false", help="skip malformed lines (default)")
    p.set_defaults(func=cmd_index, strict=False)

    def ranking_flags(p):
        p.add_argument("--k1", type=float, default=1.2)
        p.add_argument("--b", type=float, default=0.75)
        p.add_argument("--tier-mode", choices=[m.value for m in TierMode], default=TierMode.ALL.value)
        p.add_argument("--strength-tolerance", type=int, default=1, help="granularity levels counted as a strength match")

    p = sub.add_parser("query", parents=[common], help="rank indexed entities for a query")
    p.add_argument("index")
    p.add_argument("query", help="free text, or structured 'aspect:pos|neg|any[:granularity]' tokens")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--explain", action="store_true", help="show per-aspect match detail")
    p.add_argument("--porcelain", action="store_true", help="rank<TAB>entity<TAB>tier<TAB>score lines")
    p.add_argument("--baseline", action="store_true", help="BM25 only, tiers disabled")
    ranking_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", parents=[common], help="Precision@k / NDCG@k of the ranking, optionally against BM25 only")
    p.add_argument("index")
    p.add_argument("queries", help="query_id<TAB>query lines")
    p.add_argument("qrels", help="query_id entity_id grade lines")
    p.add_argument("--baseline", action="store_true", help="also score BM25-only ranking")
    p.add_argument("--k", default="1,3,5", help="comma-separated cutoffs")
    ranking_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fixture", parents=[common], help="print a bundled data file")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_fixture)

    if "verbose" in settings:
        parser.set_defaults(verbose=settings.pop("verbose"))
    for sp in sub.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in settings.items() if k in dests})
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config_path = _config_flag(argv)
        parser = build_parser(_read_cli_config(config_path) if config_path else None)
    except InputError as exc:
        print(f"opinrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args, out)
    except (
        InputError,
        FileNotFoundError,
        IsADirectoryError,
        CorpusFormatError,
        CrfFormatError,
        IndexFormatError,
        LexiconFormatError,
        ConfigFormatError,
        EvalFormatError,
        EmptyQueryError,
        UnicodeDecodeError,
    ) as exc:
        print(f"opinrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrainingDivergenceError as exc:
        print(f"opinrank: training failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"opinrank: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _config_flag(argv: list[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
