"""Stage-per-subcommand command line interface.

Each subcommand is a pure file transformation: declared inputs in,
declared outputs out, exit 0 on success. Exit codes: 1 usage error,
2 input format error, 3 pipeline/domain error. Failures print one
machine-parsable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from collections import Counter
from dataclasses import replace

from . import __version__
from . import cleaner as cleaner_mod
from . import corpus as corpus_mod
from . import lexicon as lexicon_mod
from . import model as model_mod
from . import report as report_mod
from . import segmenter as segmenter_mod
from . import stats as stats_mod
from .config import RunConfig, load_keyword_file
from .errors import InputFormatError, TextPersonaError
from .model import TRAITS

log = logging.getLogger("textpersona")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_PIPELINE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _date(value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="textpersona",
        description="Microblog text portrait pipeline, one stage per subcommand.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text):
        return sub.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )

    p = add("clean", "strip noise from raw posts and extract emoticons")
    p.add_argument("--posts", required=True, help="posts.jsonl input")
    p.add_argument("--out", required=True, help="cleaned.jsonl output")
    p.add_argument("--spam-keywords", default=None, help="spam keyword file (one per line)")
    p.add_argument("--templates", default=None, help="system template file (one per line)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_clean)

    p = add("segment", "tokenize cleaned text by forward maximum matching")
    p.add_argument("--cleaned", required=True, help="cleaned.jsonl input")
    p.add_argument("--words", required=True, help="word list file")
    p.add_argument("--out", required=True, help="tokens.jsonl output")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_segment)

    p = add("featurize", "compute per-user category frequency vectors")
    p.add_argument("--lexicon", required=True, help="category dictionary (.dic)")
    p.add_argument("--tokens", required=True, help="tokens.jsonl input")
    p.add_argument("--out", required=True, help="features.csv output")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_featurize)

    p = add("fit", "fit the frequency-to-score mapping matrix")
    p.add_argument("--features", required=True, help="features.csv input")
    p.add_argument("--labels", required=True, help="labels.csv input (user_id,O,C,E,A,N)")
    p.add_argument("--out", required=True, help="model.json output")
    p.add_argument("--ridge-lambda", type=float, default=1.0, help="ridge strength")
    p.set_defaults(func=cmd_fit)

    p = add("predict", "score users with a fitted model")
    p.add_argument("--model", required=True, help="model.json input")
    p.add_argument("--features", required=True, help="features.csv input")
    p.add_argument("--out", required=True, help="scores.csv output")
    p.set_defaults(func=cmd_predict)

    p = add("correlate", "category-by-trait correlation matrix with p-values")
    p.add_argument("--features", required=True, help="features.csv input")
    p.add_argument("--scores", required=True, help="scores.csv input")
    p.add_argument("--out-csv", required=True, help="correlations.csv output")
    p.add_argument("--out-json", default=None, help="optional JSON output")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.set_defaults(func=cmd_correlate)

    p = add("contrast", "tag weights for top/bottom quantile groups of one trait")
    p.add_argument("--scores", required=True, help="scores.csv input")
    p.add_argument("--profiles", required=True, help="profiles.jsonl input")
    p.add_argument("--trait", required=True, choices=TRAITS, help="trait dimension")
    p.add_argument("--out-csv", required=True, help="tag contrast CSV output")
    p.add_argument("--out-json", default=None, help="optional JSON output")
    p.add_argument("--quantile", type=float, default=0.25, help="polarity group share")
    p.add_argument("--top-k", type=int, default=20, help="rows per group")
    p.set_defaults(func=cmd_contrast)

    p = add("demographics", "population summary table from profiles")
    p.add_argument("--profiles", required=True, help="profiles.jsonl input")
    p.add_argument(
        "--reference-date",
        type=_date,
        required=True,
        help="date ages are computed against (ISO)",
    )
    p.add_argument("--out-csv", required=True, help="demographics.csv output")
    p.add_argument("--out-json", default=None, help="optional JSON output")
    p.add_argument("--min-age", type=int, default=10, help="lowest credible age")
    p.add_argument("--max-age", type=int, default=47, help="highest credible age")
    p.set_defaults(func=cmd_demographics)

    p = add("emoticons", "emoticon usage contrast between polarity groups")
    p.add_argument("--cleaned", required=True, help="cleaned.jsonl input")
    p.add_argument("--scores", required=True, help="scores.csv input")
    p.add_argument("--trait", required=True, choices=TRAITS, help="trait dimension")
    p.add_argument("--out-csv", required=True, help="emoticon contrast CSV output")
    p.add_argument("--out-json", default=None, help="optional JSON output")
    p.add_argument("--min-count", type=int, default=500, help="corpus-wide usage floor")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument("--quantile", type=float, default=0.25, help="polarity group share")
    p.set_defaults(func=cmd_emoticons)

    p = add("report", "run the whole pipeline and write an artifact bundle")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out-dir", required=True, help="bundle output directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_report)

    return parser


def _read_cleaned(path) -> list[tuple[str, cleaner_mod.CleanResult]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                rows.append(
                    (
                        rec["user_id"],
                        cleaner_mod.CleanResult(
                            clean_text=rec["clean_text"],
                            emoticons=tuple(rec["emoticons"]),
                            dropped=False,
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as err:
                raise InputFormatError(f"{path} line {line_no}: {err}") from err
    return rows


def cmd_clean(args) -> int:
    posts, malformed = corpus_mod.load_posts(args.posts)
    spam = (
        load_keyword_file(args.spam_keywords)
        if args.spam_keywords
        else cleaner_mod.DEFAULT_SPAM_KEYWORDS
    )
    templates = (
        load_keyword_file(args.templates)
        if args.templates
        else cleaner_mod.DEFAULT_SYSTEM_TEMPLATES
    )
    cleaned, dropped = cleaner_mod.clean_corpus(
        posts, spam, system_templates=templates, threads=args.threads
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for user_id, res in cleaned:
            fh.write(
                json.dumps(
                    {
                        "user_id": user_id,
                        "clean_text": res.clean_text,
                        "emoticons": list(res.emoticons),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    log.info(
        "clean: %d posts in, %d kept, %d dropped, %d malformed lines",
        len(posts), len(cleaned), dropped, malformed,
    )
    return EXIT_OK


def cmd_segment(args) -> int:
    cleaned = _read_cleaned(args.cleaned)
    word_list = segmenter_mod.load_word_list(args.words)
    tokenized = segmenter_mod.segment_corpus(
        [(uid, res.clean_text) for uid, res in cleaned], word_list, threads=args.threads
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for user_id, tokens in tokenized:
            fh.write(
                json.dumps({"user_id": user_id, "tokens": tokens}, ensure_ascii=False, sort_keys=True)
                + "\n"
            )
    log.info("segment: %d posts tokenized", len(tokenized))
    return EXIT_OK


def _read_tokens(path) -> dict[str, list[list[str]]]:
    by_user: dict[str, list[list[str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                by_user.setdefault(rec["user_id"], []).append(list(rec["tokens"]))
            except (json.JSONDecodeError, KeyError, TypeError) as err:
                raise InputFormatError(f"{path} line {line_no}: {err}") from err
    return by_user


def cmd_featurize(args) -> int:
    lexicon = lexicon_mod.parse_lexicon(args.lexicon)
    matcher = lexicon_mod.compile_lexicon(lexicon)
    tokens_by_user = _read_tokens(args.tokens)
    features = lexicon_mod.featurize(tokens_by_user, matcher, threads=args.threads)
    lexicon_mod.write_features_csv(features, lexicon.category_names, args.out)
    log.info("featurize: %d users, %d categories", len(features), len(lexicon.category_names))
    return EXIT_OK


def cmd_fit(args) -> int:
    features, names = lexicon_mod.read_features_csv(args.features)
    labels = model_mod.read_labels_csv(args.labels)
    mapping = model_mod.fit(features, labels, args.ridge_lambda, category_names=names)
    model_mod.save_model(mapping, args.out)
    log.info("fit: n=%d, K=%d, lambda=%g", mapping.n_train, len(names), mapping.ridge_lambda)
    return EXIT_OK


def cmd_predict(args) -> int:
    mapping = model_mod.load_model(args.model)
    features, _ = lexicon_mod.read_features_csv(args.features)
    scores, skipped = model_mod.predict(mapping, features)
    model_mod.write_scores_csv(scores, args.out)
    log.info("predict: %d scored, %d degenerate skipped", len(scores), len(skipped))
    return EXIT_OK


def cmd_correlate(args) -> int:
    features, _ = lexicon_mod.read_features_csv(args.features)
    scores = model_mod.read_scores_csv(args.scores)
    results = stats_mod.correlation_matrix(features, scores, args.alpha)
    table = report_mod.correlations_table(results)
    table.write_csv(args.out_csv)
    if args.out_json:
        table.write_json(args.out_json)
    log.info("correlate: %d pairs", len(results))
    return EXIT_OK


def cmd_contrast(args) -> int:
    scores = model_mod.read_scores_csv(args.scores)
    profiles, _ = corpus_mod.load_profiles(args.profiles)
    split = stats_mod.polarity_split(
        [(uid, score.get(args.trait)) for uid, score in scores],
        args.quantile,
        trait=args.trait,
    )
    contrast = stats_mod.tag_contrast(split, profiles, args.top_k)
    table = report_mod.tag_contrast_table([contrast])
    table.write_csv(args.out_csv)
    if args.out_json:
        table.write_json(args.out_json)
    log.info("contrast: trait %s, groups of %d", args.trait, len(split.high_ids))
    return EXIT_OK


def cmd_demographics(args) -> int:
    profiles, _ = corpus_mod.load_profiles(args.profiles)
    aged = []
    for profile in profiles:
        age = None
        if profile.birth_date is not None:
            try:
                computed = corpus_mod.compute_age(profile.birth_date, args.reference_date)
            except ValueError:
                computed = None
            if computed is not None and args.min_age <= computed <= args.max_age:
                age = computed
        aged.append(replace(profile, age=age))
    table = report_mod.demographic_summary(aged)
    table.write_csv(args.out_csv)
    if args.out_json:
        table.write_json(args.out_json)
    log.info("demographics: %d profiles", len(profiles))
    return EXIT_OK


def cmd_emoticons(args) -> int:
    cleaned = _read_cleaned(args.cleaned)
    scores = model_mod.read_scores_csv(args.scores)
    usage: dict[str, dict[str, int]] = {}
    for user_id, res in cleaned:
        if res.emoticons:
            bucket = usage.setdefault(user_id, {})
            for emoticon, count in Counter(res.emoticons).items():
                bucket[emoticon] = bucket.get(emoticon, 0) + count
    split = stats_mod.polarity_split(
        [(uid, score.get(args.trait)) for uid, score in scores],
        args.quantile,
        trait=args.trait,
    )
    contrast = stats_mod.emoticon_contrast(split, usage, args.min_count, args.alpha)
    if contrast.warning:
        log.warning("emoticons: %s", contrast.warning)
    table = report_mod.emoticons_table([contrast])
    table.write_csv(args.out_csv)
    if args.out_json:
        table.write_json(args.out_json)
    log.info("emoticons: trait %s, %d qualifying", args.trait, len(contrast.rows))
    return EXIT_OK


def cmd_report(args) -> int:
    config = RunConfig.from_file(args.config)
    bundle = report_mod.build_bundle(config, args.out_dir, threads=args.threads)
    log.info("report: %d artifacts in %s", len(bundle.artifacts), bundle.out_dir)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(json.dumps({"error": str(err), "exit_code": EXIT_USAGE}), file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except InputFormatError as err:
        print(json.dumps({"error": str(err), "exit_code": EXIT_FORMAT}, ensure_ascii=False), file=sys.stderr)
        return EXIT_FORMAT
    except (TextPersonaError, OSError, ValueError) as err:
        print(json.dumps({"error": str(err), "exit_code": EXIT_PIPELINE}, ensure_ascii=False), file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
