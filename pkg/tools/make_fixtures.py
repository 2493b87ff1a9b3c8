#!/usr/bin/env python3
"""Regenerate the bundled fixture data and the frozen golden files.

Deterministic: rerunning produces byte-identical output. Run from the
repository root after changing the fixture lexicon or the generator:

    python tools/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from textpersona import cleaner, corpus, lexicon, model, report, segmenter, synth  # noqa: E402

DATA = ROOT / "src" / "textpersona" / "data"
FIXTURE = DATA / "fixture_corpus"
TESTDATA = ROOT / "tests" / "data"

REFERENCE_DATE = "2018-06-01"
N_USERS = 120
N_LABELED = 40


def write_word_list(lex) -> Path:
    words = {e.pattern for e in lex.entries}
    words.update(synth._FILLER_WORDS)
    words.update({"天气", "很好", "路上", "不用", "没有", "可以", "觉得"})
    words = {w for w in words if len(w) >= 1}
    path = DATA / "wordlist.txt"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# segmentation word list derived from the fixture dictionary\n")
        for word in sorted(words):
            fh.write(word + "\n")
    return path


def profile_record(p: corpus.UserProfile) -> dict:
    rec = {
        "user_id": p.user_id,
        "verified": p.verified,
        "follower_count": p.follower_count,
        "tags": list(p.tags),
        "schools": list(p.schools),
    }
    if p.gender == "male":
        rec["gender"] = "m"
    elif p.gender == "female":
        rec["gender"] = "f"
    if p.location is not None:
        rec["location"] = p.location
    if p.introduction is not None:
        rec["introduction"] = p.introduction
    if p.birth_date is not None:
        rec["birth_date"] = p.birth_date.isoformat()
    return rec


def main() -> None:
    FIXTURE.mkdir(parents=True, exist_ok=True)
    TESTDATA.mkdir(parents=True, exist_ok=True)

    lex = lexicon.parse_lexicon(DATA / "sc_liwc_fixture.dic")
    word_list_path = write_word_list(lex)

    corpus_data = synth.generate_scored_corpus(N_USERS, seed=7)
    ids = [p.user_id for p in corpus_data.profiles]
    word_pool = sorted({e.pattern for e in lex.entries if not e.wildcard})[:200]
    posts = synth.generate_posts(
        ids,
        seed=8,
        word_pool=tuple(word_pool) + synth._FILLER_WORDS,
        emoticon_usage=corpus_data.emoticon_usage,
    )

    with open(FIXTURE / "profiles.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus_data.profiles:
            fh.write(json.dumps(profile_record(p), ensure_ascii=False, sort_keys=True) + "\n")
    with open(FIXTURE / "posts.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for post in posts:
            fh.write(
                json.dumps(
                    {"user_id": post.user_id, "text": post.text, "is_repost": post.is_repost},
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )

    labeled = ids[:N_LABELED]
    labels = [(uid, corpus_data.scores[uid]) for uid in labeled]
    model.write_scores_csv(labels, FIXTURE / "labels.csv")

    # pipeline: clean -> segment -> featurize over the fixture posts
    cleaned, _ = cleaner.clean_corpus(posts, cleaner.DEFAULT_SPAM_KEYWORDS)
    words = segmenter.load_word_list(word_list_path)
    tokenized = segmenter.segment_corpus([(u, r.clean_text) for u, r in cleaned], words)
    tokens_by_user: dict[str, list[list[str]]] = {uid: [] for uid in ids}
    for uid, tokens in tokenized:
        tokens_by_user[uid].append(tokens)
    matcher = lexicon.compile_lexicon(lex)
    features = lexicon.featurize(tokens_by_user, matcher)

    mapping = model.fit(features, labels, ridge_lambda=1.0, category_names=lex.category_names)
    model.save_model(mapping, FIXTURE / "model.json")

    run_config = {
        "reference_date": REFERENCE_DATE,
        "profiles_path": "profiles.jsonl",
        "posts_path": "posts.jsonl",
        "lexicon_path": "../sc_liwc_fixture.dic",
        "word_list_path": "../wordlist.txt",
        "spam_keywords_path": "../spam_keywords.txt",
        "system_templates_path": "../system_templates.txt",
        "model_path": "model.json",
    }
    with open(FIXTURE / "run_config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(run_config, fh, indent=2, sort_keys=True)
        fh.write("\n")

    # frozen goldens for the test suite
    lexicon.write_features_csv(features, lex.category_names, TESTDATA / "features_golden.csv")
    scores, _ = model.predict(mapping, features)
    model.write_scores_csv(scores, TESTDATA / "scores_golden.csv")

    import datetime as dt

    validated, _, validity = corpus.validate_users(
        list(corpus_data.profiles),
        posts,
        min_followers=10,
        ad_url_patterns=("taobao",),
        reference_date=dt.date.fromisoformat(REFERENCE_DATE),
    )
    report.demographic_summary(validated).write_csv(TESTDATA / "demographics_golden.csv")

    emoticon_totals = Counter()
    for counts in corpus_data.emoticon_usage.values():
        emoticon_totals.update(counts)
    print(f"fixture corpus: {len(corpus_data.profiles)} profiles, {len(posts)} posts")
    print(f"validated: {validity.accepted}/{validity.total_users} accepted")
    print(f"labels: {len(labels)}; model K={len(mapping.category_names)}")
    print(f"emoticon occurrences: {sum(emoticon_totals.values())}")


if __name__ == "__main__":
    main()
