"""Microblog text cleaning and emoticon extraction.

Rule order, applied once per post:

1. Spam check on the raw text (case-insensitive substring against the
   spam keyword list). A hit drops the whole post.
2. System-message check on the raw text (substring against the template
   list, e.g. the deleted-post notice). A hit drops the whole post.
3. In-place removals: reply/repost marker words, geo-location markup,
   URLs (scheme through the next whitespace), @mentions, paired #...#
   hashtags including content.
4. Emoticon extraction: bracketed emote names like "[心]" and Unicode
   emoji codepoints are collected in order of appearance and removed.
5. Whitespace runs collapse to a single space; ends are trimmed.

Marker words are removed before URL/mention/hashtag patterns so that a
removal can never splice together a new URL that would survive the pass;
this keeps clean() idempotent on its own output.

An unpaired "#" is left alone (only #...# pairs are hashtags), and a "["
with no "]" within 20 characters is literal text, not an emoticon.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import partial
from typing import Iterable, Sequence

from .corpus import Post
from ._pool import parallel_map

DEFAULT_SPAM_KEYWORDS = ("淘宝", "taobao", "代购", "优惠券", "加微信")

DEFAULT_SYSTEM_TEMPLATES = (
    "抱歉，此微博已被删除",
    "抱歉，该微博已被作者删除",
    "此微博不适宜对外公开",
    "微博官方认证通知",
)

DEFAULT_MARKER_WORDS = ("转发微博", "回复")

_URL_RE = re.compile(r"https?://\S+")
# \w is Unicode-aware, so CJK user names are covered
_MENTION_RE = re.compile(r"@[\w·\-]+")
_HASHTAG_RE = re.compile(r"#[^#\n]*#")
_GEO_RE = re.compile(r"我在这里[:：]?")
_WS_RE = re.compile(r"\s+")

_BRACKET_EMOTE = r"\[[^\[\]\s]{1,20}\]"
_EMOJI = (
    "["
    "☀-➿"  # misc symbols, dingbats
    "⭐⭕"
    "\U0001f300-\U0001f5ff"
    "\U0001f600-\U0001f64f"
    "\U0001f680-\U0001f6ff"
    "\U0001f900-\U0001f9ff"
    "\U0001fa70-\U0001faff"
    "]️?"
)
_EMOTICON_RE = re.compile(f"(?:{_BRACKET_EMOTE})|(?:{_EMOJI})")


@dataclass(frozen=True)
class CleanResult:
    """Outcome of cleaning one post.

    dropped=True means the post was system-generated or spam; in that
    case clean_text is empty and no emoticons are reported.
    """

    clean_text: str
    emoticons: tuple[str, ...]
    dropped: bool


_DROPPED = CleanResult("", (), True)


def clean(
    text: str,
    spam_keywords: Sequence[str],
    *,
    system_templates: Sequence[str] = DEFAULT_SYSTEM_TEMPLATES,
    marker_words: Sequence[str] = DEFAULT_MARKER_WORDS,
) -> CleanResult:
    """Apply the cleaning rules to one raw post."""
    lowered = text.lower()
    for keyword in spam_keywords:
        if keyword.lower() in lowered:
            return _DROPPED
    for template in system_templates:
        if template in text:
            return _DROPPED

    s = text
    for marker in marker_words:
        s = s.replace(marker, " ")
    s = _GEO_RE.sub(" ", s)
    s = _URL_RE.sub(" ", s)
    s = _MENTION_RE.sub(" ", s)
    s = _HASHTAG_RE.sub(" ", s)

    emoticons = tuple(_EMOTICON_RE.findall(s))
    if emoticons:
        s = _EMOTICON_RE.sub(" ", s)

    s = _WS_RE.sub(" ", s).strip()
    return CleanResult(s, emoticons, False)


def clean_corpus(
    posts: Iterable[Post],
    spam_keywords: Sequence[str],
    *,
    system_templates: Sequence[str] = DEFAULT_SYSTEM_TEMPLATES,
    marker_words: Sequence[str] = DEFAULT_MARKER_WORDS,
    threads: int = 1,
) -> tuple[list[tuple[str, CleanResult]], int]:
    """Clean every post, preserving order; dropped posts are counted out.

    Returns (kept results keyed by user_id, drop count). Posts that clean
    to an empty string but were not spam/system posts are kept: their
    emoticons still matter to the emoticon analyses.
    """
    posts = list(posts)
    fn = partial(
        clean,
        spam_keywords=tuple(spam_keywords),
        system_templates=tuple(system_templates),
        marker_words=tuple(marker_words),
    )
    results = parallel_map(fn, [p.text for p in posts], threads=threads)
    kept: list[tuple[str, CleanResult]] = []
    drop_count = 0
    for post, result in zip(posts, results):
        if result.dropped:
            drop_count += 1
        else:
            kept.append((post.user_id, result))
    return kept, drop_count
