"""Statistical analyses over scored users.

Families implemented here: Pearson correlations with a Student-t
significance test, quartile polarity splits with tag contrasts,
categorical and boolean group means, binned trends, province
aggregation, and emoticon proportion contrasts (two-proportion z-test).

Everything is a pure function over immutable inputs with deterministic
ordering: ties break on ascending user_id, output rows carry a fixed
sort, and sums use math.fsum so results do not depend on numpy
reduction order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import fsum, sqrt
from typing import Mapping, Sequence

from .corpus import UserProfile
from .errors import StatsError
from .model import TRAITS, BigFive
from .special import normal_two_sided_p, student_t_two_sided_p

DEFAULT_ALPHA = 0.05
DEFAULT_QUANTILE = 0.25
DEFAULT_EMOTICON_MIN_COUNT = 500
LOW_SUPPORT_GROUP_SIZE = 5

# |r| at or above this is labeled a strong correlation in reports
STRONG_R = 0.2

# province-level divisions used to normalize free-text locations
PROVINCES = (
    "北京", "天津", "河北", "山西", "内蒙古",
    "辽宁", "吉林", "黑龙江",
    "上海", "江苏", "浙江", "安徽", "福建", "江西", "山东",
    "河南", "湖北", "湖南", "广东", "广西", "海南",
    "重庆", "四川", "贵州", "云南", "西藏",
    "陕西", "甘肃", "青海", "宁夏", "新疆",
    "台湾", "香港", "澳门",
)

# joined (profile, score) row used by the grouping analyses
ScoredUser = tuple[UserProfile, BigFive]


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, int]:
    """Pearson r with a two-tailed p from the Student-t transform.

    p comes from t = r sqrt((n-2)/(1-r^2)) under t with n-2 degrees of
    freedom. r is clamped to [-1, 1] against rounding; |r| = 1 yields
    p = 0. Constant input is a domain error: r is undefined there.
    """
    n = len(x)
    if len(y) != n:
        raise StatsError(f"length mismatch: {n} vs {len(y)}")
    if n < 3:
        raise StatsError(f"need at least 3 points, got {n}")
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    x_mean = fsum(xs) / n
    y_mean = fsum(ys) / n
    dx = [v - x_mean for v in xs]
    dy = [v - y_mean for v in ys]
    sxx = fsum(a * a for a in dx)
    syy = fsum(a * a for a in dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("correlation undefined for a constant vector")
    r = fsum(a * b for a, b in zip(dx, dy)) / sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return r, 0.0, n
    t = r * sqrt((n - 2) / (1.0 - r * r))
    return r, student_t_two_sided_p(t, n - 2), n


@dataclass(frozen=True)
class CorrelationResult:
    feature_name: str
    trait: str
    r: float | None  # None when either variable is constant
    p: float | None
    n: int
    significant: bool

    @property
    def strong(self) -> bool:
        return self.r is not None and abs(self.r) >= STRONG_R


def correlation_matrix(
    features: Sequence,  # FeatureVector
    scores: Sequence[tuple[str, BigFive]],
    alpha: float = DEFAULT_ALPHA,
) -> list[CorrelationResult]:
    """One result per (category, trait) pair over users present in both.

    Pairs where either side is constant across users are emitted with
    r and p undefined instead of being dropped.
    """
    score_by_id = dict(scores)
    joined = sorted(
        (fv for fv in features if fv.user_id in score_by_id),
        key=lambda fv: fv.user_id,
    )
    if len(joined) < 3:
        raise StatsError(f"need at least 3 joined users, got {len(joined)}")
    names = list(joined[0].freqs.keys())
    trait_cols = {
        trait: [score_by_id[fv.user_id].get(trait) for fv in joined] for trait in TRAITS
    }
    results = []
    n = len(joined)
    for name in names:
        col = [fv.freqs[name] for fv in joined]
        for trait in TRAITS:
            try:
                r, p, _ = pearson(col, trait_cols[trait])
            except StatsError:
                results.append(CorrelationResult(name, trait, None, None, n, False))
                continue
            results.append(CorrelationResult(name, trait, r, p, n, p < alpha))
    return results


@dataclass(frozen=True)
class PolaritySplit:
    trait: str
    high_ids: tuple[str, ...]  # sorted by user_id
    low_ids: tuple[str, ...]


def polarity_split(
    scores: Sequence[tuple[str, float]],
    quantile: float = DEFAULT_QUANTILE,
    trait: str = "",
) -> PolaritySplit:
    """Top and bottom floor(n * quantile) users on one dimension.

    Users are ordered by (score, user_id); the low group is the first k
    of that order and the high group the last k, so boundary ties
    resolve deterministically and the groups can never overlap.
    """
    if not 0.0 < quantile <= 0.5:
        raise StatsError(f"quantile must be in (0, 0.5], got {quantile}")
    n = len(scores)
    if n < 4:
        raise StatsError(f"need at least 4 users, got {n}")
    k = int(n * quantile)
    if k < 1:
        raise StatsError(f"n * quantile = {n * quantile} selects no users")
    ordered = sorted(scores, key=lambda pair: (pair[1], pair[0]))
    low = tuple(sorted(uid for uid, _ in ordered[:k]))
    high = tuple(sorted(uid for uid, _ in ordered[-k:]))
    return PolaritySplit(trait=trait, high_ids=high, low_ids=low)


@dataclass(frozen=True)
class TagContrast:
    trait: str
    high: tuple[tuple[str, float], ...]  # (tag, share of group carrying it)
    low: tuple[tuple[str, float], ...]


def tag_contrast(
    split: PolaritySplit,
    profiles: Sequence[UserProfile],
    top_k: int = 20,
) -> TagContrast:
    """Tag weights per polarity group, ranked for word-cloud rendering."""
    by_id = {p.user_id: p for p in profiles}
    missing = [uid for uid in (*split.high_ids, *split.low_ids) if uid not in by_id]
    if missing:
        raise StatsError(f"split user {missing[0]!r} has no profile")

    def ranked(ids: tuple[str, ...]) -> tuple[tuple[str, float], ...]:
        counts = Counter(tag for uid in ids for tag in by_id[uid].tags)
        size = len(ids)
        rows = sorted(
            ((tag, count / size) for tag, count in counts.items()),
            key=lambda row: (-row[1], row[0]),
        )
        return tuple(rows[:top_k])

    return TagContrast(trait=split.trait, high=ranked(split.high_ids), low=ranked(split.low_ids))


@dataclass(frozen=True)
class GroupRow:
    label: str
    count: int
    means: Mapping[str, float]
    low_support: bool


@dataclass(frozen=True)
class GroupMeans:
    grouping_name: str
    rows: tuple[GroupRow, ...]
    excluded_count: int


# grouping key -> (ordered labels, profile -> label or None when the
# attribute is missing for that user)
_GROUPERS = {
    "gender": (("male", "female"), lambda p: p.gender if p.gender != "unknown" else None),
    "verified": (("verified", "unverified"), lambda p: "verified" if p.verified else "unverified"),
    "education_shared": (("shared", "unknown"), lambda p: "shared" if p.schools else "unknown"),
    "introduction_shared": (("shared", "unknown"), lambda p: "shared" if p.introduction else "unknown"),
    "location_shared": (("shared", "unknown"), lambda p: "shared" if p.location else "unknown"),
}

GROUPING_KEYS = tuple(_GROUPERS)


def _trait_means(scores: list[BigFive]) -> dict[str, float]:
    n = len(scores)
    return {trait: fsum(s.get(trait) for s in scores) / n for trait in TRAITS}


def group_means(users: Sequence[ScoredUser], key: str) -> GroupMeans:
    """Per-group per-trait means for one of the supported groupings."""
    if key not in _GROUPERS:
        raise StatsError(f"unknown grouping {key!r}; supported: {', '.join(GROUPING_KEYS)}")
    labels, grouper = _GROUPERS[key]
    buckets: dict[str, list[BigFive]] = {label: [] for label in labels}
    excluded = 0
    for profile, score in users:
        label = grouper(profile)
        if label is None:
            excluded += 1
        else:
            buckets[label].append(score)
    if all(not members for members in buckets.values()):
        raise StatsError(f"grouping {key!r} is defined for no user")
    rows = []
    for label in labels:
        members = buckets[label]
        if not members:
            continue
        rows.append(
            GroupRow(
                label=label,
                count=len(members),
                means=_trait_means(members),
                low_support=len(members) < LOW_SUPPORT_GROUP_SIZE,
            )
        )
    return GroupMeans(grouping_name=key, rows=tuple(rows), excluded_count=excluded)


@dataclass(frozen=True)
class TrendRow:
    bin_label: str
    count: int
    means: Mapping[str, float]


@dataclass(frozen=True)
class TrendResult:
    binning: str
    rows: tuple[TrendRow, ...]
    excluded_count: int


DEFAULT_INTRO_BINS = ((1, 10), (11, 20), (21, 30), (31, 40), (41, 50), (51, 60), (61, 70))

BINNINGS = ("age_year", "school_count", "introduction_length")


def binned_trend(
    users: Sequence[ScoredUser],
    binning: str,
    bin_spec: Sequence[tuple[int, int]] | None = None,
) -> TrendResult:
    """Mean scores per bin, ascending bin order, empty bins omitted.

    age_year bins on each integer age, school_count on the number of
    schools shared, introduction_length on configurable inclusive
    character ranges (users without an introduction are excluded and
    counted).
    """
    if binning not in BINNINGS:
        raise StatsError(f"unknown binning {binning!r}; supported: {', '.join(BINNINGS)}")
    buckets: dict[tuple[int, str], list[BigFive]] = {}
    excluded = 0

    if binning == "introduction_length":
        bins = tuple(bin_spec) if bin_spec is not None else DEFAULT_INTRO_BINS
        for lo, hi in bins:
            if lo > hi:
                raise StatsError(f"bad introduction_length bin ({lo}, {hi})")
        for profile, score in users:
            if not profile.introduction:
                excluded += 1
                continue
            length = len(profile.introduction)
            for lo, hi in bins:
                if lo <= length <= hi:
                    buckets.setdefault((lo, f"{lo}-{hi}"), []).append(score)
                    break
            else:
                excluded += 1
    elif binning == "age_year":
        for profile, score in users:
            if profile.age is None:
                excluded += 1
            else:
                buckets.setdefault((profile.age, str(profile.age)), []).append(score)
    else:  # school_count
        for profile, score in users:
            count = len(profile.schools)
            buckets.setdefault((count, str(count)), []).append(score)

    rows = tuple(
        TrendRow(bin_label=label, count=len(members), means=_trait_means(members))
        for (_, label), members in sorted(buckets.items())
    )
    return TrendResult(binning=binning, rows=rows, excluded_count=excluded)


@dataclass(frozen=True)
class ProvinceRow:
    province: str
    count: int
    means: Mapping[str, float]


def normalize_province(location: str | None) -> str:
    """Map a free-text location to a province by prefix, else 'unknown'."""
    if location:
        stripped = location.strip()
        for province in PROVINCES:
            if stripped.startswith(province):
                return province
    return "unknown"


def province_aggregate(users: Sequence[ScoredUser]) -> list[ProvinceRow]:
    """Choropleth-ready per-province mean scores; 'unknown' always last."""
    buckets: dict[str, list[BigFive]] = {}
    for profile, score in users:
        buckets.setdefault(normalize_province(profile.location), []).append(score)
    rows = [
        ProvinceRow(province=name, count=len(buckets[name]), means=_trait_means(buckets[name]))
        for name in PROVINCES
        if name in buckets
    ]
    unknown = buckets.get("unknown", [])
    rows.append(
        ProvinceRow(
            province="unknown",
            count=len(unknown),
            means=_trait_means(unknown) if unknown else {t: 0.0 for t in TRAITS},
        )
    )
    return rows


@dataclass(frozen=True)
class EmoticonRow:
    emoticon: str
    high_count: int
    low_count: int
    high_proportion: float
    low_proportion: float
    p: float
    significant: bool


@dataclass(frozen=True)
class EmoticonContrast:
    trait: str
    rows: tuple[EmoticonRow, ...]
    warning: str | None = None


def two_proportion_z_p(x1: int, n1: int, x2: int, n2: int) -> float:
    """Two-tailed pooled z-test p-value for proportions x1/n1 vs x2/n2."""
    if n1 <= 0 or n2 <= 0:
        raise StatsError("group totals must be positive")
    pooled = (x1 + x2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return 1.0
    z = (x1 / n1 - x2 / n2) / sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    return normal_two_sided_p(z)


def emoticon_contrast(
    split: PolaritySplit,
    emoticon_usage: Mapping[str, Mapping[str, int]],
    min_count: int = DEFAULT_EMOTICON_MIN_COUNT,
    alpha: float = DEFAULT_ALPHA,
) -> EmoticonContrast:
    """Usage-share contrast between polarity groups.

    Only emoticons whose corpus-wide count exceeds min_count qualify.
    Proportions are normalized by each group's total emoticon
    occurrences. Rows are sorted by |high - low| share descending and
    all retained; the significant flag records the z-test outcome.
    """
    if min_count < 0:
        raise StatsError("min_count must be >= 0")
    corpus_totals: Counter[str] = Counter()
    for counts in emoticon_usage.values():
        corpus_totals.update(counts)
    qualifying = sorted(e for e, c in corpus_totals.items() if c > min_count)

    def group_counts(ids: tuple[str, ...]) -> Counter[str]:
        totals: Counter[str] = Counter()
        for uid in ids:
            totals.update(emoticon_usage.get(uid, {}))
        return totals

    high_counts = group_counts(split.high_ids)
    low_counts = group_counts(split.low_ids)
    high_total = sum(high_counts.values())
    low_total = sum(low_counts.values())
    if high_total == 0 or low_total == 0:
        side = "high" if high_total == 0 else "low"
        return EmoticonContrast(
            trait=split.trait,
            rows=(),
            warning=f"{side} group has zero emoticon usage; contrast is empty",
        )

    rows = []
    for emoticon in qualifying:
        x_high = high_counts.get(emoticon, 0)
        x_low = low_counts.get(emoticon, 0)
        p_high = x_high / high_total
        p_low = x_low / low_total
        if x_high + x_low == 0:
            p_value = 1.0
        else:
            p_value = two_proportion_z_p(x_high, high_total, x_low, low_total)
        rows.append(
            EmoticonRow(
                emoticon=emoticon,
                high_count=x_high,
                low_count=x_low,
                high_proportion=p_high,
                low_proportion=p_low,
                p=p_value,
                significant=p_value < alpha,
            )
        )
    rows.sort(key=lambda row: (-abs(row.high_proportion - row.low_proportion), row.emoticon))
    return EmoticonContrast(trait=split.trait, rows=tuple(rows))
