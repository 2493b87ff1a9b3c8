"""Statistics: oracle anchors, brute-force cross-checks, invariants."""

import math
from collections import Counter

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textpersona.corpus import UserProfile
from textpersona.errors import StatsError
from textpersona.model import BigFive
from textpersona.stats import (
    GROUPING_KEYS,
    PROVINCES,
    TRAITS,
    binned_trend,
    correlation_matrix,
    emoticon_contrast,
    group_means,
    normalize_province,
    pearson,
    polarity_split,
    province_aggregate,
    tag_contrast,
    two_proportion_z_p,
)
from textpersona.lexicon import FeatureVector

mpmath.mp.dps = 40


def oracle_pearson(x, y):
    """Arbitrary-precision r and p, fully independent of the package path."""
    n = len(x)
    xs = [mpmath.mpf(v) for v in x]
    ys = [mpmath.mpf(v) for v in y]
    xm = mpmath.fsum(xs) / n
    ym = mpmath.fsum(ys) / n
    sxy = mpmath.fsum((a - xm) * (b - ym) for a, b in zip(xs, ys))
    sxx = mpmath.fsum((a - xm) ** 2 for a in xs)
    syy = mpmath.fsum((b - ym) ** 2 for b in ys)
    r = sxy / mpmath.sqrt(sxx * syy)
    nu = n - 2
    if abs(r) >= 1:
        return float(r), 0.0
    xarg = nu / (nu + r * r * nu / (1 - r * r))
    p = mpmath.betainc(nu / 2, mpmath.mpf(1) / 2, 0, xarg, regularized=True)
    return float(r), float(p)


def test_perfect_linearity():
    r, p, n = pearson([1, 2, 3], [2, 4, 6])
    assert r == 1.0 and p == 0.0 and n == 3


def test_hand_computed_anchor():
    # cov=4, var_x=var_y=5 -> r = 4/5 exactly
    r, p, _ = pearson([1, 2, 3, 4], [1, 3, 2, 4])
    assert r == 0.8
    assert abs(p - 0.2) < 1e-12  # hand-checkable: I_x identity gives exactly 0.2


def test_p_anchor_r195_n102():
    """p for r=0.195, n=102, frozen from the quadrature/betainc oracle."""
    nu = 100
    t = 0.195 * math.sqrt(nu / (1 - 0.195**2))
    from textpersona.special import student_t_two_sided_p

    p = student_t_two_sided_p(t, nu)
    assert abs(p - 0.0495267404175) < 1e-10
    assert abs(p - 0.0496) < 5e-4


def test_constant_vector_domain_error():
    with pytest.raises(StatsError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatsError):
        pearson([1, 2, 3], [5, 5, 5])


def test_length_mismatch_and_short_input():
    with pytest.raises(StatsError):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(StatsError):
        pearson([1, 2], [1, 2])


def test_pearson_vs_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(3, 200))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + 0.5 * x
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        r, p, _ = pearson(x, y)
        r_ref, p_ref = oracle_pearson(x, y)
        assert abs(r - r_ref) < 1e-12
        assert abs(p - p_ref) < 1e-12


def test_pearson_affine_equivariance_exact():
    rng = np.random.default_rng(12)
    x = rng.normal(size=40)
    y = rng.normal(size=40)
    r, _, _ = pearson(x, y)
    for a, c in ((2.0, 3.0), (-1.0, 0.0), (0.5, -10.0)):
        r2, _, _ = pearson(a * x + c, y)
        assert abs(r2 - math.copysign(1.0, a) * r) < 1e-12


def test_pearson_symmetry():
    rng = np.random.default_rng(13)
    x = rng.normal(size=25)
    y = rng.normal(size=25)
    rxy, pxy, _ = pearson(x, y)
    ryx, pyx, _ = pearson(y, x)
    assert rxy == ryx and pxy == pyx


@given(st.integers(min_value=5, max_value=200))
@settings(max_examples=50, deadline=None)
def test_p_monotone_in_abs_r(n):
    from textpersona.special import student_t_two_sided_p

    prev = 1.1
    for r in np.linspace(0.01, 0.99, 25):
        t = r * math.sqrt((n - 2) / (1 - r * r))
        p = student_t_two_sided_p(t, n - 2)
        assert p < prev
        prev = p


# ---------------------------------------------------------------- matrix


def b5(o=50.0, c=50.0, e=50.0, a=50.0, n=50.0):
    return BigFive(o, c, e, a, n)


def test_correlation_matrix_identical_feature_and_trait():
    rng = np.random.default_rng(1)
    features, scores = [], []
    for i in range(20):
        v = float(rng.uniform(0, 10))
        features.append(FeatureVector(f"u{i:02d}", {"X": v, "Const": 1.0}, 10))
        scores.append((f"u{i:02d}", b5(o=v)))
    results = correlation_matrix(features, scores)
    by_pair = {(r.feature_name, r.trait): r for r in results}
    assert by_pair[("X", "O")].r == 1.0
    assert by_pair[("X", "O")].significant
    # constant feature reported as undefined, not dropped
    assert by_pair[("Const", "O")].r is None
    assert by_pair[("Const", "O")].p is None
    assert not by_pair[("Const", "O")].significant
    assert len(results) == 2 * 5


def test_correlation_matrix_planted_rho():
    rng = np.random.default_rng(2)
    n = 500
    x = rng.normal(size=n)
    noise = rng.normal(size=n)
    rho = 0.5
    y = rho * x + math.sqrt(1 - rho * rho) * noise
    features = [FeatureVector(f"u{i:03d}", {"F": float(x[i])}, 10) for i in range(n)]
    scores = [(f"u{i:03d}", b5(e=float(y[i]))) for i in range(n)]
    results = correlation_matrix(features, scores)
    r = next(res.r for res in results if res.feature_name == "F" and res.trait == "E")
    assert abs(r - rho) < 0.1


def test_correlation_matrix_requires_three_joined():
    features = [FeatureVector("a", {"F": 1.0}, 5), FeatureVector("b", {"F": 2.0}, 5)]
    with pytest.raises(StatsError):
        correlation_matrix(features, [("a", b5()), ("b", b5())])


# ---------------------------------------------------------------- split


def test_polarity_split_sizes():
    scores = [(f"u{i}", float(i)) for i in range(8)]
    split = polarity_split(scores, 0.25)
    assert len(split.high_ids) == 2 and len(split.low_ids) == 2
    assert set(split.high_ids) == {"u6", "u7"}
    assert set(split.low_ids) == {"u0", "u1"}


def test_polarity_split_all_ties_break_on_user_id():
    scores = [(f"u{i}", 5.0) for i in range(8)]
    split = polarity_split(scores, 0.25)
    assert split.low_ids == ("u0", "u1")
    assert split.high_ids == ("u6", "u7")
    assert not set(split.high_ids) & set(split.low_ids)


def test_polarity_split_paper_scale_arithmetic():
    scores = [(f"u{i:05d}", float(i % 97)) for i in range(6467)]
    split = polarity_split(scores, 0.25)
    assert len(split.high_ids) == 1616 and len(split.low_ids) == 1616


def test_polarity_split_boundary_invariants():
    rng = np.random.default_rng(3)
    values = [float(v) for v in rng.integers(0, 5, size=40)]
    scores = [(f"u{i:02d}", values[i]) for i in range(40)]
    split = polarity_split(scores, 0.25)
    by_id = dict(scores)
    high = [by_id[u] for u in split.high_ids]
    low = [by_id[u] for u in split.low_ids]
    rest_high = [by_id[u] for u in by_id if u not in split.high_ids]
    rest_low = [by_id[u] for u in by_id if u not in split.low_ids]
    assert min(high) >= max(rest_high)
    assert max(low) <= min(rest_low)


def test_polarity_split_domain_errors():
    with pytest.raises(StatsError):
        polarity_split([("a", 1.0)] * 3, 0.25)
    with pytest.raises(StatsError):
        polarity_split([(f"u{i}", float(i)) for i in range(5)], 0.1)  # floor(0.5) = 0
    with pytest.raises(StatsError):
        polarity_split([(f"u{i}", float(i)) for i in range(8)], 0.7)


# ---------------------------------------------------------------- tags


def prof(uid, **kw):
    return UserProfile(uid, **kw)


def test_tag_contrast_unanimous_tag_ranks_first():
    profiles = [prof(f"u{i}", tags=("Music",) if i >= 4 else ()) for i in range(8)]
    split = polarity_split([(f"u{i}", float(i)) for i in range(8)], 0.5)
    contrast = tag_contrast(split, profiles, top_k=5)
    assert contrast.high[0] == ("Music", 1.0)
    assert contrast.low == ()  # tag carried by nobody in the low group


def test_tag_contrast_missing_profile_fatal():
    split = polarity_split([(f"u{i}", float(i)) for i in range(4)], 0.25)
    with pytest.raises(StatsError, match="u3"):
        tag_contrast(split, [prof("u0")], top_k=3)


def test_tag_contrast_planted_association():
    rng = np.random.default_rng(4)
    n = 400
    scores = []
    profiles = []
    for i in range(n):
        uid = f"u{i:03d}"
        score = float(rng.normal(50, 10))
        scores.append((uid, score))
    ranked = sorted(scores, key=lambda t: -t[1])
    high_ids = {uid for uid, _ in ranked[: n // 4]}
    for uid, _ in scores:
        tags = []
        if uid in high_ids:
            if rng.uniform() < 0.8:
                tags.append("Sleep")
        elif rng.uniform() < 0.05:
            tags.append("Sleep")
        if rng.uniform() < 0.4:
            tags.append("Music")
        profiles.append(prof(uid, tags=tuple(tags)))
    split = polarity_split(scores, 0.25, trait="N")
    contrast = tag_contrast(split, profiles, top_k=10)
    assert contrast.high[0][0] == "Sleep"


# ---------------------------------------------------------------- groups


def test_group_means_single_user_groups():
    users = [
        (prof("u1", gender="male"), b5(o=40)),
        (prof("u2", gender="female"), b5(o=60)),
    ]
    result = group_means(users, "gender")
    rows = {row.label: row for row in result.rows}
    assert rows["male"].means["O"] == 40.0
    assert rows["female"].means["O"] == 60.0
    assert rows["male"].low_support and rows["female"].low_support
    assert result.excluded_count == 0


def test_group_means_excludes_unknown_gender():
    users = [
        (prof("u1", gender="male"), b5()),
        (prof("u2"), b5()),
    ]
    result = group_means(users, "gender")
    assert result.excluded_count == 1
    assert sum(row.count for row in result.rows) == 1


def test_group_means_unknown_key_lists_supported():
    with pytest.raises(StatsError, match="gender"):
        group_means([(prof("u1"), b5())], "zodiac")


def test_group_means_weighted_total_identity():
    rng = np.random.default_rng(5)
    users = []
    for i in range(50):
        users.append(
            (
                prof(f"u{i:02d}", verified=bool(rng.integers(0, 2))),
                b5(*(float(v) for v in rng.normal(50, 10, size=5))),
            )
        )
    result = group_means(users, "verified")
    for t_idx, trait in enumerate(TRAITS):
        weighted = sum(row.count * row.means[trait] for row in result.rows)
        total = sum(row.count for row in result.rows)
        overall = sum(u[1].as_tuple()[t_idx] for u in users) / len(users)
        assert abs(weighted / total - overall) < 1e-9


def test_group_means_planted_offset():
    rng = np.random.default_rng(6)
    users = []
    for i in range(600):
        verified = i % 4 == 0
        c = float(rng.normal(50, 10)) + (5.0 if verified else 0.0)
        users.append((prof(f"u{i:03d}", verified=verified), b5(c=c)))
    result = group_means(users, "verified")
    rows = {row.label: row for row in result.rows}
    diff = rows["verified"].means["C"] - rows["unverified"].means["C"]
    assert abs(diff - 5.0) < 2.0  # ~2 standard errors at these sizes


def test_all_grouping_keys_work():
    users = [
        (
            prof(
                "u1",
                gender="female",
                verified=True,
                schools=("a",),
                introduction="hi",
                location="北京",
            ),
            b5(),
        ),
        (prof("u2", gender="male"), b5()),
    ]
    for key in GROUPING_KEYS:
        result = group_means(users, key)
        assert sum(row.count for row in result.rows) + result.excluded_count == 2


# ---------------------------------------------------------------- trends


def test_binned_trend_age_rows():
    users = [
        (prof("u1", age=20), b5(o=40)),
        (prof("u2", age=30), b5(o=60)),
        (prof("u3"), b5(o=99)),
    ]
    trend = binned_trend(users, "age_year")
    assert [row.bin_label for row in trend.rows] == ["20", "30"]
    assert trend.excluded_count == 1


def test_binned_trend_school_count_monotone_planted():
    rng = np.random.default_rng(7)
    users = []
    for i in range(1400):
        s = i % 7
        c = 40.0 + 2.0 * s + float(rng.normal(0, 3))
        users.append((prof(f"u{i:04d}", schools=tuple(f"s{j}" for j in range(s))), b5(c=c)))
    trend = binned_trend(users, "school_count")
    means = [row.means["C"] for row in trend.rows]
    assert [row.bin_label for row in trend.rows] == [str(s) for s in range(7)]
    assert all(a < b for a, b in zip(means, means[1:]))


def test_binned_trend_introduction_length():
    users = [
        (prof("u1", introduction="一二三"), b5(o=10)),
        (prof("u2", introduction="四" * 15), b5(o=20)),
        (prof("u3"), b5(o=99)),  # absent: excluded here
    ]
    trend = binned_trend(users, "introduction_length")
    assert [row.bin_label for row in trend.rows] == ["1-10", "11-20"]
    assert trend.excluded_count == 1
    # same user 3 still counts in introduction_shared group means
    gm = group_means(users, "introduction_shared")
    assert {row.label: row.count for row in gm.rows} == {"shared": 2, "unknown": 1}


def test_binned_trend_bad_binning():
    with pytest.raises(StatsError):
        binned_trend([(prof("u1"), b5())], "shoe_size")


# ---------------------------------------------------------------- provinces


def test_normalize_province_prefix():
    assert normalize_province("广东 深圳") == "广东"
    assert normalize_province("北京") == "北京"
    assert normalize_province("火星") == "unknown"
    assert normalize_province(None) == "unknown"


def test_province_aggregate_single_province():
    users = [(prof(f"u{i}", location="广东 深圳"), b5(n=60)) for i in range(3)]
    rows = province_aggregate(users)
    assert rows[0].province == "广东" and rows[0].count == 3
    assert rows[-1].province == "unknown" and rows[-1].count == 0
    assert len(rows) == 2


def test_province_aggregate_planted_offsets():
    rng = np.random.default_rng(8)
    users = []
    for i in range(900):
        province = PROVINCES[i % len(PROVINCES)]
        n_score = float(rng.normal(50, 5))
        if province in ("广东", "浙江"):
            n_score += 8.0
        users.append((prof(f"u{i:03d}", location=province), b5(n=n_score)))
    rows = province_aggregate(users)
    named = [row for row in rows if row.province != "unknown"]
    top2 = sorted(named, key=lambda row: -row.means["N"])[:2]
    assert {row.province for row in top2} == {"广东", "浙江"}


# ---------------------------------------------------------------- emoticons


def usage_map(rows):
    return {uid: dict(counts) for uid, counts in rows.items()}


def test_emoticon_contrast_one_sided_usage():
    scores = [(f"u{i}", float(i)) for i in range(8)]
    split = polarity_split(scores, 0.25, trait="O")
    usage = {uid: {} for uid, _ in scores}
    for uid in split.high_ids:
        usage[uid] = {"[月亮]": 10, "[心]": 5}
    for uid in split.low_ids:
        usage[uid] = {"[心]": 15}
    contrast = emoticon_contrast(split, usage, min_count=0)
    rows = {row.emoticon: row for row in contrast.rows}
    assert rows["[月亮]"].low_proportion == 0.0
    assert rows["[月亮]"].high_count == 20


def test_emoticon_contrast_identical_distributions():
    scores = [(f"u{i}", float(i)) for i in range(8)]
    split = polarity_split(scores, 0.25, trait="O")
    usage = {uid: {"[心]": 4, "[doge]": 6} for uid, _ in scores}
    contrast = emoticon_contrast(split, usage, min_count=0)
    for row in contrast.rows:
        assert row.high_proportion == row.low_proportion
        assert not row.significant


def test_emoticon_contrast_min_count_filter():
    scores = [(f"u{i}", float(i)) for i in range(8)]
    split = polarity_split(scores, 0.25, trait="O")
    usage = {uid: {"rare": 1, "common": 100} for uid, _ in scores}
    contrast = emoticon_contrast(split, usage, min_count=500)
    assert [row.emoticon for row in contrast.rows] == ["common"]


def test_emoticon_contrast_empty_group_warns():
    scores = [(f"u{i}", float(i)) for i in range(8)]
    split = polarity_split(scores, 0.25, trait="O")
    usage = {uid: ({"[心]": 3} if uid in split.low_ids else {}) for uid, _ in scores}
    contrast = emoticon_contrast(split, usage, min_count=0)
    assert contrast.rows == ()
    assert "high" in contrast.warning


def test_emoticon_contrast_planted_rate():
    rng = np.random.default_rng(9)
    n = 1600
    scores = [(f"u{i:04d}", float(rng.normal(50, 10))) for i in range(n)]
    split = polarity_split(scores, 0.25, trait="O")
    high = set(split.high_ids)
    usage = {}
    for uid, _ in scores:
        lam = 3.0 if uid in high else 1.0
        usage[uid] = {
            "[月亮]": int(rng.poisson(lam)),
            "[心]": int(rng.poisson(2.0)),
            "[doge]": int(rng.poisson(2.0)),
        }
    contrast = emoticon_contrast(split, usage, min_count=500)
    assert contrast.rows[0].emoticon == "[月亮]"
    assert contrast.rows[0].p < 0.05 and contrast.rows[0].significant


def test_two_proportion_z_against_scipy():
    from scipy import stats as sp_stats

    cases = [(30, 100, 10, 80), (5, 50, 5, 50), (0, 40, 3, 60), (25, 60, 24, 61)]
    for x1, n1, x2, n2 in cases:
        p = two_proportion_z_p(x1, n1, x2, n2)
        pooled = (x1 + x2) / (n1 + n2)
        if pooled in (0, 1):
            continue
        z = (x1 / n1 - x2 / n2) / math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
        ref = 2 * float(sp_stats.norm.sf(abs(z)))
        assert abs(p - ref) < 1e-12


# ------------------------------------------------- brute-force oracle


def test_small_corpus_matches_naive_oracle():
    """Every statistic vs a naive reimplementation on <= 50 users."""
    rng = np.random.default_rng(10)
    users = []
    scores_by_id = {}
    for i in range(50):
        uid = f"u{i:02d}"
        score = b5(*(float(v) for v in rng.normal(50, 10, size=5)))
        profile = prof(
            uid,
            gender=["male", "female", "unknown"][int(rng.integers(0, 3))],
            verified=bool(rng.integers(0, 2)),
            age=int(rng.integers(10, 48)) if rng.uniform() < 0.8 else None,
            tags=tuple(t for t in ("A", "B", "C") if rng.uniform() < 0.5),
            location=str(PROVINCES[int(rng.integers(0, 5))]) if rng.uniform() < 0.7 else None,
            schools=tuple(f"s{k}" for k in range(int(rng.integers(0, 4)))),
            introduction="x" * int(rng.integers(1, 70)) if rng.uniform() < 0.6 else None,
        )
        users.append((profile, score))
        scores_by_id[uid] = score

    # group means vs naive
    for key, getter in [
        ("verified", lambda p: "verified" if p.verified else "unverified"),
        ("gender", lambda p: p.gender if p.gender != "unknown" else None),
    ]:
        result = group_means(users, key)
        for row in result.rows:
            members = [s for p, s in users if getter(p) == row.label]
            assert row.count == len(members)
            for t_idx, trait in enumerate(TRAITS):
                naive = sum(m.as_tuple()[t_idx] for m in members) / len(members)
                assert abs(row.means[trait] - naive) < 1e-10

    # age trend vs naive
    trend = binned_trend(users, "age_year")
    for row in trend.rows:
        members = [s for p, s in users if p.age is not None and str(p.age) == row.bin_label]
        assert row.count == len(members)
        naive = sum(m.o for m in members) / len(members)
        assert abs(row.means["O"] - naive) < 1e-10

    # polarity split vs naive sort
    pairs = [(uid, scores_by_id[uid].n) for uid in scores_by_id]
    split = polarity_split(pairs, 0.25)
    naive_order = sorted(pairs, key=lambda t: (t[1], t[0]))
    k = len(pairs) // 4
    assert set(split.low_ids) == {u for u, _ in naive_order[:k]}
    assert set(split.high_ids) == {u for u, _ in naive_order[-k:]}

    # province aggregation vs naive
    rows = province_aggregate(users)
    for row in rows:
        members = [s for p, s in users if normalize_province(p.location) == row.province]
        assert row.count == len(members)
        if members:
            naive = sum(m.n for m in members) / len(members)
            assert abs(row.means["N"] - naive) < 1e-10

    # correlation matrix vs direct pearson on each pair
    features = [
        FeatureVector(uid, {"F1": scores_by_id[uid].o * 0.5 + float(rng.normal()), "F2": float(rng.normal())}, 10)
        for uid in scores_by_id
    ]
    results = correlation_matrix(features, list(scores_by_id.items()))
    ordered_ids = sorted(scores_by_id)
    for res in results:
        if res.r is None:
            continue
        col = [next(f.freqs[res.feature_name] for f in features if f.user_id == uid) for uid in ordered_ids]
        tcol = [scores_by_id[uid].get(res.trait) for uid in ordered_ids]
        r_ref, p_ref = oracle_pearson(col, tcol)
        assert abs(res.r - r_ref) < 1e-10
        assert abs(res.p - p_ref) < 1e-10
