"""Linear mapping from category frequencies to Big Five scores.

The estimator is multi-output least squares with a ridge penalty on the
weight matrix and an unpenalized intercept:

    minimize  sum_i ||y_i - (x_i W + b)||^2  +  lambda ||W||_F^2

Centering the design and the labels removes b from the problem; W then
solves the K x K regularized normal equations

    (Xc' Xc + lambda I) W = Xc' Yc,      b = y_mean - x_mean W.

The system is solved with a direct dense factorization, so a fit is a
deterministic function of its inputs. lambda = 0 is allowed only when
the centered design has full column rank; K category frequencies from a
handful of labeled users usually do not, which is why the default in
the pipeline is lambda = 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputFormatError, ModelError
from .lexicon import FeatureVector

TRAITS = ("O", "C", "E", "A", "N")

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class BigFive:
    """One user's five trait scores (nominal 0-100 scale, not clamped)."""

    o: float
    c: float
    e: float
    a: float
    n: float

    def __post_init__(self):
        for trait, value in zip(TRAITS, self.as_tuple()):
            if not math.isfinite(value):
                raise ValueError(f"trait {trait} must be finite, got {value}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.o, self.c, self.e, self.a, self.n)

    def get(self, trait: str) -> float:
        return self.as_tuple()[TRAITS.index(trait)]


@dataclass(frozen=True, eq=False)
class MappingModel:
    category_names: tuple[str, ...]
    W: np.ndarray  # K x 5, rows follow category_names
    b: np.ndarray  # 5-vector intercept
    ridge_lambda: float
    n_train: int


def fit(
    features: Sequence[FeatureVector],
    labels: Sequence[tuple[str, BigFive]],
    ridge_lambda: float = 1.0,
    *,
    category_names: Sequence[str] | None = None,
) -> MappingModel:
    """Fit the mapping matrix on labeled users.

    Every labeled user must have a non-degenerate feature vector; users
    are joined on user_id and processed in sorted id order, so the fit
    is reproducible regardless of input ordering.
    """
    if ridge_lambda < 0:
        raise ModelError("ridge lambda must be >= 0")
    if len({uid for uid, _ in labels}) < 2:
        raise ModelError("need at least 2 distinct labeled users")
    by_id = {fv.user_id: fv for fv in features}
    if category_names is None:
        first = next(iter(by_id.values()), None)
        if first is None:
            raise ModelError("no feature vectors supplied")
        category_names = tuple(first.freqs.keys())
    else:
        category_names = tuple(category_names)

    rows = []
    targets = []
    for user_id, score in sorted(labels, key=lambda pair: pair[0]):
        fv = by_id.get(user_id)
        if fv is None:
            raise ModelError(f"labeled user {user_id!r} has no feature vector")
        if fv.degenerate:
            raise ModelError(f"labeled user {user_id!r} has a degenerate (zero-token) feature vector")
        rows.append([fv.freqs[name] for name in category_names])
        targets.append(score.as_tuple())

    X = np.asarray(rows, dtype=np.float64)
    Y = np.asarray(targets, dtype=np.float64)
    n, k = X.shape
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean
    if ridge_lambda == 0.0 and np.linalg.matrix_rank(Xc) < k:
        raise ModelError(
            "centered design is rank-deficient with lambda=0; "
            "use a positive ridge lambda"
        )
    gram = Xc.T @ Xc + ridge_lambda * np.eye(k)
    try:
        W = np.linalg.solve(gram, Xc.T @ Yc)
    except np.linalg.LinAlgError as err:
        raise ModelError(f"normal equations are singular: {err}") from err
    b = y_mean - x_mean @ W
    return MappingModel(
        category_names=tuple(category_names),
        W=W,
        b=b,
        ridge_lambda=float(ridge_lambda),
        n_train=n,
    )


def predict(
    model: MappingModel,
    features: Sequence[FeatureVector],
) -> tuple[list[tuple[str, BigFive]], list[str]]:
    """Score users; returns (scores, skipped degenerate user ids)."""
    scores: list[tuple[str, BigFive]] = []
    skipped: list[str] = []
    names = model.category_names
    for fv in features:
        _check_names(names, tuple(fv.freqs.keys()))
        if fv.degenerate:
            skipped.append(fv.user_id)
            continue
        x = np.array([fv.freqs[name] for name in names], dtype=np.float64)
        y = x @ model.W + model.b
        scores.append((fv.user_id, BigFive(*(float(v) for v in y))))
    return scores, skipped


def _check_names(expected: tuple[str, ...], got: tuple[str, ...]) -> None:
    if expected == got:
        return
    for i, (e, g) in enumerate(zip(expected, got)):
        if e != g:
            raise ModelError(
                f"category name mismatch at position {i}: model has {e!r}, features have {g!r}"
            )
    raise ModelError(
        f"category count mismatch: model has {len(expected)}, features have {len(got)}"
    )


def summarize_scores(scores: Sequence[BigFive]) -> dict[str, tuple[float, float]]:
    """Per-trait (mean, population standard deviation)."""
    if not scores:
        raise ModelError("cannot summarize an empty score list")
    out: dict[str, tuple[float, float]] = {}
    values = np.array([s.as_tuple() for s in scores], dtype=np.float64)
    means = values.mean(axis=0)
    sds = values.std(axis=0, ddof=0)
    for i, trait in enumerate(TRAITS):
        out[trait] = (float(means[i]), float(sds[i]))
    return out


def holdout_split(user_ids: Sequence[str], test_fraction: float, seed: int) -> tuple[list[str], list[str]]:
    """Deterministic train/test id split (sorted ids, seeded shuffle)."""
    if not 0.0 < test_fraction < 1.0:
        raise ModelError("test_fraction must be in (0, 1)")
    ids = sorted(user_ids)
    rng = np.random.default_rng(seed)
    rng.shuffle(ids)
    n_test = max(1, int(len(ids) * test_fraction))
    return ids[n_test:], ids[:n_test]


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: MappingModel, path) -> None:
    """Versioned JSON, floats at 17 significant digits (exact round-trip)."""
    lines = ["{"]
    lines.append(f'  "format_version": {MODEL_FORMAT_VERSION},')
    names = json.dumps(list(model.category_names), ensure_ascii=False)
    lines.append(f'  "category_names": {names},')
    w_rows = ",\n".join(
        "    [" + ", ".join(_fmt17(v) for v in row) + "]" for row in model.W
    )
    lines.append('  "W": [\n' + w_rows + "\n  ],")
    lines.append('  "b": [' + ", ".join(_fmt17(v) for v in model.b) + "],")
    lines.append(f'  "lambda": {_fmt17(model.ridge_lambda)},')
    lines.append(f'  "n_train": {model.n_train}')
    lines.append("}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MappingModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise InputFormatError(
            f"{path}: unsupported model format_version {doc.get('format_version')!r}"
        )
    W = np.array(doc["W"], dtype=np.float64)
    b = np.array(doc["b"], dtype=np.float64)
    names = tuple(doc["category_names"])
    if W.shape != (len(names), len(TRAITS)) or b.shape != (len(TRAITS),):
        raise InputFormatError(f"{path}: W/b shapes do not match category list")
    return MappingModel(
        category_names=names,
        W=W,
        b=b,
        ridge_lambda=float(doc["lambda"]),
        n_train=int(doc["n_train"]),
    )


def write_scores_csv(scores: Sequence[tuple[str, BigFive]], path) -> None:
    """CSV 'user_id,O,C,E,A,N' with 6-decimal scores."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("user_id," + ",".join(TRAITS) + "\n")
        for user_id, score in scores:
            fh.write(user_id + "," + ",".join(f"{v:.6f}" for v in score.as_tuple()) + "\n")


def read_scores_csv(path) -> list[tuple[str, BigFive]]:
    scores = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "user_id," + ",".join(TRAITS):
            raise InputFormatError(f"{path}: not a score CSV (header {header!r})")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            scores.append((parts[0], BigFive(*(float(v) for v in parts[1:6]))))
    return scores


def read_labels_csv(path) -> list[tuple[str, BigFive]]:
    """Labels share the score CSV format."""
    return read_scores_csv(path)
