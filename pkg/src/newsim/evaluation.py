"""Pearson correlation, per-language breakdown, the Williams test for
dependent correlations, and serious-mistake error analysis."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import ArticlePair, denormalize_label, normalize_label, unordered_lang_pair


class ConstantInputError(ValueError):
    """Correlation is undefined for a constant sequence."""


@dataclass(frozen=True)
class WilliamsResult:
    t: float
    df: int
    p_value: float
    n: int


@dataclass(frozen=True)
class SeriousMistake:
    pair_id: str
    true_raw: float
    predicted_raw: float
    difference: float  # true - predicted on the raw [1, 4] scale


@dataclass
class EvalReport:
    overall_pearson: float
    n: int
    per_lang: dict[tuple[str, str], tuple[float, int]]
    mono_avg: float | None
    cross_avg: float | None
    flagged: dict[tuple[str, str], str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "overall_pearson": self.overall_pearson,
            "n": self.n,
            "per_language": [
                {"langs": f"{a}-{b}", "pearson": r, "n": n, "mono": a == b}
                for (a, b), (r, n) in sorted(self.per_lang.items())
            ],
            "mono_avg": self.mono_avg,
            "cross_avg": self.cross_avg,
            "flagged": [{"langs": f"{a}-{b}", "reason": reason}
                        for (a, b), reason in sorted(self.flagged.items())],
        }


@dataclass(frozen=True)
class ModelComparison:
    pearson_a: float
    pearson_b: float
    pearson_ab: float
    williams: WilliamsResult


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; raises on constant or too-short input."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    var_x = float(xc @ xc)
    var_y = float(yc @ yc)
    if var_x == 0.0 or var_y == 0.0:
        raise ConstantInputError("correlation undefined for constant input")
    return float(xc @ yc) / math.sqrt(var_x * var_y)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction, using the symmetry that keeps it
    convergent."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: int) -> float:
    """One-tailed P(T > t) for Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def williams_test(r12: float, r13: float, r23: float, n: int) -> WilliamsResult:
    """Significance of r12 > r13 when both correlate against shared data.

    t follows Student's t with n - 3 degrees of freedom; the p-value is
    one-tailed in the direction r12 exceeds r13.
    """
    if n <= 3:
        raise ValueError("need n > 3 observations")
    for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
        if not -1.0 < r < 1.0:
            raise ValueError(f"{name}={r} outside (-1, 1)")
    if r12 == r13:
        # the numerator is identically zero; 0 is the statistic's limit even
        # where the denominator degenerates
        return WilliamsResult(t=0.0, df=n - 3, p_value=0.5, n=n)
    k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23
    denom_sq = (2.0 * k * (n - 1) / (n - 3)
                + ((r12 + r13) ** 2 / 4.0) * (1.0 - r23) ** 3)
    if denom_sq <= 0.0 or not math.isfinite(denom_sq):
        raise ValueError("correlations are not jointly feasible")
    t = (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23)) / math.sqrt(denom_sq)
    return WilliamsResult(t=t, df=n - 3, p_value=student_t_sf(t, n - 3), n=n)


def compare_models(labels: Sequence[float], preds_a: Sequence[float],
                   preds_b: Sequence[float]) -> ModelComparison:
    """Williams comparison of two prediction sets against shared labels."""
    r12 = pearson(labels, preds_a)
    r13 = pearson(labels, preds_b)
    r23 = pearson(preds_a, preds_b)
    n = len(labels)
    if list(preds_a) == list(preds_b):
        # identical predictions: the statistic is 0 in the limit
        williams = WilliamsResult(t=0.0, df=n - 3, p_value=0.5, n=n)
    else:
        williams = williams_test(r12, r13, r23, n)
    return ModelComparison(pearson_a=r12, pearson_b=r13, pearson_ab=r23,
                           williams=williams)


def per_language_breakdown(pairs: Sequence[ArticlePair],
                           predictions: Mapping[str, float]) -> EvalReport:
    """Pearson per unordered language pair plus unweighted mono/cross averages.

    Groups with fewer than 2 members or constant values are flagged and left
    out of the averages.
    """
    missing = [p.pair_id for p in pairs if p.pair_id not in predictions]
    if missing:
        shown = ", ".join(missing[:10])
        raise ValueError(f"pairs without predictions: {shown}")
    unlabeled = [p.pair_id for p in pairs if p.overall_raw is None]
    if unlabeled:
        raise ValueError(f"cannot evaluate unlabeled pairs: {unlabeled[:10]}")

    labels = [normalize_label(p.overall_raw) for p in pairs]
    preds = [predictions[p.pair_id] for p in pairs]
    overall = pearson(labels, preds)

    groups: dict[tuple[str, str], list[int]] = {}
    for i, pair in enumerate(pairs):
        groups.setdefault(unordered_lang_pair(pair), []).append(i)

    per_lang: dict[tuple[str, str], tuple[float, int]] = {}
    flagged: dict[tuple[str, str], str] = {}
    for key in sorted(groups):
        idx = groups[key]
        if len(idx) < 2:
            flagged[key] = f"only {len(idx)} pair(s)"
            continue
        try:
            r = pearson([labels[i] for i in idx], [preds[i] for i in idx])
        except ConstantInputError:
            flagged[key] = "constant labels or predictions"
            continue
        per_lang[key] = (r, len(idx))

    mono = [r for (a, b), (r, _) in per_lang.items() if a == b]
    cross = [r for (a, b), (r, _) in per_lang.items() if a != b]
    return EvalReport(
        overall_pearson=overall,
        n=len(pairs),
        per_lang=per_lang,
        mono_avg=sum(mono) / len(mono) if mono else None,
        cross_avg=sum(cross) / len(cross) if cross else None,
        flagged=flagged,
    )


def write_predictions(path: str | Path, predictions: Mapping[str, float]) -> None:
    """Predictions file: CSV of pair_id,prediction on the normalized scale."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("pair_id", "prediction"))
        for pair_id in predictions:
            writer.writerow((pair_id, repr(float(predictions[pair_id]))))


def read_predictions(path: str | Path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if row:
                out[row[0]] = float(row[1])
    return out


def serious_mistakes(pairs: Sequence[ArticlePair],
                     predictions: Mapping[str, float],
                     threshold: float = 2.0) -> list[SeriousMistake]:
    """Pairs whose |true - predicted| on the raw [1, 4] scale strictly exceeds
    the threshold, worst first."""
    out = []
    for pair in pairs:
        if pair.overall_raw is None or pair.pair_id not in predictions:
            continue
        predicted = denormalize_label(min(max(predictions[pair.pair_id], 0.0), 1.0))
        difference = pair.overall_raw - predicted
        if abs(difference) > threshold:
            out.append(SeriousMistake(pair.pair_id, pair.overall_raw,
                                      predicted, difference))
    out.sort(key=lambda m: (-abs(m.difference), m.pair_id))
    return out
