"""Rank agreement, the iAccuracy deletion metric and repetition summaries."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.stats import norm, rankdata

from .micronet import MicroNet, forward


class UndefinedCorrelationError(ValueError):
    """Spearman correlation with a constant input."""


def ranks(values) -> np.ndarray:
    """Ranks starting at 1; tied items share the mean of the ranks they span."""
    return rankdata(np.asarray(values, dtype=float), method="average")


def spearman(a, b) -> float:
    """Pearson correlation of the average-rank transforms of ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("spearman needs two vectors of equal length")
    if len(a) < 2:
        raise ValueError("spearman needs at least two items")
    ra = ranks(a) - (len(a) + 1) / 2
    rb = ranks(b) - (len(b) + 1) / 2
    den = math.sqrt(float(np.dot(ra, ra)) * float(np.dot(rb, rb)))
    if den == 0.0:
        raise UndefinedCorrelationError("a constant vector has no rank variance")
    return max(-1.0, min(1.0, float(np.dot(ra, rb)) / den))


Predictor = Union[MicroNet, Callable[[np.ndarray], np.ndarray]]


def predict_classes(model: Predictor, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    scores = forward(model, X) if isinstance(model, MicroNet) else np.asarray(model(X))
    return np.argmax(np.atleast_2d(scores), axis=1)


def iaccuracy_curve(model: Predictor, image, ranking, L: int, fill, patch_n: int = 0) -> np.ndarray:
    """``iAcc(l)`` for every ``l = 0..L``.

    ``image`` is a :class:`~shapig.synth_image.SynthImage` or a 2-D pixel
    array; ``ranking`` lists flat pixel indices from most to least important
    and ``fill`` is the value written into removed pixels (scalar or an array
    shaped like the image). ``patch_n > 0`` removes ``(n+1) x (n+1)`` windows
    around each ranked pixel instead of single pixels.
    """
    from .synth_image import deletion_stack

    stack = deletion_stack(image, ranking, L, fill, patch_n)
    preds = predict_classes(model, stack.reshape(len(stack), -1))
    hits = (preds == preds[0]).astype(float)
    return np.cumsum(hits) / np.arange(1, L + 2)


def iaccuracy(model: Predictor, image, ranking, L: int, fill, patch_n: int = 0) -> float:
    """Fraction of ``k = 0..L`` for which removing the top ``k`` pixels leaves
    the predicted class unchanged."""
    return float(iaccuracy_curve(model, image, ranking, L, fill, patch_n)[-1])


@dataclass(frozen=True)
class MetricReport:
    name: str
    values: tuple
    mean: float
    variance: Optional[float]
    ci_halfwidth: Optional[float]
    seeds: tuple = ()
    level: float = 0.95

    @property
    def n(self) -> int:
        return len(self.values)

    def ci(self) -> tuple[float, float]:
        h = self.ci_halfwidth or 0.0
        return self.mean - h, self.mean + h


def aggregate(values: Sequence[float], name: str = "", seeds: Sequence = (),
              level: float = 0.95, require_variance: bool = True) -> MetricReport:
    """Sample mean, unbiased sample variance and a normal-approximation
    confidence half-width ``z * sqrt(var / n)``.

    With a single value and ``require_variance=False`` the variance and
    interval are ``None``.
    """
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError("aggregate needs at least one value")
    if len(vals) < 2:
        if require_variance:
            raise ValueError("a variance needs at least two repetitions")
        return MetricReport(name, vals, vals[0], None, None, tuple(seeds), level)
    arr = np.array(vals)
    mean = float(arr.mean())
    var = float(arr.var(ddof=1))
    z = float(norm.ppf(0.5 + level / 2))
    return MetricReport(name, vals, mean, var, z * math.sqrt(var / len(vals)),
                        tuple(seeds), level)


def reports_csv(reports: Sequence[MetricReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "n", "mean", "variance", "ci_low", "ci_high"])
    for r in reports:
        lo, hi = r.ci()
        w.writerow([r.name, r.n, repr(r.mean), repr(r.variance), repr(lo), repr(hi)])
    return buf.getvalue()


def plot_data_csv(xs: Sequence, reports: Sequence[MetricReport], x_name: str = "x") -> str:
    """``x, mean, ci_low, ci_high`` rows, one per (x, report) pair."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([x_name, "mean", "ci_low", "ci_high"])
    for x, r in zip(xs, reports):
        lo, hi = r.ci()
        w.writerow([x, repr(r.mean), repr(lo), repr(hi)])
    return buf.getvalue()
