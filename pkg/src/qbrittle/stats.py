"""Descriptive and inferential statistics for ensemble analysis.

Conventions: standard deviations are sample (n-1) estimates throughout, the
two-sample comparison is Welch's unequal-variance t-test, and Student-t tail
probabilities are evaluated via the regularized incomplete beta function
(continued fraction, absolute error well below 1e-10) so the package needs
no statistics dependency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .circuits import Axis, Circuit
from .errors import InvalidParameterError, UndefinedStatisticError

__all__ = [
    "AngleStats",
    "AxisAngleStats",
    "ClassLabel",
    "TestResult",
    "angle_stats",
    "shannon_entropy",
    "gini",
    "pearson_r",
    "angle_importance_r",
    "welch_t_test",
    "cohens_d",
    "classify",
    "fidelity_gap",
    "regularized_incomplete_beta",
    "student_t_two_sided_p",
]

DEFAULT_SMALL_ANGLE_THRESHOLD = 0.1
DEFAULT_CLASSIFY_THRESHOLD = 0.9


class ClassLabel(str, Enum):
    """Post-compression outcome class."""

    ROBUST = "robust"
    FRAGILE = "fragile"


@dataclass(frozen=True)
class AxisAngleStats:
    """Angle statistics of one rotation axis; undefined entries are None."""

    mean: float | None
    std: float | None
    small_angle_ratio: float | None
    count: int


@dataclass(frozen=True)
class AngleStats:
    """Rotation-angle statistics of a circuit (rotation gates only)."""

    mean_theta: float
    std_theta: float
    small_angle_ratio: float
    per_axis: dict[Axis, AxisAngleStats]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    degrees_of_freedom: float
    p_value: float


def _as_scores(values) -> np.ndarray:
    """Accept a raw score sequence or any object exposing `.importances`."""
    return np.asarray(getattr(values, "importances", values), dtype=float)


def _axis_stats(thetas: np.ndarray, threshold: float) -> AxisAngleStats:
    count = int(thetas.size)
    if count == 0:
        return AxisAngleStats(None, None, None, 0)
    mean = float(np.mean(thetas))
    std = float(np.std(thetas, ddof=1)) if count >= 2 else None
    ratio = float(np.count_nonzero(thetas < threshold) / count)
    return AxisAngleStats(mean, std, ratio, count)


def angle_stats(circuit: Circuit, small_angle_threshold: float = DEFAULT_SMALL_ANGLE_THRESHOLD) -> AngleStats:
    """Mean/std/small-angle ratio over all rotation angles, plus a per-axis
    breakdown. Requires at least two rotation gates."""
    by_axis: dict[Axis, list[float]] = {axis: [] for axis in Axis}
    thetas: list[float] = []
    for _, gate in circuit.rotations():
        thetas.append(gate.theta)
        by_axis[gate.axis].append(gate.theta)
    if len(thetas) < 2:
        raise UndefinedStatisticError(
            f"angle statistics need at least 2 rotation gates, found {len(thetas)}"
        )
    arr = np.asarray(thetas)
    return AngleStats(
        mean_theta=float(np.mean(arr)),
        std_theta=float(np.std(arr, ddof=1)),
        small_angle_ratio=float(np.count_nonzero(arr < small_angle_threshold) / arr.size),
        per_axis={axis: _axis_stats(np.asarray(vals), small_angle_threshold) for axis, vals in by_axis.items()},
    )


def shannon_entropy(values) -> float:
    """H = -sum(p_i ln p_i) of the scores normalized to sum 1 (0 ln 0 := 0)."""
    scores = _as_scores(values)
    if np.any(scores < 0):
        raise InvalidParameterError("importance scores must be non-negative")
    total = float(scores.sum())
    if total <= 0.0:
        raise UndefinedStatisticError("entropy is undefined for an all-zero importance profile")
    p = scores / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def gini(values) -> float:
    """Gini coefficient of the scores: sum_ij |x_i - x_j| / (2 N sum x).

    Computed via the equivalent sorted form 2*sum(i*x_(i))/(N*sum x) - (N+1)/N.
    """
    scores = _as_scores(values)
    if np.any(scores < 0):
        raise InvalidParameterError("importance scores must be non-negative")
    total = float(scores.sum())
    if total <= 0.0:
        raise UndefinedStatisticError("Gini coefficient is undefined for an all-zero importance profile")
    ordered = np.sort(scores)
    n = ordered.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * np.sum(ranks * ordered) / (n * total) - (n + 1) / n)


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation, clamped into [-1, 1]."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size:
        raise InvalidParameterError(f"sequence lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise UndefinedStatisticError("correlation needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0.0:
        raise UndefinedStatisticError("correlation is undefined for a constant sequence")
    return min(max(float(np.dot(dx, dy)) / denom, -1.0), 1.0)


def angle_importance_r(circuit: Circuit, profile) -> float:
    """Pearson correlation between rotation angles and their importances."""
    scores = _as_scores(profile)
    indices = []
    thetas = []
    for i, gate in circuit.rotations():
        indices.append(i)
        thetas.append(gate.theta)
    if len(indices) > scores.size:
        raise InvalidParameterError("importance profile is shorter than the circuit")
    return pearson_r(thetas, scores[indices])


def _beta_cf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 1e-15) -> float:
    # Lentz's algorithm for the continued fraction of I_x(a, b).
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
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
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (a > 0 and b > 0):
        raise InvalidParameterError("incomplete beta requires positive shape parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t with `df` degrees of freedom."""
    if df <= 0:
        raise InvalidParameterError(f"degrees of freedom must be positive, got {df}")
    x = df / (df + t * t)
    return min(max(regularized_incomplete_beta(0.5 * df, 0.5, x), 0.0), 1.0)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df."""
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if xa.size < 2 or xb.size < 2:
        raise UndefinedStatisticError("Welch's test needs at least 2 samples per group")
    va = float(np.var(xa, ddof=1))
    vb = float(np.var(xb, ddof=1))
    if va == 0.0 or vb == 0.0:
        raise UndefinedStatisticError("Welch's test is undefined for a zero-variance sample")
    sa = va / xa.size
    sb = vb / xb.size
    t = (float(xa.mean()) - float(xb.mean())) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa * sa / (xa.size - 1) + sb * sb / (xb.size - 1))
    return TestResult(statistic=t, degrees_of_freedom=df, p_value=student_t_two_sided_p(t, df))


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardized mean difference with pooled (n-1-weighted) std."""
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if xa.size < 2 or xb.size < 2:
        raise UndefinedStatisticError("Cohen's d needs at least 2 samples per group")
    pooled_var = ((xa.size - 1) * float(np.var(xa, ddof=1)) + (xb.size - 1) * float(np.var(xb, ddof=1))) / (
        xa.size + xb.size - 2
    )
    if pooled_var == 0.0:
        raise UndefinedStatisticError("Cohen's d is undefined for zero pooled variance")
    return (float(xa.mean()) - float(xb.mean())) / math.sqrt(pooled_var)


def classify(fidelity: float, threshold: float = DEFAULT_CLASSIFY_THRESHOLD) -> ClassLabel:
    """Robust iff fidelity >= threshold (boundary inclusive)."""
    return ClassLabel.ROBUST if fidelity >= threshold else ClassLabel.FRAGILE


def fidelity_gap(robust_fids: Sequence[float], fragile_fids: Sequence[float]) -> float:
    """min(robust) - max(fragile); negative when the classes overlap."""
    if len(robust_fids) == 0 or len(fragile_fids) == 0:
        raise UndefinedStatisticError("fidelity gap needs both classes non-empty")
    return float(min(robust_fids)) - float(max(fragile_fids))
