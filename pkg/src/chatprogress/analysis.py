"""Paired and independent t-tests plus Cohen's d effect sizes.

The test statistics are computed directly from the textbook formulas;
two-sided p-values come from the Student-t survival function evaluated via
the regularized incomplete beta function, which is numerically stable for
fractional degrees of freedom. Every formula variant is selectable so a
report can state exactly which one produced its numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import betainc


class StatsError(ValueError):
    pass


class DegenerateVariance(StatsError):
    """The variance a statistic would divide by is zero."""


class LengthMismatch(StatsError):
    pass


class SampleTooSmall(StatsError):
    pass


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: float


def mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def sample_variance(values: Sequence[float]) -> float:
    """Unbiased (n-1 denominator) sample variance."""
    m = mean(values)
    return sum((v - m) ** 2 for v in values) / (len(values) - 1)


def sample_sd(values: Sequence[float]) -> float:
    return math.sqrt(sample_variance(values))


def t_p_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise StatsError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(betainc(df / 2.0, 0.5, x))


def _require_pair(pre: Sequence[float], post: Sequence[float]) -> None:
    if len(pre) != len(post):
        raise LengthMismatch(f"paired samples differ in length: {len(pre)} vs {len(post)}")
    if len(pre) < 2:
        raise SampleTooSmall("paired test needs at least 2 pairs")


def paired_t_test(pre: Sequence[float], post: Sequence[float]) -> TTestResult:
    """Classic paired t: mean difference over its standard error, df = n-1."""
    _require_pair(pre, post)
    diffs = [b - a for a, b in zip(pre, post)]
    n = len(diffs)
    var_d = sample_variance(diffs)
    if var_d == 0.0:
        raise DegenerateVariance("differences have zero variance")
    t = mean(diffs) / math.sqrt(var_d / n)
    df = n - 1
    return TTestResult(t=t, p=t_p_two_sided(t, df), df=float(df))


def independent_t_test(
    a: Sequence[float], b: Sequence[float], equal_variance: bool = False
) -> TTestResult:
    """Two-sample t-test; Welch by default, pooled when equal_variance is set."""
    if len(a) < 2 or len(b) < 2:
        raise SampleTooSmall("independent test needs at least 2 values per sample")
    na, nb = len(a), len(b)
    va, vb = sample_variance(a), sample_variance(b)
    delta = mean(a) - mean(b)
    if equal_variance:
        pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
        if pooled == 0.0:
            raise DegenerateVariance("both samples have zero variance")
        t = delta / math.sqrt(pooled * (1 / na + 1 / nb))
        df = float(na + nb - 2)
    else:
        se2 = va / na + vb / nb
        if se2 == 0.0:
            raise DegenerateVariance("both samples have zero variance")
        t = delta / math.sqrt(se2)
        df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return TTestResult(t=t, p=t_p_two_sided(t, df), df=df)


def cohens_d_paired(
    pre: Sequence[float], post: Sequence[float], method: str = "sd-diff"
) -> float:
    """Paired effect size.

    "sd-diff" (default): mean(diff) / sd(diff). "sd-average": mean(diff)
    over the average of the pre and post standard deviations.
    """
    _require_pair(pre, post)
    diffs = [b - a for a, b in zip(pre, post)]
    if method == "sd-diff":
        sd = sample_sd(diffs)
    elif method == "sd-average":
        sd = math.sqrt((sample_variance(pre) + sample_variance(post)) / 2)
    else:
        raise StatsError(f"unknown paired d method {method!r}")
    if sd == 0.0:
        raise DegenerateVariance("zero standard deviation in effect size denominator")
    return mean(diffs) / sd


def cohens_d_independent(
    a: Sequence[float], b: Sequence[float], method: str = "pooled"
) -> float:
    """Between-group effect size.

    "pooled" (default): pooled standard deviation with n-1 weights.
    "average": root mean of the two variances.
    """
    if len(a) < 2 or len(b) < 2:
        raise SampleTooSmall("effect size needs at least 2 values per sample")
    na, nb = len(a), len(b)
    va, vb = sample_variance(a), sample_variance(b)
    if method == "pooled":
        sd = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    elif method == "average":
        sd = math.sqrt((va + vb) / 2)
    else:
        raise StatsError(f"unknown independent d method {method!r}")
    if sd == 0.0:
        raise DegenerateVariance("zero standard deviation in effect size denominator")
    return (mean(a) - mean(b)) / sd
