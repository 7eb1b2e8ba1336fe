"""Between-group inference: unequal-variance t-test and Cohen's d."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


class StatsError(ValueError):
    pass


class TooFewSamples(StatsError):
    pass


class BothZeroVariance(StatsError):
    pass


class ZeroPooledVariance(StatsError):
    pass


@dataclass(frozen=True)
class GroupSummary:
    mean: float
    sd: float
    n: int


@dataclass(frozen=True)
class TestReport:
    dimension: str
    group_a: GroupSummary
    group_b: GroupSummary
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    cohens_d: float
    alpha: float
    significant: bool


def student_t_cdf(x: float, df: float) -> float:
    """CDF of Student's t via the regularized incomplete beta function."""
    if df <= 0:
        raise StatsError("degrees of freedom must be > 0")
    if x == 0.0:
        return 0.5
    p_tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + x * x))
    return 1.0 - p_tail if x > 0 else p_tail


def welch_t_test(a, b, alpha: float = 0.05, dimension: str = "") -> TestReport:
    """Two-sample t-test assuming unequal variances (two-sided).

    Degrees of freedom follow the Welch-Satterthwaite approximation.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise TooFewSamples("each group needs ≥ 2 samples")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    na, nb = a.size, b.size
    if va == 0.0 and vb == 0.0:
        raise BothZeroVariance("both groups have zero variance")
    se2 = va / na + vb / nb
    t_stat = (a.mean() - b.mean()) / np.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    p = 2.0 * (1.0 - student_t_cdf(abs(t_stat), df))

    d = cohens_d(a, b)
    return TestReport(
        dimension=dimension,
        group_a=GroupSummary(float(a.mean()), float(a.std(ddof=1)), na),
        group_b=GroupSummary(float(b.mean()), float(b.std(ddof=1)), nb),
        t_statistic=float(t_stat),
        degrees_of_freedom=float(df),
        p_value=float(p),
        cohens_d=float(d),
        alpha=alpha,
        significant=bool(p < alpha),
    )


def cohens_d(a, b) -> float:
    """Effect size with the pooled standard deviation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise TooFewSamples("each group needs ≥ 2 samples")
    na, nb = a.size, b.size
    pooled = np.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    diff = a.mean() - b.mean()
    if pooled == 0.0:
        if diff == 0.0:
            return 0.0
        raise ZeroPooledVariance("pooled standard deviation is zero")
    return float(diff / pooled)


def format_report(report: TestReport) -> str:
    """Plain-text line mirroring the conventional reporting style."""
    sig = "significant" if report.significant else "not significant"
    return (
        f"{report.dimension}: group A (mean = {report.group_a.mean:.3f}, "
        f"SD = {report.group_a.sd:.3f}, N = {report.group_a.n}) vs "
        f"group B (mean = {report.group_b.mean:.3f}, SD = {report.group_b.sd:.3f}, "
        f"N = {report.group_b.n}); t = {report.t_statistic:.3f}, "
        f"df = {report.degrees_of_freedom:.2f}, p = {report.p_value:.4f}, "
        f"Cohen's d = {report.cohens_d:.3f} ({sig} at alpha = {report.alpha:g})"
    )
