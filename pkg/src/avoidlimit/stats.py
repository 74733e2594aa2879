"""Two-sample KS, Pearson chi-square uniformity and moment summaries."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import chi2

DEFAULT_ALPHA = 1e-3


@dataclass(frozen=True)
class Sample:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError(f"sample {self.label!r} contains non-finite values")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    threshold: float
    n1: int
    n2: int
    passed: bool
    description: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _as_sample(x, label="") -> Sample:
    return x if isinstance(x, Sample) else Sample(np.asarray(x), label)


def ks_critical_value(alpha: float) -> float:
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


def ks_statistic(a, b) -> float:
    a = np.sort(_as_sample(a).values)
    b = np.sort(_as_sample(b).values)
    if not len(a) or not len(b):
        raise ValueError("KS needs two nonempty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / len(a)
    fb = np.searchsorted(b, pts, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(A, B, alpha: float = DEFAULT_ALPHA, description: str = "") -> TestReport:
    A, B = _as_sample(A, "A"), _as_sample(B, "B")
    if not len(A) or not len(B):
        raise ValueError("KS needs two nonempty samples")
    n1, n2 = len(A), len(B)
    stat = ks_statistic(A, B)
    threshold = ks_critical_value(alpha) * math.sqrt((n1 + n2) / (n1 * n2))
    return TestReport(stat, threshold, n1, n2, stat <= threshold, description or f"KS {A.label} vs {B.label}")


def ks_required_size(alpha: float, max_distance: float) -> int:
    """Smallest equal size ``N`` whose KS threshold is at most ``max_distance``."""
    return math.ceil(2.0 * ks_critical_value(alpha) ** 2 / max_distance**2)


def chi_square_uniform(counts, total: int | None = None, alpha: float = DEFAULT_ALPHA, description: str = "") -> TestReport:
    counts = np.asarray(counts, dtype=float)
    total = float(counts.sum()) if total is None else float(total)
    if len(counts) < 2:
        raise ValueError("chi-square needs at least two classes")
    expected = total / len(counts)
    if expected < 5:
        raise ValueError(
            f"expected count {expected:.3g} per class is below 5; draw at least {5 * len(counts)} samples"
        )
    stat = float(np.sum((counts - expected) ** 2) / expected)
    threshold = float(chi2.ppf(1.0 - alpha, len(counts) - 1))
    return TestReport(stat, threshold, int(total), len(counts), stat <= threshold, description or "chi-square uniformity")


@dataclass(frozen=True)
class MomentSummary:
    n: int
    mean: float
    variance: float
    skewness: float
    mean_se: float
    variance_se: float
    skewness_se: float


def _moments(x: np.ndarray) -> tuple[float, float, float]:
    n = len(x)
    m = x.mean()
    c = x - m
    var = float(np.sum(c**2) / (n - 1))
    m2 = np.mean(c**2)
    m3 = np.mean(c**3)
    if m2 == 0 or n < 3:
        skew = 0.0
    else:
        # adjusted Fisher-Pearson coefficient
        skew = float(m3 / m2**1.5 * math.sqrt(n * (n - 1)) / (n - 2))
    return float(m), var, skew


def moment_summary(A) -> MomentSummary:
    """Mean, unbiased variance and adjusted skewness, each with a jackknife standard error."""
    x = _as_sample(A).values
    n = len(x)
    if n < 2:
        raise ValueError("moment summary needs at least two values")
    mean, var, skew = _moments(x)
    if n < 4:
        return MomentSummary(n, mean, var, skew, math.nan, math.nan, math.nan)
    # leave-one-out power sums, all at once
    s1, s2, s3 = x.sum(), np.sum(x**2), np.sum(x**3)
    k = n - 1
    loo_mean = (s1 - x) / k
    p2 = (s2 - x**2) / k
    p3 = (s3 - x**3) / k
    c2 = p2 - loo_mean**2
    c3 = p3 - 3 * loo_mean * p2 + 2 * loo_mean**3
    loo_var = c2 * k / (k - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        loo_skew = np.where(c2 > 0, c3 / c2**1.5 * math.sqrt(k * (k - 1)) / (k - 2), 0.0)

    def jack(vals):
        return float(math.sqrt((n - 1) / n * np.sum((vals - vals.mean()) ** 2)))

    return MomentSummary(n, mean, var, skew, jack(loo_mean), jack(loo_var), jack(loo_skew))


def format_table(reports: list[TestReport]) -> str:
    head = f"{'test':<40} {'stat':>10} {'threshold':>10} {'n1':>7} {'n2':>7}  result"
    lines = [head, "-" * len(head)]
    for r in reports:
        lines.append(
            f"{r.description[:40]:<40} {r.statistic:>10.4g} {r.threshold:>10.4g} {r.n1:>7} {r.n2:>7}  "
            + ("pass" if r.passed else "FAIL")
        )
    return "\n".join(lines)
