"""Monte Carlo summaries and the statistical machinery of the experiments.

Covers per-sample summaries with standard errors, two-sample Z-scores for
possibly unequal sample sizes (Welch form), power-law fits of mean
coherence against problem size with and without an intercept, histograms,
and matched empirical quantile pairs for Q-Q comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "SampleSummary",
    "ScalingFit",
    "z_score",
    "ols_fit",
    "histogram",
    "qq_pairs",
    "t_cdf",
    "t_sf",
]


@dataclass
class SampleSummary:
    """Sample values with their mean and standard error."""

    values: list
    mean: float
    se: float
    count: int

    @classmethod
    def from_values(cls, values) -> "SampleSummary":
        arr = np.asarray(list(values), dtype=float)
        if arr.size < 2:
            raise ValueError("need at least two values for a standard error")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        return cls(arr.tolist(), float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size)), int(arr.size))

    @classmethod
    def from_moments(cls, mean: float, se: float, count: int) -> "SampleSummary":
        return cls([], float(mean), float(se), int(count))


def z_score(a: SampleSummary, b: SampleSummary) -> float:
    """Mean difference (first minus second) over the combined standard error."""
    denom = np.hypot(a.se, b.se)
    if denom == 0:
        raise ValueError("degenerate variance: both standard errors are zero")
    return float((a.mean - b.mean) / denom)


def t_cdf(x: float, df: float) -> float:
    """Student-t CDF through the regularized incomplete beta function."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    x = float(x)
    p = 0.5 * special.betainc(df / 2.0, 0.5, df / (df + x * x))
    return p if x < 0 else 1.0 - p


def t_sf(x: float, df: float) -> float:
    return 1.0 - t_cdf(x, df)


@dataclass
class ScalingFit:
    """Power-law fit of mean coherence against problem size."""

    model: str                 # "intercept" | "intercept-free"
    gamma: float
    beta0: float | None
    beta1: float
    r_squared: float
    p_value_beta0: float | None
    excluded: list = field(default_factory=list)
    n_points: int = 0


def ols_fit(xs, ys, gamma: float, model: str = "intercept", exclude=None) -> ScalingFit:
    """Regress y on x' = N**(-gamma), optionally excluding small sizes.

    The with-intercept model reports a two-sided p-value for the intercept
    (t-test with n-2 degrees of freedom); the intercept-free model reports
    the uncentered R**2 conventional for through-origin regression.
    """
    xs = np.asarray(list(xs), dtype=float)
    ys = np.asarray(list(ys), dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have equal length")
    exclude = set(exclude or [])
    keep = np.array([x not in exclude for x in xs])
    excluded = sorted(float(x) for x in xs[~keep])
    xs, ys = xs[keep], ys[keep]
    n = len(xs)
    if n < 3:
        raise ValueError(f"need at least 3 points after exclusions, got {n}")
    xp = xs ** (-gamma)

    if model == "intercept-free":
        denom = float(xp @ xp)
        if denom == 0:
            raise ValueError("rank-deficient regressor")
        beta1 = float(xp @ ys) / denom
        resid = ys - beta1 * xp
        ss_tot = float(ys @ ys)
        r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
        return ScalingFit("intercept-free", gamma, None, beta1, r2, None, excluded, n)

    if model != "intercept":
        raise ValueError(f"unknown model {model!r}")
    design = np.column_stack([np.ones(n), xp])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    beta0, beta1 = float(coef[0]), float(coef[1])
    resid = ys - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = n - 2
    if dof <= 0:
        raise ValueError("p-value needs at least 3 points")
    sigma2 = ss_res / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se0 = float(np.sqrt(cov[0, 0]))
    if se0 == 0:
        pval = 1.0 if beta0 == 0 else 0.0
    else:
        pval = float(2.0 * t_sf(abs(beta0) / se0, dof))
    return ScalingFit("intercept", gamma, beta0, beta1, r2, pval, excluded, n)


def histogram(values, bins: int):
    """Bin counts and edges covering the data range."""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, edges = np.histogram(values, bins=bins)
    return edges, counts


def qq_pairs(a, b, m: int | None = None):
    """Matched empirical quantiles at a common probability grid.

    Uses the linear-interpolation quantile convention; equal samples give
    pairs on the identity line.
    """
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if m is None:
        m = int(min(a.size, b.size))
    probs = (np.arange(1, m + 1) - 0.5) / m
    qa = np.quantile(a, probs, method="linear")
    qb = np.quantile(b, probs, method="linear")
    return list(zip(qa.tolist(), qb.tolist()))
