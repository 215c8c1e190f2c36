"""OLS with classical inference, Student-t tail, Spearman, descriptives."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import optimize, special
from scipy.stats import rankdata

RANK_TOL = 1e-10


class StatsError(ValueError):
    pass


class RankDeficiencyError(StatsError):
    def __init__(self, columns: Sequence[str], ratio: float):
        self.columns = list(columns)
        self.ratio = ratio
        super().__init__(
            f"design matrix is rank deficient (singular value ratio {ratio:.3g}); "
            f"collinear column(s): {', '.join(self.columns)}"
        )


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]
    row_ids: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if v.ndim != 2 or v.shape[1] != len(self.column_names):
            raise StatsError(f"values shape {v.shape} does not match {len(self.column_names)} column names")
        if len(set(self.column_names)) != len(self.column_names):
            raise StatsError("column names must be unique")
        if not np.all(np.isfinite(v)):
            raise StatsError("design matrix contains NaN or infinite entries")
        ones = [j for j in range(v.shape[1]) if np.all(v[:, j] == 1.0)]
        if len(ones) != 1:
            raise StatsError(f"expected exactly one intercept column, found {len(ones)}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]


@dataclass(frozen=True, eq=False)
class FitResult:
    column_names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r2: float
    adjusted_r2: float
    residual_df: int
    n_obs: int
    rss: float
    fitted: np.ndarray
    residuals: np.ndarray
    n_dropped_rows: int = 0

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.column_names.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.column_names.index(name)])


def _collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag.size and diag[0] > 0 else 0
    return [names[j] for j in sorted(piv[rank:])]


def fit_ols(X: DesignMatrix, y, n_dropped_rows: int = 0) -> FitResult:
    """Least squares via Householder QR; SEs from sigma^2 (X'X)^-1."""
    A = X.values
    y = np.asarray(y, dtype=np.float64)
    n, p = A.shape
    if y.shape != (n,):
        raise StatsError(f"outcome has shape {y.shape}, expected ({n},)")
    if not np.all(np.isfinite(y)):
        raise StatsError("outcome contains NaN or infinite entries")
    if n <= p:
        raise StatsError(f"need more observations than predictors (n={n}, p={p})")

    sv = np.linalg.svd(A, compute_uv=False)
    ratio = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    if ratio <= RANK_TOL:
        raise RankDeficiencyError(_collinear_columns(A, X.column_names), ratio)

    Q, R = np.linalg.qr(A, mode="reduced")
    beta = scipy.linalg.solve_triangular(R, Q.T @ y)
    fitted = A @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    df = n - p
    sigma2 = rss / df
    Rinv = scipy.linalg.solve_triangular(R, np.eye(p))
    xtx_inv_diag = np.einsum("ij,ij->i", Rinv, Rinv)
    se = np.sqrt(sigma2 * xtx_inv_diag)

    t = np.empty(p)
    pv = np.empty(p)
    for j in range(p):
        if se[j] > 0:
            t[j] = beta[j] / se[j]
            pv[j] = two_sided_p(t[j], df)
        elif beta[j] != 0:
            t[j] = math.copysign(math.inf, beta[j])
            pv[j] = 0.0
        else:
            t[j] = 0.0
            pv[j] = 1.0

    ybar = math.fsum(y) / n
    tss = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / df
    return FitResult(
        X.column_names, beta, se, t, pv, r2, adj, df, n, rss, fitted, resid, n_dropped_rows
    )


def student_t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) through the regularized incomplete beta function."""
    if df <= 0:
        raise ValueError("df must be positive")
    t = float(t)
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * float(special.betainc(df / 2.0, 0.5, x))
    return tail if t > 0 else 1.0 - tail


def two_sided_p(t: float, df: float) -> float:
    return min(1.0, 2.0 * student_t_sf(abs(t), df))


def student_t_ppf(q: float, df: float) -> float:
    """Quantile by root-finding on ``student_t_sf``."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -student_t_ppf(1.0 - q, df)
    target = 1.0 - q
    hi = 1.0
    while student_t_sf(hi, df) > target:
        hi *= 2.0
    return optimize.brentq(lambda x: student_t_sf(x, df) - target, 0.0, hi, xtol=1e-14, maxiter=500)


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("spearman needs two 1-D sequences of equal length")
    if x.size < 3:
        raise StatsError("spearman needs at least 3 observations")
    rx = rankdata(x)
    ry = rankdata(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("spearman undefined: zero rank variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman_p(rho: float, n: int) -> float:
    """Two-sided p-value from the t approximation with n-2 df."""
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return two_sided_p(t, n - 2)


def describe(values) -> tuple[float, float | None, int]:
    """(mean, sample sd or None when n < 2, n)."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        raise StatsError("describe needs at least one value")
    # shifting by the first value keeps the mean of identical values exact
    mean = vals[0] + math.fsum(v - vals[0] for v in vals) / n
    if n < 2:
        return mean, None, n
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))
    return mean, sd, n


def mean_ci95(values) -> tuple[float, float, float]:
    mean, sd, n = describe(values)
    if n < 2:
        raise StatsError("confidence interval needs at least 2 values")
    half = student_t_ppf(0.975, n - 1) * sd / math.sqrt(n)
    return mean, mean - half, mean + half


def log1p_transform(x: float) -> float:
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ValueError(f"log1p transform needs a non-negative value, got {x}")
    return math.log1p(x)


def stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""
