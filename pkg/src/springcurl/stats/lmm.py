"""Random-intercept linear mixed model fit by profiled maximum likelihood.

Model: y = X b + u_g + e, with one scalar random intercept per group
(u ~ N(0, sigma_b^2)) and iid residuals (e ~ N(0, sigma_e^2)). The
likelihood is profiled over the variance ratio lambda = sigma_b^2 /
sigma_e^2: at fixed lambda the GLS coefficients and the ML residual
variance have closed forms through per-group sufficient statistics, so
the fit reduces to a one-dimensional bounded search. ML (not REML) keeps
information criteria comparable across fixed-effect structures.

p-values use t statistics on residual degrees of freedom, which is an
approximation (no Satterthwaite correction).
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, stats as sps

from ..errors import InvalidComparisonError, InvalidInputError
from .design import ModelSpec, build_design
from .transforms import holm_adjust

VARIANCE_FLOOR = 1e-12
LAMBDA_TOL = 1e-10
LAMBDA_MAX = 1e8


@dataclass
class LmmFit:
    spec: ModelSpec
    names: list[str]
    beta: np.ndarray
    se: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    p_holm: np.ndarray
    cov_beta: np.ndarray
    sigma_b2: float
    sigma_e2: float
    lambda_ratio: float
    loglik: float
    aic: float
    bic: float
    n_obs: int
    n_params: int
    n_groups: int
    residual_df: int
    dataset_hash: str
    degenerate: bool = False

    def coefficient_table(self) -> list[dict]:
        return [
            {
                "name": self.names[i],
                "estimate": float(self.beta[i]),
                "se": float(self.se[i]),
                "t": float(self.t_values[i]),
                "p": float(self.p_values[i]),
                "p_holm": float(self.p_holm[i]),
            }
            for i in range(len(self.names))
        ]

    def to_dict(self) -> dict:
        return {
            "model": self.spec.name,
            "coefficients": self.coefficient_table(),
            "sigmaB2": self.sigma_b2,
            "sigmaE2": self.sigma_e2,
            "lambda": self.lambda_ratio,
            "logLik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "nObs": self.n_obs,
            "nParams": self.n_params,
            "nGroups": self.n_groups,
        }


class _ProfiledLikelihood:
    """Per-group sufficient statistics and the profiled log-likelihood."""

    def __init__(self, X: np.ndarray, y: np.ndarray, groups: Sequence):
        self.X = X
        self.y = y
        n, p = X.shape
        self.n = n
        self.p = p
        codes = {}
        idx = np.empty(n, dtype=int)
        for i, g in enumerate(groups):
            idx[i] = codes.setdefault(g, len(codes))
        self.n_groups = len(codes)
        self.group_sizes = np.bincount(idx, minlength=self.n_groups).astype(float)
        self.Sxx = X.T @ X
        self.Sxy = X.T @ y
        self.Syy = float(y @ y)
        # per-group sums of rows of X and of y
        self.gx = np.zeros((self.n_groups, p))
        self.gy = np.zeros(self.n_groups)
        np.add.at(self.gx, idx, X)
        np.add.at(self.gy, idx, y)

    def gls(self, lam: float):
        """beta-hat, ML residual variance, and quadratic forms at lambda."""
        w = lam / (1.0 + lam * self.group_sizes)
        A = self.Sxx - (self.gx * w[:, None]).T @ self.gx
        b = self.Sxy - self.gx.T @ (w * self.gy)
        yy = self.Syy - float(w @ (self.gy ** 2))
        beta = np.linalg.solve(A, b)
        rss = yy - float(beta @ b)  # r' V^-1 r at the GLS solution
        return beta, A, max(rss, 0.0)

    def loglik(self, lam: float) -> float:
        _, _, rss = self.gls(lam)
        sigma2 = max(rss / self.n, VARIANCE_FLOOR)
        logdet = float(np.sum(np.log1p(lam * self.group_sizes)))
        return -0.5 * (self.n * (math.log(2.0 * math.pi) + math.log(sigma2) + rss / (self.n * sigma2)) + logdet)


def profile_lambda(prof: _ProfiledLikelihood) -> float:
    """Maximize the profiled likelihood over lambda >= 0."""
    grid = np.concatenate(([0.0], np.logspace(-8, math.log10(LAMBDA_MAX), 81)))
    values = [prof.loglik(l) for l in grid]
    k = int(np.argmax(values))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    if hi <= lo:
        return float(grid[k])
    res = optimize.minimize_scalar(
        lambda l: -prof.loglik(l), bounds=(lo, hi), method="bounded",
        options={"xatol": LAMBDA_TOL})
    candidates = [0.0, float(grid[k]), float(res.x)]
    return max(candidates, key=prof.loglik)


def fit_lmm(spec: ModelSpec, rows: Sequence[dict], dependent: str = "y") -> LmmFit:
    """Fit the model to analysis rows; the dependent is a column name."""
    X, names = build_design(spec, rows)
    try:
        y = np.array([float(r[dependent]) for r in rows])
    except KeyError:
        raise InvalidInputError(f"dependent column {dependent!r} missing")
    groups = [r[spec.group] for r in rows]
    if len(set(groups)) < 2:
        raise InvalidInputError("at least two groups are required for a random intercept")

    prof = _ProfiledLikelihood(X, y, groups)
    lam = profile_lambda(prof)
    beta, A, rss = prof.gls(lam)
    n, p = prof.n, prof.p

    degenerate = rss / n < VARIANCE_FLOOR
    if degenerate:
        warnings.warn("degenerate fit: residual variance at the floor")
    sigma_e2 = max(rss / n, VARIANCE_FLOOR)
    sigma_b2 = lam * sigma_e2
    loglik = prof.loglik(lam)

    cov_beta = sigma_e2 * np.linalg.inv(A)
    se = np.sqrt(np.diag(cov_beta))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(se > 0, beta / se, 0.0)
    residual_df = max(n - p, 1)
    p_values = 2.0 * sps.t.sf(np.abs(t_values), residual_df)
    p_holm = np.array(holm_adjust(list(p_values)))

    n_params = p + 2
    aic = 2.0 * n_params - 2.0 * loglik
    bic = n_params * math.log(n) - 2.0 * loglik

    digest = hashlib.sha256()
    digest.update(y.tobytes())
    digest.update("|".join(str(g) for g in groups).encode())

    return LmmFit(
        spec=spec, names=names, beta=beta, se=se, t_values=t_values,
        p_values=p_values, p_holm=p_holm, cov_beta=cov_beta,
        sigma_b2=float(sigma_b2), sigma_e2=float(sigma_e2),
        lambda_ratio=float(lam), loglik=float(loglik), aic=float(aic),
        bic=float(bic), n_obs=n, n_params=n_params, n_groups=prof.n_groups,
        residual_df=residual_df, dataset_hash=digest.hexdigest(),
        degenerate=degenerate,
    )


def compare_models(fits: Sequence[LmmFit]) -> list[dict]:
    """AIC ranking with deltas; ties broken by BIC, then fewer parameters."""
    if not fits:
        raise InvalidComparisonError("nothing to compare")
    ref = fits[0]
    for fit in fits[1:]:
        if fit.dataset_hash != ref.dataset_hash or fit.n_obs != ref.n_obs:
            raise InvalidComparisonError(
                f"fits {ref.spec.name!r} and {fit.spec.name!r} use different data")
    ranked = sorted(fits, key=lambda f: (f.aic, f.bic, f.n_params))
    best_aic = ranked[0].aic
    best_bic = min(f.bic for f in fits)
    return [
        {
            "model": f.spec.name,
            "aic": f.aic,
            "bic": f.bic,
            "deltaAic": f.aic - best_aic,
            "deltaBic": f.bic - best_bic,
            "logLik": f.loglik,
            "nParams": f.n_params,
        }
        for f in ranked
    ]


def format_comparison(table: Sequence[dict]) -> str:
    header = f"{'model':<24}{'AIC':>12}{'BIC':>12}{'dAIC':>10}{'dBIC':>10}{'logLik':>12}{'k':>4}"
    lines = [header, "-" * len(header)]
    for row in table:
        lines.append(
            f"{row['model']:<24}{row['aic']:>12.3f}{row['bic']:>12.3f}"
            f"{row['deltaAic']:>10.3f}{row['deltaBic']:>10.3f}{row['logLik']:>12.3f}"
            f"{row['nParams']:>4d}")
    return "\n".join(lines)


def format_fit(fit: LmmFit) -> str:
    header = f"{'term':<44}{'estimate':>12}{'SE':>11}{'t':>9}{'p':>11}{'Holm p':>11}"
    lines = [f"model: {fit.spec.name}   n={fit.n_obs} groups={fit.n_groups} "
             f"logLik={fit.loglik:.4f} AIC={fit.aic:.3f} BIC={fit.bic:.3f}",
             f"sigma_b^2={fit.sigma_b2:.6g}  sigma_e^2={fit.sigma_e2:.6g}",
             header, "-" * len(header)]
    for row in fit.coefficient_table():
        lines.append(
            f"{row['name']:<44}{row['estimate']:>12.5g}{row['se']:>11.4g}"
            f"{row['t']:>9.3f}{row['p']:>11.4g}{row['p_holm']:>11.4g}")
    return "\n".join(lines)
