"""Marginal predictions and pairwise contrasts from a fitted model."""
from __future__ import annotations

import math

from scipy import stats as sps

from .design import encode_point
from .lmm import LmmFit

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


def marginal_prediction(fit: LmmFit, point: dict) -> dict:
    """Fixed-effect prediction at a covariate point with a 95% CI.

    Unspecified continuous covariates sit at 0 (their centered mean) and
    unspecified categoricals at their reference level.
    """
    x = encode_point(fit.spec, point, fit.names)
    estimate = float(x @ fit.beta)
    se = math.sqrt(max(float(x @ fit.cov_beta @ x), 0.0))
    return {
        "estimate": estimate,
        "se": se,
        "ci": (estimate - Z_95 * se, estimate + Z_95 * se),
    }


def contrast(fit: LmmFit, point_a: dict, point_b: dict) -> dict:
    """Difference of two marginal predictions with CI and p-value."""
    xa = encode_point(fit.spec, point_a, fit.names)
    xb = encode_point(fit.spec, point_b, fit.names)
    d = xa - xb
    diff = float(d @ fit.beta)
    var = float(d @ fit.cov_beta @ d)
    se = math.sqrt(max(var, 0.0))
    if se == 0.0:
        p = 1.0
    else:
        p = float(2.0 * sps.norm.sf(abs(diff) / se))
    return {
        "difference": diff,
        "se": se,
        "ci": (diff - Z_95 * se, diff + Z_95 * se),
        "p": p,
    }
