"""Force-elongation models for the virtual springs.

Three spring families share a common anchor: at the target elongation they
all produce the target force, and the two nonlinear families additionally
have zero slope there so the correct release force is cued haptically
rather than visually.

All elongations are in millimeters, forces in newtons. Functions here are
pure; device-level clamping (force limits) belongs to the engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInputError, NoSolutionError

# Default task geometry: main task anchors 10 N at 90 mm, the stiffer
# transfer task moves the anchor to 70 mm at the same force.
DEFAULT_TARGET_FORCE_N = 10.0
MAIN_TARGET_ELONGATION_MM = 90.0
TRANSFER_TARGET_ELONGATION_MM = 70.0
MAIN_GAUSSIAN_WIDTH_MM = 27.0

# Width-to-elongation ratio kept self-similar when re-anchoring nonlinear
# springs (27/90).
GAUSSIAN_WIDTH_RATIO = MAIN_GAUSSIAN_WIDTH_MM / MAIN_TARGET_ELONGATION_MM

ROOT_TOL_MM = 1e-9
INTERSECTION_TOL_MM = 1e-6
MAX_BISECT_ITERS = 200


class SpringKind(Enum):
    LINEAR = "LS"
    GAUSSIAN = "GS"
    ANTISYM_GAUSSIAN = "AGS"


@dataclass(frozen=True)
class SpringParams:
    """Parametric spring: kind plus the force/elongation anchor."""

    kind: SpringKind
    target_force_n: float = DEFAULT_TARGET_FORCE_N
    target_elongation_mm: float = MAIN_TARGET_ELONGATION_MM
    gaussian_width_mm: float = MAIN_GAUSSIAN_WIDTH_MM

    def __post_init__(self):
        if not self.target_force_n > 0:
            raise InvalidInputError("target force must be positive")
        if not self.target_elongation_mm > 0:
            raise InvalidInputError("target elongation must be positive")
        if self.kind is not SpringKind.LINEAR and not self.gaussian_width_mm > 0:
            raise InvalidInputError("gaussian width must be positive for nonlinear springs")

    @classmethod
    def main(cls, kind: SpringKind) -> "SpringParams":
        return cls(kind=kind)

    @classmethod
    def transfer(cls, kind: SpringKind = SpringKind.LINEAR) -> "SpringParams":
        # Nonlinear transfer springs keep the width proportional to the
        # shorter target elongation so the geometry stays self-similar.
        return cls(
            kind=kind,
            target_elongation_mm=TRANSFER_TARGET_ELONGATION_MM,
            gaussian_width_mm=GAUSSIAN_WIDTH_RATIO * TRANSFER_TARGET_ELONGATION_MM,
        )

    def to_wire(self) -> dict:
        return {
            "kind": self.kind.value,
            "targetForceN": self.target_force_n,
            "targetElongationMm": self.target_elongation_mm,
            "gaussianWidthMm": self.gaussian_width_mm,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "SpringParams":
        return cls(
            kind=SpringKind(data["kind"]),
            target_force_n=float(data["targetForceN"]),
            target_elongation_mm=float(data["targetElongationMm"]),
            gaussian_width_mm=float(data["gaussianWidthMm"]),
        )


def _check_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


def _gaussian_envelope(params: SpringParams, elongation: float) -> float:
    u = elongation - params.target_elongation_mm
    w = params.gaussian_width_mm
    return math.exp(-(u * u) / (2.0 * w * w))


def spring_force(params: SpringParams, elongation: float) -> float:
    """Model force at the given elongation.

    The linear spring clamps to 0 N at non-positive elongation (a real
    spring detaches below rest length); the nonlinear springs return the
    exact formula value everywhere, leaving any device clamping to the
    engine.
    """
    elongation = _check_finite(elongation, "elongation")
    ft = params.target_force_n
    if params.kind is SpringKind.LINEAR:
        if elongation <= 0.0:
            return 0.0
        # ft * (x / x_t) rather than (ft / x_t) * x: exact at the anchor.
        return ft * (elongation / params.target_elongation_mm)
    if params.kind is SpringKind.GAUSSIAN:
        return ft * _gaussian_envelope(params, elongation)
    # Antisymmetric: mirror the Gaussian about the anchor point past the
    # target, producing a monotone profile with a plateau at the target.
    if elongation < params.target_elongation_mm:
        return ft * _gaussian_envelope(params, elongation)
    return 2.0 * ft - ft * _gaussian_envelope(params, elongation)


def spring_slope(params: SpringParams, elongation: float) -> float:
    """Analytic derivative dF/dx of the active branch, in N/mm."""
    elongation = _check_finite(elongation, "elongation")
    ft = params.target_force_n
    if params.kind is SpringKind.LINEAR:
        if elongation < 0.0:
            return 0.0
        return ft / params.target_elongation_mm
    u = elongation - params.target_elongation_mm
    w2 = params.gaussian_width_mm ** 2
    gauss_slope = -ft * (u / w2) * _gaussian_envelope(params, elongation)
    if params.kind is SpringKind.GAUSSIAN or elongation < params.target_elongation_mm:
        return gauss_slope
    return -gauss_slope


def _bisect(func, lo: float, hi: float, tol: float) -> float:
    """Find the root of ``func`` on [lo, hi], assuming a sign change."""
    f_lo = func(lo)
    if f_lo == 0.0:
        return lo
    f_hi = func(hi)
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NoSolutionError(f"no sign change on [{lo}, {hi}]")
    for _ in range(MAX_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if f_mid == 0.0 or (hi - lo) <= tol:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inverse_elongations(params: SpringParams, force: float) -> list[float]:
    """All non-negative elongations producing the given force, ascending.

    The Gaussian spring yields two solutions for forces strictly below the
    target (one on each side of the peak) whenever the left one is
    non-negative; the linear and antisymmetric springs are monotone and
    yield exactly one. Raises :class:`NoSolutionError` if the force is not
    attained at any non-negative elongation.
    """
    force = _check_finite(force, "force")
    ft = params.target_force_n
    xt = params.target_elongation_mm
    w = params.gaussian_width_mm
    if force <= 0.0:
        raise NoSolutionError("force must be strictly positive")

    if params.kind is SpringKind.LINEAR:
        return [xt * (force / ft)]

    if params.kind is SpringKind.GAUSSIAN:
        if force > ft:
            raise NoSolutionError(f"gaussian spring never exceeds {ft} N")
        if force == ft:
            return [xt]
        func = lambda x: spring_force(params, x) - force  # noqa: E731
        solutions = []
        if spring_force(params, 0.0) <= force:
            solutions.append(_bisect(func, 0.0, xt, ROOT_TOL_MM))
        hi = xt + w
        while spring_force(params, hi) > force:
            hi += w
        solutions.append(_bisect(func, xt, hi, ROOT_TOL_MM))
        return solutions

    # Antisymmetric spring: monotone on [0, inf), asymptote 2*ft.
    if force >= 2.0 * ft:
        raise NoSolutionError(f"antisymmetric spring stays below {2 * ft} N")
    if force == ft:
        return [xt]
    if spring_force(params, 0.0) > force:
        raise NoSolutionError("force below the value at zero elongation")
    func = lambda x: spring_force(params, x) - force  # noqa: E731
    hi = xt
    while spring_force(params, hi) < force:
        hi += w
    return [_bisect(func, 0.0, hi, ROOT_TOL_MM)]


def linear_intersections(params: SpringParams) -> tuple[float, float]:
    """Non-target crossings of the nonlinear and same-anchor linear springs.

    Returns (a, b) with a < target < b. Below a and above b the linear
    spring's force error is the smaller one; between them the nonlinear
    error is smaller. By the point symmetry of the antisymmetric profile
    about the anchor, b is derived exactly as 2*target - a. The same
    interval applies to the Gaussian spring because both nonlinear
    families share the same absolute force error at every elongation.
    """
    if params.kind is SpringKind.LINEAR:
        raise InvalidInputError("intersections are defined for the nonlinear springs")
    ft = params.target_force_n
    xt = params.target_elongation_mm
    k = ft / xt

    def gap(x: float) -> float:
        return ft * _gaussian_envelope(params, x) - k * x

    # gap > 0 just below the anchor and < 0 further down; scan from the
    # anchor downward for the sign change closest to it (the Gaussian tail
    # crosses the line again near zero, which is not the crossing sought).
    n_scan = 1000
    hi = xt * (1.0 - 1.0 / n_scan)
    x_prev = hi
    bracket = None
    for i in range(2, n_scan + 1):
        x = xt * (1.0 - i / n_scan)
        if gap(x) < 0.0 <= gap(x_prev):
            bracket = (x, x_prev)
            break
        x_prev = x
    if bracket is None:
        raise NoSolutionError("no intersection found below the target elongation")
    a = _bisect(gap, bracket[0], bracket[1], INTERSECTION_TOL_MM)
    return a, 2.0 * xt - a
