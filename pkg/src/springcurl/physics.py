"""Cube landing physics and target-board scoring.

The release force maps to a landing distance through a closed form (no
time-integrated sliding): distance = C * (F*UT/m)^2 / (2*mu*g). The
calibration constant C absorbs the unit gap between the physical sliding
model and the game's board geometry; its default is fixed by requiring
that the 10 N target force lands exactly on the board center at 500
game-units, which reduces the map to D(F) = 5*F^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidInputError

BOARD_CENTER_DISTANCE = 500.0
BOARD_RADIUS = 29.0
RING_POINTS = (100, 20, 10, 5, 2, 1)


@dataclass(frozen=True)
class PhysicsParams:
    cube_mass_kg: float = 1.0
    gravity_m_s2: float = 9.8
    friction_coeff: float = 0.02
    frame_update_s: float = 0.02
    calibration: float = 4900.0

    def __post_init__(self):
        if not self.calibration > 0:
            raise InvalidInputError("calibration constant must be positive")

    @classmethod
    def calibrated(cls, target_force_n: float = 10.0,
                   center_distance: float = BOARD_CENTER_DISTANCE,
                   **kwargs) -> "PhysicsParams":
        """Solve for C so the target force lands on the board center."""
        base = cls(calibration=1.0, **kwargs)
        raw = travel_distance(base, target_force_n)
        return cls(calibration=center_distance / raw, **kwargs)

    def to_wire(self) -> dict:
        return {
            "cubeMassKg": self.cube_mass_kg,
            "gravityMs2": self.gravity_m_s2,
            "frictionCoeff": self.friction_coeff,
            "frameUpdateS": self.frame_update_s,
            "calibration": self.calibration,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "PhysicsParams":
        return cls(
            cube_mass_kg=float(data["cubeMassKg"]),
            gravity_m_s2=float(data["gravityMs2"]),
            friction_coeff=float(data["frictionCoeff"]),
            frame_update_s=float(data["frameUpdateS"]),
            calibration=float(data["calibration"]),
        )


def _equal_width_boundaries(radius: float, n: int) -> tuple[float, ...]:
    return tuple(radius * (i + 1) / n for i in range(n))


@dataclass(frozen=True)
class TargetBoard:
    center_distance: float = BOARD_CENTER_DISTANCE
    board_radius: float = BOARD_RADIUS
    ring_points: tuple[int, ...] = RING_POINTS
    ring_boundaries: tuple[float, ...] = field(
        default_factory=lambda: _equal_width_boundaries(BOARD_RADIUS, len(RING_POINTS))
    )

    def __post_init__(self):
        if len(self.ring_boundaries) != len(self.ring_points):
            raise InvalidInputError("one boundary per ring required")
        if any(b2 <= b1 for b1, b2 in zip(self.ring_boundaries, self.ring_boundaries[1:])):
            raise InvalidInputError("ring boundaries must be strictly ascending")
        if self.ring_boundaries[-1] != self.board_radius:
            raise InvalidInputError("outermost boundary must equal the board radius")

    def to_wire(self) -> dict:
        return {
            "centerDistance": self.center_distance,
            "boardRadius": self.board_radius,
            "ringPoints": list(self.ring_points),
            "ringBoundaries": list(self.ring_boundaries),
        }

    @classmethod
    def from_wire(cls, data: dict) -> "TargetBoard":
        return cls(
            center_distance=float(data["centerDistance"]),
            board_radius=float(data["boardRadius"]),
            ring_points=tuple(int(p) for p in data["ringPoints"]),
            ring_boundaries=tuple(float(b) for b in data["ringBoundaries"]),
        )


def travel_distance(phys: PhysicsParams, release_force_n: float) -> float:
    """Landing distance in game-units for a release force; D(F) ~ F^2."""
    if release_force_n < 0:
        raise InvalidInputError("release force must be non-negative")
    v0 = release_force_n * phys.frame_update_s / phys.cube_mass_kg
    return phys.calibration * v0 * v0 / (2.0 * phys.friction_coeff * phys.gravity_m_s2)


def force_for_distance(phys: PhysicsParams, landing: float) -> float:
    """The unique non-negative force whose travel distance is ``landing``."""
    if landing < 0:
        raise InvalidInputError("landing distance must be non-negative")
    v0 = math.sqrt(2.0 * phys.friction_coeff * phys.gravity_m_s2 * landing / phys.calibration)
    return v0 * phys.cube_mass_kg / phys.frame_update_s


def score_for_distance(board: TargetBoard, landing: float) -> int:
    """Points for a landing distance; 0 outside the board radius.

    Ring boundaries are inclusive: a landing exactly on a boundary scores
    the inner ring's points.
    """
    miss = abs(landing - board.center_distance)
    if miss > board.board_radius:
        return 0
    for boundary, points in zip(board.ring_boundaries, board.ring_points):
        if miss <= boundary:
            return points
    return 0  # unreachable: last boundary equals the radius
