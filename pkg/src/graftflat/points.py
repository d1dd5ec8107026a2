"""Point types on pants, cylinders and decomposition curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .hyp2 import H2Point


@dataclass(frozen=True)
class PantsPoint:
    """Point of a pair of pants: the hexagon sheet (0 front, 1 back) and its position in that hexagon."""

    pants: int
    sheet: int
    point: H2Point

    @property
    def z(self) -> complex:
        return self.point.z


@dataclass(frozen=True)
class CylinderPoint:
    """Point of the cylinder of a curve: u along the circumference, v across the height.

    Coordinates are in unscaled units of the underlying surface; v = 0 is the
    side glued to the first slot of the curve.
    """

    curve: int
    u: float
    v: float


@dataclass(frozen=True)
class CurvePoint:
    """Point on a decomposition curve at arclength u, measured from the first slot's origin."""

    curve: int
    u: float


SurfacePoint = Union[PantsPoint, CylinderPoint, CurvePoint]
