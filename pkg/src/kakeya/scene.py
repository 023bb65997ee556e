"""Planar scenes built from bounded primitives.

Every primitive can be moved by a :class:`~kakeya.motions.RigidMotion`,
reports a bounding box and a 1-dimensional size, and round-trips through JSON.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Iterable, Union

import numpy as np

from .errors import InvalidInputError
from .motions import RigidMotion, as_point, point_pair

TWO_PI = 2.0 * math.pi


def _pts(z: np.ndarray) -> list[list[float]]:
    return [[float(p.real), float(p.imag)] for p in np.asarray(z).ravel()]


def _from_pts(data) -> np.ndarray:
    return np.array([as_point(p) for p in data], dtype=complex)


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def transformed(self, m: RigidMotion) -> "Segment":
        return Segment(m(self.a), m(self.b))

    def support(self) -> np.ndarray:
        return np.array([self.a, self.b])

    def length(self) -> float:
        return abs(self.b - self.a)

    def direction(self) -> complex:
        d = self.b - self.a
        return d / abs(d) if d else 1.0 + 0j

    def to_json(self):
        return {"type": "segment", "a": point_pair(self.a), "b": point_pair(self.b)}


@dataclass(frozen=True)
class Arc:
    """Arc of the circle ``|x - center| = radius`` from angle ``start`` counterclockwise by ``extent``."""

    center: complex
    radius: float
    start: float
    extent: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("arc radius must be positive")
        if not (0 < self.extent <= TWO_PI + 1e-12):
            raise InvalidInputError("arc extent must lie in (0, 2pi]")

    def transformed(self, m: RigidMotion) -> "Arc":
        return Arc(m(self.center), self.radius, self.start + cmath.phase(m.u), self.extent)

    def points(self, count: int) -> np.ndarray:
        th = self.start + self.extent * np.linspace(0.0, 1.0, count)
        return self.center + self.radius * np.exp(1j * th)

    def support(self) -> np.ndarray:
        return self.points(max(5, int(math.ceil(self.extent / (math.pi / 8))) + 1))

    def bbox_points(self) -> np.ndarray:
        # bounding box of an arc: endpoints plus any axis extremes it passes
        pts = [self.center + self.radius * cmath.exp(1j * self.start),
               self.center + self.radius * cmath.exp(1j * (self.start + self.extent))]
        s0 = self.start % TWO_PI
        for k in range(0, 9):
            th = k * math.pi / 2
            if s0 <= th <= s0 + self.extent:
                pts.append(self.center + self.radius * cmath.exp(1j * th))
        return np.array(pts)

    def length(self) -> float:
        return self.radius * self.extent

    def to_json(self):
        return {"type": "arc", "center": point_pair(self.center), "radius": self.radius,
                "start": self.start, "extent": self.extent}


@dataclass(frozen=True, eq=False)
class Polygon:
    """Closed polygon (filled); vertices as a complex array without repetition of the first."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex)
        if v.ndim != 1 or len(v) < 3:
            raise InvalidInputError("a polygon needs at least three vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("polygon vertices must be finite")
        object.__setattr__(self, "vertices", v)

    def transformed(self, m: RigidMotion) -> "Polygon":
        return Polygon(m.u * self.vertices + m.c)

    def support(self) -> np.ndarray:
        return self.vertices

    def length(self) -> float:
        v = self.vertices
        return float(np.sum(np.abs(np.roll(v, -1) - v)))

    def signed_area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1)
        return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))

    def edges(self) -> Iterable[Segment]:
        v = self.vertices
        for a, b in zip(v, np.roll(v, -1)):
            yield Segment(complex(a), complex(b))

    def to_json(self):
        return {"type": "polygon", "vertices": _pts(self.vertices)}


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=complex).ravel()
        if not np.all(np.isfinite(p)):
            raise InvalidInputError("points must be finite")
        object.__setattr__(self, "points", p)

    def transformed(self, m: RigidMotion) -> "PointCloud":
        return PointCloud(m.u * self.points + m.c)

    def support(self) -> np.ndarray:
        return self.points

    def length(self) -> float:
        return 0.0

    def to_json(self):
        return {"type": "points", "points": _pts(self.points)}


@dataclass(frozen=True)
class Rectangle:
    """Closed rectangle; ``direction`` is the unit vector of the side of length ``length``."""

    center: complex
    direction: complex
    length_: float
    width: float

    def __post_init__(self):
        d = complex(self.direction)
        if abs(d) == 0:
            raise InvalidInputError("rectangle direction must be nonzero")
        if self.length_ < 0 or self.width < 0:
            raise InvalidInputError("rectangle sides must be nonnegative")
        object.__setattr__(self, "direction", d / abs(d))

    def corners(self) -> np.ndarray:
        e = self.direction
        n = 1j * e
        hl, hw = 0.5 * self.length_, 0.5 * self.width
        return np.array([self.center - hl * e - hw * n, self.center + hl * e - hw * n,
                         self.center + hl * e + hw * n, self.center - hl * e + hw * n])

    def as_polygon(self) -> Polygon:
        return Polygon(self.corners())

    def transformed(self, m: RigidMotion) -> "Rectangle":
        return Rectangle(m(self.center), m.u * self.direction, self.length_, self.width)

    def support(self) -> np.ndarray:
        return self.corners()

    def length(self) -> float:
        return 2.0 * (self.length_ + self.width)

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        w = (np.asarray(z) - self.center) * self.direction.conjugate()
        return (np.abs(w.real) <= 0.5 * self.length_ + tol) & (np.abs(w.imag) <= 0.5 * self.width + tol)

    def to_json(self):
        return {"type": "rectangle", "center": point_pair(self.center),
                "direction": point_pair(self.direction), "length": self.length_,
                "width": self.width}


Primitive = Union[Segment, Arc, Polygon, PointCloud, Rectangle]


def primitive_from_json(d: dict[str, Any]) -> Primitive:
    try:
        kind = d["type"]
        if kind == "segment":
            return Segment(as_point(d["a"]), as_point(d["b"]))
        if kind == "arc":
            return Arc(as_point(d["center"]), float(d["radius"]), float(d["start"]),
                       float(d["extent"]))
        if kind == "polygon":
            return Polygon(_from_pts(d["vertices"]))
        if kind == "points":
            return PointCloud(_from_pts(d["points"]))
        if kind == "rectangle":
            return Rectangle(as_point(d["center"]), as_point(d["direction"]),
                             float(d["length"]), float(d["width"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad primitive {d!r}: {exc}") from exc
    raise InvalidInputError(f"unknown primitive type {d.get('type')!r}")


@dataclass(frozen=True)
class Scene:
    primitives: tuple[Primitive, ...] = ()

    def __init__(self, primitives: Iterable[Primitive] = ()):
        object.__setattr__(self, "primitives", tuple(primitives))

    def __len__(self):
        return len(self.primitives)

    def __add__(self, other: "Scene") -> "Scene":
        return Scene(self.primitives + other.primitives)

    def transformed(self, m: RigidMotion) -> "Scene":
        return Scene(p.transformed(m) for p in self.primitives)

    def support(self) -> np.ndarray:
        if not self.primitives:
            return np.zeros(0, dtype=complex)
        return np.concatenate([p.support() for p in self.primitives])

    def bbox(self) -> tuple[float, float, float, float] | None:
        pts = [p.bbox_points() if isinstance(p, Arc) else p.support() for p in self.primitives]
        pts = [p for p in pts if len(p)]
        if not pts:
            return None
        z = np.concatenate(pts)
        return float(z.real.min()), float(z.imag.min()), float(z.real.max()), float(z.imag.max())

    def length(self) -> float:
        return float(sum(p.length() for p in self.primitives))

    def to_json(self) -> dict[str, Any]:
        return {"primitives": [p.to_json() for p in self.primitives]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Scene":
        if not isinstance(data, dict) or not isinstance(data.get("primitives"), list):
            raise InvalidInputError("a scene document needs a 'primitives' list")
        return cls(primitive_from_json(p) for p in data["primitives"])
