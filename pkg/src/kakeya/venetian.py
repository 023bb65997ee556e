"""Venetian-blind rectangle systems: nested unions of narrow rectangles whose
directions converge, with small shadow in the current direction and large
shadows and distance sets elsewhere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidInputError, SlatsDontFitError
from .motions import as_point, point_pair, translation
from .movements import Movement, elementary_movement
from .raster import GridSpec, rasterize, sweep_stats
from .scene import Rectangle, Scene

DIRECTION_TOL = 1e-9


def _unit(z) -> complex:
    z = as_point(z)
    if abs(z) == 0:
        raise InvalidInputError("direction must be nonzero")
    return z / abs(z)


def _axis_angle(a: complex, b: complex) -> float:
    """Angle between the undirected lines spanned by ``a`` and ``b``, in ``[0, pi/2]``."""
    t = abs(cmath.phase(b / a))
    return min(t, math.pi - t)


@dataclass(frozen=True)
class BlindParams:
    """Directions ``e_1, e_2, ...``, slat counts per refinement and widths per generation."""

    directions: tuple[complex, ...]
    slat_counts: tuple[int, ...]
    widths: tuple[float, ...]
    length: float
    center: complex = 0j
    spread: float = 1.0
    limit: complex = 1 + 0j

    def __post_init__(self):
        dirs = tuple(_unit(d) for d in self.directions)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "limit", _unit(self.limit))
        n = len(dirs)
        if n < 1:
            raise InvalidInputError("need at least one direction")
        if len(self.widths) != n or len(self.slat_counts) != n - 1:
            raise InvalidInputError("need one width per generation and one slat count per refinement")
        for i in range(n):
            for j in range(i):
                if _axis_angle(dirs[i], dirs[j]) <= DIRECTION_TOL:
                    raise InvalidInputError("directions must be pairwise distinct")
        w = np.asarray(self.widths, dtype=float)
        if not (0 < w[0] < 1):
            raise InvalidInputError("the first rectangle must have width in (0, 1)")
        if np.any(np.diff(w) >= 0) or np.any(w <= 0):
            raise InvalidInputError("widths must be positive and strictly decreasing")
        if any(int(m) < 2 for m in self.slat_counts):
            raise InvalidInputError("slat counts must be >= 2")
        if not self.length > w[0]:
            raise InvalidInputError("the first rectangle must be longer than it is wide")
        if not 0 < self.spread <= 1:
            raise InvalidInputError("spread must lie in (0, 1]")

    @property
    def generations(self) -> int:
        return len(self.directions)

    @classmethod
    def default(cls, generations: int = 4, slats: int = 3, width: float = 0.9,
                limit=1 + 0j, growth: float = 1.25) -> "BlindParams":
        """Directions at angle ``1/n`` from ``limit``; widths shrink just slowly enough that
        each parent's slats, laid end to end, still cover the parent's length."""
        if generations < 1 or generations > 6:
            raise InvalidInputError("default schedule covers 1 to 6 generations")
        e = _unit(limit)
        dirs = [e * cmath.exp(1j / n) for n in range(1, generations + 1)]
        widths = [width]
        for n in range(1, generations):
            # gap angles are 1/(n(n+1)); the ratio of consecutive gaps is n/(n+2)
            widths.append(growth * widths[-1] * n / (slats * (n + 2)))
        gamma1 = 0.5
        first_slat = (width - (widths[1] if generations > 1 else 0) * math.cos(gamma1)) / math.sin(gamma1)
        length = slats * first_slat * math.cos(gamma1) / growth if generations > 1 else 4 * width
        return cls(tuple(dirs), tuple([slats] * (generations - 1)), tuple(widths),
                   max(length, 2 * width), 0j, 1.0, e)

    def to_json(self):
        return {"directions": [point_pair(d) for d in self.directions],
                "slat_counts": list(self.slat_counts), "widths": list(self.widths),
                "length": self.length, "center": point_pair(self.center), "spread": self.spread,
                "limit": point_pair(self.limit)}


@dataclass
class RectangleSystem:
    generation: int
    direction: complex
    rectangles: tuple[Rectangle, ...]
    parents: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for r in self.rectangles:
            if _axis_angle(r.direction, self.direction) > DIRECTION_TOL:
                raise InvalidInputError("every rectangle must share the generation direction")

    def scene(self) -> Scene:
        return Scene(self.rectangles)

    def area_bound(self) -> float:
        return float(sum(r.length_ * r.width for r in self.rectangles))

    def to_json(self) -> dict[str, Any]:
        return {"generation": self.generation, "direction": point_pair(self.direction),
                "rectangles": [r.to_json() for r in self.rectangles]}


def init_blind(params: BlindParams) -> RectangleSystem:
    e = params.directions[0]
    return RectangleSystem(1, e, (Rectangle(params.center, e, params.length, params.widths[0]),))


def _slats(parent: Rectangle, e: complex, slats: int, width: float, spread: float) -> list[Rectangle]:
    d = parent.direction
    if (e * d.conjugate()).real < 0:
        e = -e
    gamma = cmath.phase(e / d)
    s, c = abs(math.sin(gamma)), math.cos(gamma)
    if s <= DIRECTION_TOL:
        raise InvalidInputError("the next direction must differ from the parent's")
    # each slat crosses the parent from one long side to the other
    length = (parent.width - width * c) / s
    if length <= width:
        raise SlatsDontFitError(f"slats of width {width} are too wide for a parent of width {parent.width}")
    axial = length * c + width * s
    if axial > parent.length_ * (1 + 1e-12):
        raise SlatsDontFitError("the parent is too short for even one slat at this angle")
    span = spread * (parent.length_ - axial)
    offsets = np.linspace(-span / 2, span / 2, slats)
    return [Rectangle(parent.center + t * d, e, length, width) for t in offsets]


def refine(sys: RectangleSystem, next_direction, slats: int, width: float,
           spread: float = 1.0) -> RectangleSystem:
    """Replace every rectangle by ``slats`` thin rectangles in ``next_direction`` inside it."""
    e = _unit(next_direction)
    if slats < 2:
        raise InvalidInputError("slats must be >= 2")
    if not width > 0:
        raise InvalidInputError("width must be positive")
    if _axis_angle(e, sys.direction) <= DIRECTION_TOL:
        raise InvalidInputError("the next direction must differ from the current one")
    children, parents = [], []
    for k, parent in enumerate(sys.rectangles):
        for child in _slats(parent, e, slats, width, spread):
            corners = child.corners()
            if not np.all(parent.contains(corners, tol=1e-9 * max(1.0, parent.length_))):
                raise SlatsDontFitError("a slat sticks out of its parent")
            children.append(child)
            parents.append(k)
    return RectangleSystem(sys.generation + 1, e, tuple(children), tuple(parents))


def build_blind(params: BlindParams) -> list[RectangleSystem]:
    """All generations ``K_1 ... K_N`` of a parameter set."""
    systems = [init_blind(params)]
    for n in range(1, params.generations):
        systems.append(refine(systems[-1], params.directions[n], params.slat_counts[n - 1],
                              params.widths[n], params.spread))
    return systems


def merged_length(intervals: np.ndarray) -> float:
    """Total length of a union of closed intervals given as rows ``[lo, hi]``."""
    if len(intervals) == 0:
        return 0.0
    iv = intervals[np.argsort(intervals[:, 0])]
    total, lo, hi = 0.0, iv[0, 0], iv[0, 1]
    for a, b in iv[1:]:
        if a > hi:
            total += hi - lo
            lo, hi = a, b
        elif b > hi:
            hi = b
    return float(total + hi - lo)


def projection_measure(sys: RectangleSystem, direction) -> float:
    """Length of the shadow of the union cast along ``direction`` (onto the orthogonal line)."""
    n = 1j * _unit(direction)
    iv = []
    for r in sys.rectangles:
        t = (r.corners() * n.conjugate()).real
        iv.append((t.min(), t.max()))
    return merged_length(np.array(iv, dtype=float).reshape(-1, 2))


def _point_rect_distance_range(r: Rectangle, p: complex) -> tuple[float, float]:
    w = (p - r.center) * r.direction.conjugate()
    dx = max(abs(w.real) - r.length_ / 2, 0.0)
    dy = max(abs(w.imag) - r.width / 2, 0.0)
    far = math.hypot(abs(w.real) + r.length_ / 2, abs(w.imag) + r.width / 2)
    return math.hypot(dx, dy), far


def distance_set_measure(sys: RectangleSystem, p) -> float:
    """Length of ``{|x - p| : x in union}``; each rectangle contributes a full interval."""
    p = as_point(p)
    iv = np.array([_point_rect_distance_range(r, p) for r in sys.rectangles], dtype=float)
    return merged_length(iv.reshape(-1, 2))


def probe_points(radius: float, count: int = 25, seed: int = 0) -> np.ndarray:
    """Deterministic probes in the closed disc of the given radius (sunflower layout)."""
    k = np.arange(count)
    r = radius * np.sqrt((k + 0.5) / count)
    th = k * math.pi * (3 - math.sqrt(5)) + 0.1 * seed
    return r * np.exp(1j * th)


@dataclass
class BlindMoverReport:
    sweep_area: float
    shadow: float
    caps: float
    band: float
    bound: float
    time_steps: int
    path_length: float

    @property
    def passed(self) -> bool:
        return self.sweep_area <= self.bound + self.band

    def to_json(self):
        return {"measured": {"sweep_area": self.sweep_area, "time_steps": self.time_steps,
                             "path_length": self.path_length},
                "asserted": {"shadow": self.shadow, "caps": self.caps, "band": self.band,
                             "bound": self.bound, "pass": self.passed}}


def blind_mover(sys: RectangleSystem, R: float, direction=None,
                cell: float = 1e-3) -> tuple[Movement, BlindMoverReport]:
    """Translate the system by ``R`` along ``direction`` (default: its own direction) and measure."""
    e = sys.direction if direction is None else _unit(direction)
    M = elementary_movement(translation(R * e))
    scene = sys.scene()
    x0, y0, x1, y1 = scene.bbox()
    c = R * e
    box = (min(x0, x0 + c.real), min(y0, y0 + c.imag), max(x1, x1 + c.real), max(y1, y1 + c.imag))
    grid = GridSpec.around(box, cell)
    res = sweep_stats(M, scene, 2, grid)
    shadow = projection_measure(sys, e)
    caps = rasterize(scene, grid).area()
    report = BlindMoverReport(res.mask.area(), shadow, caps, res.band_allowance(),
                              abs(R) * shadow + caps, res.time_steps, res.path_length)
    return M, report


def blind_report(params: BlindParams, probes: int = 25) -> dict[str, Any]:
    """Per-generation counts, shadows in every direction so far, and distance-set measures.

    Probes at generation ``n`` lie in the disc ``|p| <= n``; each probe's measure is compared
    with its value at the first generation whose disc contains it.
    """
    systems = build_blind(params)
    gens = []
    prev_shadows: list[float] = []
    for n, sys in enumerate(systems, start=1):
        shadows = [projection_measure(sys, params.directions[j]) for j in range(n)]
        retained = [shadows[j] / prev_shadows[j] for j in range(n - 1)]
        dist = []
        for q in probe_points(n, probes):
            entry = max(1, math.ceil(abs(q) - 1e-12))
            m = distance_set_measure(sys, q)
            m0 = distance_set_measure(systems[entry - 1], q)
            dist.append({"p": point_pair(q), "entry_generation": entry, "measure": m,
                         "entry_measure": m0, "retained": m / m0})
        gens.append({"generation": n, "rectangles": len(sys.rectangles), "shadows": shadows,
                     "current_shadow": shadows[-1], "shadow_retained": retained,
                     "distance_sets": dist})
        prev_shadows = shadows
    return {"params": params.to_json(), "generations": gens}


__all__ = [
    "BlindParams", "BlindMoverReport", "RectangleSystem", "blind_mover", "blind_report",
    "build_blind", "distance_set_measure", "init_blind", "merged_length", "probe_points",
    "projection_measure", "refine",
]
