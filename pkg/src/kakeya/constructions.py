"""Explicit small-area movers: trivial sets, Pál joins, Perron trees, needle reversal,
and a compact set of Hausdorff dimension 2 that can be moved anywhere.

Every construction returns plain :class:`~kakeya.movements.Movement` objects
and scenes, so the raster layer can measure exactly what was built.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidInputError, NotConcentricError, NotParallelError
from .motions import IDENTITY, RigidMotion, as_point, point_pair, rotation, translation
from .movements import ConstantMovement, Movement, SequenceMovement, elementary_movement
from .raster import GridSpec, RasterMask, SparseSweep, neighborhood, rasterize, sparse_sweep
from .scene import Arc, Polygon, Scene, Segment

PARALLEL_TOL = 1e-9
POSE_TOL = 1e-9


# ---------------------------------------------------------------------------
# helpers


def _unit(z) -> complex:
    z = as_point(z)
    if abs(z) == 0:
        raise InvalidInputError("direction must be nonzero")
    return z / abs(z)


def rotation_stages(center, phi: float) -> list[Movement]:
    """Elementary rotations about ``center`` by a total angle ``phi``.

    Angles of magnitude pi or more are cut into equal parts below pi, since a
    single elementary rotation only exists for ``|phi| < pi``.
    """
    if phi == 0:
        return []
    parts = max(1, int(math.ceil(abs(phi) / (math.pi - 1e-6))))
    return [elementary_movement(rotation(center, phi / parts)) for _ in range(parts)]


def _as_movement(stages: list[Movement]) -> Movement:
    if not stages:
        return ConstantMovement()
    if len(stages) == 1:
        return stages[0]
    return SequenceMovement(stages)


def _pose_distance(s1: Scene, s2: Scene) -> float:
    a, b = s1.support(), s2.support()
    if a.shape != b.shape:
        return math.inf
    return float(np.max(np.abs(a - b), initial=0.0))


# ---------------------------------------------------------------------------
# trivial (K)-sets


def trivial_parallel_mover(scene: Scene, direction, distance: float) -> Movement:
    """Slide a union of segments parallel to ``direction`` along that direction."""
    e = _unit(direction)
    for p in scene.primitives:
        if not isinstance(p, Segment):
            raise NotParallelError(f"{type(p).__name__} is not a segment")
        d = p.b - p.a
        if abs(d) and abs((d * e.conjugate()).imag) / abs(d) > math.sin(PARALLEL_TOL):
            raise NotParallelError(f"segment {p} is not parallel to {e}")
    return elementary_movement(translation(distance * e))


def trivial_concentric_mover(scene: Scene, center, angle: float) -> Movement:
    """Rotate a union of arcs about their common centre."""
    c = as_point(center)
    for p in scene.primitives:
        if not isinstance(p, Arc):
            raise NotConcentricError(f"{type(p).__name__} is not an arc")
        if abs(p.center - c) > PARALLEL_TOL * max(1.0, abs(c)):
            raise NotConcentricError(f"arc centred at {p.center} instead of {c}")
    return _as_movement(rotation_stages(c, angle))


# ---------------------------------------------------------------------------
# needle schedules and Pál joins


@dataclass
class NeedleSchedule:
    """Stages ``(movement, pose at stage start)`` run one after another."""

    start: Scene
    stages: list[tuple[Movement, Scene]] = field(default_factory=list)
    total_area_budget: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    def movement(self) -> Movement:
        return _as_movement([m for m, _ in self.stages])

    def end_scene(self) -> Scene:
        if not self.stages:
            return self.start
        m, s = self.stages[-1]
        return s.transformed(m.end())

    def pose_mismatch(self) -> float:
        """Largest gap between where a stage leaves the scene and where the next one picks it up."""
        worst = 0.0
        current = self.start
        for m, s in self.stages:
            worst = max(worst, _pose_distance(current, s))
            current = s.transformed(m.end())
        return worst

    def measure(self, cell: float, time_steps: int = 2, translations: bool = True) -> SparseSweep:
        """Sparse raster sweep of the whole schedule (optionally without its straight slides)."""
        return sparse_sweep(self.movement(), self.start, time_steps, cell, translations=translations)


class _Builder:
    def __init__(self, start: Scene):
        self.schedule = NeedleSchedule(start)
        self.pose = start

    def add(self, m: Movement) -> None:
        if isinstance(m, ConstantMovement):
            return
        self.schedule.stages.append((m, self.pose))
        self.pose = self.pose.transformed(m.end())

    def extend(self, ms) -> None:
        for m in ms:
            self.add(m)

    @property
    def segment(self) -> Segment:
        return self.pose.primitives[0]


def pal_angle(lateral_offset: float, segment_length: float, eps: float) -> float:
    """Tilt angle whose two sliver rotations stay well inside an area budget ``eps``."""
    return eps / (2.0 * (abs(lateral_offset) + segment_length) ** 2)


def pal_join_stages(current: Segment, target: Segment, eps: float) -> tuple[list[Movement], dict]:
    """Movements taking ``current`` onto the parallel, equally oriented segment ``target``.

    Lateral offsets are crossed by tilting the segment by a small angle about
    its midpoint, sliding it along the tilted line, tilting back and sliding
    along the target line. Sliding a segment along its own line sweeps no
    area, so only the two sliver rotations (``l^2 theta / 4`` each) cost area.
    """
    e = current.direction()
    ell = current.length()
    if abs(target.length() - ell) > POSE_TOL * max(1.0, ell) or (
            ell and abs(target.direction() - e) > PARALLEL_TOL):
        raise InvalidInputError("Pál joins need parallel, equally oriented segments of equal length")
    w = (target.a - current.a) * e.conjugate()
    along, delta = w.real, w.imag
    info = {"lateral_offset": abs(delta), "theta": 0.0, "slide": 0.0, "area_bound": 0.0}
    if abs(delta) <= 1e-12 * max(1.0, abs(along)):
        return ([elementary_movement(translation(target.a - current.a))] if abs(w) else []), info
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    theta = min(pal_angle(delta, ell, eps), math.pi / 4)
    sigma = 1.0 if delta > 0 else -1.0
    forward = 1.0 if along >= 0 else -1.0
    tilt = sigma * forward * theta
    s = abs(delta) / math.sin(theta)
    mid = 0.5 * (current.a + current.b)
    shift = forward * s * e * cmath.exp(1j * tilt)
    stages = [elementary_movement(rotation(mid, tilt)),
              elementary_movement(translation(shift)),
              elementary_movement(rotation(mid + shift, -tilt))]
    # the tilted slide reaches the target line exactly; finish along it
    end = current.a
    for m in stages:
        end = m.end()(end)
    if abs(target.a - end):
        stages.append(elementary_movement(translation(target.a - end)))
    info.update(theta=theta, slide=s, area_bound=0.5 * ell * ell * theta)
    return stages, info


def pal_join(segment_length: float, lateral_offset: float, eps: float) -> NeedleSchedule:
    """Schedule moving ``[0, l]`` on the x-axis to the parallel segment at height ``lateral_offset``."""
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if lateral_offset < 0 or not segment_length > 0:
        raise InvalidInputError("need segment_length > 0 and lateral_offset >= 0")
    start = Segment(0j, complex(segment_length))
    b = _Builder(Scene([start]))
    if lateral_offset == 0:
        b.schedule.details = {"theta": 0.0, "slide": 0.0, "area_bound": 0.0, "lateral_offset": 0.0}
        return b.schedule
    target = Segment(1j * lateral_offset, segment_length + 1j * lateral_offset)
    stages, info = pal_join_stages(start, target, eps)
    b.extend(stages)
    b.schedule.total_area_budget = eps
    b.schedule.details = info
    b.schedule.details["target"] = target.to_json()
    return b.schedule


# ---------------------------------------------------------------------------
# Perron trees


def perron_ratios(k: int) -> list[float]:
    """Overlap ratio for merge level ``m``; with these the union covers ``2/(k+2)`` of the triangle."""
    return [(k + 1 - m) / (k + 2 - m) for m in range(k)]


def perron_offsets(k: int) -> np.ndarray:
    """Shift of each of the ``2**k`` pieces along the base, as a fraction of the base length.

    Pieces are merged pairwise level by level; at each merge the right group
    is pushed left until the two groups' bases overlap in a fraction
    ``1 - ratio`` of their combined width.
    """
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    n = 1 << k
    off = np.zeros(n)
    left = np.arange(n, dtype=float) / n  # base start of each piece (before shifting)
    size = 1
    for ratio in perron_ratios(k):
        for g in range(0, n, 2 * size):
            a = left[g] + off[g]
            b = left[g + size - 1] + 1.0 / n + off[g + size - 1]
            c = left[g + size] + off[g + size]
            d = left[g + 2 * size - 1] + 1.0 / n + off[g + 2 * size - 1]
            off[g + size:g + 2 * size] += (b - c) - (1.0 - ratio) * ((b - a) + (d - c))
        size *= 2
    return off


def unit_triangle() -> Scene:
    """Triangle with unit base on the x-axis and apex at height one."""
    return Scene([Polygon([0, 1, 0.5 + 1j])])


def _triangle_vertices(base_triangle: Scene) -> tuple[complex, complex, complex]:
    if len(base_triangle.primitives) != 1:
        raise InvalidInputError("the base triangle scene must hold one polygon")
    p = base_triangle.primitives[0]
    if not isinstance(p, Polygon) or len(p.vertices) != 3:
        raise InvalidInputError("the base triangle must be a three-vertex polygon")
    if abs(p.signed_area()) <= 1e-15:
        raise InvalidInputError("the base triangle is degenerate")
    p0, p1, apex = (complex(v) for v in p.vertices)
    return p0, p1, apex


def perron_pieces(k: int, base_triangle: Scene | None = None) -> list[Polygon]:
    """The ``2**k`` translated subtriangles; vertices ``(p0, p1, apex)`` with base ``p0 -> p1``."""
    p0, p1, apex = _triangle_vertices(base_triangle or unit_triangle())
    n = 1 << k
    base = p1 - p0
    off = perron_offsets(k) * base
    xs = p0 + base * np.arange(n + 1) / n
    return [Polygon([xs[i] + off[i], xs[i + 1] + off[i], apex + off[i]]) for i in range(n)]


def _in_triangle(z: np.ndarray, tri: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    a, b, c = tri
    area = ((b - a).conjugate() * (c - a)).imag
    s = ((b - a).conjugate() * (z - a)).imag / area
    t = ((z - a).conjugate() * (c - a)).imag / area
    return (s >= -tol) & (t >= -tol) & (s + t <= 1 + tol)


@dataclass
class ConstructionReport:
    name: str
    measured: dict[str, Any]
    asserted: dict[str, Any]
    parameters: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {"construction": self.name, "parameters": self.parameters,
                "measured": self.measured, "asserted": self.asserted}


def perron_directions_ok(k: int, base_triangle: Scene | None = None, samples: int = 33) -> bool:
    """Each base direction ``apex -> x_i`` is realised by a full-length segment inside some piece."""
    p0, p1, apex = _triangle_vertices(base_triangle or unit_triangle())
    pieces = perron_pieces(k, base_triangle)
    n = len(pieces)
    s = np.linspace(0.0, 1.0, samples)
    for i in range(n + 1):
        x = p0 + (p1 - p0) * i / n
        found = False
        for q in (i - 1, i):
            if 0 <= q < n:
                tri = pieces[q].vertices
                shift = tri[2] - apex
                z = apex + shift + s * (x - apex)
                if np.all(_in_triangle(z, tri)):
                    found = True
        if not found:
            return False
    return True


def perron_tree(k: int, base_triangle: Scene | None = None,
                cell: float = 1e-3) -> tuple[Scene, ConstructionReport]:
    """Overlapping rearrangement of ``2**k`` subtriangles with its measured union area."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    tri = base_triangle or unit_triangle()
    pieces = perron_pieces(k, tri)
    scene = Scene(pieces)
    grid = GridSpec.around(scene.bbox(), cell)
    mask = rasterize(scene, grid)
    tri_area = abs(tri.primitives[0].signed_area())
    perimeter = mask.boundary_length()
    report = ConstructionReport(
        "perron_tree",
        measured={"union_area": mask.area(), "ratio": mask.area() / tri_area,
                  "cells": mask.count(), "raster_boundary_length": perimeter},
        asserted={"pieces": len(pieces), "triangle_area": tri_area,
                  "union_fraction_bound": 2.0 / (k + 2),
                  "directions_preserved": perron_directions_ok(k, tri)},
        parameters={"k": k, "cell": cell},
    )
    return scene, report


# ---------------------------------------------------------------------------
# needle reversal


_HALF_WIDTH = math.tan(math.pi / 6)  # 60 degree trees of height one
_TREES = 3


def _direction(x: float) -> complex:
    return complex(x, 1.0) / abs(complex(x, 1.0))


def _tree_layout(k: int):
    """Apexes and direction fans of the three trees, chained apex to apex."""
    n = 1 << k
    w = 2 * _HALF_WIDTH
    xs = -_HALF_WIDTH + w * np.arange(n + 1) / n
    off = perron_offsets(k) * w
    apexes, dirs = [], []
    anchor = 0j
    for j in range(_TREES):
        rho = cmath.exp(-1j * math.pi * j / _TREES)
        a = anchor + rho * off
        apexes.append(a)
        dirs.append(np.array([rho * _direction(x) for x in xs]))
        anchor = a[-1]
    return apexes, dirs


def _lateral_offsets(k: int) -> np.ndarray:
    apexes, dirs = _tree_layout(k)
    out = []
    for j in range(_TREES):
        a, d = apexes[j], dirs[j]
        gaps = np.diff(a)
        out.append(np.abs((gaps * d[1:-1].conjugate()).imag))
    end = apexes[-1][-1]
    start_b = dirs[0][0]
    e = dirs[-1][-1]
    out.append(np.array([abs(((start_b - end) * e.conjugate()).imag)]))
    return np.concatenate(out)


def _join_budgets(deltas: np.ndarray, total: float, ell: float) -> np.ndarray:
    """Split a join budget so tilt angles grow like ``sqrt(delta)`` (minimises total sliding)."""
    weights = np.sqrt(deltas) * (deltas + ell) ** 2
    s = weights.sum()
    return np.zeros_like(deltas) if s == 0 else total * weights / s


def needle_cost(k: int, eps: float) -> tuple[float, float]:
    """(Perron area bound, estimated total slide length) for depth ``k``; slide is inf if infeasible."""
    perron = _TREES * _HALF_WIDTH * 2.0 / (k + 2)
    spare = eps - perron
    if spare <= 0:
        return perron, math.inf
    deltas = _lateral_offsets(k)
    budgets = _join_budgets(deltas, spare, 1.0)
    pos = deltas > 0
    theta = budgets[pos] / (2 * (deltas[pos] + 1.0) ** 2)
    return perron, float(np.sum(2 * deltas[pos] / np.sin(theta)))


def choose_needle_depth(eps: float, max_k: int = 14) -> int:
    """Depth with the least estimated sliding among those whose Perron bound fits under ``eps``."""
    best, best_k = math.inf, None
    for k in range(1, max_k + 1):
        _, slide = needle_cost(k, eps)
        if slide < best:
            best, best_k = slide, k
    if best_k is None:
        raise InvalidInputError(f"no Perron depth up to {max_k} fits the budget {eps}")
    return best_k


def needle_reversal_schedule(eps: float, k: int | None = None) -> NeedleSchedule:
    """Turn a unit needle around within total area ``eps``.

    The needle pivots about the apex inside every piece of three 60 degree
    Perron trees (each piece's sector lies in its triangle), Pál joins carry
    it between consecutive pieces, and a final join brings it back onto its
    starting segment with the ends swapped.
    """
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if k is None:
        k = choose_needle_depth(eps)
    perron_bound, _ = needle_cost(k, eps)
    if perron_bound >= eps:
        raise InvalidInputError(f"depth {k} cannot meet eps={eps}")
    apexes, dirs = _tree_layout(k)
    deltas = _lateral_offsets(k)
    budgets = iter(_join_budgets(deltas, eps - perron_bound, 1.0))
    start = Segment(apexes[0][0], apexes[0][0] + dirs[0][0])
    b = _Builder(Scene([start]))
    n = 1 << k
    thetas = []
    for j in range(_TREES):
        for i in range(n):
            seg = b.segment
            turn = cmath.phase(dirs[j][i + 1] / dirs[j][i])
            b.extend(rotation_stages(seg.a, turn))
            if i + 1 < n:
                a_next = apexes[j][i + 1]
                stages, info = pal_join_stages(b.segment, Segment(a_next, a_next + dirs[j][i + 1]),
                                               next(budgets))
                b.extend(stages)
                thetas.append(info["theta"])
    target = Segment(start.b, start.a)
    stages, info = pal_join_stages(b.segment, target, next(budgets))
    b.extend(stages)
    thetas.append(info["theta"])
    sched = b.schedule
    sched.total_area_budget = eps
    end = b.segment
    sched.details = {
        "k": k,
        "pieces": _TREES * n,
        "stages": len(sched.stages),
        "perron_area_bound": perron_bound,
        "join_area_budget": eps - perron_bound,
        "join_area_bound": float(sum(0.5 * t for t in thetas)),
        "min_theta": float(min(t for t in thetas if t > 0)) if any(thetas) else 0.0,
        "end_pose_error": max(abs(end.a - target.a), abs(end.b - target.b)),
        "start": start.to_json(),
        "target": target.to_json(),
    }
    return sched


# ---------------------------------------------------------------------------
# the dimension-2 example


@dataclass(frozen=True)
class CantorSpec:
    """Keep-the-ends Cantor construction: each interval keeps two end pieces of relative length ``ratio``."""

    lo: float
    hi: float
    ratio: float = 1.0 / 3.0
    depth: int = 0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InvalidInputError("interval must have positive length")
        if not 0 < self.ratio < 0.5:
            raise InvalidInputError("ratio must lie in (0, 1/2)")
        if self.depth < 0:
            raise InvalidInputError("depth must be >= 0")

    def intervals(self) -> np.ndarray:
        """``(2**depth, 2)`` array of closed intervals, sorted."""
        lo = np.array([self.lo])
        length = self.hi - self.lo
        for _ in range(self.depth):
            keep = length * self.ratio
            lo = np.concatenate([lo, lo + length - keep])
            length = keep
        lo.sort()
        return np.stack([lo, lo + length], axis=1)

    def measure(self) -> float:
        return (self.hi - self.lo) * (2 * self.ratio) ** self.depth

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        iv = self.intervals()
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(iv[:, 0], x + tol, side="right") - 1
        k = np.clip(k, 0, len(iv) - 1)
        return (x >= iv[k, 0] - tol) & (x <= iv[k, 1] + tol)

    def to_json(self):
        return {"interval": [self.lo, self.hi], "ratio": self.ratio, "depth": self.depth}


def _patch(r0: float, r1: float, y0: float, y1: float, max_step: float) -> Polygon:
    """Polygon inside ``{x > 0, y0 <= y <= y1, r0 <= |p| <= r1}``.

    Outer-arc vertices lie on the outer circle; the inner arc is replaced by
    tangent segments, so every chord stays inside the patch.
    """
    ao0, ao1 = math.asin(y0 / r1), math.asin(y1 / r1)
    ai0, ai1 = math.asin(y0 / r0), math.asin(y1 / r0)
    mo = max(1, int(math.ceil((ao1 - ao0) / max_step)))
    mi = max(1, int(math.ceil((ai1 - ai0) / max_step)))
    outer = r1 * np.exp(1j * np.linspace(ao0, ao1, mo + 1))
    outer[0] = complex(math.sqrt(r1 * r1 - y0 * y0), y0)
    outer[-1] = complex(math.sqrt(r1 * r1 - y1 * y1), y1)
    d = (ai1 - ai0) / mi
    inner_mid = (r0 / math.cos(d / 2)) * np.exp(1j * (ai0 + (np.arange(mi) + 0.5) * d))
    inner = np.concatenate([[complex(math.sqrt(r0 * r0 - y0 * y0), y0)], inner_mid,
                            [complex(math.sqrt(r0 * r0 - y1 * y1), y1)]])
    return Polygon(np.concatenate([outer, inner[::-1]]))


def dimension2_example(E: CantorSpec, F: CantorSpec, max_step: float = 0.01) -> Scene:
    """Finite-depth approximation of ``{(x, y): x > 0, y in F, |(x, y)| in E}`` as patches."""
    if E.lo < 1 or E.hi > 2:
        raise InvalidInputError("E must lie in [1, 2]")
    if F.lo < 0 or F.hi > 0.5:
        raise InvalidInputError("F must lie in [0, 1/2]")
    return Scene(_patch(r0, r1, y0, y1, max_step)
                 for r0, r1 in E.intervals() for y0, y1 in F.intervals())


def _decompose(alpha: RigidMotion) -> tuple[complex, float]:
    r = abs(alpha.c)
    v = alpha.c / r if r > 0 else 1.0 + 0j
    return v, r


def dimension2_movement(alpha: RigidMotion) -> Movement:
    """Rotate about the origin to ``v A``, translate by ``c``, rotate about ``c`` to ``u A + c``."""
    if alpha.is_identity(1e-12):
        return ConstantMovement()
    v, r = _decompose(alpha)
    stages = rotation_stages(0j, cmath.phase(v))
    if r > 0:
        stages.append(elementary_movement(translation(alpha.c)))
    stages += rotation_stages(alpha.c, cmath.phase(alpha.u / v))
    return _as_movement(stages)


def dimension2_cover(grid: GridSpec, E: CantorSpec, F: CantorSpec, alpha: RigidMotion) -> RasterMask:
    """Cells whose centre lies in ``B ∪ v·{y in F} ∪ (B + c)`` with ``B = {|p| in E}``."""
    v, _ = _decompose(alpha)
    z = grid.centers()
    occ = E.contains(np.abs(z)) | F.contains((z * v.conjugate()).imag) | E.contains(np.abs(z - alpha.c))
    return RasterMask(grid, occ)


def dimension2_report(depth: int, alpha: RigidMotion, cell: float = 2e-3,
                      ratio: float = 1.0 / 3.0) -> tuple[ConstructionReport, RasterMask]:
    """Sweep the depth-``depth`` example under ``dimension2_movement(alpha)`` and check containment."""
    from .raster import swept_box, sweep_stats

    E = CantorSpec(1.0, 2.0, ratio, depth)
    F = CantorSpec(0.0, 0.5, ratio, depth)
    scene = dimension2_example(E, F)
    M = dimension2_movement(alpha)
    grid = GridSpec.around(swept_box(M, scene), cell, margin=8 * cell)
    res = sweep_stats(M, scene, 2, grid)
    cover = neighborhood(dimension2_cover(grid, E, F, alpha), 2 * cell)
    outside = (res.mask - cover).count()
    report = ConstructionReport(
        "dimension2_example",
        measured={"sweep_area": res.mask.area(), "scene_area": rasterize(scene, grid).area(),
                  "cells_outside_cover": outside, "time_steps": res.time_steps,
                  "path_length": res.path_length},
        asserted={"contained_in_cover": outside == 0,
                  "end_matches_alpha": M.end().close_to(alpha, 1e-9),
                  "E_measure": E.measure(), "F_measure": F.measure()},
        parameters={"depth": depth, "ratio": ratio, "cell": cell, "alpha": alpha.to_json()},
    )
    return report, res.mask


__all__ = [
    "CantorSpec", "ConstructionReport", "NeedleSchedule", "choose_needle_depth", "dimension2_cover",
    "dimension2_example", "dimension2_movement", "dimension2_report", "needle_cost",
    "needle_reversal_schedule", "pal_angle", "pal_join", "pal_join_stages", "perron_directions_ok",
    "perron_offsets", "perron_pieces", "perron_ratios", "perron_tree", "rotation_stages",
    "trivial_concentric_mover", "trivial_parallel_mover", "unit_triangle", "IDENTITY", "point_pair",
]
