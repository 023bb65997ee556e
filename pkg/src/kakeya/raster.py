"""Occupancy grids: rasterising scenes, swept regions, neighbourhoods and components.

A cell is occupied when its centre lies within half a cell diagonal of the
set being drawn, so every raster area over-approximates the true area by at
most one dilation band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import GridMismatchError, InvalidInputError, SceneOutOfBoundsError
from .motions import RigidMotion
from .movements import (
    ConstantMovement,
    ElementaryMovement,
    Movement,
    SequenceMovement,
)
from .scene import Arc, PointCloud, Polygon, Rectangle, Scene, Segment

MAX_TIME_STEPS = 1 << 22
_BOUNDS_SLACK = 1e-9


@dataclass(frozen=True)
class GridSpec:
    xmin: float
    ymin: float
    xmax: float
    ymax: float
    cell: float

    def __post_init__(self):
        if not self.cell > 0:
            raise InvalidInputError("cell size must be positive")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InvalidInputError("grid box is degenerate")

    @property
    def cols(self) -> int:
        return max(1, int(math.ceil((self.xmax - self.xmin) / self.cell - 1e-9)))

    @property
    def rows(self) -> int:
        return max(1, int(math.ceil((self.ymax - self.ymin) / self.cell - 1e-9)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def half_diagonal(self) -> float:
        return self.cell / math.sqrt(2.0)

    def centers(self) -> np.ndarray:
        """Complex cell centres, shape ``(rows, cols)``."""
        x = self.xmin + (np.arange(self.cols) + 0.5) * self.cell
        y = self.ymin + (np.arange(self.rows) + 0.5) * self.cell
        return x[None, :] + 1j * y[:, None]

    def contains_box(self, box) -> bool:
        x0, y0, x1, y1 = box
        s = _BOUNDS_SLACK
        return (x0 >= self.xmin - s and y0 >= self.ymin - s
                and x1 <= self.xmax + s and y1 <= self.ymax + s)

    @classmethod
    def around(cls, box, cell: float, margin: float | None = None) -> "GridSpec":
        """Grid covering ``box`` with a margin (default four cells), snapped to the cell lattice."""
        x0, y0, x1, y1 = box
        m = 4 * cell if margin is None else margin
        x0 = math.floor((x0 - m) / cell) * cell
        y0 = math.floor((y0 - m) / cell) * cell
        x1 = math.ceil((x1 + m) / cell) * cell
        y1 = math.ceil((y1 + m) / cell) * cell
        return cls(x0, y0, x1, y1, cell)

    def to_json(self):
        return {"xmin": self.xmin, "ymin": self.ymin, "xmax": self.xmax, "ymax": self.ymax,
                "cell": self.cell}


class RasterMask:
    """Boolean occupancy over a :class:`GridSpec`; ``occupancy[row, col]``, row 0 at ``ymin``."""

    def __init__(self, grid: GridSpec, occupancy: np.ndarray | None = None):
        self.grid = grid
        if occupancy is None:
            occupancy = np.zeros(grid.shape, dtype=bool)
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.shape != grid.shape:
            raise InvalidInputError(f"occupancy shape {occupancy.shape} != grid shape {grid.shape}")
        self.occupancy = occupancy

    def count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def area(self) -> float:
        return self.count() * self.grid.cell ** 2

    def _same_grid(self, other: "RasterMask") -> None:
        if self.grid != other.grid:
            raise GridMismatchError("masks live on different grids")

    def __or__(self, other: "RasterMask") -> "RasterMask":
        self._same_grid(other)
        return RasterMask(self.grid, self.occupancy | other.occupancy)

    def __and__(self, other: "RasterMask") -> "RasterMask":
        self._same_grid(other)
        return RasterMask(self.grid, self.occupancy & other.occupancy)

    def __sub__(self, other: "RasterMask") -> "RasterMask":
        self._same_grid(other)
        return RasterMask(self.grid, self.occupancy & ~other.occupancy)

    def __eq__(self, other) -> bool:
        return (isinstance(other, RasterMask) and self.grid == other.grid
                and bool(np.array_equal(self.occupancy, other.occupancy)))

    def issubset(self, other: "RasterMask") -> bool:
        self._same_grid(other)
        return not bool(np.any(self.occupancy & ~other.occupancy))

    def centers(self) -> np.ndarray:
        """Complex centres of the occupied cells."""
        return self.grid.centers()[self.occupancy]

    def boundary_length(self) -> float:
        """Total length of cell edges separating occupied from clear cells (grid border counts)."""
        occ = np.pad(self.occupancy, 1)
        edges = np.count_nonzero(occ[1:, :] != occ[:-1, :]) + np.count_nonzero(occ[:, 1:] != occ[:, :-1])
        return edges * self.grid.cell

    def __repr__(self):
        return f"RasterMask({self.grid!r}, set={self.count()})"


def area(mask: RasterMask) -> float:
    return mask.area()


# ---------------------------------------------------------------------------
# stamping


def _flatten(scene: Scene):
    segs, pts, arcs, polys = [], [], [], []
    for p in scene.primitives:
        if isinstance(p, Segment):
            segs.append(p)
        elif isinstance(p, PointCloud):
            pts.append(p.points)
        elif isinstance(p, Arc):
            arcs.append(p)
        elif isinstance(p, Polygon):
            polys.append(p.vertices)
        elif isinstance(p, Rectangle):
            polys.append(p.corners())
        else:  # pragma: no cover
            raise InvalidInputError(f"unsupported primitive {p!r}")
    return segs, pts, arcs, polys


def _stamp(occ: np.ndarray, grid: GridSpec, scene: Scene, us: np.ndarray, cs: np.ndarray) -> None:
    if not scene.primitives or len(us) == 0:
        return
    us = np.ascontiguousarray(us, dtype=np.complex128)
    cs = np.ascontiguousarray(cs, dtype=np.complex128)
    x0, y0, cell, h = grid.xmin, grid.ymin, grid.cell, grid.half_diagonal
    segs, pts, arcs, polys = _flatten(scene)
    if segs:
        A = np.array([s.a for s in segs], dtype=np.complex128)
        B = np.array([s.b for s in segs], dtype=np.complex128)
        _kernels.sweep_segments(occ, x0, y0, cell, h, us, cs, A, B)
    if pts:
        _kernels.sweep_points(occ, x0, y0, cell, h, us, cs,
                              np.ascontiguousarray(np.concatenate(pts), dtype=np.complex128))
    if arcs:
        _kernels.sweep_arcs(occ, x0, y0, cell, h, us, cs,
                            np.array([a.center for a in arcs], dtype=np.complex128),
                            np.array([a.radius for a in arcs], dtype=np.float64),
                            np.array([a.start for a in arcs], dtype=np.float64),
                            np.array([a.extent for a in arcs], dtype=np.float64))
    if polys:
        starts = np.zeros(len(polys) + 1, dtype=np.int64)
        starts[1:] = np.cumsum([len(v) for v in polys])
        _kernels.sweep_polygons(occ, x0, y0, cell, h, us, cs,
                                np.ascontiguousarray(np.concatenate(polys), dtype=np.complex128),
                                starts)


def _check_fits(scene: Scene, grid: GridSpec) -> None:
    box = scene.bbox()
    if box is not None and not grid.contains_box(box):
        raise SceneOutOfBoundsError(f"scene box {box} leaves the grid box")


def rasterize(scene: Scene, grid: GridSpec) -> RasterMask:
    """Cells whose centre lies within ``cell/sqrt(2)`` of the scene (polygons count as filled)."""
    _check_fits(scene, grid)
    occ = np.zeros(grid.shape, dtype=bool)
    _stamp(occ, grid, scene, np.ones(1, complex), np.zeros(1, complex))
    return RasterMask(grid, occ)


# ---------------------------------------------------------------------------
# sweeping


@dataclass
class SweepResult:
    mask: RasterMask
    time_steps: int
    path_length: float

    def band_allowance(self, factor: float = 4.0) -> float:
        """Raster over-count allowed on top of a true area: ``factor * cell * path_length``."""
        return factor * self.mask.grid.cell * self.path_length


def _probe(scene: Scene) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Points whose displacement bounds every scene point's: hull vertices, and arcs as discs."""
    pts = [p.support() for p in scene.primitives if not isinstance(p, Arc)]
    pts = np.concatenate(pts) if pts else np.zeros(0, dtype=complex)
    arcs = [p for p in scene.primitives if isinstance(p, Arc)]
    centers = np.array([a.center for a in arcs], dtype=complex)
    radii = np.array([a.radius for a in arcs], dtype=float)
    return pts, centers, radii


def _step_displacements(us, cs, probe) -> np.ndarray:
    """Upper bound, per step, on how far any scene point moves between consecutive samples."""
    pts, centers, radii = probe
    du = np.diff(us)
    dc = np.diff(cs)
    out = np.zeros(len(du))
    chunk = 1 << 15
    for lo in range(0, len(du), chunk):
        u = du[lo:lo + chunk, None]
        c = dc[lo:lo + chunk, None]
        if len(pts):
            out[lo:lo + chunk] = np.abs(u * pts[None, :] + c).max(axis=1)
        if len(centers):
            d = np.abs(u * centers[None, :] + c) + np.abs(u) * radii[None, :]
            out[lo:lo + chunk] = np.maximum(out[lo:lo + chunk], d.max(axis=1))
    return out


def _max_step_displacement(us, cs, probe) -> float:
    if len(us) < 2:
        return 0.0
    return float(_step_displacements(us, cs, probe).max(initial=0.0))


def _travel(us, cs, scene: Scene) -> float:
    if len(us) < 2:
        return 0.0
    return float(_step_displacements(us, cs, _probe(scene)).sum())


def _check_positions(scene: Scene, grid: GridSpec, us, cs) -> None:
    rigid, arcs = [], []
    for p in scene.primitives:
        (arcs if isinstance(p, Arc) else rigid).append(p)
    pts = np.concatenate([p.support() for p in rigid]) if rigid else np.zeros(0, complex)
    s = _BOUNDS_SLACK
    for chunk in range(0, len(us), 1 << 14):
        u = us[chunk:chunk + (1 << 14), None]
        c = cs[chunk:chunk + (1 << 14), None]
        parts = []
        if len(pts):
            parts.append((u * pts[None, :] + c, 0.0))
        for a in arcs:
            parts.append((u * a.center + c, a.radius))
        for z, r in parts:
            if (z.real.min() - r < grid.xmin - s or z.real.max() + r > grid.xmax + s
                    or z.imag.min() - r < grid.ymin - s or z.imag.max() + r > grid.ymax + s):
                raise SceneOutOfBoundsError("a sampled position leaves the grid box")


def _initial_steps(M: Movement, scene: Scene, time_steps: int, cell: float) -> int:
    if isinstance(M, ElementaryMovement):
        pts, centers, radii = _probe(scene)
        box = scene.bbox()
        q = complex(0.5 * (box[0] + box[2]), 0.5 * (box[1] + box[3])) if box else 0j
        R = max(float(np.abs(pts - q).max(initial=0.0)),
                float((np.abs(centers - q) + radii).max(initial=0.0)))
        # increment bound 2*dt*(||alpha|| + 1) on the unit disc, applied in a frame
        # centred on the scene and rescaled to its radius
        shift = abs(M.alpha(q) - q)
        bound = 2.0 * (2.0 * max(R, 1.0) + shift)
        return max(time_steps, int(math.ceil(bound / cell)) + 1)
    return time_steps


def _translation_hull(scene: Scene, c: complex) -> tuple[Scene, Scene]:
    """Exact swept set of a translation by ``s*c, s in [0, 1]``; arcs are returned for sampling."""
    out, rest = [], []
    for p in scene.primitives:
        if isinstance(p, Segment):
            out.append(Polygon(np.array([p.a, p.b, p.b + c, p.a + c])))
        elif isinstance(p, PointCloud):
            out.extend(Segment(complex(z), complex(z + c)) for z in p.points)
        elif isinstance(p, (Polygon, Rectangle)):
            v = p.vertices if isinstance(p, Polygon) else p.corners()
            out.append(Polygon(v))
            out.append(Polygon(v + c))
            w = np.roll(v, -1)
            out.extend(Polygon(np.array([a, b, b + c, a + c])) for a, b in zip(v, w))
        else:
            rest.append(p)
    return Scene(out), Scene(rest)


def _sample_motion(M: Movement, scene: Scene, time_steps: int, cell: float):
    """Uniform time samples with no scene point moving more than ``cell`` per step.

    Starts from the increment bound, then jumps to the step count the
    measured displacement calls for (the bound is often pessimistic) and
    doubles until every step is short enough.
    """
    n = max(2, _initial_steps(M, scene, time_steps, cell))
    probe = _probe(scene)

    def sample(m):
        us, cs = M.evaluate_many(np.linspace(0.0, 1.0, m))
        return us, cs, _max_step_displacement(us, cs, probe)

    us, cs, d = sample(n)
    want = max(time_steps, 2, int(math.ceil((n - 1) * d / cell * 1.02)) + 1)
    if want < n:
        n = want
        us, cs, d = sample(n)
    while d > cell and n < MAX_TIME_STEPS:
        n = 2 * n - 1
        us, cs, d = sample(n)
    return n, us, cs


def _sweep_into(occ, grid: GridSpec, M: Movement, scene: Scene, time_steps: int,
                exact_translations: bool) -> tuple[int, float]:
    if isinstance(M, SequenceMovement):
        steps, path = 0, 0.0
        for k, stage in enumerate(M.stages):
            s, p = _sweep_into(occ, grid, stage, scene.transformed(M.prefix[k]), time_steps,
                               exact_translations)
            steps += s
            path += p
        return steps, path
    if isinstance(M, ConstantMovement):
        _check_fits(scene, grid)
        _stamp(occ, grid, scene, np.ones(1, complex), np.zeros(1, complex))
        return 1, scene.length()
    if (exact_translations and isinstance(M, ElementaryMovement)
            and M.kind == "elementary-translation"):
        c = M.alpha.c
        swept, rest = _translation_hull(scene, c)
        _check_fits(swept, grid)
        _stamp(occ, grid, swept, np.ones(1, complex), np.zeros(1, complex))
        path = sum(p.length() + abs(c) for p in scene.primitives if p not in rest.primitives)
        if rest.primitives:
            s, p = _sweep_into(occ, grid, M, rest, time_steps, exact_translations=False)
            return 1 + s, path + p
        return 1, path
    n, us, cs = _sample_motion(M, scene, time_steps, grid.cell)
    _check_positions(scene, grid, us, cs)
    _stamp(occ, grid, scene, us, cs)
    path = sum(p.length() + _travel(us, cs, Scene([p])) for p in scene.primitives)
    return n, path


def sweep_stats(M: Movement, scene: Scene, time_steps: int, grid: GridSpec,
                exact_translations: bool = True) -> SweepResult:
    """Rasterised touched set ``{M_t(x)}`` with step count and travelled path length.

    Time samples are refined until no point of the scene's bounding box moves
    more than one cell between consecutive samples. Sequence movements are
    swept stage by stage. With ``exact_translations`` a straight translation
    stage is drawn as its exact swept region rather than sampled.
    """
    if time_steps < 2:
        raise InvalidInputError("time_steps must be >= 2")
    occ = np.zeros(grid.shape, dtype=bool)
    steps, path = _sweep_into(occ, grid, M, scene, time_steps, exact_translations)
    return SweepResult(RasterMask(grid, occ), steps, path)


def sweep(M: Movement, scene: Scene, time_steps: int, grid: GridSpec,
          exact_translations: bool = True) -> RasterMask:
    return sweep_stats(M, scene, time_steps, grid, exact_translations).mask


def swept_box(M: Movement, scene: Scene, samples: int = 257) -> tuple[float, float, float, float]:
    """Bounding box of the scene over sampled times (arcs padded by their radius)."""
    ts = np.linspace(0.0, 1.0, samples)
    if isinstance(M, SequenceMovement):
        boxes = [swept_box(s, scene.transformed(M.prefix[k]), samples) for k, s in enumerate(M.stages)]
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))
    us, cs = M.evaluate_many(ts)
    xs0, ys0, xs1, ys1 = [], [], [], []
    for p in scene.primitives:
        if isinstance(p, Arc):
            z = us * p.center + cs
            r = p.radius
        else:
            z = (us[:, None] * p.support()[None, :] + cs[:, None]).ravel()
            r = 0.0
        xs0.append(z.real.min() - r)
        ys0.append(z.imag.min() - r)
        xs1.append(z.real.max() + r)
        ys1.append(z.imag.max() + r)
    if not xs0:
        return (-1.0, -1.0, 1.0, 1.0)
    return min(xs0), min(ys0), max(xs1), max(ys1)


# ---------------------------------------------------------------------------
# sparse sweeps of long segment schedules


@dataclass
class SparseSweep:
    """Occupied cells of a sweep stored as sorted unique keys ``row * stride + col``.

    Uses the same cell rule as :func:`sweep` on the lattice anchored at
    ``origin``, without allocating the bounding box; meant for schedules that
    wander far relative to the cell size.
    """

    keys: np.ndarray
    cell: float
    origin: complex
    stride: int
    time_steps: int
    path_length: float

    def count(self) -> int:
        return int(len(self.keys))

    def area(self) -> float:
        return self.count() * self.cell ** 2

    def band_allowance(self, factor: float = 4.0) -> float:
        return factor * self.cell * self.path_length

    def centers(self) -> np.ndarray:
        rows, cols = np.divmod(self.keys, self.stride)
        return self.origin + (cols + 0.5) * self.cell + 1j * (rows + 0.5) * self.cell

    def to_mask(self, grid: GridSpec) -> RasterMask:
        """Nearest-cell image of the occupied cells inside ``grid`` (for rendering)."""
        z = self.centers()
        i = np.floor((z.real - grid.xmin) / grid.cell).astype(np.int64)
        j = np.floor((z.imag - grid.ymin) / grid.cell).astype(np.int64)
        ok = (i >= 0) & (i < grid.cols) & (j >= 0) & (j < grid.rows)
        occ = np.zeros(grid.shape, dtype=bool)
        occ[j[ok], i[ok]] = True
        return RasterMask(grid, occ)


class _KeyBuffer:
    def __init__(self, cell, origin, stride, capacity=1 << 22):
        self.cell = cell
        self.origin = origin
        self.stride = stride
        self.buf = np.empty(capacity, dtype=np.int64)
        self.n = 0
        self.parts: list[np.ndarray] = []

    def _flush(self):
        if self.n:
            self.parts.append(np.unique(self.buf[: self.n]))
            self.n = 0
        if len(self.parts) > 8:
            self.parts = [np.unique(np.concatenate(self.parts))]

    def add(self, us, cs, A, B):
        us = np.ascontiguousarray(us, dtype=np.complex128)
        cs = np.ascontiguousarray(cs, dtype=np.complex128)
        A = np.ascontiguousarray(A, dtype=np.complex128)
        B = np.ascontiguousarray(B, dtype=np.complex128)
        h = self.cell / math.sqrt(2.0)
        step = max(1, len(us) // 64)
        for lo in range(0, len(us), step):
            args = (self.origin.real, self.origin.imag, self.cell, h, self.stride,
                    us[lo:lo + step], cs[lo:lo + step], A, B)
            n = _kernels.segment_keys(*args, self.buf, self.n)
            while n < 0:
                self._flush()
                n = _kernels.segment_keys(*args, self.buf, 0)
                if n < 0:
                    self.buf = np.empty(2 * len(self.buf), dtype=np.int64)
            self.n = n

    def result(self) -> np.ndarray:
        self._flush()
        if not self.parts:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.parts))


def _segments_of(scene: Scene) -> list[Segment]:
    segs = []
    for p in scene.primitives:
        if isinstance(p, Segment):
            segs.append(p)
        elif isinstance(p, PointCloud):
            segs.extend(Segment(complex(z), complex(z)) for z in p.points)
        else:
            raise InvalidInputError("sparse sweeps support segments and points only")
    return segs


def _sparse_into(buf: _KeyBuffer, M: Movement, scene: Scene, time_steps: int,
                 translations: bool = True) -> tuple[int, float]:
    if isinstance(M, SequenceMovement):
        steps, path = 0, 0.0
        for k, stage in enumerate(M.stages):
            s, p = _sparse_into(buf, stage, scene.transformed(M.prefix[k]), time_steps, translations)
            steps += s
            path += p
        return steps, path
    segs = _segments_of(scene)
    one, zero = np.ones(1, complex), np.zeros(1, complex)
    if isinstance(M, ConstantMovement):
        buf.add(one, zero, [s.a for s in segs], [s.b for s in segs])
        return 1, scene.length()
    if isinstance(M, ElementaryMovement) and M.kind == "elementary-translation":
        if not translations:
            return 0, 0.0
        c = M.alpha.c
        moving_along = all(abs(((s.b - s.a) * c.conjugate()).imag) <= 1e-12 * abs(c) * max(1.0, s.length())
                           for s in segs)
        if moving_along:
            # a segment sliding along its own line sweeps one longer segment
            A, B = [], []
            for s in segs:
                e = c / abs(c)
                ends = [s.a, s.b, s.a + c, s.b + c]
                proj = [((z - s.a) * e.conjugate()).real for z in ends]
                A.append(s.a + min(proj) * e)
                B.append(s.a + max(proj) * e)
            buf.add(one, zero, A, B)
            return 1, sum(s.length() + abs(c) for s in segs)
    n, us, cs = _sample_motion(M, scene, time_steps, buf.cell)
    buf.add(us, cs, [s.a for s in segs], [s.b for s in segs])
    path = sum(s.length() + _travel(us, cs, Scene([s])) for s in segs)
    return n, path


def sparse_sweep(M: Movement, scene: Scene, time_steps: int, cell: float,
                 box: tuple[float, float, float, float] | None = None,
                 translations: bool = True) -> SparseSweep:
    """Sparse counterpart of :func:`sweep_stats` for scenes made of segments and points.

    ``box`` must contain every position of the scene; by default it is
    estimated from sampled poses and padded generously. With
    ``translations=False`` straight translation stages are skipped (the
    scene still advances), which isolates the contribution of the rotations.
    """
    if time_steps < 2:
        raise InvalidInputError("time_steps must be >= 2")
    if not cell > 0:
        raise InvalidInputError("cell size must be positive")
    if box is None:
        box = swept_box(M, scene)
    x0, y0, x1, y1 = box
    pad = 8 * cell + 0.01 * max(x1 - x0, y1 - y0, 1.0)
    ox = math.floor((x0 - pad) / cell) * cell
    oy = math.floor((y0 - pad) / cell) * cell
    stride = int(math.ceil((x1 + pad - ox) / cell)) + 4
    buf = _KeyBuffer(cell, complex(ox, oy), stride)
    steps, path = _sparse_into(buf, M, scene, time_steps, translations)
    keys = buf.result()
    rows, cols = np.divmod(keys, stride)
    if len(keys) and (cols.min() <= 0 or cols.max() >= stride - 1 or rows.min() <= 0):
        raise SceneOutOfBoundsError("the swept set leaves the supplied box")
    return SparseSweep(keys, cell, complex(ox, oy), stride, steps, path)


# ---------------------------------------------------------------------------
# morphology


def neighborhood(mask: RasterMask, eps: float) -> RasterMask:
    """Cells whose centre lies within ``eps`` of some occupied cell centre."""
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    if eps == 0 or not mask.occupancy.any():
        return RasterMask(mask.grid, mask.occupancy.copy())
    dist = ndimage.distance_transform_edt(~mask.occupancy)
    return RasterMask(mask.grid, dist * mask.grid.cell <= eps + 1e-12 * mask.grid.cell)


@dataclass
class ComponentLabeling:
    labels: np.ndarray
    count: int

    def cells(self, k: int) -> np.ndarray:
        """``(row, col)`` indices of component ``k`` (1-based)."""
        return np.argwhere(self.labels == k)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count + 1)[1:]


_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def connected_components(domain: RasterMask, obstacle: RasterMask) -> ComponentLabeling:
    """4-connected components of the clear cells of ``domain`` minus ``obstacle``."""
    if domain.grid != obstacle.grid:
        raise GridMismatchError("domain and obstacle live on different grids")
    free = domain.occupancy & ~obstacle.occupancy
    labels, count = ndimage.label(free, structure=_FOUR)
    return ComponentLabeling(labels, int(count))


def disc_mask(grid: GridSpec, center: complex, radius: float) -> RasterMask:
    """Cells whose centre lies in the closed disc."""
    return RasterMask(grid, np.abs(grid.centers() - center) <= radius)


def motion_mask(mask: RasterMask, motion: RigidMotion) -> RasterMask:
    """Nearest-cell image of a mask under a rigid motion (cells landing outside are dropped)."""
    g = mask.grid
    z = motion.u * mask.centers() + motion.c
    i = np.floor((z.real - g.xmin) / g.cell).astype(int)
    j = np.floor((z.imag - g.ymin) / g.cell).astype(int)
    ok = (i >= 0) & (i < g.cols) & (j >= 0) & (j < g.rows)
    occ = np.zeros(g.shape, dtype=bool)
    occ[j[ok], i[ok]] = True
    return RasterMask(g, occ)


__all__ = [
    "GridSpec", "RasterMask", "SweepResult", "ComponentLabeling", "area", "rasterize", "sweep",
    "sweep_stats", "swept_box", "SparseSweep", "sparse_sweep", "neighborhood", "connected_components", "disc_mask",
    "motion_mask", "write_pgm", "read_pgm", "render_svg",
]


# ---------------------------------------------------------------------------
# export


def write_pgm(mask: RasterMask, path) -> None:
    """Binary PGM, one byte per cell (255 occupied, 0 clear), top row = largest y."""
    rows, cols = mask.grid.shape
    img = np.where(mask.occupancy[::-1], 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path, grid: GridSpec) -> RasterMask:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise InvalidInputError("not a binary PGM file")
    cols, rows = int(parts[1]), int(parts[2])
    if (rows, cols) != grid.shape:
        raise GridMismatchError("PGM size does not match grid")
    img = np.frombuffer(parts[4][: rows * cols], dtype=np.uint8).reshape(rows, cols)
    return RasterMask(grid, img[::-1] > 127)


def _svg_primitive(p, to_xy) -> str:
    if isinstance(p, Segment):
        (x1, y1), (x2, y2) = to_xy(p.a), to_xy(p.b)
        return f'<line x1="{x1:.6g}" y1="{y1:.6g}" x2="{x2:.6g}" y2="{y2:.6g}"/>'
    if isinstance(p, Arc):
        pts = p.points(max(8, int(p.extent / 0.05)))
    elif isinstance(p, Polygon):
        pts = np.append(p.vertices, p.vertices[0])
    elif isinstance(p, Rectangle):
        c = p.corners()
        pts = np.append(c, c[0])
    else:
        return "".join(f'<circle cx="{x:.6g}" cy="{y:.6g}" r="0.5%"/>'
                       for x, y in map(to_xy, p.points))
    coords = " ".join(f"{x:.6g},{y:.6g}" for x, y in map(to_xy, pts))
    return f'<polyline points="{coords}"/>'


def render_svg(mask: RasterMask, path=None, scene: Scene | None = None,
               max_cells: int = 200_000) -> str:
    """SVG of the occupied cells (merged into horizontal runs) with an optional scene overlay.

    Coordinates are in user units with y pointing up. Masks with more than
    ``max_cells`` runs are downsampled by block-or pooling first.
    """
    g = mask.grid
    occ = mask.occupancy
    step = 1
    while np.count_nonzero(np.diff(np.pad(occ[::step, ::step], ((0, 0), (1, 1))).astype(np.int8),
                                   axis=1)) // 2 > max_cells:
        step *= 2
    if step > 1:
        r = -(-occ.shape[0] // step) * step
        c = -(-occ.shape[1] // step) * step
        padded = np.zeros((r, c), dtype=bool)
        padded[: occ.shape[0], : occ.shape[1]] = occ
        occ = padded.reshape(r // step, step, c // step, step).any(axis=(1, 3))
    cell = g.cell * step
    width, height = g.xmax - g.xmin, g.ymax - g.ymin

    def to_xy(z):
        return z.real - g.xmin, g.ymax - z.imag

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.6g} {height:.6g}" '
           f'width="800" height="{800 * height / width:.0f}">',
           '<g fill="#3060c0" stroke="none">']
    for j in range(occ.shape[0]):
        row = np.concatenate([[0], occ[j].astype(np.int8), [0]])
        d = np.diff(row)
        for a, b in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
            y = height - (j + 1) * cell
            out.append(f'<rect x="{a * cell:.6g}" y="{y:.6g}" width="{(b - a) * cell:.6g}" '
                       f'height="{cell:.6g}"/>')
    out.append("</g>")
    if scene is not None:
        out.append(f'<g fill="none" stroke="#c03030" stroke-width="{0.003 * max(width, height):.3g}">')
        out.extend(_svg_primitive(p, to_xy) for p in scene.primitives)
        out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
