"""Winding numbers, separation witnesses, the coverage obstruction for moving sets, and
classification of sampled connected sets into the trivial shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .constructions import ConstructionReport
from .errors import (
    GridMismatchError,
    InvalidInputError,
    PointOnCurveError,
    TrajectoryEscapeError,
)
from .motions import RigidMotion, as_point, inverse, point_pair
from .movements import Movement, ReparameterizedMovement
from .raster import (
    GridSpec,
    connected_components,
    disc_mask,
    neighborhood,
    rasterize,
    sweep_stats,
)
from .scene import Scene

ON_CURVE_TOL = 1e-12
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# curves and winding numbers


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered vertices; a closed polyline has an implicit edge from the last vertex to the first."""

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if len(v) < 2:
            raise InvalidInputError("a polyline needs at least two vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("polyline vertices must be finite")
        object.__setattr__(self, "vertices", v)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1)
        return v[:-1], v[1:]

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1].copy(), self.closed)

    def then(self, other: "Polyline", closed: bool = False) -> "Polyline":
        """Concatenation; a repeated junction vertex is dropped."""
        a, b = self.vertices, other.vertices
        if a[-1] == b[0]:
            b = b[1:]
        return Polyline(np.concatenate([a, b]), closed)

    def transformed(self, m: RigidMotion) -> "Polyline":
        return Polyline(m.u * self.vertices + m.c, self.closed)

    def length(self) -> float:
        a, b = self.edges()
        return float(np.abs(b - a).sum())

    def to_json(self):
        return {"vertices": [point_pair(z) for z in self.vertices], "closed": self.closed}

    @classmethod
    def from_json(cls, data) -> "Polyline":
        try:
            return cls(np.array([as_point(z) for z in data["vertices"]]), bool(data.get("closed", False)))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"bad polyline: {exc}") from exc


def distance_to_polyline(gamma: Polyline, p) -> float:
    p = as_point(p)
    a, b = gamma.edges()
    d = b - a
    L2 = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(L2 > 0, ((p - a) * d.conjugate()).real / L2, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return float(np.abs(a + s * d - p).min())


def winding_number(gamma: Polyline, p) -> float:
    """Total increment of ``arg(gamma - p)`` along the curve, in radians."""
    p = as_point(p)
    if distance_to_polyline(gamma, p) <= ON_CURVE_TOL:
        raise PointOnCurveError(f"point {p} lies on the curve")
    a, b = gamma.edges()
    # atan2 of (cross, dot) is odd in the cross term, so reversing a curve negates
    # every edge angle exactly; fsum keeps the total correctly rounded
    za, zb = a - p, b - p
    cross = za.real * zb.imag - za.imag * zb.real
    dot = za.real * zb.real + za.imag * zb.imag
    return math.fsum(np.arctan2(cross, dot).tolist())


@dataclass
class SeparationWitness:
    separated: bool
    winding_a: float
    winding_b: float

    def __bool__(self) -> bool:
        return self.separated

    def to_json(self):
        return {"separated": self.separated, "winding_a": self.winding_a,
                "winding_b": self.winding_b}


def separation_witness(curve1: Polyline, curve2: Polyline, a, b) -> SeparationWitness:
    """Close ``curve1`` followed by ``curve2``; differing winding numbers about ``a`` and ``b``
    prove the two points lie in different components of the complement."""
    loop = curve1.then(curve2, closed=True)
    wa, wb = winding_number(loop, a), winding_number(loop, b)
    return SeparationWitness(abs(wa - wb) >= math.pi, wa, wb)


# ---------------------------------------------------------------------------
# coverage obstruction


@dataclass
class ObstructionCase:
    """An obstacle moving inside a disc, and a probe region that must not meet it at time 0."""

    obstacle: Scene
    disc_center: complex
    disc_radius: float
    probe: Scene
    movement: Movement
    t_end: float = 1.0

    def __post_init__(self):
        self.disc_center = as_point(self.disc_center)
        if not self.disc_radius > 0:
            raise InvalidInputError("disc radius must be positive")
        if not 0 < self.t_end <= 1:
            raise InvalidInputError("t_end must lie in (0, 1]")
        if len(self.probe) == 0 or len(self.obstacle) == 0:
            raise InvalidInputError("probe and obstacle must be nonempty")

    def restricted(self) -> Movement:
        if self.t_end == 1.0:
            return self.movement
        return ReparameterizedMovement(self.movement, [(0.0, 0.0), (1.0, self.t_end)])

    def to_json(self):
        return {"obstacle": self.obstacle.to_json(), "disc": {"center": point_pair(self.disc_center),
                                                             "radius": self.disc_radius},
                "probe": self.probe.to_json(), "movement": self.movement.to_json(),
                "t_end": self.t_end}


def _check_trajectory(case: ObstructionCase, probe_cells: np.ndarray, cell: float) -> int:
    """Pull the probe back along the movement; every sample must stay inside the disc."""
    M = case.restricted()
    n = 17
    while True:
        us, cs = M.evaluate_many(np.linspace(0.0, 1.0, n))
        # inverse motions: x -> conj(u) (x - c)
        back = (probe_cells[None, :] - cs[:, None]) * np.conj(us)[:, None]
        step = np.abs(np.diff(back, axis=0)).max() if n > 1 else 0.0
        if step <= cell or n >= 1 << 16:
            break
        n = 2 * n - 1
    slack = cell / math.sqrt(2.0)
    far = np.abs(back - case.disc_center).max()
    if far > case.disc_radius + slack:
        raise TrajectoryEscapeError(
            f"the pulled-back probe reaches distance {far:.6g} from the disc centre "
            f"(radius {case.disc_radius:.6g})")
    return n


def lemma5_obstruction(case: ObstructionCase, grid: GridSpec) -> ConstructionReport:
    """If the probe and its pull-back at ``t_end`` lie in different components of
    ``disc \\ obstacle``, the moving obstacle must have passed over the whole probe."""
    disc = disc_mask(grid, case.disc_center, case.disc_radius)
    obstacle = rasterize(case.obstacle, grid)
    probe = rasterize(case.probe, grid)
    if probe.grid != disc.grid:
        raise GridMismatchError("probe and disc rasters differ")
    if (probe & obstacle).count():
        raise InvalidInputError("the probe meets the obstacle at time 0")
    steps = _check_trajectory(case, probe.centers(), grid.cell)

    end = case.restricted().evaluate(1.0)
    pulled = rasterize(case.probe.transformed(inverse(end)), grid)
    labels = connected_components(disc, obstacle)
    lab = labels.labels
    here = sorted(set(np.unique(lab[probe.occupancy]).tolist()) - {0})
    there = sorted(set(np.unique(lab[pulled.occupancy]).tolist()) - {0})
    distinct = bool(here and there and not set(here) & set(there))

    measured: dict[str, Any] = {"components": labels.count, "probe_components": here,
                                "pulled_back_components": there, "probe_cells": probe.count(),
                                "trajectory_samples": steps}
    covered = None
    if distinct:
        res = sweep_stats(case.restricted(), case.obstacle, 2, grid)
        band = neighborhood(res.mask, grid.cell)
        uncovered = (probe - band).count()
        covered = uncovered == 0
        measured.update(sweep_area=res.mask.area(), uncovered_cells=uncovered,
                        sweep_steps=res.time_steps)
    asserted = {"hypothesis_met": distinct, "covered": covered,
                "verdict": "covered" if covered else ("not covered" if distinct else "hypothesis not met"),
                "pass": (covered is not False)}
    return ConstructionReport("obstruction", measured, asserted,
                              {"case": case.to_json(), "grid": grid.to_json()})


# ---------------------------------------------------------------------------
# classification


@dataclass
class Classification:
    label: str
    line_residual: float
    circle_residual: float
    tol: float
    center: complex | None = None
    radius: float | None = None
    max_gap: float | None = None

    def to_json(self):
        return {"label": self.label, "line_residual": self.line_residual,
                "circle_residual": self.circle_residual, "tol": self.tol,
                "center": None if self.center is None else point_pair(self.center),
                "radius": self.radius, "max_gap": self.max_gap}


LABELS = ("singleton", "segment", "halfline-flag", "line-flag", "circular-arc", "circle", "nontrivial")


def _points_of(points) -> np.ndarray:
    if isinstance(points, Scene):
        z = points.support()
    else:
        z = np.asarray(points)
        if z.ndim == 2 and z.shape[1] == 2 and not np.iscomplexobj(z):
            z = z[:, 0] + 1j * z[:, 1]
        z = z.astype(complex).ravel()
    if len(z) == 0:
        raise InvalidInputError("need at least one sample point")
    return z


def fit_line(z: np.ndarray) -> tuple[complex, complex, float]:
    """Total least squares: point on the line, unit direction, max orthogonal distance."""
    m = z.mean()
    w = z - m
    _, _, vt = np.linalg.svd(np.column_stack([w.real, w.imag]), full_matrices=False)
    d = complex(vt[0, 0], vt[0, 1])
    res = np.abs((w * d.conjugate()).imag).max()
    return m, d, float(res)


def fit_circle(z: np.ndarray) -> tuple[complex, float, float]:
    """Algebraic circle fit ``x^2 + y^2 = a x + b y + c``; returns centre, radius, max residual."""
    m = z.mean()
    w = z - m
    A = np.column_stack([w.real, w.imag, np.ones(len(w))])
    rhs = np.abs(w) ** 2
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    a, b, c = sol
    centre = complex(a / 2, b / 2)
    r2 = c + abs(centre) ** 2
    if not np.isfinite(r2) or r2 <= 0:
        return m, math.inf, math.inf
    r = math.sqrt(r2)
    return centre + m, r, float(np.abs(np.abs(w - centre) - r).max())


def max_angular_gap(z: np.ndarray, centre: complex) -> float:
    th = np.sort(np.angle(z - centre))
    gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
    return float(gaps.max())


def classify_component(points, tol: float | None = None, unbounded_ends: int = 0) -> Classification:
    """Label a sampled set as one of the trivial shapes, or ``nontrivial``.

    ``tol`` defaults to ``1e-3`` times the sample diameter. A linear sample is a segment;
    ``unbounded_ends`` (1 or 2) marks it as a half line or line, since finite samples
    cannot show this. A circular sample is an arc when its largest angular gap exceeds
    both ``tol / radius`` and three times the mean spacing of the remaining points.
    """
    z = _points_of(points)
    if unbounded_ends not in (0, 1, 2):
        raise InvalidInputError("unbounded_ends must be 0, 1 or 2")
    diam = float(np.abs(z[:, None] - z[None, :]).max()) if len(z) <= 4096 else _approx_diameter(z)
    if tol is None:
        tol = 1e-3 * diam
    if tol < 0:
        raise InvalidInputError("tol must be nonnegative")
    if diam <= max(tol, ON_CURVE_TOL):
        return Classification("singleton", 0.0, 0.0, tol, complex(z.mean()), 0.0)
    _, _, line_res = fit_line(z)
    centre, r, circ_res = fit_circle(z) if len(z) >= 3 else (0j, math.inf, math.inf)
    if line_res <= tol:
        label = ("segment", "halfline-flag", "line-flag")[unbounded_ends]
        return Classification(label, line_res, circ_res, tol)
    if circ_res <= tol:
        gap = max_angular_gap(z, centre)
        spacing = (TWO_PI - gap) / max(len(z) - 1, 1)
        label = "circular-arc" if gap > max(tol / r, 3.0 * spacing) else "circle"
        return Classification(label, line_res, circ_res, tol, centre, r, gap)
    return Classification("nontrivial", line_res, circ_res, tol)


def _approx_diameter(z: np.ndarray) -> float:
    """Diameter via the convex hull for large samples."""
    from scipy.spatial import ConvexHull

    h = z[ConvexHull(np.column_stack([z.real, z.imag])).vertices]
    return float(np.abs(h[:, None] - h[None, :]).max())


def closed_polyline(points: Iterable) -> Polyline:
    return Polyline(np.array([as_point(p) for p in points]), True)


__all__ = [
    "Classification", "LABELS", "ObstructionCase", "Polyline", "SeparationWitness",
    "classify_component", "closed_polyline", "distance_to_polyline", "fit_circle", "fit_line",
    "lemma5_obstruction", "max_angular_gap", "separation_witness", "winding_number",
]
