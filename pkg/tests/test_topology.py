import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kakeya.errors import InvalidInputError, PointOnCurveError, TrajectoryEscapeError
from kakeya.motions import RigidMotion, rotation, translation
from kakeya.movements import ConstantMovement, elementary_movement
from kakeya.raster import GridSpec
from kakeya.scene import Polygon, Scene, Segment
from kakeya.topology import (
    ObstructionCase,
    Polyline,
    classify_component,
    closed_polyline,
    fit_circle,
    fit_line,
    lemma5_obstruction,
    separation_witness,
    winding_number,
)

TWO_PI = 2 * math.pi


def random_motion(rng):
    return RigidMotion(np.exp(1j * rng.uniform(-math.pi, math.pi)),
                       complex(*rng.uniform(-10, 10, 2)))


def disc_polygon(c, r, n=64):
    return Polygon(c + r * np.exp(2j * np.pi * np.arange(n) / n))


# --- winding numbers ------------------------------------------------------------


def test_square_inside_outside():
    sq = closed_polyline([0, 1, 1 + 1j, 1j])
    assert winding_number(sq, 0.1 + 0.1j) == pytest.approx(TWO_PI)
    assert winding_number(sq, 5 + 5j) == pytest.approx(0.0, abs=1e-12)
    assert winding_number(sq.reversed(), 0.1 + 0.1j) == pytest.approx(-TWO_PI)


def test_open_semicircle_half_turn():
    semi = Polyline(np.exp(1j * np.linspace(0, math.pi, 50)))
    assert winding_number(semi, 0) == pytest.approx(math.pi)


def test_point_on_curve_rejected():
    sq = closed_polyline([0, 1, 1 + 1j, 1j])
    with pytest.raises(PointOnCurveError):
        winding_number(sq, 0.5)
    with pytest.raises(PointOnCurveError):
        winding_number(sq, 1j)
    with pytest.raises(PointOnCurveError):
        winding_number(sq, 0.5j)  # the implicit closing edge


def test_polyline_validation():
    with pytest.raises(InvalidInputError):
        Polyline(np.array([1 + 1j]))
    with pytest.raises(InvalidInputError):
        Polyline(np.array([0, np.nan]))


def test_winding_of_doubly_traversed_circle():
    z = np.exp(1j * np.linspace(0, 4 * math.pi, 200, endpoint=False))
    assert winding_number(Polyline(z, True), 0.01) == pytest.approx(2 * TWO_PI)


def test_random_closed_polylines_are_whole_turns():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(3, 40)
        gamma = Polyline(rng.normal(size=n) + 1j * rng.normal(size=n), True)
        p = complex(*rng.normal(size=2))
        w = winding_number(gamma, p) / TWO_PI
        assert abs(w - round(w)) < 1e-9


def test_closed_curve_far_point_zero():
    rng = np.random.default_rng(3)
    for _ in range(50):
        z = np.exp(1j * np.sort(rng.uniform(0, TWO_PI, 12)))
        for p in (3, -5j, 2 + 2j):
            assert winding_number(Polyline(z, True), p) == pytest.approx(0, abs=1e-9)


def _chain(rng, start, n):
    return Polyline(np.concatenate([[start], rng.normal(size=n) + 1j * rng.normal(size=n)]))


def test_concatenation_additivity_and_reversal():
    rng = np.random.default_rng(11)
    for _ in range(100):
        g1 = _chain(rng, 0j, 5)
        g2 = _chain(rng, g1.vertices[-1], 6)
        p = 3 + 3j
        total = winding_number(g1.then(g2), p)
        assert total == pytest.approx(winding_number(g1, p) + winding_number(g2, p), abs=1e-12)
        assert winding_number(g1.reversed(), p) == -winding_number(g1, p)


@settings(max_examples=60, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(-5, 5), st.floats(-5, 5))
def test_winding_invariant_under_motion(phi, cx, cy):
    m = RigidMotion(np.exp(1j * phi), complex(cx, cy))
    gamma = closed_polyline([0, 2, 2 + 1j, 1 + 0.3j, 1j])
    p = 0.5 + 0.2j
    assert winding_number(gamma.transformed(m), m(p)) == pytest.approx(winding_number(gamma, p))


# --- separation witness ------------------------------------------------------------


def test_separation_examples():
    top = Polyline(np.exp(1j * np.linspace(0, math.pi, 40)))
    bottom = Polyline(np.exp(1j * np.linspace(math.pi, TWO_PI, 40)))
    w = separation_witness(top, bottom, 0.1, 5)
    assert w and w.winding_a == pytest.approx(TWO_PI) and w.winding_b == pytest.approx(0, abs=1e-12)
    assert not separation_witness(top, bottom, 3, 5)
    assert not separation_witness(top, bottom, 0.1, -0.2j)
    assert w.to_json()["separated"] is True


def test_separation_point_on_curve():
    top = Polyline(np.exp(1j * np.linspace(0, math.pi, 40)))
    bottom = Polyline(np.exp(1j * np.linspace(math.pi, TWO_PI, 40)))
    with pytest.raises(PointOnCurveError):
        separation_witness(top, bottom, 1, 0)


# --- coverage obstruction ------------------------------------------------------------

GRID = GridSpec.around((-1, -1, 1, 1), 4e-3)
BAR = Scene([Segment(-1j, 1j)])
LEFT = Scene([disc_polygon(-0.5, 0.1)])


def test_bar_in_disc_distinct_and_covered():
    case = ObstructionCase(BAR, 0, 1.0, LEFT, elementary_movement(translation(-1)))
    rep = lemma5_obstruction(case, GRID)
    assert rep.asserted["hypothesis_met"] and rep.asserted["covered"]
    assert rep.measured["uncovered_cells"] == 0
    assert rep.measured["components"] == 2


def test_bar_partial_time_same_component():
    """Stopping early leaves the pull-back on the probe's own side: no claim."""
    case = ObstructionCase(BAR, 0, 1.0, LEFT, elementary_movement(translation(-1)), t_end=0.2)
    rep = lemma5_obstruction(case, GRID)
    assert rep.asserted["verdict"] == "hypothesis not met"
    assert rep.asserted["covered"] is None and rep.asserted["pass"]


def test_identity_gives_no_claim():
    case = ObstructionCase(BAR, 0, 1.0, LEFT, ConstantMovement())
    rep = lemma5_obstruction(case, GRID)
    assert not rep.asserted["hypothesis_met"]


def test_orbit_around_blob_same_component():
    case = ObstructionCase(Scene([disc_polygon(0, 0.1)]), 0, 1.0, Scene([disc_polygon(0.5, 0.1)]),
                           elementary_movement(rotation(0, math.pi / 2)))
    rep = lemma5_obstruction(case, GRID)
    assert rep.measured["components"] == 1
    assert not rep.asserted["hypothesis_met"] and rep.asserted["pass"]


def test_escape_is_an_error():
    case = ObstructionCase(BAR, 0, 1.0, LEFT, elementary_movement(translation(-2)))
    with pytest.raises(TrajectoryEscapeError):
        lemma5_obstruction(case, GRID)


def test_probe_meeting_obstacle_rejected():
    case = ObstructionCase(BAR, 0, 1.0, Scene([disc_polygon(0, 0.1)]),
                           elementary_movement(translation(-0.5)))
    with pytest.raises(InvalidInputError):
        lemma5_obstruction(case, GRID)


def test_obstruction_case_validation():
    with pytest.raises(InvalidInputError):
        ObstructionCase(BAR, 0, -1.0, LEFT, ConstantMovement())
    with pytest.raises(InvalidInputError):
        ObstructionCase(BAR, 0, 1.0, LEFT, ConstantMovement(), t_end=0)


# --- classification -------------------------------------------------------------


def brute_line_residual(z, k=3600):
    """Smallest max distance to a line: half the minimum width over a fine direction scan."""
    th = np.linspace(0, math.pi, k, endpoint=False)
    proj = (z[None, :] * np.exp(-1j * th)[:, None]).imag
    return float((proj.max(axis=1) - proj.min(axis=1)).min() / 2)


def brute_circle_residual(z, k=201):
    """Smallest max distance to a circle, by scanning centres on a grid around the sample."""
    x0, x1, y0, y1 = z.real.min(), z.real.max(), z.imag.min(), z.imag.max()
    span = max(x1 - x0, y1 - y0)
    xs = np.linspace(x0 - span, x1 + span, k)
    ys = np.linspace(y0 - span, y1 + span, k)
    c = xs[None, :] + 1j * ys[:, None]
    d = np.abs(z[None, None, :] - c[..., None])
    return float(((d.max(axis=-1) - d.min(axis=-1)) / 2).min())


def l_shape(n=50):
    return np.concatenate([np.linspace(0, 1, n), 1 + 1j * np.linspace(0, 1, n)[1:]])


def spiral(n=100):
    t = np.linspace(0, 4 * math.pi, n)
    return (1 + 0.1 * t) * np.exp(1j * t)


def test_basic_shapes():
    th = np.linspace(0, TWO_PI, 100, endpoint=False)
    assert classify_component(np.exp(1j * th)).label == "circle"
    assert classify_component(np.linspace(0, 1, 100) + 0j).label == "segment"
    assert classify_component(np.exp(0.7j * th)).label == "circular-arc"
    assert classify_component(np.full(5, 2 + 1j)).label == "singleton"
    assert classify_component([3 + 0j]).label == "singleton"


def test_unbounded_flags():
    z = np.linspace(0, 1, 20) + 0j
    assert classify_component(z, unbounded_ends=1).label == "halfline-flag"
    assert classify_component(z, unbounded_ends=2).label == "line-flag"
    with pytest.raises(InvalidInputError):
        classify_component(z, unbounded_ends=3)


def test_accepts_pairs_and_scenes():
    assert classify_component(np.array([[0, 0], [1, 1], [2, 2.0]])).label == "segment"
    assert classify_component(Scene([Segment(0, 1 + 1j)])).label == "segment"
    with pytest.raises(InvalidInputError):
        classify_component(np.zeros(0, dtype=complex))


@pytest.mark.parametrize("cloud", [l_shape(), spiral()], ids=["L", "spiral"])
def test_nontrivial_clouds_by_brute_force(cloud):
    tol = 1e-3 * np.abs(cloud[:, None] - cloud[None, :]).max()
    assert brute_line_residual(cloud) > tol
    assert brute_circle_residual(cloud) > tol
    c = classify_component(cloud)
    assert c.label == "nontrivial"
    # the fitted residuals can only be worse than the optimum
    assert c.line_residual >= brute_line_residual(cloud) - 1e-9


def test_fits_recover_parameters():
    z = 3 - 2j + 2.5 * np.exp(1j * np.linspace(0, 2, 30))
    c, r, res = fit_circle(z)
    assert c == pytest.approx(3 - 2j) and r == pytest.approx(2.5) and res < 1e-12
    p, d, res = fit_line(1 + 1j + (2 + 1j) * np.linspace(-1, 1, 10))
    assert res < 1e-12 and abs((d / (2 + 1j)).imag) < 1e-12


def test_randomized_instances_classify():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        m = random_motion(rng)
        scale = rng.uniform(0.1, 10)
        th = np.linspace(0, TWO_PI, 100, endpoint=False)
        extent = rng.uniform(0.5, 1.6 * math.pi)
        ext = np.linspace(0, extent, 100)
        circle = scale * np.exp(1j * th)
        arc = scale * np.exp(1j * ext)
        seg = scale * np.linspace(-1, 1, 100)
        for cloud, label in ((circle, "circle"), (arc, "circular-arc"), (seg + 0j, "segment")):
            assert classify_component(m(cloud)).label == label


@settings(max_examples=50, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(-100, 100), st.floats(-100, 100))
def test_classification_motion_invariant(phi, cx, cy):
    m = RigidMotion(np.exp(1j * phi), complex(cx, cy))
    th = np.linspace(0, TWO_PI, 60, endpoint=False)
    for cloud in (np.exp(1j * th), np.exp(0.5j * th), np.linspace(0, 1, 30) + 0j, l_shape(), spiral()):
        assert classify_component(m(cloud)).label == classify_component(cloud).label
