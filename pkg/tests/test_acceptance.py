"""Acceptance criteria 1-9, each at its stated size and tolerance.

Every test records its parts through the ``criterion`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.
"""

import cmath
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from kakeya.constructions import (
    NeedleSchedule,
    dimension2_report,
    needle_cost,
    needle_reversal_schedule,
    perron_tree,
    trivial_concentric_mover,
    trivial_parallel_mover,
)
from kakeya.motions import (
    RigidMotion,
    check_inverse_lipschitz,
    check_iterate_norm_identity,
    compose,
    iterate,
    op_norm,
    rotation,
    translation,
)
from kakeya.movements import (
    check_elementary_increment_bound,
    check_splice_distance,
    elementary_movement,
    perturbed_elementary,
)
from kakeya.raster import GridSpec, sweep_stats, swept_box
from kakeya.scene import Arc, Polygon, Scene, Segment
from kakeya.topology import (
    ObstructionCase,
    Polyline,
    classify_component,
    lemma5_obstruction,
    winding_number,
)
from kakeya.venetian import (
    BlindParams,
    blind_mover,
    build_blind,
    distance_set_measure,
    probe_points,
    projection_measure,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "perron.json").read_text())
TWO_PI = 2 * math.pi


def random_motion(rng, max_c=10.0, max_phi=math.pi, small_angles=True):
    phi = rng.uniform(-max_phi, max_phi)
    if small_angles and rng.integers(0, 2):
        phi *= 10.0 ** (-rng.uniform(0, 3))
    return RigidMotion(cmath.exp(1j * phi), complex(*rng.uniform(-max_c, max_c, 2)))


# ---------------------------------------------------------------------------
# 1. algebra suite


@pytest.mark.criterion(1)
def test_criterion_1_algebra(criterion):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    id_err, lower_viol, lower_n = 0.0, -math.inf, 0
    for _ in range(1000):
        alpha = random_motion(rng)
        for n in range(1, 51):
            r = check_iterate_norm_identity(alpha, n)
            id_err = max(id_err, r.details["identity_error"])
            if "lower_bound" in r.details:
                lower_n += 1
                lower_viol = max(lower_viol, r.details["lower_bound"] - r.lhs)
    lip = -math.inf
    for _ in range(1000):
        r = check_inverse_lipschitz(random_motion(rng), random_motion(rng))
        lip = max(lip, r.lhs - r.rhs)
    elapsed = time.perf_counter() - t0
    ok_id = criterion("norm identity", id_err <= 1e-9, f"max error {id_err:.2e}")
    ok_low = criterion("lower bound", lower_n > 0 and lower_viol <= 1e-12,
                       f"{lower_n} cases, max shortfall {lower_viol:.2e}")
    ok_lip = criterion("inverse Lipschitz", lip <= 1e-12, f"max excess {lip:.2e}")
    ok_t = criterion("runtime < 5 s", elapsed < 5, f"{elapsed:.2f} s")
    assert ok_id and ok_low and ok_lip and ok_t


# ---------------------------------------------------------------------------
# 2. increment bound


@pytest.mark.criterion(2)
def test_criterion_2_increment_bound(criterion):
    rng = np.random.default_rng(2)
    motions = [RigidMotion(cmath.exp(1j * rng.uniform(-3, 3)), complex(*rng.uniform(-10, 10, 2)))
               for _ in range(48)]
    motions += [translation(10 + 0j), rotation(complex(*rng.uniform(-5, 5, 2)), 3.0)]
    assert max(abs(m.c) for m in motions) >= 10 - 1e-12
    t0 = time.perf_counter()
    violations, checked = 0, 0
    for alpha in motions:
        r = check_elementary_increment_bound(alpha, grid=64, points=256)
        violations += int(not r.passed)
        checked += r.samples_checked
    elapsed = time.perf_counter() - t0
    ok_v = criterion("zero violations", violations == 0, f"{checked} comparisons")
    ok_t = criterion("runtime < 10 s", elapsed < 10, f"{elapsed:.2f} s")
    assert ok_v and ok_t


# ---------------------------------------------------------------------------
# 3. grid identity and splice distance


@pytest.mark.criterion(3)
def test_criterion_3_grid_identity_and_splice(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in range(1, 65):
        cases = [translation(complex(*rng.uniform(-2, 2, 2))),
                 rotation(complex(*rng.uniform(-2, 2, 2)), rng.uniform(-1, 1) * 0.999 * math.pi / n)]
        for alpha in cases:
            E = elementary_movement(iterate(alpha, n))
            for i in range(1, n + 1):
                worst = max(worst, op_norm(E.evaluate(i / n) - iterate(alpha, i)))
    ok_grid = criterion("grid identity", worst <= 1e-10, f"max error {worst:.2e}")
    worst_ratio, sampled = 0.0, 0
    for n in (1, 2, 4, 8, 16, 32, 64):
        beta = RigidMotion(cmath.exp(0.2j / n), (0.1 - 0.1j) / n)
        r = check_splice_distance(beta, n, perturbed_elementary(beta, 0.3 / n), samples=1024,
                                  points=64)
        worst_ratio = max(worst_ratio, r.details["max_distance"] / r.details["bound"])
        sampled += r.samples_checked
    ok_splice = criterion("splice within 8/n", worst_ratio <= 1.0,
                          f"worst distance/bound {worst_ratio:.3f} over {sampled} (t, x)")
    assert ok_grid and ok_splice


# ---------------------------------------------------------------------------
# 4. trivial movers


def _trivial_sweeps(cells):
    segs = Scene([Segment(0, 1), Segment(0.3j, 1 + 0.3j), Segment(0.6j, 1 + 0.6j)])
    arcs = Scene([Arc(0, 0.5, 0.0, math.pi / 2), Arc(0, 0.8, 0.3, math.pi / 3)])
    movers = {"slide": (segs, trivial_parallel_mover(segs, 1, 2.0)),
              "rotate": (arcs, trivial_concentric_mover(arcs, 0, math.pi / 2))}
    out = {}
    for name, (scene, M) in movers.items():
        rows = []
        for cell in cells:
            res = sweep_stats(M, scene, 2, GridSpec.around(swept_box(M, scene), cell))
            rows.append((cell, res.mask.area(), res.band_allowance()))
        out[name] = rows
    return out


@pytest.mark.criterion(4)
def test_criterion_4_trivial_movers(criterion):
    results = _trivial_sweeps((4e-3, 2e-3, 1e-3))
    ok = True
    for name, rows in results.items():
        at_fine = rows[-1]
        ok &= criterion(f"{name} area <= band at 1e-3", at_fine[1] <= at_fine[2],
                        f"{at_fine[1]:.4g} <= {at_fine[2]:.4g}")
        slopes = [a / c for c, a, _ in rows]
        linear = max(slopes) / min(slopes) <= 1.25 and all(
            b[1] < a[1] for a, b in zip(rows, rows[1:]))
        ok &= criterion(f"{name} area linear in cell", linear,
                        "area/cell = " + ", ".join(f"{s:.2f}" for s in slopes))
    assert ok


# ---------------------------------------------------------------------------
# 5. Perron tree and needle reversal


@pytest.mark.criterion(5)
def test_criterion_5_perron(criterion):
    areas, ratio5 = [], None
    for k in range(1, 7):
        _, rep = perron_tree(k, cell=1e-3)
        areas.append(rep.measured["union_area"])
        if k == 5:
            ratio5 = rep.measured["ratio"]
    dec = criterion("Perron area decreasing k=1..6", all(b < a for a, b in zip(areas, areas[1:])),
                    ", ".join(f"{a:.4f}" for a in areas))
    below = criterion("k=5 ratio < 0.35", ratio5 < 0.35, f"{ratio5:.4f}")
    golden = GOLDEN["perron_k5_unit_triangle"]["ratio"]
    pinned = criterion("k=5 ratio within 2% of golden", abs(ratio5 - golden) <= 0.02 * golden,
                       f"golden {golden}")
    assert dec and below and pinned


_THROUGHPUT = {}


@pytest.mark.criterion(5)
def test_criterion_5_needle_eps_half(criterion):
    t0 = time.perf_counter()
    sched = needle_reversal_schedule(0.5)
    err = sched.details["end_pose_error"]
    sweep = sched.measure(1e-3)
    elapsed = time.perf_counter() - t0
    _THROUGHPUT["path_per_second"] = sweep.path_length / elapsed
    band = sweep.band_allowance()
    rot_only = sched.measure(1e-3, translations=False)
    ok_a = criterion("needle eps=0.5 area <= eps + band", sweep.area() <= 0.5 + band,
                     f"area {sweep.area():.3f}, band {band:.3f}, rotation-only area "
                     f"{rot_only.area():.3f}")
    ok_e = criterion("needle eps=0.5 end pose", err <= 1e-9, f"{err:.1e}")
    ok_t = criterion("needle eps=0.5 runtime < 60 s", elapsed < 60, f"{elapsed:.1f} s")
    assert ok_a and ok_e and ok_t


@pytest.mark.criterion(5)
def test_criterion_5_needle_eps_quarter(criterion):
    """The measurement is attempted only if its projected runtime fits the 60 s budget.

    Throughput is calibrated on a prefix of this very schedule; the projection uses
    the schedule's own estimate of the total sliding path.
    """
    t0 = time.perf_counter()
    sched = needle_reversal_schedule(0.25)
    build = time.perf_counter() - t0
    err = sched.details["end_pose_error"]
    ok_e = criterion("needle eps=0.25 end pose", err <= 1e-9, f"{err:.1e}")

    prefix = NeedleSchedule(sched.start, sched.stages[:400])
    t1 = time.perf_counter()
    part = prefix.measure(1e-3)
    rate = part.path_length / (time.perf_counter() - t1)
    _, total_path = needle_cost(sched.details["k"], 0.25)
    projected = build + total_path / rate
    if projected < 60:
        sweep = sched.measure(1e-3)
        elapsed = time.perf_counter() - t0
        ok_a = criterion("needle eps=0.25 area <= eps + band",
                         sweep.area() <= 0.25 + sweep.band_allowance(), f"area {sweep.area():.3f}")
        ok_t = criterion("needle eps=0.25 runtime < 60 s", elapsed < 60, f"{elapsed:.1f} s")
    else:
        ok_a = True
        ok_t = criterion("needle eps=0.25 runtime < 60 s", False,
                         f"k={sched.details['k']}, sliding path {total_path:.3g}, "
                         f"projected {projected:.3g} s at {rate:.3g} path units/s")
    assert ok_e and ok_a and ok_t


# ---------------------------------------------------------------------------
# 6. dimension-2 example


@pytest.mark.criterion(6)
def test_criterion_6_dimension2(criterion):
    alpha = compose(rotation(0, math.pi / 3), translation(1 + 1j))
    areas, outside = [], []
    for d in range(5):
        rep, _ = dimension2_report(d, alpha, cell=2e-3)
        areas.append(rep.measured["sweep_area"])
        outside.append(rep.measured["cells_outside_cover"])
    ratios = [b / a for a, b in zip(areas, areas[1:])]
    ok_dec = criterion("area decreasing d=0..4", all(r < 1 for r in ratios),
                       ", ".join(f"{a:.3f}" for a in areas))
    ok_ratio = criterion("step ratios <= 0.6", all(r <= 0.6 for r in ratios),
                         ", ".join(f"{r:.3f}" for r in ratios))
    ok_cover = criterion("contained in cover", all(o == 0 for o in outside),
                         f"cells outside {outside}")
    assert ok_dec and ok_ratio and ok_cover


# ---------------------------------------------------------------------------
# 7. venetian blind


@pytest.mark.criterion(7)
def test_criterion_7_venetian(criterion):
    params = BlindParams.default(4, 3)
    systems = build_blind(params)
    cur, keep, dist, mover = [], [], [], []
    for n, sys in enumerate(systems, start=1):
        cur.append(projection_measure(sys, params.directions[n - 1]) * n)
        if n > 1:
            keep += [projection_measure(sys, params.directions[j])
                     / projection_measure(systems[n - 2], params.directions[j]) for j in range(n - 1)]
        for p in probe_points(n, 25):
            entry = max(1, math.ceil(abs(p) - 1e-12))
            dist.append(distance_set_measure(sys, p) / distance_set_measure(systems[entry - 1], p))
        _, rep = blind_mover(sys, 2.0, cell=1e-3)
        mover.append(rep.sweep_area - (rep.shadow * 2.0 + rep.caps + rep.band))
    a = criterion("current shadow < 1/n", max(cur) < 1, f"max n*shadow {max(cur):.3f}")
    b = criterion("earlier shadows keep 90%", min(keep) >= 0.9, f"min kept {min(keep):.4f}")
    c = criterion("distance sets keep 50%", min(dist) >= 0.5, f"min kept {min(dist):.3f}")
    d = criterion("mover within shadow*R + caps + band", max(mover) <= 0,
                  f"max slack {max(mover):.4f}")
    assert a and b and c and d


# ---------------------------------------------------------------------------
# 8. topology


@pytest.mark.criterion(8)
def test_criterion_8_topology(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 40))
        gamma = Polyline(rng.normal(size=n) + 1j * rng.normal(size=n), True)
        w = winding_number(gamma, complex(*rng.normal(size=2))) / TWO_PI
        worst = max(worst, abs(w - round(w)))
    ok_int = criterion("whole turns", worst <= 1e-9 / TWO_PI, f"max deviation {worst:.1e} turns")

    add_err, rev_exact = 0.0, True
    for _ in range(100):
        g1 = Polyline(np.concatenate([[0j], rng.normal(size=6) + 1j * rng.normal(size=6)]))
        g2 = Polyline(np.concatenate([[g1.vertices[-1]], rng.normal(size=5) + 1j * rng.normal(size=5)]))
        p = 4 + 4j
        add_err = max(add_err, abs(winding_number(g1.then(g2), p)
                                   - (winding_number(g1, p) + winding_number(g2, p))))
        rev_exact &= winding_number(g1.reversed(), p) == -winding_number(g1, p)
    ok_add = criterion("concatenation additivity", add_err <= 1e-12, f"max error {add_err:.1e}")
    ok_rev = criterion("reversal antisymmetry", rev_exact, "bitwise")

    probe = Scene([Polygon(-0.5 + 0.1 * np.exp(2j * np.pi * np.arange(64) / 64))])
    case = ObstructionCase(Scene([Segment(-1j, 1j)]), 0, 1.0, probe, elementary_movement(translation(-1)))
    rep = lemma5_obstruction(case, GridSpec.around((-1, -1, 1, 1), 2e-3))
    ok_l5 = criterion("bar in disc: distinct => covered",
                      rep.asserted["hypothesis_met"] and rep.measured["uncovered_cells"] == 0,
                      f"uncovered {rep.measured.get('uncovered_cells')}")
    assert ok_int and ok_add and ok_rev and ok_l5


# ---------------------------------------------------------------------------
# 9. classification


@pytest.mark.criterion(9)
def test_criterion_9_classification(criterion):
    rng = np.random.default_rng(9)
    wrong = {"circle": 0, "segment": 0, "circular-arc": 0}
    for _ in range(100):
        m = random_motion(rng, small_angles=False)
        s = rng.uniform(0.1, 10)
        clouds = {
            "circle": s * np.exp(1j * np.linspace(0, TWO_PI, 100, endpoint=False)),
            "segment": s * np.linspace(-1, 1, 100) + 0j,
            "circular-arc": s * np.exp(1j * np.linspace(0, rng.uniform(0.3, 1.7 * math.pi), 100)),
        }
        for label, z in clouds.items():
            wrong[label] += classify_component(m(z)).label != label
    ok_rand = criterion("300 randomized instances", sum(wrong.values()) == 0, f"misclassified {wrong}")
    t = np.linspace(0, 4 * math.pi, 100)
    L = np.concatenate([np.linspace(0, 1, 50), 1 + 1j * np.linspace(0, 1, 50)[1:]])
    spiral = (1 + 0.1 * t) * np.exp(1j * t)
    labels = [classify_component(L).label, classify_component(spiral).label]
    ok_nt = criterion("L-shape and spiral nontrivial", labels == ["nontrivial"] * 2, str(labels))
    assert ok_rand and ok_nt
