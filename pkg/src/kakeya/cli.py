"""Command-line front end: ``kakeya <command> [options]``.

Every run writes one JSON report (``--report``, or standard output) with the
command, an echo of the configuration including the seed, ``measured`` raster
numbers, ``asserted`` bounds, and boolean ``verdicts``. The report itself is
deterministic; wall-clock timing goes to a sidecar ``<report>.timing.json``.

Exit status: 0 if every verdict passes, 1 if any fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .constructions import (
    dimension2_report,
    needle_cost,
    needle_reversal_schedule,
    pal_join,
    perron_tree,
)
from .errors import KakeyaError
from .motions import (
    RigidMotion,
    check_inverse_lipschitz,
    check_iterate_norm_identity,
    compose,
    iterate,
    op_norm,
    point_pair,
    rotation,
    translation,
)
from .movements import (
    check_elementary_increment_bound,
    check_splice_distance,
    elementary_movement,
    movement_from_json,
    perturbed_elementary,
)
from .raster import GridSpec, rasterize, render_svg, sweep_stats, swept_box, write_pgm
from .scene import Scene
from .topology import ObstructionCase, classify_component, lemma5_obstruction
from .venetian import BlindParams, blind_mover, blind_report, build_blind

log = logging.getLogger("kakeya")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

# Sparse needle sweeps cost roughly one key per cell of travelled path; refuse
# runs whose projected path would take far longer than a desk-scale budget.
DEFAULT_MAX_PATH_CELLS = 1e8


class InvalidRun(Exception):
    """Bad command-line input (maps to exit status 2)."""


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidRun(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidRun(f"{path} is not valid JSON: {exc}") from exc


def _outputs(args, mask, scene: Scene | None = None) -> dict[str, str]:
    files = {}
    if getattr(args, "svg", None):
        render_svg(mask, args.svg, scene)
        files["svg"] = args.svg
    if getattr(args, "pgm", None):
        write_pgm(mask, args.pgm)
        files["pgm"] = args.pgm
    return files


def _grid_for(box, cell: float) -> GridSpec:
    return GridSpec.around(box, cell)


# ---------------------------------------------------------------------------
# commands; each returns (measured, asserted, verdicts)


def cmd_sweep(args):
    scene = Scene.from_json(_load_json(args.scene))
    M = movement_from_json(_load_json(args.movement))
    grid = _grid_for(swept_box(M, scene), args.cell)
    res = sweep_stats(M, scene, args.steps, grid)
    measured = {"area": res.mask.area(), "cells": res.mask.count(), "time_steps": res.time_steps,
                "path_length": res.path_length, "grid": grid.to_json()}
    asserted = {"band": res.band_allowance()}
    measured["files"] = _outputs(args, res.mask, scene)
    return measured, asserted, {}


def cmd_perron(args):
    scene, rep = perron_tree(args.k, cell=args.cell)
    tri = rep.asserted["triangle_area"]
    band = 4 * args.cell * scene.length()
    limit = rep.asserted["union_fraction_bound"] * tri + band
    measured = dict(rep.measured)
    asserted = dict(rep.asserted, band=band, area_limit=limit)
    verdicts = {"directions_preserved": bool(rep.asserted["directions_preserved"]),
                "area_within_bound": measured["union_area"] <= limit}
    if args.svg or args.pgm:
        mask = rasterize(scene, _grid_for(scene.bbox(), args.cell))
        measured["files"] = _outputs(args, mask, scene)
    return measured, asserted, verdicts


def _measure_schedule(args, sched, eps: float, target_error: float):
    path_estimate = sched.details.get("estimated_path")
    measured: dict[str, Any] = dict(sched.details)
    if path_estimate is not None and path_estimate / args.cell > args.max_path_cells:
        measured["skipped"] = True
        measured["projected_path_cells"] = path_estimate / args.cell
        return measured, {"eps": eps}, {"measured_within_budget": False,
                                         "end_pose": target_error <= 1e-9}
    t0 = time.perf_counter()
    sweep = sched.measure(args.cell, args.steps, translations=not args.rotation_only)
    measured.update(sweep_area=sweep.area(), cells=sweep.count(), path_length=sweep.path_length,
                    time_steps=sweep.time_steps, measure_seconds=None)
    band = sweep.band_allowance()
    asserted = {"eps": eps, "band": band, "limit": eps + band}
    verdicts = {"area_within_eps_plus_band": sweep.area() <= eps + band,
                "end_pose": target_error <= 1e-9}
    log.info("sweep measured in %.2fs", time.perf_counter() - t0)
    if args.svg or args.pgm:
        z = sweep.centers()
        box = (z.real.min(), z.imag.min(), z.real.max(), z.imag.max())
        measured["files"] = _outputs(args, sweep.to_mask(_grid_for(box, args.cell)), sched.start)
    measured.pop("measure_seconds")
    return measured, asserted, verdicts


def cmd_needle(args):
    sched = needle_reversal_schedule(args.eps, args.k)
    _, slide = needle_cost(sched.details["k"], args.eps)
    sched.details["estimated_path"] = slide
    return _measure_schedule(args, sched, args.eps, sched.details["end_pose_error"])


def cmd_paljoin(args):
    sched = pal_join(args.length, args.offset, args.eps)
    target = sched.details.get("target")
    err = 0.0
    if target is not None:
        end = sched.end_scene().primitives[0]
        err = max(abs(end.a - complex(*target["a"])), abs(end.b - complex(*target["b"])))
    sched.details["end_pose_error"] = err
    sched.details["estimated_path"] = sched.details.get("slide", 0.0)
    return _measure_schedule(args, sched, args.eps, err)


def _alpha_from_args(args) -> RigidMotion:
    if args.alpha:
        return RigidMotion.from_json(_load_json(args.alpha))
    # default: rotate by pi/3 about the origin after translating by (1, 1)
    return compose(rotation(0, math.pi / 3), translation(1 + 1j))


def cmd_example_k2(args):
    alpha = _alpha_from_args(args)
    rep, mask = dimension2_report(args.depth, alpha, cell=args.cell)
    measured = dict(rep.measured)
    measured["files"] = _outputs(args, mask)
    verdicts = {"contained_in_cover": bool(rep.asserted["contained_in_cover"]),
                "end_matches_alpha": bool(rep.asserted["end_matches_alpha"])}
    return measured, dict(rep.asserted), verdicts


def cmd_venetian(args):
    params = BlindParams.default(args.generations, args.slats)
    report = blind_report(params, probes=args.probes)
    gens = report["generations"]
    systems = build_blind(params)
    _, mover = blind_mover(systems[-1], args.R, cell=args.cell)
    measured = {"generations": gens, "mover": mover.to_json()["measured"]}
    asserted = {"params": report["params"], "mover": mover.to_json()["asserted"]}
    verdicts = {
        "current_shadow_below_one_over_n": all(g["current_shadow"] < 1 / g["generation"] for g in gens),
        "earlier_shadows_keep_90_percent": all(r >= 0.9 for g in gens for r in g["shadow_retained"]),
        "distance_sets_keep_half": all(d["retained"] >= 0.5 for g in gens for d in g["distance_sets"]),
        "mover_within_bound": mover.passed,
    }
    if args.svg or args.pgm:
        scene = systems[0].scene()
        grid = _grid_for(scene.bbox(), args.cell)
        measured["files"] = _outputs(args, rasterize(systems[-1].scene(), grid), systems[-1].scene())
    return measured, asserted, verdicts


def case_from_json(data) -> ObstructionCase:
    try:
        disc = data["disc"]
        return ObstructionCase(Scene.from_json(data["obstacle"]), complex(*disc["center"]),
                               float(disc["radius"]), Scene.from_json(data["probe"]),
                               movement_from_json(data["movement"]), float(data.get("t_end", 1.0)))
    except (KeyError, TypeError) as exc:
        raise InvalidRun(f"bad obstruction case: {exc}") from exc


def cmd_obstruct(args):
    case = case_from_json(_load_json(args.case))
    r = case.disc_radius
    c = case.disc_center
    grid = _grid_for((c.real - r, c.imag - r, c.real + r, c.imag + r), args.cell)
    rep = lemma5_obstruction(case, grid)
    return dict(rep.measured), dict(rep.asserted), {"implication_holds": bool(rep.asserted["pass"])}


def cmd_classify(args):
    data = _load_json(args.points)
    if isinstance(data, dict):
        data = data.get("points")
    try:
        pts = np.array([complex(*p) for p in data])
    except (TypeError, ValueError) as exc:
        raise InvalidRun("points must be a list of [x, y] pairs") from exc
    c = classify_component(pts, args.tol)
    verdicts = {} if args.expect is None else {"expected_label": c.label == args.expect}
    return c.to_json(), {"tol": c.tol}, verdicts


# ---------------------------------------------------------------------------
# lemma suites


def _random_motion(rng, max_c=10.0, max_phi=math.pi) -> RigidMotion:
    phi = rng.uniform(-max_phi, max_phi) * 10.0 ** (-rng.uniform(0, 3) * rng.integers(0, 2))
    return RigidMotion(cmath.exp(1j * phi), complex(*rng.uniform(-max_c, max_c, 2)))


def lemma_suites(seed: int) -> dict[str, dict[str, Any]]:
    """Randomised checks of the motion identities and movement bounds; keyed by suite name."""
    rng = np.random.default_rng(seed)
    out: dict[str, dict[str, Any]] = {}

    worst_id, worst_lower, lower_checked, ok = 0.0, -math.inf, 0, True
    for _ in range(1000):
        alpha = _random_motion(rng)
        for n in range(1, 51):
            r = check_iterate_norm_identity(alpha, n)
            ok &= r.passed
            worst_id = max(worst_id, r.details["identity_error"])
            if "lower_bound" in r.details:
                lower_checked += 1
                worst_lower = max(worst_lower, r.details["lower_bound"] - r.lhs)
    out["iterate_identity"] = {"checks": 50_000, "max_error": worst_id, "pass": bool(ok)}
    out["iterate_lower_bound"] = {"checks": lower_checked, "max_shortfall": worst_lower,
                                  "pass": bool(lower_checked == 0 or worst_lower <= 1e-12)}

    worst, ok = -math.inf, True
    for _ in range(1000):
        r = check_inverse_lipschitz(_random_motion(rng), _random_motion(rng))
        worst = max(worst, r.lhs - r.rhs)
        ok &= r.passed
    out["inverse_lipschitz"] = {"checks": 1000, "max_excess": worst, "pass": bool(ok)}

    worst, ok = -math.inf, True
    for _ in range(50):
        alpha = RigidMotion(cmath.exp(1j * rng.uniform(-3, 3)), complex(*rng.uniform(-10, 10, 2)))
        r = check_elementary_increment_bound(alpha, 64, 256)
        worst = max(worst, r.max_violation)
        ok &= r.passed
    out["increment_bound"] = {"motions": 50, "max_violation": worst, "pass": bool(ok)}

    worst, ok = 0.0, True
    for n in range(1, 65):
        for alpha in (translation(complex(*rng.uniform(-1, 1, 2))),
                      rotation(complex(*rng.uniform(-2, 2, 2)), rng.uniform(-0.999, 0.999) * math.pi / n)):
            E = elementary_movement(iterate(alpha, n))
            for i in range(1, n + 1):
                err = op_norm(E.evaluate(i / n) - iterate(alpha, i))
                worst = max(worst, err)
                ok &= err <= 1e-10
    out["grid_identity"] = {"max_error": worst, "pass": bool(ok)}

    worst, ok = -math.inf, True
    for n in (1, 2, 4, 8, 16, 32, 64):
        u = cmath.exp(1j * rng.uniform(-1, 1) * 0.2 / n)
        beta = RigidMotion(u, complex(*rng.uniform(-1, 1, 2)) * 0.2 / n)
        r = check_splice_distance(beta, n, perturbed_elementary(beta, 0.3 / n))
        worst = max(worst, r.details["max_distance"] - r.details["bound"])
        ok &= r.passed
    out["splice_distance"] = {"max_excess": worst, "pass": bool(ok)}
    return out


def cmd_verify_lemmas(args):
    suites = lemma_suites(args.seed)
    return suites, {}, {name: s["pass"] for name, s in suites.items()}


# ---------------------------------------------------------------------------
# parser and dispatch


def _positive(kind: Callable[[str], Any]):
    def parse(text):
        try:
            v = kind(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kakeya", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kakeya {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_text, cell=2e-3):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--cell", type=_positive(float), default=cell, help="raster cell size")
        p.add_argument("--steps", type=int, default=2, help="initial time samples (>= 2)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
        p.add_argument("--report", help="write the JSON report here (default: stdout)")
        p.add_argument("--svg", help="write an SVG rendering here")
        p.add_argument("--pgm", help="write a PGM raster here")
        p.set_defaults(func=func)
        return p

    p = add("sweep", cmd_sweep, "rasterise the set touched by a moving scene", 1e-2)
    p.add_argument("--scene", required=True)
    p.add_argument("--movement", required=True)

    p = add("perron", cmd_perron, "Perron tree union area", 1e-3)
    p.add_argument("--k", type=int, default=5)

    for name, func, text in (("needle", cmd_needle, "turn a unit needle around in small area"),
                             ("paljoin", cmd_paljoin, "move a segment to a parallel one in small area")):
        p = add(name, func, text, 1e-3)
        p.add_argument("--eps", type=_positive(float), default=0.5 if name == "needle" else 0.1)
        p.add_argument("--rotation-only", action="store_true",
                       help="leave straight slides out of the measured sweep")
        p.add_argument("--max-path-cells", type=float, default=DEFAULT_MAX_PATH_CELLS,
                       help="skip the measurement if the projected path exceeds this many cells")
    sub.choices["needle"].add_argument("--k", type=int, default=None, help="Perron depth")
    sub.choices["paljoin"].add_argument("--offset", type=float, default=1.0)
    sub.choices["paljoin"].add_argument("--length", type=_positive(float), default=1.0)

    p = add("example-k2", cmd_example_k2, "Cantor-product example of Hausdorff dimension two")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--alpha", help="JSON rigid motion {u: [x, y], c: [x, y]}")

    p = add("venetian", cmd_venetian, "venetian-blind rectangle systems", 1e-3)
    p.add_argument("--generations", type=int, default=4)
    p.add_argument("--slats", type=int, default=3)
    p.add_argument("--probes", type=int, default=25)
    p.add_argument("--R", type=_positive(float), default=2.0, help="translation length for the mover")

    p = add("obstruct", cmd_obstruct, "coverage obstruction for a set moving inside a disc", 4e-3)
    p.add_argument("--case", required=True)

    p = add("classify", cmd_classify, "classify a sampled connected set")
    p.add_argument("--points", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--expect", default=None, help="expected label (adds a verdict)")

    add("verify-lemmas", cmd_verify_lemmas, "randomised identity and bound suites")
    return parser


def _config(args) -> dict[str, Any]:
    skip = {"func", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, complex):
        return point_pair(x)
    return x


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.steps < 2:
        parser.error("--steps must be >= 2")
    started = time.time()
    try:
        measured, asserted, verdicts = args.func(args)
    except (InvalidRun, KakeyaError, ValueError) as exc:
        print(f"kakeya {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = _to_jsonable({
        "command": args.command,
        "config": _config(args),
        "measured": measured,
        "asserted": asserted,
        "verdicts": verdicts,
        "pass": all(verdicts.values()),
    })
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
        timing = {"started": started, "finished": time.time(), "seconds": time.time() - started}
        Path(args.report + ".timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    for name, ok in verdicts.items():
        if not ok:
            print(f"kakeya {args.command}: verdict failed: {name}", file=sys.stderr)
    return EXIT_OK if report["pass"] else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
