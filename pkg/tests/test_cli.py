import json
import math
from pathlib import Path

import numpy as np
import pytest

from kakeya.cli import lemma_suites, main
from kakeya.motions import compose, rotation, translation
from kakeya.movements import elementary_movement
from kakeya.scene import Polygon, Scene, Segment

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(tmp_path, *argv):
    report = tmp_path / "report.json"
    code = main([*argv, "--report", str(report)])
    data = json.loads(report.read_text()) if report.exists() else None
    return code, data


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_lemmas_passes_and_echoes_seed(tmp_path):
    code, rep = run(tmp_path, "verify-lemmas", "--seed", "7")
    assert code == 0
    assert rep["config"]["seed"] == 7
    assert rep["command"] == "verify-lemmas"
    assert set(rep["verdicts"]) == {"iterate_identity", "iterate_lower_bound", "inverse_lipschitz",
                                    "increment_bound", "grid_identity", "splice_distance"}
    assert rep["pass"] is True


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    main(["verify-lemmas", "--seed", "3", "--report", str(a / "r.json")])
    main(["verify-lemmas", "--seed", "3", "--report", str(b / "r.json")])
    ta = (a / "r.json").read_text().replace(str(a), "")
    tb = (b / "r.json").read_text().replace(str(b), "")
    assert ta == tb
    timing = json.loads((a / "r.json.timing.json").read_text())
    assert timing["seconds"] >= 0


def test_lemma_suites_depend_on_seed():
    a, b = lemma_suites(1), lemma_suites(2)
    assert a["inverse_lipschitz"]["max_excess"] != b["inverse_lipschitz"]["max_excess"]
    assert a == lemma_suites(1)


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bad_flag_values_exit_2():
    for argv in (["perron", "--cell", "-1"], ["perron", "--steps", "1"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_missing_and_malformed_files_exit_2(tmp_path, capsys):
    assert main(["sweep", "--scene", str(tmp_path / "nope.json"), "--movement", "x"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["classify", "--points", str(bad)]) == 2
    scene = write(tmp_path, "scene.json", {"primitives": [{"type": "blob"}]})
    move = write(tmp_path, "move.json", elementary_movement(translation(1)).to_json())
    assert main(["sweep", "--scene", scene, "--movement", move]) == 2
    assert "error" in capsys.readouterr().err


def test_sweep_reports_area(tmp_path):
    scene = write(tmp_path, "s.json", Scene([Segment(0, 1)]).to_json())
    move = write(tmp_path, "m.json", elementary_movement(translation(1j)).to_json())
    svg, pgm = tmp_path / "o.svg", tmp_path / "o.pgm"
    code, rep = run(tmp_path, "sweep", "--scene", scene, "--movement", move, "--cell", "0.01",
                    "--svg", str(svg), "--pgm", str(pgm))
    assert code == 0
    assert rep["measured"]["area"] == pytest.approx(1.0, rel=0.05)
    assert svg.read_text().startswith("<svg") and pgm.read_bytes().startswith(b"P5")


def test_sample_inputs_run(tmp_path):
    code, rep = run(tmp_path, "sweep", "--scene", str(SAMPLES / "parallel_segments.json"),
                    "--movement", str(SAMPLES / "slide.json"), "--cell", "0.01")
    assert code == 0 and rep["measured"]["area"] > 0
    code, rep = run(tmp_path, "obstruct", "--case", str(SAMPLES / "bar_in_disc.json"))
    assert code == 0 and rep["measured"]["uncovered_cells"] == 0
    code, rep = run(tmp_path, "classify", "--points", str(SAMPLES / "circle_points.json"),
                    "--expect", "circle")
    assert code == 0 and rep["measured"]["label"] == "circle"


def test_perron(tmp_path):
    code, rep = run(tmp_path, "perron", "--k", "3", "--cell", "2e-3")
    assert code == 0
    assert rep["asserted"]["union_fraction_bound"] == pytest.approx(2 / 5)
    assert rep["verdicts"] == {"directions_preserved": True, "area_within_bound": True}


def test_paljoin(tmp_path):
    code, rep = run(tmp_path, "paljoin", "--offset", "0.5", "--eps", "0.2", "--cell", "2e-3")
    assert code == 0
    assert rep["measured"]["end_pose_error"] <= 1e-9
    assert rep["measured"]["sweep_area"] <= rep["asserted"]["limit"]


def test_needle_guard_refuses_infeasible_measurement(tmp_path):
    code, rep = run(tmp_path, "needle", "--eps", "0.5", "--max-path-cells", "1000")
    assert code == 1
    assert rep["measured"]["skipped"] is True
    assert rep["verdicts"]["end_pose"] is True
    assert rep["verdicts"]["measured_within_budget"] is False


def test_needle_rotation_only_small(tmp_path):
    code, rep = run(tmp_path, "needle", "--eps", "1.0", "--k", "3", "--rotation-only",
                    "--cell", "2e-3")
    assert code == 0
    assert rep["measured"]["k"] == 3
    assert rep["measured"]["sweep_area"] <= rep["asserted"]["limit"]


def test_example_k2(tmp_path):
    alpha = write(tmp_path, "a.json", compose(rotation(0, math.pi / 3), translation(1 + 1j)).to_json())
    code, rep = run(tmp_path, "example-k2", "--depth", "1", "--alpha", alpha, "--cell", "4e-3")
    assert code == 0
    assert rep["measured"]["cells_outside_cover"] == 0


def test_venetian(tmp_path):
    svg = tmp_path / "v.svg"
    code, rep = run(tmp_path, "venetian", "--generations", "3", "--slats", "3", "--svg", str(svg))
    assert code == 0
    gens = rep["measured"]["generations"]
    assert [g["rectangles"] for g in gens] == [1, 3, 9]
    assert all(rep["verdicts"].values())
    assert svg.exists()


def test_venetian_bad_generations_exit_2(tmp_path):
    code, rep = run(tmp_path, "venetian", "--generations", "9")
    assert code == 2 and rep is None


def test_obstruct_escape_exit_2(tmp_path):
    disc = Polygon(-0.5 + 0.1 * np.exp(2j * np.pi * np.arange(32) / 32))
    case = {"obstacle": Scene([Segment(-1j, 1j)]).to_json(), "disc": {"center": [0, 0], "radius": 1},
            "probe": Scene([disc]).to_json(),
            "movement": elementary_movement(translation(-2)).to_json()}
    code, _ = run(tmp_path, "obstruct", "--case", write(tmp_path, "c.json", case))
    assert code == 2


def test_classify_expectation_failure_exit_1(tmp_path):
    pts = write(tmp_path, "p.json", [[x, 0.0] for x in np.linspace(0, 1, 20)])
    code, rep = run(tmp_path, "classify", "--points", pts, "--expect", "circle")
    assert code == 1
    assert rep["measured"]["label"] == "segment"


def test_stdout_when_no_report(capsys):
    assert main(["classify", "--points", str(SAMPLES / "circle_points.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["measured"]["label"] == "circle"
