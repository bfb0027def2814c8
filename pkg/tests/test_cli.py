import json

import numpy as np
import pytest

from quadgeo import checks, cli, jsonio, surfaces as sf
from quadgeo.errors import UsageError
from quadgeo.grids import GridChart


def run(argv):
    return cli.main(argv)


def test_surface_json_roundtrip(tmp_path):
    surf = sf.make_surface(sf.TorusSampler(1.0, 3.0), (0.3, 1.7, 0.2, 1.8), 9, 9)
    path = tmp_path / "t.json"
    jsonio.write_surface(surf, path)
    back = jsonio.read_surface(path)
    assert back.geometry == surf.geometry
    assert np.allclose(back.points, surf.points)
    assert np.allclose(back.kappa1, surf.kappa1)
    assert back.chart == surf.chart


def test_generate_and_pipeline_commands(tmp_path):
    surf_path = str(tmp_path / "torus.json")
    assert run(["generate", "--kind", "torus", "--param", "r=1", "--param", "R=3",
                "--grid-nu", "17", "--grid-nv", "17", "--out", surf_path]) == 0
    out = tmp_path / "lift.json"
    assert run(["lift", "--surface", surf_path, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["nullity_max"] < 1e-10
    out2 = tmp_path / "energy.json"
    assert run(["energy", "--surface", surf_path, "--out", str(out2)]) == 0
    rep2 = json.loads(out2.read_text())
    assert abs(rep2["total"]) < 1e-7
    assert len(rep2["density"]) == 17 * 17
    out3 = tmp_path / "tension.json"
    assert run(["tension", "--surface", surf_path, "--out", str(out3)]) == 0
    assert json.loads(out3.read_text())["tau_max"] < 1e-3


def test_generate_asymptotic_graph(tmp_path):
    surf_path = str(tmp_path / "graph.json")
    assert run(["generate", "--kind", "perturbed_graph", "--param", "cx=0.1",
                "--param", "cy=0.1", "--grid-nu", "33", "--grid-nv", "33",
                "--asymptotic", "--out", surf_path]) == 0
    surf = jsonio.read_surface(surf_path)
    assert surf.geometry == "projective3"
    assert surf.meta.get("asymptotic")


def test_generate_rejects_bad_kind(tmp_path):
    assert run(["generate", "--kind", "klein_bottle", "--out", str(tmp_path / "x.json")]) == 2


def test_generate_rejects_bad_parameters(tmp_path):
    # tube radius must stay below the center radius
    assert run(["generate", "--kind", "torus", "--param", "r=3", "--param", "R=1",
                "--out", str(tmp_path / "x.json")]) == 2


def test_check_suite_exit_codes(tmp_path):
    out = str(tmp_path / "r.json")
    code = run(["check", "--suite", "orthogonality", "--grids", "17,33,65", "--out", out])
    assert code == 0
    rep = json.loads(open(out).read())
    assert rep["pass"] is True
    assert rep["suite"] == "orthogonality"
    assert run(["check", "--suite", "nope", "--out", out]) == 2


def test_check_report_determinism(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    args = ["check", "--suite", "conformality", "--grids", "17,33", "--seed", "7"]
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert open(a).read() == open(b).read()


def test_merge_reports(tmp_path):
    paths = []
    for k, grids in enumerate(("9,17,33", "17,33,65")):
        p = str(tmp_path / f"r{k}.json")
        assert run(["check", "--suite", "orthogonality", "--grids", grids, "--out", p]) == 0
        paths.append(p)
    out = str(tmp_path / "merged.json")
    assert run(["merge", "--out", out] + paths) == 0
    merged = json.loads(open(out).read())
    assert merged["pass"] is True
    assert merged["suites"] == {"orthogonality": True}
    fitted = merged["convergence_orders"]["orthogonality.residual_by_grid"]
    assert 1.7 < fitted < 2.3


def test_merge_empty_is_usage_error():
    with pytest.raises(UsageError):
        checks.report_merge([])


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngrid-nu = 17\ntol = 1e-3\nname=abc\n")
    parsed = cli.load_config(str(cfg))
    assert parsed == {"grid_nu": "17", "tol": "1e-3", "name": "abc"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("not a pair\n")
    with pytest.raises(UsageError):
        cli.load_config(str(bad))


def test_descent_command(tmp_path):
    surf_path = str(tmp_path / "ell.json")
    surf = checks.make_ellipsoid(17, checks.ELL_WINDOW_TENSION)
    jsonio.write_surface(surf, surf_path)
    out = str(tmp_path / "descent.json")
    assert run(["descent", "--surface", surf_path, "--steps", "3",
                "--step-size", "2e-06", "--out", out]) == 0
    rep = json.loads(open(out).read())
    assert rep["monotone"] is True
    assert len(rep["energy_sequence"]) == 4


def test_deform_and_dualize_commands(tmp_path):
    surf_path = str(tmp_path / "torus.json")
    jsonio.write_surface(checks.make_torus(17), surf_path)
    out = str(tmp_path / "deform.json")
    assert run(["deform", "--surface", surf_path, "--lambda-re", "2.0", "--out", out]) == 0
    assert json.loads(open(out).read())["blaschke_u"] < 1e-3
    out2 = str(tmp_path / "dual.json")
    conn = str(tmp_path / "conn.json")
    assert run(["dualize", "--surface", surf_path, "--out", out2,
                "--connection-out", conn]) == 0
    rep = json.loads(open(out2).read())
    assert rep["dual_signature"] == [3, 3]
    assert rep["imaginary_defect"] < 1e-10
    assert json.loads(open(conn).read())["nu"] == 17
