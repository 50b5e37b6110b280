import json
import subprocess
import sys

import numpy as np
import pytest

from minkball import cli
from minkball import io as mio
from minkball.render import RenderSpec, render_svg
from minkball.support_core import make_grid, support_of_polygon


def run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def bodies(tmp_path, capsys):
    paths = {}
    specs = {
        "disk4": ["--n", 4, "--disk", 1],
        "sq4": ["--n", 4, "--square", 1],
        "big": ["--n", 24, "--square", 2],
        "small": ["--n", 24, "--square", 1],
        "disk24": ["--n", 24, "--disk", 1],
        "tri": ["--n", 48, "--regular", 3, "--radius", 1],
    }
    for name, args in specs.items():
        paths[name] = tmp_path / f"{name}.json"
        assert run(capsys, "body", "make", *args, "-o", paths[name])[0] == 0
    return paths


def test_pair_half_perimeter(bodies, capsys):
    code, out, _ = run(capsys, "pair", "--body", bodies["disk4"], "--measure", bodies["sq4"])
    assert code == 0 and out.strip() == "2.0"


def test_body_round_trip(tmp_path, capsys):
    path = tmp_path / "poly.json"
    verts = "0.3,-0.2;1.1,0.4;0.2,1.3;-0.9,0.1"
    assert run(capsys, "body", "make", "--n", 360, "--vertices", verts, "-o", path)[0] == 0
    code, out, _ = run(capsys, "body", "info", path)
    info = json.loads(out)
    assert code == 0 and info["valid"]
    want = np.array([[float(c) for c in p.split(",")] for p in verts.split(";")])
    got = np.array(info["vertices"])
    # edge normals off the grid add corners of the circumscribed grid polygon;
    # every input vertex must still come back
    for v in want:
        assert np.min(np.linalg.norm(got - v, axis=1)) <= 1e-12
    again = support_of_polygon(got, make_grid(360))
    assert np.max(np.abs(again.values - mio.load_body(path).values)) <= 1e-12


def test_grid_aligned_round_trip_is_exact(tmp_path, capsys):
    path = tmp_path / "sq.json"
    assert run(capsys, "body", "make", "--n", 360, "--vertices", "1,1;-1,1;-1,-1;1,-1", "-o", path)[0] == 0
    got = np.array(json.loads(run(capsys, "body", "info", path)[1])["vertices"])
    assert len(got) == 4
    assert np.max(np.abs(np.sort(np.abs(got), axis=0) - 1.0)) <= 1e-12


def test_body_operations(bodies, tmp_path, capsys):
    out = tmp_path / "sum.json"
    assert run(capsys, "body", "sum", bodies["small"], bodies["small"], "-o", out)[0] == 0
    assert np.allclose(mio.load_body(out).values, mio.load_body(bodies["big"]).values)
    assert run(capsys, "body", "sym", bodies["tri"], "-o", tmp_path / "hex.json")[0] == 0
    assert run(capsys, "body", "envelope", bodies["tri"], "-o", tmp_path / "env.json")[0] == 0


def test_measure_commands(bodies, tmp_path, capsys):
    m = tmp_path / "m.json"
    assert run(capsys, "measure", "of", bodies["big"], "-o", m)[0] == 0
    assert run(capsys, "measure", "blaschke", m, m, "-o", tmp_path / "b.json")[0] == 0
    assert run(capsys, "measure", "sym", m, "-o", tmp_path / "s.json")[0] == 0
    assert run(capsys, "measure", "from", tmp_path / "b.json", "-o", tmp_path / "x.json")[0] == 0
    assert np.allclose(mio.load_body(tmp_path / "x.json").values, 2 * mio.load_body(bodies["big"]).values)
    code, out, _ = run(capsys, "mixed-volume", bodies["big"], bodies["big"])
    assert code == 0 and float(out) == pytest.approx(4.0)


def test_majorize_and_include(bodies, capsys):
    code, out, _ = run(capsys, "majorize", "--mu", bodies["big"], "--nu", bodies["small"])
    assert code == 0 and out.startswith("dominated")
    code, out, _ = run(capsys, "majorize", "--mu", bodies["small"], "--nu", bodies["disk24"])
    assert code == 2
    assert "not dominated" in out and "a = (" in out
    assert run(capsys, "include", bodies["big"], bodies["small"])[0] == 0
    assert run(capsys, "include", bodies["small"], bodies["disk24"])[0] == 2


def test_usage_errors(capsys, tmp_path):
    code, _, err = run(capsys, "--bogus")
    assert code == 1 and "usage:" in err
    assert run(capsys, "pair", "--body", tmp_path / "missing.json", "--measure", tmp_path / "x.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "body", "info", bad)[0] == 1
    assert run(capsys, "body", "make", "--n", 7, "--disk", 1)[0] == 1


def test_grid_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("MINKBALL_GRID_N", "12")
    code, out, _ = run(capsys, "body", "make", "--disk", 1)
    assert code == 0 and json.loads(out)["grid_n"] == 12


def write_spec(tmp_path, **fields):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(fields))
    return path


def test_solve_certify_frontier(bodies, tmp_path, capsys):
    spec = write_spec(tmp_path, problem="urysohn-int", grid_n=48, x0=str(bodies["tri"]),
                      breadth=1.5, z_index=12, beta_cap=0.85)
    out = tmp_path / "sol.json"
    code, _, err = run(capsys, "solve", spec, "-o", out)
    assert code == 0 and "PASS" in err
    result = json.loads(out.read_text())
    assert result["certificate"]["pass"] and result["status"] == "ok"
    assert set(result["objectives"]) >= {"volume", "breadth_z"}
    assert run(capsys, "certify", out, spec)[0] == 0
    assert run(capsys, "certify", bodies["tri"], spec)[0] == 2

    csv1, csv2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "frontier", spec, "--caps", "0.8:1.0:3", "-o", csv1)[0] == 0
    assert run(capsys, "frontier", spec, "--caps", "0.8:1.0:3", "-o", csv2)[0] == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    assert csv1.read_text().splitlines()[0] == "cap,volume,breadth_z,alpha,beta,residual"
    assert run(capsys, "frontier", spec, "--caps", "nonsense", "-o", csv1)[0] == 1


def test_solve_other_problems(bodies, tmp_path, capsys):
    spec = write_spec(tmp_path, problem="urysohn-ext", grid_n=48, x0=str(bodies["tri"]), breadth=4.0)
    code, out, _ = run(capsys, "solve", spec)
    assert code == 0 and json.loads(out)["certificate"]["pass"]
    spec = write_spec(tmp_path, problem="urysohn-ext", grid_n=48, x0=str(bodies["tri"]), breadth=0.5)
    assert run(capsys, "solve", spec)[0] == 2
    spec = write_spec(tmp_path, problem="iso", grid_n=48, bodies=[str(bodies["tri"])], volume=2.0)
    code, out, _ = run(capsys, "solve", spec)
    assert code == 0 and json.loads(out)["objectives"]["volume"] == pytest.approx(2.0)
    spec = write_spec(tmp_path, problem="nope")
    assert run(capsys, "solve", spec)[0] == 1


def test_revolve(bodies, capsys):
    code, out, _ = run(capsys, "revolve", bodies["big"], "--axis", 6)
    data = json.loads(out)
    assert code == 0
    assert data["volume"] == pytest.approx(2 * np.pi)
    assert run(capsys, "revolve", bodies["tri"], "--axis", 0)[0] == 1


def test_render(bodies, tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(capsys, "render", bodies["sq4"], "-o", a)[0] == 0
    assert run(capsys, "render", bodies["sq4"], "-o", b)[0] == 0
    text = a.read_text()
    assert a.read_bytes() == b.read_bytes()
    assert text.count("<path") == 1
    path = text[text.index('d="') + 3:]
    assert path[:path.index('"')].count("L") == 3  # M + 3 L = 4 vertices


def test_render_spec_rejects_empty_canvas():
    g = make_grid(4)
    with pytest.raises(Exception):
        render_svg(RenderSpec(0, 10, [support_of_polygon([[0, 0], [1, 1]], g)]))


def test_figure1_small_grid(tmp_path, capsys):
    svg = tmp_path / "fig1.svg"
    code, _, err = run(capsys, "figure1", "--n", 72, "-o", svg)
    text = svg.read_text()
    assert code == 0 and "PASS" in err
    assert text.count("<path") == 2 and text.count("<circle") > 0


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    mio.atomic_write(target, "one")
    mio.atomic_write(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_console_script(bodies):
    proc = subprocess.run([sys.executable, "-m", "minkball.cli", "pair", "--body", str(bodies["disk4"]),
                           "--measure", str(bodies["sq4"])], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "2.0"
