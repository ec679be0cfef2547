import json
import subprocess
import sys

import numpy as np
import pytest

from test_develop import _extreme
from polycusp.catalog import equilateral_torus, punctured_square, random_metric
from polycusp.cli import dumps, main
from polycusp.cusp import CuspState, build_state
from polycusp.surface import load_surface


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def equilateral(tmp_path):
    return _write(tmp_path / "eq.json", equilateral_torus().to_dict())


@pytest.fixture
def metric5(tmp_path):
    s = random_metric(5, np.random.default_rng(11))
    return _write(tmp_path / "m5.json", s.to_dict())


def test_solve_one_vertex(capsys, equilateral):
    code, out, err = _run(capsys, "solve", "--input", equilateral)
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["h"] == [0.0]
    assert max(abs(k) for k in doc["kappa"]) < 1e-10
    assert doc["solver"]["iterations"] == 0
    assert doc["input_digest"].startswith("sha256:")


def test_report_fields(capsys, metric5):
    code, out, _ = _run(capsys, "solve", "--input", metric5)
    assert code == 0
    doc = json.loads(out)
    for key in ("input_digest", "triangulation", "h", "edges", "kappa", "S",
                "volume", "solver"):
        assert key in doc
    assert abs(sum(doc["h"])) < 1e-12
    assert len(doc["triangulation"]["triangles"]) == len(doc["triangulation"]["lengths"])
    assert {"edge", "vertices", "length", "theta", "flat"} <= set(doc["edges"][0])


def test_report_round_trip(capsys, metric5):
    _, out, _ = _run(capsys, "solve", "--input", metric5)
    doc = json.loads(out)
    st = build_state(load_surface(doc["surface"]), doc["h"])
    assert st.theta == pytest.approx([e["theta"] for e in doc["edges"]], abs=1e-12)
    assert st.kappa == pytest.approx(doc["kappa"], abs=1e-12)


def test_determinism(capsys, metric5, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["solve", "--input", metric5, "--output", str(a)]) == 0
    assert main(["solve", "--input", metric5, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_particles_bad_sum(capsys, metric5, tmp_path):
    k = _write(tmp_path / "k.json", {"kappa": [0.1, 0, 0, 0, 0]})
    code, out, err = _run(capsys, "particles", "--input", metric5, "--kappa", k)
    assert code == 1 and out == ""
    assert json.loads(err)["code"] == "TargetSumNonzero"


def test_particles_punctured_square(capsys, tmp_path):
    s, h = punctured_square()
    kappa = CuspState(s, h).kappa
    inp = _write(tmp_path / "sq.json", s.to_dict())
    k = _write(tmp_path / "k.json", kappa.tolist())
    code, out, _ = _run(capsys, "particles", "--input", inp, "--kappa", k)
    assert code == 0
    report = tmp_path / "rep.json"
    report.write_text(out)
    code, out, _ = _run(capsys, "rigidity", "--input", str(report))
    assert code == 0
    # the solver stops near the degenerate point; analyse the exact one
    exact = _write(tmp_path / "exact.json", {"surface": s.to_dict(), "h": h.tolist()})
    code, out, _ = _run(capsys, "rigidity", "--input", exact)
    rig = json.loads(out)["rigidity"]
    assert rig["deficiency"] == 1 and not rig["rigid"]


def test_develop_obj_convex(capsys, metric5, tmp_path):
    _, out, _ = _run(capsys, "solve", "--input", metric5)
    report = _write(tmp_path / "rep.json", json.loads(out))
    code, obj, _ = _run(capsys, "develop", "--input", report, "--copies", "2",
                        "--format", "obj")
    assert code == 0
    V = np.array([[float(x) for x in l.split()[1:]] for l in obj.splitlines()
                  if l.startswith("v ")])
    assert len(V) == 25 * 5
    assert len(_extreme(V)) == len(V)


def test_develop_json(capsys, metric5):
    code, out, _ = _run(capsys, "develop", "--input", metric5)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["holonomy"]["g1"]["rot"]) < 1e-9
    assert len(doc["vertices"]) == 5


def test_validate_and_delaunay(capsys, metric5):
    code, out, _ = _run(capsys, "validate", "--input", metric5)
    assert code == 0 and json.loads(out)["n_vertices"] == 5
    code, out, _ = _run(capsys, "delaunay", "--input", metric5)
    assert code == 0
    load_surface(json.loads(out)["surface"])


def test_malformed_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = _run(capsys, "solve", "--input", str(bad))
    assert code == 1
    assert json.loads(err)["code"] == "InputError"
    code, _, err = _run(capsys, "solve", "--input", str(tmp_path / "missing.json"))
    assert code == 1


def test_inconsistent_flags(capsys, metric5, tmp_path):
    k = _write(tmp_path / "k.json", [0.0] * 5)
    assert _run(capsys, "solve", "--input", metric5, "--kappa", k)[0] == 1
    assert _run(capsys, "particles", "--input", metric5)[0] == 1
    assert _run(capsys, "solve", "--input", metric5, "--format", "obj")[0] == 1


def test_infeasible_start_exit_2(capsys, metric5, tmp_path):
    start = _write(tmp_path / "h.json", {"h": [50.0, 0, 0, 0, 0]})
    code, _, err = _run(capsys, "solve", "--input", metric5, "--start",
                        "file:" + start)
    assert code == 2
    assert json.loads(err)["code"] == "Infeasible"


def test_random_start_agrees(capsys, metric5):
    _, a, _ = _run(capsys, "solve", "--input", metric5)
    _, b, _ = _run(capsys, "solve", "--input", metric5, "--start", "random",
                   "--seed", "3")
    ha, hb = json.loads(a)["h"], json.loads(b)["h"]
    assert ha == pytest.approx(hb, abs=1e-7)


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [1, np.float64(2.5)], "c": np.array([1.0 / 3])})
    doc = json.loads(text)
    assert list(doc) == ["b", "a", "c"]
    assert "0.33333333333333331" in text


def test_console_script(equilateral):
    out = subprocess.run([sys.executable, "-m", "polycusp.cli", "validate",
                          "--input", equilateral], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["valid"] is True
