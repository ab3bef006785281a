import json

import pytest

from conjbench.cli import main
from conjbench.core import LinearOrder, Poset
from conjbench.serialize import dumps

FAST_PO = ["--stages", "1", "--p-copies", "2", "--z-chains", "1", "--z-window", "2"]


@pytest.fixture
def inputs(tmp_path):
    paths = {}
    for name, s in {"chain3": LinearOrder.chain(3), "lin2": LinearOrder.chain(2),
                    "vee": Poset.from_pairs(range(3), [(0, 1), (0, 2)])}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(dumps(s))
        paths[name] = str(p)
    return paths


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_po_writes_stages(tmp_path, inputs, capsys):
    out = tmp_path / "po"
    code, text, _ = run(["build", "--construction", "po", "--input", inputs["chain3"], "--out", str(out)] + FAST_PO,
                        capsys)
    assert code == 0
    assert json.loads(text)["stage_sizes"][0] == 2 * 3 + 5
    names = {p.name for p in out.iterdir()}
    assert {"manifest.json", "stage_0.json", "stage_1.json", "stage_0.dot", "stage_1.dot"} <= names
    stage = json.loads((out / "stage_1.json").read_text())
    assert stage["phi"] and stage["structure"]["provenance"]
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 0 and json.loads(text)["ok"]


def test_z_window_one_rejected(tmp_path, inputs, capsys):
    code, _, err = run(["build", "--construction", "po", "--input", inputs["chain3"], "--out", str(tmp_path / "x"),
                        "--z-window", "1"], capsys)
    assert code == 2 and "z-window" in err


@pytest.mark.parametrize("argv", [[], ["build"], ["frobnicate"], ["verify"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_bad_input_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "poset", "vertices": [0, 1], "relations": [[0, 1, "lt"], [1, 0, "lt"]]}))
    code, _, err = run(["build", "--construction", "po", "--input", str(bad), "--out", str(tmp_path / "x")], capsys)
    assert code == 2 and "antisymmetry" in err
    code, _, _ = run(["build", "--construction", "po", "--input", str(tmp_path / "nope.json"),
                      "--out", str(tmp_path / "x")], capsys)
    assert code == 2


def test_semigeneric_build_verify_and_parity_suite(tmp_path, inputs, capsys):
    out = tmp_path / "sg"
    assert run(["build", "--construction", "semigeneric", "--input", inputs["lin2"], "--out", str(out)], capsys)[0] == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["events"]
    code, text, _ = run(["verify", str(out), "--suite", "parity"], capsys)
    rows = json.loads(text)["checks"]
    assert code == 0 and [r["check"] for r in rows] == ["stage0:parity", "stage1:parity", "stage2:parity"]


def test_semigeneric_needs_linear_order(tmp_path, inputs, capsys):
    code, _, _ = run(["build", "--construction", "semigeneric", "--input", inputs["vee"], "--out", str(tmp_path)],
                     capsys)
    assert code == 2


def test_bap_build_verifies(tmp_path, inputs, capsys):
    out = tmp_path / "bap"
    assert run(["build", "--construction", "bap", "--input", inputs["vee"], "--out", str(out)], capsys)[0] == 0
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 0
    checks = {r["check"] for r in json.loads(text)["checks"]}
    assert "stage1:cycle_automorphism" in checks and "fixed_point_recovery" in checks


def test_p3_build_verifies(tmp_path, inputs, capsys):
    out = tmp_path / "p3"
    argv = ["build", "--construction", "p3", "--input", inputs["vee"], "--out", str(out), "--shuffled"] + FAST_PO
    assert run(argv, capsys)[0] == 0
    assert "shuffled" in json.loads((out / "stage_1.json").read_text())
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 0
    assert "monochromatic_orbits" in {r["check"] for r in json.loads(text)["checks"]}


def test_corrupted_stage_names_invariant(tmp_path, inputs, capsys):
    out = tmp_path / "po"
    run(["build", "--construction", "po", "--input", inputs["chain3"], "--out", str(out)] + FAST_PO, capsys)
    f = out / "stage_1.json"
    d = json.loads(f.read_text())
    a, b, _ = d["structure"]["relations"][0]
    d["structure"]["relations"].append([b, a, "lt"])
    f.write_text(json.dumps(d))
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 1
    failed = [r["check"] for r in json.loads(text)["checks"] if not r["ok"]]
    assert "stage1:valid" in failed


def test_corrupted_phi_detected(tmp_path, inputs, capsys):
    out = tmp_path / "sg"
    run(["build", "--construction", "semigeneric", "--input", inputs["lin2"], "--out", str(out), "--stages", "1"],
        capsys)
    f = out / "stage_1.json"
    d = json.loads(f.read_text())
    d["phi"][0][1], d["phi"][1][1] = d["phi"][1][1], d["phi"][0][1]
    f.write_text(json.dumps(d))
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 1


def test_missing_artifacts(tmp_path, capsys):
    assert run(["verify", str(tmp_path / "void")], capsys)[0] == 2


def test_builds_are_deterministic(tmp_path, inputs, capsys):
    for name in ("a", "b"):
        run(["build", "--construction", "semigeneric", "--input", inputs["lin2"], "--out", str(tmp_path / name)],
            capsys)
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_matrix_semigeneric(tmp_path, capsys):
    out = tmp_path / "m.json"
    code, text, _ = run(["matrix", "--construction", "semigeneric", "--n", "2", "--stages", "1",
                         "--max-params", "1", "--out", str(out), "--seed", "5"], capsys)
    assert code == 0 and "agreement=True" in text
    rep = json.loads(out.read_text())
    assert rep["seed"] == 5 and rep["agreement"]
    again = tmp_path / "m2.json"
    run(["matrix", "--construction", "semigeneric", "--n", "2", "--stages", "1", "--max-params", "1",
         "--out", str(again), "--seed", "5"], capsys)
    assert out.read_bytes() == again.read_bytes()


def test_matrix_po(tmp_path, capsys):
    out = tmp_path / "m.json"
    code, _, _ = run(["matrix", "--construction", "po", "--n", "1", "--out", str(out), "--table",
                      str(tmp_path / "t.txt")] + FAST_PO, capsys)
    assert code == 0
    assert (tmp_path / "t.txt").read_text().startswith("po matrix")


def test_export(tmp_path, inputs, capsys):
    out = tmp_path / "sg"
    run(["build", "--construction", "semigeneric", "--input", inputs["lin2"], "--out", str(out), "--stages", "1"],
        capsys)
    code, text, _ = run(["export", str(out), "--stage", "1"], capsys)
    assert code == 0 and text.startswith("digraph stage_1")
    code, text, _ = run(["export", str(out), "--stage", "0", "--format", "json"], capsys)
    assert json.loads(text)["stage"] == 0
    assert run(["export", str(out), "--stage", "9"], capsys)[0] == 2
