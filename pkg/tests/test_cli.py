import json
import math

import numpy as np
import pytest

from graphnce import ValidationError
from graphnce.cli import OUTPUT_ENV, main
from graphnce.config import PRESETS, config_hash, parse_config, preset

FILES = {"trajectory.csv", "metadata.json", "diagnostics.json", "manifest.json"}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_two_node_upwind_preset(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--preset", "two_node_upwind", "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == FILES
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["alpha"] == 0.5 and meta["tau"] == 0.5 and meta["windows"] == 2
    assert all(w["iterations"] >= 1 for w in meta["per_window"])
    rows = (out / "trajectory.csv").read_text().splitlines()
    t, r0, r1 = (float(x) for x in rows[-1].split(","))
    assert t == 1.0 and abs(r0 - 2 * math.exp(-0.5)) <= 1e-6
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == config_hash(preset("two_node_upwind"))
    assert {"graphnce", "numpy", "scipy", "python"} <= set(manifest["versions"])
    assert manifest["wall_time_seconds"] > 0


def test_arithmetic_T5_hard_fails(tmp_path, capsys):
    code = main(["run", "--preset", "two_node_arithmetic_T5", "--out", str(tmp_path)])
    assert code == 4
    assert "positivity" in capsys.readouterr().err
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diag["hard_failures"] == ["positivity"]
    assert diag["min_density"] == pytest.approx(-0.5, abs=1e-12)


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "malformed" in capsys.readouterr().err


def test_unknown_preset_lists_names(tmp_path, capsys):
    assert main(["run", "--preset", "nope", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert all(name in err for name in PRESETS)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("graph"),
        lambda d: d.update(interpolation={"kind": "harmonic"}),
        lambda d: d.update(velocity={"kind": "static", "pairs": [[0, 5, 1.0]]}),
        lambda d: d.update(initial={"values": [1.0]}),
        lambda d: d["solver"].update(window_safety=2.0),
        lambda d: d.update(interpolation={"kind": "custom"}),
    ],
)
def test_invalid_configs_exit_2(tmp_path, mutate):
    doc = preset("two_node_upwind")
    mutate(doc)
    assert main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2


def test_convergence_failure_exit_3(tmp_path):
    doc = preset("two_node_upwind")
    doc["solver"]["picard_max_iterations"] = 2
    assert main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 3


def test_csv_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = write(tmp_path, preset("nl2ie_cloud50"))
    assert main(["run", cfg, "--out", str(a)]) == 0
    assert main(["run", cfg, "--out", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_csv_shortest_roundtrip(tmp_path):
    assert main(["run", "--preset", "two_node_upwind", "--out", str(tmp_path)]) == 0
    for line in (tmp_path / "trajectory.csv").read_text().splitlines()[1:]:
        for field in line.split(","):
            assert repr(float(field)) == field


def test_hash_tracks_semantic_fields():
    base = preset("two_node_upwind")
    h = config_hash(base)
    moved = dict(base, output_dir="/somewhere/else")
    assert config_hash(moved) == h
    for change in (
        lambda d: d["solver"].update(substeps_per_window=32),
        lambda d: d["initial"].update(values=[2.0, 1e-9]),
        lambda d: d.update(interpolation={"kind": "min_mean"}),
        lambda d: d["graph"]["eta"]["params"].update(c=2.0),
        lambda d: d.update(seed=1),
    ):
        doc = json.loads(json.dumps(base))
        change(doc)
        assert config_hash(doc) != h


def test_output_dir_precedence(tmp_path, monkeypatch):
    doc = preset("two_node_upwind")
    doc["output_dir"] = str(tmp_path / "from_config")
    cfg = write(tmp_path, doc)
    assert main(["run", cfg]) == 0
    assert (tmp_path / "from_config" / "manifest.json").exists()
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "from_env"))
    assert main(["run", cfg]) == 0
    assert (tmp_path / "from_env" / "manifest.json").exists()
    assert main(["run", cfg, "--out", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "manifest.json").exists()


def test_substeps_and_seed_overrides(tmp_path):
    assert main(["run", "--preset", "two_node_upwind", "--substeps", "16", "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["substeps"] == 16
    assert main(["run", "--preset", "nl2ie_cloud50", "--seed", "3", "--out", str(tmp_path / "s3")]) == 0
    assert main(["run", "--preset", "nl2ie_cloud50", "--seed", "4", "--out", str(tmp_path / "s4")]) == 0
    a = json.loads((tmp_path / "s3" / "metadata.json").read_text())["graph"]["fingerprint"]
    b = json.loads((tmp_path / "s4" / "metadata.json").read_text())["graph"]["fingerprint"]
    assert a != b


def test_graph_file_source(tmp_path):
    from graphnce.graph_core import save_graph

    g = parse_config(preset("two_node_upwind")).graph
    save_graph(g, tmp_path / "graph.json")
    doc = preset("two_node_upwind")
    doc["graph"] = {"file": "graph.json"}
    assert main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 0


def test_preset_contents():
    cfg = parse_config(preset("two_node_upwind"))
    assert cfg.graph.masses.tolist() == [0.5, 0.5] and cfg.graph.weights.tolist() == [1.0]
    assert cfg.velocity.field.forward.tolist() == [1.0]
    assert cfg.rho0.tolist() == [2.0, 0.0] and cfg.solver.horizon == 1.0
    cloud = parse_config(preset("nl2ie_cloud50"))
    assert cloud.graph.n == 50 and cloud.graph.d == 2
    assert np.all((cloud.graph.points >= 0) & (cloud.graph.points <= 1))
    assert cloud.velocity.kind == "nl2ie" and cloud.velocity.kernel.kind == "quadratic"
    assert cloud.graph.eta.kind == "gaussian" and cloud.interpolation.is_upwind
    assert parse_config(preset("nl2ie_cloud50")).graph.fingerprint() == cloud.graph.fingerprint()


def test_positivity_hard_only_under_upwind():
    assert parse_config(preset("two_node_upwind")).diagnostics.hard["positivity"] is True
    doc = preset("two_node_upwind")
    doc["interpolation"] = {"kind": "min_mean"}
    assert parse_config(doc).diagnostics.hard["positivity"] is False


def test_stationary_preset(tmp_path):
    assert main(["run", "--preset", "stationary_nl2ie_2node", "--out", str(tmp_path)]) == 0
    rows = [[float(x) for x in line.split(",")] for line in (tmp_path / "trajectory.csv").read_text().splitlines()[1:]]
    assert all(r[1:] == [2.0, 0.0] for r in rows)


def test_presets_command(capsys):
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == list(PRESETS)


def test_parse_rejects_non_object():
    with pytest.raises(ValidationError):
        parse_config([1, 2, 3])
