import io
import json

import pytest

from hyperlim.cli import main
from hyperlim.hypergraph import Hypergraph
from hyperlim.hyperpartition import CombinatorialStructure, Hyperpartition
from hyperlim.hypergraphon import builtin_w
from hyperlim.metrics import d1


TRI = {"k": 2, "n": 3, "edges": [[0, 1], [0, 2], [1, 2]]}
EDGE = {"k": 2, "n": 2, "edges": [[0, 1]]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, obj in [("tri", TRI), ("k3", TRI), ("edge", EDGE)]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        paths[name] = str(p)
    paths["dir"] = str(tmp_path)
    return paths


def test_density_hypergraph_host(files, capsys):
    assert main(["density", "--F", files["tri"], "--H", files["k3"]]) == 0
    assert capsys.readouterr().out.strip() == "2/9"


def test_density_from_piped_builtin(files, capsys, monkeypatch):
    assert main(["builtin-w", "--kind", "example1", "--k", "2"]) == 0
    wjson = capsys.readouterr().out
    monkeypatch.setattr("sys.stdin", io.StringIO(wjson))
    assert main(["density", "--F", files["edge"], "--exact"]) == 0
    assert capsys.readouterr().out.strip() == "1/2"


def test_density_montecarlo_prints_estimate(files, capsys):
    rc = main(
        ["density", "--F", files["edge"], "--W", files_w(files), "--mode", "montecarlo",
         "--samples", "4000", "--seed", "3"]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "+-" in out
    est = float(out.split("+-")[0])
    assert abs(est - 0.5) < 0.05


def files_w(files):
    p = files["dir"] + "/w1.json"
    with open(p, "w") as fh:
        json.dump(builtin_w("example1", 2).to_obj(), fh)
    return p


def test_structure_density_frozen(files, capsys):
    C = CombinatorialStructure.from_top_labels(2, 2, {2})
    cpath = files["dir"] + "/c.json"
    with open(cpath, "w") as fh:
        json.dump(C.to_obj(), fh)
    assert main(["structure-density", "--F", files["tri"], "--C", cpath]) == 0
    assert capsys.readouterr().out.strip() == "1/8"


def test_validate_asymmetric_structure_exits_2(files, capsys):
    bad = files["dir"] + "/bad.json"
    with open(bad, "w") as fh:
        json.dump({"k": 2, "l": 2, "cells": [{"1": 1, "2": 2, "3": 1}]}, fh)
    rc = main(["validate", "--structure", bad])
    assert rc == 2
    err = capsys.readouterr().err
    assert "not S_k-closed" in err


def test_validate_good_inputs(files, capsys):
    good = files["dir"] + "/good.json"
    with open(good, "w") as fh:
        json.dump(
            {"k": 2, "l": 2, "cells": [{"1": 1, "2": 2, "3": 1}, {"1": 2, "2": 1, "3": 1}]},
            fh,
        )
    assert main(["validate", "--structure", good, "--H", files["tri"]]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_malformed_json_exits_2_naming_file(files, capsys):
    bad = files["dir"] + "/broken.json"
    with open(bad, "w") as fh:
        fh.write("{nope")
    rc = main(["density", "--F", bad, "--H", files["k3"]])
    assert rc == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_unknown_flag_exits_2(files):
    with pytest.raises(SystemExit) as exc:
        main(["density", "--F", files["tri"], "--bogus"])
    assert exc.value.code == 2


def test_missing_required_input_exits_2(files, capsys):
    rc = main(["distance", "--metric", "d1", "--U", files_w(files)])
    assert rc == 2
    assert "W:" in capsys.readouterr().err


def test_sample_writes_artifact_and_sidecar(files, capsys):
    out = files["dir"] + "/s.json"
    rc = main(["sample", "--W", files_w(files), "--n", "10", "--seed", "7", "--out", out])
    assert rc == 0
    G = Hypergraph.from_obj(json.load(open(out)))
    assert G.n == 10
    meta = json.load(open(files["dir"] + "/s.meta.json"))
    assert meta["seed"] == 7
    assert meta["source"]["kind"] == "step"


def test_sample_auto_seed_goes_to_stderr(files, capsys):
    rc = main(["sample", "--W", files_w(files), "--n", "6"])
    assert rc == 0
    captured = capsys.readouterr()
    assert captured.err.startswith("seed=")
    json.loads(captured.out)


def test_stochastic_replay_byte_identical(files):
    out1 = files["dir"] + "/a.json"
    out2 = files["dir"] + "/b.json"
    for out in (out1, out2):
        assert main(["sample", "--W", files_w(files), "--n", "15", "--seed", "42", "--out", out]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_distance_report_matches_library(files, capsys):
    wpath = files_w(files)
    epath = files["dir"] + "/we.json"
    with open(epath, "w") as fh:
        json.dump(builtin_w("empty", 2).to_obj(), fh)
    assert main(["distance", "--metric", "d1", "--U", wpath, "--W", epath]) == 0
    got = json.loads(capsys.readouterr().out)
    want = d1(builtin_w("example1", 2), builtin_w("empty", 2)).to_obj()
    assert got == json.loads(json.dumps(want))
    assert got["value"] == "1/2"


def test_distance_delta_grid(files, capsys):
    epath = files["dir"] + "/empty3.json"
    with open(epath, "w") as fh:
        json.dump({"k": 2, "n": 3, "edges": []}, fh)
    assert main(["distance", "--metric", "delta", "--H", files["tri"], "--T", epath, "--max-size", "3"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["value"] == "2/3"
    assert got["witness"]["edges"] == [[0, 1]]


def test_regularize_and_closeness_roundtrip(files, capsys, tmp_path):
    import itertools

    hp0 = Hyperpartition.round_robin(12, 2, 2)
    C0 = CombinatorialStructure(2, 2, {(1, 1, 1), (1, 1, 2), (2, 2, 1), (2, 2, 2)})
    from hyperlim.hyperpartition import cells_union

    H = cells_union(hp0, C0)
    hpath = str(tmp_path / "h.json")
    with open(hpath, "w") as fh:
        json.dump(H.to_obj(), fh)
    dpath = str(tmp_path / "dec.json")
    rc = main(["regularize", "--H", hpath, "--l", "2", "--iterations", "20", "--seed", "3", "--out", dpath])
    assert rc == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("eps=") and "delta=" in line
    rep = json.load(open(dpath))
    cpath = str(tmp_path / "c.json")
    ppath = str(tmp_path / "hp.json")
    with open(cpath, "w") as fh:
        json.dump(rep["structure"], fh)
    with open(ppath, "w") as fh:
        json.dump(rep["hp"], fh)
    rc = main(["closeness", "--H", hpath, "--C", cpath, "--HP", ppath, "--seed", "1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("eps=") and rep["eps"] == out.split()[0].split("=")[1]


def test_experiment_artifacts_thread_independent(files, tmp_path, capsys):
    cpath = str(tmp_path / "c.json")
    with open(cpath, "w") as fh:
        json.dump(CombinatorialStructure.from_top_labels(2, 2, {2}).to_obj(), fh)
    outs = []
    for tag, threads in (("t1", "1"), ("t4", "4")):
        od = str(tmp_path / tag)
        rc = main(
            ["experiment", "counting", "--C", cpath, "--F", files["tri"],
             "--n-list", "20,30", "--trials", "4", "--seed", "11",
             "--threads", threads, "--out", od]
        )
        assert rc == 0
        outs.append(od)
    capsys.readouterr()
    for name in ("counting-11.json", "counting-11.csv"):
        a = open(outs[0] + "/" + name, "rb").read()
        b = open(outs[1] + "/" + name, "rb").read()
        assert a == b


def test_experiment_out_dir_env_default(files, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HYPERLIM_OUT", str(tmp_path / "envdir"))
    k4 = str(tmp_path / "k4.json")
    with open(k4, "w") as fh:
        json.dump(Hypergraph.complete(2, 4).to_obj(), fh)
    rc = main(["experiment", "removal", "--H", k4, "--K", files["tri"]])
    assert rc == 0
    out = capsys.readouterr().out
    assert "removal-0.json" in out
    assert (tmp_path / "envdir" / "removal-0.json").exists()


def test_builtin_w_rejects_unknown_kind(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["builtin-w", "--kind", "nope", "--k", "2"])
    assert exc.value.code == 2
