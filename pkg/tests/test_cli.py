"""End-to-end command line runs against temp directories."""

from __future__ import annotations

import json
import warnings

import pytest

from uglab import cli, formats
from uglab.errors import StrategyViolationError
from uglab.gf2 import Gf2Vector
from uglab.instances import CspType, GroupUgInstance, WeightedCspInstance, evaluate
from uglab.sdp import parse_sdpa


def run(*argv):
    return cli.main([str(a) for a in argv])


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_params_prints_reference_line(capsys):
    assert run("params", "--alpha", "1", "--gamma", "0.25", "--epsilon", "1/4") == 0
    out = capsys.readouterr().out
    assert "d=145 ell=11 m=14 r=12 q=16384" in out


def test_params_json_output(tmp_path):
    out = tmp_path / "p.json"
    assert run("params", "--alpha", "1", "--out", out, "--no-timestamp") == 0
    data = load(out)
    assert data["d"] == 145 and data["q"] == 16384 and data["alpha"] == "1"
    assert "generated" not in data


def test_unsat_families_end_to_end(tmp_path):
    u5 = tmp_path / "u5.gug"
    r5 = tmp_path / "r5.json"
    assert run("gen", "unsat", "--delta", "0.5", "--out", u5) == 0
    assert run("solve", "tree", "--in", u5, "--out", r5, "--no-timestamp") == 0
    data = load(r5)
    assert data["value"] == "2/5" and data["count"] == 4 and data["total"] == 10
    # emitted file re-parses to a structurally equal instance
    text = u5.read_text()
    inst = formats.parse_gug(text)
    assert formats.write_gug(inst) == text

    u4 = tmp_path / "u4.gug"
    r4 = tmp_path / "r4.json"
    assert run("gen", "unsat", "--delta", "2/3", "--out", u4) == 0
    assert run("solve", "brute", "--in", u4, "--out", r4, "--no-timestamp") == 0
    assert load(r4)["value"] == "1/2"


def test_solve_vacuous_flag(tmp_path):
    path = tmp_path / "empty.gug"
    formats.atomic_write_text(str(path), formats.write_gug(GroupUgInstance(1, ["a", "b"], [])))
    out = tmp_path / "r.json"
    assert run("solve", "brute", "--in", path, "--out", out, "--no-timestamp") == 0
    data = load(out)
    assert data["vacuous"] is True and data["value"] == "1" and data["count"] == 0


def test_witness_file_checks_out(tmp_path):
    u4 = tmp_path / "u4.gug"
    wout = tmp_path / "w.assign"
    run("gen", "unsat", "--delta", "2/3", "--out", u4)
    assert run("solve", "brute", "--in", u4, "--witness-out", wout) == 0
    inst = formats.parse_gug(u4.read_text())
    witness = formats.parse_assignment(wout.read_text(), inst)
    count, frac = evaluate(inst, witness)
    assert (count, str(frac)) == (3, "1/2")


def test_lift_preserves_value(tmp_path):
    one = Gf2Vector.from_hex("1", 1)
    base = GroupUgInstance(1, ["a", "b"], [("a", "b", [one])])
    upath = tmp_path / "u.gug"
    formats.atomic_write_text(str(upath), formats.write_gug(base))
    lifted = tmp_path / "lifted.gug"
    assert run("lift", "--in", upath, "--out", lifted) == 0
    li = formats.parse_gug(lifted.read_text())
    assert len(li.vertices) == 4
    r1 = tmp_path / "r1.json"
    r2 = tmp_path / "r2.json"
    run("solve", "brute", "--in", upath, "--out", r1, "--no-timestamp")
    run("solve", "brute", "--in", lifted, "--out", r2, "--no-timestamp")
    assert load(r1)["value"] == load(r2)["value"] == "1"


def test_klein_pair_games(tmp_path):
    pdir = tmp_path / "klein"
    assert run("gen", "klein", "--out-dir", pdir, "--no-timestamp") == 0
    tr = tmp_path / "t.json"
    assert run(
        "game", "--pair", pdir / "pair.json", "--duplicator", "cops", "--k", 3,
        "--rounds", 60, "--seed", 2, "--out", tr, "--no-timestamp",
    ) == 0
    data = load(tr)
    assert data["winner"] is None and data["survived"] == 60
    assert data["seed"] == 2 and data["duplicator"] == "cops"

    assert run(
        "game", "--pair", pdir / "pair.json", "--duplicator", "identity", "--k", 3,
        "--rounds", 60, "--seed", 2, "--out", tr, "--no-timestamp",
    ) == 0
    assert load(tr)["winner"] == "spoiler"


def test_random_pair_tree_game(tmp_path):
    pdir = tmp_path / "pair"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # desk parameters sit below the girth bound
        assert run("gen", "random-pair", "--out-dir", pdir, "--seed", 4, "--no-timestamp") == 0
    sc = load(pdir / "pair.json")
    assert sc["kind"] == "tree" and sc["girth_ok"] is False and sc["seed"] == 4
    tr = tmp_path / "t.json"
    assert run(
        "game", "--pair", pdir / "pair.json", "--duplicator", "tree", "--k", 2,
        "--rounds", 30, "--seed", 3, "--out", tr, "--no-timestamp",
    ) == 0
    assert load(tr)["winner"] is None
    rt = tmp_path / "rt.json"
    assert run("solve", "tree", "--in", pdir / "u1.gug", "--out", rt, "--no-timestamp") == 0
    assert load(rt)["value"] == "1/4"


def test_byte_identical_reruns(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert run("gen", "klein", "--out-dir", d, "--no-timestamp") == 0
    assert (d1 / "pair.json").read_bytes() == (d2 / "pair.json").read_bytes()
    assert (d1 / "u1.gug").read_bytes() == (d2 / "u1.gug").read_bytes()

    g = tmp_path / "c3.graph"
    run("gen", "cops-graph", "--k", 3, "--out", g)
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    for m in (m1, m2):
        assert run("sdp", "maxcut", "--graph", g, "--out", m, "--seed", 7, "--no-timestamp") == 0
    assert m1.read_bytes() == m2.read_bytes()


def test_sdp_maxcut_cli(tmp_path):
    g = tmp_path / "c3.graph"
    run("gen", "cops-graph", "--k", 3, "--out", g)
    out = tmp_path / "mc.json"
    dats = tmp_path / "mc.dats"
    assert run(
        "sdp", "maxcut", "--graph", g, "--out", out, "--sdpa", dats,
        "--round", 400, "--no-timestamp",
    ) == 0
    data = load(out)
    assert data["value"] == pytest.approx(18.0, abs=1e-4)  # bipartite, unit weights
    assert data["residual"] <= 1e-6
    assert data["round_mean"] == pytest.approx(18.0, abs=1e-9)
    assert data["seed"] == 0
    back = parse_sdpa(dats.read_text())
    assert back.n == 12 and len(back.constraints) == 12


def write_family(tmp_path):
    xor = CspType(2, [(0, 1), (1, 0)], 2)
    anb = CspType(2, [(1, 1)], 2)
    fam = tmp_path / "fam"
    fam.mkdir()
    rows = [
        [("xor", ("a", "b"), 1), ("xor", ("b", "c"), 1)],
        [("and", ("a", "b"), 2), ("xor", ("a", "b"), 1)],
    ]
    for i, apps in enumerate(rows):
        inst = WeightedCspInstance(2, ["a", "b", "c"], {"xor": xor, "and": anb}, apps)
        formats.atomic_write_text(str(fam / f"f{i}.csp"), formats.write_csp(inst))
    return fam


def test_sdp_lc_and_gap_cli(tmp_path):
    fam = write_family(tmp_path)
    out = tmp_path / "lc.json"
    dats = tmp_path / "lc.dats"
    assert run("sdp", "lc", "--csp", fam / "f0.csp", "--out", out, "--sdpa", dats, "--no-timestamp") == 0
    data = load(out)
    assert data["value"] == pytest.approx(1.0, abs=1e-4)
    assert data["scale"] == 2.0
    assert parse_sdpa(dats.read_text()).n == 14

    gap = tmp_path / "gap.json"
    assert run(
        "sdp", "gap", "--family", fam, "--eta", "0.1", "--grid", "0.1,0.9,1.2",
        "--out", gap, "--no-timestamp",
    ) == 0
    gdata = load(gap)
    assert gdata["files"] == ["f0.csp", "f1.csp"]
    assert gdata["samples"][0][1] is None  # below every point
    assert gdata["samples"][1][1] == pytest.approx(2 / 3 - 0.1, abs=1e-4)
    assert gdata["samples"][2][1] == pytest.approx(1.0 - 0.1, abs=1e-4)
    sdps = [p[0] for p in gdata["points"]]
    assert sdps == sorted(sdps)


def test_report_aggregates(tmp_path):
    run("gen", "klein", "--out-dir", tmp_path / "k", "--no-timestamp")
    (tmp_path / "junk.json").write_text("{not json")
    out = tmp_path / "report.json"
    assert run("report", "--dir", tmp_path, "--out", out, "--no-timestamp") == 0
    data = load(out)
    assert data["count"] == 2
    assert "unreadable" in data["runs"]["junk.json"]
    assert data["runs"]["k/pair.json"]["kind"] == "klein"


def test_exit_codes(tmp_path, capsys, monkeypatch):
    assert run("nosuch") == 1
    assert run("gen", "unsat", "--delta", "notanumber", "--out", tmp_path / "x.gug") == 1
    assert run("--help") == 0
    capsys.readouterr()
    assert run("solve", "brute", "--in", tmp_path / "missing.gug", "--out", tmp_path / "x.json") == 2
    assert run("gen", "unsat", "--delta", "1/8", "--out", tmp_path / "x.gug") == 2
    capsys.readouterr()

    pdir = tmp_path / "klein"
    run("gen", "klein", "--out-dir", pdir, "--no-timestamp")

    def boom(*a, **kw):
        raise StrategyViolationError("synthetic break")

    monkeypatch.setattr(cli, "play_game", boom)
    code = run("game", "--pair", pdir / "pair.json", "--duplicator", "cops", "--k", 3)
    assert code == 3
    assert "strategy violation" in capsys.readouterr().err
