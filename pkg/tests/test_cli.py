import json

import numpy as np
import pytest
from click.testing import CliRunner

from rdcn.cli import main
from rdcn.matrix import is_doubly_stochastic, load_csv


@pytest.fixture
def cli(tmp_path):
    runner = CliRunner()

    def call(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
    call.dir = tmp_path
    return call


def test_gen_families(cli):
    d = cli.dir
    assert cli("gen", "--family", "mvu", "--n", 64, "--v", 8, "--u", 0.2,
               "--out", d / "a.csv").exit_code == 0
    assert is_doubly_stochastic(load_csv(d / "a.csv"))
    assert cli("gen", "--family", "tm", "--n", 64, "--flows", 256, "--tl", 0.2, "--cl", 0.7,
               "--seed", 1, "--out", d / "b.csv").exit_code == 0
    assert is_doubly_stochastic(load_csv(d / "b.csv"), 1e-6)
    res = cli("gen", "--family", "perm", "--n", 5)
    M = np.array([[float(x) for x in line.split(",")] for line in res.output.splitlines()])
    assert M.shape == (5, 5) and M.sum() == 5


def test_bad_input_exit_code(cli):
    assert cli("gen", "--family", "mv", "--n", 5, "--v", 9).exit_code == 2
    (cli.dir / "bad.csv").write_text("0,1\n0,0\n")
    assert cli("schedule", "bvn-direct", cli.dir / "bad.csv").exit_code == 2
    assert cli("schedule", "bogus", cli.dir / "bad.csv").exit_code == 2


def test_schedule_and_verify(cli):
    d = cli.dir
    cli("gen", "--family", "mv", "--n", 64, "--v", 40, "--out", d / "m.csv")
    res = cli("schedule", "comp-pivot", d / "m.csv", "--rb", 0.015, "--json",
              "--out", d / "s.json")
    assert res.exit_code == 0
    rep = json.loads(res.output)
    assert rep["dct"] <= 1.6 + 1e-3 and rep["feasible"] and rep["complete"]
    res = cli("verify", d / "m.csv", d / "s.json", "--json")
    assert res.exit_code == 0 and json.loads(res.output)["result"] == "pass"

    cli("gen", "--family", "perm", "--n", 16, "--out", d / "p.csv")
    rep = json.loads(cli("schedule", "bvn-direct", d / "p.csv", "--rb", 0.02, "--json").output)
    assert rep["dct"] == pytest.approx(1.02)
    rep = json.loads(cli("schedule", "rr-mulp", d / "m.csv", "--json").output)
    assert rep["dct"] == pytest.approx(1.96875)


def test_verify_detects_tampering(cli):
    d = cli.dir
    cli("gen", "--family", "perm", "--n", 6, "--out", d / "p.csv")
    cli("schedule", "rr-oneperm", d / "p.csv", "--out", d / "s.json")
    obj = json.loads((d / "s.json").read_text())
    # move one second hop into the first slot
    rec = obj["traffic"]["h2"][-1].pop()
    obj["traffic"]["h2"][0].append(rec)
    (d / "t.json").write_text(json.dumps(obj))
    res = cli("verify", d / "p.csv", d / "t.json", "--json")
    assert res.exit_code == 1
    assert json.loads(res.output)["result"] == "fail"


def test_fixture_verifies(cli):
    d = cli.dir
    assert cli("fixture", "--out-dir", d).exit_code == 0
    res = cli("verify", d / "ring5.csv", d / "ring5_schedule.json", "--json")
    rep = json.loads(res.output)
    assert res.exit_code == 0 and rep["dct"] == pytest.approx(4 / 3, abs=1e-12)


def test_bounds(cli):
    rep = json.loads(cli("bounds", "--n", 64, "--rb", 0.015, "--json").output)
    assert rep["bvn_dct"] == pytest.approx(1.945)
    assert rep["comp_dct"] == pytest.approx(1.59316, abs=1e-5)


def test_sweep_is_deterministic(cli):
    d = cli.dir
    args = ("sweep", "cl-sparse", "--n", 8, "--repeats", 2)
    cli(*args, "--out", d / "a.csv")
    cli(*args, "--out", d / "b.csv")
    a, b = (d / "a.csv").read_bytes(), (d / "b.csv").read_bytes()
    assert a == b and b"\r" not in a
    lines = a.decode().splitlines()
    assert lines[0].startswith("x,system,dct_mean,dct_std,throughput_mean")
    assert len(lines) == 1 + 9 * 3
    assert cli("sweep", "nope").exit_code == 2


@pytest.mark.parametrize("n", [4, 8, 16, 64])
def test_round_trip_smoke(cli, n):
    d = cli.dir
    fams = [("mv", "--v", max(1, n // 4)), ("mvu", "--v", 2, "--u", 0.3), ("tm", "--flows", 32),
            ("perm",), ("uniform",)]
    for fam in fams:
        path = d / f"{fam[0]}.csv"
        assert cli("gen", "--family", *fam, "--n", n, "--out", path).exit_code == 0
        for system in ("bvn-direct", "rr-direct", "rr-oneperm", "rr-mulp", "rr-upper",
                       "comp-pivot", "comp-pivot-plus"):
            if system == "rr-oneperm" and fam[0] != "perm":
                continue
            if system in ("rr-direct", "rr-mulp") and n == 64 and fam[0] == "tm":
                continue
            sched = d / f"{fam[0]}-{system}.json"
            res = cli("schedule", system, path, "--rb", 0.01, "--out", sched)
            assert res.exit_code == 0, (fam, system, res.output)
            assert cli("verify", path, sched).exit_code == 0
