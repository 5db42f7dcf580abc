import json
import os
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest
from hypothesis import given, strategies as st

from padic_automata.automaton import adding_machine
from padic_automata.cli import main
from padic_automata.config import JOBS_ENV, RunConfig, load_config, parse_config_text
from padic_automata.plot import read_pgm


def schema(name):
    return json.loads(resources.files("padic_automata").joinpath("schemas", name + ".json").read_text())


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_example(capsys):
    code, out, _ = cli(capsys, "eval", "--p", "2", "--expr", "2*x^2+3*x+1", "--x", "2", "--k", "3")
    assert code == 0 and out.strip() == str((2 * 4 + 3 * 2 + 1) % 8) == "7"


def test_eval_padic_literal_and_check(capsys):
    code, out, _ = cli(capsys, "eval", "--expr", "x+1", "--x", "2:4:0111", "--k", "4", "--check",
                       "--trials", "100")
    lines = out.split()
    assert code == 0 and lines[0] == "8" and "ConsistentUpTo" in out


def test_levels_example(capsys):
    code, out, err = cli(capsys, "transit", "levels", "--p", "2", "--expr", "x+1", "--max-n", "12")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 12
    assert all(line.split("\t")[1] == "Transitive" for line in lines)
    assert "WordTransitiveUpTo(12)" in err


def test_input_errors_exit_1(capsys, tmp_path):
    code, _, err = cli(capsys, "eval", "--expr", "2*x^^2", "--x", "1")
    assert code == 1 and "position 4" in err and len(err.strip().splitlines()) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, _, err = cli(capsys, "automaton", "run", "--machine", str(bad), "--word", "01")
    assert code == 1 and "malformed" in err
    code, _, _ = cli(capsys, "eval", "--p", "4", "--expr", "x", "--x", "1")
    assert code == 1


def test_guard_exit_2(capsys):
    code, _, err = cli(capsys, "plot", "--expr", "x", "--k", "30", "--m", "4")
    assert code == 2 and "--stream" in err
    code, _, _ = cli(capsys, "transit", "complete", "--expr", "2*x^2+3*x+1", "--n", "9")
    assert code == 2


def test_automaton_run_and_dot(capsys, tmp_path):
    m = tmp_path / "add.json"
    m.write_text(json.dumps(adding_machine().to_json()))
    code, out, _ = cli(capsys, "automaton", "run", "--machine", str(m), "--word", "0101")
    assert code == 0 and out.strip() == "0110"
    code, out, _ = cli(capsys, "automaton", "run", "--expr", "2*x^2+3*x+1", "--word", "010")
    assert out.strip() == "111"
    code, out, _ = cli(capsys, "automaton", "dot", "--expr", "x+1", "--depth", "3")
    assert code == 0 and out.startswith("digraph") and out.count("->") == 14
    code, _, err = cli(capsys, "automaton", "dot", "--expr", "x+1")
    assert code == 1 and "--depth" in err


def test_json_reports_validate(capsys, tmp_path):
    cases = [
        (["transit", "levels", "--expr", "2*x^2+3*x+1", "--max-n", "6", "--json"], "transit-levels"),
        (["transit", "complete", "--expr", "2*x^2+3*x+1", "--n", "2", "--lmax", "16", "--json"],
         "transit-pairs"),
        (["transit", "absolute", "--expr", "1+x+(x^2|5)", "--n", "1", "--xlen", "1", "--json"],
         "transit-pairs"),
        (["transit", "certify", "--expr", "3*x+3^x", "--bound", "256", "--json"], "certificate"),
        (["measure", "--expr", "x+1", "--ks", "8,10", "--m", "4", "--json"], "measure"),
        (["mirror", "--expr", "2*x^2+3*x+1", "--k", "10", "--m", "4", "--json"], "mirror"),
    ]
    for argv, name in cases:
        code, out, _ = cli(capsys, *argv)
        assert code == 0, argv
        jsonschema.validate(json.loads(out), schema(name))
    m = tmp_path / "add.json"
    m.write_text(json.dumps(adding_machine().to_json()))
    code, out, _ = cli(capsys, "transit", "complete", "--machine", str(m), "--n", "2", "--json")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("transit-pairs"))
    assert rep["verdict"] == "Refuted" and rep["refuted"] == ["00", "10"]


def test_witnesses_in_json_recheck(capsys):
    code, out, _ = cli(capsys, "transit", "complete", "--expr", "2*x^2+3*x+1", "--n", "2", "--json")
    rep = json.loads(out)
    assert rep["verdict"] == "WitnessedAllPairs" and len(rep["witnesses"]) == 16
    for w in rep["witnesses"]:
        # revalidate from the printed strings alone: w o y is w's bits followed by y's
        bits = w["w"] + w["y"]
        v, n = int(bits, 2), len(bits)
        out_bits = format((2 * v * v + 3 * v + 1) % 2 ** n, f"0{n}b")
        assert out_bits[:2] == w["w_prime"]


def test_plot_outputs(capsys, tmp_path):
    outs = [tmp_path / f"g.{ext}" for ext in ("pgm", "csv", "json", "png")]
    argv = ["plot", "--expr", "x+1", "--k", "12", "--m", "6"]
    for o in outs:
        argv += ["--out", str(o)]
    code, out, _ = cli(capsys, *argv)
    assert code == 0 and "occupied 128/4096" in out
    img = read_pgm(outs[0].read_bytes())
    assert img.shape == (64, 64) and (img == 0).sum() == 128
    assert outs[1].read_text().splitlines()[0] == "i,j"
    stats = json.loads(outs[2].read_text())
    jsonschema.validate(stats, schema("plot-grid"))
    assert outs[3].read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_default_m(capsys):
    code, out, _ = cli(capsys, "plot", "--expr", "x", "--k", "12")
    assert json.loads(out)["m"] == 10


def test_measure_text_and_figure(capsys, tmp_path):
    fig = tmp_path / "trend.png"
    code, out, _ = cli(capsys, "measure", "--expr", "2*x^2+3*x+1", "--ks", "12,16,20", "--m", "6",
                       "--figure", str(fig))
    assert code == 0 and "Measure1Candidate" in out and fig.exists()


def test_consts_and_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# lacunary\nexpr = x+(x^2|c)\nconsts = c=-131065\nk = 20\n")
    code, out, _ = cli(capsys, "eval", "--config", str(cfg), "--x", "0")
    assert code == 0 and out.strip() == str((-131065) % 2 ** 20)
    code, out, _ = cli(capsys, "eval", "--config", str(cfg), "--x", "0", "--const", "c=5", "--k", "3")
    assert out.strip() == "5"
    jcfg = tmp_path / "run.json"
    jcfg.write_text(json.dumps({"expr": "x+1", "max_n": 4}))
    code, out, _ = cli(capsys, "transit", "levels", "--config", str(jcfg))
    assert len(out.splitlines()) == 4
    jcfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = cli(capsys, "transit", "levels", "--config", str(jcfg))
    assert code == 1 and "bogus" in err


def test_jobs_env(monkeypatch):
    monkeypatch.setenv(JOBS_ENV, "3")
    assert RunConfig().jobs == 3
    monkeypatch.setenv(JOBS_ENV, "nonsense")
    assert RunConfig().jobs == 1


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(p=3, expr="x^2+1", consts={"c": -7}, m=4, ks=[8, 10], out="o.pgm", seed=9, jobs=2)
    jsonschema.validate(json.loads(cfg.to_json()), schema("config"))
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert load_config(path) == cfg
    kv = "\n".join(f"{k} = {v}" for k, v in [("p", 3), ("expr", "x^2+1"), ("consts", "c=-7"),
                                              ("m", 4), ("ks", "8,10"), ("out", "o.pgm"),
                                              ("seed", 9), ("jobs", 2)])
    assert parse_config_text(kv) == cfg
    with pytest.raises(ValueError):
        parse_config_text("k 5")


@given(st.builds(RunConfig, p=st.sampled_from([2, 3, 5]), expr=st.one_of(st.none(), st.text(max_size=20)),
                 consts=st.dictionaries(st.from_regex(r"[a-z]{1,4}", fullmatch=True), st.integers()),
                 k=st.integers(1, 40), m=st.one_of(st.none(), st.integers(0, 12)),
                 ks=st.lists(st.integers(1, 30), max_size=4), seed=st.integers(0, 2 ** 31),
                 jobs=st.integers(1, 16)))
def test_config_json_round_trip_property(cfg):
    assert parse_config_text(cfg.to_json()) == cfg


def test_repro_figures(capsys, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli(capsys, "repro", "figures", "--out", str(out1))[0] == 0
    assert cli(capsys, "repro", "figures", "--out", str(out2), "--jobs", "3")[0] == 0
    names = sorted(os.listdir(out1))
    assert [f"fig{i}.pgm" for i in range(1, 9)] == sorted(n for n in names if n.endswith(".pgm"))
    expected = [("2*x^2+3*x+1", k) for k in (16, 18, 20, 23)] + \
               [("x+(x^2|-131065)", k) for k in (16, 17, 18, 22)]
    for i, (expr, k) in enumerate(expected, 1):
        meta = json.loads((out1 / f"fig{i}.json").read_text())
        jsonschema.validate(meta, schema("plot-grid"))
        assert (meta["expr"], meta["k"], meta["m"]) == (expr, k, min(k, 10))
    # identical inputs give byte-identical artifacts, independent of --jobs
    for n in names:
        assert (out1 / n).read_bytes() == (out2 / n).read_bytes(), n


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "padic_automata.cli", "eval", "--expr", "x+1",
                          "--x", "7", "--k", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0"
