import json

import numpy as np
import pytest

from sigmatch.cli import main, parse_sweep_config, InputError
from sigmatch.graph import erdos_renyi, format_edge_list, parse_edge_list, parse_truth

ASYM6 = "0 1\n1 2\n0 2\n0 3\n1 4\n4 5\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["match", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "default: 0.001" in out and "default: 100" in out


def test_match_writes_report(files, tmp_path, capsys):
    src = files("s.txt", ASYM6)
    out = tmp_path / "r.json"
    csv_path = tmp_path / "r.csv"
    assert main(["match", "--source", src, "--target", src, "--init", "degree",
                 "--out", str(out), "--csv", str(csv_path)]) == 0
    data = json.loads(out.read_text())
    assert len(data["correspondence"]) == 6
    assert data["config"]["iters"] == 100
    assert csv_path.read_text().startswith("source,target,score\n")
    assert "iterations=" in capsys.readouterr().out


def test_match_missing_file(files, capsys):
    src = files("s.txt", ASYM6)
    assert main(["match", "--source", src, "--target", "/nonexistent/t.txt"]) == 2
    assert "/nonexistent/t.txt" in capsys.readouterr().err


def test_match_bad_edge_list(files, capsys):
    src = files("s.txt", ASYM6)
    bad = files("bad.txt", "a b c d\n")
    assert main(["match", "--source", src, "--target", bad]) == 2
    assert "line 1" in capsys.readouterr().err


def test_match_truth_init(files, tmp_path, capsys):
    src = files("s.txt", ASYM6)
    tgt_path, truth_path = tmp_path / "t.txt", tmp_path / "truth.txt"
    assert main(["perturb", "--input", src, "--permute", "--seed", "4",
                 "--out-graph", str(tgt_path), "--out-truth", str(truth_path)]) == 0
    out = tmp_path / "r.json"
    assert main(["match", "--source", src, "--target", str(tgt_path), "--truth", str(truth_path),
                 "--init", "truth", "--out", str(out)]) == 0
    assert "nc=1.000000" in capsys.readouterr().out
    assert json.loads(out.read_text())["nc"] == 1.0


def test_match_truth_init_needs_truth(files):
    src = files("s.txt", ASYM6)
    assert main(["match", "--source", src, "--target", src, "--init", "truth"]) == 2
    assert main(["match", "--source", src, "--target", src, "--init", "bogus"]) == 2
    assert main(["match", "--source", src, "--target", src, "--init", "file:/no/such"]) == 2


def test_perturb_identity_and_noise(files, tmp_path):
    g = erdos_renyi(40, 0.2, seed=1)
    edges = format_edge_list(g).splitlines()[:100]
    src = files("g.txt", "\n".join(edges) + "\n")
    g = parse_edge_list((tmp_path / "g.txt").read_text())
    assert g.num_edges == 100

    out_g, out_t = tmp_path / "o.txt", tmp_path / "ot.txt"
    assert main(["perturb", "--input", src, "--q", "0", "--out-graph", str(out_g),
                 "--out-truth", str(out_t)]) == 0
    assert out_g.read_text() == format_edge_list(g)
    assert all(u == v for u, v in parse_truth(out_t.read_text()))

    assert main(["perturb", "--input", src, "--q", "0.25", "--seed", "3", "--permute",
                 "--out-graph", str(out_g), "--out-truth", str(out_t)]) == 0
    assert parse_edge_list(out_g.read_text()).num_edges == 125
    first = (out_g.read_bytes(), out_t.read_bytes())
    main(["perturb", "--input", src, "--q", "0.25", "--seed", "3", "--permute",
          "--out-graph", str(out_g), "--out-truth", str(out_t)])
    assert (out_g.read_bytes(), out_t.read_bytes()) == first


def test_perturb_rejects_negative_q(files, tmp_path):
    src = files("s.txt", ASYM6)
    assert main(["perturb", "--input", src, "--q", "-0.1", "--out-graph", str(tmp_path / "a"),
                 "--out-truth", str(tmp_path / "b")]) == 2


def test_eval(files, capsys):
    truth = files("truth.txt", "a x\nb y\nc z\n")
    assert main(["eval", "--pred", truth, "--truth", truth]) == 0
    assert capsys.readouterr().out.strip() == "1.000000"
    pred = files("pred.csv", "source,target,score\na,x,0.9\nb,z,0.5\nc,y,0.5\n")
    assert main(["eval", "--pred", pred, "--truth", truth]) == 0
    assert capsys.readouterr().out.strip() == "0.333333"
    empty = files("empty.txt", "")
    assert main(["eval", "--pred", truth, "--truth", empty]) == 2


def test_oracle(files, tmp_path, capsys):
    tri = files("tri.txt", "0 1\n1 2\n0 2\n")
    assert main(["oracle", "--source", tri, "--target", tri]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["objective"] == 0.0 and data["unique"] is False and data["evaluated_count"] == 6

    src = files("s.txt", ASYM6)
    tgt, truth = tmp_path / "t.txt", tmp_path / "truth.txt"
    main(["perturb", "--input", src, "--permute", "--seed", "9", "--out-graph", str(tgt),
          "--out-truth", str(truth)])
    assert main(["oracle", "--source", src, "--target", str(tgt)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["unique"] is True
    assert sorted(map(tuple, data["best_perm"])) == sorted(parse_truth(truth.read_text()))

    big = files("big.txt", "".join(f"0 {j}\n" for j in range(1, 9)))
    assert main(["oracle", "--source", big, "--target", big]) == 4


def test_sweep_config_parsing():
    cfg = parse_sweep_config("# comment\nq = 0, 0.05\nseeds = 1 2\n")
    assert cfg["q"] == "0, 0.05" and cfg["seeds"] == "1 2" and cfg["iters"] == "100"
    with pytest.raises(InputError):
        parse_sweep_config("colour = red\n")
    with pytest.raises(InputError):
        parse_sweep_config("q 0.1\n")


def test_sweep_empty_grid(files, capsys):
    cfg = files("sweep.cfg", "q =\nnodes = 10\n")
    assert main(["sweep", "--config", cfg]) == 0
    assert capsys.readouterr().out == "q,seed,nc,objective,iterations\n"


def test_sweep_near_truth_and_determinism(files, tmp_path):
    cfg = files("sweep.cfg", "q = 0\nseeds = 0 1 2\nnodes = 30\np = 0.15\ninit = near_truth\n")
    out, timings = tmp_path / "a.csv", tmp_path / "t.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out), "--timings", str(timings)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "q,seed,nc,objective,iterations"
    assert [row.split(",")[2] for row in lines[1:]] == ["1.0", "1.0", "1.0"]
    assert timings.read_text().startswith("q,seed,runtime_s\n")
    first = out.read_bytes()
    main(["sweep", "--config", cfg, "--out", str(out)])
    assert out.read_bytes() == first


def test_sweep_parallel_matches_serial(files, tmp_path):
    body = "q = 0 0.1\nseeds = 0 1\nnodes = 20\np = 0.2\ninit = degree\niters = 20\n"
    serial = files("serial.cfg", body)
    parallel = files("parallel.cfg", body + "workers = 2\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", serial, "--out", str(a)]) == 0
    assert main(["sweep", "--config", parallel, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_errors(files):
    assert main(["sweep", "--config", files("bad.cfg", "colour = red\n")]) == 2
    assert main(["sweep", "--config", files("bad2.cfg", "q = x\n")]) == 2
    assert main(["sweep", "--config", files("bad3.cfg", "q = 0\ngenerator = file\n")]) == 2
