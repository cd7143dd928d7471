import json

import pytest

from mixlab.cli import main
from mixlab.graph import read_edge_list


@pytest.fixture
def graph_file(tmp_path):
    p = tmp_path / "g.txt"
    assert main(["gen", "--model", "perturbed", "--n", "200", "--eps", "1", "--seed", "3",
                 "--out", str(p)]) == 0
    return p


def run_json(capsys, argv):
    capsys.readouterr()
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        main(["gen", "--model", "gnp", "--n", "300", "--p", "0.01", "--seed", "5", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()
    main(["gen", "--model", "gnp", "--n", "300", "--p", "0.01", "--seed", "6", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_gen_models(tmp_path, capsys):
    p = tmp_path / "h.txt"
    assert main(["gen", "--model", "host", "--host", "complete:n=5", "--out", str(p)]) == 0
    assert read_edge_list(p).m == 10
    assert main(["gen", "--model", "newman-watts", "--n", "50", "--k", "2", "--eps", "0",
                 "--out", str(p)]) == 0
    assert read_edge_list(p).m == 100
    assert main(["gen", "--model", "percolated", "--host", "random-regular:n=100,d=4",
                 "--p", "0.6", "--restrict-to-largest-component", "--out", str(p)]) == 0
    assert main(["gen", "--model", "percolated", "--p", "0.5"]) == 2


@pytest.mark.parametrize("argv", [
    ["mix"],
    ["mix", "--mode", "sampled", "--samples", "20", "--seed", "2"],
    ["avgmix", "--mode", "sampled", "--samples", "20", "--seed", "2"],
    ["conductance", "--mode", "sampled", "--budget", "4"],
    ["spreader", "--k-cap", "4"],
    ["contract", "--from-spreader", "--alpha", "0.6", "--D", "4", "--no-strict", "--k-cap", "4"],
    ["fvtl", "--sample", "2", "--T", "20", "--seed", "1"],
])
def test_json_is_byte_identical(graph_file, capsys, argv):
    full = argv + ["--graph", str(graph_file)]
    c1, o1 = run_json(capsys, full)
    c2, o2 = run_json(capsys, full)
    assert c1 == c2 == 0
    assert o1 == o2
    assert "timing" not in json.loads(o1)


def test_mix_cap_exit_code(graph_file, capsys):
    code, out = run_json(capsys, ["mix", "--graph", str(graph_file), "--t-cap", "2"])
    assert code == 3 and json.loads(out)["status"] == "cap"


def test_disconnected_needs_restrict(tmp_path, capsys):
    p = tmp_path / "d.txt"
    p.write_text("5 3\n0 1\n1 2\n3 4\n")
    assert main(["mix", "--graph", str(p)]) == 2
    code, out = run_json(capsys, ["mix", "--graph", str(p), "--restrict-to-largest-component"])
    d = json.loads(out)
    assert code == 0 and d["graph"]["l1"] == 3


def test_contract_emits_graphs(tmp_path, capsys):
    g = tmp_path / "p.txt"
    g.write_text("5 4\n0 1\n1 2\n2 3\n3 4\n")
    u = tmp_path / "u.txt"
    u.write_text("1 2\n")
    gs, gh = tmp_path / "gs.txt", tmp_path / "gh.txt"
    code, out = run_json(capsys, ["contract", "--graph", str(g), "--u-file", str(u),
                                  "--emit-gstar", str(gs), "--emit-ghat", str(gh)])
    d = json.loads(out)
    assert code == 0 and d["e_star"] == 3 and d["e_hat"] == 3
    assert read_edge_list(gs, multigraph=True).n == 4


def test_fvtl_single_vertex(tmp_path, capsys):
    g = tmp_path / "k2.txt"
    g.write_text("2 1\n0 1\n")
    code, out = run_json(capsys, ["fvtl", "--graph", str(g), "--u", "0"])
    assert code == 0 and json.loads(out)["stat_hitting"] == 0.5


def test_run_writes_result_and_is_reproducible(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("model = perturbed\nn = 128\nseeds = 0, 1\nanalyses = mix, avgmix\nsamples = 16\n")
    outs = []
    for d in ("r1", "r2"):
        code, out = run_json(capsys, ["run", "--config", str(cfg), "--out-dir", str(tmp_path / d)])
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    rec = json.loads((tmp_path / "r1" / "result.json").read_text())
    assert "timing" in rec
    rec.pop("timing")
    assert rec == json.loads(outs[0])
    assert (tmp_path / "r1" / "size_sweep.csv").exists()
    assert (tmp_path / "r1" / "curve_n128_seed0.csv").exists()


def test_run_skip_exit_code(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("model = perturbed\nn = 128\nseeds = 0\nanalyses = mix\nt_cap = 2\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 4
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path), "--allow-skip"]) == 0
