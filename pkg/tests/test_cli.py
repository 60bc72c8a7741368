import math
import subprocess
import sys

import numpy as np
import pytest

from pagcoupling.cli import main
from pagcoupling.multigraph import Multigraph, read_graph, write_graph


def run(*args):
    return main([str(a) for a in args])


def test_gen_single_vertex_model7(tmp_path):
    out = tmp_path / "g.txt"
    assert run("gen", "--model", 7, "--n", 1, "--c", 1.0, "--seed", 3, "--out", out) == 0
    g, header = read_graph(out)
    assert g.edge_count() == 0 and header["model"] == 7 and header["seed"] == 3


def test_gen_model1_edge_count(tmp_path):
    out = tmp_path / "g.txt"
    assert run("gen", "--model", 1, "--n", 10, "--c", 0.5, "--seed", 1, "--out", out) == 0
    assert read_graph(out)[0].edge_count() == 25


def test_gen_deterministic_with_manifest(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        run("gen", "--model", 5, "--n", 12, "--c", 1.0, "--alpha", 1.5, "--seed", 8, "--out", out)
    assert a.read_bytes() == b.read_bytes()
    manifest = (tmp_path / "a.txt.manifest").read_text()
    assert "command=gen" in manifest and "param.model=5" in manifest and "run_seed=8" in manifest
    assert "duration_s=" in manifest


def test_gen_requires_alpha(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("gen", "--model", 3, "--n", 5, "--c", 1.0, "--seed", 1, "--out", tmp_path / "x")
    assert exc.value.code == 2
    assert "--alpha" in capsys.readouterr().err


def test_couple_outputs_and_audit(tmp_path):
    d = tmp_path / "chain"
    assert run("couple", "--n", 10, "--c", 1.0, "--alpha", 1.5, "--seed", 4, "--out-dir", d) == 0
    g = {k: read_graph(d / f"G{k}.txt")[0] for k in range(1, 8)}
    assert np.all(g[2].A <= g[1].A)
    assert not np.diagonal(g[7].A).any()
    lat = dict(line.split(" ", 1) for line in (d / "latent.txt").read_text().splitlines())
    C = [int(x) for x in lat["C"].split()]
    assert int(lat["r"]) == sum(C) - len(C)
    assert (d / "couple.manifest").exists()


def test_couple_audit_catches_tampering(tmp_path):
    from pagcoupling.cli import audit_couple

    d = tmp_path / "chain"
    run("couple", "--n", 6, "--c", 1.0, "--alpha", 1.5, "--seed", 4, "--out-dir", d)
    g1 = read_graph(d / "G1.txt")[0]
    write_graph(d / "G2.txt", Multigraph.from_matrix(g1.A + np.eye(6, dtype=np.int64)))
    assert audit_couple(d) == ["G2 exceeds G1 somewhere"]


@pytest.mark.parametrize("alpha", [None, "2.5"])
def test_couple_bad_alpha(tmp_path, alpha):
    args = ["couple", "--n", 5, "--c", 1.0, "--seed", 1, "--out-dir", tmp_path]
    if alpha:
        args += ["--alpha", alpha]
    with pytest.raises(SystemExit) as exc:
        run(*args)
    assert exc.value.code == 2


def test_dist_same_file(tmp_path, capsys):
    f = tmp_path / "g.txt"
    write_graph(f, Multigraph.from_edges(4, [0, 1], [1, 3]))
    assert run("dist", f, f) == 0
    row = capsys.readouterr().out.splitlines()[1]
    assert [float(x) for x in row.split(",")[1:]] == [0.0] * 5


def test_dist_path_vs_empty(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_graph(a, Multigraph.from_edges(3, [0, 1], [1, 2]))
    write_graph(b, Multigraph(3))
    assert run("dist", a, b, "--out", tmp_path / "d.csv") == 0
    fields = (tmp_path / "d.csv").read_text().splitlines()[1].split(",")
    assert abs(float(fields[1]) - math.sqrt(2) / 3) < 1e-12


def test_dist_above_cap(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_graph(a, Multigraph.from_edges(100, [0, 5], [1, 5]))
    write_graph(b, Multigraph(100))
    assert run("dist", a, b) == 0
    out, err = capsys.readouterr()
    fields = out.splitlines()[1].split(",")
    assert fields[1] == "" and fields[3] == "" and float(fields[2]) > 0
    assert "notice" in err


def test_dist_size_mismatch(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_graph(a, Multigraph(3))
    write_graph(b, Multigraph(4))
    with pytest.raises(SystemExit) as exc:
        run("dist", a, b)
    assert exc.value.code == 2


CONFIG = """\
[tiny]
c = 0.5
alpha = 1.6666666666666667
n_grid = 8, 16
replications = 4
run_seed = 9
pair = 1, 7
"""


def test_scaling_outputs_deterministic(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(CONFIG)
    for sub in ("r1", "r2"):
        assert run("scaling", cfg, "--out-dir", tmp_path / sub, "--workers", 1 if sub == "r1" else 2) == 0
    first = (tmp_path / "r1" / "tiny_seed9.csv").read_bytes()
    assert first == (tmp_path / "r2" / "tiny_seed9.csv").read_bytes()
    assert (tmp_path / "r1" / "tiny_seed9_loglog.txt").exists()
    assert (tmp_path / "r1" / "tiny_seed9.json").exists()


def test_scaling_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(CONFIG + "colour = blue\nshape = round\n")
    with pytest.raises(SystemExit) as exc:
        run("scaling", cfg, "--out-dir", tmp_path)
    assert exc.value.code == 2
    assert "colour, shape" in capsys.readouterr().err


def test_scaling_refuses_single_replication(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(CONFIG.replace("replications = 4", "replications = 1"))
    with pytest.raises(SystemExit) as exc:
        run("scaling", cfg, "--out-dir", tmp_path)
    assert exc.value.code == 2


def test_verify_norms(capsys):
    assert run("verify", "norms") == 0
    assert capsys.readouterr().out.count("PASS") == 2


def test_verify_lemma3_default():
    assert run("verify", "lemma3") == 0


def test_verify_marginals_fault_detected():
    assert run("verify", "marginals", "--samples", 2000, "--fault", "latent_off_by_one") == 1


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        run("verify", "everything")
    assert exc.value.code == 2


def test_beta(capsys):
    assert run("beta", "--alpha", 1.9) == 0
    out = capsys.readouterr().out
    assert "1.900000 -0.100000" in out and "optimum alpha=5/3 beta=-1/3" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pagcoupling", "beta"], capture_output=True, text=True)
    assert proc.returncode == 0 and "5/3" in proc.stdout
