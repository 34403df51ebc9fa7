import numpy as np
import pytest

from gtsp_bls import benchmark_instance
from gtsp_bls.bench import (
    BenchConfig,
    ValidationFailure,
    config_from_text,
    derive_seed,
    load_instance,
    revalidate,
    run_benchmark,
)
from gtsp_bls.bls import BlsParams
from gtsp_bls.cli import main
from gtsp_bls.instance import load_bundled_tsplib, parse_gtsp
from gtsp_bls.memetic import solve
from gtsp_bls.report import compute_dev

QUICK = """
instances = 11eil51 14st70
runs = 3
seed = 42
desc_max = 20
time_limit = none
"""


def test_dev():
    assert compute_dev(174, 174) == 0.0
    assert compute_dev(175.74, 174) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        compute_dev(10, 0)


def test_config_parsing():
    cfg = config_from_text(QUICK + "P0 = 0.6\nexhaustive = yes\nformat = markdown  # human\n")
    assert cfg.instances == ["11eil51", "14st70"]
    assert (cfg.runs, cfg.seed, cfg.time_limit, cfg.format) == (3, 42, None, "markdown")
    assert cfg.bls == BlsParams(desc_max=20, P0=0.6, exhaustive=True)


@pytest.mark.parametrize("text", ["bogus = 1", "runs", "runs = 0", "P0 = 2", "format = xml"])
def test_config_errors(text):
    with pytest.raises(ValueError):
        config_from_text(text)


def test_derive_seed_stable():
    a = derive_seed(7, "11eil51", 3)
    assert a == derive_seed(7, "11eil51", 3)
    assert len({derive_seed(7, "11eil51", r) for r in range(50)}) == 50
    assert a != derive_seed(7, "14st70", 3) and a != derive_seed(8, "11eil51", 3)


def test_load_instance_variants(tmp_path):
    inst = load_instance("11eil51")
    assert (inst.n, inst.m, inst.best_known) == (51, 11, 174)
    assert load_instance("eil51", m=7).m == 7
    assert load_instance("11eil51", best_known=180).best_known == 180
    with pytest.raises(FileNotFoundError):
        load_instance("99nowhere")


def test_revalidate_catches_tampering():
    inst = benchmark_instance("11eil51")
    r = solve(inst, seed=0)
    revalidate(r, inst)
    r.cost -= 1
    with pytest.raises(ValidationFailure):
        revalidate(r, inst)


def test_benchmark_report():
    report = run_benchmark(config_from_text(QUICK))
    rows = report.rows()
    assert rows[0][:4] == ["Instance", "Nodes", "Clusters", "Best"]
    assert [r[0] for r in rows[1:]] == ["11eil51", "14st70", "Average"]
    assert rows[1][1:4] == ["51", "11", "174"]
    assert len(report.summaries[0].runs) == 3
    md = report.to_markdown()
    assert md.splitlines()[1].startswith("|---")


def test_csv_independent_of_jobs():
    cfg = config_from_text(QUICK)
    one = run_benchmark(cfg, jobs=1)
    two = run_benchmark(cfg, jobs=2)
    assert one.to_csv(include_time=False) == two.to_csv(include_time=False)
    assert one.runs_csv(include_time=False) == two.runs_csv(include_time=False)
    assert "CPU(s)" not in one.to_csv(include_time=False)


# --- command line ------------------------------------------------------------

def test_cli_solve(capsys):
    assert main(["solve", "11eil51", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "cost=174" in out and "dev=0.00%" in out


def test_cli_solve_with_params(tmp_path, capsys):
    p = tmp_path / "p.txt"
    p.write_text("desc_max = 5\np_mut = 0.5\n")
    assert main(["solve", "14st70", "--params", str(p), "--time-limit", "5"]) == 0


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == 1
    assert main(["solve", "99nowhere"]) == 1
    bad = tmp_path / "p.txt"
    bad.write_text("desc_max = -1\n")
    assert main(["solve", "11eil51", "--params", str(bad)]) == 1
    broken = tmp_path / "x.gtsp"
    broken.write_text("NAME : x\nTYPE : GTSP\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\n"
                      "NODE_COORD_SECTION\n1 0 0\n2 1 1\nGTSP_SET_SECTION\n1 1 -1\nEOF\n")
    assert main(["solve", str(broken)]) == 1


def test_cli_validation_failure(monkeypatch, capsys):
    import gtsp_bls.cli as cli

    def fake(report, inst):
        raise ValidationFailure("tampered")

    monkeypatch.setattr(cli, "revalidate", fake)
    assert main(["solve", "11eil51"]) == 2


def test_cli_cluster_round_trip(tmp_path):
    src = tmp_path / "eil51.tsp"
    from importlib import resources

    src.write_text(resources.files("gtsp_bls").joinpath("data/tsplib/eil51.tsp").read_text())
    out = tmp_path / "11eil51.gtsp"
    assert main(["cluster", str(src), "-o", str(out)]) == 0
    inst = parse_gtsp(out.read_text())
    assert inst.m == 11 and inst.n == 51
    assert np.array_equal(inst.dist, load_bundled_tsplib("eil51").dist)
    # the clustered file is itself solvable
    assert main(["solve", str(out), "--best-known", "174"]) == 0


def test_cli_bench(tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text(QUICK)
    assert main(["bench", "--config", str(cfg), "--format", "markdown"]) == 0
    assert "| 11eil51" in capsys.readouterr().out
    target = tmp_path / "out.csv"
    assert main(["bench", "--config", str(cfg), "--output", str(target)]) == 0
    assert target.read_text().startswith("Instance,Nodes,Clusters,Best")
