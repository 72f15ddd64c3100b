import json

import pytest

from pexp.cli import main
from pexp.sequences import BesovParams, load_coefvec, make_truth, save_coefvec


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_rate_json_output(capsys):
    code, out = run_cli(
        capsys, "rate", "--setting", "l2", "--alpha", "1", "--beta", "1", "--p", "2"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["poly_exponent"] == pytest.approx(1 / 3)
    assert payload["minimax"] == pytest.approx(1 / 3)
    assert payload["switch_point"] == 1.0


def test_rate_rescaled_output(capsys):
    code, out = run_cli(
        capsys,
        "rate",
        "--setting",
        "l2-rescaled",
        "--alpha",
        "1",
        "--beta",
        "2",
        "--p",
        "1",
        "--q",
        "1",
    )
    payload = json.loads(out)
    assert payload["poly_exponent"] == pytest.approx(0.4)
    assert payload["lambda_poly_exponent"] == pytest.approx(0.2)


def test_rate_grid_sweep(capsys):
    code, out = run_cli(
        capsys,
        "rate",
        "--setting",
        "l2",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--p",
        "1.5",
        "--grid",
        "0.5",
        "2.0",
        "4",
    )
    lines = out.strip().splitlines()
    assert lines[0] == "alpha,poly_exponent,log_exponent,regime"
    assert len(lines) == 5


def test_sample_prior_writes_csv(tmp_path, capsys):
    code, out = run_cli(
        capsys,
        "sample-prior",
        "--p",
        "1",
        "--alpha",
        "1",
        "--scheme",
        "dyadic",
        "--levels",
        "4",
        "--seed",
        "9",
        "--count",
        "2",
        "--out",
        str(tmp_path),
    )
    assert code == 0
    u = load_coefvec(tmp_path / "draw_0000.csv")
    assert u.scheme == "dyadic" and len(u) == 31
    values = (tmp_path / "draw_0000_values.csv").read_text().splitlines()
    assert values[0] == "x,value"
    assert len(values) == 2 + 2**10


def test_conc_csv_output(tmp_path, capsys):
    w = make_truth(BesovParams(1.0, 2.0, 1), n=64)
    path = tmp_path / "w.csv"
    save_coefvec(w, path)
    code, out = run_cli(
        capsys,
        "conc",
        "--w-file",
        str(path),
        "--eps-grid",
        "0.4,0.8",
        "--p",
        "1.5",
        "--alpha",
        "1",
        "--mc-samples",
        "20000",
        "--seed",
        "4",
    )
    lines = out.strip().splitlines()
    assert (
        lines[0]
        == "eps,inf_term,inf_argmin_l2norm,neglog,neglog_lo,neglog_hi,phi"
    )
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 2
    assert float(rows[0][6]) > float(rows[1][6])  # phi decreasing in eps


def test_smallball_fit_slope(capsys):
    code, out = run_cli(
        capsys,
        "smallball",
        "--eps-grid",
        "0.5,0.8,1.2",
        "--p",
        "1",
        "--alpha",
        "1",
        "--n",
        "128",
        "--mc-samples",
        "30000",
        "--seed",
        "2",
        "--fit-slope",
    )
    lines = out.strip().splitlines()
    assert lines[0] == "eps,p_hat,neglog,neglog_lo,neglog_hi"
    assert lines[-1].startswith("slope,")
    assert "theory_slope,-1" in lines[-1]


def test_wn_experiment_end_to_end(tmp_path, capsys):
    cfg = dict(
        model="white-noise",
        p=2.0,
        alpha=1.0,
        beta=1.0,
        q=2.0,
        n_grid=[32, 64, 128, 256],
        replicates=2,
        posterior_draws=20,
        master_seed=5,
        max_truncation=256,
    )
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    code, out = run_cli(
        capsys,
        "wn-experiment",
        "--config",
        str(cfg_path),
        "--out",
        str(out_dir),
        "--threads",
        "2",
    )
    assert code == 0
    assert "verdict=" in out
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "plotdata.csv").exists()


def test_de_experiment_end_to_end(tmp_path, capsys):
    cfg = dict(
        model="density",
        p=1.0,
        alpha=1.0,
        beta=1.0,
        q=2.0,
        n_grid=[40, 80, 160],
        replicates=1,
        posterior_draws=20,
        master_seed=5,
        levels=3,
        burn_in=100,
        thin=1,
    )
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    code, out = run_cli(
        capsys, "de-experiment", "--config", str(cfg_path), "--out", str(out_dir)
    )
    assert code == 0
    assert (out_dir / "results.csv").exists()


def test_check_inequalities_cli(tmp_path, capsys):
    code, out = run_cli(
        capsys, "check-inequalities", "--seed", "1", "--out", str(tmp_path)
    )
    # full battery passes and writes the report
    assert code == 0
    assert (tmp_path / "inequalities.csv").exists()
    assert "checks passed" in out
