import json
import re

import numpy as np
import pandas as pd
import pytest

from tradeiv.cli import main


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def sim_dir(tmp_path):
    """A synthetic panel inside the last regime, written through the CLI."""
    cfg = write(tmp_path / "dgp.cfg", "out = sim\nseed = 7\ndgp.start = 2019-06\ndgp.n_months = 40\ndgp.kappa = 0.3\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    return tmp_path / "sim"


def read_results(sim_dir):
    df = pd.read_csv(sim_dir / "results" / "results.csv")
    return df.set_index(["regime", "term", "statistic"])["value"]


def test_simulate_then_estimate_recovers_truth(sim_dir, capsys):
    truth = json.loads((sim_dir / "truth.json").read_text())
    assert main(["estimate", "--config", str(sim_dir / "config.cfg")]) == 0
    out = capsys.readouterr().out
    assert "Panel A" in out and "Panel B" in out and "Panel C" in out
    res = read_results(sim_dir)
    eta, se = res[("Period 4", "eta", "value")], res[("Period 4", "ln_e", "se")]
    assert abs(eta - truth["eta"]) < 3 * se
    assert res[("Period 4", "model", "n")] == 6 * 40
    inst = pd.read_csv(sim_dir / "results" / "instruments.csv")
    assert set(inst["target"]) == {f"C{j:02d}" for j in range(1, 7)}


def test_rerun_is_byte_identical(sim_dir):
    cfg = str(sim_dir / "config.cfg")
    names = ("results.csv", "results.txt", "instruments.csv")
    assert main(["estimate", "--config", cfg]) == 0
    first = {n: (sim_dir / "results" / n).read_bytes() for n in names}
    assert main(["estimate", "--config", cfg]) == 0
    assert first == {n: (sim_dir / "results" / n).read_bytes() for n in names}


def test_simulate_is_deterministic(tmp_path):
    cfg = write(tmp_path / "dgp.cfg", "seed = 3\ndgp.n_months = 12\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("trade.csv", "fx.csv", "lme.csv", "truth.csv", "config.cfg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_table_numbers_come_from_csv(sim_dir):
    assert main(["estimate", "--config", str(sim_dir / "config.cfg")]) == 0
    table = (sim_dir / "results" / "results.txt").read_text()
    values = pd.read_csv(sim_dir / "results" / "results.csv")["value"].dropna()
    rounded = {f"{v:.2f}" for v in values} | {f"{v:.3f}" for v in values}
    body = table.split("\n", 1)[1]  # skip the regime header
    tokens = re.findall(r"-?\d+\.\d+", body.replace("omega = 0.089", ""))
    assert tokens
    assert set(tokens) <= rounded


def test_supply_command(sim_dir):
    assert main(["supply", "--config", str(sim_dir / "config.cfg")]) == 0
    s = pd.read_csv(sim_dir / "results" / "supply.csv").set_index(["term", "statistic"])["value"]
    assert s[("model", "n")] == 6 * 39
    assert s[("model", "epsilon")] == pytest.approx(1 / s[("ln_x", "coef")] - 1)


def test_supply_without_quantities_is_data_error(sim_dir, capsys):
    trade = pd.read_csv(sim_dir / "trade.csv")
    trade["quantity_kg"] = np.nan
    trade.to_csv(sim_dir / "trade.csv", index=False)
    assert main(["supply", "--config", str(sim_dir / "config.cfg")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_fx_file_exits_2(sim_dir, capsys):
    (sim_dir / "fx.csv").unlink()
    assert main(["estimate", "--config", str(sim_dir / "config.cfg")]) == 2
    err = capsys.readouterr().err
    assert str(sim_dir / "fx.csv") in err


def test_estimation_failure_exits_1(sim_dir, capsys):
    assert main(["estimate", "--config", str(sim_dir / "config.cfg"), "--bandwidth", "100"]) == 1
    err = capsys.readouterr().err
    assert "BandwidthError" in err and "tradeiv.errors" in err


def test_bad_config_line_exits_2(tmp_path, capsys):
    cfg = write(tmp_path / "x.cfg", "trade = t.csv\nnonsense\n")
    assert main(["estimate", "--config", str(cfg)]) == 2
    assert "x.cfg:2" in capsys.readouterr().err


def test_shares_two_partners(tmp_path):
    rows = ["partner,month,value_usd,quantity_kg"]
    rows += [f"A,2013-0{m},{30 * m},1" for m in range(1, 4)]
    rows += [f"B,2013-0{m},{10 * m},1" for m in range(1, 4)]
    rows += ["A,2018-01,5,1", "B,2018-01,15,1"]
    write(tmp_path / "trade.csv", "\n".join(rows) + "\n")
    cfg = write(tmp_path / "s.cfg", "trade = trade.csv\nout = o\n")
    assert main(["shares", "--config", str(cfg)]) == 0
    df = pd.read_csv(tmp_path / "o" / "shares.csv")
    # periods without trade are omitted
    assert sorted(df["period"].unique()) == ["Period 2", "Period 3"]
    assert df.groupby("period")["share"].sum().tolist() == pytest.approx([1.0, 1.0])
    p2 = df[df["period"] == "Period 2"].set_index("partner")["share"]
    assert p2["A"] == pytest.approx(0.75) and p2["B"] == pytest.approx(0.25)


def test_select_instruments_command(tmp_path):
    # exogenous rates: log changes are driven by the partner factor alone
    cfg = write(tmp_path / "dgp.cfg", "out = sim\ndgp.kappa = 0\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    sim = tmp_path / "sim"
    assert main(["select-instruments", "--config", str(sim / "config.cfg"), "--k", "2"]) == 0
    df = pd.read_csv(sim / "results" / "instruments.csv")
    assert len(df) == 6 * 2
    # each partner's instruments are its own simulated third-country pair
    for target, sub in df.groupby("target"):
        j = target[1:]
        assert set(sub["instrument"]) == {f"Z{j}A", f"Z{j}B"}


def test_mc_command(tmp_path):
    cfg = write(tmp_path / "mc.cfg", "out = mc\nreps = 5\nestimators = feiv\ndgp.n_months = 20\n")
    assert main(["mc", "--config", str(cfg), "--seed", "2"]) == 0
    summary = json.loads((tmp_path / "mc" / "mc_summary.json").read_text())
    assert summary["reps"] == 5 and summary["estimates"]["feiv_beta"]["n"] == 5
    first = (tmp_path / "mc" / "mc_summary.json").read_bytes()
    assert main(["mc", "--config", str(cfg), "--seed", "2"]) == 0
    assert (tmp_path / "mc" / "mc_summary.json").read_bytes() == first


def test_mc_single_rep_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path / "mc.cfg", "reps = 1\n")
    assert main(["mc", "--config", str(cfg)]) == 2
    assert "reps" in capsys.readouterr().err


def test_singular_dgp_is_config_error(tmp_path):
    cfg = write(tmp_path / "d.cfg", "dgp.eta = 1.0\ndgp.omega = 0.5\n")
    assert main(["simulate", "--config", str(cfg)]) == 2
