from stosszahl.cli import main
from stosszahl.gas import GasConfig, run, write_ledger_csv


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "gas-equilibrium" in out
    assert len(out) == 5


def test_run_two_state_exit_zero(tmp_path, capsys):
    config = write_config(
        tmp_path, "[run]\nscenario = two-state-relaxation\nseed = 3\n"
    )
    code = main(
        ["run", "--config", str(config), "--out", str(tmp_path / "out"), "--no-header-timestamp"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "[PASS] solver_matches_closed_form" in out
    assert (tmp_path / "out" / "report.json").exists()


def test_run_bad_config_exit_two(tmp_path, capsys):
    config = write_config(tmp_path, "[run]\nscenario = nope\nseed = 3\n")
    assert main(["run", "--config", str(config)]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_missing_seed_exit_two(tmp_path, capsys):
    config = write_config(tmp_path, "[run]\nscenario = born-statistics\n")
    assert main(["run", "--config", str(config)]) == 2


def test_seed_flag_overrides(tmp_path):
    config = write_config(tmp_path, "[run]\nscenario = born-statistics\n")
    code = main(
        ["run", "--config", str(config), "--seed", "20260809",
         "--out", str(tmp_path / "out"), "--no-header-timestamp"]
    )
    assert code == 0


def test_env_var_sets_output_dir(tmp_path, monkeypatch, capsys):
    config = write_config(tmp_path, "[run]\nscenario = two-state-relaxation\nseed = 3\n")
    target = tmp_path / "env_out"
    monkeypatch.setenv("STOSSZAHL_OUT", str(target))
    assert main(["run", "--config", str(config), "--no-header-timestamp"]) == 0
    assert (target / "report.json").exists()


def test_out_flag_beats_env_var(tmp_path, monkeypatch):
    config = write_config(tmp_path, "[run]\nscenario = two-state-relaxation\nseed = 3\n")
    monkeypatch.setenv("STOSSZAHL_OUT", str(tmp_path / "env_out"))
    flag_out = tmp_path / "flag_out"
    assert main(["run", "--config", str(config), "--out", str(flag_out), "--no-header-timestamp"]) == 0
    assert (flag_out / "report.json").exists()
    assert not (tmp_path / "env_out").exists()


def test_audit_clean_ledger_exit_zero(tmp_path, capsys):
    gas_config = GasConfig(n_molecules=8, n_excited=4, decay_rate=1.0, t_max=10.0, seed=6)
    _trajectory, events = run(gas_config)
    path = tmp_path / "ledger.csv"
    write_ledger_csv(path, events)
    assert main(["audit", "--ledger", str(path), "--n-molecules", "8"]) == 0
    assert "audit: PASS" in capsys.readouterr().out


def test_audit_tampered_ledger_exit_one(tmp_path, capsys):
    gas_config = GasConfig(n_molecules=8, n_excited=4, decay_rate=1.0, t_max=10.0, seed=6)
    _trajectory, events = run(gas_config)
    path = tmp_path / "ledger.csv"
    write_ledger_csv(path, events + [events[0]])
    assert main(["audit", "--ledger", str(path)]) == 1
    out = capsys.readouterr().out
    assert "violation" in out and "audit: FAIL" in out


def test_audit_missing_file_exit_two(tmp_path, capsys):
    assert main(["audit", "--ledger", str(tmp_path / "nope.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_identical_seeds_identical_outputs(tmp_path):
    config = write_config(
        tmp_path,
        "[run]\nscenario = born-statistics\nseed = 20260809\n"
        "[born-statistics]\nn_draws = 5000\n",
    )
    for sub in ("x", "y"):
        assert main(
            ["run", "--config", str(config), "--out", str(tmp_path / sub), "--no-header-timestamp"]
        ) == 0
    assert (tmp_path / "x" / "born_statistics.csv").read_bytes() == (
        tmp_path / "y" / "born_statistics.csv"
    ).read_bytes()
