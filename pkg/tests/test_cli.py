import csv
import io
import json
import math

import pytest

from nomafair.cli import main, parse_db_grid


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_maxmin_with_explicit_gains(capsys):
    code, out, _ = run(capsys, "maxmin", "--gains", "2,0.5", "--power", "10")
    assert code == 0
    doc = json.loads(out)
    assert doc["gains"] == [0.5, 2.0]
    assert doc["t_star"] == pytest.approx(1.85737409, abs=1e-8)
    assert doc["beta"] == pytest.approx([0.868826231, 0.131173769], abs=1e-9)
    assert doc["converged"] is True
    assert doc["per_user_rates"] == pytest.approx([doc["t_star"]] * 2, abs=1e-8)


def test_maxmin_power_in_db(capsys):
    _, a, _ = run(capsys, "maxmin", "--gains", "1", "--power-db", "10")
    assert json.loads(a)["t_star"] == pytest.approx(math.log2(11), abs=1e-8)


def test_maxmin_sampled_gains_depend_on_seed(capsys):
    _, a, _ = run(capsys, "maxmin", "--n", "4", "--seed", "5")
    _, b, _ = run(capsys, "maxmin", "--n", "4", "--seed", "5")
    _, c, _ = run(capsys, "maxmin", "--n", "4", "--seed", "6")
    assert a == b and a != c


def test_outage_single_user(capsys):
    code, out, _ = run(capsys, "outage", "--n", "1", "--power", "10", "--rate", "1")
    doc = json.loads(out)
    assert code == 0 and doc["feasible"] is True
    assert doc["t_star"] == pytest.approx(1 - math.exp(-0.1), abs=1e-9)


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "sys.cfg"
    cfg.write_text("# two users\nn = 2\npower = 10\nrate = 1.0  # BPCU\n")
    _, a, _ = run(capsys, "outage", "--config", str(cfg))
    assert json.loads(a)["t_star"] == pytest.approx(0.24605181, abs=1e-8)
    _, b, _ = run(capsys, "outage", "--config", str(cfg), "--power", "100")
    assert json.loads(b)["t_star"] < json.loads(a)["t_star"]


def test_baselines_report(capsys):
    code, out, _ = run(capsys, "baselines", "--n", "5", "--power", "10", "--rate", "0.05")
    doc = json.loads(out)
    assert code == 0
    o = doc["outage"]
    assert o["noma_optimal"] <= o["tdma_equal_split"]
    assert o["noma_optimal"] <= o["fixed_noma"]
    assert o["tdma_equal_split"] == pytest.approx(0.0902665, abs=5e-8)
    assert doc["maxmin"]["noma"] >= doc["maxmin"]["tdma"] >= doc["maxmin"]["tdma_fixed_slot_power"]


@pytest.mark.parametrize("argv", [
    ["maxmin", "--n", "0"],
    ["maxmin", "--power", "-1", "--n", "2"],
    ["maxmin", "--gains", "1,x"],
    ["maxmin", "--n", "3", "--gains", "1,2"],
    ["maxmin"],
    ["outage", "--n", "2", "--rate", "0"],
    ["outage", "--config", "/nonexistent/file.cfg"],
    ["sweep", "noma-vs-tdma", "--n", ""],
    ["sweep", "outage-vs-power", "--power-db", "10:0:5"],
    ["sweep", "fairness-vs-power", "--realizations", "0"],
    ["maxmin", "--n", "2", "--seed", "-1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "no-such-figure"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["validate", "--samples", "1.5"])
    assert exc.value.code == 2


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 2\nwhatever = 3\n")
    code, _, err = run(capsys, "outage", "--config", str(cfg))
    assert code == 2 and "bad.cfg:2" in err


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "maxmin", "--gains", "1,2", "--out", str(tmp_path / "no" / "x.json"))
    assert code == 2 and "error" in err


def test_out_file_matches_stdout(capsys, tmp_path):
    target = tmp_path / "r.json"
    _, out, _ = run(capsys, "maxmin", "--gains", "1,2")
    assert main(["maxmin", "--gains", "1,2", "--out", str(target)]) == 0
    assert target.read_bytes() == out.encode()


def test_db_grid_parsing():
    assert parse_db_grid("0:40:5") == [0, 5, 10, 15, 20, 25, 30, 35, 40]
    assert parse_db_grid("0:1:0.1")[-1] == 1.0
    assert parse_db_grid("3,7") == [3.0, 7.0]


def test_outage_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "outage-vs-power", "--n", "5", "--power-db", "0,10")
    assert code == 0
    assert out.splitlines()[0] == "n_users,power_db,rate_target_bpcu,scheme,minmax_outage"
    assert "\r" not in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2 * 2 * 3
    tdma = [r for r in rows if r["scheme"] == "tdma" and r["power_db"] == "10"
            and r["rate_target_bpcu"] == "0.05"]
    assert float(tdma[0]["minmax_outage"]) == pytest.approx(0.0902665, abs=5e-8)


def test_rate_sweep_csv_and_workers(capsys):
    argv = ["sweep", "noma-vs-tdma", "--n", "2,3", "--power-db", "0,20",
            "--realizations", "20", "--seed", "4"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--workers", "2")
    assert a == b
    lines = a.splitlines()
    assert lines[0] == ("n_users,power_db,power_linear,scheme,"
                        "mean_fairness_rate_bpcu,num_realizations,seed")
    assert len(lines) == 1 + 2 * 2 * 2
    rows = list(csv.DictReader(io.StringIO(a)))
    assert all(r["num_realizations"] == "20" and r["seed"] == "4" for r in rows)


def test_validate_small_run_passes(capsys):
    code, out, _ = run(capsys, "validate", "--samples", "1e5", "--scenario", "single")
    assert code == 0
    assert out.rstrip().endswith("PASS")


def test_validate_json_and_thread_invariance(capsys):
    argv = ["validate", "--samples", "200000", "--scenario", "fixed", "--json", "--seed", "3"]
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--workers", "3")
    assert code == 0 and a == b
    doc = json.loads(a)
    assert doc["pass"] is True and len(doc["scenarios"]) == 4


def test_validate_tiny_sample_is_allowed(capsys):
    code, _, _ = run(capsys, "validate", "--samples", "10")
    assert code == 0


def test_validate_negative_control_fails(capsys):
    code, out, _ = run(capsys, "validate", "--samples", "1e5", "--corrupt-lambda", "2")
    assert code == 1
    assert out.rstrip().endswith("FAIL")


def test_single_user_maxmin_cli(capsys):
    _, out, _ = run(capsys, "maxmin", "--n", "1", "--gains", "0.5", "--power", "10")
    assert json.loads(out)["t_star"] == pytest.approx(math.log2(6.0), abs=1e-8)


def test_outage_below_tdma_cli(capsys):
    _, out, _ = run(capsys, "outage", "--n", "5", "--power", "10", "--rate", "0.05")
    assert json.loads(out)["t_star"] < 0.0902664


def test_outage_sweep_ordering(capsys):
    _, out, _ = run(capsys, "sweep", "outage-vs-power", "--n", "5", "--power-db", "0:30:5")
    rows = list(csv.DictReader(io.StringIO(out)))
    table = {(r["power_db"], r["rate_target_bpcu"], r["scheme"]): float(r["minmax_outage"])
             for r in rows}
    for (p, r0, scheme), value in table.items():
        if scheme == "noma":
            assert value <= table[p, r0, "fixed_noma"] <= 1.0
            assert value <= table[p, r0, "tdma"]
