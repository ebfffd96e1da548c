import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from ctmn.cli import main


def read_csv(text):
    """Rows of the first table in ``text`` as dicts, skipping metadata."""
    block = text.split("\n\n")[0]
    lines = [ln for ln in block.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_bonding(capsys):
    code, out, _ = run(capsys, "analyze", "--scenario", "wlan_bonding")
    assert code == 0
    rows = {r["id"]: r for r in read_csv(out)}
    assert {k: float(v["throughput_mbps"]) for k, v in rows.items()} == {
        "A": 67.7647, "B": 79.0588, "C": 118.588, "D": 67.7647, "E": 11.2941,
    }
    assert "# phi: 21.25" in out


def test_analyze_vehicular_theta_one(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["analyze", "--scenario", "vehicular_pos1", "--eb", "3e-3", "--output", str(out)]) == 0
    states = read_csv((tmp_path / "v_states.csv").read_text())
    assert [r["state"] for r in states] == ["-", "A", "B", "D", "BD"]
    assert all(float(r["pi"]) == 0.2 for r in states)
    assert [r["id"] for r in read_csv(out.read_text())] == ["A", "B", "D"]


def test_analyze_config_overrides(capsys):
    code, out, _ = run(capsys, "analyze", "--config", "configs/plc_chain.json", "--eb", "1e-3")
    assert code == 0
    assert "# overrides: eb=0.001" in out
    rows = {r["id"]: float(r["theta"]) for r in read_csv(out)}
    assert rows["A"] == pytest.approx(1.35902)


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"mode": "pairs", "nodes": [}')
    out = tmp_path / "out.csv"
    code, stdout, err = run(capsys, "analyze", "--config", str(bad), "--output", str(out))
    assert code == 2
    assert "bad.json:1:" in err
    assert stdout == "" and not out.exists()


def test_field_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"mode": "channels", "nodes": [{"id": "A", "eb_s": 1, "et_s": 1, "el_bits": 1}]}')
    code, _, err = run(capsys, "analyze", "--config", str(bad))
    assert code == 2 and "nodes[0].channels" in err


def test_state_cap_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("CTMN_STATE_CAP", "10")
    code, out, err = run(capsys, "analyze", "--scenario", "wlan_bonding")
    assert code == 3 and out == "" and "cap" in err
    monkeypatch.setenv("CTMN_STATE_CAP", "many")
    assert run(capsys, "analyze", "--scenario", "wlan_bonding")[0] == 2


def test_unknown_scenario_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--scenario", "mesh"])
    assert exc.value.code == 2


def test_simulate_deterministic_files(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["simulate", "--scenario", "plc_chain", "--seed", "1", "--jobs", "1", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a_states.csv").read_bytes() == (tmp_path / "b_states.csv").read_bytes()


def test_simulate_agrees_with_analyze(tmp_path):
    sim, ana = tmp_path / "sim.csv", tmp_path / "ana.csv"
    main(["simulate", "--scenario", "plc_chain", "--seed", "1", "--jobs", "1", "--output", str(sim)])
    main(["analyze", "--scenario", "plc_chain", "--output", str(ana)])
    pi_hat = {r["state"]: float(r["pi_hat"]) for r in read_csv((tmp_path / "sim_states.csv").read_text())}
    pi = {r["state"]: float(r["pi"]) for r in read_csv((tmp_path / "ana_states.csv").read_text())}
    assert pi_hat.keys() == pi.keys()
    assert max(abs(pi_hat[k] - pi[k]) for k in pi) < 0.01


def test_simulate_bad_parameters(capsys):
    assert run(capsys, "simulate", "--scenario", "plc_chain", "--measure", "0")[0] == 2
    assert run(capsys, "simulate", "--scenario", "plc_chain", "--reps", "0")[0] == 2
    assert run(capsys, "simulate", "--scenario", "plc_chain", "--check-insensitivity", "--laws", "uniform")[0] == 2


def test_check_insensitivity_verdicts(capsys):
    code, out, err = run(
        capsys, "simulate", "--scenario", "vehicular_pos1", "--check-insensitivity", "--jobs", "1"
    )
    rows = read_csv(out)
    assert [r["id"] for r in rows] == ["A", "B", "D"]
    assert len([k for k in rows[0] if k.startswith("airtime_")]) == 9
    verdicts = [r["verdict"] for r in rows]
    assert err.split() == [x for r in rows for x in (f"{r['id']}:", r["verdict"])]
    assert code == (0 if set(verdicts) == {"PASS"} else 1)


def test_check_insensitivity_random_laws_pass(capsys):
    code, out, err = run(
        capsys, "simulate", "--scenario", "vehicular_pos1", "--check-insensitivity",
        "--laws", "exponential,uniform", "--jobs", "1",
    )
    assert code == 0
    assert [r["verdict"] for r in read_csv(out)] == ["PASS"] * 3
    assert err.split() == ["A:", "PASS", "B:", "PASS", "D:", "PASS"]


def test_sweep_vehicular(capsys):
    code, out, _ = run(capsys, "sweep", "--scenario", "vehicular_pos1")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 50
    ratio = [float(r["x_A_mbps"]) / float(r["x_B_mbps"]) for r in rows]
    assert ratio[0] < 0.05 and ratio[-1] > 0.9
    assert all(a <= b for a, b in zip(ratio, ratio[1:]))


def test_sweep_plc_columns(capsys):
    code, out, _ = run(capsys, "sweep", "--scenario", "plc_chain", "--points", "12")
    rows = read_csv(out)
    assert list(rows[0]) == ["eb_s", "x_A_mbps", "x_B_mbps", "x_C_mbps", "x_D_mbps", "x_E_mbps"]
    rel = [float(r["x_C_mbps"]) / float(r["x_A_mbps"]) for r in rows]
    assert all(a < b for a, b in zip(rel, rel[1:]))


def test_sweep_single_point_equals_analyze(capsys):
    _, sweep, _ = run(capsys, "sweep", "--scenario", "wlan_bonding", "--eb-list", "5e-05")
    _, analyze, _ = run(capsys, "analyze", "--scenario", "wlan_bonding")
    row = read_csv(sweep)[0]
    for r in read_csv(analyze):
        assert row[f"x_{r['id']}_mbps"] == r["throughput_mbps"]


@pytest.mark.parametrize("argv", [["--eb-list", ""], ["--eb-list", "1e-3,-1"], ["--eb-list", "a,b"], ["--points", "0"]])
def test_sweep_bad_grid(capsys, argv):
    assert run(capsys, "sweep", "--scenario", "plc_chain", *argv)[0] == 2


@pytest.mark.parametrize("sid", ["vehicular_pos1", "vehicular_pos2", "plc_chain", "wlan_bonding"])
def test_validate_scenarios(capsys, sid):
    code, out, _ = run(capsys, "validate", "--scenario", sid)
    assert code == 0 and out.strip().endswith("PASS")
    err = float(out.split("oracle_inf_norm: ")[1].split()[0])
    assert err < 1e-10


def test_validate_random(capsys):
    code, out, _ = run(capsys, "validate", "--random-nodes", "8", "--seed", "3")
    assert code == 0 and "random n=8" in out


def test_validate_corrupted(capsys):
    code, out, _ = run(capsys, "validate", "--scenario", "plc_chain", "--corrupt-pi")
    assert code == 1 and out.strip().endswith("FAIL")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ctmn", "analyze", "--scenario", "vehicular_pos2"],
        capture_output=True, text=True, check=True,
    )
    assert np.allclose([float(r["airtime"]) for r in read_csv(proc.stdout)], 0.25)
