from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from hyperdense import cli, states
from hyperdense import montecarlo as mc


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def make_counts_csv(signal: int, noise: int) -> str:
    """Counts table with `signal` in every signature column, `noise` elsewhere."""
    lines = [",".join(cli._COUNTS_HEADER)]
    for m in states.MESSAGES:
        sig = {l1 * 4 + l2 for (l1, l2) in states.signature_map(m)}
        row = [signal if j in sig else noise for j in range(16)]
        lines.append(",".join([m.label] + [str(v) for v in row]))
    return "\n".join(lines) + "\n"


def test_simulate_ideal_json(capsys):
    rc, out, err = run_cli(capsys, "simulate")
    assert rc == 0
    assert err == ""
    doc = json.loads(out)
    assert doc["capacity_bits"] == 2.0
    assert doc["success_probability"] == 1.0
    assert doc["input_distribution"] == [0.25, 0.25, 0.25, 0.25]
    assert np.allclose(doc["transfer_matrix"]["p"], np.eye(4), atol=1e-15)
    assert doc["transfer_matrix"]["labels"] == ["Phi+", "Phi-", "Psi+", "Psi-"]


def test_simulate_params_file(capsys, tmp_path):
    params = tmp_path / "params.txt"
    params.write_text(
        "# characterized apparatus\n"
        "source.eps_theta_spin_deg = 1.0\n"
        "source.lambda_spin = 0.010\n"
        "source.eps_theta_orbit_deg = 1.7\n"
        "source.lambda_orbit = 0.03\n"
        "gate.eps_H = 0.005\n"
        "gate.eps_V = 0.010\n"
        "accidentals.fraction = 0.00267\n")
    rc, out, _ = run_cli(capsys, "simulate", "--params", str(params))
    assert rc == 0
    doc = json.loads(out)
    assert abs(doc["capacity_bits"] - 1.6598879280085324) < 1e-12
    assert abs(doc["success_probability"] - 0.9524310266971028) < 1e-12


def test_simulate_gate_only_params(capsys, tmp_path):
    params = tmp_path / "params.txt"
    params.write_text("gate.eps_H = 0.005\ngate.eps_V = 0.010\n")
    rc, out, _ = run_cli(capsys, "simulate", "--params", str(params))
    assert rc == 0
    doc = json.loads(out)
    assert abs(doc["success_probability"] - 0.9846805125391737) < 1e-12
    assert abs(doc["capacity_bits"] - 1.8959234805382867) < 1e-12


def test_simulate_csv_and_table(capsys):
    rc, out, _ = run_cli(capsys, "simulate", "--format", "csv")
    assert rc == 0
    assert "# capacity_bits=2" in out
    assert "# success_probability=1" in out

    rc, out, _ = run_cli(capsys, "simulate", "--format", "table")
    assert rc == 0
    assert "capacity: 2 bits" in out
    assert "average success probability: 1" in out


def test_simulate_bad_params_file(capsys, tmp_path):
    params = tmp_path / "params.txt"
    params.write_text("gate.eps_h = 0.005\n")
    rc, out, err = run_cli(capsys, "simulate", "--params", str(params))
    assert rc == 2
    assert out == ""
    assert "unknown key" in err
    assert "valid keys" in err

    rc, _, err = run_cli(capsys, "simulate", "--params",
                         str(tmp_path / "missing.txt"))
    assert rc == 2
    assert "error:" in err


def test_analyze_exact_recovery(capsys, tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text(make_counts_csv(signal=711, noise=13))
    rc, out, _ = run_cli(capsys, "analyze", str(counts))
    assert rc == 0
    doc = json.loads(out)
    p = np.array(doc["probabilities"]["p"])
    want = np.full((4, 4), 0.052 / 3)
    np.fill_diagonal(want, 0.948)
    assert np.allclose(p, want, atol=1e-12)
    for label in ("Phi+", "Phi-", "Psi+", "Psi-"):
        assert abs(doc["snr"][label] - 18.23076923076923) < 1e-12
    assert abs(doc["capacity_bits"] - 1.6227491305992996) < 1e-9
    assert abs(doc["mutual_information_uniform_bits"]
               - doc["capacity_bits"]) < 1e-9


def test_analyze_noise_free_counts(capsys, tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text(make_counts_csv(signal=500, noise=0))
    rc, out, _ = run_cli(capsys, "analyze", str(counts))
    assert rc == 0
    doc = json.loads(out)
    assert doc["capacity_bits"] == 2.0
    assert all(doc["snr"][label] is None for label in doc["snr"])

    rc, out, _ = run_cli(capsys, "analyze", str(counts), "--format", "table")
    assert rc == 0
    assert "no noise counts" in out


def test_analyze_rejects_malformed_tables(capsys, tmp_path):
    good = make_counts_csv(signal=711, noise=13)

    bad = tmp_path / "bad_header.csv"
    bad.write_text(good.replace("f+f+", "pp"))
    rc, _, err = run_cli(capsys, "analyze", str(bad))
    assert rc == 2 and "header must be" in err

    bad = tmp_path / "bad_cell.csv"
    bad.write_text(good.replace("711", "711.5", 1))
    rc, _, err = run_cli(capsys, "analyze", str(bad))
    assert rc == 2 and "non-negative integers" in err

    bad = tmp_path / "bad_negative.csv"
    bad.write_text(good.replace(",13", ",-13", 1))
    rc, _, err = run_cli(capsys, "analyze", str(bad))
    assert rc == 2 and "non-negative integers" in err

    lines = good.splitlines()
    lines[4] = "Psi-" + ",0" * 16
    bad = tmp_path / "bad_zero_row.csv"
    bad.write_text("\n".join(lines) + "\n")
    rc, _, err = run_cli(capsys, "analyze", str(bad))
    assert rc == 2 and "no counts recorded for message Psi-" in err

    lines = good.splitlines()
    lines[1], lines[2] = lines[2], lines[1]
    bad = tmp_path / "bad_order.csv"
    bad.write_text("\n".join(lines) + "\n")
    rc, _, err = run_cli(capsys, "analyze", str(bad))
    assert rc == 2 and "canonical order" in err


def test_bounds_csv(capsys):
    rc, out, _ = run_cli(capsys, "bounds", "--encoding", "4",
                         "--resolution", "5")
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "curve,p_s,capacity_bits"
    rows = [ln.split(",") for ln in lines[1:]]
    lower = [(float(p), float(c)) for which, p, c in rows if which == "lower"]
    upper = [(float(p), float(c)) for which, p, c in rows if which == "upper"]
    assert len(lower) == 5 and len(upper) == 5
    assert lower[0][0] == 0.25 and abs(lower[0][1]) < 1e-9
    assert lower[-1] == (1.0, 2.0)
    assert upper[0][0] == 0.75
    assert abs(upper[0][1] - np.log2(3.0)) < 1e-9
    assert upper[-1] == (1.0, 2.0)


def test_bounds_three_message_json(capsys):
    rc, out, _ = run_cli(capsys, "bounds", "--encoding", "3",
                         "--resolution", "4", "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc["encoding"] == 3
    lower = doc["curves"]["lower"]
    upper = doc["curves"]["upper"]
    assert len(lower) == 4 and len(upper) == 4
    assert abs(lower[0][0] - 1.0 / 3.0) < 1e-12 and abs(lower[0][1]) < 1e-9
    assert abs(lower[-1][1] - np.log2(3.0)) < 1e-9
    assert abs(upper[0][0] - 2.0 / 3.0) < 1e-12
    assert abs(upper[0][1] - 1.0) < 1e-9


def test_montecarlo_builtin_deterministic(capsys):
    args = ("montecarlo", "--builtin", "all", "--seed", "42", "--format",
            "json")
    rc, first, _ = run_cli(capsys, *args)
    assert rc == 0
    rc, second, _ = run_cli(capsys, *args)
    assert rc == 0
    assert first == second
    rc, threaded, _ = run_cli(capsys, *args, "--jobs", "4")
    assert rc == 0
    assert first == threaded
    doc = json.loads(first)
    assert doc["results"][0]["scenario"]["seed"] == 42
    assert doc["results"][0]["scenario"]["name"] == "all"
    assert "budget" not in doc


def test_montecarlo_full_budget(capsys):
    rc, out, _ = run_cli(capsys, "montecarlo", "--builtin", "full")
    assert rc == 0
    for name in ("spin", "orbit", "crosstalk", "accidentals", "all"):
        assert name in out
    assert "naive budget" in out
    assert "joint simulation" in out

    rc, out, _ = run_cli(capsys, "montecarlo", "--builtin", "full",
                         "--format", "json")
    doc = json.loads(out)
    assert len(doc["results"]) == 5
    budget = doc["budget"]
    assert abs(budget["naive_capacity_bits"] - 1.5797058856499557) < 1e-12
    assert abs(budget["joint_capacity_bits"] - 1.644999250827791) < 1e-12
    assert abs(budget["discrepancy_bits"] - 0.06529336517783535) < 1e-12

    rc, out, _ = run_cli(capsys, "montecarlo", "--builtin", "full",
                         "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0].startswith("scenario,success_mean")
    assert len(lines) == 6


def test_montecarlo_scenario_file(capsys, tmp_path):
    scenario = tmp_path / "scenario.txt"
    scenario.write_text("name = spin-wide\nactive = source-spin\n"
                        "source.eps_theta_spin_deg.mean = 1.0\n"
                        "source.eps_theta_spin_deg.sigma = 0.7\n"
                        "iterations = 20\nseed = 11\n")
    rc, out, _ = run_cli(capsys, "montecarlo", "--scenario", str(scenario),
                         "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    got = doc["results"][0]
    assert got["scenario"]["name"] == "spin-wide"
    want = mc.run(mc.load_scenario(scenario))
    assert got["capacity_mean_bits"] == want.capacity_mean
    assert got["success_mean"] == want.success_mean


def test_decompose_message_labels(capsys):
    for label in ("Phi+", "Phi-", "Psi+", "Psi-"):
        rc, out, _ = run_cli(capsys, "decompose", label, "--format", "json")
        assert rc == 0
        doc = json.loads(out)
        assert doc["state"] == label
        rows = doc["amplitudes"]
        assert len(rows) == 16
        live = [r for r in rows if r["probability"] > 1e-12]
        assert len(live) == 4
        for r in live:
            assert abs(r["probability"] - 0.25) < 1e-12
            assert r["message"] == label
            assert abs(abs(r["re"]) - 0.5) < 1e-12
            assert abs(r["im"]) < 1e-12


def test_decompose_table_marks_signature(capsys):
    rc, out, _ = run_cli(capsys, "decompose", "Psi-")
    assert rc == 0
    assert "* signature pairs of Psi-" in out
    marked = [ln for ln in out.splitlines() if ln.endswith("*")]
    assert len(marked) == 4
    for ln in marked:
        assert ln.startswith(("f+f-", "f-f+", "y+y-", "y-y+"))


def test_decompose_inline_amplitudes(capsys):
    psi = states.encoded_ket(states.Message.PHI_MINUS)
    inline = ",".join(f"{a.real:+.12g}{a.imag:+.12g}j" for a in psi)
    rc, out, _ = run_cli(capsys, "decompose", inline, "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc["state"] == "custom"
    live = [r for r in doc["amplitudes"] if r["probability"] > 1e-12]
    assert {r["message"] for r in live} == {"Phi-"}


def test_decompose_rejects_bad_input(capsys):
    rc, _, err = run_cli(capsys, "decompose", ",".join(["1"] + ["0"] * 14))
    assert rc == 2 and "expected 16" in err

    rc, _, err = run_cli(capsys, "decompose", ",".join(["1"] + ["0.5"] + ["0"] * 14))
    assert rc == 2 and "normalized" in err

    rc, _, err = run_cli(capsys, "decompose", ",".join(["lemon"] + ["0"] * 15))
    assert rc == 2 and "could not parse amplitude" in err


def test_out_writes_file(capsys, tmp_path):
    out_path = tmp_path / "result.json"
    rc, out, _ = run_cli(capsys, "simulate", "--out", str(out_path))
    assert rc == 0
    assert out == ""
    doc = json.loads(out_path.read_text())
    assert doc["capacity_bits"] == 2.0


def test_console_entry_point():
    proc = subprocess.run(["hyperdense", "simulate"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["capacity_bits"] == 2.0

    proc = subprocess.run(["hyperdense"], capture_output=True, text=True)
    assert proc.returncode == 2

    proc = subprocess.run([sys.executable, "-m", "hyperdense.cli"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
