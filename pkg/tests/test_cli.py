import json
import math

import numpy as np
import pytest

from cheegerlab import cli
from cheegerlab import serialize as ser
from cheegerlab.filterbank import build_overlapping_shannon, random_bank
from cheegerlab.transform import analyze


def run(capsys, *args):
    code = cli.main(list(args))
    return code, capsys.readouterr()


def test_check_exit_codes(capsys):
    code, out = run(capsys, "check", "--bank", "shannon:16")
    assert code == 0
    assert json.loads(out.out)["calderon"]["satisfied"]
    code, _ = run(capsys, "check", "--bank", "zero:16")
    assert code == 1


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "check", "--config", str(bad))[0] == 2
    assert run(capsys, "check", "--bank", "nonsense")[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "check", "--config", str(bad))[0] == 2


def test_config_mirrors_flags(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bank": "random:5:4", "field": "real", "seed": 3}))
    code, out = run(capsys, "cheeger", "--config", str(cfg))
    code2, out2 = run(capsys, "cheeger", "--bank", "random:5:4", "--field", "real", "--seed", "3")
    assert code == code2 == 0
    assert out.out == out2.out


def test_budget_exit_code(capsys):
    assert run(capsys, "cheeger", "--bank", "shannon:16", "--signal", "random")[0] == 3


def test_inapplicable_bound_exit_code(capsys):
    assert run(capsys, "bounds", "--bank", "random:5:4", "--field", "complex", "--bound", "real")[0] == 4


def test_invalid_spec_exit_code(capsys):
    code, out = run(
        capsys, "ambiguity", "--bank", "overlapping:64:0.25", "--signal", "random", "--field", "real",
        "--parts", '[["low", 1], [2, 3, 4, 5]]', "--signs", "[1, -1]",
    )
    assert code == 5
    assert "one equivalence class" in out.err


def test_ambiguity_certificate(capsys, tmp_path):
    dest = tmp_path / "g.json"
    code, out = run(
        capsys, "ambiguity", "--bank", "shannon:16", "--signal", "filters:2,3",
        "--parts", "[[2],[3]]", "--signs", "[1,-1]", "--out", str(dest),
    )
    assert code == 0
    report = json.loads(dest.read_text())
    assert report["moduli_match"] and report["distance"] > 0.1
    g = ser.read_signal(dest)
    assert g.shape == (16,)
    np.testing.assert_array_equal(g, ser.from_pairs(report["signal"]))


def test_bounds_markers(capsys):
    code, out = run(capsys, "bounds", "--bank", "shannon:16", "--signal", "filters:2,3", "--budget", "4")
    rec = json.loads(out.out)
    assert code == 0 and rec["lower_bound"] == "+inf" and rec["stably_retrievable"] is False
    code, out = run(capsys, "bounds", "--bank", "random:5:4", "--field", "real")
    rec = json.loads(out.out)
    assert rec["lower_bound"] <= rec["upper_bound"]


def test_sweep_json_lines(capsys):
    code, out = run(capsys, "sweep", "--size", "32", "--shifts", "1,4,16", "--budget", "2")
    lines = out.out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert [json.loads(line)["shift"] for line in lines] == [1, 4, 16]


def test_graph_mode(capsys):
    code, out = run(capsys, "cheeger", "--bank", "shannon:16", "--signal", "filters:2,3", "--mode", "graph")
    assert code == 0 and json.loads(out.out)["value"] == 0.0


def test_signal_round_trip_bit_exact(tmp_path, rng):
    x = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    x[0] = 1 / 3
    for name, text in (("s.json", ser.signal_to_json(x)), ("s.csv", ser.signal_to_csv(x))):
        path = tmp_path / name
        path.write_text(text)
        np.testing.assert_array_equal(ser.read_signal(path), x)


def test_bank_round_trip(tmp_path, rng):
    for bank in (build_overlapping_shannon(32, 0.25), random_bank(6, 3, rng, "complex")):
        back = ser.bank_from_dict(json.loads(ser.dumps(ser.bank_to_dict(bank))))
        np.testing.assert_array_equal(back.profiles, bank.profiles)
        assert back.labels == bank.labels and back.field == bank.field


def test_field_round_trip(rng):
    bank = random_bank(5, 3, rng, "complex")
    F = analyze(bank, rng.standard_normal(5) + 1j * rng.standard_normal(5))
    back = ser.field_from_dict(json.loads(ser.dumps(ser.field_to_dict(F))), bank.nu)
    np.testing.assert_array_equal(back.values, F.values)


def test_special_floats():
    assert ser.dumps({"a": math.inf, "b": math.nan}) == '{"a": "+inf", "b": "nan"}'
    assert ser.parse_float("+inf") == math.inf
