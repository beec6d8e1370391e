import csv
import json

import numpy as np
import pytest

from scakit import cli
from scakit.traceio import export_raw, read_sctr

KEY = "2041e2770445067328090a7f0c0d0e7b"
CORRECT_BYTE0 = 51


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def noisy_sctr(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "noisy.sctr"
    assert cli.main(["simulate", "--key", KEY, "--n", "3000", "--sigma", "4",
                     "--seed", "1", "-o", str(path)]) == 0
    return path


def test_simulate_writes_campaign(tmp_path, capsys):
    out = tmp_path / "c.sctr"
    assert run("simulate", "--key", KEY, "--n", 40, "--sigma", 0.5,
               "--seed", 9, "-o", out) == 0
    effective = json.loads(capsys.readouterr().out)
    assert effective["n"] == 40 and effective["seed"] == 9
    ts = read_sctr(out)
    assert ts.n_traces == 40
    assert ts.verify_ciphertexts()


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.sctr", tmp_path / "b.sctr"
    for out in (a, b):
        assert run("simulate", "--key", KEY, "--n", 64, "--sigma", 2,
                   "--seed", 5, "-o", out) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_with_ro_bank_offset(tmp_path, capsys):
    out = tmp_path / "ro.sctr"
    assert run("simulate", "--key", KEY, "--n", 16, "--n-ro", 70,
               "--alpha", 1 / 17.5, "--pulse", 1.0, "--seed", 1, "-o", out) == 0
    effective = json.loads(capsys.readouterr().out)
    assert effective["offset"] == pytest.approx(4.0)


def test_simulate_requires_alpha_with_n_ro(tmp_path, capsys):
    assert run("simulate", "--n", 4, "--n-ro", 70, "-o", tmp_path / "x.sctr") == 1
    err = json.loads(capsys.readouterr().err)
    assert "alpha" in err["error"]


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "campaign.cfg"
    cfg.write_text(
        "# campaign parameters\n"
        f"key = {KEY}\n"
        "n = 50\n"
        "sigma = 1.0\n"
        "seed = 3\n"
    )
    out = tmp_path / "cfg.sctr"
    assert run("simulate", "--config", cfg, "--n", 64, "-o", out) == 0
    effective = json.loads(capsys.readouterr().out)
    assert effective["n"] == 64          # flag wins
    assert effective["sigma"] == 1.0     # file value applies
    assert read_sctr(out).n_traces == 64


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    assert run("simulate", "--config", cfg, "-o", tmp_path / "x.sctr") == 1
    assert "bogus" in json.loads(capsys.readouterr().err)["error"]


def test_attack_report_and_evolution_csv(noisy_sctr, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    evo_path = tmp_path / "evo.csv"
    assert run("attack", noisy_sctr, "--byte", 0, "--report", report_path,
               "--evolution-csv", evo_path) == 0
    report = json.loads(report_path.read_text())
    assert report["schema_version"] == 1
    assert report["best_guess"] == CORRECT_BYTE0
    assert report["correct_guess"] == CORRECT_BYTE0
    assert report["correct_rank"] == 1
    assert isinstance(report["disclosure"], int)
    assert sorted(report["ranking"]) == list(range(256))
    assert len(report["scores"]) == 256
    checkpoints = report["evolution"]["checkpoints"]
    assert checkpoints[-1] == 3000
    assert len(report["evolution"]["curves"]) == 256

    # the emitted CSV parses back with plain csv tooling, values intact
    with open(evo_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 256 * len(checkpoints)
    for row in rows[:512]:
        guess, i = int(row["guess"]), checkpoints.index(int(row["checkpoint"]))
        assert float(row["r"]) == report["evolution"]["curves"][guess][i]


def test_attack_is_deterministic(noisy_sctr, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("attack", noisy_sctr, "--report", path) == 0
    assert a.read_text() == b.read_text()


def test_attack_stride_clamps_to_single_checkpoint(noisy_sctr, capsys):
    assert run("attack", noisy_sctr, "--stride", 100000) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["evolution"]["checkpoints"] == [3000]


def test_attack_all_bytes_recovers_key(noisy_sctr, tmp_path, capsys):
    report_path = tmp_path / "all.json"
    assert run("attack", noisy_sctr, "--all-bytes", "--stride", 3000,
               "--report", report_path) == 0
    report = json.loads(report_path.read_text())
    assert report["mode"] == "all"
    assert len(report["bytes"]) == 16
    assert report["recovered"] is True
    assert report["cipher_key_hex"] == KEY
    assert report["last_round_key_hex"] == report["true_last_round_key_hex"]


def test_attack_missing_file_fails(tmp_path, capsys):
    assert run("attack", tmp_path / "absent.sctr") == 1
    err = json.loads(capsys.readouterr().err)
    assert "error" in err


def test_fit_hd_outputs(noisy_sctr, tmp_path, capsys):
    points, fits = tmp_path / "points.csv", tmp_path / "fits.csv"
    assert run("fit-hd", noisy_sctr, "--guess", 51, "--guess", 62,
               "--points", points, "--fits", fits) == 0
    with open(points, newline="") as fh:
        point_rows = list(csv.DictReader(fh))
    assert {row["guess"] for row in point_rows} == {"51", "62"}
    counts = sum(int(r["count"]) for r in point_rows if r["guess"] == "51")
    assert counts == 3000
    with open(fits, newline="") as fh:
        fit_rows = list(csv.DictReader(fh))
    assert len(fit_rows) == 2
    slope_51 = float(next(r["slope"] for r in fit_rows if r["guess"] == "51"))
    assert slope_51 < 0


def test_fit_hd_defaults_to_correct_guess(noisy_sctr, capsys):
    assert run("fit-hd", noisy_sctr) == 0
    out = capsys.readouterr().out
    assert out.startswith(f"guess  {CORRECT_BYTE0}")


def test_sweep_table(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert run("sweep", "--key", KEY, "--n", 4000, "--sigma", 4, "--seed", 1,
               "--offsets", "0,6", "--bits", "2", "-o", out) == 0
    with open(out, newline="") as fh:
        rows = {row["offset"]: row for row in csv.DictReader(fh)}
    assert set(rows) == {"0", "6"}
    # zero offset behaves like no countermeasure at all
    plain = tmp_path / "plain.sctr"
    assert run("simulate", "--key", KEY, "--n", 4000, "--sigma", 4,
               "--seed", 1, "-o", plain) == 0
    report_path = tmp_path / "plain.json"
    assert run("attack", plain, "--report", report_path) == 0
    report = json.loads(report_path.read_text())
    assert rows["0"]["disclosure"] == str(report["disclosure"])
    assert rows["0"]["wrong_horse_count"] == "0"
    # a sufficient offset suppresses disclosure in the same campaign
    assert rows["6"]["disclosure"] == ""
    assert int(rows["6"]["wrong_horse_count"]) >= 1


def test_convert_round_trip(tmp_path, capsys):
    src = tmp_path / "src.sctr"
    assert run("simulate", "--key", KEY, "--n", 25, "--sigma", 1,
               "--samples", 3, "--seed", 2, "-o", src) == 0
    ts = read_sctr(src)
    raw, meta = tmp_path / "dump.f32", tmp_path / "dump.csv"
    export_raw(ts, raw, meta)
    out = tmp_path / "converted.sctr"
    assert run("convert", raw, meta, "--samples-per-trace", 3, "-o", out) == 0
    back = read_sctr(out)
    assert back.samples.tobytes() == ts.samples.tobytes()
    assert np.array_equal(back.ciphertexts, ts.ciphertexts)
    assert back.true_key is None


def test_convert_mismatch_fails(tmp_path, capsys):
    raw = tmp_path / "r.f32"
    meta = tmp_path / "r.csv"
    raw.write_bytes(np.zeros(6, dtype="<f4").tobytes())
    meta.write_text("plaintext_hex,ciphertext_hex\n" + "00" * 16 + "," + "11" * 16 + "\n")
    assert run("convert", raw, meta, "--samples-per-trace", 4,
               "-o", tmp_path / "x.sctr") == 1
    err = json.loads(capsys.readouterr().err)
    assert "mismatch" in err["error"]
