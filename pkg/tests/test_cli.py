import json

import pytest

from cmsim.cli import build_parser, main
from cmsim.fiber import read_waveform
from cmsim.harness import read_sweep_csv, read_threshold_csv


def test_subcommands_exist():
    parser = build_parser()
    choices = parser._subparsers._group_actions[0].choices
    assert set(choices) == {"rates", "ber-sweep", "fiber-sim", "threshold", "report"}


def test_rates(capsys):
    assert main(["rates", "--constellation", "4qam,16qam", "--snr-db", "0:6:3", "--n", "2000"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,constellation,rho_db,value,s_star,n,std_err"
    assert len(lines) == 1 + 2 * 3 * 2
    assert lines[1].startswith("mi,4qam,0.0,")


def test_rates_maxlog_to_file(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["rates", "--constellation", "64qam", "--snr-db", "12", "--metric", "gmi", "--llr-kind", "maxlog", "--n", "2000", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1].startswith("gmi-maxlog,64qam,12.0,")


def sweep_csv(tmp_path, name, const, values):
    out = tmp_path / name
    args = [
        "ber-sweep",
        "--constellation", const,
        "--codec", "ldpc:648-1/2",
        "--values", values,
        "--frames", "6",
        "--min-frames", "3",
        "--out", str(out),
    ]
    assert main(args) == 0
    return out


def test_sweep_threshold_and_report(tmp_path, capsys):
    a = sweep_csv(tmp_path, "a.csv", "4qam", "0:3:1")
    b = sweep_csv(tmp_path, "b.csv", "16qam", "5,6,7,8,9")
    assert len(read_sweep_csv(a)) == 4
    th = tmp_path / "th.csv"
    assert main(["threshold", "--sweep", f"4qam,1/2={a}", "--sweep", f"16qam,1/2={b}", "--out", str(th)]) == 0
    report = read_threshold_csv(th)
    assert set(report.entries) == {("4qam", "1/2"), ("16qam", "1/2")}
    out_dir = tmp_path / "rep"
    assert main(["report", "--sweep", f"4qam,1/2={a}", "--out-dir", str(out_dir), "--thresholds", str(th)]) == 0
    assert (out_dir / "post_ber_vs_gmi_norm.png").exists()
    assert (out_dir / "thresholds.csv").read_text() == th.read_text()
    capsys.readouterr()


def test_sweep_from_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"constellation": "4qam", "codec": "ldpc:toy12", "values": [8.0], "frames": 2, "min_frames": 2}))
    out = tmp_path / "s.csv"
    assert main(["ber-sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_sweep_csv(out)[0].frames == 2


def test_fiber_sim(tmp_path, capsys):
    wf = tmp_path / "w.bin"
    args = ["fiber-sim", "--n-symbols", "512", "--span-length-km", "10", "--out", str(wf), "--symbols-out", str(tmp_path / "s.npz")]
    assert main(args) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 512 * 8
    assert summary["effective_snr_db"] > 20
    assert read_waveform(wf).n == 512 * 8


def test_errors_exit_with_code_two(tmp_path, capsys):
    assert main(["fiber-sim", "--oversampling", "4", "--n-symbols", "64"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["threshold", "--sweep", f"x,1/2={tmp_path / 'missing.csv'}"]) == 2
    with pytest.raises(SystemExit):
        main(["threshold", "--sweep", "no-equals-sign"])
