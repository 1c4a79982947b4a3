import json
import subprocess
import sys

import numpy as np
import pytest

from polarstair import frameio
from polarstair.cli import main
from polarstair.construct import CodeConfig

SIM = ["simulate", "--n", "64", "--dimension", "53", "--m", "20", "--stairs", "3",
       "--iters", "2", "--min-block-errors", "5", "--max-trials", "15"]


def test_construct_json(tmp_path, capsys):
    assert main(["construct", "--n", "64", "--rate", "5/6"]) == 0
    cfg = CodeConfig.from_json(capsys.readouterr().out)
    assert cfg.N == 64 and cfg.K == 53
    out = tmp_path / "c.json"
    assert main(["construct", "--n", "16", "--dimension", "8", "--design-mean", "3", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["rate"] == "8/16" and d["design_llr_mean"] == 3.0 and len(d["reliability_order"]) == 16


def test_encode_transmit_decode(tmp_path, capsys):
    f, p, l, d = (str(tmp_path / x) for x in ("f.bin", "p.bin", "l.bin", "d.bin"))
    common = ["--n", "64", "--dimension", "53", "--m", "20", "--stairs", "3"]
    assert main(["encode", *common, "--seed", "4", "--out", f, "--payload-out", p]) == 0
    bits = frameio.read_frame(f)
    assert bits.kind == frameio.BITS and bits.data.size == 3 * 20 * 64
    assert main(["transmit", f, "--ebn0", "30", "--out", l]) == 0
    assert main(["decode", l, "--truth", p, "--out", d]) == 0
    assert "bit_errors=0" in capsys.readouterr().out
    assert np.array_equal(frameio.read_frame(d).data, frameio.read_frame(p).data)
    assert main(["encode", *common, "--payload", p, "--out", str(tmp_path / "g.bin")]) == 0
    assert np.array_equal(frameio.read_frame(str(tmp_path / "g.bin")).data, bits.data)


def test_burst_patch_from_file(tmp_path, capsys):
    f, p, l, d = (str(tmp_path / x) for x in ("f.bin", "p.bin", "l.bin", "d.bin"))
    common = ["--n", "256", "--dimension", "213", "--m", "60", "--stairs", "2", "--terminate"]
    main(["encode", *common, "--out", f, "--payload-out", p])
    main(["transmit", f, "--channel", "ge", "--pbe", "0.03", "--ebn0", "6", "--seed", "2", "--out", l])
    assert len(frameio.read_frame(l).bursts) > 0
    assert main(["decode", l, "--patch", "--truth", p, "--out", d]) == 0
    assert "bit_errors=" in capsys.readouterr().out


def test_frame_file_round_trip(tmp_path):
    llr = np.random.default_rng(0).normal(0, 5, 2 * 3 * 8).astype(np.float32)
    ff = frameio.FrameFile(frameio.LLRS, 8, 6, 3, 1, 77, 2.5, True, llr, np.array([1, 5, 9]))
    frameio.write_frame(tmp_path / "x.bin", ff)
    back = frameio.read_frame(tmp_path / "x.bin")
    assert (back.N, back.K, back.M, back.k, back.seed, back.terminate) == (8, 6, 3, 1, 77, True)
    assert np.array_equal(back.data, llr.astype(float)) and back.bursts.tolist() == [1, 5, 9]
    raw = (tmp_path / "x.bin").read_bytes()
    (tmp_path / "bad.bin").write_bytes(raw[:-3])
    with pytest.raises(ValueError):
        frameio.read_frame(tmp_path / "bad.bin")


def test_simulate_csv_deterministic(tmp_path):
    a, b, c = (str(tmp_path / x) for x in ("a.csv", "b.csv", "c.csv"))
    assert main(SIM + ["--ebn0", "2", "3", "--out", a]) == 0
    assert main(SIM + ["--ebn0", "2,3", "--out", b, "--threads", "1"]) == 0
    text = open(a, "rb").read()
    assert text == open(b, "rb").read()
    lines = text.decode().splitlines()
    assert lines[0] == "point,trials,block_errors,bit_errors,bler,ber,ci_lo,ci_hi,seed,wall_seconds"
    assert len(lines) == 3
    assert main(SIM + ["--ebn0", "2", "3", "--out", c, "--seed", "1"]) == 0
    assert open(c, "rb").read() != text


def test_simulate_json_timing_and_plot(tmp_path):
    out = tmp_path / "r.json"
    assert main(SIM + ["--ebn0", "2", "--json", "--timing", "--out", str(out), "--plot"]) == 0
    doc = json.loads(out.read_text())
    assert doc["results"][0]["wall_seconds"] > 0 and "stair_row_errors" in doc["results"][0]
    assert (tmp_path / "r.png").stat().st_size > 0
    csv = tmp_path / "r.csv"
    main(SIM + ["--ebn0", "2", "3", "--out", str(csv)])
    assert main(["plot", str(csv), "--out", str(tmp_path / "p.png")]) == 0
    assert (tmp_path / "p.png").stat().st_size > 0


def test_simulate_ge_axis(tmp_path):
    out = tmp_path / "g.csv"
    args = SIM + ["--channel", "ge", "--ebn0", "5", "--pbe", "0.02", "0.05", "--out", str(out)]
    assert main(args) == 0
    rows = out.read_text().splitlines()[1:]
    assert [float(r.split(",")[0]) for r in rows] == [0.02, 0.05]


@pytest.mark.parametrize("bad", [
    ["--ebn0", "3", "2", "3"],
    ["--ebn0", "3", "3"],
    ["--m", "5"],
    ["--min-block-errors", "0"],
    ["--channel", "ge", "--ebn0", "4", "5", "--pbe", "0.1"],
])
def test_simulate_config_errors(bad, capsys):
    assert main(SIM + bad) != 0
    assert "error" in capsys.readouterr().err


def test_complexity_command(capsys):
    assert main(["complexity", "--stairs", "1", "--m", "300", "--n", "1024"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "operation,polar_staircase,ldpc_staircase"
    assert out[-1].startswith("total,30810000,")
    assert main(["complexity", "--m", "600", "--n", "2016", "--dv", "3.33", "--dc", "20", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["ldpc"]["total"] == "20499840"


def test_console_script_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "polarstair.cli", "complexity"], capture_output=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "polarstair.cli", "simulate", "--m", "5"],
                         capture_output=True)
    assert bad.returncode != 0
    usage = subprocess.run([sys.executable, "-m", "polarstair.cli", "frobnicate"], capture_output=True)
    assert usage.returncode != 0
