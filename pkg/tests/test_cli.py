from banditsurvey.cli import main


def test_oracle_subcommand(tmp_path, capsys):
    out = tmp_path / "fixtures.csv"
    code = main(["oracle", "--p", "0.8", "--quality", "2", "--horizon", "5000", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,quality,horizon,expected_stop_time,error_rate,stop_mass"
    fields = lines[1].split(",")
    assert fields[0] == "0.8" and fields[1] == "2"
    assert float(fields[3]) > 1.0


def test_gapcdf_subcommand(tmp_path, capsys):
    src = tmp_path / "judgments.csv"
    rows = ["task_id,worker_id,option"]
    for t in range(6):
        for w in range(4):
            rows.append(f"t{t},w{w},{'a' if (w + t) % 4 else 'b'}")
    src.write_text("\n".join(rows) + "\n", encoding="utf-8")
    out = tmp_path / "cdf.csv"
    code = main(["gapcdf", "--input", str(src), "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "rank,empirical_gap"
    captured = capsys.readouterr().out
    assert "r_squared=" in captured and "tasks=6" in captured


def test_benchmark_subcommand(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = main(
        [
            "benchmark",
            "--biases",
            "0.4 0",
            "--quality",
            "1.5",
            "--runs",
            "400",
            "--seed",
            "3",
            "--grid-m",
            "2",
            "--cap",
            "2000",
            "--horizon",
            "2000",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "kind,spec,avg_cost,std_err,truncated,runs"
    kinds = {line.split(",")[0] for line in lines[1:]}
    assert kinds == {"crowd", "mu"}
    assert "best crowd: 0" in capsys.readouterr().out


def _write_config(tmp_path, out_name):
    path = tmp_path / "c.ini"
    path.write_text(
        f"""
[workload]
kind = fixed_bias
biases = 0.4, 0.0

[algorithms]
names = rr, ucb

[stopping]
smooth = true
total = true
total_horizon = 100000

[sweep]
thresholds = 1.0, 1.5
runs = 50
seed = 2

[output]
path = {tmp_path / out_name}
""",
        encoding="utf-8",
    )
    return path


def test_sweep_subcommand(tmp_path, capsys):
    cfg = _write_config(tmp_path, "sweep.csv")
    code = main(["sweep", "--config", str(cfg)])
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("threshold,algorithm")
    assert len(lines) == 1 + 4  # 2 algorithms x 2 thresholds
    assert "instance stream checksum" in capsys.readouterr().out


def test_simulate_subcommand_single_point(tmp_path, capsys):
    cfg = _write_config(tmp_path, "sim.csv")
    code = main(["simulate", "--config", str(cfg), "--threshold", "1.25", "--runs", "30"])
    assert code == 0
    lines = (tmp_path / "sim.csv").read_text().splitlines()
    assert len(lines) == 1 + 2  # one threshold, two algorithms
    assert all(line.split(",")[0] == "1.25" for line in lines[1:])
