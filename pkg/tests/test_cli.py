import json
import subprocess
import sys

import pytest

from tezos_reorg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_estimate_enum(capsys):
    code, out, err = run(capsys, "estimate", "--alpha", "0.3", "--length", "2", "--method", "enum")
    assert code == 0
    res = json.loads(out)
    assert out.count("\n") == 1
    assert res["p_hat"] == pytest.approx(0.081157, abs=1e-5)
    assert "manifest:" in err and "manifest" not in out


def test_estimate_mean_cost(capsys):
    code, out, _ = run(capsys, "estimate", "--alpha", "0.45", "--length", "8", "--samples", "20000",
                       "--target", "mean-cost", "--seed", "2")
    assert code == 0
    assert json.loads(out)["mean_cost"] > 0


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["estimate", "--alpha", "0.6", "--length", "1"], "(0, 0.5)"),
        (["estimate", "--alpha", "0", "--length", "1"], "(0, 0.5)"),
        (["estimate", "--alpha", "0.3", "--length", "1", "--params", "33,8,40"], "[0, 32]"),
        (["sweep", "--alpha", "0.45", "--beta", "1.5"], "[0, 1]"),
        (["estimate", "--alpha", "0.3", "--length", "2", "--method", "is", "--alpha-q", "0.2"], "alpha-q"),
        (["simulate", "--alpha", "0.5"], "[0, 0.5)"),
        (["estimate", "--alpha", "0.3", "--length", "1", "--bogus"], "unrecognized"),
    ],
)
def test_usage_errors(capsys, argv, needle):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert needle in capsys.readouterr().err


def test_budget_exceeded_is_runtime_error(capsys):
    code, out, err = run(capsys, "estimate", "--alpha", "0.3", "--length", "5", "--method", "enum")
    assert code == 1
    assert out == ""
    assert "budget" in err


def test_simulate_then_health(capsys, tmp_path):
    chain = tmp_path / "c.jsonl"
    code, _, _ = run(capsys, "simulate", "--alpha", "0", "--blocks", "100", "--min-attack", "2", "--seed", "1",
                     "--out", str(chain))
    assert code == 0
    assert (tmp_path / "c.jsonl.manifest.json").exists()
    code, out, _ = run(capsys, "health", "--chain", str(chain), "--window", "40")
    lines = out.splitlines()
    assert lines[0] == "slot,health"
    assert len(lines) == 101
    assert {line.split(",")[1] for line in lines[1:]} == {"40.0"}


def test_simulate_events_and_trace(capsys, tmp_path):
    chain, events, trace = (tmp_path / n for n in ("c.jsonl", "e.jsonl", "t.csv"))
    run(capsys, "simulate", "--alpha", "0.375", "--blocks", "968", "--min-attack", "8", "--seed", "0",
        "--out", str(chain), "--events", str(events), "--trace", str(trace))
    evs = [json.loads(x) for x in events.read_text().splitlines()]
    assert evs and set(evs[0]) == {"executed_at", "fork_length"}
    values = dict(line.split(",") for line in trace.read_text().splitlines()[1:])
    assert all(values[str(e["executed_at"])] == "0.0" for e in evs)


def test_health_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "health", "--chain", str(tmp_path / "nope.jsonl"))
    assert code == 1


def test_sweep_and_compare(capsys, tmp_path):
    sweep = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--alpha", "0.45", "--n1", "6", "--n2", "3", "--samples", "5000",
                     "--grid", "ei=16:24:8,de=8:8:1,dp=40:40:1", "--include", "15,5,8", "--out", str(sweep))
    assert code == 0
    rows = sweep.read_text().splitlines()
    assert rows[0].startswith("ei,de,dp,o1")
    assert len(rows) == 4
    code, out, _ = run(capsys, "compare", "--from", str(sweep), "--candidates", "24,8,40;15,5,8",
                       "--beta-list", "0.1:0.9:0.4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "beta,candidate,ratio"
    assert [line.split(",")[0] for line in lines[1::2]] == ["0.1", "0.5", "0.9"]
    assert all(0 <= float(line.rsplit(",", 1)[1]) <= 1 for line in lines[1:])


def test_compare_missing_candidate(capsys, tmp_path):
    sweep = tmp_path / "s.csv"
    sweep.write_text("ei,de,dp,o1,o1_lo,o1_hi,o2,o2_lo,o2_hi,objective\n24,8,40,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n")
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--from", str(sweep), "--candidates", "15,5,8"])
    assert exc.value.code == 2


def test_sweep_smooth(capsys):
    code, out, _ = run(capsys, "sweep", "--alpha", "0.45", "--n1", "4", "--n2", "2", "--samples", "2000",
                       "--grid", "ei=16:24:8,de=4:8:4,dp=0:0:1", "--smooth", "1")
    assert code == 0
    assert out.splitlines()[0].endswith(",smoothed")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tezos_reorg.cli", "estimate", "--alpha", "0.9", "--length", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "(0, 0.5)" in proc.stderr


def test_failed_run_leaves_out_untouched(capsys, tmp_path):
    target = tmp_path / "keep.json"
    target.write_text("previous\n")
    with pytest.raises(SystemExit):
        main(["estimate", "--alpha", "0.7", "--length", "2", "--out", str(target)])
    assert run(capsys, "estimate", "--alpha", "0.3", "--length", "5", "--method", "enum", "--out", str(target))[0] == 1
    assert target.read_text() == "previous\n"
