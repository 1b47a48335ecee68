import math

import numpy as np
import pytest

from randldc.harness_cli import (
    CONSTRUCTIONS,
    CSV_COLUMNS,
    ExperimentConfig,
    Scheme,
    TrialRecord,
    format_summary,
    main,
    parse_epsilon,
    read_config_file,
    read_csv,
    run_experiment,
    run_trial,
    summarize,
    to_csv,
    wilson_interval,
)

SMALL_K = {c: (16 if c.startswith("edit") else 64) for c in CONSTRUCTIONS}


def eps_for(construction):
    return (0.25, 0.0625) if "flex" in construction else (0.1,)


@pytest.mark.parametrize("construction", CONSTRUCTIONS)
def test_noiseless_trials_are_all_correct(construction):
    cfg = ExperimentConfig(construction, SMALL_K[construction], eps_for(construction), delta=0.0, trials=10)
    records = run_experiment(cfg)
    assert len(records) == 10 * len(cfg.strategy_names()) * len(cfg.epsilon)
    assert all(r.outcome == "correct" for r in records)
    assert all(r.queries_bits >= r.queries_positions > 0 for r in records)


@pytest.mark.parametrize("construction", ["ham-sr", "ham-obl", "edit-sr", "edit-obl"])
def test_configured_delta_trials_mostly_correct(construction):
    cfg = ExperimentConfig(construction, SMALL_K[construction], (0.1,), trials=20)
    rows = summarize(run_experiment(cfg))
    assert all(r.failures <= 6 for r in rows)


def test_csv_is_byte_identical_on_rerun_and_with_workers():
    cfg = ExperimentConfig("ham-obl", 64, (0.1,), trials=8, base_seed=42)
    a = to_csv(cfg, run_experiment(cfg))
    b = to_csv(cfg, run_experiment(cfg))
    c = to_csv(cfg, run_experiment(cfg, workers=2))
    assert a == b == c
    other = ExperimentConfig("ham-obl", 64, (0.1,), trials=8, base_seed=43)
    assert to_csv(other, run_experiment(other)) != a


def test_trial_is_a_pure_function_of_its_coordinates():
    cfg = ExperimentConfig("edit-sr", 16, (0.1,), trials=5, base_seed=3)
    rec = run_experiment(cfg)
    assert run_trial(cfg, rec[7].strategy, 0, rec[7].trial) == rec[7]


def test_csv_round_trip_and_header():
    cfg = ExperimentConfig("ham-flex-sr", 64, (0.25, 0.0625), trials=4, strategies=("burst", "targeted"))
    records = run_experiment(cfg)
    text = to_csv(cfg, records)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    echoes, back = read_csv(text)
    assert back == records
    assert {e["construction"] for e in echoes} == {"ham-flex-sr"}
    assert {e["model"] for e in echoes} == {"shared"}
    assert float(echoes[0]["delta"]) == cfg.resolved_delta
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_summary_recomputes_from_records():
    cfg = ExperimentConfig("ham-sr", 64, (0.1,), trials=12, delta=0.0)
    records = run_experiment(cfg)
    rows = summarize(records)
    for row in rows:
        mine = [r for r in records if r.strategy == row.strategy]
        assert row.trials == len(mine) == 12
        assert row.mean_queries_bits == pytest.approx(np.mean([r.queries_bits for r in mine]))
        assert row.max_queries_bits == max(r.queries_bits for r in mine)
    assert format_summary(rows).count("\n") == len(rows) + 1


def _records(outcomes):
    return [TrialRecord(t, 0, "s", 0.1, o, 5, 5) for t, o in enumerate(outcomes)]


def test_summary_examples():
    (row,) = summarize(_records(["correct"] * 100))
    assert row.failure_rate == 0.0 and row.ci_low == 0.0 and row.ci_high > 0
    (row,) = summarize(_records(["correct", "wrong"] * 50))
    assert row.failure_rate == 0.5
    assert row.ci_low < 0.5 < row.ci_high
    (row,) = summarize(_records(["decode_failure", "correct"]))
    assert row.failures == 1
    with pytest.raises(ValueError):
        summarize([])


def test_wilson_width_shrinks_like_inverse_sqrt():
    widths = []
    for n in (100, 400, 1600):
        lo, hi = wilson_interval(n // 10, n)
        assert lo < 0.1 < hi
        widths.append(hi - lo)
    for a, b in zip(widths, widths[1:]):
        assert a / b == pytest.approx(2.0, rel=0.1)
    # closed form at p = 0.1, n = 400
    z = 1.959963984540054
    n, p = 400, 0.1
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert wilson_interval(40, 400) == pytest.approx((centre - half, centre + half))


def test_validation_errors():
    bad = [
        ExperimentConfig("ham-sr", 64, (0.1,), trials=0),
        ExperimentConfig("ham-sr", 64, (0.1,), delta=0.5),
        ExperimentConfig("ham-sr", 64, (0.1, 0.2)),
        ExperimentConfig("ham-obl", 64, (0.1,), strategies=("targeted",)),
        ExperimentConfig("ham-sr", 64, (0.1,), target="middle"),
        ExperimentConfig("edit-sr", 24, (0.1,)),
    ]
    for cfg in bad:
        with pytest.raises(ValueError):
            cfg.validate()
    with pytest.raises(KeyError):
        ExperimentConfig("ham-sr", 64, (0.1,), strategies=("prefix-delete",)).validate()
    with pytest.raises(ValueError):
        Scheme("rs-ldc", 64, 0.1)


def test_parse_epsilon():
    assert parse_epsilon("0.1") == (0.1,)
    assert parse_epsilon("flex:0.25,0.0625") == (0.25, 0.0625)
    with pytest.raises(ValueError):
        parse_epsilon("fast")


def test_sweep_mode_visits_every_target():
    cfg = ExperimentConfig("ham-sr", 64, (0.1,), trials=64, strategies=("burst",), target="sweep", delta=0.0)
    assert sorted(r.target for r in run_experiment(cfg)) == list(range(64))


# ---------------------------------------------------------------- command line

def test_cli_experiment_with_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# small run\nconstruction = ham-sr\nk = 64\ntrials = 3\nstrategy = burst\n")
    assert read_config_file(conf)["construction"] == "ham-sr"
    out = tmp_path / "out.csv"
    assert main(["experiment", "--config", str(conf), "--trials", "5", "--out", str(out)]) == 0
    _, records = read_csv(out.read_text())
    assert len(records) == 5 and {r.strategy for r in records} == {"burst"}
    assert "failure_rate" in capsys.readouterr().err


def test_cli_encode_decode_round_trip(tmp_path, capsys):
    path = tmp_path / "word.bin"
    msg = "0110100110010110"
    assert main(["encode", "--construction", "edit-sr", "--k", "16", "--seed", "7",
                 "--message", msg, "--out", str(path)]) == 0
    capsys.readouterr()
    assert main(["decode", str(path)]) == 0
    assert capsys.readouterr().out.strip() == msg
    assert main(["decode", str(path), "--index", "1"]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_cli_flexible_decode_accepts_new_epsilon(tmp_path, capsys):
    path = tmp_path / "word.bin"
    assert main(["encode", "--construction", "ham-flex-sr", "--k", "64", "--epsilon", "flex:0.25",
                 "--seed", "3", "--out", str(path)]) == 0
    msg = capsys.readouterr().out.split()[1]
    assert main(["decode", str(path), "--epsilon", "0.01"]) == 0
    assert capsys.readouterr().out.strip() == msg


def test_cli_reports_bad_input(capsys):
    assert main(["experiment", "--construction", "ham-obl", "--k", "64", "--strategy", "targeted"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["experiment", "--k", "64"]) == 2


def test_cli_codebook(capsys):
    assert main(["codebook", "--N", "3", "--check"]) == 0
    out = capsys.readouterr().out
    assert "codewords=8" in out and "pairwise_min_edit_distance=" in out
