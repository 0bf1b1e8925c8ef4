import json
import math

import numpy as np
import pytest

from onebit_relay.channel import ConfigurationError
from onebit_relay.harness import (CSV_HEADER, ExperimentSpec, ResultRow,
                                  export_dataset, intervals_overlap,
                                  oracle_checks, read_results_csv,
                                  rows_to_csv, run_sweep, summarize,
                                  wilson_interval)


def make_spec(**kw):
    d = {
        "n_users": 2, "relay_counts": [3], "n_antennas": 4,
        "constellation": "qpsk", "snr_db": [20.0, 15.0], "sweep": [],
        "detectors": ["AML"], "pilots_per_input": 4, "symbols_per_trial": 200,
        "trials": 1, "seed": 0,
    }
    d.update(kw)
    return ExperimentSpec.from_json_dict(d)


def test_wilson_interval_basics():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    # hand-computed Wilson bounds for p_hat = 0.1, n = 1000, z = 1.96
    lo, hi = wilson_interval(100, 1000)
    assert lo == pytest.approx(0.082905, abs=1e-5)
    assert hi == pytest.approx(0.120153, abs=1e-5)
    assert wilson_interval(0, 0) == (pytest.approx(float("nan"), nan_ok=True),) * 2


def test_intervals_overlap():
    assert intervals_overlap((0.1, 0.3), (0.25, 0.5))
    assert not intervals_overlap((0.1, 0.2), (0.25, 0.5))


def test_zero_symbols_gives_nan_sentinel():
    rows = run_sweep(make_spec(symbols_per_trial=0))
    assert len(rows) == 1
    assert rows[0].n == 0
    assert math.isnan(rows[0].ser) and math.isnan(rows[0].svep)
    # and the CSV round-trips the sentinel
    csv = rows_to_csv(rows)
    assert ",nan," in csv


def test_noiseless_detectors_are_error_free():
    # seed chosen so all 16 codewords are distinct
    spec = make_spec(snr_db=[math.inf, math.inf], detectors=["ML", "AML"],
                     symbols_per_trial=100, seed=3)
    rows = run_sweep(spec)
    assert all(r.err == 0 and r.n == 200 for r in rows)


def test_ser_bounded_by_svep():
    spec = make_spec(detectors=["AML", "ZF", "LMMSE"], snr_db=[15.0, 10.0],
                     symbols_per_trial=400, trials=2, seed=5)
    for r in run_sweep(spec):
        assert r.ser <= r.svep <= 1.0
        assert r.err <= r.n


def test_sweep_rows_cover_grid_and_detectors():
    spec = make_spec(sweep=[[2, [5.0, 10.0, 15.0]]], detectors=["AML", "ZF"],
                     symbols_per_trial=50)
    rows = run_sweep(spec)
    assert [(r.detector, r.snr2_db) for r in rows] == [
        ("AML", 5.0), ("ZF", 5.0), ("AML", 10.0), ("ZF", 10.0),
        ("AML", 15.0), ("ZF", 15.0)]
    assert all(r.snr1_db == 20.0 for r in rows)


def test_sweep_deterministic_given_seed():
    spec = make_spec(sweep=[[2, [8.0, 12.0]]], detectors=["AML", "ONLINE"],
                     trials=2, symbols_per_trial=100, seed=11)
    a = rows_to_csv(run_sweep(spec))
    b = rows_to_csv(run_sweep(spec))
    assert a == b


def test_ml_ser_trend_with_snr():
    spec = make_spec(detectors=["ML"], sweep=[[2, [0.0, 10.0, 20.0]]],
                     symbols_per_trial=600, trials=2, seed=13)
    rows = run_sweep(spec)
    sers = [r.ser for r in rows]
    slack = [3 * math.sqrt(max(s * (1 - s), 1e-9) / r.n) for s, r in zip(sers, rows)]
    assert sers[1] <= sers[0] + slack[0]
    assert sers[2] <= sers[1] + slack[1]


def test_ml_skipped_over_state_cap():
    spec = make_spec(detectors=["ML", "AML"], state_cap=4, symbols_per_trial=50)
    rows = run_sweep(spec)
    ml = [r for r in rows if r.detector == "ML"][0]
    assert ml.n == 0 and "skipped" in ml.note
    aml = [r for r in rows if r.detector == "AML"][0]
    assert aml.n > 0


def test_ml_skipped_on_time_varying():
    spec = make_spec(detectors=["ML", "ONLINE", "LMMSE"], symbols_per_trial=30,
                     time_varying={"normalized_doppler": 0.01})
    rows = run_sweep(spec)
    by_det = {r.detector: r for r in rows}
    assert by_det["ML"].n == 0 and "skipped" in by_det["ML"].note
    assert by_det["ONLINE"].n == 60
    assert by_det["LMMSE"].n == 60
    assert by_det["ONLINE"].fdts == 0.01


def test_csv_round_trip(tmp_path):
    spec = make_spec(sweep=[[2, [7.0]]], detectors=["AML", "ZF"], symbols_per_trial=80)
    rows = run_sweep(spec)
    path = tmp_path / "out.csv"
    summarize(rows, path)
    parsed = read_results_csv(path)
    assert len(parsed) == len(rows)
    for a, b in zip(parsed, rows):
        assert a.detector == b.detector
        assert a.snr1_db == b.snr1_db and a.snr2_db == b.snr2_db
        assert a.err == b.err and a.n == b.n
        assert a.ser == b.ser and a.svep == b.svep
        assert a.ci_lo == b.ci_lo and a.ci_hi == b.ci_hi
        assert a.wall_time == 0.0  # timing is not part of the reproducible CSV


def test_empty_rows_give_header_only_csv(tmp_path):
    path = tmp_path / "empty.csv"
    summarize([], path)
    assert path.read_text() == CSV_HEADER + "\n"
    assert read_results_csv(path) == []


def test_seed_is_mandatory():
    with pytest.raises((ConfigurationError, KeyError, TypeError)):
        ExperimentSpec.from_json_dict({
            "n_users": 1, "relay_counts": [2], "n_antennas": 2,
            "snr_db": [10, 10], "detectors": ["AML"]})


def test_unknown_detector_rejected():
    with pytest.raises(ConfigurationError):
        make_spec(detectors=["AML", "SPHERE"])


def test_spec_json_roundtrip():
    spec = make_spec(sweep=[[2, [5.0, 10.0]]], detectors=["ML", "AML"],
                     time_varying={"normalized_doppler": 0.005})
    again = ExperimentSpec.from_json_dict(spec.to_json_dict())
    assert again == spec


def test_export_dataset_counts_and_schedule(tmp_path):
    spec = make_spec(pilots_per_input=2, symbols_per_trial=10, n_antennas=4,
                     relay_counts=[3], seed=21)
    (point_dir,) = export_dataset(spec, tmp_path)
    lines = (point_dir / "train.csv").read_text().splitlines()
    assert lines[0] == "label," + ",".join(f"b{i}" for i in range(8))
    labels = [int(line.split(",")[0]) for line in lines[1:]]
    assert labels == list(np.repeat(np.arange(16), 2))  # 32 rows, schedule order
    values = {int(v) for line in lines[1:] for v in line.split(",")[1:]}
    assert values <= {-1, 1}
    test_lines = (point_dir / "test.csv").read_text().splitlines()
    assert len(test_lines) == 11
    meta = json.loads((point_dir / "meta.json").read_text())
    assert meta["num_classes"] == 16
    assert meta["vector_length"] == 8
    assert meta["train_rows"] == 32 and meta["test_rows"] == 10
    assert meta["reference"]["detector"] == "AML"


def test_export_dataset_reproducible(tmp_path):
    spec = make_spec(pilots_per_input=3, symbols_per_trial=20, seed=22)
    a = export_dataset(spec, tmp_path / "a")
    b = export_dataset(spec, tmp_path / "b")
    for pa, pb in zip(a, b):
        for name in ("train.csv", "test.csv", "meta.json"):
            assert (pa / name).read_bytes() == (pb / name).read_bytes()


def test_export_rejects_time_varying(tmp_path):
    spec = make_spec(time_varying={"normalized_doppler": 0.01})
    with pytest.raises(ConfigurationError):
        export_dataset(spec, tmp_path)


def test_oracle_checks_pass():
    assert all(ok for _, ok, _ in oracle_checks(seed=1))
