import io
import json

import numpy as np
import pytest

from aftermeasure import __version__
from aftermeasure.cli import DEFAULT_SEED, run
from aftermeasure.ensemble import entry_records_from_csv
from aftermeasure.serialization import matrix_to_json, resolution_to_json, rows_from_csv


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    status = run(list(argv), stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def call_json(*argv):
    status, out, err = call(*argv)
    return status, json.loads(out)


@pytest.fixture
def files(tmp_path, sic2):
    paths = {}
    for name, obj in {
        "sic2": resolution_to_json(sic2),
        "wo": matrix_to_json(np.eye(2) / 2),
        "q1": matrix_to_json(sic2.projectors[0]),
        "bad": matrix_to_json(np.diag([1.5, -0.5])),
        "wo3": matrix_to_json(np.eye(3) / 3),
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj))
        paths[name] = str(p)
    return paths


def test_volumes():
    status, payload = call_json("volumes", "--dim", "2")
    assert status == 0
    assert payload["v_am_over_vw"] == pytest.approx(0.037037, abs=1e-6)
    for key in ("version", "dim", "seed", "tolerance"):
        assert key in payload
    assert payload["version"] == __version__


def test_volumes_csv_roundtrip():
    status, out, _ = call("volumes", "--dim", "2", "--max-dim", "8", "--format", "csv")
    assert status == 0
    rows = rows_from_csv(out)
    assert [r["dim"] for r in rows] == list(range(2, 9))
    assert rows[0]["v_am_over_vw"] == pytest.approx(1 / 27, rel=1e-15)


def test_volumes_range_json():
    status, payload = call_json("volumes", "--dim", "2", "--max-dim", "4")
    assert status == 0 and len(payload["rows"]) == 3


def test_tomo_check():
    status, payload = call_json("tomo-check", "--a", "0.5", "--b", "0.6")
    assert status == 0
    assert payload["consistent"] is False
    assert payload["interval"] == [-0.5, 0.5]
    status, payload = call_json("tomo-check", "--a", "0.5", "--b", "0.5")
    assert payload["consistent"] is True
    status, _, err = call("tomo-check", "--a", "1.5", "--b", "0")
    assert status == 2


def test_sic_verify(tmp_path):
    status, payload = call_json("sic", "verify", "--dim", "2")
    assert status == 0 and payload["max_deviation"] < 1e-12 and payload["complete"] is True
    status, _, _ = call("sic", "verify", "--dim", "4")
    assert status == 2


def test_sic_find_and_verify_archive(tmp_path):
    out = tmp_path / "fid.json"
    status, payload = call_json("sic", "find", "--dim", "4", "--seed", "3", "--restarts", "5", "--output", str(out))
    assert status == 0 and payload["converged"] and payload["residual"] < 1e-8
    status, payload = call_json("sic", "verify", "--dim", "4", "--fiducial", str(out))
    assert status == 0 and payload["max_deviation"] < 1e-6
    assert payload["provenance"] == "optimized"


def test_sic_find_nonconvergence_exit_3():
    status, payload = call_json("sic", "find", "--dim", "3", "--restarts", "1", "--max-iters", "3")
    assert status == 3
    assert payload["converged"] is False


def test_channel_apply(files):
    status, payload = call_json("channel", "apply", "--resolution", files["sic2"], "--state", files["q1"])
    assert status == 0
    assert payload["probabilities"] == pytest.approx([0.5, 1 / 6, 1 / 6, 1 / 6])
    re = np.array(payload["state"]["re"])
    assert np.trace(re) == pytest.approx(1)
    assert call("channel", "apply", "--resolution", files["sic2"], "--state", files["bad"])[0] == 2
    assert call("channel", "apply", "--resolution", files["sic2"], "--state", files["wo3"])[0] == 2


def test_membership(files):
    status, payload = call_json("membership", "--resolution", files["sic2"], "--state", files["q1"])
    assert status == 0
    assert payload["in_conv"] is True and payload["in_v_am"] is False  # verdict, not an error


def test_mc_volume():
    status, payload = call_json("mc-volume", "--dim", "2", "--region", "vam", "--n", "100000", "--seed", "5")
    assert status == 0
    assert abs(payload["estimate"] - 1 / 27) < 3 * payload["standard_error"]
    assert payload["measure"] == "hilbert-schmidt"


def test_simulate_entry(files):
    status, payload = call_json("simulate", "entry", "--dim", "2", "--state", files["wo"], "--max-n", "1000",
                                "--step", "1", "--seed", "9", "--trajectories", "20")
    assert status == 0
    assert payload["summary"]["entered"] == 20
    status, out, _ = call("simulate", "entry", "--dim", "2", "--max-n", "1", "--state", files["q1"],
                          "--trajectories", "3", "--format", "csv")
    recs = entry_records_from_csv(out)
    assert len(recs) == 3 and all(r.n_entry is None for r in recs)


def test_naimark_check(files):
    status, payload = call_json("naimark", "check", "--resolution", files["sic2"], "--trials", "100", "--seed", "1")
    assert status == 0
    assert payload["equivalent"] is True
    assert payload["max_probability_deviation"] < 1e-10


def test_usage_errors():
    assert call()[0] == 1
    assert call("bogus")[0] == 1
    assert call("volumes")[0] == 1
    assert call("volumes", "--dim", "two")[0] == 1
    assert call("mc-volume", "--dim", "2", "--region", "ball")[0] == 1


def test_missing_file_is_input_error(tmp_path):
    status, _, err = call("membership", "--resolution", str(tmp_path / "nope.json"), "--state", "x")
    assert status == 2


def test_byte_identical_output():
    argv = ("mc-volume", "--dim", "2", "--region", "conv", "--n", "20000", "--seed", "11")
    assert call(*argv)[1] == call(*argv)[1]
    argv = ("simulate", "entry", "--dim", "2", "--trajectories", "5")
    assert call(*argv)[1] == call(*argv)[1]


def test_default_seed_and_env_override(monkeypatch):
    _, payload = call_json("mc-volume", "--dim", "2", "--region", "conv", "--n", "1000")
    assert payload["seed"] == DEFAULT_SEED
    monkeypatch.setenv("AFTERMEASURE_SEED", "77")
    monkeypatch.setenv("AFTERMEASURE_TOL", "1e-8")
    _, payload = call_json("mc-volume", "--dim", "2", "--region", "conv", "--n", "1000")
    assert payload["seed"] == 77 and payload["tolerance"] == 1e-8
    _, payload = call_json("mc-volume", "--dim", "2", "--region", "conv", "--n", "1000", "--seed", "3")
    assert payload["seed"] == 3
