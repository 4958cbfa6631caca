import csv
import json

import numpy as np
import pytest

from qhash.cli import main
from qhash.errors import ParseError
from qhash.goodset import SamplerConfig, sample_key, verify_good
from qhash.groups import GroupSpec, unit_group
from qhash.hashing import HashParams, hash_state
from qhash.records import (
    RunManifest,
    make_record,
    parse_key,
    read_key_file,
    read_state_file,
    validate_payload,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 and out.strip() else None)


def read_sweep(path):
    with open(path) as fh:
        first = fh.readline()
        assert first.startswith("# ")
        manifest = json.loads(first[2:])
        rows = list(csv.DictReader(fh))
    return manifest, rows


# --- build --------------------------------------------------------------------------


def test_build_state_file(capsys, tmp_path):
    out = tmp_path / "state.json"
    code, rec = run(capsys, "build", "--group", "5", "--key", "1,2,3,4", "--input", "110", "--out", str(out))
    assert code == 0
    assert rec["kind"] == "state"
    assert rec["payload"]["dimension"] == 8
    assert abs(rec["payload"]["norm"] - 1) < 1e-12
    spec, state, manifest = read_state_file(out)
    expected = hash_state(HashParams(spec, tuple(unit_group(spec))), "110")
    assert np.array_equal(state.amplitudes, expected.amplitudes)
    assert all(manifest[k] not in (None, "", []) for k in manifest)


def test_build_empty_input(capsys):
    code, rec = run(capsys, "build", "--group", "3x5", "--key", "1x1,2x3")
    assert code == 0 and rec["payload"]["element"] == [0, 0]


def test_build_sampled_key(capsys):
    code, rec = run(capsys, "build", "--group", "7", "--size", "5", "--seed", "3", "--input", "1")
    assert code == 0 and rec["payload"]["dims"] == {"t": 5, "m": 1}


@pytest.mark.parametrize("group", ["5xx3", "x", "1", "abc"])
def test_build_malformed_group(capsys, group):
    assert main(["build", "--group", group, "--key", "1"]) == 2


def test_build_bad_key_is_usage_error(capsys):
    assert main(["build", "--group", "4", "--key", "2"]) == 2
    assert main(["build", "--group", "5"]) == 2


def test_capacity_exit(capsys, monkeypatch):
    monkeypatch.setenv("QHASH_GUARD", "10")
    assert main(["goodset", "--group", "5x5", "--mode", "verify", "--key", "1x1", "--epsilon", "0.5"]) == 3


def test_io_exit(capsys, tmp_path):
    bad = tmp_path / "missing" / "state.json"
    assert main(["build", "--group", "5", "--key", "1", "--out", str(bad)]) == 4


# --- overlap -------------------------------------------------------------------------


def test_overlap_commands(capsys):
    _, rec = run(capsys, "overlap", "--group", "5", "--key", "1,2,3,4", "--x", "101", "--y", "101")
    assert rec["payload"]["overlap_sq"] == 1.0 and not rec["payload"]["below_epsilon"]
    _, rec = run(capsys, "overlap", "--group", "5", "--key", "units", "--x", "0", "--y", "1")
    assert abs(rec["payload"]["overlap_sq"] - 0.0625) < 1e-12 and rec["payload"]["below_epsilon"]
    _, rec = run(capsys, "overlap", "--group", "2", "--key", "1", "--x", "0", "--y", "1")
    assert abs(rec["payload"]["overlap_sq"] - 1.0) < 1e-12


# --- goodset ----------------------------------------------------------------------------


def test_goodset_verify(capsys):
    _, rec = run(capsys, "goodset", "--group", "5", "--mode", "verify", "--key", "1,2,3,4", "--epsilon", "0.1")
    assert rec["payload"]["is_good"] is True
    assert abs(rec["payload"]["delta"] - 0.0625) < 1e-12


def test_goodset_bias(capsys):
    _, rec = run(capsys, "goodset", "--group", "5", "--mode", "bias")
    assert abs(rec["payload"]["max_abs_bias"] - 0.25) < 1e-12
    assert rec["payload"]["claimed_zero"] is False
    _, rec = run(capsys, "goodset", "--group", "7", "--mode", "bias", "--diagnostic")
    assert rec["payload"]["claimed_zero"] is True


def test_goodset_search(capsys):
    _, rec = run(capsys, "goodset", "--group", "5", "--mode", "search", "--epsilon", "0.1", "--size", "4")
    assert rec["payload"]["found"] and rec["payload"]["t_min"] == 2
    assert rec["payload"]["multipliers"] == [[1], [2]]
    _, rec = run(capsys, "goodset", "--group", "2", "--mode", "search", "--epsilon", "0.5", "--size", "3")
    assert rec["payload"]["found"] is False


def test_goodset_montecarlo(capsys):
    _, rec = run(
        capsys, "goodset", "--group", "101", "--mode", "montecarlo", "--epsilon", "0.2",
        "--size", "47", "--trials", "1000", "--seed", "7", "--fixed-g", "1",
    )
    p = rec["payload"]
    assert p["rate"] <= p["bound"] + 3 * p["stderr"]
    assert p["fixed_g"] == [1]


@pytest.mark.parametrize("trials", ["0", "50"])
def test_goodset_montecarlo_trials_validation(capsys, trials):
    assert main(["goodset", "--group", "5", "--mode", "montecarlo", "--size", "4", "--trials", trials]) == 2


def test_goodset_missing_mode_params(capsys):
    assert main(["goodset", "--group", "5", "--mode", "verify"]) == 2
    assert main(["goodset", "--group", "5", "--mode", "sample"]) == 2
    assert main(["goodset", "--group", "5"]) == 2  # argparse: --mode required


def test_sample_then_verify_round_trip(capsys, tmp_path):
    keyfile = tmp_path / "key.json"
    _, sampled = run(capsys, "goodset", "--group", "4x9", "--mode", "sample", "--size", "12",
                     "--seed", "17", "--epsilon", "0.3", "--out", str(keyfile))
    _, verified = run(capsys, "goodset", "--group", "4x9", "--mode", "verify", "--key", str(keyfile),
                      "--epsilon", "0.3")
    a, b = dict(sampled["payload"]), dict(verified["payload"])
    a.pop("mode"), b.pop("mode")
    assert a == b
    spec, key, manifest = read_key_file(keyfile)
    assert spec == GroupSpec((4, 9)) and len(key) == 12
    assert manifest["seed"] == 17 and manifest["command"] == "goodset:sample"


def test_key_file_group_mismatch(capsys, tmp_path):
    keyfile = tmp_path / "key.json"
    run(capsys, "goodset", "--group", "5", "--mode", "sample", "--size", "3", "--out", str(keyfile))
    assert main(["goodset", "--group", "7", "--mode", "verify", "--key", str(keyfile)]) == 2


def test_malformed_key_file(capsys, tmp_path):
    keyfile = tmp_path / "key.json"
    keyfile.write_text("{not json")
    assert main(["goodset", "--group", "5", "--mode", "verify", "--key", str(keyfile)]) == 2


# --- bounds -------------------------------------------------------------------------------


def test_bounds(capsys):
    _, rec = run(capsys, "bounds", "--epsilon", "0.1", "--order", "1024")
    assert rec["payload"]["paper_size"] == 139
    _, rec = run(capsys, "bounds", "--epsilon", "1.0", "--order", "3", "--union")
    assert rec["payload"]["paper_size"] == 3
    assert rec["payload"]["selected"] == "union"
    assert main(["bounds", "--epsilon", "0", "--order", "3"]) == 2
    _, rec = run(capsys, "bounds", "--epsilon", "0.2", "--group", "101")
    assert rec["payload"]["paper_size"] == 47


# --- sweep -------------------------------------------------------------------------------


def test_sweep_single_point(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, rec = run(capsys, "sweep", "--group", "11", "--epsilon", "0.3", "--size", "8", "--out", str(out))
    assert code == 0 and rec["payload"]["rows"] == 1
    _, rows = read_sweep(out)
    assert len(rows) == 1


def test_sweep_cardinality_and_recheck(capsys, tmp_path):
    out = tmp_path / "s.csv"
    run(capsys, "sweep", "--group", "101", "--epsilon", "0.1,0.2", "--size", "20,47",
        "--seed", "1", "--seeds", "5", "--out", str(out))
    manifest, rows = read_sweep(out)
    assert len(rows) == 20
    assert list(rows[0]) == ["group", "epsilon", "t", "seed", "delta", "is_good",
                             "azuma_bound", "bad_rate", "stderr"]
    assert manifest["seed"] == [1, 2, 3, 4, 5]
    spec = GroupSpec((101,))
    for row in rows[:6]:
        cfg = SamplerConfig(spec, int(row["t"]), float(row["epsilon"]), seed=int(row["seed"]))
        rep = verify_good(spec, sample_key(cfg), cfg.epsilon)
        assert float(row["delta"]) == rep.delta  # bit-identical
        assert row["is_good"] == str(rep.is_good).lower()


# --- records ----------------------------------------------------------------------------


def test_payload_schema_rejects_garbage():
    with pytest.raises(ParseError):
        validate_payload("overlap", {"x": "0"})
    with pytest.raises(ParseError):
        validate_payload("nope", {})
    m = RunManifest("bounds", [3], 0.5, 1, 0)
    with pytest.raises(ParseError):
        make_record("bounds", m, {"epsilon": "high"})


def test_parse_key_syntax():
    g = GroupSpec((3, 5))
    assert [k.multipliers for k in parse_key(g, "1x1,2x3")] == [(1, 1), (2, 3)]
    with pytest.raises(ParseError):
        parse_key(g, "1xa")
