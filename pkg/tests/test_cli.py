"""CLI contract: exit codes, JSON-only stdout, determinism, serve integration."""

import json
import os
import re
import signal
import subprocess
import sys
import time
from pathlib import Path

import pytest

from helpers import demo_scenario_dict, two_state_dict
from rvse.cli import main
from rvse.client import ApiError, RepositoryClient

PERFECT_SCRIPT = [
    {"t_ms": 30000, "action_id": "check-airway"},
    {"t_ms": 60000, "action_id": "give-antibiotics"},
    {"t_ms": 90000, "action_id": "give-fluids"},
    {"final_t_ms": 600000},
]

TOKENS = {
    "tok-creator": {"name": "alice", "role": "creator"},
    "tok-lana": {"name": "lana", "role": "learner", "cohort_id": "alpha"},
}


@pytest.fixture
def demo_path(tmp_path):
    path = tmp_path / "demo.rvs.json"
    path.write_text(json.dumps(demo_scenario_dict()))
    return path


def run_main(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_clean(capsys, demo_path):
    code, out, _ = run_main(capsys, "validate", str(demo_path))
    assert code == 0
    report = json.loads(out)
    assert report["deployable"] is True
    assert report["errors"] == []


def test_validate_findings(capsys, tmp_path):
    doc = demo_scenario_dict()
    doc["states"]["s3"]["on_timeout"] = "nosuch"
    path = tmp_path / "bad.rvs.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_main(capsys, "validate", str(path))
    assert code == 1
    report = json.loads(out)
    assert [f["code"] for f in report["errors"]] == ["E1"]


def test_validate_schema_error_is_finding(capsys, tmp_path):
    path = tmp_path / "broken.rvs.json"
    path.write_text("{\"id\": 5}")
    code, out, _ = run_main(capsys, "validate", str(path))
    assert code == 1
    assert json.loads(out)["errors"][0]["code"] == "SCHEMA"


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run_main(capsys, "validate", str(tmp_path / "nope.rvs.json"))
    assert code == 3
    assert "cannot read" in err


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_perfect_script(capsys, demo_path, tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(PERFECT_SCRIPT))
    out_path = tmp_path / "log.events.jsonl"
    code, out, _ = run_main(capsys, "run", str(demo_path),
                            "--script", str(script), "--out", str(out_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["outcome"] == "stabilized"
    assert summary["score"] == 100.0
    last = json.loads(out_path.read_text().splitlines()[-1])
    assert last["kind"] == "session_end"
    assert last["payload"]["outcome"] == "stabilized"


def test_run_without_script_is_pure_deterioration(capsys, demo_path, tmp_path):
    out_path = tmp_path / "log.events.jsonl"
    code, out, _ = run_main(capsys, "run", str(demo_path), "--out", str(out_path))
    assert code == 0
    assert json.loads(out)["outcome"] == "deceased"


def test_run_twice_is_byte_identical(capsys, demo_path, tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(PERFECT_SCRIPT))
    a, b = tmp_path / "a.events.jsonl", tmp_path / "b.events.jsonl"
    for out_path in (a, b):
        code, _, _ = run_main(capsys, "run", str(demo_path),
                              "--script", str(script), "--out", str(out_path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_invalid_scenario(capsys, tmp_path):
    doc = demo_scenario_dict()
    doc["states"]["s1"]["on_timeout"] = "nosuch"
    path = tmp_path / "bad.rvs.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_main(capsys, "run", str(path), "--out", str(tmp_path / "x"))
    assert code == 1
    assert "E1" in err


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def test_synth_writes_deterministic_logs(capsys, demo_path, tmp_path):
    out1, out2 = tmp_path / "c1", tmp_path / "c2"
    for out_dir in (out1, out2):
        code, out, _ = run_main(capsys, "synth", "--scenario", str(demo_path),
                                "--profile", "competent", "--n", "3",
                                "--seed", "7", "--out", str(out_dir))
        assert code == 0
        assert len(json.loads(out)["written"]) == 3
    names = sorted(p.name for p in out1.glob("*.events.jsonl"))
    assert names == sorted(p.name for p in out2.glob("*.events.jsonl"))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        last = json.loads((out1 / name).read_text().splitlines()[-1])
        assert last["payload"]["outcome"] == "stabilized"


def test_synth_unknown_profile(capsys, demo_path, tmp_path):
    code, _, err = run_main(capsys, "synth", "--scenario", str(demo_path),
                            "--profile", "genius", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "bad profile" in err


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def synth_dir(capsys, demo_path, tmp_path, profile, seed, prefix):
    out_dir = tmp_path / "events"
    code, _, _ = run_main(capsys, "synth", "--scenario", str(demo_path),
                          "--profile", profile, "--n", "12", "--seed", str(seed),
                          "--out", str(out_dir), "--learner-prefix", prefix)
    assert code == 0
    return out_dir


def cohorts_file(tmp_path, events_dir):
    mapping = {}
    for path in events_dir.glob("*.events.jsonl"):
        first = json.loads(path.read_text().splitlines()[0])
        learner = first["payload"]["learner_id"]
        mapping[learner] = learner.split("-L")[0]
    path = tmp_path / "cohorts.json"
    path.write_text(json.dumps(mapping))
    return path


def test_analyze_healthy_cohort(capsys, demo_path, tmp_path):
    events = synth_dir(capsys, demo_path, tmp_path, "competent", 1, "alpha")
    cohorts = cohorts_file(tmp_path, events)
    out_dir = tmp_path / "dash"
    code, out, _ = run_main(capsys, "analyze", "--events", str(events),
                            "--cohorts", str(cohorts), "--out", str(out_dir))
    assert code == 0
    assert json.loads((out_dir / "alarms.json").read_text()) == []
    assert json.loads(out)["alarms"] == []
    cohort_files = list(out_dir.glob("cohort_alpha__*.json"))
    assert len(cohort_files) == 1
    dash = json.loads(cohort_files[0].read_text())
    assert dash["n_sessions"] == 12
    assert dash["outcome_rates"]["stabilized"] == 1.0
    assert len(list(out_dir.glob("learner_*.json"))) == 12


def test_analyze_confused_cohorts_trip_d1(capsys, demo_path, tmp_path):
    events = tmp_path / "events"
    for seed, prefix in ((1, "alpha"), (2, "beta")):
        code, _, _ = run_main(capsys, "synth", "--scenario", str(demo_path),
                              "--profile", "confused_at:s2", "--n", "12",
                              "--seed", str(seed), "--out", str(events),
                              "--learner-prefix", prefix)
        assert code == 0
    cohorts = cohorts_file(tmp_path, events)
    out_dir = tmp_path / "dash"
    code, out, _ = run_main(capsys, "analyze", "--events", str(events),
                            "--cohorts", str(cohorts), "--out", str(out_dir))
    assert code == 1  # alarms emitted -> CI-visible
    alarms = json.loads((out_dir / "alarms.json").read_text())
    assert [a["detector_id"] for a in alarms] == ["D1"]
    assert alarms[0]["locus"] == "s2"


def test_analyze_empty_dir(capsys, tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    code, _, err = run_main(capsys, "analyze", "--events", str(empty),
                            "--out", str(tmp_path / "dash"))
    assert code == 3
    assert "no .events.jsonl" in err


def test_analyze_skips_corrupt_logs(capsys, demo_path, tmp_path):
    events = synth_dir(capsys, demo_path, tmp_path, "competent", 1, "alpha")
    (events / "junk.events.jsonl").write_text("not json\n")
    out_dir = tmp_path / "dash"
    code, out, err = run_main(capsys, "analyze", "--events", str(events),
                              "--out", str(out_dir))
    assert code == 0
    assert "skipping corrupt log junk" in err
    assert json.loads(out)["sessions"] == 12


# ---------------------------------------------------------------------------
# serve (subprocess integration)
# ---------------------------------------------------------------------------


def start_server(tmp_path, tokens=TOKENS):
    repo = tmp_path / "repo"
    repo.mkdir(exist_ok=True)
    tokens_path = tmp_path / "tokens.json"
    tokens_path.write_text(json.dumps(tokens))
    proc = subprocess.Popen(
        [sys.executable, "-m", "rvse", "serve", "--repo-dir", str(repo),
         "--port", "0", "--tokens", str(tokens_path)],
        stderr=subprocess.PIPE, text=True,
    )
    line = proc.stderr.readline()
    match = re.search(r"serving on (http://[\d.]+:\d+)", line)
    assert match, f"no serving line, got: {line!r}"
    return proc, match.group(1)


def test_serve_upload_fetch_stop(tmp_path):
    proc, base_url = start_server(tmp_path)
    try:
        creator = RepositoryClient(base_url, "tok-creator")
        learner = RepositoryClient(base_url, "tok-lana")
        receipt = creator.upload_scenario(json.dumps(demo_scenario_dict()).encode())
        data, header_checksum = learner.fetch_scenario("sepsis-ward", 1)
        assert header_checksum == receipt["checksum"]
        with pytest.raises(ApiError) as exc:
            RepositoryClient(base_url, "").catalog()
        assert exc.value.status == 401
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)


def test_serve_bad_tokens_file(tmp_path):
    repo = tmp_path / "repo"
    repo.mkdir()
    tokens_path = tmp_path / "tokens.json"
    tokens_path.write_text("{\"tok\": {\"role\": \"emperor\"}}")
    proc = subprocess.run(
        [sys.executable, "-m", "rvse", "serve", "--repo-dir", str(repo),
         "--port", "0", "--tokens", str(tokens_path)],
        capture_output=True, text=True, timeout=30,
    )
    assert proc.returncode == 3
    assert "tokens" in proc.stderr


def test_serve_missing_repo_dir(tmp_path):
    tokens_path = tmp_path / "tokens.json"
    tokens_path.write_text(json.dumps(TOKENS))
    proc = subprocess.run(
        [sys.executable, "-m", "rvse", "serve", "--repo-dir",
         str(tmp_path / "missing"), "--port", "0", "--tokens", str(tokens_path)],
        capture_output=True, text=True, timeout=30,
    )
    assert proc.returncode == 3
