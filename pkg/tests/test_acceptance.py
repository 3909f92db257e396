"""Acceptance suite: one test per acceptance criterion, at its stated
tolerance. Each prints an `ACCEPTANCE <name>: PASS` line on success (visible
with -s or in the captured output)."""

import hashlib
import json
import random
import re
import signal
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest

from helpers import demo_scenario_dict, random_scenario, random_script, two_state_dict
from oracle import assert_deep_close, oracle_cohort, oracle_learner, oracle_summary
from rvse.analytics import (
    DetectorConfig,
    SynthProfile,
    aggregate_cohort,
    analyze_corpus,
    detect_troubles,
    learner_dashboard,
    summarize_session,
    synth_cohort,
)
from rvse.client import RepositoryClient
from rvse.engine import ActionScript, EventKind, dump_event_lines, replay
from rvse.scenario import (
    DEFAULT_SESSION_LIMIT_MS,
    canonical_serialize,
    parse_scenario,
    validate,
)
from rvse.service import RepositoryServer
from rvse.store import RepositoryStore, load_principals

DEMOS_DIR = Path(__file__).resolve().parent.parent / "demos"

TOKENS = {
    "tok-creator": {"name": "alice", "role": "creator"},
    "tok-tutor": {"name": "tina", "role": "tutor"},
    "tok-learner": {"name": "lana", "role": "learner", "cohort_id": "alpha"},
}


def ok(name):
    print(f"ACCEPTANCE {name}: PASS")


def log_bytes(scn, script, session_id):
    events = replay(scn, script, session_id=session_id, learner_id=f"{session_id}-l")
    return dump_event_lines(
        [{"t_ms": e.t_ms, "kind": e.kind.value, "session_id": session_id,
          "scenario_id": scn.id, "scenario_version": scn.version,
          "payload": e.payload} for e in events])


# ---------------------------------------------------------------------------
# 1. Determinism
# ---------------------------------------------------------------------------


def test_determinism_1000_random_replays():
    rng = random.Random(20260101)
    started = time.perf_counter()
    for i in range(1000):
        scn = random_scenario(rng, ident=f"det{i}")
        script = random_script(rng, scn)
        first = log_bytes(scn, script, f"run-{i}")
        second = log_bytes(scn, script, f"run-{i}")
        assert first == second, f"pair {i} diverged"
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"took {elapsed:.2f}s, budget is 10s"
    ok(f"determinism (1000 pairs x2 in {elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 2. Boundary exactness
# ---------------------------------------------------------------------------


def test_boundary_exactness_100_no_action_scenarios():
    assert DEFAULT_SESSION_LIMIT_MS == 600000  # ten minutes
    doc = two_state_dict()
    doc.pop("session_limit_ms", None)
    assert parse_scenario(json.dumps(doc).encode()).session_limit_ms == 600000

    rng = random.Random(20260202)
    timed_out_seen = 0
    for i in range(100):
        scn = random_scenario(rng, ident=f"bx{i}")
        events = replay(scn, ActionScript(actions=(), final_t_ms=scn.session_limit_ms))

        prefix_sums, state_id, t = [], scn.initial_state, 0
        while True:
            node = scn.states[state_id]
            if node.is_terminal:
                break
            t += node.duration_ms
            if t > scn.session_limit_ms:
                break
            prefix_sums.append(t)
            state_id = node.on_timeout

        actual = [e.t_ms for e in events if e.kind is EventKind.TIMEOUT_DETERIORATION]
        assert actual == prefix_sums, f"scenario {i}: drift in timeout instants"
        last = events[-1]
        assert last.kind is EventKind.SESSION_END
        if last.payload["outcome"] == "timed_out":
            timed_out_seen += 1
            assert last.t_ms == scn.session_limit_ms
    assert timed_out_seen > 0  # the corpus must actually exercise the limit
    ok(f"boundary exactness (100 scenarios, {timed_out_seen} hit the limit)")


# ---------------------------------------------------------------------------
# 3. Validator defect corpus
# ---------------------------------------------------------------------------


def seeded_defects():
    def edit(**changes):
        doc = demo_scenario_dict()
        for fn in changes.values():
            fn(doc)
        return doc

    def e6(doc):
        doc["states"]["w1"]["on_timeout"] = "s2"
        doc["states"]["w2"]["on_timeout"] = "s1"
        doc["states"]["s3"]["on_timeout"] = "s1"
        doc["states"]["s3"]["on_goal"] = "s1"
        del doc["states"]["stable"]
        del doc["states"]["dead"]

    return {
        "E1": edit(f=lambda d: d["states"]["s3"].update(on_timeout="nosuch")),
        "E2": edit(f=lambda d: d["states"]["s1"]["goal"].update(action_ids=["ghost"])),
        "E3": edit(f=lambda d: d["states"].update(orphan={
            "vitals": {"hr": 70},
            "representation": {"kind": "text", "content": "unreachable"},
            "duration_ms": 1000, "on_timeout": "dead"})),
        "E4": edit(f=lambda d: d["states"]["s3"].pop("on_timeout")),
        "E5": edit(f=lambda d: d["states"]["s3"].update(on_timeout="s3")),
        "E6": edit(f=e6),
        "E7": edit(f=lambda d: d["states"]["stable"].update(on_timeout="dead")),
    }


def test_validator_defect_corpus():
    for code, doc in seeded_defects().items():
        report = validate(parse_scenario(json.dumps(doc).encode()))
        codes = {f.code for f in report.errors}
        assert codes == {code}, f"fixture {code} produced {codes}"

    clean = [json.dumps(demo_scenario_dict()).encode(),
             json.dumps(two_state_dict()).encode()]
    shipped = sorted(DEMOS_DIR.glob("*.rvs.json"))
    assert shipped, "shipped example scenarios must exist"
    clean += [p.read_bytes() for p in shipped]
    for doc_bytes in clean:
        assert validate(parse_scenario(doc_bytes)).errors == ()
    ok(f"validator defect corpus (7 defect fixtures, {len(clean)} clean)")


# ---------------------------------------------------------------------------
# 4. Repository fidelity
# ---------------------------------------------------------------------------


@pytest.fixture
def server(tmp_path):
    store = RepositoryStore(tmp_path / "repo")
    srv = RepositoryServer(store, load_principals(TOKENS))
    srv.start()
    yield srv
    srv.stop()


def test_repository_fidelity_50_random_and_concurrency(server):
    creator = RepositoryClient(server.base_url, "tok-creator")
    learner = RepositoryClient(server.base_url, "tok-learner")

    rng = random.Random(20260303)
    for i in range(50):
        scn = random_scenario(rng, ident=f"fid{i}")
        receipt = creator.upload_scenario(canonical_serialize(scn))
        fetched, header_checksum = learner.fetch_scenario(scn.id, receipt["version"])
        expected = canonical_serialize(scn.with_version(receipt["version"]))
        assert fetched == expected, f"scenario {i}: stored bytes differ"
        digest = hashlib.sha256(fetched).hexdigest()
        assert digest == receipt["checksum"] == header_checksum

    versions, errors = [], []

    def upload():
        try:
            client = RepositoryClient(server.base_url, "tok-creator")
            doc = json.dumps(demo_scenario_dict()).encode()
            versions.append(client.upload_scenario(doc)["version"])
        except Exception as exc:  # noqa: BLE001
            errors.append(exc)

    threads = [threading.Thread(target=upload) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert sorted(versions) == list(range(1, 9)), "version gaps or duplicates"
    ok("repository fidelity (50 scenarios byte-identical; 8 writers -> v1..v8)")


# ---------------------------------------------------------------------------
# 5. Ingestion idempotency
# ---------------------------------------------------------------------------


def test_ingestion_idempotency_100_sessions(tmp_path):
    store = RepositoryStore(tmp_path / "repo")
    server = RepositoryServer(store, load_principals(TOKENS))
    server.start()
    try:
        creator = RepositoryClient(server.base_url, "tok-creator")
        learner = RepositoryClient(server.base_url, "tok-learner")
        creator.upload_scenario(json.dumps(demo_scenario_dict()).encode())
        scn = parse_scenario(learner.fetch_scenario("sepsis-ward", 1)[0])

        corpus = []
        for cohort, profile, seed in [
            ("alpha", SynthProfile("competent"), 1),
            ("beta", SynthProfile("weak"), 2),
            ("gamma", SynthProfile("confused_at", "s2"), 3),
            ("delta", SynthProfile("untaught", "give-antibiotics"), 4),
        ]:
            for lines in synth_cohort(scn, profile, 25, seed, learner_prefix=cohort):
                corpus.append(lines)
                store.cohort_of[lines[0]["payload"]["learner_id"]] = cohort

        for lines in corpus:
            assert learner.ingest_events(lines[0]["session_id"], lines) == len(lines)

        def snapshot():
            result = analyze_corpus(store.build_summaries(), DetectorConfig(),
                                    emitted_at="t0")
            return {
                "learners": {k: v.to_dict() for k, v in result.learner_dashboards.items()},
                "cohorts": {str(k): v.to_dict() for k, v in result.cohort_dashboards.items()},
                "alarms": [a.to_dict() for a in result.alarms],
            }

        before = snapshot()
        assert len(before["cohorts"]) == 4
        for lines in corpus:  # re-send every batch
            assert learner.ingest_events(lines[0]["session_id"], lines) == 0
        assert snapshot() == before, "re-sent batches changed a dashboard value"
    finally:
        server.stop()
    ok("ingestion idempotency (100 sessions re-sent, dashboards unchanged)")


# ---------------------------------------------------------------------------
# 6. Analytics oracle equivalence
# ---------------------------------------------------------------------------


def test_analytics_oracle_equivalence_1000_sessions():
    scn = parse_scenario(json.dumps(demo_scenario_dict()).encode())
    cohort_specs = [
        ("alpha", SynthProfile("competent"), 1),
        ("beta", SynthProfile("weak"), 2),
        ("gamma", SynthProfile("confused_at", "s2"), 3),
        ("delta", SynthProfile("untaught", "give-antibiotics"), 4),
    ]
    raw = {}  # cohort -> list of line-lists
    for cohort, profile, seed in cohort_specs:
        raw[cohort] = synth_cohort(scn, profile, 250, seed, learner_prefix=cohort)
    assert sum(len(v) for v in raw.values()) == 1000

    for cohort, logs in raw.items():
        ours = aggregate_cohort([summarize_session(l, cohort) for l in logs]).to_dict()
        theirs = oracle_cohort([oracle_summary(l, cohort) for l in logs])
        assert_deep_close(ours, theirs, path=f"cohort[{cohort}]", tol=1e-9)

        for lines in logs:
            learner_id = lines[0]["payload"]["learner_id"]
            ours_l = learner_dashboard([summarize_session(lines, cohort)]).to_dict()
            theirs_l = oracle_learner([oracle_summary(lines, cohort)])
            assert_deep_close(ours_l, theirs_l, path=f"learner[{learner_id}]", tol=1e-9)
    ok("analytics oracle equivalence (1000 sessions, every dashboard field)")


# ---------------------------------------------------------------------------
# 7. Detector trip matrix
# ---------------------------------------------------------------------------


def matrix_dashboards(scn, specs):
    return [aggregate_cohort([summarize_session(l, cohort) for l in
                              synth_cohort(scn, profile, n, seed, learner_prefix=cohort)])
            for cohort, profile, n, seed in specs]


def test_detector_trip_matrix_and_monotonicity():
    scn = parse_scenario(json.dumps(demo_scenario_dict()).encode())
    cfg = DetectorConfig()

    cases = {
        "competent": ([
            ("alpha", SynthProfile("competent"), 15, 1),
            ("beta", SynthProfile("competent"), 15, 2),
        ], []),
        "confused_at(s2)": ([
            ("alpha", SynthProfile("confused_at", "s2"), 15, 3),
            ("beta", SynthProfile("confused_at", "s2"), 15, 4),
        ], [("D1", "s2")]),
        "untaught(give-antibiotics)": ([
            ("alpha", SynthProfile("untaught", "give-antibiotics"), 15, 5),
            ("beta", SynthProfile("competent"), 15, 6),
        ], [("D3", "give-antibiotics")]),
        "weak-vs-strong": ([
            ("alpha", SynthProfile("weak"), 30, 7),
            ("beta", SynthProfile("competent"), 30, 8),
        ], [("D2", "alpha")]),
    }
    for name, (specs, expected) in cases.items():
        dashboards = matrix_dashboards(scn, specs)
        alarms = detect_troubles(dashboards, cfg, emitted_at="t0")
        got = [(a.detector_id, a.locus) for a in alarms]
        assert got == expected, f"{name}: expected {expected}, got {got}"

    # monotonicity sweep 0.5 -> 0.95, step 0.05, over a mixed corpus
    dashboards = matrix_dashboards(scn, [
        ("alpha", SynthProfile("confused_at", "s2"), 15, 3),
        ("beta", SynthProfile("untaught", "give-antibiotics"), 15, 5),
        ("gamma", SynthProfile("weak"), 30, 7),
        ("delta", SynthProfile("competent"), 15, 6),
    ])
    prev_d1 = prev_d3 = None
    for step in range(10):
        theta = 0.5 + 0.05 * step
        swept = DetectorConfig(theta_state_fail=theta, theta_action_miss=theta)
        alarms = detect_troubles(dashboards, swept, emitted_at="t0")
        d1 = {a.locus for a in alarms if a.detector_id == "D1"}
        d3 = {a.locus for a in alarms if a.detector_id == "D3"}
        if prev_d1 is not None:
            assert d1 <= prev_d1, f"theta={theta}: D1 grew"
            assert d3 <= prev_d3, f"theta={theta}: D3 grew"
        prev_d1, prev_d3 = d1, d3
    ok("detector trip matrix (4 profiles exact; monotone under sweeps)")


# ---------------------------------------------------------------------------
# 8. End-to-end CLI pipeline
# ---------------------------------------------------------------------------


MATRIX = [
    # scenario id, [(cohort_suffix, profile, n, seed)], expected (detector, locus)
    ("matrix-competent", [("alpha", "competent", 12, 1), ("beta", "competent", 12, 2)], []),
    ("matrix-confused", [("alpha", "confused_at:s2", 12, 3),
                         ("beta", "confused_at:s2", 12, 4)],
     [("D1", "s2")]),
    ("matrix-untaught", [("alpha", "untaught:give-antibiotics", 12, 5),
                         ("beta", "competent", 12, 6)],
     [("D3", "give-antibiotics")]),
    ("matrix-weak", [("alpha", "weak", 30, 7), ("beta", "competent", 30, 8)],
     [("D2", "matrix-weak-alpha")]),
]


def rvse(*argv, **kwargs):
    return subprocess.run([sys.executable, "-m", "rvse", *argv],
                          capture_output=True, text=True, timeout=120, **kwargs)


def test_end_to_end_cli_pipeline(tmp_path):
    repo = tmp_path / "repo"
    repo.mkdir()
    tokens_path = tmp_path / "tokens.json"
    tokens_path.write_text(json.dumps(TOKENS))

    proc = subprocess.Popen(
        [sys.executable, "-m", "rvse", "serve", "--repo-dir", str(repo),
         "--port", "0", "--tokens", str(tokens_path)],
        stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stderr.readline()
        base_url = re.search(r"serving on (http://[\d.]+:\d+)", line).group(1)
        creator = RepositoryClient(base_url, "tok-creator")
        learner = RepositoryClient(base_url, "tok-learner")

        cohorts_map = {}
        for scenario_id, specs, _ in MATRIX:
            doc = demo_scenario_dict()
            doc["id"] = scenario_id
            scenario_path = tmp_path / f"{scenario_id}.rvs.json"
            scenario_path.write_text(json.dumps(doc))
            receipt = creator.upload_scenario(scenario_path.read_bytes())
            assert receipt["version"] == 1

            for cohort_suffix, profile, n, seed in specs:
                cohort = f"{scenario_id}-{cohort_suffix}"
                synth_out = tmp_path / "synth" / cohort
                result = rvse("synth", "--scenario", str(scenario_path),
                              "--profile", profile, "--n", str(n),
                              "--seed", str(seed), "--out", str(synth_out),
                              "--learner-prefix", cohort)
                assert result.returncode == 0, result.stderr
                for log_path in sorted(synth_out.glob("*.events.jsonl")):
                    lines = [json.loads(l) for l in log_path.read_text().splitlines()]
                    accepted = learner.ingest_events(lines[0]["session_id"], lines)
                    assert accepted == len(lines)
                    cohorts_map[lines[0]["payload"]["learner_id"]] = cohort

        cohorts_path = tmp_path / "cohorts.json"
        cohorts_path.write_text(json.dumps(cohorts_map))
        dash_dir = tmp_path / "dash"
        result = rvse("analyze", "--events", str(repo / "events"),
                      "--cohorts", str(cohorts_path), "--out", str(dash_dir))
        assert result.returncode == 1, result.stderr  # alarms present -> exit 1

        alarms = json.loads((dash_dir / "alarms.json").read_text())
        by_scenario = {}
        for alarm in alarms:
            by_scenario.setdefault(alarm["scenario_id"], []).append(
                (alarm["detector_id"], alarm["locus"]))
        for scenario_id, _, expected in MATRIX:
            assert by_scenario.get(scenario_id, []) == expected, \
                f"{scenario_id}: {by_scenario.get(scenario_id)} != {expected}"

        # a healthy corpus alone comes back clean with exit 0
        healthy_dir = tmp_path / "synth" / "matrix-competent-alpha"
        result = rvse("analyze", "--events", str(healthy_dir),
                      "--cohorts", str(cohorts_path), "--out", str(tmp_path / "dash2"))
        assert result.returncode == 0, result.stderr
        assert json.loads((tmp_path / "dash2" / "alarms.json").read_text()) == []
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)
    ok("end-to-end CLI pipeline (synth -> serve/upload/ingest -> analyze)")
