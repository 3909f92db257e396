"""Stand up the repository service in-process, publish both demo scenarios,
play one through the API, and read the dashboards back.

Run:  python demos/03_serve_upload_ingest.py
"""

import json
import tempfile
from pathlib import Path

from rvse import (
    ActionScript,
    RepositoryClient,
    RepositoryServer,
    RepositoryStore,
    replay,
)
from rvse.store import load_principals

HERE = Path(__file__).parent
TOKENS = {
    "demo-creator": {"name": "alice", "role": "creator"},
    "demo-tutor": {"name": "tina", "role": "tutor"},
    "demo-learner": {"name": "lana", "role": "learner", "cohort_id": "ward-team"},
}

with tempfile.TemporaryDirectory() as tmp:
    store = RepositoryStore(Path(tmp) / "repo", cohort_of={"lana": "ward-team"})
    server = RepositoryServer(store, load_principals(TOKENS))
    server.start()
    print(f"repository serving at {server.base_url}")

    creator = RepositoryClient(server.base_url, "demo-creator")
    learner = RepositoryClient(server.base_url, "demo-learner")
    tutor = RepositoryClient(server.base_url, "demo-tutor")

    for name in ("sepsis-ward.rvs.json", "anaphylaxis-bay.rvs.json"):
        receipt = creator.upload_scenario((HERE / name).read_bytes())
        print(f"uploaded {receipt['id']} v{receipt['version']} "
              f"checksum {receipt['checksum'][:12]}...")

    print("\ncatalog as the learner sees it:")
    for entry in learner.catalog():
        print(f"  {entry['id']} v{entry['latest_version']}: {entry['title']}")

    # fetch, play locally (offline-capable), then upload the finished log
    data, checksum_header = learner.fetch_scenario("sepsis-ward", 1)
    from rvse import parse_scenario
    scenario = parse_scenario(data)
    script = ActionScript(actions=((30000, "check-airway"), (61000, "give-antibiotics"),
                                   (95000, "give-fluids")), final_t_ms=600000)
    events = replay(scenario, script, session_id="ward-round-1", learner_id="lana")
    lines = [{"t_ms": e.t_ms, "kind": e.kind.value, "session_id": "ward-round-1",
              "scenario_id": scenario.id, "scenario_version": scenario.version,
              "payload": e.payload} for e in events]
    print(f"\nplayed locally: {len(lines)} events, outcome "
          f"{lines[-1]['payload']['outcome']}")
    print("ingested:", learner.ingest_events("ward-round-1", lines))
    print("re-sent (idempotent):", learner.ingest_events("ward-round-1", lines))

    dash = learner.learner_dashboard("lana")
    print("\nlearner dashboard:", json.dumps(dash, indent=2)[:400], "...")
    cohort = tutor.cohort_dashboard("ward-team")
    print("cohort sessions:", cohort["dashboards"][0]["n_sessions"])

    server.stop()
    print("\nserver stopped")
