"""The ``rvse`` command line: validate | run | serve | analyze | synth.

Non-interactive and scriptable: stdout carries machine-readable JSON only,
prose goes to stderr. Exit codes are stable so CI can gate on them:
0 success, 1 validation/detection findings, 2 usage error, 3 I/O or network.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import List, Optional

from . import analytics, engine, scenario, service, store

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3

_FILE_SAFE = re.compile(r"[^A-Za-z0-9._~-]")


def _err(message: str) -> None:
    print(f"rvse: {message}", file=sys.stderr)


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True))


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_scenario(path: str) -> scenario.Scenario:
    return scenario.parse_scenario(_read_bytes(path))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        data = _read_bytes(args.path)
    except OSError as exc:
        _err(f"cannot read {args.path}: {exc}")
        return EXIT_IO
    try:
        parsed = scenario.parse_scenario(data)
    except (scenario.MalformedDocument, scenario.SchemaViolation) as exc:
        _emit({
            "deployable": False,
            "errors": [{"code": "SCHEMA", "state_or_action_id": None, "message": str(exc)}],
            "warnings": [],
        })
        return EXIT_FINDINGS
    report = scenario.validate(parsed)
    _emit(report.to_dict())
    return EXIT_OK if report.deployable else EXIT_FINDINGS


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scn = _load_scenario(args.scenario)
        if args.script:
            script = engine.parse_action_script(_read_bytes(args.script))
        else:
            script = engine.ActionScript(actions=(), final_t_ms=scn.session_limit_ms)
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_IO
    except (scenario.MalformedDocument, scenario.SchemaViolation) as exc:
        _err(f"bad input: {exc}")
        return EXIT_FINDINGS
    try:
        events = engine.replay(scn, script, session_id=args.session_id,
                               learner_id=args.learner_id)
    except engine.InvalidScenario as exc:
        _err(str(exc))
        return EXIT_FINDINGS
    lines = [
        {
            "t_ms": e.t_ms,
            "kind": e.kind.value,
            "session_id": args.session_id,
            "scenario_id": scn.id,
            "scenario_version": scn.version,
            "payload": e.payload,
        }
        for e in events
    ]
    try:
        Path(args.out).write_bytes(engine.dump_event_lines(lines))
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_IO
    summary = analytics.summarize_session(lines, cohort_id="local")
    _emit(summary.to_dict())
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    repo_dir = Path(args.repo_dir)
    if not repo_dir.is_dir():
        _err(f"repo dir {args.repo_dir} does not exist")
        return EXIT_IO
    try:
        principals = store.load_principals(json.loads(_read_bytes(args.tokens)))
    except (OSError, ValueError) as exc:
        _err(f"cannot load tokens file: {exc}")
        return EXIT_IO
    detector_config = analytics.DetectorConfig()
    if args.config:
        try:
            detector_config = analytics.DetectorConfig.from_dict(
                json.loads(_read_bytes(args.config)))
        except (OSError, ValueError, TypeError) as exc:
            _err(f"cannot load detector config: {exc}")
            return EXIT_IO
    cohort_of = {p.name: p.cohort_id for p in principals.values()
                 if p.role is store.Role.LEARNER and p.cohort_id}
    repo = store.RepositoryStore(repo_dir, cohort_of=cohort_of,
                                 detector_config=detector_config)
    try:
        server = service.RepositoryServer(repo, principals, host=args.host, port=args.port)
    except OSError as exc:
        _err(f"cannot bind {args.host}:{args.port}: {exc}")
        return EXIT_IO
    _err(f"serving on {server.base_url} (repo: {repo_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        _err("shutting down")
    finally:
        server.server_close()
    return EXIT_OK


def _load_session_files(events_dir: Path, cohort_of: dict) -> List[analytics.SessionSummary]:
    summaries = []
    for path in sorted(events_dir.glob("*.events.jsonl")):
        try:
            lines = engine.load_event_lines(path.read_bytes())
            learner_id = lines[0]["payload"].get("learner_id", "") if lines else ""
            cohort = cohort_of.get(learner_id, "default")
            summaries.append(analytics.summarize_session(lines, cohort))
        except (scenario.SchemaViolation, analytics.AnalyticsError) as exc:
            _err(f"skipping corrupt log {path.name}: {exc}")
    return summaries


def cmd_analyze(args: argparse.Namespace) -> int:
    events_dir = Path(args.events)
    if not events_dir.is_dir() or not any(events_dir.glob("*.events.jsonl")):
        _err(f"no .events.jsonl files under {args.events}")
        return EXIT_IO
    cohort_of = {}
    if args.cohorts:
        try:
            cohort_of = json.loads(_read_bytes(args.cohorts))
        except (OSError, ValueError) as exc:
            _err(f"cannot load cohorts map: {exc}")
            return EXIT_IO
    detector_config = analytics.DetectorConfig()
    if args.config:
        try:
            detector_config = analytics.DetectorConfig.from_dict(
                json.loads(_read_bytes(args.config)))
        except (OSError, ValueError, TypeError) as exc:
            _err(f"cannot load detector config: {exc}")
            return EXIT_IO

    summaries = _load_session_files(events_dir, cohort_of)
    result = analytics.analyze_corpus(summaries, detector_config)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for learner_id, dash in result.learner_dashboards.items():
            name = f"learner_{_FILE_SAFE.sub('_', learner_id)}.json"
            (out_dir / name).write_text(json.dumps(dash.to_dict(), indent=2, sort_keys=True))
        for (scenario_id, version, cohort_id), dash in result.cohort_dashboards.items():
            name = (f"cohort_{_FILE_SAFE.sub('_', cohort_id)}"
                    f"__{_FILE_SAFE.sub('_', scenario_id)}_v{version}.json")
            (out_dir / name).write_text(json.dumps(dash.to_dict(), indent=2, sort_keys=True))
        alarms = [a.to_dict() for a in result.alarms]
        (out_dir / "alarms.json").write_text(json.dumps(alarms, indent=2, sort_keys=True))
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_IO
    _emit({"sessions": len(summaries), "alarms": alarms})
    return EXIT_FINDINGS if alarms else EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        profile = analytics.parse_profile(args.profile)
    except ValueError as exc:
        _err(f"bad profile: {exc}")
        return EXIT_USAGE
    try:
        scn = _load_scenario(args.scenario)
    except OSError as exc:
        _err(f"cannot read {args.scenario}: {exc}")
        return EXIT_IO
    except (scenario.MalformedDocument, scenario.SchemaViolation) as exc:
        _err(f"bad scenario: {exc}")
        return EXIT_FINDINGS
    report = scenario.validate(scn)
    if report.errors:
        _err("scenario has validation errors: " + ", ".join(f.code for f in report.errors))
        return EXIT_FINDINGS
    logs = analytics.synth_cohort(scn, profile, args.n, args.seed,
                                  learner_prefix=args.learner_prefix)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        names = []
        for lines in logs:
            session_id = lines[0]["session_id"]
            name = f"{_FILE_SAFE.sub('_', session_id)}.events.jsonl"
            (out_dir / name).write_bytes(engine.dump_event_lines(lines))
            names.append(name)
    except OSError as exc:
        _err(f"cannot write logs: {exc}")
        return EXIT_IO
    _emit({"written": names})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvse",
        description="Author, validate, serve, replay, and analyze deteriorating-"
                    "patient simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario document, print the report")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="replay a scenario headlessly, write the event log")
    p.add_argument("scenario")
    p.add_argument("--script", help="action script JSON (default: no actions)")
    p.add_argument("--out", required=True, help="event log output path (.events.jsonl)")
    p.add_argument("--session-id", default="cli-run")
    p.add_argument("--learner-id", default="cli")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="run the repository HTTP service")
    p.add_argument("--repo-dir", required=True)
    p.add_argument("--port", type=int, default=8432)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--tokens", required=True, help="JSON file mapping token -> principal")
    p.add_argument("--config", help="detector config JSON")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="build dashboards and alarms from event logs")
    p.add_argument("--events", required=True, help="directory of .events.jsonl files")
    p.add_argument("--cohorts", help="JSON file mapping learner_id -> cohort_id")
    p.add_argument("--out", required=True, help="output directory for dashboard JSON")
    p.add_argument("--config", help="detector config JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate synthetic cohort event logs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--profile", required=True,
                   help="competent | weak | confused_at:STATE | untaught:ACTION")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--learner-prefix", help="override the learner id prefix")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
