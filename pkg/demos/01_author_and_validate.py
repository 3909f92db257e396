"""Authoring walkthrough: build a scenario document in code, break it, and
watch the validator point at each defect.

Run:  python demos/01_author_and_validate.py
"""

import copy
import json
from pathlib import Path

from rvse import canonical_serialize, checksum, parse_scenario, validate

HERE = Path(__file__).parent

doc = json.loads((HERE / "sepsis-ward.rvs.json").read_text())
scenario = parse_scenario(json.dumps(doc).encode())

print(f"loaded '{scenario.meta.title}' with {len(scenario.states)} states "
      f"and {len(scenario.actions)} actions")
print("checksum:", checksum(scenario))

report = validate(scenario)
print(f"validation: {len(report.errors)} errors, {len(report.warnings)} warnings")
for finding in report.warnings:
    print(f"  warning {finding.code} [{finding.subject_id}]: {finding.message}")

# Canonical bytes are independent of authoring key order, so checksums are
# stable across editors and platforms.
shuffled = json.dumps(doc, sort_keys=True)
assert canonical_serialize(parse_scenario(shuffled)) == canonical_serialize(scenario)
print("canonical form is key-order independent: ok")

# Now break the graph on purpose: point a timeout at a missing state and
# strand a new state nobody can reach.
broken = copy.deepcopy(doc)
broken["states"]["s3"]["on_timeout"] = "icu"
broken["states"]["annex"] = {
    "vitals": {"hr": 75},
    "representation": {"kind": "text", "content": "an unreachable side room"},
    "duration_ms": 30000,
    "on_timeout": "dead",
}
bad_report = validate(parse_scenario(json.dumps(broken).encode()))
print(f"\nseeded defects produce {len(bad_report.errors)} errors:")
for finding in bad_report.errors:
    print(f"  {finding.code} [{finding.subject_id}]: {finding.message}")
assert not bad_report.deployable
