"""Shared fixture builders: hand-written scenario documents and randomized
scenario/script generators used by both the unit tests and the acceptance
suite."""

from __future__ import annotations

import json
import random

from rvse.engine import ActionScript
from rvse.scenario import Scenario, parse_scenario


def two_state_dict() -> dict:
    """Smallest legal document: one timed state draining into one terminal."""
    return {
        "id": "minimal",
        "version": 1,
        "meta": {
            "title": "Minimal case",
            "author": "alice",
            "tags": [],
            "learning_objectives": ["Observe an untreated deterioration"],
            "created_at": "2026-01-05T09:00:00Z",
        },
        "initial_state": "start",
        "states": {
            "start": {
                "vitals": {"hr": 80},
                "representation": {"kind": "text", "content": "The patient waits."},
                "duration_ms": 10000,
                "on_timeout": "end",
            },
            "end": {
                "vitals": {"hr": 0},
                "representation": {"kind": "text", "content": "The patient has died."},
                "terminal": "deceased",
            },
        },
        "actions": {
            "check-pulse": {"label": "Check pulse", "category": "diagnostic"},
        },
    }


def demo_scenario_dict() -> dict:
    """The sepsis-ward teaching case used across the suite.

    Competent play: s1 -> s2 -> s3 -> stable. Each deterioration detour
    (w1, w2) still offers a recovery goal, so a single missed action does
    not doom the session.
    """
    return {
        "id": "sepsis-ward",
        "version": 1,
        "meta": {
            "title": "Deteriorating sepsis on the ward",
            "author": "alice",
            "tags": ["sepsis", "internal-medicine"],
            "learning_objectives": [
                "Check airway as the first priority action",
                "Give antibiotics without delay",
                "Give fluids to support perfusion",
                "Call for help or start oxygen when the patient slips",
            ],
            "created_at": "2026-01-05T09:30:00Z",
        },
        "initial_state": "s1",
        "session_limit_ms": 600000,
        "states": {
            "s1": {
                "vitals": {"hr": 92, "sbp": 112, "rr": 18, "spo2": 96},
                "drift_to": {"hr": 118, "sbp": 98, "rr": 24, "spo2": 91},
                "representation": {"kind": "text",
                                   "content": "Flushed and anxious, talking in sentences."},
                "goal": {"mode": "any", "action_ids": ["check-airway"]},
                "duration_ms": 60000,
                "on_timeout": "w1",
                "on_goal": "s2",
            },
            "w1": {
                "vitals": {"hr": 122, "sbp": 92, "rr": 26, "spo2": 89},
                "drift_to": {"hr": 138, "sbp": 78, "rr": 32, "spo2": 84},
                "representation": {"kind": "text",
                                   "content": "Struggling to speak, accessory muscle use."},
                "goal": {"mode": "any", "action_ids": ["call-for-help"]},
                "duration_ms": 60000,
                "on_timeout": "dead",
                "on_goal": "s2",
            },
            "s2": {
                "vitals": {"hr": 108, "sbp": 100, "rr": 22, "spo2": 93},
                "drift_to": {"hr": 126, "sbp": 88, "rr": 28, "spo2": 88},
                "representation": {"kind": "text",
                                   "content": "Rigors; looks unwell; lactate rising."},
                "goal": {"mode": "any", "action_ids": ["give-antibiotics"]},
                "duration_ms": 60000,
                "on_timeout": "w2",
                "on_goal": "s3",
            },
            "w2": {
                "vitals": {"hr": 132, "sbp": 84, "rr": 30, "spo2": 85},
                "drift_to": {"hr": 146, "sbp": 70, "rr": 36, "spo2": 78},
                "representation": {"kind": "text",
                                   "content": "Mottled, confused, saturating poorly."},
                "goal": {"mode": "any", "action_ids": ["start-oxygen"]},
                "duration_ms": 60000,
                "on_timeout": "dead",
                "on_goal": "s3",
            },
            "s3": {
                "vitals": {"hr": 100, "sbp": 104, "rr": 20, "spo2": 94},
                "drift_to": {"hr": 120, "sbp": 90, "rr": 26, "spo2": 87},
                "representation": {"kind": "text",
                                   "content": "Responding, but pressure still soft."},
                "goal": {"mode": "any", "action_ids": ["give-fluids"]},
                "duration_ms": 60000,
                "on_timeout": "dead",
                "on_goal": "stable",
            },
            "stable": {
                "vitals": {"hr": 84, "sbp": 118, "rr": 16, "spo2": 98},
                "representation": {"kind": "text",
                                   "content": "Settled on the ward, obs normalising."},
                "terminal": "stabilized",
            },
            "dead": {
                "vitals": {"hr": 0, "sbp": 0, "rr": 0, "spo2": 0},
                "representation": {"kind": "text",
                                   "content": "Resuscitation unsuccessful."},
                "terminal": "deceased",
            },
        },
        "actions": {
            "check-airway": {"label": "Check airway", "category": "diagnostic"},
            "give-antibiotics": {"label": "Give antibiotics", "category": "therapeutic"},
            "give-fluids": {"label": "Give fluids", "category": "therapeutic"},
            "call-for-help": {"label": "Call for help", "category": "other"},
            "start-oxygen": {"label": "Start oxygen", "category": "therapeutic"},
            "check-pulse": {"label": "Check pulse", "category": "diagnostic"},
        },
    }


def demo_scenario() -> Scenario:
    return parse_scenario(json.dumps(demo_scenario_dict()).encode())


def two_state_scenario() -> Scenario:
    return parse_scenario(json.dumps(two_state_dict()).encode())


# ---------------------------------------------------------------------------
# Randomized-but-valid generators (seeded; shared by property and acceptance
# tests)
# ---------------------------------------------------------------------------

_SIGNS = ["hr", "sbp", "rr", "spo2", "temp"]


def random_scenario(rng: random.Random, ident: str = "rand") -> Scenario:
    """A random valid scenario: a deterioration chain ending in a terminal,
    with optional goals, effects, and drifts. Always validates cleanly."""
    n_chain = rng.randint(1, 7)
    state_ids = [f"st{i}" for i in range(n_chain)]
    terminal_id = rng.choice(["crash", "safe"])
    action_ids = [f"act{i}" for i in range(rng.randint(1, 5))]
    signs = rng.sample(_SIGNS, rng.randint(1, 4))

    def vitals() -> dict:
        return {s: rng.randint(20, 180) for s in signs}

    states = {}
    for i, sid in enumerate(state_ids):
        nxt = state_ids[i + 1] if i + 1 < n_chain else terminal_id
        node = {
            "vitals": vitals(),
            "representation": {"kind": "text", "content": f"state {sid}"},
            "duration_ms": rng.randint(1000, 150000),
            "on_timeout": nxt,
        }
        if rng.random() < 0.6:
            node["drift_to"] = vitals()
        if rng.random() < 0.7:
            k = rng.randint(1, min(2, len(action_ids)))
            goal_actions = rng.sample(action_ids, k)
            node["goal"] = {
                "mode": rng.choice(["any", "all"]) if k > 1 else "any",
                "action_ids": goal_actions,
            }
            # jump anywhere downstream (possibly straight to the terminal)
            targets = state_ids[i + 1:] + [terminal_id]
            node["on_goal"] = rng.choice(targets)
            spare = [a for a in action_ids if a not in goal_actions]
        else:
            spare = list(action_ids)
        if spare and rng.random() < 0.4:
            effect: dict = {}
            roll = rng.random()
            if roll < 0.4:
                effect["transition"] = rng.choice(state_ids[i + 1:] + [terminal_id])
            if roll >= 0.2:
                effect["duration_delta_ms"] = rng.choice([-20000, -5000, 5000, 30000])
            node["effects"] = {rng.choice(spare): effect}
        states[sid] = node
    states[terminal_id] = {
        "vitals": vitals(),
        "representation": {"kind": "text", "content": "the end"},
        "terminal": "deceased" if terminal_id == "crash" else "stabilized",
    }

    doc = {
        "id": ident,
        "version": 1,
        "meta": {
            "title": f"random case {ident}",
            "author": "generator",
            "tags": ["random"],
            "learning_objectives": ["exercise the engine"],
            "created_at": "2026-01-01T00:00:00Z",
        },
        "initial_state": state_ids[0],
        "session_limit_ms": rng.choice([600000, 600000, 90000, 45000]),
        "states": states,
        "actions": {a: {"label": a, "category": "other"} for a in action_ids},
    }
    return parse_scenario(json.dumps(doc).encode())


def random_script(rng: random.Random, scn: Scenario) -> ActionScript:
    """A random timed action script against the scenario's catalog."""
    n = rng.randint(0, 12)
    horizon = scn.session_limit_ms + 30000
    times = sorted(rng.sample(range(0, horizon), n)) if n else []
    actions = tuple((t, rng.choice(sorted(scn.actions))) for t in times)
    return ActionScript(actions=actions, final_t_ms=rng.randint(0, horizon))
