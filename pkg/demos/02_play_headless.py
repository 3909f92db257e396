"""Play a session headlessly against virtual time: one learner nails every
priority action, another never acts and watches the patient deteriorate.

Run:  python demos/02_play_headless.py
"""

import json
from pathlib import Path

from rvse import ActionScript, parse_scenario, render_frame, replay, start_session

HERE = Path(__file__).parent
scenario = parse_scenario((HERE / "sepsis-ward.rvs.json").read_bytes())

print("=== perfect play ===")
sess = start_session(scenario, "demo-perfect", "learner-1")
for t_ms, action in [(30000, "check-airway"), (60000, "give-antibiotics"),
                     (90000, "give-fluids")]:
    frame = render_frame(sess, t_ms - 1)
    vitals = ", ".join(f"{k}={v:.0f}" for k, v in sorted(frame.vitals.items()))
    print(f"t={t_ms - 1:>6} in {sess.current_state:<7} vitals: {vitals}")
    for event in sess.perform_action(t_ms, action):
        print(f"t={event.t_ms:>6} {event.kind.value}: {event.payload}")
print(f"outcome: {sess.outcome.value} after {sess.now} ms\n")

print("=== nobody intervenes ===")
events = replay(scenario, ActionScript(actions=(), final_t_ms=scenario.session_limit_ms),
                session_id="demo-idle", learner_id="learner-2")
for event in events:
    print(f"t={event.t_ms:>6} {event.kind.value}: {event.payload}")

# Replays are bit-identical: the engine sees only virtual time.
again = replay(scenario, ActionScript(actions=(), final_t_ms=scenario.session_limit_ms),
               session_id="demo-idle", learner_id="learner-2")
assert again == events
print("\nreplay determinism: ok")
