"""One training session, driven entirely over HTTP.

The trainer service speaks plain JSON over plain routes, so any client that
can open a socket can run the whole workflow — no SDK involved. This script
is that client, built from nothing but the standard library's urllib.

Demonstrates:
  - spawning the service in-process on a spare port
  - creating a session from an inline scenario document
  - stepping an untrained centre that ignores a buried rescue agent
  - the propose -> pick conditions -> commit rule-update workflow,
    including a refused commit that leaves the draft intact
  - the committed rule producing a goal on the very next step
  - reading the whole story back from the server-sent event log

Run: python demos/trainer_service.py
"""

from __future__ import annotations

import json
import socket
import threading
import time
import urllib.error
import urllib.request
from collections import Counter

import uvicorn

from goalsmith.api import create_app

# A two-node world: the fire brigade a0 lies buried under debris at n1,
# the ambulance a1 waits at n0, and nothing is on fire. Sensors cover the
# whole map, so the only thing missing is a rule that says "dig them out".
DIG_SITE = {
    "name": "dig_site",
    "map": {
        "nodes": [{"id": "n0", "x": 0.0, "y": 0.0}, {"id": "n1", "x": 1.0, "y": 0.0}],
        "roads": [{"id": "r0", "between": ["n0", "n1"], "length": 1}],
        "buildings": [{"id": "b0", "node": "n1"}],
    },
    "entities": {
        "buildings": [{"id": "b0", "scouted": "yes"}],
        "roads": [],
        "civilians": [],
        "agents": [
            {"id": "a0", "node": "n1", "kind": "fire_brigade", "burial_depth": 2, "hp": 80},
            {"id": "a1", "node": "n0", "kind": "ambulance"},
        ],
    },
    "dynamics": {
        "sensor_range": 9,
        "spread_probability": 0.0,
        "fire_escalation_interval": 200,
        "burial_decay": 0,
    },
    "limits": {"step_budget": 300},
}


def main() -> None:
    print("=== Trainer service over HTTP ===\n")

    # --- Phase 1: bring the service up on a spare port ---
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    server = uvicorn.Server(
        uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    )
    threading.Thread(target=server.run, daemon=True).start()
    base = f"http://127.0.0.1:{port}"

    def call(method: str, path: str, body: dict | None = None) -> dict:
        data = None if body is None else json.dumps(body).encode()
        request = urllib.request.Request(
            base + path,
            data=data,
            method=method,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            return json.loads(response.read())

    for _ in range(200):
        try:
            call("GET", "/sessions")
            break
        except urllib.error.URLError:
            time.sleep(0.05)
    else:
        raise RuntimeError("service never came up")
    print(f"Service answering on {base}")

    # --- Phase 2: an untrained centre ignores the buried brigade ---
    created = call("POST", "/sessions", {"scenario": DIG_SITE, "seed": 7})
    sid = created["session"]
    print(f"Session {sid} ({created['scenario']}): {created['counts']}, paused at t={created['time']}\n")

    call("POST", f"/sessions/{sid}/control", {"command": "step", "arg": 5})
    state = call("GET", f"/sessions/{sid}/state")
    buried = state["belief"]["entities"]["a0"]
    goals = call("GET", f"/sessions/{sid}/goals")["goals"]
    assert buried["burial_depth"] == 2 and goals == []
    print(f"Five steps in: a0 still under {buried['burial_depth']} layers of debris,")
    print("and the untrained centre has formulated nothing.  (That's the bug.)\n")

    # --- Phase 3: teach the rule that should have fired ---
    draft = call(
        "POST",
        f"/sessions/{sid}/updates",
        {"entity": "a0", "tree": "human", "proposed": "unbury"},
    )
    print(f"Draft {draft['uid']}: centre concluded {draft['current']!r}, trainer wants {draft['proposed']!r}")
    print("Candidate conditions (differences against the fired rule's cornerstone):")
    for cand in draft["candidates"]:
        print(f"  [{cand['index']}] {cand['text']}")

    try:
        call("POST", f"/sessions/{sid}/updates/{draft['uid']}/commit", {"literal_indices": []})
        raise AssertionError("an empty condition should have been refused")
    except urllib.error.HTTPError as err:
        detail = json.loads(err.read())["detail"]
        print(f"\nCommit with no conditions refused ({err.code}): {detail}")

    picked = next(c["index"] for c in draft["candidates"] if c["slot"] == "buriedness")
    committed = call(
        "POST",
        f"/sessions/{sid}/updates/{draft['uid']}/commit",
        {"literal_indices": [picked]},
    )
    print(f"Commit with the buriedness literal accepted: new rule {committed['node']},")
    print(f"human tree now {committed['size']} rules.\n")

    # --- Phase 4: the very next step acts on it ---
    call("POST", f"/sessions/{sid}/control", {"command": "step", "arg": 1})
    goals = call("GET", f"/sessions/{sid}/goals")["goals"]
    dig = next(g for g in goals if g["type"] == "unbury" and g["target"] == "a0")
    assert dig["agent"] == "a1"
    print(f"One step later: {dig['id']} unbury a0 is {dig['mode']}, assigned to {dig['agent']}.  PASS")

    for _ in range(15):
        call("POST", f"/sessions/{sid}/control", {"command": "step", "arg": 1})
        dig = call("GET", f"/sessions/{sid}/goals")["goals"][0]
        if dig["mode"] == "FINISHED":
            break
    state = call("GET", f"/sessions/{sid}/state")
    freed = state["belief"]["entities"]["a0"]
    assert dig["mode"] == "FINISHED" and freed["burial_depth"] == 0
    print(f"By t={state['time']} the ambulance has dug a0 out (burial_depth={freed['burial_depth']}).  PASS\n")

    # --- Phase 5: the whole story is in the event log ---
    raw = urllib.request.urlopen(
        base + f"/sessions/{sid}/events?since=0&follow=false"
    ).read().decode()
    events = []
    for block in raw.split("\n\n"):
        lines = [ln for ln in block.splitlines() if ln and not ln.startswith(":")]
        if not lines:
            continue
        kind = next(ln[len("event: "):] for ln in lines if ln.startswith("event: "))
        data = json.loads(next(ln[len("data: "):] for ln in lines if ln.startswith("data: ")))
        events.append((kind, data))

    kinds = Counter(kind for kind, _ in events)
    print(f"Event backlog holds {len(events)} events: {dict(kinds)}")

    steps = [data for kind, data in events if kind == "step_completed"]
    assert [s["time"] for s in steps] == list(range(1, state["time"] + 1))
    taught = next(data for kind, data in events if kind == "rule_committed")
    assert taught["node"] == committed["node"] and taught["time"] == 5
    first_move = next(data for kind, data in events if kind == "goal_transition")
    assert first_move["goal_type"] == "unbury" and first_move["to"] == "SELECTED"
    assert first_move["time"] == taught["time"]  # reasoning stamped with pre-step time
    print(f"Every step is logged in order; the rule commit lands at t={taught['time']},")
    print(f"and the very next tick {first_move['from']} -> {first_move['to']} the new goal.  PASS")

    server.should_exit = True
    print("\nNothing above needed more than a socket and a JSON encoder:")
    print("watch, pause, correct, resume — the service holds the whole workflow.")


if __name__ == "__main__":
    main()
