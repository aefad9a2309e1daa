"""One rescue, blow by blow: a goal's whole life in the event log.

Demonstrates:
- Goals moving FORMULATED -> SELECTED -> EXPANDED -> COMMITTED -> DISPATCHED
- A plan blocked by rubble deferring and radioing a clearing request
- The police opening the road, the ambulance digging the civilian out
- Goal outcomes read straight from the transition log

Run: python demos/goal_lifecycle.py
"""

from goalsmith.scenario import parse_scenario
from goalsmith.session import Session, resolve_ruleset
from goalsmith.sim import Civilian

STREET = {
    "name": "one_street",
    "map": {
        "nodes": [{"id": f"n{i}", "x": float(i * 10), "y": 0.0} for i in range(6)],
        "roads": [
            {"id": f"r{i}", "between": [f"n{i}", f"n{i + 1}"], "length": 1}
            for i in range(5)
        ],
        "buildings": [{"id": "b1", "node": "n1"}, {"id": "b3", "node": "n3"}],
    },
    "entities": {
        "buildings": [
            {"id": "b1", "scouted": "no"},
            {"id": "b3", "fieryness": "burning", "scouted": "yes"},
        ],
        "roads": [{"id": "r2", "blocked": "yes"}],
        "civilians": [{"id": "c4", "node": "n4", "hp": 90, "burial_depth": 2}],
        "agents": [
            {"id": "a0", "node": "n0", "kind": "fire_brigade"},
            {"id": "b0", "node": "n0", "kind": "ambulance"},
            {"id": "c0", "node": "n0", "kind": "police"},
        ],
    },
    "dynamics": {
        "sensor_range": 2,
        "fire_escalation_interval": 200,
        "spread_probability": 0.0,
    },
    "limits": {"step_budget": 300},
}


def main() -> None:
    print("=== A goal's life ===\n")
    print("The street: three agents at n0, rubble on r2, a burning building")
    print("at n3, and someone buried in the rubble at n4.\n")

    session = Session(parse_scenario(STREET), resolve_ruleset("rescue"), seed=5, sid="demo")

    seen = 0
    for _ in range(60):
        session.step(1)
        for event in session.events_since(seen):
            seen = event["seq"]
            if event["event"] == "goal_transition":
                print(f"  t={event['time']:>3}  {event['goal']:<4} "
                      f"{event['goal_type']:<8} {event['target']:<4} "
                      f"{event['from']:>10} -> {event['to']:<10} {event['reason']}")
        ledger = session.goal_ledger_doc()
        if ledger["goals"] and all(
            g["mode"] in ("FINISHED", "DROPPED") for g in ledger["goals"]
        ):
            break

    civilian = session.history.current.entities["c4"]
    assert isinstance(civilian, Civilian)
    print(f"\nCivilian c4 after the dust settles: hp={civilian.hp}, "
          f"burial_depth={civilian.burial_depth}")
    assert civilian.burial_depth == 0, "the rescue never finished"
    print("Buried civilian dug out:  PASS")

    road = session.history.current.entities["r2"]
    assert road.blocked == "no"
    print("Blocked road cleared:     PASS")

    outcomes = {
        g["id"]: g["mode"] for g in session.goal_ledger_doc()["goals"]
    }
    print(f"\nFinal ledger: {outcomes}")
    print("\nEvery line above came from the session's own event log --")
    print("the same stream the trainer UI subscribes to.")


if __name__ == "__main__":
    main()
