"""Rewind and replay -- the session timeline as an undo stack.

Demonstrates:
- Per-step state hashes recorded during a run
- Rewinding to an earlier step restores that exact state
- Replaying under unchanged rules reproduces the original hashes
- Rewinding and loading different rules forks the timeline
- The abandoned future is archived, not lost

Run: python demos/rewind_replay.py
"""

from goalsmith.domain import packaged_ruleset
from goalsmith.session import Session, resolve_ruleset, resolve_scenario
from goalsmith.sim import state_hash


def hashes(session: Session) -> list[str]:
    return [state_hash(state) for state in session.history.states]


def main() -> None:
    print("=== Rewind & Replay ===\n")

    session = Session(
        resolve_scenario("test_city"), resolve_ruleset("rescue"), seed=3, sid="demo"
    )

    # --- Phase 1: run 20 steps and remember every state ---
    session.step(20)
    original = hashes(session)
    print(f"After 20 steps: {len(original)} recorded states")
    print(f"    state 10: {original[10][:16]}...")
    print(f"    state 20: {original[20][:16]}...")

    # --- Phase 2: rewind to step 10 ---
    rewound = session.rewind(10)
    archived = len(session.archives[-1]["steps"])
    print(f"\nRewound to t={rewound['time']}; {archived} future steps archived")
    assert state_hash(session.history.current) == original[10]
    print("State at t=10 matches the original:  PASS")

    # --- Phase 3: replay under the same rules ---
    session.step(10)
    replayed = hashes(session)
    assert replayed == original, "replay diverged!"
    print("Replayed steps 11..20 are bit-identical:  PASS")

    # --- Phase 4: rewind again, but change the rules first ---
    session.rewind(10)
    session.load_ruleset(packaged_ruleset("untrained"))
    session.step(10)
    forked = hashes(session)
    assert forked[:11] == original[:11]
    assert forked[11:] != original[11:], "untrained centre somehow acted the same"
    print("\nWith untrained rules the future is different:")
    print(f"    original t=20: {original[20][:16]}...")
    print(f"    forked   t=20: {forked[20][:16]}...")

    # --- Phase 5: nothing is lost ---
    print(f"\nArchived timelines: {len(session.archives)}")
    for archive in session.archives:
        print(f"    rewound at t={archive['rewound_at']} "
              f"from t={archive['from_time']} "
              f"({len(archive['steps'])} steps kept for the record)")

    print("\nThe timeline is a tree: every rewind forks it, every fork is")
    print("reproducible, and the log of the road not taken survives.")


if __name__ == "__main__":
    main()
