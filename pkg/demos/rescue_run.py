"""A full day in the command centre: 300 steps over the packaged city.

Demonstrates:
- Headless scenario run with the trained ruleset
- The run report: goals by type, outcomes, reasoning latency
- Bit-exact determinism across independent runs

Run: python demos/rescue_run.py
"""

from collections import Counter

from goalsmith.session import Session, resolve_ruleset, resolve_scenario
from goalsmith.sim import state_hash


def run_city(seed: int) -> Session:
    session = Session(
        resolve_scenario("test_city"), resolve_ruleset("rescue"), seed=seed, sid="demo"
    )
    session.step(300)
    return session


def main() -> None:
    print("=== Rescue run: test_city, 300 steps ===\n")

    session = run_city(seed=11)
    report = session.report()

    goals = report["goals"]
    print(f"Goals created:   {goals['created']}")
    for goal_type, count in sorted(goals["by_type"].items()):
        print(f"    {goal_type:<8} {count}")
    print(f"Finished:        {goals['finished']}")
    print(f"Dropped:         {goals['dropped']}")
    print(f"Still active:    {goals['active']}")
    print(f"Transitions:     {report['transitions']}")

    latency = report["latency"]
    print(f"\nReasoning latency over {latency['steps']} steps:"
          f" p50 {latency['p50_ms']:.2f} ms,"
          f" p99 {latency['p99_ms']:.2f} ms,"
          f" max {latency['max_ms']:.2f} ms")

    # How the day ended, according to the centre's own event log.
    reasons = Counter(
        e["reason"] for e in session.events_since(0) if e["event"] == "goal_transition"
    )
    print("\nMost common transition reasons:")
    for reason, count in reasons.most_common(5):
        print(f"    {reason:<22} x{count}")

    final = state_hash(session.history.current)
    print(f"\nFinal state hash: {final[:16]}...")

    again = run_city(seed=11)
    assert state_hash(again.history.current) == final
    print("Second run, same seed, same hash:  PASS")

    other = run_city(seed=12)
    assert state_hash(other.history.current) != final
    print("Different seed diverges:           PASS")


if __name__ == "__main__":
    main()
