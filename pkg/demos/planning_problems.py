"""Route planning and the problem files handed to external planners.

Demonstrates:
- Cheapest routes around believed blockages (and through them, when asked)
- A goal expanding into a concrete action plan with a cost
- The STRIPS problem text emitted for a (goal, agent) pair
- The fallback relaxation: a hopeless blockage crossed on paper, declared
  open in the emitted problem so the planner sees the same world

Run: python demos/planning_problems.py
"""

from goalsmith.belief import BeliefState
from goalsmith.goals import GoalLedger
from goalsmith.planner import (
    RoadGraph,
    build_plan,
    crossed_blocked_roads,
    emit_pddl_problem,
    plan_route,
)
from goalsmith.sim import Building, PlatoonAgent, Road


def diamond_belief(detour_blocked: str = "no") -> BeliefState:
    """n0 -- n1 == n2 -- n3, where n1-n2 is rubble and n1-n4-n2 detours it."""
    belief = BeliefState()
    belief.entities["a0"] = PlatoonAgent("a0", "n0", "fire_brigade")
    belief.entities["b3"] = Building("b3", "n3", fieryness="burning", scouted="yes")
    belief.entities["r0"] = Road("r0", "n0", "n1", 1)
    belief.entities["r1"] = Road("r1", "n1", "n2", 1, blocked="yes")
    belief.entities["r2"] = Road("r2", "n1", "n4", 2, blocked=detour_blocked)
    belief.entities["r3"] = Road("r3", "n4", "n2", 2, blocked=detour_blocked)
    belief.entities["r4"] = Road("r4", "n2", "n3", 1)
    return belief


def main() -> None:
    print("=== Routes, plans, problems ===\n")

    belief = diamond_belief()
    graph = RoadGraph.from_belief(belief)

    # --- Phase 1: routing respects what the centre believes ---
    around = plan_route(graph, "n0", "n3")
    through = plan_route(graph, "n0", "n3", traverse_blocked=True)
    print(f"Around the rubble:  cost {around[0]}, via {' -> '.join(around[1])}")
    print(f"Through it (if we could): cost {through[0]}, via {' -> '.join(through[1])}")
    assert around[0] > through[0]

    # --- Phase 2: a douse goal becomes an action plan ---
    goal = GoalLedger().new_goal("douse", "b3", 0)
    plan = build_plan(goal, "a0", belief)
    print(f"\nPlan for {goal.goal_type} {goal.target} by a0 (cost {plan.cost}):")
    print(f"    {plan.describe()}")
    assert crossed_blocked_roads(plan, belief) == ()

    # --- Phase 3: the problem file an external planner would receive ---
    problem = emit_pddl_problem(goal, "a0", belief)
    print("\nEmitted problem:")
    for line in problem.splitlines():
        print(f"    {line}")
    assert "(extinguished b3)" in problem
    assert "(connected n1 n2)" not in problem  # rubble stays impassable

    # --- Phase 4: rubble behind rubble -- cross one blockage, say so on paper ---
    # The road that needs clearing lies beyond other rubble with the detour
    # also gone; only road-clearing plans may cross a blockage, and only one.
    grim = diamond_belief(detour_blocked="yes")
    grim.entities["a0"] = PlatoonAgent("a0", "n0", "police")
    grim.entities["r4"] = Road("r4", "n2", "n3", 1, blocked="yes")
    clearing = GoalLedger().new_goal("unblock", "r4", 0)
    fallback = build_plan(clearing, "a0", grim)
    crossed = crossed_blocked_roads(fallback, grim)
    print(f"\nTo reach r4 the clearing plan must cross: {crossed}")
    assert crossed == ("r1",)

    relaxed = emit_pddl_problem(clearing, "a0", grim, assume_open=crossed)
    assert "(connected n1 n2)" in relaxed
    assert "(cleared r4)" in relaxed
    print("The emitted problem opens exactly that crossing:  PASS")

    # A plan for anything else simply has no route in that world.
    assert build_plan(goal, "a0", grim) is None
    print("A douse plan through rubble is refused outright:  PASS")

    print("\nPlan and problem always tell the same story: whatever the plan")
    print("assumes about the roads, the problem file states outright.")


if __name__ == "__main__":
    main()
