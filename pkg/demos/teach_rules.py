"""Teaching the command centre by correcting its conclusions.

Demonstrates:
- An untrained knowledge base concludes "none" for everything
- Corrections patch the rule tree locally (exception or else chaining)
- Each new rule must discriminate against the fired rule's cornerstone
- A useless correction is rejected; accepted ones never break old cases
- Replaying the shipped training story reproduces the packaged ruleset

Run: python demos/teach_rules.py
"""

from goalsmith.domain import load_ruleset, packaged_ruleset, starter_kb
from goalsmith.dsl import tree_text
from goalsmith.rdr import (
    Case,
    Condition,
    Literal,
    NonDiscriminatingError,
    apply_update,
    candidate_differences,
    evaluate,
    next_case_id,
    verify_cornerstones,
)


def lit(slot, value):
    return Literal(slot, value, scoped=slot not in ("GoalA", "GoalB"))


def cond(*pairs):
    return Condition(tuple(lit(s, v) for s, v in pairs))


def correct(tree, case, verdict, *pairs, case_id=None):
    """One trainer correction, narrated."""
    was = evaluate(tree, case).conclusion
    tree = apply_update(tree, case, verdict, cond(*pairs), case_id=case_id)
    print(f"  {case.id}: centre said {was!r}, trainer said {verdict!r} "
          f"because {' and '.join(f'{s}={v}' for s, v in pairs)}")
    assert verify_cornerstones(tree) == [], "an old case broke!"
    return tree


def main() -> None:
    print("=== Teaching the rules ===\n")

    trees = starter_kb().trees()

    # --- Phase 1: the untrained centre is useless ---
    burning = Case("b7", {"fieryness": "burning", "scouted": "yes"})
    building = trees["building"]
    print(f"Untrained verdict on a burning building: "
          f"{evaluate(building, burning).conclusion!r}\n")

    # --- Phase 2: corrections, one sighted case at a time ---
    print("Building corrections:")
    unscouted = Case("building1", {"fieryness": "none", "scouted": "no"})
    building = correct(building, unscouted, "scout", ("scouted", "no"),
                       case_id="building1")
    for stage in ("heating", "burning", "inferno"):
        seen = Case(f"seen_{stage}", {"fieryness": stage, "scouted": "yes"})
        building = correct(building, seen, "douse", ("fieryness", stage))

    print("\nThe tree the corrections grew:")
    print(tree_text(building, indent=1))

    # --- Phase 3: the candidate literals come from the cornerstone diff ---
    print("\nRoad corrections:")
    road = trees["road"]
    requested = Case("road_9", {"blocked": "yes", "has_civilians": "no",
                                "requested": "yes"})
    fired = evaluate(road, requested)
    stone = road.cornerstones[fired.node.cornerstone_id]
    offered = candidate_differences(stone, requested)
    print(f"  slots that differ from the fired rule's cornerstone: "
          f"{[f'{c.slot}={c.value}' for c in offered]}")
    road = correct(road, requested, "unblock",
                   ("requested", "yes"), ("blocked", "yes"))

    # --- Phase 4: a correction that cannot tell the cases apart is refused ---
    same_again = Case("road_10", {"blocked": "yes", "has_civilians": "no",
                                  "requested": "yes"})
    try:
        apply_update(road, same_again, "none", cond(("blocked", "yes")))
        raise SystemExit("that update should have been refused")
    except NonDiscriminatingError as err:
        print(f"\nRefused, as it must be: {err}")

    # --- Phase 5: the trapped-civilian case arrives later, chains as else ---
    trapped = Case("road_14", {"blocked": "yes", "has_civilians": "yes",
                               "requested": "no"})
    road = correct(road, trapped, "unblock",
                   ("has_civilians", "yes"), ("blocked", "yes"))

    # --- Phase 6: humans and precedence ---
    print("\nHuman correction:")
    human = trees["human"]
    brigade = Case("human_937073426",
                   {"buriedness": "buried", "health": "injured", "type": "agent"})
    human = correct(human, brigade, "unbury", ("buriedness", "buried"),
                    case_id=next_case_id(human, "brigade"))

    print("\nPrecedence corrections (everything urgent outranks scouting):")
    order = trees["order"]
    for ahead in ("rescueGoal", "clearGoal", "douseGoal"):
        pair = Case(f"before({ahead}, scoutGoal)",
                    {"GoalA": ahead, "GoalB": "scoutGoal"})
        order = correct(order, pair, "true",
                        ("GoalA", ahead), ("GoalB", "scoutGoal"),
                        case_id=pair.id)

    # --- Verify: this story IS the shipped ruleset ---
    shipped = load_ruleset(packaged_ruleset("rescue")).trees()
    print()
    for name, grown in (("building", building), ("road", road),
                        ("human", human), ("order", order)):
        assert tree_text(grown) == tree_text(shipped[name]), name
        print(f"{name} tree matches the shipped ruleset:  PASS")

    print("\nEvery rule in the packaged knowledge base is one of these")
    print("corrections -- nothing was written by hand.")


if __name__ == "__main__":
    main()
