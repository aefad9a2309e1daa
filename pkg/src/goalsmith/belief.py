"""Shared belief store: the union of everything any agent has observed,
merged last-writer-wins by observation time."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .sim import Entity, WorldState, observe


@dataclass
class BeliefState:
    """What the team currently believes about each entity, with the time
    each belief was last refreshed."""

    entities: dict[str, Entity] = field(default_factory=dict)
    observed_at: dict[str, int] = field(default_factory=dict)

    def snapshot(self) -> "BeliefState":
        return BeliefState(copy.deepcopy(self.entities), dict(self.observed_at))


def merge_observations(
    belief: BeliefState, seen: dict[str, Entity], at: int
) -> list[str]:
    """Fold one sensor sweep into the belief; returns ids that changed.

    An incoming reading wins whenever it is at least as fresh as the stored
    one, so re-observing never resurrects stale state.
    """
    changed = []
    for eid, entity in seen.items():
        prior_t = belief.observed_at.get(eid, -1)
        if at < prior_t:
            continue
        prior = belief.entities.get(eid)
        if prior is None or prior != entity:
            changed.append(eid)
        belief.entities[eid] = copy.deepcopy(entity)
        belief.observed_at[eid] = at
    return changed


def sense_all(belief: BeliefState, world: WorldState) -> list[str]:
    """Merge every live agent's observation of the current world."""
    changed: set[str] = set()
    for agent in sorted(world.agents(), key=lambda a: a.id):
        if agent.hp <= 0:
            continue
        changed.update(merge_observations(belief, observe(world, agent.id), world.time))
    return sorted(changed)


def initial_belief(world: WorldState) -> BeliefState:
    """Start-of-run belief: only what the agents can see from their posts.

    Everything else — distant fires, blockades, civilians — enters the
    picture when somebody gets close enough to sense it.
    """
    belief = BeliefState()
    sense_all(belief, world)
    return belief
