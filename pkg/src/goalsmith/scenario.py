"""Scenario files: schema, validation, entity counts, and synthesis.

A scenario is a JSON document with four sections:

    map       nodes [{id, x, y}], roads [{id, between: [a, b], length}],
              buildings [{id, node}]
    entities  initial attribute states; buildings/roads entries are optional
              (defaults: unscouted, unlit, unblocked), civilians/agents are
              the entity roster and are required
    dynamics  fire_escalation_interval, spread_probability, spread_radius,
              burial_decay, sensor_range, agent_speed
    limits    step_budget

Coordinates exist for map rendering only; all distances in the dynamics are
graph hops or road lengths.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Dynamics:
    fire_escalation_interval: int = 20
    spread_probability: float = 0.05
    spread_radius: int = 1
    burial_decay: int = 1
    sensor_range: int = 2
    agent_speed: int = 1


@dataclass
class Scenario:
    name: str
    nodes: dict[str, tuple[float, float]]
    roads: list[dict]  # id, between, length
    buildings: list[dict]  # id, node
    building_states: dict[str, dict]
    road_states: dict[str, dict]
    civilians: list[dict]
    agents: list[dict]
    dynamics: Dynamics = field(default_factory=Dynamics)
    step_budget: int = 300

    def counts(self) -> dict[str, int]:
        return {
            "civilians": len(self.civilians),
            "agents": len(self.agents),
            "buildings": len(self.buildings),
            "roads": len(self.roads),
        }


FIERYNESS = ("none", "heating", "burning", "inferno", "destroyed")
AGENT_KINDS = ("fire_brigade", "ambulance", "police")
YES_NO = ("yes", "no")


def load_scenario_file(path: str | Path) -> Scenario:
    return parse_scenario(json.loads(Path(path).read_text()))


def parse_scenario(doc: dict) -> Scenario:
    try:
        map_ = doc["map"]
        entities = doc.get("entities", {})
    except (TypeError, KeyError) as err:
        raise ScenarioError(f"missing section: {err}") from None

    nodes: dict[str, tuple[float, float]] = {}
    for node in map_.get("nodes", []):
        nid = node["id"]
        if nid in nodes:
            raise ScenarioError(f"duplicate node id {nid!r}")
        nodes[nid] = (float(node.get("x", 0.0)), float(node.get("y", 0.0)))

    roads, seen = [], set()
    for road in map_.get("roads", []):
        rid = road["id"]
        if rid in seen:
            raise ScenarioError(f"duplicate road id {rid!r}")
        seen.add(rid)
        a, b = road["between"]
        for end in (a, b):
            if end not in nodes:
                raise ScenarioError(f"road {rid!r} references missing node {end!r}")
        if a == b:
            raise ScenarioError(f"road {rid!r} loops on node {a!r}")
        length = road.get("length", 1)
        if not isinstance(length, (int, float)) or length <= 0:
            raise ScenarioError(f"road {rid!r} has non-positive length")
        roads.append({"id": rid, "between": [a, b], "length": length})

    buildings = []
    for building in map_.get("buildings", []):
        bid = building["id"]
        if bid in seen:
            raise ScenarioError(f"duplicate entity id {bid!r}")
        seen.add(bid)
        if building["node"] not in nodes:
            raise ScenarioError(f"building {bid!r} references missing node {building['node']!r}")
        buildings.append({"id": bid, "node": building["node"]})

    building_ids = {b["id"] for b in buildings}
    road_ids = {r["id"] for r in roads}

    building_states = {}
    for state in entities.get("buildings", []):
        bid = state["id"]
        if bid not in building_ids:
            raise ScenarioError(f"state for unknown building {bid!r}")
        _check(state.get("fieryness", "none"), FIERYNESS, f"building {bid} fieryness")
        _check(state.get("scouted", "no"), YES_NO, f"building {bid} scouted")
        building_states[bid] = state

    road_states = {}
    for state in entities.get("roads", []):
        rid = state["id"]
        if rid not in road_ids:
            raise ScenarioError(f"state for unknown road {rid!r}")
        for attr in ("blocked", "requested", "has_civilians"):
            _check(state.get(attr, "no"), YES_NO, f"road {rid} {attr}")
        road_states[rid] = state

    civilians, agents = [], []
    for person in entities.get("civilians", []):
        civilians.append(_check_person(person, nodes, seen))
    for person in entities.get("agents", []):
        agent = _check_person(person, nodes, seen)
        _check(agent.get("kind"), AGENT_KINDS, f"agent {agent['id']} kind")
        agents.append(agent)

    dyn = doc.get("dynamics", {})
    dynamics = Dynamics(
        fire_escalation_interval=int(dyn.get("fire_escalation_interval", 20)),
        spread_probability=float(dyn.get("spread_probability", 0.05)),
        spread_radius=int(dyn.get("spread_radius", 1)),
        burial_decay=int(dyn.get("burial_decay", 1)),
        sensor_range=int(dyn.get("sensor_range", 2)),
        agent_speed=int(dyn.get("agent_speed", 1)),
    )
    if dynamics.fire_escalation_interval < 1:
        raise ScenarioError("fire_escalation_interval must be >= 1")
    if not 0.0 <= dynamics.spread_probability <= 1.0:
        raise ScenarioError("spread_probability must be within [0, 1]")
    for attr in ("spread_radius", "burial_decay", "sensor_range"):
        if getattr(dynamics, attr) < 0:
            raise ScenarioError(f"{attr} must be >= 0")
    if dynamics.agent_speed < 1:
        raise ScenarioError("agent_speed must be >= 1")

    return Scenario(
        name=doc.get("name", "scenario"),
        nodes=nodes,
        roads=roads,
        buildings=buildings,
        building_states=building_states,
        road_states=road_states,
        civilians=civilians,
        agents=agents,
        dynamics=dynamics,
        step_budget=int(doc.get("limits", {}).get("step_budget", 300)),
    )


def _check(value, allowed, what: str):
    if value not in allowed:
        raise ScenarioError(f"{what} must be one of {list(allowed)}, got {value!r}")
    return value


def _check_person(person: dict, nodes: dict, seen: set) -> dict:
    pid = person["id"]
    if pid in seen:
        raise ScenarioError(f"duplicate entity id {pid!r}")
    seen.add(pid)
    if person["node"] not in nodes:
        raise ScenarioError(f"{pid!r} placed at missing node {person['node']!r}")
    hp = person.get("hp", 100)
    if not 0 <= hp <= 100:
        raise ScenarioError(f"{pid!r} hp {hp} outside 0..100")
    if person.get("burial_depth", 0) < 0:
        raise ScenarioError(f"{pid!r} burial_depth negative")
    return person


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def synthesize(
    name: str,
    seed: int,
    civilians: int,
    agents: int,
    buildings: int,
    roads: int,
    nodes: int | None = None,
    burning_fraction: float = 0.05,
    buried_fraction: float = 0.3,
    blocked_fraction: float = 0.08,
    scouted_fraction: float = 0.2,
    step_budget: int = 300,
    dynamics: dict | None = None,
) -> dict:
    """Build a random connected scenario document with the requested
    per-category counts (the generated graph is a spanning tree plus chords,
    so `roads` must be at least `nodes` - 1)."""
    rng = random.Random(seed)
    n_nodes = nodes if nodes is not None else max(4, min(roads + 1, (buildings + roads) // 2))
    if roads < n_nodes - 1:
        raise ScenarioError("not enough roads to connect the map")
    if roads > n_nodes * (n_nodes - 1) // 2:
        raise ScenarioError("too many roads for a simple graph")

    node_ids = [f"n{i}" for i in range(n_nodes)]
    doc_nodes = [
        {"id": nid, "x": round(rng.uniform(0, 100), 1), "y": round(rng.uniform(0, 100), 1)}
        for nid in node_ids
    ]
    edges: set[tuple[str, str]] = set()
    doc_roads = []
    for i in range(1, n_nodes):
        a, b = node_ids[rng.randrange(i)], node_ids[i]
        edges.add((min(a, b), max(a, b)))
    while len(edges) < roads:
        a, b = rng.sample(node_ids, 2)
        edges.add((min(a, b), max(a, b)))
    for i, (a, b) in enumerate(sorted(edges)):
        doc_roads.append({"id": f"r{i}", "between": [a, b], "length": rng.randint(1, 4)})

    doc_buildings = [
        {"id": f"b{i}", "node": rng.choice(node_ids)} for i in range(buildings)
    ]
    building_states = []
    for b in doc_buildings:
        fiery = "none"
        if rng.random() < burning_fraction:
            fiery = rng.choice(("heating", "burning"))
        building_states.append(
            {
                "id": b["id"],
                "fieryness": fiery,
                "scouted": "yes" if rng.random() < scouted_fraction else "no",
            }
        )
    road_states = [
        {"id": r["id"], "blocked": "yes" if rng.random() < blocked_fraction else "no"}
        for r in doc_roads
    ]

    doc_civilians = []
    for i in range(civilians):
        buried = rng.random() < buried_fraction
        doc_civilians.append(
            {
                "id": f"c{i}",
                "node": rng.choice(node_ids),
                "hp": rng.randint(40, 100),
                "burial_depth": rng.randint(2, 5) if buried else 0,
            }
        )
    kinds = [AGENT_KINDS[i % 3] for i in range(agents)]
    doc_agents = [
        {"id": f"a{i}", "kind": kinds[i], "node": rng.choice(node_ids), "hp": 100}
        for i in range(agents)
    ]

    return {
        "name": name,
        "map": {"nodes": doc_nodes, "roads": doc_roads, "buildings": doc_buildings},
        "entities": {
            "buildings": building_states,
            "roads": road_states,
            "civilians": doc_civilians,
            "agents": doc_agents,
        },
        "dynamics": dynamics or {},
        "limits": {"step_budget": step_budget},
    }
