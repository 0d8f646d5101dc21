"""Open population, enduring pairwise ties, and cell bookkeeping.

The monitored population changes as investigations open and close: entrants
join at the start of a tick, leavers drop at the end.  A tie, once created,
endures while both endpoints remain monitored; when an endpoint leaves, the
tie and its rate belief move to an archive instead of being deleted.  Cells
are analyst-designated member sets that must induce a connected subgraph.

All updates are functional: every mutator returns a new graph value, which
keeps tick commits atomic and snapshots consistent for readers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb
from typing import Iterable, Mapping

from .edges import EdgeBelief

__all__ = [
    "EntityRecord",
    "EdgeRecord",
    "Cell",
    "PopulationGraph",
    "UnknownEntity",
    "DuplicateEdge",
    "EDGE_ORIGINS",
    "apply_population_delta",
    "add_edge",
    "cell_density",
    "connected",
    "canonical_pair",
]

EDGE_ORIGINS = ("kinship", "affiliation", "prior-crime", "observed-communication")


class UnknownEntity(KeyError):
    """Operation references an entity that is not currently monitored."""


class DuplicateEdge(ValueError):
    """Edge creation requested for a pair that already has a live edge."""


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    a, b = str(a), str(b)
    if a == b:
        raise ValueError(f"self-loop on entity {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class EntityRecord:
    entity_id: str
    entered: int
    exited: int | None = None

    @property
    def present(self) -> bool:
        return self.exited is None


@dataclass(frozen=True)
class EdgeRecord:
    pair: tuple[str, str]
    origin: str
    created: int
    belief: EdgeBelief
    last_update_tick: int | None = None
    archived_at: int | None = None

    def __post_init__(self):
        if self.origin not in EDGE_ORIGINS:
            raise ValueError(f"unknown edge origin {self.origin!r}")

    @property
    def live(self) -> bool:
        return self.archived_at is None


@dataclass(frozen=True)
class Cell:
    """Analyst-designated member set with its own collective threat filter."""

    cell_id: str
    members: frozenset[str]
    ideal_size: float
    threshold: float
    individual_threat_states: frozenset[int]
    cell_threat_states: frozenset[int]
    connectivity_broken: bool = False

    def __init__(self, cell_id, members, ideal_size, threshold,
                 individual_threat_states, cell_threat_states, connectivity_broken=False):
        object.__setattr__(self, "cell_id", str(cell_id))
        object.__setattr__(self, "members", frozenset(str(p) for p in members))
        object.__setattr__(self, "ideal_size", float(ideal_size))
        object.__setattr__(self, "threshold", float(threshold))
        object.__setattr__(self, "individual_threat_states", frozenset(individual_threat_states))
        object.__setattr__(self, "cell_threat_states", frozenset(cell_threat_states))
        object.__setattr__(self, "connectivity_broken", bool(connectivity_broken))
        if not self.members:
            raise ValueError("cell must have at least one member")
        if self.ideal_size <= 0 or self.threshold < 0:
            raise ValueError("ideal size must be positive and threshold nonnegative")


@dataclass(frozen=True)
class PopulationGraph:
    """Snapshot of the monitored population and its ties at one tick."""

    entities: Mapping[str, EntityRecord] = field(default_factory=dict)
    edges: Mapping[tuple[str, str], EdgeRecord] = field(default_factory=dict)
    archived: tuple[EdgeRecord, ...] = ()
    cells: Mapping[str, Cell] = field(default_factory=dict)
    tick: int = 0

    def present_ids(self) -> set[str]:
        return {eid for eid, rec in self.entities.items() if rec.present}

    def live_edges(self) -> dict[tuple[str, str], EdgeRecord]:
        return {pair: rec for pair, rec in self.edges.items() if rec.live}

    def edge(self, a: str, b: str) -> EdgeRecord | None:
        return self.edges.get(canonical_pair(a, b))

    def has_live_edge(self, a: str, b: str) -> bool:
        rec = self.edge(a, b)
        return rec is not None and rec.live

    def with_edge_record(self, record: EdgeRecord) -> "PopulationGraph":
        edges = dict(self.edges)
        edges[record.pair] = record
        return replace(self, edges=edges)

    def with_cell(self, cell: Cell) -> "PopulationGraph":
        cells = dict(self.cells)
        cells[cell.cell_id] = cell
        return replace(self, cells=cells)


def apply_population_delta(
    graph: PopulationGraph,
    additions: Iterable[str] = (),
    removals: Iterable[str] = (),
    tick: int = 0,
) -> PopulationGraph:
    """Admit new entities and retire leavers.

    Leavers take their incident live edges into the archive; cells that lose
    a member or whose induced subgraph falls apart are flagged rather than
    dissolved, leaving the repair decision to the analyst.
    """
    additions = {str(a) for a in additions}
    removals = {str(r) for r in removals}
    present = graph.present_ids()
    clash = additions & present
    if clash:
        raise ValueError(f"entities already present: {sorted(clash)}")
    missing = removals - present
    if missing:
        raise UnknownEntity(f"cannot remove unknown entities: {sorted(missing)}")

    entities = dict(graph.entities)
    for eid in sorted(additions):
        entities[eid] = EntityRecord(entity_id=eid, entered=tick)
    for eid in sorted(removals):
        entities[eid] = replace(entities[eid], exited=tick)

    edges = dict(graph.edges)
    archived = list(graph.archived)
    for pair, rec in sorted(graph.edges.items()):
        if rec.live and (pair[0] in removals or pair[1] in removals):
            retired = replace(rec, archived_at=tick)
            archived.append(retired)
            del edges[pair]

    out = replace(
        graph,
        entities=entities,
        edges=edges,
        archived=tuple(archived),
        tick=tick,
    )
    if removals:
        cells = {}
        for cid, cell in out.cells.items():
            still = cell.members & out.present_ids()
            broken = still != cell.members or not still or not connected(out, still)
            cells[cid] = replace(cell, connectivity_broken=broken)
        out = replace(out, cells=cells)
    return out


def add_edge(
    graph: PopulationGraph,
    pair: tuple[str, str],
    origin: str,
    tick: int,
    belief: EdgeBelief,
) -> PopulationGraph:
    """Create an enduring tie between two present entities."""
    pair = canonical_pair(*pair)
    present = graph.present_ids()
    absent = [p for p in pair if p not in present]
    if absent:
        raise UnknownEntity(f"edge endpoints not present: {absent}")
    if graph.has_live_edge(*pair):
        raise DuplicateEdge(f"edge {pair} already exists")
    if belief.pair != pair:
        raise ValueError("belief pair does not match the edge pair")
    record = EdgeRecord(pair=pair, origin=origin, created=tick, belief=belief)
    return graph.with_edge_record(record)


def cell_density(graph: PopulationGraph, cell: Cell) -> float:
    """Share of possible member pairs that hold a live tie."""
    n = len(cell.members)
    if n < 2:
        raise ValueError("density needs at least two members")
    k = sum(
        1
        for pair, rec in graph.edges.items()
        if rec.live and pair[0] in cell.members and pair[1] in cell.members
    )
    return k / comb(n, 2)


def connected(graph: PopulationGraph, member_set: Iterable[str]) -> bool:
    """Whether the members induce a connected subgraph of live ties."""
    members = {str(p) for p in member_set}
    if not members:
        raise ValueError("connectivity of an empty member set is undefined")
    if len(members) == 1:
        return True
    adjacency: dict[str, set[str]] = {p: set() for p in members}
    for (a, b), rec in graph.edges.items():
        if rec.live and a in members and b in members:
            adjacency[a].add(b)
            adjacency[b].add(a)
    start = next(iter(members))
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen == members
