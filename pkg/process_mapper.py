#!/usr/bin/env python3
"""
Process Mapper - synthesizes a process view from the logical view
Inside-out: agent tasks per active class, subordinates on their master's
agent, servers for persistent/distributed classes. Outside-in: client
processes per external stimulus, servers for service-only classes.
Both finish by merging the cheapest processes until the budget holds.
"""

import dataclasses
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
import structlog
from pydantic import BaseModel, ConfigDict, Field

from architecture_model import (
    ArchitectureModel,
    Autonomy,
    Class,
    Connector,
    ConnectorKind,
    L2PEntry,
    LogicalView,
    Persistence,
    Process,
    ProcessView,
    RelationKind,
    Task,
    TaskKind,
)
from diagnostics import (
    InfeasibleMappingError,
    InvalidConstraintsError,
    NoStimuliError,
)

logger = structlog.get_logger(__name__)

UTILITY_PROCESS = "utility"


class Stimulus(BaseModel):
    """An external request and the class that handles it"""

    model_config = ConfigDict(frozen=True)

    name: str
    target: str


class MapperConstraints(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_processes: int = Field(ge=1)
    mutual_exclusion_groups: Tuple[FrozenSet[str], ...] = ()
    stimuli: Tuple[Stimulus, ...] = ()


@dataclass(frozen=True)
class MappingResult:
    process_view: ProcessView
    l2p: Tuple[L2PEntry, ...]
    log: Tuple[str, ...] = ()


@dataclass
class _Unit:
    """Classes that must share an agent: a subordination family or a mutex group"""

    classes: List[Class]
    grouped: bool = False
    agent_task: Optional[str] = None
    server_task: Optional[str] = None

    @property
    def ids(self) -> List[str]:
        return [c.id for c in self.classes]

    @property
    def rep(self) -> str:
        for candidates in (
            [c for c in self.classes if c.is_active and c.subordinate_to is None],
            [c for c in self.classes if c.is_active],
            [c for c in self.classes if c.subordinate_to is None],
            self.classes,
        ):
            if candidates:
                return candidates[0].id
        raise ValueError("empty unit")

    @property
    def active(self) -> bool:
        return any(c.is_active for c in self.classes)

    @property
    def serial(self) -> bool:
        return sum(1 for c in self.classes if c.subordinate_to is None) > 1

    @property
    def distributed(self) -> bool:
        return any(c.distributed for c in self.classes)

    @property
    def permanent(self) -> bool:
        return any(c.persistence is Persistence.PERMANENT for c in self.classes)

    @property
    def replicated(self) -> bool:
        return any(
            c.distributed and c.persistence is Persistence.PERMANENT
            for c in self.classes
        )

    @property
    def tasks(self) -> List[str]:
        return [t for t in (self.agent_task, self.server_task) if t is not None]

    @property
    def placed(self) -> bool:
        return bool(self.tasks)


@dataclass
class _PlannedProcess:
    id: str
    replicas: int = 1
    tasks: List[Task] = field(default_factory=list)


class _Planner:
    def __init__(self, logical: LogicalView, constraints: MapperConstraints):
        self.logical = logical
        self.constraints = constraints
        self._validate()
        self.units = self._build_units()
        self.unit_of: Dict[str, _Unit] = {
            c.id: unit for unit in self.units for c in unit.classes
        }
        self.processes: Dict[str, _PlannedProcess] = {}
        self.log: List[str] = []

    def _validate(self) -> None:
        classes = self.logical.class_by_id
        unknown = sorted(
            {c for group in self.constraints.mutual_exclusion_groups for c in group}
            .union(s.target for s in self.constraints.stimuli)
            .difference(classes)
        )
        if unknown:
            raise InvalidConstraintsError(
                f"constraints reference unknown class(es): {', '.join(unknown)}"
            )

    def _build_units(self) -> List[_Unit]:
        graph = nx.Graph()
        graph.add_nodes_from(c.id for c in self.logical.classes)
        for cls in self.logical.classes:
            if cls.subordinate_to in graph:
                graph.add_edge(cls.id, cls.subordinate_to)
        grouped = set()
        for group in self.constraints.mutual_exclusion_groups:
            members = sorted(group)
            grouped.update(members)
            graph.add_edges_from(zip(members, members[1:]))
        units = []
        for component in nx.connected_components(graph):
            classes = [self.logical.class_by_id[c] for c in sorted(component)]
            units.append(_Unit(classes, grouped=bool(grouped & component)))
        return sorted(units, key=lambda u: u.rep)

    def note(self, text: str) -> None:
        self.log.append(text)
        logger.debug("mapping_decision", decision=text)

    def add_process(self, process_id: str, replicas: int = 1) -> _PlannedProcess:
        process = _PlannedProcess(process_id, replicas)
        self.processes[process_id] = process
        return process

    def add_task(
        self,
        process: _PlannedProcess,
        task_id: str,
        serial: bool = False,
        kind: TaskKind = TaskKind.MAJOR,
    ) -> str:
        process.tasks.append(Task(task_id, task_id, kind, None, serial))
        return task_id

    def related_units(self, unit: _Unit) -> List[_Unit]:
        ids = set(unit.ids)
        related = {}
        for relation in self.logical.relations:
            for a, b in ((relation.source, relation.target), (relation.target, relation.source)):
                other = self.unit_of.get(b)
                if a in ids and other is not None and other is not unit:
                    related[other.rep] = other
        return [related[rep] for rep in sorted(related)]

    def coupled(self, unit: _Unit, other: _Unit) -> bool:
        """True when a non-usage relation joins the two units"""
        ours, theirs = set(unit.ids), set(other.ids)
        return any(
            relation.kind is not RelationKind.USAGE
            and {relation.source, relation.target} & ours
            and {relation.source, relation.target} & theirs
            for relation in self.logical.relations
        )

    def usage_sources(self, unit: _Unit) -> List[_Unit]:
        """Units holding a class that uses one of unit's classes"""
        ids = set(unit.ids)
        users = {}
        for relation in self.logical.relations:
            if relation.kind is not RelationKind.USAGE or relation.target not in ids:
                continue
            other = self.unit_of.get(relation.source)
            if other is not None and other is not unit:
                users[other.rep] = other
        return [users[rep] for rep in sorted(users)]

    def note_units(self) -> None:
        for unit in self.units:
            if len(unit.classes) > 1:
                reason = "mutual exclusion" if unit.grouped else "subordination"
                self.note(
                    f"classes {', '.join(unit.ids)} share one agent ({reason})"
                )
            for cls in unit.classes:
                if cls.autonomy is Autonomy.PROTECTED:
                    self.note(
                        f"protected class '{cls.id}' placed as passive; "
                        "arbitration is left to its agent"
                    )

    def place_agent(self, unit: _Unit, process: _PlannedProcess, prefix: str) -> None:
        task_id = f"{prefix}_{unit.rep}"
        unit.agent_task = self.add_task(process, task_id, serial=unit.serial)
        suffix = " (serial)" if unit.serial else ""
        self.note(
            f"{prefix} task '{task_id}' in process '{process.id}' for "
            f"{', '.join(unit.ids)}{suffix}"
        )

    def place_server(self, unit: _Unit, reuse: bool) -> None:
        process: Optional[_PlannedProcess] = None
        if reuse and not unit.distributed:
            # structurally coupled neighbours rank before mere service users
            servers = sorted(
                (not self.coupled(unit, other), self.unit_process(other.server_task))
                for other in self.related_units(unit)
                if other.server_task is not None
            )
            if servers:
                process = self.processes[servers[0][1]]
                self.note(f"'{unit.rep}' shares server process '{process.id}'")
        if process is None:
            replicas = 2 if unit.replicated else 1
            process = self.add_process(f"server_{unit.rep}", replicas)
            if replicas > 1:
                self.note(
                    f"server process '{process.id}' duplicated for availability"
                )
        unit.server_task = self.add_task(
            process, f"server_{unit.rep}", serial=unit.serial
        )
        suffix = " (serial)" if unit.serial else ""
        self.note(
            f"server task '{unit.server_task}' in process '{process.id}'{suffix}"
        )

    def unit_process(self, task_id: str) -> str:
        for process in self.processes.values():
            if any(t.id == task_id for t in process.tasks):
                return process.id
        raise KeyError(task_id)

    def join_utility(self, unit: _Unit) -> None:
        if UTILITY_PROCESS not in self.processes:
            self.add_task(self.add_process(UTILITY_PROCESS), UTILITY_PROCESS)
        unit.agent_task = UTILITY_PROCESS
        self.note(
            f"{', '.join(unit.ids)} join task '{UTILITY_PROCESS}' "
            "(shared utility process)"
        )

    def join_process(self, unit: _Unit, process: _PlannedProcess, why: str) -> None:
        """Passive units get a minor task of their own next to the agent they serve"""
        unit.agent_task = self.add_task(
            process, f"passive_{unit.rep}", kind=TaskKind.MINOR
        )
        self.note(
            f"{', '.join(unit.ids)} join process '{process.id}' "
            f"on task '{unit.agent_task}' ({why})"
        )

    def merge(self) -> None:
        while len(self.processes) > self.constraints.max_processes:
            cost = self.process_costs()
            first, second = sorted(
                self.processes.values(), key=lambda p: (cost[p.id], p.id)
            )[:2]
            keep, drop = sorted((first, second), key=lambda p: p.id)
            keep.tasks.extend(drop.tasks)
            keep.replicas = max(keep.replicas, drop.replicas)
            del self.processes[drop.id]
            self.note(
                f"merged process '{drop.id}' into '{keep.id}' "
                f"(cost {cost[drop.id] + cost[keep.id]:g})"
            )
            logger.debug("processes_merged", kept=keep.id, dropped=drop.id)
        if len(self.processes) > self.constraints.max_processes:
            raise InfeasibleMappingError(
                f"{len(self.processes)} processes exceed the budget of "
                f"{self.constraints.max_processes}"
            )

    def process_costs(self) -> Dict[str, float]:
        owner = {t.id: p.id for p in self.processes.values() for t in p.tasks}
        cost = {pid: 0.0 for pid in self.processes}
        for unit in self.units:
            for pid in {owner[t] for t in unit.tasks}:
                cost[pid] += sum(c.est_cost for c in unit.classes)
        return cost

    def result(self) -> MappingResult:
        owner = {t.id: p.id for p in self.processes.values() for t in p.tasks}
        connectors: Dict[FrozenSet[str], Connector] = {}
        for relation in self.logical.relations:
            source, target = self.unit_of.get(relation.source), self.unit_of.get(
                relation.target
            )
            if source is None or target is None:
                continue
            for a in source.tasks:
                for b in target.tasks:
                    if a != b and owner[a] != owner[b]:
                        connectors.setdefault(
                            frozenset((a, b)), Connector(ConnectorKind.MESSAGE, a, b)
                        )
        for process in self.processes.values():
            for a, b in combinations(sorted(t.id for t in process.tasks), 2):
                connectors.setdefault(
                    frozenset((a, b)), Connector(ConnectorKind.SHARED_MEMORY, a, b)
                )
        view = ProcessView(
            processes=tuple(
                Process(p.id, p.id, tuple(p.tasks), p.replicas)
                for p in self.processes.values()
            ),
            connectors=tuple(connectors.values()),
        )
        l2p = tuple(
            L2PEntry(c.id, tuple(self.unit_of[c.id].tasks))
            for c in self.logical.classes
        )
        logger.info(
            "mapping_completed",
            processes=len(view.processes),
            tasks=len(view.task_by_id),
            decisions=len(self.log),
        )
        return MappingResult(view, l2p, tuple(self.log))


def inside_out(logical: LogicalView, constraints: MapperConstraints) -> MappingResult:
    """Agent-per-active-class mapping, refined by servers and merging"""
    planner = _Planner(logical, constraints)
    planner.note_units()

    for unit in planner.units:
        if unit.active or unit.grouped:
            planner.place_agent(unit, planner.add_process(f"agent_{unit.rep}"), "agent")

    needing = [u for u in planner.units if u.distributed or u.permanent]
    for unit in sorted(needing, key=lambda u: (not u.distributed, u.rep)):
        planner.place_server(unit, reuse=True)

    for unit in planner.units:
        if unit.placed:
            continue
        users = [
            u
            for u in planner.usage_sources(unit)
            if u.agent_task is not None and (u.active or u.grouped)
        ]
        if users:
            agent = min(users, key=lambda u: planner.unit_process(u.agent_task))
            process = planner.processes[planner.unit_process(agent.agent_task)]
            planner.join_process(unit, process, f"used by '{agent.rep}'")
        else:
            planner.join_utility(unit)

    planner.merge()
    return planner.result()


def outside_in(logical: LogicalView, constraints: MapperConstraints) -> MappingResult:
    """Client-per-stimulus mapping with servers for service-only classes"""
    if not constraints.stimuli:
        raise NoStimuliError("outside-in mapping needs at least one stimulus")
    planner = _Planner(logical, constraints)
    planner.note_units()

    clients: Dict[str, Tuple[str, _Unit, _PlannedProcess]] = {}
    for stimulus in sorted(constraints.stimuli, key=lambda s: s.name):
        unit = planner.unit_of[stimulus.target]
        if unit.rep in clients:
            first = clients[unit.rep][0]
            planner.note(
                f"stimulus '{stimulus.name}' shares client of '{first}' "
                f"(same target '{unit.rep}')"
            )
            continue
        process = planner.add_process(f"client_{unit.rep}")
        planner.place_agent(unit, process, "client")
        clients[unit.rep] = (stimulus.name, unit, process)

    for unit in planner.units:
        if unit.placed:
            continue
        serves = not unit.active and planner.usage_sources(unit)
        if serves or unit.distributed:
            planner.place_server(unit, reuse=False)

    graph = logical.relation_graph()
    ranked = sorted(clients.values(), key=lambda c: c[0])
    distances = [
        nx.multi_source_dijkstra_path_length(graph, set(unit.ids))
        for _, unit, _ in ranked
    ]
    for unit in planner.units:
        # a distributed active unit already has its server but still needs an agent
        needs_agent = (unit.active or unit.grouped) and unit.agent_task is None
        if unit.placed and not needs_agent:
            continue
        best: Optional[Tuple[float, int]] = None
        for index, lengths in enumerate(distances):
            reach = [lengths[c] for c in unit.ids if c in lengths]
            if reach and (best is None or min(reach) < best[0]):
                best = (min(reach), index)
        if best is None:
            index = 0
            planner.note(f"{', '.join(unit.ids)} unreachable; default client used")
        else:
            index = best[1]
        name, _, process = ranked[index]
        if needs_agent:
            planner.place_agent(unit, process, "agent")
        else:
            planner.join_process(unit, process, f"nearest stimulus '{name}'")

    planner.merge()
    return planner.result()


def apply_mapping(
    model: ArchitectureModel, result: MappingResult
) -> Tuple[ArchitectureModel, List[str]]:
    """Install a mapping result; configurations that no longer fit are dropped"""
    notes: List[str] = []
    view = dataclasses.replace(
        result.process_view,
        rationale=model.process.rationale if model.process else "",
    )
    physical = model.physical
    if physical is not None:
        replicas = {p.id: p.replicas for p in view.processes}
        kept = []
        for config in physical.configurations:
            fits = {p.process: len(p.nodes) for p in config.placements} == replicas
            if fits:
                kept.append(config)
            else:
                notes.append(
                    f"configuration '{config.name}' dropped: it places processes "
                    "the new mapping replaced"
                )
        physical = dataclasses.replace(physical, configurations=tuple(kept))
    for text in notes:
        logger.info("configuration_dropped", detail=text)
    mapped = dataclasses.replace(model, process=view, l2p=result.l2p, physical=physical)
    return mapped, notes
