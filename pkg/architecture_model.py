#!/usr/bin/env python3
"""
Architecture Model - the 4+1 view domain types
Logical, process, development, physical and scenario views plus the
cross-view mappings, with reference resolution and well-formedness checks
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import structlog

from diagnostics import Diagnostic, SourceSpan, make_diagnostic, sort_diagnostics

logger = structlog.get_logger(__name__)

IDENTIFIER = re.compile(r"[a-z][a-z0-9_]*\Z")


class ViewKind(Enum):
    LOGICAL = "logical"
    PROCESS = "process"
    DEVELOPMENT = "development"
    PHYSICAL = "physical"
    SCENARIOS = "scenarios"


class Autonomy(Enum):
    ACTIVE = "active"
    PASSIVE = "passive"
    PROTECTED = "protected"


class Persistence(Enum):
    TRANSIENT = "transient"
    PERMANENT = "permanent"


class RelationKind(Enum):
    ASSOCIATION = "association"
    INHERITANCE = "inheritance"
    CONTAINMENT = "containment"
    USAGE = "usage"


class TaskKind(Enum):
    MAJOR = "major"
    MINOR = "minor"


class ConnectorKind(Enum):
    """Declaration order is the tie-break order used when picking connectors"""

    MESSAGE = "message"
    RPC = "rpc"
    BROADCAST = "broadcast"
    RENDEZVOUS = "rendezvous"
    SHARED_MEMORY = "shared_memory"

    @property
    def rank(self) -> int:
        return list(ConnectorKind).index(self)

    @property
    def inter_process(self) -> bool:
        return self in INTER_PROCESS_KINDS


INTER_PROCESS_KINDS: FrozenSet[ConnectorKind] = frozenset(
    {ConnectorKind.MESSAGE, ConnectorKind.RPC, ConnectorKind.BROADCAST}
)


class Medium(Enum):
    LAN = "lan"
    WAN = "wan"
    BUS = "bus"
    OTHER = "other"


def _span() -> Any:
    return field(default=None, compare=False, repr=False)


def _freeze(obj: Any, name: str, values: Iterable[Any], key: Any = None) -> None:
    items = tuple(values)
    if key is not None:
        items = tuple(sorted(items, key=key))
    object.__setattr__(obj, name, items)


# Logical view


@dataclass(frozen=True)
class ClassCategory:
    id: str
    name: str = ""
    members: Tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "members", self.members, key=lambda m: m)


@dataclass(frozen=True)
class Class:
    id: str
    name: str = ""
    category: Optional[str] = None
    operations: Tuple[str, ...] = ()
    autonomy: Autonomy = Autonomy.PASSIVE
    persistence: Persistence = Persistence.TRANSIENT
    subordinate_to: Optional[str] = None
    distributed: bool = False
    utility: bool = False
    est_cost: float = 1.0
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "operations", self.operations)

    @property
    def is_active(self) -> bool:
        return self.autonomy is Autonomy.ACTIVE


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LogicalView:
    categories: Tuple[ClassCategory, ...] = ()
    classes: Tuple[Class, ...] = ()
    relations: Tuple[Relation, ...] = ()
    rationale: str = ""
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "categories", self.categories, key=lambda c: c.id)
        _freeze(self, "classes", self.classes, key=lambda c: c.id)
        _freeze(
            self,
            "relations",
            self.relations,
            key=lambda r: (r.source, r.target, r.kind.value),
        )

    @cached_property
    def class_by_id(self) -> Dict[str, Class]:
        return {c.id: c for c in self.classes}

    @cached_property
    def category_by_id(self) -> Dict[str, ClassCategory]:
        return {c.id: c for c in self.categories}

    def relation_graph(self) -> "nx.Graph":
        """Undirected graph of all relations between declared classes"""
        graph = nx.Graph()
        graph.add_nodes_from(c.id for c in self.classes)
        for relation in self.relations:
            if relation.source in graph and relation.target in graph:
                graph.add_edge(relation.source, relation.target)
        return graph


# Process view


@dataclass(frozen=True)
class Task:
    id: str
    name: str = ""
    kind: TaskKind = TaskKind.MAJOR
    period_ms: Optional[float] = None
    serial: bool = False
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Process:
    id: str
    name: str = ""
    tasks: Tuple[Task, ...] = ()
    replicas: int = 1
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "tasks", self.tasks, key=lambda t: t.id)


@dataclass(frozen=True)
class Connector:
    kind: ConnectorKind
    source: str
    target: str
    span: Optional[SourceSpan] = _span()

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.source}->{self.target}"

    def joins(self, a: str, b: str) -> bool:
        return {self.source, self.target} == {a, b}


@dataclass(frozen=True)
class ProcessView:
    processes: Tuple[Process, ...] = ()
    connectors: Tuple[Connector, ...] = ()
    rationale: str = ""
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "processes", self.processes, key=lambda p: p.id)
        _freeze(
            self,
            "connectors",
            self.connectors,
            key=lambda c: (c.source, c.target, c.kind.rank),
        )

    @cached_property
    def process_by_id(self) -> Dict[str, Process]:
        return {p.id: p for p in self.processes}

    @cached_property
    def task_by_id(self) -> Dict[str, Task]:
        return {t.id: t for p in self.processes for t in p.tasks}

    @cached_property
    def process_of_task(self) -> Dict[str, str]:
        return {t.id: p.id for p in self.processes for t in p.tasks}


# Development view


@dataclass(frozen=True)
class LayerDef:
    number: int
    name: str = ""
    responsibility: str = ""
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Subsystem:
    id: str
    name: str = ""
    layer: int = 1
    modules: Tuple[str, ...] = ()
    ksloc: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "modules", self.modules, key=lambda m: m)


@dataclass(frozen=True)
class DevDependency:
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DevelopmentView:
    layers: Tuple[LayerDef, ...] = ()
    subsystems: Tuple[Subsystem, ...] = ()
    dependencies: Tuple[DevDependency, ...] = ()
    rationale: str = ""
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "layers", self.layers, key=lambda layer: layer.number)
        _freeze(self, "subsystems", self.subsystems, key=lambda s: s.id)
        _freeze(
            self, "dependencies", self.dependencies, key=lambda d: (d.source, d.target)
        )

    @cached_property
    def subsystem_by_id(self) -> Dict[str, Subsystem]:
        return {s.id: s for s in self.subsystems}


# Physical view


@dataclass(frozen=True)
class Node:
    id: str
    name: str = ""
    capacity: Optional[float] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Link:
    medium: Medium
    endpoints: Tuple[str, ...] = ()
    bandwidth: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "endpoints", set(self.endpoints), key=lambda n: n)

    @property
    def label(self) -> str:
        return f"{self.medium.value}:{'+'.join(self.endpoints)}"


@dataclass(frozen=True)
class Placement:
    """One process placed on one node per replica, in replica order"""

    process: str
    nodes: Tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "nodes", self.nodes)


@dataclass(frozen=True)
class Configuration:
    name: str
    placements: Tuple[Placement, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "placements", self.placements, key=lambda p: p.process)

    @property
    def placement(self) -> Dict[str, Tuple[str, ...]]:
        return {p.process: p.nodes for p in self.placements}


@dataclass(frozen=True)
class PhysicalView:
    nodes: Tuple[Node, ...] = ()
    links: Tuple[Link, ...] = ()
    configurations: Tuple[Configuration, ...] = ()
    rationale: str = ""
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "nodes", self.nodes, key=lambda n: n.id)
        _freeze(
            self, "links", self.links, key=lambda link: (link.medium.value, link.endpoints)
        )
        _freeze(self, "configurations", self.configurations, key=lambda c: c.name)

    @cached_property
    def configuration_by_name(self) -> Dict[str, Configuration]:
        return {c.name: c for c in self.configurations}

    @cached_property
    def node_by_id(self) -> Dict[str, Node]:
        return {n.id: n for n in self.nodes}


# Scenarios


@dataclass(frozen=True)
class Step:
    seq: int
    source: str
    target: str
    operation: str
    connector_hint: Optional[ConnectorKind] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str = ""
    frequency_hz: Optional[float] = None
    steps: Tuple[Step, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "steps", self.steps, key=lambda s: s.seq)


@dataclass(frozen=True)
class ScenarioView:
    scenarios: Tuple[Scenario, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "scenarios", self.scenarios, key=lambda s: s.id)

    @cached_property
    def scenario_by_id(self) -> Dict[str, Scenario]:
        return {s.id: s for s in self.scenarios}


# Cross-view mappings


@dataclass(frozen=True)
class L2PEntry:
    """Class to task mapping; task order is significant (first = dispatch task)"""

    class_id: str
    tasks: Tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "tasks", self.tasks)


@dataclass(frozen=True)
class ModuleRef:
    subsystem: str
    module: str

    def __str__(self) -> str:
        return f"{self.subsystem}.{self.module}"


@dataclass(frozen=True)
class L2DEntry:
    class_id: str
    modules: Tuple[ModuleRef, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "modules", self.modules)


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    rationale: str = ""
    logical: Optional[LogicalView] = None
    process: Optional[ProcessView] = None
    development: Optional[DevelopmentView] = None
    physical: Optional[PhysicalView] = None
    scenarios: Optional[ScenarioView] = None
    l2p: Tuple[L2PEntry, ...] = ()
    l2d: Tuple[L2DEntry, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        _freeze(self, "l2p", self.l2p, key=lambda e: e.class_id)
        _freeze(self, "l2d", self.l2d, key=lambda e: e.class_id)

    def view(self, kind: ViewKind) -> Any:
        return getattr(self, kind.value)

    @cached_property
    def l2p_map(self) -> Dict[str, Tuple[str, ...]]:
        return {e.class_id: e.tasks for e in self.l2p}

    @cached_property
    def l2d_map(self) -> Dict[str, Tuple[ModuleRef, ...]]:
        return {e.class_id: e.modules for e in self.l2d}

    def rationales(self) -> List[Tuple[str, str]]:
        """(scope, text) pairs for every non-empty rationale field"""
        found = []
        if self.rationale:
            found.append(("architecture", self.rationale))
        for kind in (
            ViewKind.LOGICAL,
            ViewKind.PROCESS,
            ViewKind.DEVELOPMENT,
            ViewKind.PHYSICAL,
        ):
            view = self.view(kind)
            if view is not None and view.rationale:
                found.append((kind.value, view.rationale))
        return found


def view_presence(model: ArchitectureModel) -> FrozenSet[ViewKind]:
    """Which of the five views the model declares"""
    return frozenset(kind for kind in ViewKind if model.view(kind) is not None)


def class_family_root(logical: LogicalView, class_id: str) -> str:
    """Follow subordinate_to to the independent master (cycle-safe)"""
    seen = {class_id}
    current = class_id
    while True:
        cls = logical.class_by_id.get(current)
        if cls is None or cls.subordinate_to is None:
            return current
        if cls.subordinate_to in seen:
            return current
        seen.add(cls.subordinate_to)
        current = cls.subordinate_to


def is_subordinate_to(logical: LogicalView, class_id: str, master_id: str) -> bool:
    """True when master_id appears on class_id's subordination chain"""
    seen = {class_id}
    current = logical.class_by_id.get(class_id)
    while current is not None and current.subordinate_to is not None:
        if current.subordinate_to == master_id:
            return True
        if current.subordinate_to in seen:
            return False
        seen.add(current.subordinate_to)
        current = logical.class_by_id.get(current.subordinate_to)
    return False


class _Resolver:
    """Collects dangling-reference, duplicate-id and invariant diagnostics"""

    def __init__(self, model: ArchitectureModel):
        self.model = model
        self.found: List[Diagnostic] = []

    def report(self, rule: str, message: str, span: Optional[SourceSpan]) -> None:
        self.found.append(make_diagnostic(rule, message, span or self.model.span))

    def identifier(self, kind: str, value: str, span: Optional[SourceSpan]) -> None:
        if not IDENTIFIER.match(value):
            self.report(
                "E_INVALID",
                f"{kind} id '{value}' must match [a-z][a-z0-9_]*",
                span,
            )

    def unique(self, kind: str, items: Sequence[Tuple[Any, Optional[SourceSpan]]]):
        seen = set()
        for key, span in items:
            if key in seen:
                self.report("E_DUP", f"duplicate {kind} id '{key}'", span)
            seen.add(key)

    def positive(self, what: str, value: Optional[float], span, strict=True) -> None:
        if value is None:
            return
        if value < 0 or (strict and value == 0):
            bound = "positive" if strict else "nonnegative"
            self.report("E_INVALID", f"{what} must be {bound}, got {value}", span)

    def cycles(self, kind: str, edges: Iterable[Tuple[str, str, Any]]) -> None:
        graph = nx.DiGraph()
        spans = {}
        for source, target, span in edges:
            graph.add_edge(source, target)
            spans.setdefault(source, span)
        for component in nx.strongly_connected_components(graph):
            members = sorted(component)
            if len(members) == 1 and not graph.has_edge(members[0], members[0]):
                continue
            self.report(
                "E_CYCLE",
                f"{kind} cycle through {', '.join(members)}",
                spans.get(members[0]),
            )

    def run(self) -> List[Diagnostic]:
        model = self.model
        self.identifier("architecture", model.name, model.span)
        present = view_presence(model)
        if not present:
            self.report("E_VIEW", "architecture declares no view", model.span)
        if model.scenarios is not None and model.logical is None:
            self.report(
                "E_VIEW",
                "scenarios view requires a logical view",
                model.scenarios.span,
            )
        if model.logical is not None:
            self.logical(model.logical)
        if model.process is not None:
            self.process(model.process)
        if model.development is not None:
            self.development(model.development)
        if model.physical is not None:
            self.physical(model.physical)
        if model.scenarios is not None:
            self.scenarios(model.scenarios)
        self.mappings()
        return sort_diagnostics(self.found)

    def logical(self, view: LogicalView) -> None:
        self.unique("category", [(c.id, c.span) for c in view.categories])
        self.unique("class", [(c.id, c.span) for c in view.classes])
        classes = view.class_by_id
        for category in view.categories:
            self.identifier("category", category.id, category.span)
            for member in category.members:
                if member not in classes:
                    self.report(
                        "E_REF", f"unresolved class '{member}'", category.span
                    )
        for cls in view.classes:
            self.identifier("class", cls.id, cls.span)
            if cls.category is not None and cls.category not in view.category_by_id:
                self.report("E_REF", f"unresolved category '{cls.category}'", cls.span)
            seen_ops = set()
            for op in cls.operations:
                if op in seen_ops:
                    self.report(
                        "E_DUP", f"duplicate operation '{op}' in class '{cls.id}'", cls.span
                    )
                seen_ops.add(op)
            self.positive(f"est_cost of '{cls.id}'", cls.est_cost, cls.span, strict=False)
            if cls.subordinate_to is not None and cls.subordinate_to not in classes:
                self.report(
                    "E_REF", f"unresolved class '{cls.subordinate_to}'", cls.span
                )
        self.cycles(
            "subordination",
            (
                (c.id, c.subordinate_to, c.span)
                for c in view.classes
                if c.subordinate_to in classes
            ),
        )
        for relation in view.relations:
            for end in (relation.source, relation.target):
                if end not in classes:
                    self.report("E_REF", f"unresolved class '{end}'", relation.span)
        self.cycles(
            "inheritance",
            (
                (r.source, r.target, r.span)
                for r in view.relations
                if r.kind is RelationKind.INHERITANCE
                and r.source in classes
                and r.target in classes
            ),
        )

    def process(self, view: ProcessView) -> None:
        self.unique("process", [(p.id, p.span) for p in view.processes])
        self.unique("task", [(t.id, t.span) for p in view.processes for t in p.tasks])
        for process in view.processes:
            self.identifier("process", process.id, process.span)
            if not process.tasks:
                self.report(
                    "E_INVALID", f"process '{process.id}' has no task", process.span
                )
            if process.replicas < 1:
                self.report(
                    "E_INVALID",
                    f"process '{process.id}' replicas must be >= 1",
                    process.span,
                )
            for task in process.tasks:
                self.identifier("task", task.id, task.span)
                self.positive(f"period of '{task.id}'", task.period_ms, task.span)
        tasks = view.task_by_id
        for connector in view.connectors:
            for end in (connector.source, connector.target):
                if end not in tasks:
                    self.report("E_REF", f"unresolved task '{end}'", connector.span)
            if connector.source == connector.target:
                self.report(
                    "E_INVALID",
                    f"connector joins task '{connector.source}' to itself",
                    connector.span,
                )

    def development(self, view: DevelopmentView) -> None:
        self.unique("layer", [(layer.number, layer.span) for layer in view.layers])
        numbers = sorted({layer.number for layer in view.layers})
        if numbers != list(range(1, len(numbers) + 1)):
            self.report(
                "E_INVALID",
                "layer numbers must be consecutive starting at 1",
                view.span,
            )
        self.unique("subsystem", [(s.id, s.span) for s in view.subsystems])
        for subsystem in view.subsystems:
            self.identifier("subsystem", subsystem.id, subsystem.span)
            if subsystem.layer not in numbers:
                self.report(
                    "E_REF", f"unresolved layer {subsystem.layer}", subsystem.span
                )
            self.unique(
                f"module in subsystem '{subsystem.id}'",
                [(m, subsystem.span) for m in subsystem.modules],
            )
            self.positive(f"ksloc of '{subsystem.id}'", subsystem.ksloc, subsystem.span)
        subsystems = view.subsystem_by_id
        for dependency in view.dependencies:
            for end in (dependency.source, dependency.target):
                if end not in subsystems:
                    self.report("E_REF", f"unresolved subsystem '{end}'", dependency.span)
            if dependency.source == dependency.target:
                self.report(
                    "E_INVALID",
                    f"subsystem '{dependency.source}' depends on itself",
                    dependency.span,
                )

    def physical(self, view: PhysicalView) -> None:
        self.unique("node", [(n.id, n.span) for n in view.nodes])
        for node in view.nodes:
            self.identifier("node", node.id, node.span)
            self.positive(f"capacity of '{node.id}'", node.capacity, node.span)
        nodes = view.node_by_id
        for link in view.links:
            if len(link.endpoints) < 2:
                self.report(
                    "E_INVALID", "link needs at least two distinct nodes", link.span
                )
            for end in link.endpoints:
                if end not in nodes:
                    self.report("E_REF", f"unresolved node '{end}'", link.span)
            self.positive("link bandwidth", link.bandwidth, link.span)
        self.unique("configuration", [(c.name, c.span) for c in view.configurations])
        processes = self.model.process.process_by_id if self.model.process else {}
        for config in view.configurations:
            self.identifier("configuration", config.name, config.span)
            self.unique(
                f"placement in '{config.name}'",
                [(p.process, p.span) for p in config.placements],
            )
            for placement in config.placements:
                if placement.process not in processes:
                    self.report(
                        "E_REF",
                        f"unresolved process '{placement.process}'",
                        placement.span,
                    )
                for node in placement.nodes:
                    if node not in nodes:
                        self.report("E_REF", f"unresolved node '{node}'", placement.span)

    def scenarios(self, view: ScenarioView) -> None:
        self.unique("scenario", [(s.id, s.span) for s in view.scenarios])
        for scenario in view.scenarios:
            self.identifier("scenario", scenario.id, scenario.span)
            self.positive(
                f"frequency of '{scenario.id}'",
                scenario.frequency_hz,
                scenario.span,
                strict=False,
            )
            seqs = [step.seq for step in scenario.steps]
            if seqs != list(range(1, len(seqs) + 1)):
                self.report(
                    "E_INVALID",
                    f"steps of '{scenario.id}' must be numbered 1..{len(seqs)}",
                    scenario.span,
                )

    def mappings(self) -> None:
        model = self.model
        classes = model.logical.class_by_id if model.logical else {}
        tasks = model.process.task_by_id if model.process else {}
        subsystems = model.development.subsystem_by_id if model.development else {}
        self.unique("l2p entry", [(e.class_id, e.span) for e in model.l2p])
        for entry in model.l2p:
            if entry.class_id not in classes:
                self.report("E_REF", f"unresolved class '{entry.class_id}'", entry.span)
            if not entry.tasks:
                self.report(
                    "E_INVALID", f"l2p entry for '{entry.class_id}' is empty", entry.span
                )
            for task in entry.tasks:
                if task not in tasks:
                    self.report("E_REF", f"unresolved task '{task}'", entry.span)
        self.unique("l2d entry", [(e.class_id, e.span) for e in model.l2d])
        for entry in model.l2d:
            if entry.class_id not in classes:
                self.report("E_REF", f"unresolved class '{entry.class_id}'", entry.span)
            if not entry.modules:
                self.report(
                    "E_INVALID", f"l2d entry for '{entry.class_id}' is empty", entry.span
                )
            for ref in entry.modules:
                subsystem = subsystems.get(ref.subsystem)
                if subsystem is None:
                    self.report(
                        "E_REF", f"unresolved subsystem '{ref.subsystem}'", entry.span
                    )
                elif ref.module not in subsystem.modules:
                    self.report("E_REF", f"unresolved module '{ref}'", entry.span)


def resolve(model: ArchitectureModel) -> List[Diagnostic]:
    """Dangling-reference, duplicate-id and invariant diagnostics, sorted"""
    found = _Resolver(model).run()
    logger.debug("model_resolved", model=model.name, diagnostics=len(found))
    return found
